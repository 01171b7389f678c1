//! Brute-force reference computations.
//!
//! These enumerate raw answer patterns or full search spaces and share no
//! code with the count-lattice, power-iteration and greedy routines they are
//! used to check.

use crate::error::{Error, Result};
use crate::model::{DegreeMatrix, Problem};
use crate::objectives::{evaluate_objective, ObjectiveKind};

/// Largest number of answers the pattern enumerators accept.
pub const PATTERN_LIMIT: usize = 20;

/// Class of each of the `sum(d)` answers, after checking the size guard.
fn answer_classes(d: &[u32], pi: &[f64]) -> Result<Vec<usize>> {
    if d.len() != pi.len() {
        return Err(Error::Dimension(format!("{} degrees for {} class probabilities", d.len(), pi.len())));
    }
    if let Some(&bad) = pi.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::ClassProbabilityDomain(bad));
    }
    let n: usize = d.iter().map(|&v| v as usize).sum();
    if n > PATTERN_LIMIT {
        return Err(Error::EnumerationTooLarge { size: n, limit: PATTERN_LIMIT });
    }
    Ok(d.iter().enumerate().flat_map(|(k, &dk)| std::iter::repeat_n(k, dk as usize)).collect())
}

/// `(P(pattern | tau = +1), P(pattern | tau = -1))` for every answer pattern.
/// Bit `i` of the pattern set means answer `i` is `-1`.
fn pattern_likelihoods(d: &[u32], pi: &[f64]) -> Result<Vec<(f64, f64)>> {
    let classes = answer_classes(d, pi)?;
    let n = classes.len();
    Ok((0u32..1 << n)
        .map(|pattern| {
            let mut pos = 1.0;
            let mut neg = 1.0;
            for (i, &k) in classes.iter().enumerate() {
                let minus = pattern >> i & 1 == 1;
                let p = pi[k];
                if minus {
                    pos *= p;
                    neg *= 1.0 - p;
                } else {
                    pos *= 1.0 - p;
                    neg *= p;
                }
            }
            (pos, neg)
        })
        .collect())
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// `H(a) - H(a | tau)` in bits by enumerating all `2^sum(d)` answer patterns.
pub fn brute_force_mutual_information(d: &[u32], pi: &[f64]) -> Result<f64> {
    let mut h_answers = 0.0;
    let mut h_given_truth = 0.0;
    for (pos, neg) in pattern_likelihoods(d, pi)? {
        h_answers -= plogp(0.5 * (pos + neg));
        h_given_truth -= 0.5 * (plogp(pos) + plogp(neg));
    }
    Ok(h_answers - h_given_truth)
}

/// MAP error for `tau = +1` by enumerating patterns and comparing the
/// posterior with 1/2 directly; exact posterior ties cost half an error.
pub fn brute_force_task_error(d: &[u32], pi: &[f64]) -> Result<f64> {
    let mut error = 0.0;
    for (pos, neg) in pattern_likelihoods(d, pi)? {
        let gap = pos - neg;
        if gap.abs() <= 1e-9 * pos.max(neg) {
            error += 0.5 * pos;
        } else if pos / (pos + neg) < 0.5 {
            error += pos;
        }
    }
    Ok(error)
}

/// Bayes risk `sum_a P(a) min(P(tau=+1 | a), P(tau=-1 | a))`: the smallest
/// error any decision function of the answers can achieve.
pub fn posterior_min_error(d: &[u32], pi: &[f64]) -> Result<f64> {
    Ok(pattern_likelihoods(d, pi)?.into_iter().map(|(pos, neg)| 0.5 * pos.min(neg)).sum())
}

/// Average error of an arbitrary deterministic decision function, where
/// `decide(pattern)` returns the decided label (+1, -1, or 0 for a coin flip).
pub fn decision_rule_error(d: &[u32], pi: &[f64], mut decide: impl FnMut(u32) -> i8) -> Result<f64> {
    let mut error = 0.0;
    for (pattern, (pos, neg)) in pattern_likelihoods(d, pi)?.into_iter().enumerate() {
        // half the weight comes from each truth value
        match decide(pattern as u32) {
            1 => error += 0.5 * neg,
            -1 => error += 0.5 * pos,
            _ => error += 0.25 * (pos + neg),
        }
    }
    Ok(error)
}

/// Eigen-decomposition of a dense symmetric matrix. Returns eigenvalues in
/// decreasing order with matching eigenvectors (as rows).
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
    let eig = nalgebra::SymmetricEigen::try_new(m, f64::EPSILON, 0).expect("symmetric eigensolver converges");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
    (values, vectors)
}

/// Angle in radians between the lines spanned by `u` and `v`, computed as
/// `2 asin(|u - v| / 2)` on normalized vectors, which stays accurate for
/// nearly parallel inputs.
pub fn line_angle(u: &[f64], v: &[f64]) -> f64 {
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let sign = if dot < 0.0 { -1.0 } else { 1.0 };
    let gap = u.iter().zip(v).map(|(a, b)| (a / nu - sign * b / nv).powi(2)).sum::<f64>().sqrt();
    2.0 * (gap / 2.0).min(1.0).asin()
}

/// Largest feasible value of `kind` over every degree matrix of a tiny
/// problem, with an optimal matrix.
pub fn best_degree_matrix(kind: ObjectiveKind, p: &Problem) -> Result<(f64, DegreeMatrix)> {
    let cells = p.tasks * p.num_classes();
    let caps: Vec<u32> = (0..p.tasks)
        .flat_map(|_| p.classes.iter().map(|c| c.size.min(p.budget) as u32))
        .collect();
    let space: u128 = caps.iter().map(|&c| c as u128 + 1).product();
    if space > 10_000_000 {
        return Err(Error::EnumerationTooLarge { size: space as usize, limit: 10_000_000 });
    }
    let mut cell = vec![0u32; cells];
    let mut best: Option<(f64, DegreeMatrix)> = None;
    loop {
        let rows: Vec<Vec<u32>> = cell.chunks(p.num_classes()).map(|c| c.to_vec()).collect();
        let d = DegreeMatrix::from_rows(&rows);
        if d.is_feasible(p) {
            let value = evaluate_objective(kind, &d, p)?;
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, d));
            }
        }
        let mut i = 0;
        loop {
            if i == cells {
                return Ok(best.expect("the empty matrix is always feasible"));
            }
            if cell[i] < caps[i] {
                cell[i] += 1;
                break;
            }
            cell[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ClassSpec;

    #[test]
    fn single_answer_identities() {
        let hb = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        let mi = brute_force_mutual_information(&[1], &[0.3]).unwrap();
        assert!((mi - (1.0 - hb(0.3))).abs() < 1e-14);
        assert_eq!(brute_force_mutual_information(&[0], &[0.3]).unwrap(), 0.0);
        assert!((brute_force_task_error(&[1], &[0.2]).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn two_class_error_by_hand() {
        // class 0 (pi 0.1) outweighs class 1 (pi 0.4): MAP follows class 0
        let e = brute_force_task_error(&[1, 1], &[0.1, 0.4]).unwrap();
        assert!((e - 0.1).abs() < 1e-15);
    }

    #[test]
    fn size_guard() {
        assert!(matches!(
            brute_force_task_error(&[11, 10], &[0.1, 0.2]),
            Err(Error::EnumerationTooLarge { size: 21, .. })
        ));
    }

    #[test]
    fn bayes_risk_matches_half_tie_error() {
        for (d, pi) in [(vec![2u32], vec![0.1]), (vec![3, 1], vec![0.2, 0.35]), (vec![2, 2], vec![0.1, 0.1])] {
            let a = brute_force_task_error(&d, &pi).unwrap();
            let b = posterior_min_error(&d, &pi).unwrap();
            assert!((a - b).abs() < 1e-14, "{d:?}: {a} vs {b}");
        }
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        let m = vec![vec![2.0, 1.0, 0.0], vec![1.0, 2.0, 0.0], vec![0.0, 0.0, 5.0]];
        let (values, vectors) = symmetric_eigen(&m);
        assert!((values[0] - 5.0).abs() < 1e-12);
        assert!((values[1] - 3.0).abs() < 1e-12);
        assert!((values[2] - 1.0).abs() < 1e-12);
        assert!((vectors[0][2].abs() - 1.0).abs() < 1e-12);
        let r = 0.5f64.sqrt();
        assert!((vectors[1][0].abs() - r).abs() < 1e-12 && (vectors[1][1].abs() - r).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_optimum_on_one_task() {
        let classes = vec![ClassSpec::uniform(2, 1, 0.1), ClassSpec::uniform(2, 1, 0.4)];
        let p = Problem::with_uniform_load(1, classes, 1, 2);
        let (_, d) = best_degree_matrix(ObjectiveKind::MutualInfo, &p).unwrap();
        assert_eq!(d, DegreeMatrix::from_rows(&[vec![2, 0]]));
    }
}
