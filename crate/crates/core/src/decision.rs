//! Decision rules: majority voting, MAP with class reputations, and the
//! low-rank (leading right singular vector) rule.
//!
//! Zero scores are resolved by a fair coin drawn from the caller's RNG, one
//! draw per tied task in task order.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{AnswerMatrix, DecisionVector, Labels, Problem};
use crate::objectives::{answer_weight, llr_sign};
use crate::rng;

fn coin<R: Rng + ?Sized>(rng: &mut R) -> i8 {
    if rng.random::<bool>() {
        1
    } else {
        -1
    }
}

/// Sign of the sum of each task's answers.
pub fn decide_majority<R: Rng + ?Sized>(a: &AnswerMatrix, rng: &mut R) -> DecisionVector {
    let decisions = (0..a.tasks)
        .map(|t| match a.row(t).map(|(_, v)| v as i64).sum::<i64>() {
            0 => coin(rng),
            s => s.signum() as i8,
        })
        .collect();
    Labels::new(decisions)
}

/// What the requester knows about workers: their class and the class error
/// probabilities per task.
#[derive(Debug, Clone, PartialEq)]
pub struct ReputationView {
    pub worker_class: Vec<usize>,
    /// `pi[t][k]`
    pub pi: Vec<Vec<f64>>,
}

impl ReputationView {
    pub fn of(p: &Problem) -> Self {
        ReputationView { worker_class: p.worker_classes(), pi: (0..p.tasks).map(|t| p.pi_row(t)).collect() }
    }

    pub fn classes(&self) -> usize {
        self.pi.first().map_or(0, |r| r.len())
    }
}

/// Posterior log-likelihood ratio `sum_k (d_k - 2 m_k) ln((1 - pi_k) / pi_k)`
/// from per-class `(d_k, m_k)` counts, `m_k` being the `-1` answers.
pub fn map_llr(counts: &[(u32, u32)], pi_row: &[f64]) -> Result<f64> {
    if counts.len() != pi_row.len() {
        return Err(Error::Dimension(format!("{} count pairs for {} classes", counts.len(), pi_row.len())));
    }
    let mut llr = 0.0;
    for (&(d, m), &pi) in counts.iter().zip(pi_row) {
        if !(pi > 0.0 && pi < 1.0) {
            return Err(Error::ClassProbabilityDomain(pi));
        }
        if m > d {
            return Err(Error::Dimension(format!("{m} negative answers out of {d}")));
        }
        llr += (d as f64 - 2.0 * m as f64) * answer_weight(pi);
    }
    Ok(llr)
}

/// MAP decisions with class-level reputations; each task is decided on its
/// own answers only.
pub fn decide_map<R: Rng + ?Sized>(a: &AnswerMatrix, view: &ReputationView, rng: &mut R) -> Result<DecisionVector> {
    if view.pi.len() != a.tasks || view.worker_class.len() != a.workers {
        return Err(Error::Dimension(format!(
            "reputation view covers {}x{}, answers are {}x{}",
            view.pi.len(),
            view.worker_class.len(),
            a.tasks,
            a.workers
        )));
    }
    let classes = view.classes();
    let mut decisions = Vec::with_capacity(a.tasks);
    for t in 0..a.tasks {
        let counts = a.class_counts(t, &view.worker_class, classes);
        let llr = map_llr(&counts, &view.pi[t])?;
        let scale: f64 = counts.iter().zip(&view.pi[t]).map(|(&(d, _), &pi)| d as f64 * answer_weight(pi).abs()).sum();
        decisions.push(match llr_sign(llr, scale) {
            0 => coin(rng),
            s => s,
        });
    }
    Ok(Labels::new(decisions))
}

/// Number of tasks whose answers sum to zero, i.e. majority coin flips.
pub fn majority_ties(a: &AnswerMatrix) -> usize {
    (0..a.tasks).filter(|&t| a.row(t).map(|(_, v)| v as i64).sum::<i64>() == 0).count()
}

/// Number of tasks whose MAP log-likelihood ratio is a tie.
pub fn map_ties(a: &AnswerMatrix, view: &ReputationView) -> Result<usize> {
    let classes = view.classes();
    let mut ties = 0;
    for t in 0..a.tasks {
        let counts = a.class_counts(t, &view.worker_class, classes);
        let llr = map_llr(&counts, &view.pi[t])?;
        let scale: f64 = counts.iter().zip(&view.pi[t]).map(|(&(d, _), &pi)| d as f64 * answer_weight(pi).abs()).sum();
        ties += (llr_sign(llr, scale) == 0) as usize;
    }
    Ok(ties)
}

/// Leading right singular vector of an answer matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularTriple {
    /// Unit vector over workers.
    pub v: Vec<f64>,
    pub sigma: f64,
    /// Power iterations spent, including any restart.
    pub iterations: usize,
    pub restarted: bool,
    /// Set when the leading singular value looked tied: two disconnected
    /// blocks with equal top values, or no convergence from the first start.
    /// [`decide_lra`] also sets it when the restart did not converge.
    pub degenerate: bool,
}

pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 1000;

/// Relative gap below which two block singular values count as tied.
const BLOCK_TIE_RTOL: f64 = 1e-9;

/// One connected block of the answer graph, with local indexing.
struct Block {
    workers: Vec<usize>,
    /// Rows of the block as `(local worker, answer)` lists.
    rows: Vec<Vec<(usize, f64)>>,
}

impl Block {
    fn apply_gram(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for row in &self.rows {
            let s: f64 = row.iter().map(|&(w, a)| a * x[w]).sum();
            for &(w, a) in row {
                out[w] += a * s;
            }
        }
    }

    fn sigma(&self, x: &[f64]) -> f64 {
        self.rows.iter().map(|row| row.iter().map(|&(w, a)| a * x[w]).sum::<f64>().powi(2)).sum::<f64>().sqrt()
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Splits the answer graph into connected blocks, ordered by smallest worker.
fn blocks(a: &AnswerMatrix) -> Vec<Block> {
    let mut parent: Vec<usize> = (0..a.tasks + a.workers).collect();
    let mut answered = vec![false; a.workers];
    for t in 0..a.tasks {
        for (w, _) in a.row(t) {
            answered[w] = true;
            let (x, y) = (find(&mut parent, t), find(&mut parent, a.tasks + w));
            if x != y {
                parent[x.max(y)] = x.min(y);
            }
        }
    }
    let mut block_of_root = HashMap::new();
    let mut out: Vec<Block> = Vec::new();
    let mut local = vec![usize::MAX; a.workers];
    for w in (0..a.workers).filter(|&w| answered[w]) {
        let root = find(&mut parent, a.tasks + w);
        let b = *block_of_root.entry(root).or_insert_with(|| {
            out.push(Block { workers: Vec::new(), rows: Vec::new() });
            out.len() - 1
        });
        local[w] = out[b].workers.len();
        out[b].workers.push(w);
    }
    for t in 0..a.tasks {
        let row: Vec<(usize, f64)> = a.row(t).map(|(w, v)| (local[w], v as f64)).collect();
        if !row.is_empty() {
            out[block_of_root[&find(&mut parent, t)]].rows.push(row);
        }
    }
    out
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

enum PowerOutcome {
    Converged(Vec<f64>, usize),
    /// `A^T A x` vanished.
    Annihilated(usize),
    /// Out of iterations; carries the last iterate.
    Unconverged(Vec<f64>, usize),
}

fn power_iterate(block: &Block, mut x: Vec<f64>, tol: f64, max_iter: usize) -> PowerOutcome {
    let mut next = vec![0.0; x.len()];
    for it in 1..=max_iter {
        block.apply_gram(&x, &mut next);
        if normalize(&mut next) == 0.0 {
            return PowerOutcome::Annihilated(it);
        }
        let diff = x.iter().zip(&next).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        std::mem::swap(&mut x, &mut next);
        if diff < tol {
            return PowerOutcome::Converged(x, it);
        }
    }
    PowerOutcome::Unconverged(x, max_iter)
}

/// Start vector near the normalized all-ones vector: each entry is scaled
/// by a seeded factor in `[0.5, 1.5]`. The exact all-ones vector can be
/// orthogonal to the leading direction of an integer matrix, and the
/// iteration then converges to a lesser eigenvector.
fn jittered_ones(n: usize, rng: &mut rng::SimRng) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| 1.0 + rng.random_range(-0.5..0.5)).collect();
    normalize(&mut x);
    x
}

struct BlockVector {
    v: Vec<f64>,
    iterations: usize,
    restarted: bool,
    converged: bool,
}

/// Power iteration on `A^T A` for one block from `start`, with one restart
/// from a seeded random unit vector. If the restart does not converge
/// either, its last iterate is returned unconverged.
fn block_singular_vector(block: &Block, start: Vec<f64>, tol: f64, max_iter: usize, seed: u64) -> Result<BlockVector> {
    let n = block.workers.len();
    let first = match power_iterate(block, start, tol, max_iter) {
        PowerOutcome::Converged(v, it) => return Ok(BlockVector { v, iterations: it, restarted: false, converged: true }),
        PowerOutcome::Annihilated(it) | PowerOutcome::Unconverged(_, it) => it,
    };
    let mut rng = rng::stream(&[seed, block.workers[0] as u64]);
    let mut start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    normalize(&mut start);
    match power_iterate(block, start, tol, max_iter) {
        PowerOutcome::Converged(v, it) => Ok(BlockVector { v, iterations: first + it, restarted: true, converged: true }),
        PowerOutcome::Unconverged(v, it) => {
            Ok(BlockVector { v, iterations: first + it, restarted: true, converged: false })
        }
        PowerOutcome::Annihilated(it) => Err(Error::NonConvergence { iterations: first + it }),
    }
}

/// Block-wise power iteration; the flag reports whether every block
/// converged.
fn singular_vector(a: &AnswerMatrix, tol: f64, max_iter: usize, seed: u64) -> Result<(SingularTriple, bool)> {
    if a.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut sigmas = Vec::new();
    let mut iterations = 0;
    let mut restarted = false;
    let mut converged = true;
    let parts = blocks(a);
    for (b, block) in parts.iter().enumerate() {
        let start = jittered_ones(block.workers.len(), &mut rng::stream(&[seed, block.workers[0] as u64, 1]));
        let found = block_singular_vector(block, start, tol, max_iter, seed)?;
        iterations += found.iterations;
        restarted |= found.restarted;
        converged &= found.converged;
        let sigma = block.sigma(&found.v);
        sigmas.push(sigma);
        if best.as_ref().is_none_or(|(s, _, _)| sigma > *s) {
            best = Some((sigma, b, found.v));
        }
    }
    let (sigma, b, local) = best.expect("a nonzero matrix has a block");
    let tied = sigmas.iter().enumerate().any(|(i, &s)| i != b && (sigma - s).abs() <= BLOCK_TIE_RTOL * sigma);
    let mut v = vec![0.0; a.workers];
    for (&w, x) in parts[b].workers.iter().zip(local) {
        v[w] = x;
    }
    Ok((SingularTriple { v, sigma, iterations, restarted, degenerate: tied || restarted }, converged))
}

/// Leading right singular vector of `a` by power iteration on `A^T A`.
///
/// The iteration runs separately on each connected block of the answer
/// graph and the block with the largest singular value wins, so `v` is
/// exactly zero outside that block. Convergence is declared when successive
/// iterates differ by less than `tol` in 2-norm; a block that fails to
/// converge twice is an error.
pub fn leading_right_singular_vector(a: &AnswerMatrix, tol: f64, max_iter: usize, seed: u64) -> Result<SingularTriple> {
    match singular_vector(a, tol, max_iter, seed)? {
        (triple, true) => Ok(triple),
        (triple, false) => Err(Error::NonConvergence { iterations: triple.iterations }),
    }
}

/// Low-rank decisions `sgn(sum_w a_tw v_w)`.
///
/// The sign of `v` is arbitrary, so it is oriented to agree with majority
/// voting on as many tasks as possible (tasks where either score is zero do
/// not count; a tie keeps the computed orientation).
///
/// When the top singular values are so close that the iteration has not
/// settled after the restart, the last iterate is used and the triple is
/// marked degenerate.
pub fn decide_lra<R: Rng + ?Sized>(a: &AnswerMatrix, rng: &mut R) -> Result<(DecisionVector, SingularTriple)> {
    let seed = rng.random::<u64>();
    let (mut triple, converged) = singular_vector(a, POWER_TOL, POWER_MAX_ITER, seed)?;
    triple.degenerate |= !converged;
    let scores: Vec<f64> = (0..a.tasks).map(|t| a.row(t).map(|(w, x)| x as f64 * triple.v[w]).sum()).collect();
    let mut agreement = 0i64;
    for (t, &s) in scores.iter().enumerate() {
        let majority: i64 = a.row(t).map(|(_, x)| x as i64).sum();
        if s.abs() > SCORE_EPS && majority != 0 {
            agreement += if (s > 0.0) == (majority > 0) { 1 } else { -1 };
        }
    }
    let orientation = if agreement < 0 { -1.0 } else { 1.0 };
    let decisions = scores
        .iter()
        .map(|&s| {
            let s = s * orientation;
            if s.abs() <= SCORE_EPS {
                coin(rng)
            } else if s > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    Ok((Labels::new(decisions), triple))
}

/// Scores this close to zero are ties (`v` is a unit vector and answers are
/// ±1, so genuine scores are far larger).
const SCORE_EPS: f64 = 1e-12;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ClassSpec;
    use crate::oracle::{symmetric_eigen, line_angle as angle};

    fn seeded(seed: u64) -> rng::SimRng {
        rng::stream(&[seed, 77])
    }

    #[test]
    fn majority_examples() {
        let a = AnswerMatrix::from_dense(&[vec![1, 1, -1], vec![-1, -1, 0]]);
        assert_eq!(decide_majority(&a, &mut seeded(0)).as_slice(), &[1, -1]);
    }

    #[test]
    fn majority_ties_are_fair() {
        let tie = AnswerMatrix::from_dense(&[vec![1, -1], vec![0, 0]]);
        let mut plus = [0usize; 2];
        for seed in 0..10_000 {
            let d = decide_majority(&tie, &mut seeded(seed));
            for (t, count) in plus.iter_mut().enumerate() {
                *count += (d.get(t) == 1) as usize;
            }
        }
        for count in plus {
            let frac = count as f64 / 10_000.0;
            assert!((0.48..=0.52).contains(&frac), "{frac}");
        }
    }

    #[test]
    fn llr_examples() {
        let v = map_llr(&[(3, 1)], &[0.1]).unwrap();
        assert!((v - 9f64.ln()).abs() < 1e-15);
        assert!((v - 2.197).abs() < 1e-3);
        assert_eq!(map_llr(&[(4, 2), (2, 1)], &[0.1, 0.3]).unwrap(), 0.0);
        assert_eq!(map_llr(&[(5, 0)], &[0.5]).unwrap(), 0.0);
        assert!(map_llr(&[(1, 0)], &[1.0]).is_err());
        assert!(map_llr(&[(1, 2)], &[0.2]).is_err());
    }

    #[test]
    fn map_examples() {
        let view = ReputationView { worker_class: vec![0, 0, 0], pi: vec![vec![0.1]] };
        let a = AnswerMatrix::from_dense(&[vec![1, 1, -1]]);
        assert_eq!(decide_map(&a, &view, &mut seeded(1)).unwrap().as_slice(), &[1]);

        // one reliable -1 against three weak +1
        let view = ReputationView { worker_class: vec![0, 1, 1, 1], pi: vec![vec![0.1, 0.45]] };
        let a = AnswerMatrix::from_dense(&[vec![-1, 1, 1, 1]]);
        assert_eq!(decide_map(&a, &view, &mut seeded(1)).unwrap().as_slice(), &[-1]);
    }

    #[test]
    fn map_with_spammers_only_is_a_coin() {
        let view = ReputationView { worker_class: vec![0, 0], pi: vec![vec![0.5]] };
        let a = AnswerMatrix::from_dense(&[vec![1, 1]]);
        let plus = (0..2000).filter(|&s| decide_map(&a, &view, &mut seeded(s)).unwrap().get(0) == 1).count();
        assert!((900..1100).contains(&plus), "{plus}");
    }

    #[test]
    fn view_from_problem() {
        let p = Problem::with_uniform_load(
            2,
            vec![ClassSpec::new(1, vec![0.1, 0.2]), ClassSpec::new(2, vec![0.3, 0.4])],
            1,
            1,
        );
        let v = ReputationView::of(&p);
        assert_eq!(v.worker_class, vec![0, 1, 1]);
        assert_eq!(v.pi, vec![vec![0.1, 0.3], vec![0.2, 0.4]]);
    }

    #[test]
    fn rank_one_fixed_point() {
        let u = [1i8, -1, 1];
        let w = [1i8, 1, -1, 1];
        let dense: Vec<Vec<i8>> = u.iter().map(|&x| w.iter().map(|&y| x * y).collect()).collect();
        let a = AnswerMatrix::from_dense(&dense);
        let t = leading_right_singular_vector(&a, POWER_TOL, POWER_MAX_ITER, 0).unwrap();
        let w: Vec<f64> = w.iter().map(|&x| x as f64).collect();
        assert!(angle(&t.v, &w) < 1e-12);
        assert!((t.sigma - 3f64.sqrt() * 2.0).abs() < 1e-12);
        assert!((t.v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn diagonal_matrix() {
        // AnswerMatrix is ±1 only, so emulate [[2, 0], [0, 1]] by duplicating the first row
        let a = AnswerMatrix::from_dense(&[vec![1, 0], vec![1, 0], vec![1, 0], vec![1, 0], vec![0, 1]]);
        let t = leading_right_singular_vector(&a, POWER_TOL, POWER_MAX_ITER, 0).unwrap();
        assert!((t.v[0].abs() - 1.0).abs() < 1e-12 && t.v[1] == 0.0);
        assert!((t.sigma - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_is_an_error() {
        let a = AnswerMatrix::from_dense(&[vec![0, 0]]);
        assert!(matches!(leading_right_singular_vector(&a, 1e-10, 10, 0), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn restart_when_the_start_is_annihilated() {
        // A * ones = 0 but the matrix is nonzero
        let a = AnswerMatrix::from_dense(&[vec![1, -1], vec![1, -1]]);
        let block = blocks(&a).remove(0);
        let ones = vec![0.5f64.sqrt(); 2];
        let found = block_singular_vector(&block, ones, POWER_TOL, POWER_MAX_ITER, 3).unwrap();
        assert!(found.restarted && found.converged);
        assert!(angle(&found.v, &[1.0, -1.0]) < 1e-12);
        let t = leading_right_singular_vector(&a, POWER_TOL, POWER_MAX_ITER, 3).unwrap();
        assert!(angle(&t.v, &[1.0, -1.0]) < 1e-12);
    }

    #[test]
    fn start_orthogonal_to_the_leading_direction() {
        // A * ones is parallel to the first row, an eigenvector of A^T A
        // with eigenvalue 3; the leading eigenvalue is 6 (second row)
        let a = AnswerMatrix::from_dense(&[vec![0, 1, 1, 1, 0, 0, 0, 0], vec![-1, 0, -1, 1, 1, 1, -1, 0]]);
        let t = leading_right_singular_vector(&a, POWER_TOL, POWER_MAX_ITER, 0).unwrap();
        assert!(angle(&t.v, &[-1.0, 0.0, -1.0, 1.0, 1.0, 1.0, -1.0, 0.0]) < 1e-8);
        assert!((t.sigma - 6f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn slow_convergence_is_an_error_but_lra_still_decides() {
        // near-tied top singular values: the iteration needs far more than 5 steps
        let a = AnswerMatrix::from_dense(&[vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 1]]);
        assert!(matches!(leading_right_singular_vector(&a, 1e-14, 2, 0), Err(Error::NonConvergence { iterations: 4 })));
        let (triple, converged) = singular_vector(&a, 1e-14, 2, 0).unwrap();
        assert!(!converged && triple.restarted);
    }

    #[test]
    fn matches_dense_eigensolver() {
        let mut rng = seeded(5);
        let mut checked = 0;
        while checked < 20 {
            let dense: Vec<Vec<i8>> = (0..6)
                .map(|_| (0..8).map(|_| [0i8, 0, 1, -1][rng.random_range(0..4)]).collect())
                .collect();
            let a = AnswerMatrix::from_dense(&dense);
            if a.is_zero() {
                continue;
            }
            let m = a.to_dense();
            let gram: Vec<Vec<f64>> =
                (0..8).map(|i| (0..8).map(|j| (0..6).map(|t| m[t][i] * m[t][j]).sum()).collect()).collect();
            let (values, vectors) = symmetric_eigen(&gram);
            if values[0] - values[1] < 1e-6 * values[0] {
                continue;
            }
            let t = leading_right_singular_vector(&a, POWER_TOL, 100_000, 1).unwrap();
            assert!(angle(&t.v, &vectors[0]) < 1e-8, "{dense:?}");
            assert!((t.sigma - values[0].sqrt()).abs() < 1e-8);
            checked += 1;
        }
    }

    #[test]
    fn perfect_worker_recovers_truth() {
        let truth = [1i8, -1, -1, 1, 1];
        let a = AnswerMatrix::from_dense(&truth.iter().map(|&x| vec![x]).collect::<Vec<_>>());
        let (d, _) = decide_lra(&a, &mut seeded(2)).unwrap();
        assert_eq!(d.as_slice(), &truth);
    }

    #[test]
    fn block_diagonal_answers_leave_one_block_undecided() {
        // tasks 0-1 answered by workers 0-2, tasks 2-3 by workers 3-4
        let a = AnswerMatrix::from_dense(&[
            vec![1, 1, 1, 0, 0],
            vec![-1, -1, -1, 0, 0],
            vec![0, 0, 0, 1, 1],
            vec![0, 0, 0, -1, -1],
        ]);
        let t = leading_right_singular_vector(&a, POWER_TOL, POWER_MAX_ITER, 0).unwrap();
        assert_eq!(&t.v[3..], &[0.0, 0.0]);
        let mut flips = [0usize; 2];
        for seed in 0..400 {
            let (d, _) = decide_lra(&a, &mut seeded(seed)).unwrap();
            assert_eq!(&d.as_slice()[..2], &[1, -1]);
            flips[0] += (d.get(2) == 1) as usize;
            flips[1] += (d.get(3) == 1) as usize;
        }
        assert!(flips.iter().all(|&f| (150..250).contains(&f)), "{flips:?}");
    }

    #[test]
    fn equal_blocks_raise_the_degeneracy_flag() {
        let a = AnswerMatrix::from_dense(&[vec![1, 1, 0, 0], vec![0, 0, 1, 1]]);
        let t = leading_right_singular_vector(&a, POWER_TOL, POWER_MAX_ITER, 0).unwrap();
        assert!(t.degenerate);
        assert_eq!(&t.v[2..], &[0.0, 0.0]);
    }

    #[test]
    fn negating_answers_negates_decisions() {
        let a = AnswerMatrix::from_dense(&[vec![1, 1, -1, 0], vec![-1, 0, -1, -1], vec![1, -1, 1, 1]]);
        let view = ReputationView { worker_class: vec![0, 0, 1, 1], pi: vec![vec![0.1, 0.3]; 3] };
        let n = a.negated();
        let flip = |l: &Labels| l.as_slice().iter().map(|x| -x).collect::<Vec<_>>();
        assert_eq!(flip(&decide_majority(&a, &mut seeded(0))), decide_majority(&n, &mut seeded(0)).as_slice());
        assert_eq!(flip(&decide_map(&a, &view, &mut seeded(0)).unwrap()), decide_map(&n, &view, &mut seeded(0)).unwrap().as_slice());
    }
}
