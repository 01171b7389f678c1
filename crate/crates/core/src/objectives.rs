//! Performance parameters of a degree matrix.
//!
//! Per-task quantities depend only on the task's degree vector `d` (workers
//! per class) and its class error probabilities `pi`. Because workers within
//! a class are exchangeable, sums over answer patterns collapse to sums over
//! the count lattice `m = (m_1, ..., m_K)`, `0 <= m_k <= d_k`, where `m_k` is
//! the number of wrong answers from class `k`.
//!
//! Entropies and mutual information are in bits; log-likelihood ratios use
//! natural logarithms.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{DegreeMatrix, Problem};

pub use crate::oracle::{brute_force_mutual_information, brute_force_task_error};

/// Largest count lattice the exact routines will enumerate.
pub const LATTICE_LIMIT: u128 = 100_000_000;

/// Relative tolerance under which a log-likelihood ratio counts as a tie.
const TIE_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ChernoffVariant {
    /// `exp(-S / sum_k (d_k z_k)^2)` with `S = sum_k d_k (1 - 2 pi_k) z_k`.
    AsPrinted,
    /// Hoeffding bound on the LLR sum, `exp(-S^2 / (2 sum_k d_k z_k^2))`.
    #[default]
    Corrected,
}

impl FromStr for ChernoffVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "corrected" => Ok(ChernoffVariant::Corrected),
            "as_printed" | "asprinted" | "printed" => Ok(ChernoffVariant::AsPrinted),
            _ => Err(format!("unknown Chernoff variant `{s}` (expected `corrected` or `as_printed`)")),
        }
    }
}

impl fmt::Display for ChernoffVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChernoffVariant::AsPrinted => "as_printed",
            ChernoffVariant::Corrected => "corrected",
        })
    }
}

/// The six allocation objectives. All are oriented so that larger is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectiveKind {
    /// P1: minus the average task error probability.
    AvgError,
    /// P2: minus the average Chernoff error estimate.
    AvgChernoff(ChernoffVariant),
    /// P3: total mutual information between answers and truth.
    MutualInfo,
    /// P4: minus the worst task error probability.
    MaxError,
    /// P5: minus the worst Chernoff error estimate.
    MaxChernoff(ChernoffVariant),
    /// P6: smallest per-task mutual information.
    MinMutualInfo,
}

/// How per-task scores combine into the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    Mean,
    Sum,
    Min,
}

impl ObjectiveKind {
    pub fn all(variant: ChernoffVariant) -> [ObjectiveKind; 6] {
        [
            ObjectiveKind::AvgError,
            ObjectiveKind::AvgChernoff(variant),
            ObjectiveKind::MutualInfo,
            ObjectiveKind::MaxError,
            ObjectiveKind::MaxChernoff(variant),
            ObjectiveKind::MinMutualInfo,
        ]
    }

    /// Parses `P1`..`P6`; the Chernoff variant applies to P2 and P5.
    pub fn parse(name: &str, variant: ChernoffVariant) -> std::result::Result<Self, String> {
        match name.to_ascii_uppercase().as_str() {
            "P1" => Ok(ObjectiveKind::AvgError),
            "P2" => Ok(ObjectiveKind::AvgChernoff(variant)),
            "P3" => Ok(ObjectiveKind::MutualInfo),
            "P4" => Ok(ObjectiveKind::MaxError),
            "P5" => Ok(ObjectiveKind::MaxChernoff(variant)),
            "P6" => Ok(ObjectiveKind::MinMutualInfo),
            _ => Err(format!("unknown objective `{name}` (expected P1..P6)")),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ObjectiveKind::AvgError => "P1",
            ObjectiveKind::AvgChernoff(_) => "P2",
            ObjectiveKind::MutualInfo => "P3",
            ObjectiveKind::MaxError => "P4",
            ObjectiveKind::MaxChernoff(_) => "P5",
            ObjectiveKind::MinMutualInfo => "P6",
        }
    }

    pub fn aggregate(&self) -> Aggregate {
        match self {
            ObjectiveKind::AvgError | ObjectiveKind::AvgChernoff(_) => Aggregate::Mean,
            ObjectiveKind::MutualInfo => Aggregate::Sum,
            _ => Aggregate::Min,
        }
    }

    /// The per-task score: minus an error measure, or the information.
    pub fn task_score(&self, d: &[u32], pi: &[f64]) -> Result<f64> {
        match *self {
            ObjectiveKind::AvgError | ObjectiveKind::MaxError => Ok(-exact_task_error(d, pi)?),
            ObjectiveKind::AvgChernoff(v) | ObjectiveKind::MaxChernoff(v) => Ok(-chernoff_task_error(d, pi, v)?),
            ObjectiveKind::MutualInfo | ObjectiveKind::MinMutualInfo => task_mutual_information(d, pi),
        }
    }

    /// Combines per-task scores.
    pub fn combine(&self, scores: &[f64]) -> f64 {
        match self.aggregate() {
            Aggregate::Mean => scores.iter().sum::<f64>() / scores.len().max(1) as f64,
            Aggregate::Sum => scores.iter().sum(),
            Aggregate::Min => scores.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityDomain(p));
    }
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

/// LLR weight of one answer from a worker with error probability `pi`.
pub fn answer_weight(pi: f64) -> f64 {
    ((1.0 - pi) / pi).ln()
}

/// Sign of a log-likelihood ratio, treating values within rounding of zero
/// as ties. `scale` is the largest magnitude the ratio could take.
pub(crate) fn llr_sign(llr: f64, scale: f64) -> i8 {
    if llr.abs() <= TIE_RTOL * scale {
        0
    } else if llr > 0.0 {
        1
    } else {
        -1
    }
}

fn check_task_inputs(d: &[u32], pi: &[f64]) -> Result<()> {
    if d.len() != pi.len() {
        return Err(Error::Dimension(format!("{} degrees for {} class probabilities", d.len(), pi.len())));
    }
    if let Some(&bad) = pi.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::ClassProbabilityDomain(bad));
    }
    Ok(())
}

fn check_lattice(d: &[u32]) -> Result<()> {
    let mut points: u128 = 1;
    for &dk in d {
        points = points.saturating_mul(dk as u128 + 1);
        if points > LATTICE_LIMIT {
            return Err(Error::LatticeTooLarge { points, limit: LATTICE_LIMIT });
        }
    }
    Ok(())
}

fn ln_binomials(n: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for m in 1..=n {
        acc += ((n - m + 1) as f64).ln() - (m as f64).ln();
        out.push(acc);
    }
    out
}

/// Per-class tables over `m = 0..=d`.
struct ClassTerms {
    ln_count: Vec<f64>,
    /// ln P(one specific pattern with m wrong answers | tau = +1)
    ln_pos: Vec<f64>,
    /// ln P(the same pattern | tau = -1)
    ln_neg: Vec<f64>,
    llr: Vec<f64>,
}

impl ClassTerms {
    fn new(d: u32, pi: f64) -> Self {
        let (lp, lq) = (pi.ln(), (1.0 - pi).ln());
        let z = answer_weight(pi);
        let ms = 0..=d;
        ClassTerms {
            ln_count: ln_binomials(d),
            ln_pos: ms.clone().map(|m| m as f64 * lp + (d - m) as f64 * lq).collect(),
            ln_neg: ms.clone().map(|m| (d - m) as f64 * lp + m as f64 * lq).collect(),
            llr: ms.map(|m| (d as f64 - 2.0 * m as f64) * z).collect(),
        }
    }
}

/// Visits every count vector `m` with `0 <= m_k <= d_k`.
fn for_each_count(d: &[u32], mut f: impl FnMut(&[u32])) {
    let mut m = vec![0u32; d.len()];
    loop {
        f(&m);
        let mut k = 0;
        loop {
            if k == d.len() {
                return;
            }
            if m[k] < d[k] {
                m[k] += 1;
                break;
            }
            m[k] = 0;
            k += 1;
        }
    }
}

fn llr_scale(d: &[u32], pi: &[f64]) -> f64 {
    d.iter().zip(pi).map(|(&dk, &p)| dk as f64 * answer_weight(p).abs()).sum()
}

/// Error probability of MAP decoding for one task, counting ties as half
/// an error.
pub fn exact_task_error(d: &[u32], pi: &[f64]) -> Result<f64> {
    check_task_inputs(d, pi)?;
    check_lattice(d)?;
    let terms: Vec<_> = d.iter().zip(pi).map(|(&dk, &p)| ClassTerms::new(dk, p)).collect();
    let scale = llr_scale(d, pi);
    let mut error = 0.0;
    for_each_count(d, |m| {
        let mut ln_prob = 0.0;
        let mut llr = 0.0;
        for (t, &mk) in terms.iter().zip(m) {
            let mk = mk as usize;
            ln_prob += t.ln_count[mk] + t.ln_pos[mk];
            llr += t.llr[mk];
        }
        match llr_sign(llr, scale) {
            -1 => error += ln_prob.exp(),
            0 => error += 0.5 * ln_prob.exp(),
            _ => {}
        }
    });
    Ok(error)
}

/// Chernoff-style estimate of the task error probability, clamped to 1.
/// Returns 1 when no answer carries information.
pub fn chernoff_task_error(d: &[u32], pi: &[f64], variant: ChernoffVariant) -> Result<f64> {
    check_task_inputs(d, pi)?;
    let mut drift = 0.0;
    let mut printed_den = 0.0;
    let mut hoeffding_den = 0.0;
    for (&dk, &p) in d.iter().zip(pi) {
        let z = answer_weight(p);
        let dk = dk as f64;
        drift += dk * (1.0 - 2.0 * p) * z;
        printed_den += (dk * z).powi(2);
        hoeffding_den += dk * z * z;
    }
    if hoeffding_den == 0.0 {
        return Ok(1.0);
    }
    let exponent = match variant {
        ChernoffVariant::AsPrinted => drift / printed_den,
        ChernoffVariant::Corrected => drift * drift / (2.0 * hoeffding_den),
    };
    Ok((-exponent).exp().min(1.0))
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

/// Mutual information in bits between a task's answers and its truth,
/// `H(answers) - sum_k d_k H_b(pi_k)`.
pub fn task_mutual_information(d: &[u32], pi: &[f64]) -> Result<f64> {
    check_task_inputs(d, pi)?;
    check_lattice(d)?;
    let terms: Vec<_> = d.iter().zip(pi).map(|(&dk, &p)| ClassTerms::new(dk, p)).collect();
    let half = 0.5f64.ln();
    let mut entropy_nats = 0.0;
    for_each_count(d, |m| {
        let (mut ln_count, mut ln_pos, mut ln_neg) = (0.0, 0.0, 0.0);
        for (t, &mk) in terms.iter().zip(m) {
            let mk = mk as usize;
            ln_count += t.ln_count[mk];
            ln_pos += t.ln_pos[mk];
            ln_neg += t.ln_neg[mk];
        }
        let ln_pattern = half + log_sum_exp(ln_pos, ln_neg);
        entropy_nats -= (ln_count + ln_pattern).exp() * ln_pattern;
    });
    let mut noise = 0.0;
    for (&dk, &p) in d.iter().zip(pi) {
        noise += dk as f64 * binary_entropy(p)?;
    }
    Ok((entropy_nats / std::f64::consts::LN_2 - noise).max(0.0))
}

/// Per-task scores of `kind` for every task of `degrees`.
pub fn task_scores(kind: ObjectiveKind, degrees: &DegreeMatrix, p: &Problem) -> Result<Vec<f64>> {
    if degrees.tasks != p.tasks || degrees.classes != p.num_classes() {
        return Err(Error::Dimension(format!(
            "degree matrix is {}x{}, problem is {}x{}",
            degrees.tasks,
            degrees.classes,
            p.tasks,
            p.num_classes()
        )));
    }
    (0..p.tasks).map(|t| kind.task_score(degrees.row(t), &p.pi_row(t))).collect()
}

/// Value of objective `kind` for a degree matrix. Larger is better.
pub fn evaluate_objective(kind: ObjectiveKind, degrees: &DegreeMatrix, p: &Problem) -> Result<f64> {
    Ok(kind.combine(&task_scores(kind, degrees, p)?))
}
