//! Monte Carlo estimation of task error probabilities.
//!
//! A [`Scenario`] fixes the worker classes, the allocation/decision schemes
//! and a sweep over either the budget per task `beta` or the bimodal mixing
//! parameter `x`. Every random draw comes from a stream keyed by the run
//! seed, the sweep point, the trial index and a purpose tag, so trial `i`
//! produces the same counts no matter how many trials run or in what order.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use crate::allocation::{greedy_allocate, realize_assignment_random, uniform_allocate};
use crate::decision::{decide_lra, decide_majority, decide_map, majority_ties, map_ties, ReputationView};
use crate::error::{Error, Result};
use crate::model::{
    build_population, validate_problem, AnswerMatrix, Assignment, DegreeMatrix, Labels, PopulationRealization,
    Problem, TruthVector, WorkerModel,
};
use crate::objectives::ObjectiveKind;
use crate::rng;

/// An allocation strategy paired with a decision rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    MajorityUniform,
    LraUniform,
    LraGreedy,
    MapGreedy,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::MajorityUniform, Scheme::LraUniform, Scheme::LraGreedy, Scheme::MapGreedy];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::MajorityUniform => "majority_uniform",
            Scheme::LraUniform => "lra_uniform",
            Scheme::LraGreedy => "lra_greedy",
            Scheme::MapGreedy => "map_greedy",
        }
    }

    pub fn uses_greedy(&self) -> bool {
        matches!(self, Scheme::LraGreedy | Scheme::MapGreedy)
    }

    fn tag(&self) -> u64 {
        *self as u64
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace(['-', ' ', '+'], "_");
        match key.as_str() {
            "majority_uniform" | "majority" => Ok(Scheme::MajorityUniform),
            "lra_uniform" => Ok(Scheme::LraUniform),
            "lra_greedy" => Ok(Scheme::LraGreedy),
            "map_greedy" => Ok(Scheme::MapGreedy),
            _ => Err(format!(
                "unknown scheme `{s}` (expected majority_uniform, lra_uniform, lra_greedy or map_greedy)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    Beta,
    X,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::Beta => "beta",
            SweepVariable::X => "x",
        }
    }
}

impl FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "beta" => Ok(SweepVariable::Beta),
            "x" => Ok(SweepVariable::X),
            _ => Err(format!("unknown sweep variable `{s}` (expected `beta` or `x`)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

/// One `(beta, x)` operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub beta: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    /// Workers, loads and class probabilities. The budget is set per point
    /// from `beta`.
    pub problem: Problem,
    pub schemes: Vec<Scheme>,
    pub sweep: Sweep,
    /// Value of the variable that is not swept.
    pub beta: f64,
    pub x: f64,
    pub trials: usize,
    pub seed: u64,
    /// Greedy objective.
    pub objective: ObjectiveKind,
}

pub const DEFAULT_TRIALS: usize = 2000;

impl Scenario {
    pub fn points(&self) -> Vec<SweepPoint> {
        self.sweep
            .values
            .iter()
            .map(|&v| match self.sweep.variable {
                SweepVariable::Beta => SweepPoint { beta: v, x: self.x },
                SweepVariable::X => SweepPoint { beta: self.beta, x: v },
            })
            .collect()
    }

    /// Assignments `round(beta * T)` for a budget per task.
    pub fn budget(&self, beta: f64) -> usize {
        (beta * self.problem.tasks as f64).round() as usize
    }

    /// The problem with the budget of `beta`.
    pub fn problem_at(&self, beta: f64) -> Problem {
        self.problem.with_budget(self.budget(beta))
    }

    /// A copy sweeping one variable over the given values.
    pub fn with_sweep(&self, variable: SweepVariable, values: Vec<f64>) -> Scenario {
        Scenario { sweep: Sweep { variable, values }, ..self.clone() }
    }

    pub fn with_trials(&self, trials: usize) -> Scenario {
        Scenario { trials, ..self.clone() }
    }

    /// Checks everything [`monte_carlo`] relies on; returns every problem
    /// found, one message each.
    pub fn check(&self) -> std::result::Result<(), Vec<String>> {
        let mut issues = Vec::new();
        if let Err(found) = validate_problem(&self.problem.with_budget(1)) {
            issues.extend(found.iter().map(|i| i.to_string()));
        }
        if self.schemes.is_empty() {
            issues.push("at least one scheme is required".into());
        }
        if self.sweep.values.is_empty() {
            issues.push("the sweep needs at least one value".into());
        }
        if self.trials == 0 {
            issues.push("trials must be at least 1".into());
        }
        let capacity = self.problem.loads.iter().map(|&r| r as u64).sum::<u64>();
        for point in self.points() {
            if !(point.beta.is_finite() && point.beta > 0.0) {
                issues.push(format!("beta {} must be positive", point.beta));
            } else if self.budget(point.beta) as u64 > capacity {
                issues.push(format!(
                    "beta {} needs {} assignments, the workers can take at most {capacity}",
                    point.beta,
                    self.budget(point.beta)
                ));
            }
            if !(0.0..=1.0).contains(&point.x) {
                issues.push(format!("x {} is outside [0, 1]", point.x));
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(issues)
        }
    }
}

/// One Monte Carlo estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub scheme: Scheme,
    pub beta: f64,
    pub x: f64,
    /// Wrong decisions over `trials * T` task decisions.
    pub pe: f64,
    /// Nominal binomial standard error `sqrt(pe (1 - pe) / (trials T))`.
    /// Task errors within a trial are correlated through shared workers, so
    /// the true spread can be larger.
    pub stderr: f64,
    pub trials: usize,
    pub errors: u64,
    /// For majority and MAP: fraction of task decisions settled by a coin.
    /// For LRA: fraction of trials whose singular vector was flagged
    /// degenerate.
    pub tie_flag_rate: f64,
    /// Time spent on the whole sweep point (all schemes together).
    pub wall_clock: Duration,
}

/// Errors and tie events of every scheme in one trial, in scheme order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    pub errors: Vec<usize>,
    pub ties: Vec<usize>,
}

/// Draws each answer independently: wrong with probability `p_tw`.
pub fn sample_answers<R: Rng + ?Sized>(
    a: &Assignment,
    pop: &PopulationRealization,
    truth: &TruthVector,
    rng: &mut R,
) -> Result<AnswerMatrix> {
    if a.tasks != pop.tasks || a.workers != pop.workers || truth.len() != a.tasks {
        return Err(Error::Dimension(format!(
            "assignment {}x{}, population {}x{}, truth of length {}",
            a.tasks,
            a.workers,
            pop.tasks,
            pop.workers,
            truth.len()
        )));
    }
    let mut rows: Vec<Vec<(usize, i8)>> = vec![Vec::new(); a.tasks];
    for &(t, w) in a.pairs() {
        let wrong = rng.random::<f64>() < pop.get(t, w);
        let tau = truth.get(t);
        rows[t].push((w, if wrong { -tau } else { tau }));
    }
    Ok(AnswerMatrix::from_rows(a.tasks, a.workers, &rows))
}

/// Everything about a sweep point that does not change between trials.
#[derive(Debug, Clone)]
pub struct PreparedPoint {
    pub point: SweepPoint,
    pub problem: Problem,
    pub model: WorkerModel,
    pub schemes: Vec<Scheme>,
    /// Greedy degrees, computed from class probabilities only.
    pub greedy: Option<DegreeMatrix>,
    pub view: ReputationView,
    /// Tasks per selected worker under uniform allocation.
    pub per_worker: u32,
    /// Population shared by all trials under the exact model.
    fixed_population: Option<PopulationRealization>,
    seed: u64,
}

const TAG_TRUTH: u64 = 0;
const TAG_POPULATION: u64 = 1;
const TAG_SCHEME: u64 = 2;

impl PreparedPoint {
    pub fn new(s: &Scenario, point: SweepPoint) -> Result<Self> {
        let problem = s.problem_at(point.beta);
        validate_problem(&problem).map_err(Error::InvalidProblem)?;
        let model = WorkerModel::from_x(point.x);
        let greedy = if s.schemes.iter().any(Scheme::uses_greedy) {
            Some(greedy_allocate(&problem, s.objective)?.0)
        } else {
            None
        };
        let fixed_population = match model {
            WorkerModel::Exact => Some(build_population(&problem, model, 0)?),
            WorkerModel::Bimodal { .. } => None,
        };
        let per_worker = problem.loads.iter().copied().min().unwrap_or(1);
        Ok(PreparedPoint {
            point,
            view: ReputationView::of(&problem),
            problem,
            model,
            schemes: s.schemes.clone(),
            greedy,
            per_worker,
            fixed_population,
            seed: s.seed,
        })
    }

    fn key(&self, trial: usize, tag: u64) -> [u64; 5] {
        [self.seed, self.point.beta.to_bits(), self.point.x.to_bits(), trial as u64, tag]
    }

    /// One trial: fresh truth, fresh population (bimodal only), and for each
    /// scheme a fresh allocation, answers and decisions.
    pub fn run_trial(&self, trial: usize) -> Result<TrialOutcome> {
        let truth = Labels::random(self.problem.tasks, &mut rng::stream(&self.key(trial, TAG_TRUTH)));
        let drawn;
        let population = match &self.fixed_population {
            Some(p) => p,
            None => {
                drawn = build_population(&self.problem, self.model, rng::derive_seed(&self.key(trial, TAG_POPULATION)))?;
                &drawn
            }
        };
        let mut outcome = TrialOutcome { errors: Vec::new(), ties: Vec::new() };
        for &scheme in &self.schemes {
            let mut key = self.key(trial, TAG_SCHEME).to_vec();
            key.push(scheme.tag());
            let mut stream = rng::stream(&key);
            let assignment = if scheme.uses_greedy() {
                let degrees = self.greedy.as_ref().expect("greedy degrees are prepared");
                realize_assignment_random(degrees, &self.problem, &mut stream)?
            } else {
                uniform_allocate(&self.problem, self.per_worker, stream.random())?
            };
            let answers = sample_answers(&assignment, population, &truth, &mut stream)?;
            let (decisions, ties) = match scheme {
                Scheme::MajorityUniform => (decide_majority(&answers, &mut stream), majority_ties(&answers)),
                Scheme::MapGreedy => {
                    (decide_map(&answers, &self.view, &mut stream)?, map_ties(&answers, &self.view)?)
                }
                Scheme::LraUniform | Scheme::LraGreedy => {
                    let (decisions, triple) = decide_lra(&answers, &mut stream)?;
                    (decisions, triple.degenerate as usize)
                }
            };
            outcome.errors.push(decisions.mismatches(&truth));
            outcome.ties.push(ties);
        }
        Ok(outcome)
    }

    /// Runs trials `0..trials` in parallel; the result is in trial order.
    pub fn run_trials(&self, trials: usize) -> Result<Vec<TrialOutcome>> {
        (0..trials).into_par_iter().map(|i| self.run_trial(i)).collect()
    }
}

/// The shipped scenarios S1, S2 and S3 with their default sweeps.
pub fn scenario_presets() -> Vec<Scenario> {
    crate::config::preset_configs().iter().map(|c| c.to_scenario()).collect()
}

/// Runs one trial of a scenario at a sweep point.
pub fn run_trial(s: &Scenario, point: SweepPoint, trial: usize) -> Result<TrialOutcome> {
    PreparedPoint::new(s, point)?.run_trial(trial)
}

/// Estimates the error probability of every scheme at every sweep point.
/// Records are ordered by scheme, then by sweep value as given.
pub fn monte_carlo(s: &Scenario) -> Result<Vec<SweepRecord>> {
    if s.trials == 0 {
        return Err(Error::Dimension("at least one trial is required".into()));
    }
    let tasks = s.problem.tasks as f64;
    let mut by_point = Vec::new();
    for point in s.points() {
        let start = Instant::now();
        let prepared = PreparedPoint::new(s, point)?;
        let outcomes = prepared.run_trials(s.trials)?;
        let elapsed = start.elapsed();
        let mut records = Vec::with_capacity(s.schemes.len());
        for (i, &scheme) in s.schemes.iter().enumerate() {
            let errors: u64 = outcomes.iter().map(|o| o.errors[i] as u64).sum();
            let ties: u64 = outcomes.iter().map(|o| o.ties[i] as u64).sum();
            let decisions = s.trials as f64 * tasks;
            let pe = errors as f64 / decisions;
            let tie_units = match scheme {
                Scheme::LraUniform | Scheme::LraGreedy => s.trials as f64,
                _ => decisions,
            };
            records.push(SweepRecord {
                scheme,
                beta: point.beta,
                x: point.x,
                pe,
                stderr: (pe * (1.0 - pe) / decisions).sqrt(),
                trials: s.trials,
                errors,
                tie_flag_rate: ties as f64 / tie_units,
                wall_clock: elapsed,
            });
        }
        by_point.push(records);
    }
    let mut out = Vec::new();
    for i in 0..s.schemes.len() {
        out.extend(by_point.iter().map(|records| records[i].clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ClassSpec;

    fn single_class(pi: f64, beta: f64, schemes: Vec<Scheme>, trials: usize) -> Scenario {
        Scenario {
            name: "test".into(),
            problem: Problem::with_uniform_load(20, vec![ClassSpec::uniform(60, 20, pi)], 20, 1),
            schemes,
            sweep: Sweep { variable: SweepVariable::Beta, values: vec![beta] },
            beta,
            x: 0.0,
            trials,
            seed: 9,
            objective: ObjectiveKind::MutualInfo,
        }
    }

    #[test]
    fn hammers_answer_the_truth() {
        let a = Assignment::new(2, 3, vec![(0, 0), (0, 2), (1, 1)]);
        let truth = Labels::new(vec![1, -1]);
        let mut r = rng::stream(&[1]);
        let clean = sample_answers(&a, &PopulationRealization::from_fn(2, 3, |_, _| 0.0), &truth, &mut r).unwrap();
        assert_eq!(clean.to_dense(), vec![vec![1.0, 0.0, 1.0], vec![0.0, -1.0, 0.0]]);
        let inverted = sample_answers(&a, &PopulationRealization::from_fn(2, 3, |_, _| 1.0), &truth, &mut r).unwrap();
        assert_eq!(inverted, clean.negated());
    }

    #[test]
    fn fair_coin_workers_flip_half() {
        let workers = 1000;
        let pairs: Vec<(usize, usize)> = (0..100).flat_map(|t| (0..workers).map(move |w| (t, w))).collect();
        let a = Assignment::new(100, workers, pairs);
        let pop = PopulationRealization::from_fn(100, workers, |_, _| 0.5);
        let truth = Labels::new(vec![1; 100]);
        let answers = sample_answers(&a, &pop, &truth, &mut rng::stream(&[5])).unwrap();
        let flips = (0..100).flat_map(|t| answers.row(t).collect::<Vec<_>>()).filter(|&(_, v)| v < 0).count();
        let rate = flips as f64 / 1e5;
        assert!((0.497..=0.503).contains(&rate), "{rate}");
    }

    #[test]
    fn one_trial_is_quantized() {
        let s = single_class(0.2, 3.0, Scheme::ALL.to_vec(), 1);
        for r in monte_carlo(&s).unwrap() {
            let scaled = r.pe * 20.0;
            assert!((scaled - scaled.round()).abs() < 1e-12);
        }
    }

    #[test]
    fn trial_prefix_is_stable() {
        let s = single_class(0.2, 3.0, Scheme::ALL.to_vec(), 1);
        let point = s.points()[0];
        let prepared = PreparedPoint::new(&s, point).unwrap();
        let short = prepared.run_trials(10).unwrap();
        let long = prepared.run_trials(20).unwrap();
        assert_eq!(short[..], long[..10]);
        assert_eq!(run_trial(&s, point, 7).unwrap(), long[7]);
    }

    #[test]
    fn scheme_results_do_not_depend_on_the_scheme_list() {
        let all = single_class(0.2, 3.0, Scheme::ALL.to_vec(), 30);
        let only = single_class(0.2, 3.0, vec![Scheme::MapGreedy], 30);
        let a = monte_carlo(&all).unwrap();
        let b = monte_carlo(&only).unwrap();
        assert_eq!(a[3].errors, b[0].errors);
    }

    #[test]
    fn records_are_ordered_by_scheme_then_value() {
        let s = single_class(0.2, 3.0, vec![Scheme::MapGreedy, Scheme::MajorityUniform], 2)
            .with_sweep(SweepVariable::Beta, vec![2.0, 3.0]);
        let r = monte_carlo(&s).unwrap();
        let order: Vec<(Scheme, f64)> = r.iter().map(|r| (r.scheme, r.beta)).collect();
        assert_eq!(
            order,
            vec![
                (Scheme::MapGreedy, 2.0),
                (Scheme::MapGreedy, 3.0),
                (Scheme::MajorityUniform, 2.0),
                (Scheme::MajorityUniform, 3.0)
            ]
        );
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("gamma".parse::<SweepVariable>().is_err());
    }

    #[test]
    fn check_reports_capacity_and_range() {
        let mut s = single_class(0.2, 3.0, vec![Scheme::MapGreedy], 0);
        s.sweep.values = vec![0.0, 100.0];
        s.x = 2.0;
        let issues = s.check().unwrap_err();
        assert!(issues.iter().any(|m| m.contains("trials")));
        assert!(issues.iter().any(|m| m.contains("must be positive")));
        assert!(issues.iter().any(|m| m.contains("at most 1200")));
        assert!(issues.iter().any(|m| m.contains("outside [0, 1]")));
    }
}
