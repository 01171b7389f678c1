//! Domain types: problems, worker populations, allocations and answers.
//!
//! Workers are indexed globally and partitioned by class in order, so class
//! `k` owns the contiguous index range `class_range(k)`.

use std::collections::HashMap;
use std::ops::Range;

use rand::Rng;

use crate::error::{Error, Result, ValidationIssue};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSpec {
    /// Number of workers in the class.
    pub size: usize,
    /// Class-average error probability on each task.
    pub pi: Vec<f64>,
}

impl ClassSpec {
    pub fn new(size: usize, pi: Vec<f64>) -> Self {
        ClassSpec { size, pi }
    }

    /// A class with the same error probability on every one of `tasks` tasks.
    pub fn uniform(size: usize, tasks: usize, pi: f64) -> Self {
        ClassSpec { size, pi: vec![pi; tasks] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub tasks: usize,
    pub classes: Vec<ClassSpec>,
    /// Maximum number of tasks per worker, one entry per worker.
    pub loads: Vec<u32>,
    /// Maximum total number of (task, worker) assignments.
    pub budget: usize,
}

impl Problem {
    pub fn new(tasks: usize, classes: Vec<ClassSpec>, loads: Vec<u32>, budget: usize) -> Self {
        Problem { tasks, classes, loads, budget }
    }

    /// Every worker gets the same load limit.
    pub fn with_uniform_load(tasks: usize, classes: Vec<ClassSpec>, load: u32, budget: usize) -> Self {
        let workers = classes.iter().map(|c| c.size).sum();
        Problem { tasks, classes, loads: vec![load; workers], budget }
    }

    pub fn with_budget(&self, budget: usize) -> Problem {
        Problem { budget, ..self.clone() }
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn num_workers(&self) -> usize {
        self.classes.iter().map(|c| c.size).sum()
    }

    /// Average number of workers per task, `C / T`.
    pub fn beta(&self) -> f64 {
        self.budget as f64 / self.tasks as f64
    }

    pub fn class_range(&self, class: usize) -> Range<usize> {
        let start: usize = self.classes[..class].iter().map(|c| c.size).sum();
        start..start + self.classes[class].size
    }

    /// Class index of every worker.
    pub fn worker_classes(&self) -> Vec<usize> {
        self.classes
            .iter()
            .enumerate()
            .flat_map(|(k, c)| std::iter::repeat_n(k, c.size))
            .collect()
    }

    pub fn pi(&self, task: usize, class: usize) -> f64 {
        self.classes[class].pi[task]
    }

    pub fn pi_row(&self, task: usize) -> Vec<f64> {
        self.classes.iter().map(|c| c.pi[task]).collect()
    }

    /// Total load capacity of a class, the sum of its workers' limits.
    pub fn class_capacity(&self, class: usize) -> u64 {
        self.loads[self.class_range(class)].iter().map(|&r| r as u64).sum()
    }

    pub fn total_capacity(&self) -> u64 {
        self.loads.iter().map(|&r| r as u64).sum()
    }

    pub fn task_groups(&self) -> TaskGroups {
        TaskGroups::of(self)
    }

    /// Checks every invariant except the positive budget, which allocation
    /// routines do not need (a zero budget simply yields an empty allocation).
    pub(crate) fn check_structure(&self) -> Result<()> {
        let issues: Vec<_> = collect_issues(self)
            .into_iter()
            .filter(|i| *i != ValidationIssue::NonPositiveBudget)
            .collect();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidProblem(issues))
        }
    }
}

fn collect_issues(p: &Problem) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    if p.tasks == 0 {
        issues.push(ValidationIssue::NoTasks);
    }
    if p.classes.is_empty() {
        issues.push(ValidationIssue::EmptyClasses);
    }
    for (k, class) in p.classes.iter().enumerate() {
        if class.size == 0 {
            issues.push(ValidationIssue::EmptyClass { class: k });
        }
        if class.pi.len() != p.tasks {
            issues.push(ValidationIssue::PiLength { class: k, expected: p.tasks, found: class.pi.len() });
        }
        for (t, &value) in class.pi.iter().enumerate() {
            if !(value > 0.0 && value < 1.0) {
                issues.push(ValidationIssue::BadProbability { task: t, class: k, value });
            }
        }
    }
    let workers = p.num_workers();
    if p.loads.len() != workers {
        issues.push(ValidationIssue::LoadCount { expected: workers, found: p.loads.len() });
    }
    for (w, &r) in p.loads.iter().enumerate() {
        if r == 0 {
            issues.push(ValidationIssue::NonPositiveLoad { worker: w });
        }
    }
    if p.budget == 0 {
        issues.push(ValidationIssue::NonPositiveBudget);
    }
    issues
}

/// Returns every violated problem invariant, or `Ok` if there are none.
pub fn validate_problem(p: &Problem) -> std::result::Result<(), Vec<ValidationIssue>> {
    let issues = collect_issues(p);
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

/// Partition of tasks into groups with identical error-probability rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskGroups {
    /// Group index of each task, numbered by first appearance.
    pub group_of: Vec<usize>,
    /// The shared row of class probabilities for each group.
    pub rows: Vec<Vec<f64>>,
}

impl TaskGroups {
    fn of(p: &Problem) -> Self {
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut group_of = Vec::with_capacity(p.tasks);
        let mut rows = Vec::new();
        for t in 0..p.tasks {
            let row = p.pi_row(t);
            let key: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
            let g = *index.entry(key).or_insert_with(|| {
                rows.push(row);
                rows.len() - 1
            });
            group_of.push(g);
        }
        TaskGroups { group_of, rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn tasks_in(&self, group: usize) -> impl Iterator<Item = usize> + '_ {
        self.group_of.iter().enumerate().filter(move |(_, &g)| g == group).map(|(t, _)| t)
    }
}

/// How individual error probabilities relate to the class averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WorkerModel {
    /// Every worker behaves exactly like its class average.
    Exact,
    /// Two-point mixture: with probability `1 - 2π` a worker has error
    /// `(1 - x)π`, otherwise `(1 - x)π + x/2`. The class mean stays `π`.
    /// `x = 1` is the hammer-spammer population.
    Bimodal { x: f64 },
}

impl WorkerModel {
    pub fn from_x(x: f64) -> Self {
        if x == 0.0 {
            WorkerModel::Exact
        } else {
            WorkerModel::Bimodal { x }
        }
    }

    pub fn x(&self) -> f64 {
        match *self {
            WorkerModel::Exact => 0.0,
            WorkerModel::Bimodal { x } => x,
        }
    }

    /// Error probabilities of the reliable and unreliable worker types.
    pub fn type_errors(&self, pi: f64) -> (f64, f64) {
        let x = self.x();
        let reliable = (1.0 - x) * pi;
        (reliable, reliable + x / 2.0)
    }
}

/// Individual error probabilities `p[t][w]` for one draw of the population.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationRealization {
    pub tasks: usize,
    pub workers: usize,
    p: Vec<f64>,
}

impl PopulationRealization {
    pub fn from_fn(tasks: usize, workers: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut p = Vec::with_capacity(tasks * workers);
        for t in 0..tasks {
            for w in 0..workers {
                p.push(f(t, w));
            }
        }
        PopulationRealization { tasks, workers, p }
    }

    pub fn get(&self, task: usize, worker: usize) -> f64 {
        self.p[task * self.workers + worker]
    }

    pub fn row(&self, task: usize) -> &[f64] {
        &self.p[task * self.workers..(task + 1) * self.workers]
    }
}

/// Draws individual worker error probabilities.
///
/// Under the bimodal model each worker draws its type once per task group
/// (tasks sharing a probability row), independently across groups. Worker
/// `w` uses the stream keyed by `(seed, w)`.
pub fn build_population(p: &Problem, model: WorkerModel, seed: u64) -> Result<PopulationRealization> {
    p.check_structure()?;
    let x = model.x();
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidModel(format!("mixing parameter {x} is outside [0, 1]")));
    }
    let workers = p.num_workers();
    let groups = p.task_groups();
    let classes = p.worker_classes();
    let mut per_group = vec![0.0; groups.len() * workers];

    match model {
        WorkerModel::Exact => {
            for (g, row) in groups.rows.iter().enumerate() {
                for (w, &k) in classes.iter().enumerate() {
                    per_group[g * workers + w] = row[k];
                }
            }
        }
        WorkerModel::Bimodal { .. } => {
            if let Some(&bad) = groups.rows.iter().flatten().find(|&&pi| pi > 0.5) {
                return Err(Error::InvalidModel(format!(
                    "bimodal model needs class probabilities <= 0.5, found {bad}"
                )));
            }
            for (w, &k) in classes.iter().enumerate() {
                let mut stream = rng::stream(&[seed, w as u64]);
                for (g, row) in groups.rows.iter().enumerate() {
                    let u: f64 = stream.random();
                    let (reliable, unreliable) = model.type_errors(row[k]);
                    per_group[g * workers + w] = if u < 2.0 * row[k] { unreliable } else { reliable };
                }
            }
        }
    }

    Ok(PopulationRealization::from_fn(p.tasks, workers, |t, w| {
        per_group[groups.group_of[t] * workers + w]
    }))
}

/// Number of class-`k` workers assigned to each task.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DegreeMatrix {
    pub tasks: usize,
    pub classes: usize,
    d: Vec<u32>,
}

impl DegreeMatrix {
    pub fn zeros(tasks: usize, classes: usize) -> Self {
        DegreeMatrix { tasks, classes, d: vec![0; tasks * classes] }
    }

    pub fn from_rows(rows: &[Vec<u32>]) -> Self {
        let classes = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == classes), "ragged degree rows");
        DegreeMatrix { tasks: rows.len(), classes, d: rows.concat() }
    }

    pub fn get(&self, task: usize, class: usize) -> u32 {
        self.d[task * self.classes + class]
    }

    pub fn set(&mut self, task: usize, class: usize, value: u32) {
        self.d[task * self.classes + class] = value;
    }

    pub fn increment(&mut self, task: usize, class: usize) {
        self.d[task * self.classes + class] += 1;
    }

    pub fn row(&self, task: usize) -> &[u32] {
        &self.d[task * self.classes..(task + 1) * self.classes]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.d.chunks(self.classes.max(1)).take(self.tasks)
    }

    pub fn total(&self) -> u64 {
        self.d.iter().map(|&v| v as u64).sum()
    }

    pub fn class_total(&self, class: usize) -> u64 {
        (0..self.tasks).map(|t| self.get(t, class) as u64).sum()
    }

    pub fn task_total(&self, task: usize) -> u64 {
        self.row(task).iter().map(|&v| v as u64).sum()
    }

    /// Describes every violated allocation constraint for problem `p`.
    pub fn violations(&self, p: &Problem) -> Vec<String> {
        let mut out = Vec::new();
        if self.tasks != p.tasks || self.classes != p.num_classes() {
            out.push(format!(
                "shape {}x{} does not match problem {}x{}",
                self.tasks,
                self.classes,
                p.tasks,
                p.num_classes()
            ));
            return out;
        }
        for t in 0..self.tasks {
            for k in 0..self.classes {
                if self.get(t, k) as usize > p.classes[k].size {
                    out.push(format!("d[{t}][{k}] = {} exceeds class size {}", self.get(t, k), p.classes[k].size));
                }
            }
        }
        for k in 0..self.classes {
            if self.class_total(k) > p.class_capacity(k) {
                out.push(format!(
                    "class {k} total {} exceeds its load capacity {}",
                    self.class_total(k),
                    p.class_capacity(k)
                ));
            }
        }
        if self.total() > p.budget as u64 {
            out.push(format!("total {} exceeds budget {}", self.total(), p.budget));
        }
        out
    }

    pub fn is_feasible(&self, p: &Problem) -> bool {
        self.violations(p).is_empty()
    }
}

/// A concrete set of (task, worker) pairs, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub tasks: usize,
    pub workers: usize,
    pairs: Vec<(usize, usize)>,
}

impl Assignment {
    pub fn new(tasks: usize, workers: usize, mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        Assignment { tasks, workers, pairs }
    }

    pub fn empty(tasks: usize, workers: usize) -> Self {
        Assignment { tasks, workers, pairs: Vec::new() }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, task: usize, worker: usize) -> bool {
        self.pairs.binary_search(&(task, worker)).is_ok()
    }

    pub fn has_duplicates(&self) -> bool {
        self.pairs.windows(2).any(|w| w[0] == w[1])
    }

    pub fn worker_loads(&self) -> Vec<u32> {
        let mut loads = vec![0; self.workers];
        for &(_, w) in &self.pairs {
            loads[w] += 1;
        }
        loads
    }

    pub fn task_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0; self.tasks];
        for &(t, _) in &self.pairs {
            deg[t] += 1;
        }
        deg
    }

    /// Workers assigned to each task, in increasing index order.
    pub fn task_rows(&self) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); self.tasks];
        for &(t, w) in &self.pairs {
            rows[t].push(w);
        }
        rows
    }

    /// Counts the pairs per task and worker class.
    pub fn degree_matrix(&self, p: &Problem) -> DegreeMatrix {
        let classes = p.worker_classes();
        let mut d = DegreeMatrix::zeros(self.tasks, p.num_classes());
        for &(t, w) in &self.pairs {
            d.increment(t, classes[w]);
        }
        d
    }
}

/// Sparse task-by-worker answer matrix with entries in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerMatrix {
    pub tasks: usize,
    pub workers: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<i8>,
}

impl AnswerMatrix {
    /// Builds the matrix from per-task `(worker, answer)` lists. Zero
    /// answers are dropped; other values must be ±1.
    pub fn from_rows(tasks: usize, workers: usize, rows: &[Vec<(usize, i8)>]) -> Self {
        assert_eq!(rows.len(), tasks, "one answer row per task");
        let mut row_ptr = Vec::with_capacity(tasks + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            let mut row = row.clone();
            row.sort_unstable_by_key(|&(w, _)| w);
            for (w, a) in row {
                assert!(w < workers, "worker index {w} out of range");
                assert!(matches!(a, -1..=1), "answers must be in {{-1, 0, +1}}");
                if a != 0 {
                    cols.push(w);
                    vals.push(a);
                }
            }
            row_ptr.push(cols.len());
        }
        AnswerMatrix { tasks, workers, row_ptr, cols, vals }
    }

    pub fn from_dense(dense: &[Vec<i8>]) -> Self {
        let workers = dense.first().map_or(0, |r| r.len());
        let rows: Vec<Vec<(usize, i8)>> =
            dense.iter().map(|r| r.iter().copied().enumerate().filter(|&(_, a)| a != 0).collect()).collect();
        Self::from_rows(dense.len(), workers, &rows)
    }

    pub fn row(&self, task: usize) -> impl Iterator<Item = (usize, i8)> + '_ {
        let span = self.row_ptr[task]..self.row_ptr[task + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_zero(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn get(&self, task: usize, worker: usize) -> i8 {
        self.row(task).find(|&(w, _)| w == worker).map_or(0, |(_, a)| a)
    }

    /// The support as a sorted pair list.
    pub fn support(&self) -> Vec<(usize, usize)> {
        (0..self.tasks).flat_map(|t| self.row(t).map(move |(w, _)| (t, w))).collect()
    }

    /// Per-class `(d_tk, m_tk)`: answers received and `-1` answers among them.
    pub fn class_counts(&self, task: usize, worker_classes: &[usize], classes: usize) -> Vec<(u32, u32)> {
        let mut counts = vec![(0u32, 0u32); classes];
        for (w, a) in self.row(task) {
            let c = &mut counts[worker_classes[w]];
            c.0 += 1;
            if a < 0 {
                c.1 += 1;
            }
        }
        counts
    }

    /// Every answer negated.
    pub fn negated(&self) -> AnswerMatrix {
        AnswerMatrix { vals: self.vals.iter().map(|a| -a).collect(), ..self.clone() }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.workers]; self.tasks];
        for (t, row) in dense.iter_mut().enumerate() {
            for (w, a) in self.row(t) {
                row[w] = a as f64;
            }
        }
        dense
    }
}

/// A vector of ±1 labels: ground truth or decisions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labels(Vec<i8>);

pub type TruthVector = Labels;
pub type DecisionVector = Labels;

impl Labels {
    pub fn new(values: Vec<i8>) -> Self {
        assert!(values.iter().all(|&v| v == 1 || v == -1), "labels must be +1 or -1");
        Labels(values)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Labels((0..len).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    /// Number of positions where the two vectors differ.
    pub fn mismatches(&self, other: &Labels) -> usize {
        assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1_problem() -> Problem {
        let t = 100;
        let classes = vec![
            ClassSpec::uniform(30, t, 0.1),
            ClassSpec::uniform(120, t, 0.2),
            ClassSpec::uniform(150, t, 0.5),
        ];
        Problem::with_uniform_load(t, classes, 20, 1000)
    }

    #[test]
    fn fig1_problem_is_valid() {
        let p = fig1_problem();
        assert_eq!(validate_problem(&p), Ok(()));
        assert_eq!(p.num_workers(), 300);
        assert_eq!(p.total_capacity(), 6000);
        assert_eq!(p.class_range(1), 30..150);
        assert_eq!(p.beta(), 10.0);
    }

    #[test]
    fn zero_probability_is_rejected() {
        let mut p = fig1_problem();
        p.classes[0].pi[7] = 0.0;
        let issues = validate_problem(&p).unwrap_err();
        assert_eq!(issues, vec![ValidationIssue::BadProbability { task: 7, class: 0, value: 0.0 }]);
    }

    #[test]
    fn zero_budget_is_rejected() {
        let p = fig1_problem().with_budget(0);
        assert_eq!(validate_problem(&p), Err(vec![ValidationIssue::NonPositiveBudget]));
        assert!(p.check_structure().is_ok());
    }

    #[test]
    fn all_issues_are_reported() {
        let mut p = Problem::new(2, vec![], vec![0], 0);
        p.classes.push(ClassSpec::new(1, vec![0.5, 1.0]));
        let issues = validate_problem(&p).unwrap_err();
        assert!(issues.contains(&ValidationIssue::BadProbability { task: 1, class: 0, value: 1.0 }));
        assert!(issues.contains(&ValidationIssue::NonPositiveLoad { worker: 0 }));
        assert!(issues.contains(&ValidationIssue::NonPositiveBudget));
        assert!(validate_problem(&Problem::new(1, vec![], vec![], 1))
            .unwrap_err()
            .contains(&ValidationIssue::EmptyClasses));
    }

    #[test]
    fn exact_population_copies_class_probabilities() {
        let p = fig1_problem();
        let pop = build_population(&p, WorkerModel::Exact, 99).unwrap();
        for t in [0, 50, 99] {
            assert_eq!(pop.get(t, 0), 0.1);
            assert_eq!(pop.get(t, 29), 0.1);
            assert_eq!(pop.get(t, 30), 0.2);
            assert_eq!(pop.get(t, 299), 0.5);
        }
    }

    #[test]
    fn bimodal_half_mixing_takes_two_values() {
        let p = Problem::with_uniform_load(3, vec![ClassSpec::uniform(200, 3, 0.2)], 3, 10);
        let pop = build_population(&p, WorkerModel::Bimodal { x: 0.5 }, 1).unwrap();
        for t in 0..3 {
            for &v in pop.row(t) {
                assert!((v - 0.1).abs() < 1e-15 || (v - 0.35).abs() < 1e-15, "{v}");
            }
        }
    }

    #[test]
    fn bimodal_types_are_consistent_within_a_group() {
        let t = 4;
        let class = ClassSpec::new(50, vec![0.2, 0.2, 0.3, 0.3]);
        let p = Problem::with_uniform_load(t, vec![class], 4, 10);
        let pop = build_population(&p, WorkerModel::Bimodal { x: 1.0 }, 5).unwrap();
        for w in 0..50 {
            assert_eq!(pop.get(0, w), pop.get(1, w));
            assert_eq!(pop.get(2, w), pop.get(3, w));
        }
    }

    #[test]
    fn bimodal_rejects_probabilities_above_half() {
        let p = Problem::with_uniform_load(1, vec![ClassSpec::uniform(2, 1, 0.7)], 1, 1);
        assert!(build_population(&p, WorkerModel::Exact, 0).is_ok());
        assert!(matches!(build_population(&p, WorkerModel::Bimodal { x: 0.3 }, 0), Err(Error::InvalidModel(_))));
        let q = Problem::with_uniform_load(1, vec![ClassSpec::uniform(2, 1, 0.2)], 1, 1);
        assert!(build_population(&q, WorkerModel::Bimodal { x: 1.5 }, 0).is_err());
    }

    #[test]
    fn task_groups_follow_first_appearance() {
        let classes = vec![ClassSpec::new(1, vec![0.1, 0.3, 0.1]), ClassSpec::new(1, vec![0.2, 0.2, 0.2])];
        let p = Problem::with_uniform_load(3, classes, 1, 1);
        let g = p.task_groups();
        assert_eq!(g.group_of, vec![0, 1, 0]);
        assert_eq!(g.rows, vec![vec![0.1, 0.2], vec![0.3, 0.2]]);
        assert_eq!(g.tasks_in(0).collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn degree_matrix_constraints() {
        let classes = vec![ClassSpec::uniform(2, 2, 0.1), ClassSpec::uniform(1, 2, 0.2)];
        let p = Problem::with_uniform_load(2, classes, 1, 3);
        assert!(DegreeMatrix::from_rows(&[vec![1, 1], vec![1, 0]]).is_feasible(&p));
        // class 0 has capacity 2, class 1 capacity 1
        assert!(!DegreeMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).is_feasible(&p));
        assert!(!DegreeMatrix::from_rows(&[vec![3, 0], vec![0, 0]]).is_feasible(&p));
        assert!(!DegreeMatrix::from_rows(&[vec![2, 1], vec![1, 0]]).is_feasible(&p.with_budget(10)) );
    }

    #[test]
    fn answer_matrix_counts_and_negation() {
        let a = AnswerMatrix::from_dense(&[vec![1, -1, 0, -1], vec![0, 0, 1, 0]]);
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.support(), vec![(0, 0), (0, 1), (0, 3), (1, 2)]);
        assert_eq!(a.class_counts(0, &[0, 0, 1, 1], 2), vec![(2, 1), (1, 1)]);
        let n = a.negated();
        assert_eq!(n.get(0, 0), -1);
        assert_eq!(n.get(1, 2), -1);
        assert_eq!(n.support(), a.support());
    }

    #[test]
    fn assignment_bookkeeping() {
        let a = Assignment::new(2, 3, vec![(1, 2), (0, 0), (0, 2)]);
        assert_eq!(a.pairs(), &[(0, 0), (0, 2), (1, 2)]);
        assert_eq!(a.worker_loads(), vec![1, 0, 2]);
        assert_eq!(a.task_degrees(), vec![2, 1]);
        assert!(a.contains(1, 2));
        assert!(!a.has_duplicates());
        assert!(Assignment::new(1, 1, vec![(0, 0), (0, 0)]).has_duplicates());
    }
}
