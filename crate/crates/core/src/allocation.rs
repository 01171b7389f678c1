//! Building feasible allocations.
//!
//! Workers in one class are interchangeable as far as the objectives are
//! concerned, so the greedy search works on (task, class) increments of a
//! [`DegreeMatrix`] and [`realize_assignment`] later maps the degrees back to
//! concrete workers.

use std::collections::{HashMap, HashSet};

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Assignment, DegreeMatrix, Problem};
use crate::objectives::{Aggregate, ObjectiveKind};
use crate::rng;

/// The constraint family of a problem, in class-aggregated form.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityLimits {
    pub class_sizes: Vec<usize>,
    /// Sum of the load limits of each class's workers.
    pub class_capacity: Vec<u64>,
    pub budget: usize,
    pub loads: Vec<u32>,
}

impl FeasibilityLimits {
    pub fn of(p: &Problem) -> Self {
        FeasibilityLimits {
            class_sizes: p.classes.iter().map(|c| c.size).collect(),
            class_capacity: (0..p.num_classes()).map(|k| p.class_capacity(k)).collect(),
            budget: p.budget,
            loads: p.loads.clone(),
        }
    }

    /// Size of every maximal degree matrix for `tasks` tasks.
    pub fn max_total(&self, tasks: usize) -> u64 {
        let classes: u64 = self
            .class_sizes
            .iter()
            .zip(&self.class_capacity)
            .map(|(&size, &cap)| cap.min((tasks * size) as u64))
            .sum();
        classes.min(self.budget as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyStep {
    pub iteration: usize,
    pub task: usize,
    pub class: usize,
    /// Objective value after the increment.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GreedyTrace {
    pub steps: Vec<GreedyStep>,
}

impl GreedyTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.steps.last().map(|s| s.objective)
    }

    pub fn tail(&self, n: usize) -> &[GreedyStep] {
        &self.steps[self.steps.len().saturating_sub(n)..]
    }
}

/// Memoized per-task scores, keyed by task group and degree row.
struct ScoreCache {
    kind: ObjectiveKind,
    rows: Vec<Vec<f64>>,
    group_of: Vec<usize>,
    memo: HashMap<(usize, Vec<u32>), f64>,
}

impl ScoreCache {
    fn new(kind: ObjectiveKind, p: &Problem) -> Self {
        let groups = p.task_groups();
        ScoreCache { kind, rows: groups.rows, group_of: groups.group_of, memo: HashMap::new() }
    }

    fn score(&mut self, task: usize, row: &[u32]) -> Result<f64> {
        let g = self.group_of[task];
        if let Some(&v) = self.memo.get(&(g, row.to_vec())) {
            return Ok(v);
        }
        let v = self.kind.task_score(row, &self.rows[g])?;
        self.memo.insert((g, row.to_vec()), v);
        Ok(v)
    }
}

/// Ranking of one candidate increment; compared lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct CandidateKey {
    objective: f64,
    /// Min-type objectives: minus the task's current score, so that ties
    /// favour the weakest task.
    weakness: f64,
    gain: f64,
}

/// Greedy maximization of `kind` over unit (task, class) increments,
/// starting from the empty allocation and running until no feasible
/// increment remains. Ties go to the lowest task, then the lowest class.
pub fn greedy_allocate(p: &Problem, kind: ObjectiveKind) -> Result<(DegreeMatrix, GreedyTrace)> {
    p.check_structure()?;
    let (tasks, classes) = (p.tasks, p.num_classes());
    let limits = FeasibilityLimits::of(p);
    let mut cache = ScoreCache::new(kind, p);
    let mut degrees = DegreeMatrix::zeros(tasks, classes);
    let mut trace = GreedyTrace::default();

    let mut scores = Vec::with_capacity(tasks);
    for t in 0..tasks {
        scores.push(cache.score(t, degrees.row(t))?);
    }
    // candidate[t * classes + k]: task score after one more class-k worker
    let mut candidate = vec![None; tasks * classes];
    let refresh = |t: usize, degrees: &DegreeMatrix, cache: &mut ScoreCache, candidate: &mut [Option<f64>]| {
        for k in 0..classes {
            candidate[t * classes + k] = if (degrees.get(t, k) as usize) < limits.class_sizes[k] {
                let mut row = degrees.row(t).to_vec();
                row[k] += 1;
                Some(cache.score(t, &row)?)
            } else {
                None
            };
        }
        Ok::<_, Error>(())
    };
    for t in 0..tasks {
        refresh(t, &degrees, &mut cache, &mut candidate)?;
    }

    let mut class_used = vec![0u64; classes];
    let mut total = 0usize;
    let mut objective = kind.combine(&scores);
    let aggregate = kind.aggregate();
    let scale = if aggregate == Aggregate::Mean { 1.0 / tasks as f64 } else { 1.0 };

    while total < p.budget {
        // two smallest scores, for min-type objectives
        let (mut low, mut low_task, mut second) = (f64::INFINITY, usize::MAX, f64::INFINITY);
        if aggregate == Aggregate::Min {
            for (t, &s) in scores.iter().enumerate() {
                if s < low {
                    second = low;
                    low = s;
                    low_task = t;
                } else if s < second {
                    second = s;
                }
            }
        }

        let mut best: Option<(CandidateKey, usize, usize)> = None;
        for t in 0..tasks {
            for k in 0..classes {
                if class_used[k] >= limits.class_capacity[k] {
                    continue;
                }
                let Some(after) = candidate[t * classes + k] else { continue };
                let gain = after - scores[t];
                let key = match aggregate {
                    Aggregate::Min => {
                        let others = if t == low_task { second } else { low };
                        CandidateKey { objective: after.min(others), weakness: -scores[t], gain }
                    }
                    _ => CandidateKey { objective: gain, weakness: 0.0, gain },
                };
                if best.as_ref().is_none_or(|(b, _, _)| key > *b) {
                    best = Some((key, t, k));
                }
            }
        }
        let Some((key, t, k)) = best else { break };

        degrees.increment(t, k);
        class_used[k] += 1;
        total += 1;
        scores[t] = candidate[t * classes + k].expect("chosen candidate exists");
        refresh(t, &degrees, &mut cache, &mut candidate)?;
        objective = match aggregate {
            Aggregate::Min => key.objective,
            _ => objective + key.gain * scale,
        };
        trace.steps.push(GreedyStep { iteration: trace.steps.len() + 1, task: t, class: k, objective });
    }
    Ok((degrees, trace))
}

/// Picks `ceil(C / r)` workers uniformly from the whole population and joins
/// them to the tasks by a random bipartite graph with task degrees
/// `floor(C/T)` or `ceil(C/T)` and worker degrees `floor(C/n)` or
/// `ceil(C/n)` (at most `r`).
pub fn uniform_allocate(p: &Problem, per_worker: u32, seed: u64) -> Result<Assignment> {
    p.check_structure()?;
    let workers = p.num_workers();
    let budget = p.budget;
    if budget == 0 {
        return Ok(Assignment::empty(p.tasks, workers));
    }
    let min_load = p.loads.iter().copied().min().unwrap_or(0);
    if per_worker == 0 || per_worker > min_load {
        return Err(Error::InfeasibleRegularGraph(format!(
            "per-worker task count {per_worker} must be between 1 and the smallest load {min_load}"
        )));
    }
    let chosen = budget.div_ceil(per_worker as usize);
    if chosen > workers {
        return Err(Error::InfeasibleRegularGraph(format!(
            "{budget} assignments at {per_worker} per worker need {chosen} workers, only {workers} exist"
        )));
    }
    let max_task_degree = budget.div_ceil(p.tasks);
    if max_task_degree > chosen {
        return Err(Error::InfeasibleRegularGraph(format!(
            "task degree {max_task_degree} exceeds the {chosen} selected workers"
        )));
    }

    let mut rng = rng::stream(&[seed]);
    let selected = index::sample(&mut rng, workers, chosen).into_vec();

    let mut task_order: Vec<usize> = (0..p.tasks).collect();
    task_order.shuffle(&mut rng);
    let mut task_degree = vec![budget / p.tasks; p.tasks];
    for &t in &task_order[..budget % p.tasks] {
        task_degree[t] += 1;
    }
    let task_stubs: Vec<usize> =
        (0..p.tasks).flat_map(|t| std::iter::repeat_n(t, task_degree[t])).collect();
    // round-robin over the selected workers gives the balanced worker degrees
    let worker_stubs: Vec<usize> = (0..budget).map(|i| selected[i % chosen]).collect();

    for _attempt in 0..PAIRING_ATTEMPTS {
        let mut stubs = worker_stubs.clone();
        stubs.shuffle(&mut rng);
        let edges: Vec<(usize, usize)> = task_stubs.iter().copied().zip(stubs).collect();
        if let Some(edges) = repair_multi_edges(edges, &mut rng) {
            return Ok(Assignment::new(p.tasks, workers, edges));
        }
    }
    // Task stubs are grouped by task and a task needs at most `chosen`
    // consecutive positions, so the round-robin layout has no repeats.
    let edges = task_stubs.into_iter().zip(worker_stubs).collect();
    Ok(Assignment::new(p.tasks, workers, edges))
}

const PAIRING_ATTEMPTS: usize = 100;
const SWITCH_TRIES: usize = 1000;

/// Removes repeated (task, worker) edges by degree-preserving switches with
/// random partner edges. Gives up if some repeat finds no valid partner.
fn repair_multi_edges<R: Rng>(mut edges: Vec<(usize, usize)>, rng: &mut R) -> Option<Vec<(usize, usize)>> {
    let mut count: HashMap<(usize, usize), u32> = HashMap::with_capacity(edges.len());
    let mut repeated = Vec::new();
    for (i, &e) in edges.iter().enumerate() {
        let c = count.entry(e).or_insert(0);
        *c += 1;
        if *c > 1 {
            repeated.push(i);
        }
    }
    for i in repeated {
        let (t, w) = edges[i];
        if count[&(t, w)] <= 1 {
            continue;
        }
        let mut fixed = false;
        for _ in 0..SWITCH_TRIES {
            let j = rng.random_range(0..edges.len());
            let (t2, w2) = edges[j];
            if t2 == t || w2 == w || count.contains_key(&(t, w2)) || count.contains_key(&(t2, w)) {
                continue;
            }
            for (e, delta) in [((t, w), -1i32), ((t2, w2), -1), ((t, w2), 1), ((t2, w), 1)] {
                let c = count.entry(e).or_insert(0);
                *c = (*c as i32 + delta) as u32;
                if *c == 0 {
                    count.remove(&e);
                }
            }
            edges[i] = (t, w2);
            edges[j] = (t2, w);
            fixed = true;
            break;
        }
        if !fixed {
            return None;
        }
    }
    Some(edges)
}

/// Maps degrees to concrete workers: each task's `d_tk` slots go to distinct
/// class-`k` workers with the lowest current load (ties to the lowest
/// index). Always succeeds when loads are uniform within each class.
pub fn realize_assignment(degrees: &DegreeMatrix, p: &Problem) -> Result<Assignment> {
    realize_with(degrees, p, |open, _| open.sort_by_key(|&(w, load)| (load, w)))
}

/// Like [`realize_assignment`], but ties between equally loaded workers are
/// broken at random for every slot. Index-ordered ties make tasks reuse the
/// same worker blocks, which can split the answer graph into disconnected
/// pieces.
pub fn realize_assignment_random<R: Rng + ?Sized>(degrees: &DegreeMatrix, p: &Problem, rng: &mut R) -> Result<Assignment> {
    let mut keys: Vec<u64> = Vec::new();
    realize_with(degrees, p, |open, _| {
        keys.clear();
        keys.extend(open.iter().map(|_| rng.random::<u64>()));
        let mut keyed: Vec<_> = open.iter().copied().zip(keys.iter().copied()).collect();
        keyed.sort_by_key(|&((w, load), key)| (load, key, w));
        for (slot, (entry, _)) in open.iter_mut().zip(keyed) {
            *slot = entry;
        }
    })
}

/// Shared realization loop; `order` sorts the open `(worker, load)` list so
/// that the preferred workers come first.
fn realize_with(
    degrees: &DegreeMatrix,
    p: &Problem,
    mut order: impl FnMut(&mut Vec<(usize, u32)>, usize),
) -> Result<Assignment> {
    p.check_structure()?;
    let violations = degrees.violations(p);
    if !violations.is_empty() {
        return Err(Error::InfeasibleDegrees(violations.join("; ")));
    }
    let mut load = vec![0u32; p.num_workers()];
    let mut pairs = Vec::with_capacity(degrees.total() as usize);
    let mut open = Vec::new();
    for t in 0..p.tasks {
        for k in 0..p.num_classes() {
            let needed = degrees.get(t, k);
            if needed == 0 {
                continue;
            }
            open.clear();
            open.extend(p.class_range(k).filter(|&w| load[w] < p.loads[w]).map(|w| (w, load[w])));
            if open.len() < needed as usize {
                return Err(Error::RealizationFailed { task: t, class: k, needed, available: open.len() });
            }
            order(&mut open, t);
            for &(w, _) in &open[..needed as usize] {
                load[w] += 1;
                pairs.push((t, w));
            }
        }
    }
    Ok(Assignment::new(p.tasks, p.num_workers(), pairs))
}

/// True iff the assignment has no repeated pair, respects every worker's
/// load limit and the budget.
pub fn is_feasible(a: &Assignment, p: &Problem) -> bool {
    if a.tasks != p.tasks || a.workers != p.num_workers() || p.loads.len() != a.workers {
        return false;
    }
    if a.pairs().iter().any(|&(t, w)| t >= a.tasks || w >= a.workers) || a.has_duplicates() {
        return false;
    }
    a.len() <= p.budget && a.worker_loads().iter().zip(&p.loads).all(|(l, r)| l <= r)
}

/// Largest `T * W` accepted by [`enumerate_feasible_family`].
pub const FAMILY_LIMIT: usize = 12;

/// All feasible subsets of the complete allocation set of a tiny problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleFamily {
    /// Ground set: every (task, worker) pair; bit `i` of a member is `elements[i]`.
    pub elements: Vec<(usize, usize)>,
    pub members: Vec<u32>,
    tasks: usize,
    workers: usize,
}

impl FeasibleFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, member: u32) -> bool {
        self.members.binary_search(&member).is_ok()
    }

    pub fn assignment(&self, member: u32) -> Assignment {
        let pairs = (0..self.elements.len()).filter(|i| member >> i & 1 == 1).map(|i| self.elements[i]).collect();
        Assignment::new(self.tasks, self.workers, pairs)
    }

    pub fn assignments(&self) -> Vec<Assignment> {
        self.members.iter().map(|&m| self.assignment(m)).collect()
    }
}

pub fn enumerate_feasible_family(p: &Problem) -> Result<FeasibleFamily> {
    p.check_structure()?;
    let workers = p.num_workers();
    let size = p.tasks * workers;
    if size > FAMILY_LIMIT {
        return Err(Error::EnumerationTooLarge { size, limit: FAMILY_LIMIT });
    }
    let elements: Vec<(usize, usize)> = (0..p.tasks).flat_map(|t| (0..workers).map(move |w| (t, w))).collect();
    let mut family = FeasibleFamily { elements, members: Vec::new(), tasks: p.tasks, workers };
    family.members = (0u32..1 << size).filter(|&m| is_feasible(&family.assignment(m), p)).collect();
    Ok(family)
}

/// Outcome of checking the matroid axioms on a set family.
#[derive(Debug, Clone, PartialEq)]
pub struct MatroidReport {
    pub downward_closed: bool,
    pub exchange: bool,
    pub equal_bases: bool,
    /// Size of the largest member.
    pub rank: u32,
    pub counterexample: Option<String>,
}

impl MatroidReport {
    pub fn holds(&self) -> bool {
        self.downward_closed && self.exchange && self.equal_bases
    }
}

/// Exhaustively checks downward closure, the exchange property and that all
/// maximal members share one size.
pub fn check_matroid(family: &FeasibleFamily) -> MatroidReport {
    let members: HashSet<u32> = family.members.iter().copied().collect();
    let n = family.elements.len();
    let mut report = MatroidReport {
        downward_closed: members.contains(&0),
        exchange: true,
        equal_bases: true,
        rank: family.members.iter().map(|m| m.count_ones()).max().unwrap_or(0),
        counterexample: None,
    };
    if !report.downward_closed {
        report.counterexample = Some("empty set is not a member".into());
    }
    // removing one element at a time suffices for closure by induction
    'closure: for &m in &family.members {
        for i in 0..n {
            if m >> i & 1 == 1 && !members.contains(&(m & !(1 << i))) {
                report.downward_closed = false;
                report.counterexample = Some(format!("{:?} minus {:?} is not a member", family.assignment(m).pairs(), family.elements[i]));
                break 'closure;
            }
        }
    }
    'exchange: for &big in &family.members {
        for &small in &family.members {
            if big.count_ones() <= small.count_ones() {
                continue;
            }
            let diff = big & !small;
            if !(0..n).any(|i| diff >> i & 1 == 1 && members.contains(&(small | 1 << i))) {
                report.exchange = false;
                report.counterexample = Some(format!(
                    "no element of {:?} extends {:?}",
                    family.assignment(big).pairs(),
                    family.assignment(small).pairs()
                ));
                break 'exchange;
            }
        }
    }
    for &m in &family.members {
        let maximal = (0..n).all(|i| m >> i & 1 == 1 || !members.contains(&(m | 1 << i)));
        if maximal && m.count_ones() != report.rank {
            report.equal_bases = false;
            report.counterexample = Some(format!(
                "maximal member {:?} has size {}, rank is {}",
                family.assignment(m).pairs(),
                m.count_ones(),
                report.rank
            ));
            break;
        }
    }
    report
}

/// Assignments handed to each (class, task group) pair: `usage[k][g]`.
pub fn class_group_usage(degrees: &DegreeMatrix, p: &Problem) -> Vec<Vec<u64>> {
    let groups = p.task_groups();
    let mut usage = vec![vec![0u64; groups.len()]; p.num_classes()];
    for t in 0..p.tasks {
        for (k, row) in usage.iter_mut().enumerate() {
            row[groups.group_of[t]] += degrees.get(t, k) as u64;
        }
    }
    usage
}
