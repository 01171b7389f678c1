//! The operations behind the command-line front end.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::allocation::{class_group_usage, greedy_allocate, GreedyTrace};
use crate::config::{ConfigError, RunConfig};
use crate::model::DegreeMatrix;
use crate::objectives::evaluate_objective;
use crate::simulate::{monte_carlo, SweepRecord, SweepVariable};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Run(#[from] crate::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

pub const CSV_HEADER: &str = "scheme,beta,x,pe,stderr,trials,tie_flag_rate";

/// Scientific notation with six significant digits.
pub fn sci(v: f64) -> String {
    format!("{v:.5e}")
}

/// Renders records as CSV, sorted by scheme and then by sweep value.
pub fn records_csv(records: &[SweepRecord]) -> String {
    let mut sorted: Vec<&SweepRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        a.scheme.cmp(&b.scheme).then(a.beta.total_cmp(&b.beta)).then(a.x.total_cmp(&b.x))
    });
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in sorted {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.scheme,
            sci(r.beta),
            sci(r.x),
            sci(r.pe),
            sci(r.stderr),
            r.trials,
            sci(r.tie_flag_rate)
        );
    }
    out
}

/// Writes through a temporary sibling file so a failed run never leaves a
/// partial file at `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CommandError> {
    let io = |source| CommandError::Io { path: path.to_owned(), source };
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".partial");
    let tmp = path.with_file_name(tmp_name);
    let result = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(contents.as_bytes()).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

/// Runs the Monte Carlo sweep. The CSV goes to `output` if given, else to
/// the configured output path; the rendered CSV is returned either way.
pub fn cmd_run(config: &RunConfig, output: Option<&Path>) -> Result<(Vec<SweepRecord>, String), CommandError> {
    let records = monte_carlo(&config.to_scenario())?;
    let csv = records_csv(&records);
    if let Some(path) = output.or(config.output.as_deref()) {
        write_atomic(path, &csv)?;
    }
    Ok((records, csv))
}

/// Greedy allocation at one operating point.
#[derive(Debug, Clone)]
pub struct AllocationReport {
    pub scenario: String,
    pub beta: f64,
    pub budget: usize,
    pub objective: String,
    pub degrees: DegreeMatrix,
    pub trace: GreedyTrace,
    pub value: f64,
    pub class_totals: Vec<u64>,
    /// `usage[k][g]`: assignments of class `k` to tasks of group `g`.
    pub usage: Vec<Vec<u64>>,
    /// Distinct probability rows of the task groups.
    pub groups: Vec<Vec<f64>>,
}

/// Steps of the greedy trace shown in reports.
pub const TRACE_TAIL: usize = 10;

impl AllocationReport {
    pub fn text(&self) -> String {
        let mut out = String::new();
        let k = self.degrees.classes;
        let _ = writeln!(out, "scenario {}  beta {}  budget {}  objective {}", self.scenario, self.beta, self.budget, self.objective);
        let _ = writeln!(out, "objective value {:.9}", self.value);
        let _ = writeln!(out, "assignments {}", self.degrees.total());
        let totals: Vec<String> = self.class_totals.iter().map(|t| t.to_string()).collect();
        let _ = writeln!(out, "class totals {}", totals.join(" "));
        let _ = writeln!(out, "\nclass usage by task group");
        for (g, row) in self.groups.iter().enumerate() {
            let pis: Vec<String> = row.iter().map(|p| format!("{p}")).collect();
            let used: Vec<String> = (0..k).map(|c| self.usage[c][g].to_string()).collect();
            let _ = writeln!(out, "  group {g} (pi {}): {}", pis.join(" "), used.join(" "));
        }
        let _ = writeln!(out, "\ndegree matrix (task: per-class counts)");
        for (t, row) in self.degrees.rows().enumerate() {
            let cells: Vec<String> = row.iter().map(|d| format!("{d:>3}")).collect();
            let _ = writeln!(out, "  {t:>4}: {}", cells.join(""));
        }
        let _ = writeln!(out, "\ngreedy steps {} (last {})", self.trace.len(), self.trace.tail(TRACE_TAIL).len());
        for s in self.trace.tail(TRACE_TAIL) {
            let _ = writeln!(out, "  #{:<6} task {:>4} class {} objective {:.9}", s.iteration, s.task, s.class, s.objective);
        }
        out
    }

    /// The degree matrix as CSV with a `task,class_1,...` header.
    pub fn degrees_csv(&self) -> String {
        let mut out = String::from("task");
        for k in 0..self.degrees.classes {
            let _ = write!(out, ",class_{}", k + 1);
        }
        out.push('\n');
        for (t, row) in self.degrees.rows().enumerate() {
            let cells: Vec<String> = row.iter().map(|d| d.to_string()).collect();
            let _ = writeln!(out, "{t},{}", cells.join(","));
        }
        out
    }
}

/// The operating point of an allocation: `beta` if given, else the only
/// value of a beta sweep, else the configured fixed beta.
pub fn allocation_beta(config: &RunConfig, beta: Option<f64>) -> f64 {
    beta.unwrap_or(match (&config.sweep.variable, config.sweep.values.as_slice()) {
        (SweepVariable::Beta, [only]) => *only,
        _ => config.beta,
    })
}

/// Runs the greedy allocation for one budget. `beta = 0` gives the empty
/// matrix; budgets above the worker capacity stop at the capacity.
pub fn cmd_allocate(config: &RunConfig, beta: Option<f64>) -> Result<AllocationReport, CommandError> {
    let beta = allocation_beta(config, beta);
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(ConfigError::Invalid { key: "beta".into(), line: None, message: format!("{beta} must be a nonnegative number") }.into());
    }
    let scenario = config.to_scenario();
    let problem = scenario.problem_at(beta);
    let (degrees, trace) = greedy_allocate(&problem, config.objective)?;
    let value = evaluate_objective(config.objective, &degrees, &problem)?;
    let groups = problem.task_groups();
    Ok(AllocationReport {
        scenario: scenario.name.clone(),
        beta,
        budget: problem.budget,
        objective: config.objective.label().into(),
        class_totals: (0..degrees.classes).map(|k| degrees.class_total(k)).collect(),
        usage: class_group_usage(&degrees, &problem),
        groups: groups.rows.clone(),
        degrees,
        trace,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn s1() -> RunConfig {
        parse_config("scenario = \"S1\"\ntrials = 5\nseed = 3\n[sweep]\nvariable = \"beta\"\nvalues = [4]\n").unwrap()
    }

    #[test]
    fn sci_has_six_significant_digits() {
        assert_eq!(sci(0.0123456789), "1.23457e-2");
        assert_eq!(sci(4.0), "4.00000e0");
        assert_eq!(sci(0.0), "0.00000e0");
    }

    #[test]
    fn csv_has_one_row_per_scheme_and_point() {
        let (records, csv) = cmd_run(&s1(), None).unwrap();
        assert_eq!(records.len(), 4);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("majority_uniform,4.00000e0,"));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn identical_tasks_get_equal_degree_sums() {
        let report = cmd_allocate(&s1(), None).unwrap();
        assert_eq!(report.budget, 400);
        for t in 0..100 {
            assert_eq!(report.degrees.task_total(t), 4, "task {t}");
        }
        assert!(report.text().contains("class totals"));
        assert_eq!(report.degrees_csv().lines().count(), 101);
    }

    #[test]
    fn allocation_limits() {
        let c = s1();
        let empty = cmd_allocate(&c, Some(0.0)).unwrap();
        assert_eq!(empty.degrees.total(), 0);
        let capped = cmd_allocate(&c, Some(70.0)).unwrap();
        assert_eq!(capped.degrees.total(), 6000);
    }

    #[test]
    fn failed_write_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("out.csv");
        assert!(write_atomic(&path, "x").is_err());
        assert!(!path.exists());
        let ok = dir.path().join("out.csv");
        write_atomic(&ok, "a\n").unwrap();
        assert_eq!(fs::read_to_string(&ok).unwrap(), "a\n");
        assert!(!dir.path().join("out.csv.partial").exists());
    }
}
