//! Run configuration documents.
//!
//! A configuration is a TOML document:
//!
//! ```toml
//! scenario = "S1"                 # preset name, or an inline [scenario] table
//! schemes = ["map_greedy", "majority_uniform"]
//! beta = 10.0                     # fixed value when sweeping x
//! x = 0.0                         # fixed value when sweeping beta
//! trials = 2000
//! seed = 42
//! objective = "P3"
//! chernoff = "corrected"
//! output = "s1.csv"
//!
//! [sweep]
//! variable = "beta"
//! values = [2, 4, 6, 8, 10]
//! ```
//!
//! An inline scenario lists class sizes, the per-worker load and task groups
//! with one error probability per class:
//!
//! ```toml
//! [scenario]
//! name = "custom"
//! tasks = 100
//! load = 20
//! classes = [30, 120, 150]
//!
//! [[scenario.groups]]
//! tasks = 100
//! pi = [0.1, 0.2, 0.5]
//! ```
//!
//! Naming a preset takes every key from the preset file first; keys in the
//! document override them. Unknown keys are rejected.

use std::fmt::{self, Write as _};
use std::ops::Range;
use std::path::PathBuf;

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer};
use thiserror::Error;
use toml::Spanned;

use crate::model::{validate_problem, ClassSpec, Problem};
use crate::objectives::{ChernoffVariant, ObjectiveKind};
use crate::simulate::{Scenario, Scheme, Sweep, SweepVariable, DEFAULT_TRIALS};

/// Environment variable that replaces the default seed.
pub const SEED_ENV: &str = "CROWDREP_SEED";
pub const DEFAULT_SEED: u64 = 1;

const PRESETS: [(&str, &str); 3] = [
    ("S1", include_str!("../presets/s1.toml")),
    ("S2", include_str!("../presets/s2.toml")),
    ("S3", include_str!("../presets/s3.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

/// The shipped preset document for `name` (case-insensitive).
pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| n.eq_ignore_ascii_case(name)).map(|(_, text)| *text)
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{}: {message}", location(*line, *column))]
    Syntax { line: usize, column: usize, message: String },

    #[error("{}key `{key}`: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Invalid { key: String, line: Option<usize>, message: String },

    #[error("invalid scenario: {}", .0.join("; "))]
    Semantic(Vec<String>),
}

fn location(line: usize, column: usize) -> String {
    format!("line {line}, column {column}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupDef {
    pub tasks: usize,
    /// One error probability per class.
    pub pi: Vec<f64>,
}

/// A scenario as written in a configuration document.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDef {
    pub name: String,
    pub tasks: usize,
    /// Tasks each worker can take.
    pub load: u32,
    /// Workers per class.
    pub classes: Vec<usize>,
    pub groups: Vec<GroupDef>,
}

impl ScenarioDef {
    /// The problem with a placeholder budget of one assignment.
    pub fn problem(&self) -> std::result::Result<Problem, Vec<String>> {
        let mut issues = Vec::new();
        let grouped: usize = self.groups.iter().map(|g| g.tasks).sum();
        if grouped != self.tasks {
            issues.push(format!("task groups cover {grouped} tasks, the scenario has {}", self.tasks));
        }
        for (i, g) in self.groups.iter().enumerate() {
            if g.pi.len() != self.classes.len() {
                issues.push(format!(
                    "group {i} has {} error probabilities for {} classes",
                    g.pi.len(),
                    self.classes.len()
                ));
            }
        }
        if !issues.is_empty() {
            return Err(issues);
        }
        let classes = self
            .classes
            .iter()
            .enumerate()
            .map(|(k, &size)| {
                let pi = self.groups.iter().flat_map(|g| std::iter::repeat_n(g.pi[k], g.tasks)).collect();
                ClassSpec::new(size, pi)
            })
            .collect();
        let p = Problem::with_uniform_load(self.tasks, classes, self.load, 1);
        validate_problem(&p).map_err(|found| found.iter().map(|i| i.to_string()).collect::<Vec<_>>())?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioDef,
    pub schemes: Vec<Scheme>,
    pub sweep: Sweep,
    pub beta: f64,
    pub x: f64,
    pub trials: usize,
    pub seed: u64,
    pub objective: ObjectiveKind,
    pub chernoff: ChernoffVariant,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn to_scenario(&self) -> Scenario {
        Scenario {
            name: self.scenario.name.clone(),
            problem: self.scenario.problem().expect("validated when parsed"),
            schemes: self.schemes.clone(),
            sweep: self.sweep.clone(),
            beta: self.beta,
            x: self.x,
            trials: self.trials,
            seed: self.seed,
            objective: self.objective,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    tasks: usize,
    pi: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    tasks: usize,
    load: u32,
    classes: Vec<usize>,
    groups: Vec<RawGroup>,
}

#[derive(Debug)]
enum ScenarioField {
    Preset(String),
    Inline(RawScenario),
}

impl<'de> Deserialize<'de> for ScenarioField {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct FieldVisitor;

        impl<'de> Visitor<'de> for FieldVisitor {
            type Value = ScenarioField;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a preset name or a scenario table")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ScenarioField, E> {
                Ok(ScenarioField::Preset(v.to_owned()))
            }

            fn visit_map<M: MapAccess<'de>>(self, map: M) -> Result<ScenarioField, M::Error> {
                RawScenario::deserialize(de::value::MapAccessDeserializer::new(map)).map(ScenarioField::Inline)
            }
        }

        deserializer.deserialize_any(FieldVisitor)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    variable: Spanned<String>,
    values: Spanned<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<Spanned<ScenarioField>>,
    schemes: Option<Spanned<Vec<String>>>,
    sweep: Option<Spanned<RawSweep>>,
    beta: Option<Spanned<f64>>,
    x: Option<Spanned<f64>>,
    trials: Option<Spanned<i64>>,
    seed: Option<Spanned<i64>>,
    objective: Option<Spanned<String>>,
    chernoff: Option<Spanned<String>>,
    output: Option<String>,
}

impl RawConfig {
    /// Fills keys missing here from `base`.
    fn over(self, base: RawConfig) -> RawConfig {
        RawConfig {
            scenario: self.scenario.or(base.scenario),
            schemes: self.schemes.or(base.schemes),
            sweep: self.sweep.or(base.sweep),
            beta: self.beta.or(base.beta),
            x: self.x.or(base.x),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            objective: self.objective.or(base.objective),
            chernoff: self.chernoff.or(base.chernoff),
            output: self.output.or(base.output),
        }
    }
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn syntax_error(text: &str, err: toml::de::Error) -> ConfigError {
    let span = err.span().unwrap_or(0..0);
    let line = line_of(text, span.start);
    let line_start = text[..span.start.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    ConfigError::Syntax { line, column: span.start - line_start + 1, message: err.message().trim().to_owned() }
}

fn parse_raw(text: &str) -> Result<RawConfig, ConfigError> {
    toml::from_str(text).map_err(|e| syntax_error(text, e))
}

/// Turns spans into line numbers, remembering which document they refer to.
struct Locator<'a> {
    user: &'a str,
    /// Spans are only meaningful for keys that came from the user document.
    preset: Option<&'a str>,
}

impl Locator<'_> {
    fn invalid(&self, key: &str, span: Range<usize>, from_user: bool, message: String) -> ConfigError {
        let text = if from_user { self.user } else { self.preset.unwrap_or(self.user) };
        ConfigError::Invalid { key: key.into(), line: Some(line_of(text, span.start)), message }
    }
}

/// Reads the default seed: the environment override if set, else
/// [`DEFAULT_SEED`].
pub fn default_seed() -> Result<u64, ConfigError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse::<u64>().ok().filter(|&s| s <= i64::MAX as u64).ok_or_else(|| ConfigError::Invalid {
            key: SEED_ENV.into(),
            line: None,
            message: format!("`{v}` is not a seed between 0 and {}", i64::MAX),
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let user = parse_raw(text)?;
    let mut preset_doc = None;
    let user_keys = UserKeys::of(&user);
    let raw = match user.scenario.as_ref().map(|s| s.get_ref()) {
        Some(ScenarioField::Preset(name)) => {
            let span = user.scenario.as_ref().expect("present").span();
            let doc = preset_text(name).ok_or_else(|| ConfigError::Invalid {
                key: "scenario".into(),
                line: Some(line_of(text, span.start)),
                message: format!(
                    "unknown preset `{name}` (available: {})",
                    preset_names().collect::<Vec<_>>().join(", ")
                ),
            })?;
            preset_doc = Some(doc);
            let base = parse_raw(doc).expect("shipped presets parse");
            let mut user = user;
            user.scenario = None;
            user.over(base)
        }
        _ => user,
    };
    let loc = Locator { user: text, preset: preset_doc };
    resolve(raw, &loc, &user_keys)
}

/// Which keys were written in the user document.
#[derive(Debug, Clone, Copy)]
struct UserKeys {
    schemes: bool,
    sweep: bool,
    trials: bool,
    seed: bool,
    objective: bool,
    chernoff: bool,
}

impl UserKeys {
    fn of(raw: &RawConfig) -> Self {
        UserKeys {
            schemes: raw.schemes.is_some(),
            sweep: raw.sweep.is_some(),
            trials: raw.trials.is_some(),
            seed: raw.seed.is_some(),
            objective: raw.objective.is_some(),
            chernoff: raw.chernoff.is_some(),
        }
    }
}

fn resolve(raw: RawConfig, loc: &Locator, user: &UserKeys) -> Result<RunConfig, ConfigError> {
    let scenario = match raw.scenario.map(Spanned::into_inner) {
        Some(ScenarioField::Inline(s)) => ScenarioDef {
            name: s.name,
            tasks: s.tasks,
            load: s.load,
            classes: s.classes,
            groups: s.groups.into_iter().map(|g| GroupDef { tasks: g.tasks, pi: g.pi }).collect(),
        },
        Some(ScenarioField::Preset(_)) => unreachable!("presets are inlined before resolving"),
        None => {
            return Err(ConfigError::Invalid {
                key: "scenario".into(),
                line: None,
                message: "missing; name a preset or give a [scenario] table".into(),
            })
        }
    };

    let schemes = match raw.schemes {
        Some(list) => {
            let span = list.span();
            let mut out = Vec::new();
            for name in list.into_inner() {
                let scheme = name.parse::<Scheme>().map_err(|m| loc.invalid("schemes", span.clone(), user.schemes, m))?;
                if out.contains(&scheme) {
                    return Err(loc.invalid("schemes", span, user.schemes, format!("`{name}` is listed twice")));
                }
                out.push(scheme);
            }
            out
        }
        None => Scheme::ALL.to_vec(),
    };

    let sweep = match raw.sweep {
        Some(sweep) => {
            let sweep = sweep.into_inner();
            let var_span = sweep.variable.span();
            let variable = sweep
                .variable
                .into_inner()
                .parse::<SweepVariable>()
                .map_err(|m| loc.invalid("sweep.variable", var_span, user.sweep, m))?;
            let values_span = sweep.values.span();
            let values = sweep.values.into_inner();
            if values.is_empty() {
                return Err(loc.invalid("sweep.values", values_span, user.sweep, "needs at least one value".into()));
            }
            Sweep { variable, values }
        }
        None => Sweep { variable: SweepVariable::Beta, values: (1..=10).map(|i| 2.0 * i as f64).collect() },
    };

    let beta = raw.beta.map_or(10.0, Spanned::into_inner);
    let x = raw.x.map_or(0.0, Spanned::into_inner);

    let trials = match raw.trials {
        Some(t) if *t.get_ref() < 1 => {
            return Err(loc.invalid("trials", t.span(), user.trials, "must be at least 1".into()))
        }
        Some(t) => t.into_inner() as usize,
        None => DEFAULT_TRIALS,
    };
    let seed = match raw.seed {
        Some(s) if *s.get_ref() < 0 => {
            return Err(loc.invalid("seed", s.span(), user.seed, "must not be negative".into()))
        }
        Some(s) => s.into_inner() as u64,
        None => default_seed()?,
    };

    let chernoff = match raw.chernoff {
        Some(c) => {
            let span = c.span();
            c.into_inner().parse::<ChernoffVariant>().map_err(|m| loc.invalid("chernoff", span, user.chernoff, m))?
        }
        None => ChernoffVariant::default(),
    };
    let objective = match raw.objective {
        Some(o) => {
            let span = o.span();
            ObjectiveKind::parse(&o.into_inner(), chernoff).map_err(|m| loc.invalid("objective", span, user.objective, m))?
        }
        None => ObjectiveKind::MutualInfo,
    };

    let config = RunConfig {
        scenario,
        schemes,
        sweep,
        beta,
        x,
        trials,
        seed,
        objective,
        chernoff,
        output: raw.output.map(PathBuf::from),
    };
    config.scenario.problem().map_err(ConfigError::Semantic)?;
    config.to_scenario().check().map_err(ConfigError::Semantic)?;
    Ok(config)
}

fn float(v: f64) -> String {
    format!("{v:?}")
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.to_owned()).to_string()
}

/// Writes a configuration back as a document that [`parse_config`] reads
/// into an equal value. The scenario is always written inline.
pub fn render(config: &RunConfig) -> String {
    let mut out = String::new();
    let list = |items: Vec<String>| format!("[{}]", items.join(", "));
    let _ = writeln!(out, "schemes = {}", list(config.schemes.iter().map(|s| quoted(s.name())).collect()));
    let _ = writeln!(out, "beta = {}", float(config.beta));
    let _ = writeln!(out, "x = {}", float(config.x));
    let _ = writeln!(out, "trials = {}", config.trials);
    let _ = writeln!(out, "seed = {}", config.seed);
    let _ = writeln!(out, "objective = {}", quoted(config.objective.label()));
    let _ = writeln!(out, "chernoff = {}", quoted(&config.chernoff.to_string()));
    if let Some(path) = &config.output {
        let _ = writeln!(out, "output = {}", quoted(&path.to_string_lossy()));
    }
    let _ = writeln!(out, "\n[sweep]");
    let _ = writeln!(out, "variable = {}", quoted(config.sweep.variable.name()));
    let _ = writeln!(out, "values = {}", list(config.sweep.values.iter().map(|&v| float(v)).collect()));
    let s = &config.scenario;
    let _ = writeln!(out, "\n[scenario]");
    let _ = writeln!(out, "name = {}", quoted(&s.name));
    let _ = writeln!(out, "tasks = {}", s.tasks);
    let _ = writeln!(out, "load = {}", s.load);
    let _ = writeln!(out, "classes = {}", list(s.classes.iter().map(|c| c.to_string()).collect()));
    for g in &s.groups {
        let _ = writeln!(out, "\n[[scenario.groups]]");
        let _ = writeln!(out, "tasks = {}", g.tasks);
        let _ = writeln!(out, "pi = {}", list(g.pi.iter().map(|&p| float(p)).collect()));
    }
    out
}

/// The shipped scenarios with default trials and seed.
pub fn preset_configs() -> Vec<RunConfig> {
    PRESETS
        .iter()
        .map(|(_, text)| {
            let mut c = parse_config(text).expect("shipped presets are valid");
            c.seed = DEFAULT_SEED;
            c
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_with_overrides() {
        let c = parse_config("scenario = \"S1\"\nseed = 42\n[sweep]\nvariable = \"beta\"\nvalues = [2, 4, 6, 8, 10, 12, 14, 16, 18, 20]\n")
            .unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.trials, 2000);
        assert_eq!(c.objective, ObjectiveKind::MutualInfo);
        assert_eq!(c.chernoff, ChernoffVariant::Corrected);
        assert_eq!(c.sweep.values.first(), Some(&2.0));
        assert_eq!(c.sweep.values.last(), Some(&20.0));
        assert_eq!(c.scenario.classes, vec![30, 120, 150]);
        assert_eq!(c.schemes.len(), 4);
    }

    #[test]
    fn unknown_sweep_variable_points_at_its_line() {
        let err = parse_config("scenario = \"S1\"\n\n[sweep]\nvariable = \"gamma\"\nvalues = [1]\n").unwrap_err();
        match err {
            ConfigError::Invalid { key, line, .. } => {
                assert_eq!(key, "sweep.variable");
                assert_eq!(line, Some(4));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config("scenario = \"S1\"\ntrails = 10\n").unwrap_err();
        let ConfigError::Syntax { line, message, .. } = err else { panic!("{err:?}") };
        assert_eq!(line, 2);
        assert!(message.contains("trails"), "{message}");
        let err = parse_config("[scenario]\nname = \"a\"\ntasks = 1\nload = 1\nclasses = [1]\ncolor = 1\ngroups = []\n")
            .unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 6, .. }), "{err:?}");
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let err = parse_config("scenario = \"S1\"\ntrials = = 3\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn semantic_errors_list_every_issue() {
        let doc = "[scenario]\nname = \"bad\"\ntasks = 3\nload = 1\nclasses = [2]\n[[scenario.groups]]\ntasks = 3\npi = [1.5]\n";
        let ConfigError::Semantic(issues) = parse_config(doc).unwrap_err() else { panic!() };
        assert!(issues.iter().any(|m| m.contains("1.5")), "{issues:?}");
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(parse_config("scenario = \"S9\""), Err(ConfigError::Invalid { line: Some(1), .. })));
    }

    #[test]
    fn presets_round_trip() {
        for name in preset_names() {
            let c = parse_config(&format!("scenario = \"{name}\"\nseed = 7\noutput = \"out.csv\"")).unwrap();
            assert_eq!(parse_config(&render(&c)).unwrap(), c, "{name}");
        }
    }

    #[test]
    fn preset_contents() {
        let configs = preset_configs();
        let s3 = &configs[2].scenario;
        assert_eq!(s3.groups[1].pi[0], 0.5);
        let s2 = &configs[1].scenario;
        assert!(s2.groups.iter().all(|g| g.pi[2] == 0.5));
        let s1 = configs[0].to_scenario();
        assert_eq!(s1.problem.num_workers(), 300);
        assert_eq!(s1.problem.total_capacity(), 6000);
    }
}
