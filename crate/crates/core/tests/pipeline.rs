use crowdrep::allocation::greedy_allocate;
use crowdrep::commands::cmd_run;
use crowdrep::config::parse_config;
use crowdrep::model::{ClassSpec, Problem};
use crowdrep::objectives::{evaluate_objective, ObjectiveKind};
use crowdrep::simulate::{monte_carlo, run_trial, scenario_presets, Scenario, Scheme, Sweep, SweepVariable};

fn small(pi: f64, beta: f64, schemes: Vec<Scheme>, trials: usize, seed: u64) -> Scenario {
    Scenario {
        name: "small".into(),
        problem: Problem::with_uniform_load(20, vec![ClassSpec::uniform(60, 20, pi)], 20, 1),
        schemes,
        sweep: Sweep { variable: SweepVariable::Beta, values: vec![beta] },
        beta,
        x: 0.0,
        trials,
        seed,
        objective: ObjectiveKind::MutualInfo,
    }
}

fn within_sigmas(observed: f64, expected: f64, decisions: f64, k: f64) -> bool {
    let se = (expected * (1.0 - expected) / decisions).sqrt();
    (observed - expected).abs() <= k * se
}

#[test]
fn fair_coin_workers_give_chance_accuracy() {
    let s = small(0.5, 3.0, vec![Scheme::MajorityUniform, Scheme::MapGreedy], 10_000, 4);
    for r in monte_carlo(&s).unwrap() {
        assert!(within_sigmas(r.pe, 0.5, 2e5, 3.0), "{}: {}", r.scheme, r.pe);
    }
}

#[test]
fn three_reliable_workers_per_task() {
    // majority of three with error 0.1: 3 p^2 (1 - p) + p^3
    let expected = 3.0 * 0.01 * 0.9 + 0.001;
    let s = small(0.1, 3.0, vec![Scheme::MajorityUniform], 4000, 11);
    let r = &monte_carlo(&s).unwrap()[0];
    assert_eq!(r.tie_flag_rate, 0.0);
    assert!(within_sigmas(r.pe, expected, 80_000.0, 3.0), "{} vs {expected}", r.pe);
}

#[test]
fn map_greedy_tracks_its_analytic_error() {
    let mut s = small(0.1, 2.0, vec![Scheme::MapGreedy], 4000, 12);
    s.problem = Problem::with_uniform_load(
        20,
        vec![ClassSpec::uniform(5, 20, 0.05), ClassSpec::uniform(20, 20, 0.2), ClassSpec::uniform(30, 20, 0.4)],
        4,
        1,
    );
    let problem = s.problem_at(2.0);
    let (d, _) = greedy_allocate(&problem, ObjectiveKind::MutualInfo).unwrap();
    let expected = -evaluate_objective(ObjectiveKind::AvgError, &d, &problem).unwrap();
    let r = &monte_carlo(&s).unwrap()[0];
    assert!(within_sigmas(r.pe, expected, 80_000.0, 3.0), "{} vs {expected}", r.pe);
}

#[test]
fn preset_sizes() {
    let presets = scenario_presets();
    assert_eq!(presets.iter().map(|s| s.name.as_str()).collect::<Vec<_>>(), ["S1", "S2", "S3"]);
    for s in &presets {
        assert_eq!(s.problem.tasks, 100);
        assert!(s.check().is_ok(), "{}", s.name);
    }
    let s1 = &presets[0];
    assert_eq!(s1.problem.num_workers(), 300);
    assert_eq!(s1.problem.total_capacity(), 6000);
    assert_eq!(s1.budget(4.0), 400);
    assert_eq!(presets[2].problem.num_workers(), 200);
}

#[test]
fn runs_are_reproducible() {
    let cfg = parse_config("scenario = \"S2\"\ntrials = 20\nseed = 77\n[sweep]\nvariable = \"beta\"\nvalues = [2, 6]\n").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    cmd_run(&cfg, Some(&a)).unwrap();
    cmd_run(&cfg, Some(&b)).unwrap();
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 9);

    let mut other = cfg.clone();
    other.seed = 78;
    assert_ne!(cmd_run(&cfg, None).unwrap().1, cmd_run(&other, None).unwrap().1);
}

#[test]
fn each_trial_depends_only_on_its_index() {
    let mut s = scenario_presets().remove(0).with_sweep(SweepVariable::X, vec![0.6]).with_trials(12);
    s.beta = 4.0;
    let point = s.points()[0];
    let records = monte_carlo(&s).unwrap();
    let short = monte_carlo(&s.with_trials(5)).unwrap();
    let singles: Vec<_> = (0..12).map(|t| run_trial(&s, point, t).unwrap()).collect();
    for (i, r) in records.iter().enumerate() {
        let total: usize = singles.iter().map(|o| o.errors[i]).sum();
        let prefix: usize = singles[..5].iter().map(|o| o.errors[i]).sum();
        assert_eq!(r.errors, total as u64, "{}", r.scheme);
        assert_eq!(short[i].errors, prefix as u64, "{}", r.scheme);
    }
}
