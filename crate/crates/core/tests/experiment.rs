mod common;

use saf_relay::experiment::run_directory;
use saf_relay::export::{read_pairing_csv, read_powers_csv, read_trajectory_csv};
use saf_relay::pairing::validate;
use saf_relay::{parse_config, run_experiment, solve_saf, Error};

use common::small_experiment;

#[test]
fn repeated_experiments_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_experiment(&small_experiment(a.path())).unwrap();
    let rb = run_experiment(&small_experiment(b.path())).unwrap();
    assert_eq!(ra.runs.len(), 4);
    for (x, y) in ra.runs.iter().zip(&rb.runs) {
        for name in ["trajectory.csv", "pairing.csv", "powers.csv", "summary.json"] {
            assert_eq!(std::fs::read(x.dir.join(name)).unwrap(), std::fs::read(y.dir.join(name)).unwrap());
        }
    }
    assert!(ra.ordering_violations.is_empty(), "{:?}", ra.ordering_violations);
}

#[test]
fn exported_schedule_is_feasible() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_experiment(dir.path());
    let report = run_experiment(&spec).unwrap();
    for run in &report.runs {
        let config = spec.scenario(run.p_dbm);
        assert_eq!(run.dir, dir.path().join(run_directory(&run.kind, run.p_dbm)));
        let traj = read_trajectory_csv(&run.dir.join("trajectory.csv")).unwrap();
        traj.check(&config).unwrap();
        let powers = read_powers_csv(&run.dir.join("powers.csv")).unwrap();
        powers.check(config.energy_source, config.energy_uav).unwrap();
        let (pairing, _) = read_pairing_csv(&run.dir.join("pairing.csv")).unwrap();
        assert!(validate(&pairing, &config));
    }
}

#[test]
fn solver_traces_repeat_bit_for_bit() {
    let spec = parse_config("slots = 60\npower_dbm = 8.0\n").unwrap();
    let config = spec.scenario(spec.power_dbm);
    let first = solve_saf(&config).unwrap();
    let second = solve_saf(&config).unwrap();
    let bits = |t: &[f64]| t.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&first.objective_trace), bits(&second.objective_trace));
    assert_eq!(first.pairing, second.pairing);
}

#[test]
fn rendered_spec_parses_back() {
    let text = "slots = 12\nsweep_dbm = [1.5, 2.25]\nvariants = [\"saf_delay\", \"iaf\"]\n\
                [solver]\nao_tolerance = 0.001\nao_measure = \"average\"\n\
                [variant.saf_delay]\nmax_delay = [3]\n";
    let spec = parse_config(text).unwrap();
    let again = parse_config(&spec.render()).unwrap();
    assert_eq!(again, spec);
}

#[test]
fn config_errors_are_typed() {
    match parse_config("slots = 0\nmax_speed_mps = 0.0\n") {
        Err(Error::Config(problems)) => assert_eq!(problems.len(), 2, "{problems:?}"),
        other => panic!("unexpected {other:?}"),
    }
}
