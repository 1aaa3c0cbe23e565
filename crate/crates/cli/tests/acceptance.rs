//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};

use rscsim::circuit::{build_round_schedule, fault_locations};
use rscsim::decoder::{brute_force_mwpm, build_matching_graph, decode, mwpm, EdgeWeighting};
use rscsim::experiment::{estimate_logical_error_rate, fit_threshold, log_spaced, threshold_scan, ExperimentPoint};
use rscsim::freqplan::{
    assign_classes, bus_conflicts, collision_yield, find_class_assignment, selectivity_conflicts, CollisionWindows,
    DEFAULT_DISORDER_MHZ,
};
use rscsim::lattice::{build_bus_layout, build_lattice};
use rscsim::noise::ModelKind;
use rscsim::sim::{extract_detection_events, score_shot, InjectedFaults, MemoryExperiment, RoundStructure};
use rscsim::{ExperimentConfig, MemoryBasis, NoiseModel, Pauli};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn distance_property() -> Check {
    let mut decoded = 0usize;
    for (d, max_weight) in [(3, 1), (5, 2)] {
        let l = build_lattice(d).map_err(err)?;
        let s = build_round_schedule(&l);
        let model = NoiseModel::CodeCapacity { p: 0.01 };
        for memory in [MemoryBasis::Z, MemoryBasis::X] {
            let g =
                build_matching_graph(&l, &s, &model, 1, memory.check_basis(), EdgeWeighting::default()).map_err(err)?;
            let exp = MemoryExperiment::new(&l, &s, RoundStructure::Ideal, memory, 1).map_err(err)?;
            let mut errors: Vec<Vec<(usize, usize, Pauli)>> = Vec::new();
            for q in 0..l.n_data() {
                for p in Pauli::NONTRIVIAL {
                    errors.push(vec![(0, q, p)]);
                    if max_weight >= 2 {
                        for r in q + 1..l.n_data() {
                            for p2 in Pauli::NONTRIVIAL {
                                errors.push(vec![(0, q, p), (0, r, p2)]);
                            }
                        }
                    }
                }
            }
            if d == 3 && errors.len() != 27 {
                return Err(format!("expected 27 weight-1 errors at d=3, built {}", errors.len()));
            }
            for data in errors {
                let mut inj = InjectedFaults {
                    data: data.clone(),
                    ..Default::default()
                };
                let h = exp.run(&mut inj);
                let c = decode(&g, &l, &extract_detection_events(&l, &h)).map_err(err)?;
                if score_shot(&l, &h, c.flip) {
                    return Err(format!("d={d} {memory:?} memory fails on {data:?}"));
                }
                decoded += 1;
            }
        }
    }
    Ok(format!(
        "{decoded} errors (d=3 weight 1, d=5 weight <= 2, both memories) all corrected"
    ))
}

fn circuit_fault_distance() -> Check {
    let l = build_lattice(3).map_err(err)?;
    let s = build_round_schedule(&l);
    let model = NoiseModel::CircuitLevel { p: 1e-3 };
    let rounds = 3;
    let locations = fault_locations(&s);
    let mut decoded = 0usize;
    for memory in [MemoryBasis::Z, MemoryBasis::X] {
        let g = build_matching_graph(
            &l,
            &s,
            &model,
            rounds,
            memory.check_basis(),
            EdgeWeighting::LogLikelihood,
        )
        .map_err(err)?;
        let exp = MemoryExperiment::new(&l, &s, RoundStructure::Circuit, memory, rounds).map_err(err)?;
        for round in 0..rounds {
            for (i, loc) in locations.iter().enumerate() {
                for fault in loc.fault_domain() {
                    let mut inj = InjectedFaults {
                        circuit: vec![(round, i, fault)],
                        ..Default::default()
                    };
                    let h = exp.run(&mut inj);
                    let c = decode(&g, &l, &extract_detection_events(&l, &h)).map_err(err)?;
                    if score_shot(&l, &h, c.flip) {
                        return Err(format!("{memory:?} memory fails on round {round} {loc:?} {fault:?}"));
                    }
                    decoded += 1;
                }
            }
        }
    }
    Ok(format!(
        "{decoded} single faults over {} locations x 3 rounds x 2 memories all corrected",
        locations.len()
    ))
}

fn decoder_oracle() -> Check {
    const INSTANCES: usize = 1000;
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut total = 0usize;
    for kind in [
        ModelKind::CodeCapacity,
        ModelKind::Phenomenological,
        ModelKind::CircuitLevel,
    ] {
        for d in [3, 5] {
            let l = build_lattice(d).map_err(err)?;
            let s = build_round_schedule(&l);
            let model = kind.with_rates(5e-3, None);
            let rounds = if kind == ModelKind::CodeCapacity { 1 } else { d };
            for basis in [MemoryBasis::Z, MemoryBasis::X] {
                let g = build_matching_graph(
                    &l,
                    &s,
                    &model,
                    rounds,
                    basis.check_basis(),
                    EdgeWeighting::LogLikelihood,
                )
                .map_err(err)?;
                let n = g.boundary_node();
                for _ in 0..INSTANCES / 2 {
                    let k = rng.random_range(0..=8usize.min(n));
                    let defects = sample(&mut rng, n, k).into_vec();
                    let fast = mwpm(&g, &defects).map_err(err)?;
                    let slow = brute_force_mwpm(&g, &defects).map_err(err)?;
                    if fast.weight != slow.weight {
                        return Err(format!(
                            "{} d={d}: blossom {} vs brute force {} on {defects:?}",
                            kind.name(),
                            fast.weight,
                            slow.weight
                        ));
                    }
                    total += 1;
                }
            }
        }
    }
    Ok(format!(
        "{total} instances ({INSTANCES} per model and distance) with equal weights"
    ))
}

fn threshold_band() -> Check {
    let config = ExperimentConfig {
        model: ModelKind::CircuitLevel,
        distances: vec![3, 5],
        physical_rates: log_spaced(2e-3, 2e-2, 7),
        measurement_rate: None,
        rounds: None,
        shots: 10_000,
        seed: 2024,
        memory: MemoryBasis::Z,
        weighting: None,
        output: None,
    };
    config.validate_for_threshold().map_err(err)?;
    let table = threshold_scan(&config).map_err(err)?;
    let fit = fit_threshold(&table).map_err(err)?;
    ensure(
        (2e-3..=1.2e-2).contains(&fit.p_th),
        format!(
            "crossing p_th = {:.3e} +- {:.1e}, band [2e-3, 1.2e-2]",
            fit.p_th, fit.uncertainty
        ),
    )
}

fn memory_criterion() -> Check {
    let run = |d: usize| {
        let mut point = ExperimentPoint::new(NoiseModel::CircuitLevel { p: 1e-3 }, d, 11);
        point.shots = 100_000;
        estimate_logical_error_rate(&point)
    };
    let bare = run(1).map_err(err)?;
    let code = run(3).map_err(err)?;
    let (b_lo, b_hi) = bare.per_round_interval();
    let (c_lo, c_hi) = code.per_round_interval();
    ensure(
        code.p_l_per_round < bare.p_l_per_round && c_hi < b_lo,
        format!(
            "per-round d=3 {:.2e} [{c_lo:.2e}, {c_hi:.2e}] vs d=1 {:.2e} [{b_lo:.2e}, {b_hi:.2e}]",
            code.p_l_per_round, bare.p_l_per_round
        ),
    )
}

fn sub_threshold_scaling() -> Check {
    let run = |d: usize| {
        let mut point = ExperimentPoint::new(NoiseModel::CircuitLevel { p: 2e-3 }, d, 12);
        point.shots = 20_000;
        estimate_logical_error_rate(&point)
    };
    let small = run(3).map_err(err)?;
    let large = run(5).map_err(err)?;
    ensure(
        large.p_l < small.p_l && large.ci_high < small.ci_low,
        format!(
            "p_L d=5 {:.2e} [{:.2e}, {:.2e}] vs d=3 {:.2e} [{:.2e}, {:.2e}]",
            large.p_l, large.ci_low, large.ci_high, small.p_l, small.ci_low, small.ci_high
        ),
    )
}

fn frequency_planner() -> Check {
    let windows = CollisionWindows::default();
    for d in [3, 5, 7, 9] {
        let l = build_lattice(d).map_err(err)?;
        let buses = build_bus_layout(&l);
        let plan = assign_classes(&l, &buses);
        if !selectivity_conflicts(&plan).is_empty() || !bus_conflicts(&plan, &buses).is_empty() {
            return Err(format!("class conflicts at d={d}"));
        }
        let quiet = collision_yield(&plan, 0.0, 100, 1, &windows).map_err(err)?;
        if quiet.colliding_samples != 0 {
            return Err(format!(
                "{} collisions at zero disorder, d={d}",
                quiet.colliding_samples
            ));
        }
    }
    let tile = vec![vec![0, 1, 2, 3, 4]];
    if find_class_assignment(5, &tile, 4).is_some() {
        return Err("4 classes found for the unit tile".into());
    }
    let l = build_lattice(5).map_err(err)?;
    let plan = assign_classes(&l, &build_bus_layout(&l));
    let report = collision_yield(&plan, DEFAULT_DISORDER_MHZ, 10_000, 5, &windows).map_err(err)?;
    ensure(
        report.ci_low > 0.0,
        format!(
            "d<=9 distinct, sigma=0 clean, 4 classes UNSAT; d=5 at {DEFAULT_DISORDER_MHZ} MHz P = {:.4} [{:.4}, {:.4}]",
            report.probability, report.ci_low, report.ci_high
        ),
    )
}

fn rscsim(dir: &Path, args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_rscsim"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(err)?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    let root = dir.path();
    std::fs::write(
        root.join("scan.toml"),
        "model = \"code-capacity\"\ndistances = [3, 5]\nrates = [0.08, 0.12, 0.18]\nshots = 3000\n",
    )
    .map_err(err)?;
    // (name, argv after --threads N, primary output, extra outputs)
    let runs: [(&str, Vec<&str>, &str, Vec<&str>); 6] = [
        (
            "lattice",
            vec!["lattice", "-d", "5", "-o", "lat.json"],
            "lat.json",
            vec![],
        ),
        (
            "schedule",
            vec!["schedule", "-d", "5", "-o", "sched.json"],
            "sched.json",
            vec![],
        ),
        (
            "simulate",
            vec![
                "simulate",
                "-d",
                "3",
                "--model",
                "circuit",
                "--p",
                "5e-3",
                "--shots",
                "3000",
                "--seed",
                "9",
                "-o",
                "sim.csv",
                "--graph-out",
                "graph.json",
                "--events-out",
                "events.json",
            ],
            "sim.csv",
            vec!["graph.json", "events.json"],
        ),
        (
            "threshold",
            vec![
                "threshold",
                "--config",
                "scan.toml",
                "--seed",
                "4",
                "-o",
                "scan.csv",
                "--fit-out",
                "fit.json",
            ],
            "scan.csv",
            vec!["fit.json"],
        ),
        (
            "decode",
            vec![
                "decode",
                "--graph",
                "graph.json",
                "--events",
                "events.json",
                "-o",
                "dec.json",
            ],
            "dec.json",
            vec![],
        ),
        (
            "freqplan",
            vec![
                "freqplan",
                "-d",
                "5",
                "--samples",
                "2000",
                "--seed",
                "3",
                "-o",
                "freq.csv",
                "--plan-out",
                "plan.json",
            ],
            "freq.csv",
            vec!["plan.json"],
        ),
    ];
    let workers = std::thread::available_parallelism()
        .map_or(4, |n| n.get().max(4))
        .to_string();
    for (name, argv, primary, extra) in &runs {
        let files: Vec<&str> = std::iter::once(*primary).chain(extra.iter().copied()).collect();
        let mut reference: Option<(i32, Vec<Vec<u8>>)> = None;
        for threads in ["1", workers.as_str()] {
            let mut full = vec!["--threads", threads];
            full.extend(argv.iter().copied());
            let (code, _) = rscsim(root, &full)?;
            let bytes = files
                .iter()
                .map(|f| std::fs::read(root.join(f)).map_err(err))
                .collect::<Result<Vec<_>, _>>()?;
            match &reference {
                None => reference = Some((code, bytes)),
                Some(r) if *r != (code, bytes) => {
                    return Err(format!("{name}: output differs between 1 and {workers} threads"));
                }
                Some(_) => {}
            }
            let manifest = format!("{primary}.manifest.json");
            for replay_threads in ["1", workers.as_str()] {
                let (replay_code, stdout) = rscsim(root, &["--threads", replay_threads, "replay", &manifest])?;
                let text = String::from_utf8_lossy(&stdout);
                if replay_code != code || text.contains("MISMATCH") || text.lines().count() != files.len() {
                    return Err(format!(
                        "{name}: replay at {replay_threads} threads of the {threads}-thread run gave exit {replay_code}: {text}"
                    ));
                }
            }
        }
    }
    Ok(format!(
        "6 subcommands byte-identical at 1 and {workers} threads, and on replay"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("distance property", distance_property),
        ("circuit-level fault distance", circuit_fault_distance),
        ("decoder oracle equivalence", decoder_oracle),
        ("threshold band", threshold_band),
        ("memory criterion", memory_criterion),
        ("sub-threshold scaling", sub_threshold_scaling),
        ("frequency planner", frequency_planner),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {}. {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
