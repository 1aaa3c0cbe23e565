use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use serde::Serialize;

use rscsim::circuit::{build_round_schedule, CYCLE_STEPS};
use rscsim::decoder::{build_matching_graph, decode, EdgeWeighting, MatchingGraph};
use rscsim::experiment::{
    estimate_logical_error_rate, fit_threshold, log_spaced, threshold_scan, write_csv, ExperimentPoint,
};
use rscsim::freqplan::{assign_classes, collision_yield, selectivity_conflicts, write_collision_csv, CollisionWindows};
use rscsim::lattice::{build_bus_layout, build_lattice};
use rscsim::noise::{preset, ModelKind, NoiseModel};
use rscsim::sim::{extract_detection_events, run_memory, score_shot};
use rscsim::{DetectionEventSet, Error, ExperimentConfig, LogicalErrorEstimate, MemoryBasis};

use crate::args::{Command, DecodeArgs, Emit, FreqplanArgs, LatticeArgs, SimulateArgs, ThresholdArgs};
use crate::manifest::{sha256_hex, FileDigest};

/// One output of a run; `path: None` is stdout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub path: Option<PathBuf>,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn new(path: Option<&Path>, bytes: Vec<u8>) -> Self {
        Artifact {
            path: path.map(Path::to_path_buf),
            bytes,
        }
    }

    fn json(path: Option<&Path>, value: &impl Serialize) -> anyhow::Result<Self> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        Ok(Artifact::new(path, bytes))
    }

    pub fn digest(&self) -> FileDigest {
        FileDigest {
            path: self
                .path
                .as_ref()
                .map_or_else(|| "-".to_string(), |p| p.display().to_string()),
            sha256: sha256_hex(&self.bytes),
        }
    }

    pub fn write(&self, stdout: &mut impl Write) -> anyhow::Result<()> {
        match &self.path {
            Some(p) => std::fs::write(p, &self.bytes).with_context(|| format!("writing {}", p.display())),
            None => Ok(stdout.write_all(&self.bytes)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    NoCrossing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    /// The first artifact is the primary output.
    pub artifacts: Vec<Artifact>,
    pub status: Status,
}

impl Outcome {
    fn ok(artifacts: Vec<Artifact>) -> Self {
        Outcome {
            artifacts,
            status: Status::Ok,
        }
    }
}

/// A command with config files merged and every seed fixed.
pub struct Resolved {
    pub command: Command,
    pub drawn_seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
}

pub fn resolve(mut command: Command) -> anyhow::Result<Resolved> {
    let mut inputs = Vec::new();
    match &mut command {
        Command::Threshold(args) => {
            if let Some(path) = args.config.clone() {
                inputs.push(FileDigest::of_file(&path)?);
                let text = std::fs::read_to_string(&path)?;
                let file: ThresholdArgs =
                    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
                merge_threshold(args, file);
            }
        }
        Command::Decode(args) => {
            inputs.push(FileDigest::of_file(&args.graph)?);
            inputs.push(FileDigest::of_file(&args.events)?);
        }
        _ => {}
    }
    let seed = match &mut command {
        Command::Simulate(a) => Some(&mut a.seed),
        Command::Threshold(a) => Some(&mut a.seed),
        Command::Freqplan(a) => Some(&mut a.seed),
        _ => None,
    };
    let mut drawn_seed = None;
    if let Some(seed @ None) = seed {
        let s = rand::random::<u64>();
        *seed = Some(s);
        drawn_seed = Some(s);
    }
    Ok(Resolved {
        command,
        drawn_seed,
        inputs,
    })
}

fn merge_threshold(flags: &mut ThresholdArgs, file: ThresholdArgs) {
    macro_rules! fill {
        ($($field:ident),*) => {
            $(if flags.$field.is_none() { flags.$field = file.$field; })*
        };
    }
    fill!(model, p_min, p_max, points, q, rounds, shots, seed, memory, weighting, emit, out, fit_out);
    if flags.distances.is_empty() {
        flags.distances = file.distances;
    }
    if flags.rates.is_empty() {
        flags.rates = file.rates;
    }
}

pub fn execute(command: &Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Lattice(a) => lattice(a),
        Command::Schedule(a) => schedule(a),
        Command::Simulate(a) => simulate(a),
        Command::Threshold(a) => threshold(a),
        Command::Decode(a) => decode_events(a),
        Command::Freqplan(a) => freqplan(a),
        Command::Replay(_) => bail!("replay cannot be executed as a plain command"),
    }
}

fn lattice(a: &LatticeArgs) -> anyhow::Result<Outcome> {
    #[derive(Serialize)]
    struct Dump {
        lattice: rscsim::RscLattice,
        buses: rscsim::BusLayout,
    }
    let lattice = build_lattice(a.distance)?;
    let buses = build_bus_layout(&lattice);
    Ok(Outcome::ok(vec![Artifact::json(
        a.out.as_deref(),
        &Dump { lattice, buses },
    )?]))
}

fn schedule(a: &LatticeArgs) -> anyhow::Result<Outcome> {
    #[derive(Serialize)]
    struct Dump {
        distance: usize,
        cycle_steps: usize,
        schedule: rscsim::RoundSchedule,
    }
    let lattice = build_lattice(a.distance)?;
    let schedule = build_round_schedule(&lattice);
    Ok(Outcome::ok(vec![Artifact::json(
        a.out.as_deref(),
        &Dump {
            distance: a.distance,
            cycle_steps: CYCLE_STEPS,
            schedule,
        },
    )?]))
}

fn simulate_model(a: &SimulateArgs) -> anyhow::Result<NoiseModel> {
    if let Some(name) = &a.preset {
        let p = preset(name).ok_or_else(|| anyhow!("unknown preset `{name}`"))?;
        return Ok(p.model());
    }
    let kind: ModelKind = a.model.ok_or_else(|| anyhow!("--model is required"))?.into();
    let p = a.p.ok_or_else(|| anyhow!("--p is required"))?;
    let model = kind.with_rates(p, a.q);
    model.validate()?;
    Ok(model)
}

#[derive(Serialize)]
struct ShotRow {
    shot: u64,
    defects: usize,
    correction: bool,
    failure: bool,
}

fn simulate(a: &SimulateArgs) -> anyhow::Result<Outcome> {
    let model = simulate_model(a)?;
    let seed = a.seed.context("seed unresolved")?;
    let mut point = ExperimentPoint::new(model, a.distance, seed);
    point.shots = a.shots;
    point.memory = MemoryBasis::from(a.memory);
    if let Some(r) = a.rounds {
        point.rounds = r;
    }
    if let Some(w) = a.weighting {
        point.weighting = w.into();
    }
    let lattice = build_lattice(a.distance)?;
    let schedule = build_round_schedule(&lattice);
    let graph = build_matching_graph(
        &lattice,
        &schedule,
        &model,
        point.rounds,
        point.memory.check_basis(),
        point.weighting,
    )?;

    let mut artifacts = Vec::new();
    let mut events_log = Vec::new();
    let mut rows = Vec::new();
    let estimate = if a.per_shot || a.events_out.is_some() {
        let mut failures = 0;
        for shot in 0..point.shots {
            let history = run_memory(&lattice, &schedule, &model, point.memory, point.rounds, seed, shot)?;
            let events = extract_detection_events(&lattice, &history);
            let correction = decode(&graph, &lattice, &events)?;
            let failure = score_shot(&lattice, &history, correction.flip);
            failures += u64::from(failure);
            rows.push(ShotRow {
                shot,
                defects: events.defects.len(),
                correction: correction.flip,
                failure,
            });
            if a.events_out.is_some() {
                events_log.push(events);
            }
        }
        LogicalErrorEstimate::from_counts(&point, failures)
    } else {
        estimate_logical_error_rate(&point)?
    };
    if estimate.low_stats {
        log::warn!("only {} failures; estimate is low-statistics", estimate.failures);
    }

    let out = a.out.as_deref();
    artifacts.push(match (a.emit, a.per_shot) {
        (Emit::Csv, false) => {
            let mut buf = Vec::new();
            write_csv(&[estimate], &mut buf)?;
            Artifact::new(out, buf)
        }
        (Emit::Json, false) => Artifact::json(out, &estimate)?,
        (Emit::Csv, true) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                w.serialize(row)?;
            }
            Artifact::new(out, w.into_inner().map_err(|e| anyhow!("{e}"))?)
        }
        (Emit::Json, true) => Artifact::json(out, &rows)?,
    });
    if let Some(path) = &a.graph_out {
        artifacts.push(Artifact::json(Some(path), &graph)?);
    }
    if let Some(path) = &a.events_out {
        artifacts.push(Artifact::json(Some(path), &events_log)?);
    }
    Ok(Outcome::ok(artifacts))
}

fn threshold_config(a: &ThresholdArgs) -> anyhow::Result<ExperimentConfig> {
    let model: ModelKind = a.model.ok_or_else(|| anyhow!("--model is required"))?.into();
    if a.distances.is_empty() {
        bail!("--distances is required");
    }
    let physical_rates = if !a.rates.is_empty() {
        a.rates.clone()
    } else {
        match (a.p_min, a.p_max, a.points) {
            (Some(lo), Some(hi), Some(n)) => log_spaced(lo, hi, n),
            _ => bail!("give --rates or all of --p-min, --p-max and --points"),
        }
    };
    Ok(ExperimentConfig {
        model,
        distances: a.distances.clone(),
        physical_rates,
        measurement_rate: a.q,
        rounds: a.rounds,
        shots: a.shots.unwrap_or(rscsim::experiment::DEFAULT_SHOTS),
        seed: a.seed.context("seed unresolved")?,
        memory: a.memory.unwrap_or_default().into(),
        weighting: a.weighting.map(EdgeWeighting::from),
        output: a.out.clone(),
    })
}

fn threshold(a: &ThresholdArgs) -> anyhow::Result<Outcome> {
    let config = threshold_config(a)?;
    config.validate_for_threshold()?;
    let table = threshold_scan(&config)?;
    let out = a.out.as_deref();
    let mut artifacts = vec![match a.emit.unwrap_or(Emit::Csv) {
        Emit::Csv => {
            let mut buf = Vec::new();
            write_csv(&table, &mut buf)?;
            Artifact::new(out, buf)
        }
        Emit::Json => Artifact::json(out, &table)?,
    }];
    let status = match fit_threshold(&table) {
        Ok(fit) => {
            eprintln!("threshold: {:.4e} +/- {:.2e}", fit.p_th, fit.uncertainty);
            if let Some(path) = &a.fit_out {
                artifacts.push(Artifact::json(Some(path), &fit)?);
            }
            Status::Ok
        }
        Err(Error::NoCrossing) => {
            eprintln!("no crossing in the scanned range");
            Status::NoCrossing
        }
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome { artifacts, status })
}

#[derive(Serialize)]
struct DecodedRow {
    index: usize,
    flip: bool,
    weight: i64,
}

fn decode_events(a: &DecodeArgs) -> anyhow::Result<Outcome> {
    let graph: MatchingGraph = serde_json::from_str(&std::fs::read_to_string(&a.graph)?)
        .with_context(|| format!("parsing graph {}", a.graph.display()))?;
    let events: Vec<DetectionEventSet> = serde_json::from_str(&std::fs::read_to_string(&a.events)?)
        .with_context(|| format!("parsing events {}", a.events.display()))?;
    let lattice = build_lattice(graph.code_distance())?;
    let rows = events
        .iter()
        .enumerate()
        .map(|(index, e)| {
            let c = decode(&graph, &lattice, e)?;
            Ok(DecodedRow {
                index,
                flip: c.flip,
                weight: c.weight,
            })
        })
        .collect::<rscsim::Result<Vec<_>>>()?;
    let out = a.out.as_deref();
    Ok(Outcome::ok(vec![match a.emit {
        Emit::Json => Artifact::json(out, &rows)?,
        Emit::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                w.serialize(row)?;
            }
            Artifact::new(out, w.into_inner().map_err(|e| anyhow!("{e}"))?)
        }
    }]))
}

fn freqplan(a: &FreqplanArgs) -> anyhow::Result<Outcome> {
    let lattice = build_lattice(a.distance)?;
    let buses = build_bus_layout(&lattice);
    let plan = assign_classes(&lattice, &buses);
    let conflicts = selectivity_conflicts(&plan);
    if !conflicts.is_empty() {
        bail!("class plan violates selectivity: {conflicts:?}");
    }
    let sigma = rscsim::freqplan::SigmaInterpretation::from(a.sigma_reading).sigma_mhz(a.sigma_mhz);
    let windows = CollisionWindows {
        degenerate_mhz: a.w1_mhz,
        one_two_mhz: a.w2_mhz,
        two_photon_mhz: a.w3_mhz,
    };
    let report = collision_yield(&plan, sigma, a.samples, a.seed.context("seed unresolved")?, &windows)?;
    eprintln!(
        "collision probability {:.4} [{:.4}, {:.4}] over {} samples",
        report.probability, report.ci_low, report.ci_high, report.samples
    );
    let out = a.out.as_deref();
    let mut artifacts = vec![match a.emit {
        Emit::Csv => {
            let mut buf = Vec::new();
            write_collision_csv(&report, &mut buf)?;
            Artifact::new(out, buf)
        }
        Emit::Json => Artifact::json(out, &report)?,
    }];
    if let Some(path) = &a.plan_out {
        artifacts.push(Artifact::json(Some(path), &plan)?);
    }
    Ok(Outcome::ok(artifacts))
}
