//! Monte-Carlo estimation of logical error rates and threshold crossings.

use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_round_schedule, RoundSchedule};
use crate::decoder::{build_matching_graph, decode, EdgeWeighting, MatchingGraph};
use crate::error::{Error, Result};
use crate::lattice::{build_lattice, RscLattice};
use crate::noise::{check_probability, ModelKind, NoiseModel};
use crate::sim::{extract_detection_events, run_memory, score_shot, MemoryBasis};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

pub const DEFAULT_SHOTS: u64 = 10_000;

/// Points with fewer failures are flagged in the CSV.
pub const LOW_STATS_FAILURES: u64 = 10;

/// Shots per parallel work item. Fixed so results do not depend on the
/// worker count.
const CHUNK: u64 = 1024;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let phat = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (phat + z2 / (2.0 * n_f)) / denom;
    let half = z * (phat * (1.0 - phat) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let low = if k == 0 { 0.0 } else { (center - half).clamp(0.0, phat) };
    let high = if k == n { 1.0 } else { (center + half).clamp(phat, 1.0) };
    (low, high)
}

/// Convert a per-shot failure probability over `rounds` rounds to a per-round one.
pub fn per_round(p_l: f64, rounds: usize) -> f64 {
    1.0 - (1.0 - p_l).powf(1.0 / rounds as f64)
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

fn default_rounds(model: ModelKind, d: usize) -> usize {
    match model {
        ModelKind::CodeCapacity => 1,
        _ => d,
    }
}

/// One `(d, p)` point of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPoint {
    pub model: NoiseModel,
    pub distance: usize,
    pub rounds: usize,
    pub shots: u64,
    pub seed: u64,
    pub memory: MemoryBasis,
    pub weighting: EdgeWeighting,
}

impl ExperimentPoint {
    /// Point with default rounds (1 for code capacity, `d` otherwise),
    /// shots, memory basis and weighting.
    pub fn new(model: NoiseModel, distance: usize, seed: u64) -> Self {
        ExperimentPoint {
            model,
            distance,
            rounds: default_rounds(model.kind(), distance),
            shots: DEFAULT_SHOTS,
            seed,
            memory: MemoryBasis::Z,
            weighting: EdgeWeighting::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogicalErrorEstimate {
    pub model: ModelKind,
    pub d: usize,
    pub p: f64,
    pub q: f64,
    pub rounds: usize,
    pub shots: u64,
    pub failures: u64,
    #[serde(rename = "p_L")]
    pub p_l: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    #[serde(rename = "p_L_per_round")]
    pub p_l_per_round: f64,
    pub seed: u64,
    pub low_stats: bool,
}

impl LogicalErrorEstimate {
    pub fn from_counts(point: &ExperimentPoint, failures: u64) -> Self {
        let p_l = failures as f64 / point.shots as f64;
        let (ci_low, ci_high) = wilson_interval(failures, point.shots, Z_95);
        LogicalErrorEstimate {
            model: point.model.kind(),
            d: point.distance,
            p: point.model.p(),
            q: point.model.q(),
            rounds: point.rounds,
            shots: point.shots,
            failures,
            p_l,
            ci_low,
            ci_high,
            p_l_per_round: per_round(p_l, point.rounds),
            seed: point.seed,
            low_stats: failures < LOW_STATS_FAILURES,
        }
    }

    /// The 95% interval mapped to per-round rates.
    pub fn per_round_interval(&self) -> (f64, f64) {
        (
            per_round(self.ci_low, self.rounds),
            per_round(self.ci_high, self.rounds),
        )
    }
}

struct Prepared {
    lattice: RscLattice,
    schedule: RoundSchedule,
    graph: MatchingGraph,
}

impl Prepared {
    fn new(point: &ExperimentPoint) -> Result<Self> {
        if point.shots == 0 {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        point.model.validate()?;
        let lattice = build_lattice(point.distance)?;
        let schedule = build_round_schedule(&lattice);
        let graph = build_matching_graph(
            &lattice,
            &schedule,
            &point.model,
            point.rounds,
            point.memory.check_basis(),
            point.weighting,
        )?;
        Ok(Prepared {
            lattice,
            schedule,
            graph,
        })
    }

    fn failures(&self, point: &ExperimentPoint, shots: std::ops::Range<u64>) -> Result<u64> {
        let (lattice, schedule) = (&self.lattice, &self.schedule);
        let mut failures = 0;
        for shot in shots {
            let history = run_memory(
                lattice,
                schedule,
                &point.model,
                point.memory,
                point.rounds,
                point.seed,
                shot,
            )?;
            let events = extract_detection_events(lattice, &history);
            let correction = decode(&self.graph, lattice, &events)?;
            failures += u64::from(score_shot(lattice, &history, correction.flip));
        }
        Ok(failures)
    }
}

/// Count logical failures over a range of shot indices, sequentially.
pub fn count_failures(point: &ExperimentPoint, shots: std::ops::Range<u64>) -> Result<u64> {
    Prepared::new(point)?.failures(point, shots)
}

/// Run `point.shots` shots on the rayon pool. Shot `i` always uses random
/// stream `(seed, i)`, so the result is independent of the worker count.
pub fn estimate_logical_error_rate(point: &ExperimentPoint) -> Result<LogicalErrorEstimate> {
    let prepared = Prepared::new(point)?;
    let chunks = point.shots.div_ceil(CHUNK);
    let per_chunk = (0..chunks)
        .into_par_iter()
        .map(|c| prepared.failures(point, c * CHUNK..((c + 1) * CHUNK).min(point.shots)))
        .collect::<Result<Vec<u64>>>()?;
    Ok(LogicalErrorEstimate::from_counts(point, per_chunk.iter().sum()))
}

/// A scan over the cross product of distances and physical rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub distances: Vec<usize>,
    pub physical_rates: Vec<f64>,
    /// Measurement error rate for the phenomenological model; defaults to `p`.
    #[serde(default)]
    pub measurement_rate: Option<f64>,
    /// Rounds per shot; defaults to `d` (1 for code capacity).
    #[serde(default)]
    pub rounds: Option<usize>,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub memory: MemoryBasis,
    #[serde(default)]
    pub weighting: Option<EdgeWeighting>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_shots() -> u64 {
    DEFAULT_SHOTS
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        if self.distances.is_empty() || self.physical_rates.is_empty() {
            return Err(Error::InvalidConfig("need at least one distance and one rate".into()));
        }
        if let Some(&d) = self.distances.iter().find(|&&d| d.is_multiple_of(2)) {
            return Err(Error::EvenDistance(d));
        }
        if let Some(&p) = self.physical_rates.iter().find(|&&p| !(p > 0.0 && p < 0.5)) {
            return Err(Error::ProbabilityOutOfRange { name: "p", value: p });
        }
        if let Some(q) = self.measurement_rate {
            check_probability("q", q)?;
        }
        if self.rounds == Some(0) {
            return Err(Error::NoRounds);
        }
        Ok(())
    }

    /// Extra requirements for fitting a threshold.
    pub fn validate_for_threshold(&self) -> Result<()> {
        self.validate()?;
        if self.distances.len() < 2 || self.physical_rates.len() < 3 {
            return Err(Error::InvalidConfig(
                "a threshold scan needs at least 2 distances and 3 rates".into(),
            ));
        }
        Ok(())
    }

    /// Points in scan order: distances outer, rates inner.
    pub fn points(&self) -> Vec<ExperimentPoint> {
        let mut out = Vec::new();
        for &d in &self.distances {
            for &p in &self.physical_rates {
                let model = self.model.with_rates(p, self.measurement_rate);
                out.push(ExperimentPoint {
                    model,
                    distance: d,
                    rounds: self.rounds.unwrap_or_else(|| default_rounds(self.model, d)),
                    shots: self.shots,
                    seed: self.seed,
                    memory: self.memory,
                    weighting: self.weighting.unwrap_or_default(),
                });
            }
        }
        out
    }
}

/// Estimate every point of the scan. Points run in order; shots within a
/// point run in parallel.
pub fn threshold_scan(config: &ExperimentConfig) -> Result<Vec<LogicalErrorEstimate>> {
    config.validate()?;
    config
        .points()
        .iter()
        .map(|point| {
            let estimate = estimate_logical_error_rate(point)?;
            log::info!(
                "d={} p={:.3e}: {}/{} failures",
                estimate.d,
                estimate.p,
                estimate.failures,
                estimate.shots
            );
            Ok(estimate)
        })
        .collect()
}

pub const CSV_HEADER: [&str; 13] = [
    "model",
    "d",
    "p",
    "q",
    "rounds",
    "shots",
    "failures",
    "p_L",
    "ci_low",
    "ci_high",
    "p_L_per_round",
    "seed",
    "low_stats",
];

pub fn write_csv(table: &[LogicalErrorEstimate], out: impl Write) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in table {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Crossing of the curves of two distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCrossing {
    pub d_small: usize,
    pub d_large: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub p_th: f64,
    /// Half the range of the pairwise crossings.
    pub uncertainty: f64,
    pub crossings: Vec<PairCrossing>,
}

/// First crossing of two curves sampled at the same rates, interpolating
/// linearly in `(ln p, ln p_L)`. Zero-failure points are skipped.
fn pair_crossing(small: &[&LogicalErrorEstimate], large: &[&LogicalErrorEstimate]) -> Option<f64> {
    let mut diffs: Vec<(f64, f64)> = Vec::new();
    for a in small {
        if let Some(b) = large.iter().find(|b| b.p == a.p) {
            if a.failures > 0 && b.failures > 0 {
                diffs.push((a.p.ln(), b.p_l.ln() - a.p_l.ln()));
            }
        }
    }
    diffs.sort_by(|x, y| x.0.total_cmp(&y.0));
    for w in diffs.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 == 0.0 {
            return Some(x0.exp());
        }
        if (y0 < 0.0) != (y1 < 0.0) || y1 == 0.0 {
            let t = y0 / (y0 - y1);
            return Some((x0 + t * (x1 - x0)).exp());
        }
    }
    None
}

/// Threshold from pairwise curve crossings, averaged over all distance
/// pairs that cross.
pub fn fit_threshold(table: &[LogicalErrorEstimate]) -> Result<ThresholdEstimate> {
    let mut distances: Vec<usize> = table.iter().map(|e| e.d).collect();
    distances.sort_unstable();
    distances.dedup();
    if distances.len() < 2 {
        return Err(Error::InvalidConfig("threshold fit needs at least 2 distances".into()));
    }
    let curve = |d: usize| table.iter().filter(|e| e.d == d).collect::<Vec<_>>();
    let mut crossings = Vec::new();
    for (i, &d_small) in distances.iter().enumerate() {
        for &d_large in &distances[i + 1..] {
            match pair_crossing(&curve(d_small), &curve(d_large)) {
                Some(p) => crossings.push(PairCrossing { d_small, d_large, p }),
                None => log::warn!("no crossing between d={d_small} and d={d_large}"),
            }
        }
    }
    if crossings.is_empty() {
        return Err(Error::NoCrossing);
    }
    let p_th = crossings.iter().map(|c| c.p).sum::<f64>() / crossings.len() as f64;
    let lo = crossings.iter().map(|c| c.p).fold(f64::INFINITY, f64::min);
    let hi = crossings.iter().map(|c| c.p).fold(f64::NEG_INFINITY, f64::max);
    Ok(ThresholdEstimate {
        p_th,
        uncertainty: (hi - lo) / 2.0,
        crossings,
    })
}
