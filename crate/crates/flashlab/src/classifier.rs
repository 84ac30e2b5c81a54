//! Statistical classification of outcome models by five properties:
//! agreement with the quantum formalism, no-signalling, locality, effective
//! locality and effective causality.
//!
//! Outcome statistics of a frame-dependent model and of a preferred-frame
//! model coincide in every frame, so the two "effective" properties cannot be
//! told apart from outcomes alone. They are tested on a region's outcome
//! *jointly with the draw context* of its outcome-fixing flash: whether the
//! distant outcome had already been fixed when that flash drew its channel,
//! and if so which channel it was. A region influenced by the distant setting
//! shows it in the conditioned strata even though its marginal does not.
//!
//! Every p-value test rejects at significance 10⁻³, Bonferroni-corrected over
//! the comparisons it makes. `statistic` is the smallest raw p-value (or the
//! relevant extreme p-value, see each test), `threshold` the corrected level
//! and `p_bound = min(1, m · statistic)` the corrected p-value.

use std::fmt;

use flashlab_core::minkowski::{order_flip_rapidity, region_order};
use flashlab_core::models::{ChannelDraw, ModelError};
use flashlab_core::quantum::{born_joint, chsh_combination};
use flashlab_core::{seed, Channel, Frame, ModelParams, OutcomeModel, Setting, SettingPair, Side};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::sampling::{outcome_counts, RunSummary, SampleSet};
use crate::stats::{goodness_of_fit, homogeneity, normal_sf};

pub const SIGNIFICANCE: f64 = 1e-3;
/// Width of the CHSH decision bands in standard errors.
pub const SIGMA_BAND: f64 = 5.0;
/// Above this fraction of inconclusive runs a test cannot decide.
pub const MAX_INCONCLUSIVE: f64 = 0.05;
/// Comparisons with fewer conclusive runs in a row are skipped.
const MIN_ROW: u64 = 20;
pub const DEFAULT_N: u64 = 100_000;

pub const QF_AGREEMENT: &str = "qf_agreement";
pub const NO_SIGNALLING: &str = "no_signalling";
pub const LOCALITY: &str = "locality";
pub const EFFECTIVE_LOCALITY: &str = "effective_locality";
pub const EFFECTIVE_CAUSALITY: &str = "effective_causality";
pub const TEST_NAMES: [&str; 5] = [
    QF_AGREEMENT,
    NO_SIGNALLING,
    LOCALITY,
    EFFECTIVE_LOCALITY,
    EFFECTIVE_CAUSALITY,
];

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("settings grid is empty")]
    EmptyGrid,
    #[error("probe frames must order the regions both ways: {0}")]
    ProbeFrames(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn symbol(self) -> &'static str {
        match self {
            Verdict::Pass => "✓",
            Verdict::Fail => "✗",
            Verdict::Inconclusive => "?",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub p_bound: f64,
    pub verdict: Verdict,
}

impl TestResult {
    /// Bonferroni decision over `p_values`; pass iff the smallest one is at
    /// least `SIGNIFICANCE / m`.
    fn from_p_values(name: &str, p_values: &[f64], too_many_inconclusive: bool) -> Self {
        let m = p_values.len().max(1) as f64;
        let p_min = p_values.iter().copied().fold(1.0, f64::min);
        Self::bonferroni(name, p_min, m, too_many_inconclusive)
    }

    fn bonferroni(name: &str, statistic: f64, m: f64, too_many_inconclusive: bool) -> Self {
        let threshold = SIGNIFICANCE / m;
        let verdict = if too_many_inconclusive {
            Verdict::Inconclusive
        } else if statistic >= threshold {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        TestResult {
            name: name.to_owned(),
            statistic,
            threshold,
            p_bound: (m * statistic).min(1.0),
            verdict,
        }
    }
}

/// Settings used by the no-signalling and effective-property tests: a base
/// pair and two pairs that change one side's setting each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSettings {
    pub base: SettingPair,
    pub a_alt: SettingPair,
    pub b_alt: SettingPair,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        use std::f64::consts::FRAC_PI_2;
        ProbeSettings {
            base: SettingPair::new(0.0, 0.0),
            a_alt: SettingPair::new(FRAC_PI_2, 0.0),
            b_alt: SettingPair::new(0.0, FRAC_PI_2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    /// Runs per settings pair and frame.
    pub n: u64,
    pub master_seed: u64,
    pub frames_probe: Vec<Frame>,
    pub grid: Vec<SettingPair>,
    /// `[a, a', b, b']`
    pub chsh_angles: [Setting; 4],
    pub probe: ProbeSettings,
}

impl ClassifierConfig {
    /// Defaults for the given regions: `n = 10⁵`, probe frames at rapidities
    /// `-1, -0.5, 0, 0.5, 1` plus the order-flip frame of the region centers,
    /// and the 4×4 grid over `{0, π/4, π/2, 3π/4}`.
    pub fn for_params(params: &ModelParams) -> Self {
        ClassifierConfig {
            n: DEFAULT_N,
            master_seed: 0,
            frames_probe: default_frames_probe(params),
            grid: default_grid(),
            chsh_angles: default_chsh_angles(),
            probe: ProbeSettings::default(),
        }
    }
}

pub fn default_chsh_angles() -> [Setting; 4] {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
    [0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4].map(Setting::new)
}

pub fn default_grid() -> Vec<SettingPair> {
    use std::f64::consts::FRAC_PI_4;
    let angles = [0.0, FRAC_PI_4, 2.0 * FRAC_PI_4, 3.0 * FRAC_PI_4];
    angles
        .iter()
        .flat_map(|&a| angles.iter().map(move |&b| SettingPair::new(a, b)))
        .collect()
}

pub fn default_frames_probe(params: &ModelParams) -> Vec<Frame> {
    let mut frames: Vec<Frame> = [-1.0, -0.5, 0.0, 0.5, 1.0]
        .into_iter()
        .map(|r| Frame::new(r).expect("in range"))
        .collect();
    let (a, b) = params.regions();
    if let Ok(flip) = order_flip_rapidity(a.center(), b.center()) {
        if frames
            .iter()
            .all(|f| (f.rapidity() - flip.rapidity()).abs() > 1e-12)
        {
            frames.push(flip);
        }
    }
    frames
}

pub fn test_qf<M: OutcomeModel + Sync + ?Sized>(
    model: &M,
    params: &ModelParams,
    grid: &[SettingPair],
    n: u64,
    master_seed: u64,
) -> Result<TestResult, ClassifierError> {
    if grid.is_empty() {
        return Err(ClassifierError::EmptyGrid);
    }
    let mut p_values = Vec::with_capacity(grid.len());
    let (mut bad, mut total) = (0, 0);
    for (i, &cell) in grid.iter().enumerate() {
        let c = outcome_counts(
            model,
            params,
            cell,
            Frame::lab(),
            n,
            seed::mix(master_seed, i as u64),
        )?;
        bad += c.inconclusive;
        total += c.total();
        p_values
            .push(goodness_of_fit(&c.counts, &born_joint(params.state(), cell).as_array()).p_value);
    }
    Ok(TestResult::from_p_values(
        QF_AGREEMENT,
        &p_values,
        too_many(bad, total),
    ))
}

/// Marginal counts `[+1, -1]` of `side`.
fn marginal(c: &flashlab_core::models::OutcomeCounts, side: Side) -> Vec<u64> {
    let [pp, pm, mp, mm] = c.counts;
    match side {
        Side::A => vec![pp + pm, mp + mm],
        Side::B => vec![pp + mp, pm + mm],
    }
}

pub fn test_no_signalling<M: OutcomeModel + Sync + ?Sized>(
    model: &M,
    params: &ModelParams,
    probe: &ProbeSettings,
    n: u64,
    master_seed: u64,
) -> Result<TestResult, ClassifierError> {
    let run = |s: SettingPair, k: u64| {
        outcome_counts(model, params, s, Frame::lab(), n, seed::mix(master_seed, k))
    };
    let (base, a_alt, b_alt) = (
        run(probe.base, 0)?,
        run(probe.a_alt, 1)?,
        run(probe.b_alt, 2)?,
    );
    let p_values = [
        homogeneity(&[marginal(&base, Side::A), marginal(&b_alt, Side::A)]).p_value,
        homogeneity(&[marginal(&base, Side::B), marginal(&a_alt, Side::B)]).p_value,
    ];
    let bad = base.inconclusive + a_alt.inconclusive + b_alt.inconclusive;
    let total = base.total() + a_alt.total() + b_alt.total();
    Ok(TestResult::from_p_values(
        NO_SIGNALLING,
        &p_values,
        too_many(bad, total),
    ))
}

/// CHSH estimate `Ŝ` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshEstimate {
    pub value: f64,
    pub std_error: f64,
    pub inconclusive_fraction: f64,
}

pub fn estimate_chsh<M: OutcomeModel + Sync + ?Sized>(
    model: &M,
    params: &ModelParams,
    angles: [Setting; 4],
    n: u64,
    master_seed: u64,
) -> Result<ChshEstimate, ClassifierError> {
    let [a, a2, b, b2] = angles;
    let pairs = [(a, b), (a, b2), (a2, b), (a2, b2)];
    let mut e = [0.0; 4];
    let mut var = 0.0;
    let (mut bad, mut total) = (0, 0);
    for (i, &(x, y)) in pairs.iter().enumerate() {
        let c = outcome_counts(
            model,
            params,
            SettingPair { a: x, b: y },
            Frame::lab(),
            n,
            seed::mix(master_seed, i as u64),
        )?;
        let m = c.conclusive() as f64;
        e[i] = (c.counts[0] + c.counts[3]) as f64 / m - (c.counts[1] + c.counts[2]) as f64 / m;
        var += (1.0 - e[i] * e[i]) / m;
        bad += c.inconclusive;
        total += c.total();
    }
    Ok(ChshEstimate {
        value: chsh_combination(e),
        std_error: var.sqrt(),
        inconclusive_fraction: bad as f64 / total as f64,
    })
}

/// Bell test. `statistic = |Ŝ|`, `threshold = 2`; fails (nonlocal) above
/// `2 + 5σ̂`, passes below `2 - 5σ̂`. `p_bound` is the normal tail of the
/// distance to 2 in standard errors.
pub fn test_locality<M: OutcomeModel + Sync + ?Sized>(
    model: &M,
    params: &ModelParams,
    angles: [Setting; 4],
    n: u64,
    master_seed: u64,
) -> Result<TestResult, ClassifierError> {
    let est = estimate_chsh(model, params, angles, n, master_seed)?;
    let s = est.value.abs();
    let sigma = est.std_error;
    let verdict = if est.inconclusive_fraction > MAX_INCONCLUSIVE {
        Verdict::Inconclusive
    } else if s > 2.0 + SIGMA_BAND * sigma {
        Verdict::Fail
    } else if s < 2.0 - SIGMA_BAND * sigma {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    let z = if sigma > 0.0 {
        (s - 2.0).abs() / sigma
    } else {
        f64::INFINITY
    };
    Ok(TestResult {
        name: LOCALITY.to_owned(),
        statistic: s,
        threshold: 2.0,
        p_bound: normal_sf(z),
        verdict,
    })
}

/// Category of a region's outcome jointly with its draw context.
fn category(run: &RunSummary, side: Side) -> usize {
    let ChannelDraw { conditioned_on, .. } = run.draws[side.index()];
    let stratum = match conditioned_on {
        None => 0,
        Some(Channel::Plus) => 1,
        Some(Channel::Minus) => 2,
    };
    3 * run.outcome.channel(side).index() + stratum
}

/// Categories of `side` over the runs selected by `keep`.
fn table_row(set: &SampleSet, side: Side, keep: impl Fn(&RunSummary) -> bool) -> Vec<u64> {
    let mut row = vec![0u64; 6];
    for r in set.conclusive().filter(|r| keep(r)) {
        row[category(r, side)] += 1;
    }
    row
}

/// Homogeneity p-value, or `None` when a row is too thin to compare.
fn compare(r0: Vec<u64>, r1: Vec<u64>) -> Option<f64> {
    if r0.iter().sum::<u64>() < MIN_ROW || r1.iter().sum::<u64>() < MIN_ROW {
        return None;
    }
    Some(homogeneity(&[r0, r1]).p_value)
}

struct FrameSamples {
    frame: Frame,
    base: SampleSet,
    a_alt: SampleSet,
    b_alt: SampleSet,
}

impl FrameSamples {
    fn inconclusive(&self) -> (u64, u64) {
        let sets = [&self.base, &self.a_alt, &self.b_alt];
        let bad = sets
            .iter()
            .map(|s| s.records.iter().filter(|r| r.result.is_none()).count() as u64)
            .sum();
        (bad, sets.iter().map(|s| s.n()).sum())
    }
}

fn probe_samples<M: OutcomeModel + Sync + ?Sized>(
    model: &M,
    params: &ModelParams,
    frames: &[Frame],
    probe: &ProbeSettings,
    n: u64,
    master_seed: u64,
) -> Result<Vec<FrameSamples>, ClassifierError> {
    let (ra, rb) = params.regions();
    let orders: Vec<Option<Side>> = frames.iter().map(|f| region_order(ra, rb, f)).collect();
    if !orders.contains(&Some(Side::A)) {
        return Err(ClassifierError::ProbeFrames("no frame puts region A first"));
    }
    if !orders.contains(&Some(Side::B)) {
        return Err(ClassifierError::ProbeFrames("no frame puts region B first"));
    }
    frames
        .iter()
        .enumerate()
        .map(|(i, &frame)| {
            let s = |pair: SettingPair, k: u64| {
                SampleSet::collect(
                    model,
                    params,
                    pair,
                    frame,
                    n,
                    seed::derive(master_seed, &[i as u64, k]),
                )
            };
            Ok(FrameSamples {
                frame,
                base: s(probe.base, 0)?,
                a_alt: s(probe.a_alt, 1)?,
                b_alt: s(probe.b_alt, 2)?,
            })
        })
        .collect()
}

/// In every probe frame, the region whose outcome is fixed first in that
/// frame must not depend on the other side's setting. Leading side is taken
/// per run; a run led by A compares base against `b_alt`, a run led by B
/// compares base against `a_alt`.
pub fn test_effective_causality<M: OutcomeModel + Sync + ?Sized>(
    model: &M,
    params: &ModelParams,
    frames_probe: &[Frame],
    probe: &ProbeSettings,
    n: u64,
    master_seed: u64,
) -> Result<TestResult, ClassifierError> {
    let samples = probe_samples(model, params, frames_probe, probe, n, master_seed)?;
    let mut p_values = Vec::new();
    let (mut bad, mut total) = (0, 0);
    for fs in &samples {
        let (b, t) = fs.inconclusive();
        bad += b;
        total += t;
        for (lead, alt) in [(Side::A, &fs.b_alt), (Side::B, &fs.a_alt)] {
            let leads = |r: &RunSummary| r.leading == lead;
            if let Some(p) = compare(
                table_row(&fs.base, lead, leads),
                table_row(alt, lead, leads),
            ) {
                p_values.push(p);
            }
        }
    }
    Ok(TestResult::from_p_values(
        EFFECTIVE_CAUSALITY,
        &p_values,
        too_many(bad, total),
    ))
}

/// No effective transmission: for each direction there must be a probe
/// frame, among those that strictly order the regions, in which the
/// receiving region comes first and does not depend on the sender's setting.
/// `statistic` is the smaller over the two directions of the best p-value of
/// that direction.
pub fn test_effective_locality<M: OutcomeModel + Sync + ?Sized>(
    model: &M,
    params: &ModelParams,
    frames_probe: &[Frame],
    probe: &ProbeSettings,
    n: u64,
    master_seed: u64,
) -> Result<TestResult, ClassifierError> {
    let samples = probe_samples(model, params, frames_probe, probe, n, master_seed)?;
    let (ra, rb) = params.regions();
    let mut best = [0.0f64; 2];
    let mut m = 0usize;
    let (mut bad, mut total) = (0, 0);
    for fs in &samples {
        let Some(first) = region_order(ra, rb, &fs.frame) else {
            continue;
        };
        let (b, t) = fs.inconclusive();
        bad += b;
        total += t;
        let alt = match first {
            Side::A => &fs.b_alt,
            Side::B => &fs.a_alt,
        };
        if let Some(p) = compare(
            table_row(&fs.base, first, |_| true),
            table_row(alt, first, |_| true),
        ) {
            m += 1;
            best[first.index()] = best[first.index()].max(p);
        }
    }
    let statistic = best[0].min(best[1]);
    Ok(TestResult::bonferroni(
        EFFECTIVE_LOCALITY,
        statistic,
        m.max(1) as f64,
        too_many(bad, total),
    ))
}

fn too_many(inconclusive: u64, total: u64) -> bool {
    total == 0 || inconclusive as f64 / total as f64 > MAX_INCONCLUSIVE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub model: String,
    pub params_digest: String,
    pub tests: Vec<TestResult>,
    /// Derived seed of each entry of `tests`, in the same order.
    pub seeds: Vec<u64>,
    /// Runs per settings pair and frame.
    pub n: u64,
    pub master_seed: u64,
}

impl ClassificationReport {
    pub fn verdict(&self, name: &str) -> Option<Verdict> {
        self.tests
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.verdict)
    }

    /// `qf ✓ | nosig ✓ | local ✗ | eff-local ✓ | eff-causal ✓`
    pub fn row(&self) -> String {
        let labels = ["qf", "nosig", "local", "eff-local", "eff-causal"];
        labels
            .iter()
            .zip(TEST_NAMES)
            .map(|(label, name)| {
                let v = self.verdict(name).map_or("-", Verdict::symbol);
                format!("{label} {v}")
            })
            .collect::<Vec<_>>()
            .join(" | ")
    }

    pub fn verdicts(&self) -> [Option<Verdict>; 5] {
        TEST_NAMES.map(|n| self.verdict(n))
    }
}

/// Hex SHA-256 of the canonical JSON encoding of `params`.
pub fn params_digest(params: &ModelParams) -> String {
    let json = serde_json::to_vec(params).expect("parameters serialize");
    hex::encode(Sha256::digest(&json))
}

/// Runs the five tests, each with its own seed `seed::derive(master, [i])`.
pub fn classify<M: OutcomeModel + Sync + ?Sized>(
    model: &M,
    params: &ModelParams,
    config: &ClassifierConfig,
) -> Result<ClassificationReport, ClassifierError> {
    let seeds: Vec<u64> = (0..5)
        .map(|i| seed::derive(config.master_seed, &[i]))
        .collect();
    let n = config.n;
    let tests = vec![
        test_qf(model, params, &config.grid, n, seeds[0])?,
        test_no_signalling(model, params, &config.probe, n, seeds[1])?,
        test_locality(model, params, config.chsh_angles, n, seeds[2])?,
        test_effective_locality(
            model,
            params,
            &config.frames_probe,
            &config.probe,
            n,
            seeds[3],
        )?,
        test_effective_causality(
            model,
            params,
            &config.frames_probe,
            &config.probe,
            n,
            seeds[4],
        )?,
    ];
    Ok(ClassificationReport {
        model: model.name().to_owned(),
        params_digest: params_digest(params),
        tests,
        seeds,
        n,
        master_seed: config.master_seed,
    })
}
