//! Seeded outcome models for the two-wing experiment.
//!
//! All three models share one flash process (see [`process`]) and differ only
//! in how channels are assigned:
//!
//! * [`ModelId::Rgrwf`] assigns channels in the temporal order of the frame
//!   the run is evaluated in, conditioning each flash on everything earlier in
//!   that frame. Who influences whom therefore depends on the frame.
//! * [`ModelId::PreferredFrame`] always assigns channels in lab-frame order,
//!   whatever frame the run is reported in.
//! * [`ModelId::LocalHv`] reads channels off a shared hidden variable and the
//!   local setting only.

pub mod draws;
pub mod local_hv;
pub(crate) mod process;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use self::draws::{Draw, SeededUniforms};
use self::process::{simulate, ChannelLaw};
use crate::minkowski::{regions_spacelike, Event, Frame, Region};
use crate::quantum::{Channel, Outcome, PureState, QuantumError, SettingPair, Side};
use crate::seed;

/// Largest mean flash count per region accepted by [`ModelParams`].
pub const MAX_MEAN_FLASHES: f64 = 500.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(&'static str),
    #[error("inconclusive run: a region has no flash ({} flashes in total)", flashes.len())]
    Inconclusive { flashes: Vec<Flash> },
    #[error("random bits exhausted at draw: {draw}")]
    BitsExhausted { draw: Draw },
    #[error("bit string has {got} bits, realization needs exactly {expected}")]
    BitLength { expected: usize, got: usize },
    #[error("all {0} runs were inconclusive")]
    AllInconclusive(u64),
    #[error("at least one run is required")]
    NoRuns,
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// A flash: a space-time point at which matter is located, tagged with its
/// region and the channel it fell into.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Flash {
    pub event: Event,
    pub region: Side,
    pub channel: Channel,
    /// Ordinal within its region in channel-assignment order; index 0 fixes
    /// the region's outcome.
    pub index: u32,
}

/// The law under which a region's outcome-fixing flash drew its channel.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ChannelDraw {
    /// Probability of `+1` at the moment of the draw.
    pub p_plus: f64,
    /// The other region's channel when it was already fixed at the moment of
    /// the draw, i.e. what the draw was conditioned on.
    pub conditioned_on: Option<Channel>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExperimentRun {
    pub settings: SettingPair,
    pub frame: Frame,
    /// Per-run seed; `None` for runs driven by a pre-given bit string.
    pub seed: Option<u64>,
    /// Flashes in the order of `frame`.
    pub flashes: Vec<Flash>,
    pub outcome: Outcome,
    /// State after each collapse, in channel-assignment order.
    pub state_trace: Vec<PureState>,
    /// Indexed by [`Side::index`].
    pub first_draws: [ChannelDraw; 2],
    /// Cross-region simultaneity ties broken by the A-before-B rule.
    pub ties: u32,
}

impl ExperimentRun {
    /// The outcome-fixing flash of `side`.
    pub fn first_flash(&self, side: Side) -> Option<&Flash> {
        self.flashes
            .iter()
            .find(|f| f.region == side && f.index == 0)
    }

    /// Side whose outcome-fixing flash comes first in `frame` (ties: A).
    pub fn leading_side(&self, frame: &Frame) -> Side {
        match (self.first_flash(Side::A), self.first_flash(Side::B)) {
            (Some(a), Some(b)) => {
                if frame.time_of(b.event) < frame.time_of(a.event) - crate::minkowski::TIE_TOLERANCE
                {
                    Side::B
                } else {
                    Side::A
                }
            }
            (None, Some(_)) => Side::B,
            _ => Side::A,
        }
    }

    pub fn draw(&self, side: Side) -> &ChannelDraw {
        &self.first_draws[side.index()]
    }
}

/// Validated parameters of the flash process.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ModelParams {
    flash_rate: f64,
    epsilon: f64,
    regions: [Region; 2],
    state: PureState,
}

impl ModelParams {
    pub fn new(
        flash_rate: f64,
        epsilon: f64,
        regions: (Region, Region),
        state: PureState,
    ) -> Result<Self, ModelError> {
        if !(flash_rate.is_finite() && flash_rate > 0.0) {
            return Err(ModelError::InvalidParams("flash rate must be positive"));
        }
        if !(0.0..=0.1).contains(&epsilon) {
            return Err(ModelError::InvalidParams("epsilon must lie in [0, 0.1]"));
        }
        let (a, b) = regions;
        if a.label() != Side::A || b.label() != Side::B {
            return Err(ModelError::InvalidParams(
                "regions must be labelled A then B",
            ));
        }
        if !regions_spacelike(&a, &b) {
            return Err(ModelError::InvalidParams(
                "regions are not spacelike separated",
            ));
        }
        if flash_rate * a.duration().max(b.duration()) > MAX_MEAN_FLASHES {
            return Err(ModelError::InvalidParams(
                "mean flash count per region exceeds 500",
            ));
        }
        Ok(ModelParams {
            flash_rate,
            epsilon,
            regions: [a, b],
            state,
        })
    }

    /// `A = [0,1]×[-11,-10]`, `B = [0,1]×[10,11]`.
    pub fn default_regions() -> (Region, Region) {
        (
            Region::new(Side::A, (0.0, 1.0), (-11.0, -10.0)).expect("valid box"),
            Region::new(Side::B, (0.0, 1.0), (10.0, 11.0)).expect("valid box"),
        )
    }

    pub fn flash_rate(&self) -> f64 {
        self.flash_rate
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn region(&self, side: Side) -> &Region {
        &self.regions[side.index()]
    }

    pub fn regions(&self) -> (&Region, &Region) {
        (&self.regions[0], &self.regions[1])
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub fn with_state(mut self, state: PureState) -> Self {
        self.state = state;
        self
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self, ModelError> {
        let (a, b) = (self.regions[0], self.regions[1]);
        ModelParams::new(self.flash_rate, epsilon, (a, b), self.state)
    }

    pub fn with_flash_rate(self, rate: f64) -> Result<Self, ModelError> {
        let (a, b) = (self.regions[0], self.regions[1]);
        ModelParams::new(rate, self.epsilon, (a, b), self.state)
    }

    pub fn with_regions(self, regions: (Region, Region)) -> Result<Self, ModelError> {
        ModelParams::new(self.flash_rate, self.epsilon, regions, self.state)
    }
}

impl Default for ModelParams {
    /// Singlet, rate 5 per unit lab time, exact collapse, default regions.
    fn default() -> Self {
        ModelParams::new(
            5.0,
            0.0,
            ModelParams::default_regions(),
            PureState::singlet(),
        )
        .expect("default parameters are valid")
    }
}

/// Anything that produces one seeded experiment run.
pub trait OutcomeModel {
    fn name(&self) -> &str;

    fn run(
        &self,
        settings: SettingPair,
        frame: Frame,
        seed: u64,
        params: &ModelParams,
    ) -> Result<ExperimentRun, ModelError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ModelId {
    Rgrwf,
    PreferredFrame,
    LocalHv,
}

impl ModelId {
    pub const ALL: [ModelId; 3] = [ModelId::Rgrwf, ModelId::PreferredFrame, ModelId::LocalHv];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::Rgrwf => "rgrwf",
            ModelId::PreferredFrame => "preferred_frame",
            ModelId::LocalHv => "local_hv",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown model (expected rgrwf, preferred_frame or local_hv)")]
pub struct UnknownModel;

impl FromStr for ModelId {
    type Err = UnknownModel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or(UnknownModel)
    }
}

impl OutcomeModel for ModelId {
    fn name(&self) -> &str {
        self.as_str()
    }

    fn run(
        &self,
        settings: SettingPair,
        frame: Frame,
        seed: u64,
        params: &ModelParams,
    ) -> Result<ExperimentRun, ModelError> {
        match self {
            ModelId::Rgrwf => run_rgrwf(settings, frame, seed, params),
            ModelId::PreferredFrame => run_preferred_frame(settings, frame, seed, params),
            ModelId::LocalHv => run_local_hv(settings, frame, seed, params),
        }
    }
}

/// Flash process with channels assigned in `frame`'s temporal order.
///
/// The first flash of the run draws from the current state's marginal;
/// every later flash draws from the state as collapsed by all earlier ones,
/// so after a flash in the same region it repeats that channel and in the
/// other region it follows the quantum conditional.
pub fn run_rgrwf(
    settings: SettingPair,
    frame: Frame,
    seed: u64,
    params: &ModelParams,
) -> Result<ExperimentRun, ModelError> {
    let mut u = SeededUniforms::new(seed);
    simulate(
        ChannelLaw::Quantum { processing: frame },
        settings,
        frame,
        params,
        Some(seed),
        &mut u,
    )
}

/// Same flashes as [`run_rgrwf`], but channels are always assigned in the lab
/// frame's order. `frame` only affects the reporting order.
pub fn run_preferred_frame(
    settings: SettingPair,
    frame: Frame,
    seed: u64,
    params: &ModelParams,
) -> Result<ExperimentRun, ModelError> {
    let mut u = SeededUniforms::new(seed);
    simulate(
        ChannelLaw::Quantum {
            processing: Frame::lab(),
        },
        settings,
        frame,
        params,
        Some(seed),
        &mut u,
    )
}

/// Same flashes as [`run_rgrwf`], channels from the built-in local strategy.
pub fn run_local_hv(
    settings: SettingPair,
    frame: Frame,
    seed: u64,
    params: &ModelParams,
) -> Result<ExperimentRun, ModelError> {
    let mut u = SeededUniforms::new(seed);
    simulate(
        ChannelLaw::Local,
        settings,
        frame,
        params,
        Some(seed),
        &mut u,
    )
}

/// Joint outcome counts over conclusive runs, ordered as [`Outcome::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OutcomeCounts {
    pub counts: [u64; 4],
    pub inconclusive: u64,
    /// Conclusive runs whose first flash (in the run's frame) was in region A.
    pub first_in_a: u64,
}

impl OutcomeCounts {
    pub fn conclusive(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.conclusive() + self.inconclusive
    }

    pub fn frequencies(&self) -> [f64; 4] {
        let n = self.conclusive() as f64;
        self.counts.map(|c| c as f64 / n)
    }

    /// Records one run result. Errors other than inconclusiveness are passed
    /// back to the caller.
    pub fn record(&mut self, run: Result<ExperimentRun, ModelError>) -> Result<(), ModelError> {
        match run {
            Ok(r) => {
                self.counts[r.outcome.index()] += 1;
                if r.flashes.first().map(|f| f.region) == Some(Side::A) {
                    self.first_in_a += 1;
                }
                Ok(())
            }
            Err(ModelError::Inconclusive { .. }) => {
                self.inconclusive += 1;
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    /// Order-independent merge of two partial tallies.
    pub fn merge(mut self, other: OutcomeCounts) -> OutcomeCounts {
        for i in 0..4 {
            self.counts[i] += other.counts[i];
        }
        self.inconclusive += other.inconclusive;
        self.first_in_a += other.first_in_a;
        self
    }
}

/// Runs `model` `n` times with seeds `seed::mix(master_seed, i)` and tallies
/// the joint outcomes.
pub fn outcome_distribution<M: OutcomeModel + ?Sized>(
    model: &M,
    settings: SettingPair,
    frame: Frame,
    params: &ModelParams,
    n: u64,
    master_seed: u64,
) -> Result<OutcomeCounts, ModelError> {
    if n == 0 {
        return Err(ModelError::NoRuns);
    }
    let mut counts = OutcomeCounts::default();
    for i in 0..n {
        counts.record(model.run(settings, frame, seed::mix(master_seed, i), params))?;
    }
    if counts.conclusive() == 0 {
        return Err(ModelError::AllInconclusive(n));
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_3;

    fn lab() -> Frame {
        Frame::lab()
    }

    #[test]
    fn equal_settings_anticorrelate_in_every_model_and_frame() {
        let params = ModelParams::default();
        for model in ModelId::ALL {
            for chi in [-1.0, 0.0, 0.7] {
                let frame = Frame::new(chi).unwrap();
                for seed in 0..300 {
                    if let Ok(run) = model.run(SettingPair::new(0.0, 0.0), frame, seed, &params) {
                        assert_eq!(
                            run.outcome.alpha,
                            run.outcome.beta.flipped(),
                            "{model} seed {seed}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let params = ModelParams::default();
        for model in ModelId::ALL {
            let s = SettingPair::new(0.3, 2.0);
            let f = Frame::new(0.4).unwrap();
            assert_eq!(model.run(s, f, 99, &params), model.run(s, f, 99, &params));
        }
    }

    #[test]
    fn flashes_lie_in_their_regions_and_are_frame_ordered() {
        let params = ModelParams::default();
        let frame = Frame::new(-0.3).unwrap();
        for seed in 0..200 {
            let Ok(run) = run_preferred_frame(SettingPair::new(1.0, 2.0), frame, seed, &params)
            else {
                continue;
            };
            for f in &run.flashes {
                assert!(params.region(f.region).contains(f.event));
            }
            for w in run.flashes.windows(2) {
                assert!(frame.time_of(w[0].event) <= frame.time_of(w[1].event) + 1e-12);
            }
        }
    }

    #[test]
    fn later_flashes_repeat_the_first_channel() {
        let params = ModelParams::default();
        for seed in 0..500 {
            let Ok(run) = run_rgrwf(SettingPair::new(0.0, FRAC_PI_3), lab(), seed, &params) else {
                continue;
            };
            for f in &run.flashes {
                assert_eq!(f.channel, run.outcome.channel(f.region));
            }
            assert_eq!(run.state_trace.len(), run.flashes.len());
        }
    }

    #[test]
    fn softened_collapse_can_switch_later_channels() {
        let params = ModelParams::default()
            .with_epsilon(0.1)
            .unwrap()
            .with_flash_rate(40.0)
            .unwrap();
        let switched = (0..400)
            .filter_map(|seed| run_rgrwf(SettingPair::new(0.0, 1.0), lab(), seed, &params).ok())
            .any(|run| {
                run.flashes
                    .iter()
                    .any(|f| f.channel != run.outcome.channel(f.region))
            });
        assert!(switched);
    }

    #[test]
    fn rgrwf_draws_first_flash_unconditioned() {
        let params = ModelParams::default();
        for chi in [-1.0, 0.0, 1.0] {
            let frame = Frame::new(chi).unwrap();
            for seed in 0..300 {
                let Ok(run) = run_rgrwf(SettingPair::new(0.0, 1.0), frame, seed, &params) else {
                    continue;
                };
                let lead = run.flashes[0].region;
                assert_eq!(run.draw(lead).conditioned_on, None);
                assert!((run.draw(lead).p_plus - 0.5).abs() < 1e-12);
                assert_eq!(
                    run.draw(lead.other()).conditioned_on,
                    Some(run.outcome.channel(lead))
                );
            }
        }
    }

    #[test]
    fn preferred_frame_keeps_lab_processing_order() {
        // A strictly earlier than B in the lab, B earlier in the boosted frame.
        let regions = (
            Region::new(Side::A, (0.0, 1.0), (-11.0, -10.0)).unwrap(),
            Region::new(Side::B, (2.0, 3.0), (10.0, 11.0)).unwrap(),
        );
        let params = ModelParams::default().with_regions(regions).unwrap();
        let frame = Frame::new(1.0).unwrap();
        for seed in 0..300 {
            let Ok(run) = run_preferred_frame(SettingPair::new(0.0, 1.0), frame, seed, &params)
            else {
                continue;
            };
            assert_eq!(run.flashes[0].region, Side::B);
            assert_eq!(run.draw(Side::A).conditioned_on, None);
            assert_eq!(run.draw(Side::B).conditioned_on, Some(run.outcome.alpha));
        }
    }

    #[test]
    fn local_hv_alpha_ignores_b() {
        let params = ModelParams::default();
        for seed in 0..300 {
            let r1 = run_local_hv(SettingPair::new(0.4, 0.0), lab(), seed, &params);
            let r2 = run_local_hv(SettingPair::new(0.4, 2.5), lab(), seed, &params);
            if let (Ok(r1), Ok(r2)) = (r1, r2) {
                assert_eq!(r1.outcome.alpha, r2.outcome.alpha);
                assert_eq!(run_local_hv_marker(&r1), None);
            }
        }
    }

    fn run_local_hv_marker(run: &ExperimentRun) -> Option<Channel> {
        run.draw(Side::A)
            .conditioned_on
            .or(run.draw(Side::B).conditioned_on)
    }

    #[test]
    fn empty_region_is_inconclusive_with_partial_flashes() {
        let params = ModelParams::default().with_flash_rate(0.05).unwrap();
        let mut partial_seen = false;
        for seed in 0..200 {
            match run_rgrwf(SettingPair::new(0.0, 0.0), lab(), seed, &params) {
                Err(ModelError::Inconclusive { flashes }) => {
                    partial_seen |= !flashes.is_empty();
                }
                Err(e) => panic!("unexpected error {e}"),
                Ok(_) => {}
            }
        }
        assert!(partial_seen);
    }

    #[test]
    fn params_validation() {
        let (a, b) = ModelParams::default_regions();
        let s = PureState::singlet();
        assert!(ModelParams::new(0.0, 0.0, (a, b), s).is_err());
        assert!(ModelParams::new(5.0, 0.2, (a, b), s).is_err());
        assert!(ModelParams::new(5.0, 0.0, (b, a), s).is_err());
        let near = Region::new(Side::B, (0.0, 1.0), (-9.5, -9.0)).unwrap();
        assert!(ModelParams::new(5.0, 0.0, (a, near), s).is_err());
        assert!(ModelParams::new(600.0, 0.0, (a, b), s).is_err());
    }

    #[test]
    fn outcome_distribution_is_reproducible_and_normalized() {
        let params = ModelParams::default();
        let s = SettingPair::new(0.0, FRAC_PI_3);
        let c1 = outcome_distribution(&ModelId::Rgrwf, s, lab(), &params, 2000, 5).unwrap();
        let c2 = outcome_distribution(&ModelId::Rgrwf, s, lab(), &params, 2000, 5).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(c1.total(), 2000);
        assert!((c1.frequencies().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(matches!(
            outcome_distribution(&ModelId::Rgrwf, s, lab(), &params, 0, 5),
            Err(ModelError::NoRuns)
        ));
        let starved = params.with_flash_rate(1e-9).unwrap();
        assert!(matches!(
            outcome_distribution(&ModelId::Rgrwf, s, lab(), &starved, 10, 5),
            Err(ModelError::AllInconclusive(10))
        ));
    }

    #[test]
    fn model_names_round_trip() {
        for m in ModelId::ALL {
            assert_eq!(m.as_str().parse::<ModelId>(), Ok(m));
        }
        assert!("bohm".parse::<ModelId>().is_err());
    }
}
