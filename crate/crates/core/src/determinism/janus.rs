//! Frame-native deterministic realizations.
//!
//! A [`JanusRealization`] fixes one frame, the *native* frame, and turns a
//! pre-given bit string plus the settings into a run by processing flashes in
//! native temporal order. Fed with uniformly random bits it reproduces the
//! quantum statistics exactly. In any frame whose temporal order disagrees
//! with the native one, a region that is later natively but earlier in that
//! frame can have its outcome changed by the (frame-)later setting: an
//! influence on the past, exhibited by [`find_influence_witness`].

use super::DeterminismError;
use crate::minkowski::{region_order, Frame};
use crate::models::draws::{poisson_quantile, BitString, BITS_PER_DRAW};
use crate::models::process::{simulate, ChannelLaw};
use crate::models::{ExperimentRun, ModelError, ModelParams};
use crate::quantum::{Channel, Setting, SettingPair, Side};
use crate::seed;

/// Poisson tail left uncovered by the default bit budget.
pub const BUDGET_TAIL: f64 = 1e-12;

/// A deterministic map `(settings, bits) ↦ run`.
pub trait DeterministicRealization {
    fn params(&self) -> &ModelParams;

    /// Exact length of the bit strings accepted by [`Self::realize`].
    fn bit_budget(&self) -> usize;

    fn realize(&self, settings: SettingPair, bits: &BitString)
        -> Result<ExperimentRun, ModelError>;
}

/// Default budget: 32 bits for each flash count, the two hidden-variable
/// draws, and time, position and channel of up to the `1 - 10⁻¹²` Poisson
/// quantile of flashes per region.
pub fn default_bit_budget(params: &ModelParams) -> usize {
    let quantile = |side: Side| {
        let mean = params.flash_rate() * params.region(side).duration();
        poisson_quantile(mean, BUDGET_TAIL) as usize
    };
    BITS_PER_DRAW * (2 + 2 + 3 * (quantile(Side::A) + quantile(Side::B)))
}

fn validate_budget(bit_budget: usize) -> Result<(), DeterminismError> {
    // two flash counts and one complete flash per region at the very least
    if !bit_budget.is_multiple_of(BITS_PER_DRAW) || bit_budget < BITS_PER_DRAW * 8 {
        return Err(DeterminismError::BitBudget(bit_budget));
    }
    Ok(())
}

fn check_length(expected: usize, bits: &BitString) -> Result<(), ModelError> {
    if bits.len_bits() != expected {
        return Err(ModelError::BitLength {
            expected,
            got: bits.len_bits(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct JanusRealization {
    native_frame: Frame,
    params: ModelParams,
    bit_budget: usize,
}

impl JanusRealization {
    pub fn new(
        native_frame: Frame,
        params: ModelParams,
        bit_budget: usize,
    ) -> Result<Self, DeterminismError> {
        validate_budget(bit_budget)?;
        Ok(JanusRealization {
            native_frame,
            params,
            bit_budget,
        })
    }

    pub fn with_default_budget(native_frame: Frame, params: ModelParams) -> Self {
        let bit_budget = default_bit_budget(&params);
        JanusRealization {
            native_frame,
            params,
            bit_budget,
        }
    }

    pub fn native_frame(&self) -> Frame {
        self.native_frame
    }

    /// One run, reported in the native frame. The seed field is `None`: the
    /// bits are the only source of randomness.
    pub fn janus_run(
        &self,
        settings: SettingPair,
        bits: &BitString,
    ) -> Result<ExperimentRun, ModelError> {
        check_length(self.bit_budget, bits)?;
        let law = ChannelLaw::Quantum {
            processing: self.native_frame,
        };
        simulate(
            law,
            settings,
            self.native_frame,
            &self.params,
            None,
            &mut bits.reader(),
        )
    }
}

impl DeterministicRealization for JanusRealization {
    fn params(&self) -> &ModelParams {
        &self.params
    }

    fn bit_budget(&self) -> usize {
        self.bit_budget
    }

    fn realize(
        &self,
        settings: SettingPair,
        bits: &BitString,
    ) -> Result<ExperimentRun, ModelError> {
        self.janus_run(settings, bits)
    }
}

/// The local hidden-variable model driven by pre-given bits.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalHvRealization {
    params: ModelParams,
    report_frame: Frame,
    bit_budget: usize,
}

impl LocalHvRealization {
    pub fn new(
        report_frame: Frame,
        params: ModelParams,
        bit_budget: usize,
    ) -> Result<Self, DeterminismError> {
        validate_budget(bit_budget)?;
        Ok(LocalHvRealization {
            params,
            report_frame,
            bit_budget,
        })
    }

    pub fn with_default_budget(report_frame: Frame, params: ModelParams) -> Self {
        let bit_budget = default_bit_budget(&params);
        LocalHvRealization {
            params,
            report_frame,
            bit_budget,
        }
    }
}

impl DeterministicRealization for LocalHvRealization {
    fn params(&self) -> &ModelParams {
        &self.params
    }

    fn bit_budget(&self) -> usize {
        self.bit_budget
    }

    fn realize(
        &self,
        settings: SettingPair,
        bits: &BitString,
    ) -> Result<ExperimentRun, ModelError> {
        check_length(self.bit_budget, bits)?;
        simulate(
            ChannelLaw::Local,
            settings,
            self.report_frame,
            &self.params,
            None,
            &mut bits.reader(),
        )
    }
}

/// Settings used to probe for setting dependence of the frame-earlier region:
/// its own setting stays fixed while the frame-later one takes two values.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InfluenceProbe {
    pub earlier_setting: Setting,
    pub later_settings: (Setting, Setting),
}

impl Default for InfluenceProbe {
    /// Earlier side at 0, later side at 0 or π/2.
    fn default() -> Self {
        InfluenceProbe {
            earlier_setting: Setting::new(0.0),
            later_settings: (
                Setting::new(0.0),
                Setting::new(core::f64::consts::FRAC_PI_2),
            ),
        }
    }
}

/// A bit string for which changing only the frame-later setting changes the
/// frame-earlier region's outcome.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct InfluenceEvidence {
    pub frame: Frame,
    /// The region that is earlier in `frame` and whose outcome moved.
    pub region: Side,
    pub witness_bits: BitString,
    pub setting_pairs: (SettingPair, SettingPair),
    pub outcomes: (Channel, Channel),
    /// Index of the sampled bit string that produced the witness.
    pub sample: u64,
}

/// Searches `n_samples` seeded bit strings for an influence witness in
/// `frame`. Samples that end inconclusive or starve are skipped.
pub fn find_influence_witness<R: DeterministicRealization + ?Sized>(
    realization: &R,
    frame: Frame,
    probe: InfluenceProbe,
    n_samples: u64,
    master_seed: u64,
) -> Result<Option<InfluenceEvidence>, DeterminismError> {
    let (ra, rb) = realization.params().regions();
    let earlier = region_order(ra, rb, &frame).ok_or(DeterminismError::NoRegionOrder {
        rapidity: frame.rapidity(),
    })?;
    let pair = |later: Setting| match earlier {
        Side::A => SettingPair {
            a: probe.earlier_setting,
            b: later,
        },
        Side::B => SettingPair {
            a: later,
            b: probe.earlier_setting,
        },
    };
    let pairs = (pair(probe.later_settings.0), pair(probe.later_settings.1));
    for i in 0..n_samples {
        let bits = BitString::random(realization.bit_budget(), seed::mix(master_seed, i));
        let first = match realization.realize(pairs.0, &bits) {
            Ok(run) => run.outcome.channel(earlier),
            Err(ModelError::Inconclusive { .. } | ModelError::BitsExhausted { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let second = match realization.realize(pairs.1, &bits) {
            Ok(run) => run.outcome.channel(earlier),
            Err(ModelError::Inconclusive { .. } | ModelError::BitsExhausted { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        if first != second {
            return Ok(Some(InfluenceEvidence {
                frame,
                region: earlier,
                witness_bits: bits,
                setting_pairs: pairs,
                outcomes: (first, second),
                sample: i,
            }));
        }
    }
    Ok(None)
}

/// Like [`find_influence_witness`], but insists that `other_frame` reverses
/// the native order of the regions, so any witness is an influence on what is
/// the past in `other_frame`.
pub fn past_influence_probe(
    realization: &JanusRealization,
    other_frame: Frame,
    probe: InfluenceProbe,
    n_samples: u64,
    master_seed: u64,
) -> Result<Option<InfluenceEvidence>, DeterminismError> {
    let (ra, rb) = realization.params.regions();
    let native = region_order(ra, rb, &realization.native_frame);
    let other = region_order(ra, rb, &other_frame);
    match (native, other) {
        (Some(n), Some(o)) if n != o => {
            find_influence_witness(realization, other_frame, probe, n_samples, master_seed)
        }
        _ => Err(DeterminismError::NotReversed {
            native: realization.native_frame.rapidity(),
            other: other_frame.rapidity(),
        }),
    }
}
