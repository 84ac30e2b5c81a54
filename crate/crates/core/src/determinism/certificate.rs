//! Exhaustive certificate that determinism with bits given in advance cannot
//! be both effectively causal and nonlocal.
//!
//! For each `k` up to `k_max` every pair of side functions `A(a, b, bits)`,
//! `B(b, a, bits)` is enumerated. A pair is *effectively causal* if, in every
//! probe frame, the side whose region comes first does not depend on the
//! other side's setting. The survivors are then exactly the local strategies,
//! and their largest `|CHSH|` is reported next to the singlet's.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

use super::janus::{past_influence_probe, InfluenceEvidence, InfluenceProbe, JanusRealization};
use super::strategy::{
    enumerate_side_functions, enumerate_strategies, epr_filter, side_pair_chsh, wigner_check,
    SideFunction, WignerReport,
};
use super::DeterminismError;
use crate::minkowski::{region_order, Frame};
use crate::models::ModelParams;
use crate::quantum::{chsh_value, PureState, Setting, Side};

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateConfig {
    pub k_max: u32,
    /// `[a, a', b, b']`
    pub chsh_angles: [Setting; 4],
    pub probe_frames: Vec<Frame>,
    pub params: ModelParams,
    /// Angle step of the Wigner check; the common settings are `0, θ, 2θ`.
    pub wigner_theta: f64,
    pub janus_native: Frame,
    pub janus_probe: Frame,
    pub influence_probe: InfluenceProbe,
    pub witness_samples: u64,
    pub seed: u64,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        let frame = |r: f64| Frame::new(r).expect("in range");
        CertificateConfig {
            k_max: 2,
            chsh_angles: [0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4].map(Setting::new),
            probe_frames: alloc::vec![frame(-1.0), frame(1.0)],
            params: ModelParams::default(),
            wigner_theta: FRAC_PI_3,
            janus_native: frame(-1.0),
            janus_probe: frame(1.0),
            influence_probe: InfluenceProbe::default(),
            witness_samples: 1000,
            seed: 0,
        }
    }
}

/// Result of the exhaustive search at one `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EnumerationLevel {
    pub n_a: usize,
    pub n_b: usize,
    pub k: u32,
    /// All side-function pairs, signalling ones included.
    pub candidates: u128,
    /// Pairs passing the effective-causality filter.
    pub count: u128,
    /// Survivors whose side functions ignore the distant setting.
    pub local_count: u128,
    /// Largest `|CHSH|` among the survivors.
    pub max_chsh: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EprSummary {
    pub common_settings: usize,
    pub k: u32,
    pub candidates: usize,
    pub survivor_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Certificate {
    /// The level at `k_max`.
    pub enumeration: EnumerationLevel,
    /// Every level from `k = 0` to `k_max`.
    pub levels: Vec<EnumerationLevel>,
    /// Largest survivor `|CHSH|` over every level.
    pub max_chsh: f64,
    pub quantum_chsh: f64,
    pub epr_filter: EprSummary,
    pub wigner: WignerReport,
    pub janus_witness: Option<InfluenceEvidence>,
}

impl Certificate {
    /// Whether everything certified points the same way: causal survivors
    /// are local and bounded by 2, the singlet exceeds 2, and the frame-native
    /// realization influences the past of some frame.
    pub fn holds(&self) -> bool {
        self.levels
            .iter()
            .all(|l| l.count == l.local_count && l.max_chsh <= 2.0 + 1e-12)
            && self.quantum_chsh.abs() > 2.0
            && self.wigner.all_satisfied
            && self.janus_witness.is_some()
    }
}

/// Side-function constraint implied by the probe frames: a side must ignore
/// the distant setting whenever its region is first in some frame.
fn must_be_independent(side: Side, config: &CertificateConfig) -> Result<bool, DeterminismError> {
    let (ra, rb) = config.params.regions();
    let mut independent = false;
    for f in &config.probe_frames {
        match region_order(ra, rb, f) {
            Some(first) => independent |= first == side,
            None => {
                return Err(DeterminismError::NoRegionOrder {
                    rapidity: f.rapidity(),
                })
            }
        }
    }
    Ok(independent)
}

fn level(k: u32, config: &CertificateConfig) -> Result<EnumerationLevel, DeterminismError> {
    let all = enumerate_side_functions(2, 2, k)?;
    let candidates = (all.len() as u128) * (all.len() as u128);
    let survivors_for = |side: Side| -> Result<Vec<&SideFunction>, DeterminismError> {
        let independent = must_be_independent(side, config)?;
        Ok(all
            .iter()
            .filter(|f| !independent || !f.depends_on_other())
            .collect())
    };
    let (sa, sb) = (survivors_for(Side::A)?, survivors_for(Side::B)?);
    let local = |v: &[&SideFunction]| v.iter().filter(|f| !f.depends_on_other()).count() as u128;

    // CHSH is computed on index order [a, a'] x [b, b'], so the configured
    // angles only need to be distinct per side.
    let [a0, a1, b0, b1] = config.chsh_angles;
    if a0.same_direction(a1, 1e-12) || b0.same_direction(b1, 1e-12) {
        return Err(DeterminismError::SettingMismatch);
    }
    let mut max = 0.0f64;
    for fa in &sa {
        for fb in &sb {
            max = max.max(side_pair_chsh(fa, fb).abs());
        }
    }
    Ok(EnumerationLevel {
        n_a: 2,
        n_b: 2,
        k,
        candidates,
        count: (sa.len() as u128) * (sb.len() as u128),
        local_count: local(&sa) * local(&sb),
        max_chsh: max,
    })
}

pub fn no_effectively_causal_nonlocal_determinism_check(
    config: &CertificateConfig,
) -> Result<Certificate, DeterminismError> {
    let levels = (0..=config.k_max)
        .map(|k| level(k, config))
        .collect::<Result<Vec<_>, _>>()?;
    let max_chsh = levels.iter().map(|l| l.max_chsh).fold(0.0, f64::max);
    let [a0, a1, b0, b1] = config.chsh_angles;
    let quantum_chsh = chsh_value(&PureState::singlet(), a0, a1, b0, b1);

    let theta = config.wigner_theta;
    let common = [
        Setting::new(0.0),
        Setting::new(theta),
        Setting::new(2.0 * theta),
    ];
    let epr_k = 0;
    let candidates = enumerate_strategies(&common, &common, epr_k)?;
    let survivors = epr_filter(&candidates, &common)?;
    let wigner = wigner_check(&survivors, theta)?;

    let janus = JanusRealization::with_default_budget(config.janus_native, config.params.clone());
    let janus_witness = past_influence_probe(
        &janus,
        config.janus_probe,
        config.influence_probe,
        config.witness_samples,
        config.seed,
    )?;

    Ok(Certificate {
        enumeration: *levels.last().expect("k = 0 is always enumerated"),
        levels,
        max_chsh,
        quantum_chsh,
        epr_filter: EprSummary {
            common_settings: common.len(),
            k: epr_k,
            candidates: candidates.len(),
            survivor_count: survivors.len(),
        },
        wigner,
        janus_witness,
    })
}
