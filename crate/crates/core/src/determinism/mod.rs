//! Deterministic models whose randomness is a bit string given in advance.

pub mod certificate;
pub mod janus;
pub mod strategy;

use thiserror::Error;

use crate::models::ModelError;

pub use certificate::{
    no_effectively_causal_nonlocal_determinism_check, Certificate, CertificateConfig,
};
pub use janus::{
    find_influence_witness, past_influence_probe, DeterministicRealization, InfluenceEvidence,
    InfluenceProbe, JanusRealization, LocalHvRealization,
};
pub use strategy::{
    chsh_of, enumerate_strategies, epr_filter, wigner_check, DeterministicStrategy,
    LocalCorrelations, StrategyMixture, WignerReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeterminismError {
    #[error("enumeration would produce {required} objects, above the 2^20 guard")]
    TooLarge { required: u128 },
    #[error("{0} shared bits exceed the supported maximum")]
    KBitsTooLarge(u32),
    #[error("response table does not cover every setting and bit string")]
    TableNotTotal,
    #[error("settings do not match the strategy's setting lists")]
    SettingMismatch,
    #[error("setting {0} is not available on both sides")]
    MissingCommonSetting(f64),
    #[error("mixture weights must be non-negative and sum to 1")]
    InvalidWeights,
    #[error("regions have no definite temporal order in the frame with rapidity {rapidity}")]
    NoRegionOrder { rapidity: f64 },
    #[error("frame {other} does not reverse the region order of native frame {native}")]
    NotReversed { native: f64, other: f64 },
    #[error("bit budget {0} is not a multiple of 32 of at least 256 bits")]
    BitBudget(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}
