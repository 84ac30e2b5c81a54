//! Quantum formalism for two spin-½ particles measured along coplanar
//! Stern-Gerlach directions.
//!
//! States live in the fixed z-basis with amplitudes ordered
//! `(+,+), (+,-), (-,+), (-,-)` where the first label is particle A.
//! A measurement direction is a single angle in the x-z plane; the eigenvectors
//! of spin along angle `θ` are `|+θ⟩ = (cos θ/2, sin θ/2)` and
//! `|-θ⟩ = (-sin θ/2, cos θ/2)`.

use core::f64::consts::{FRAC_1_SQRT_2, TAU};
use core::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Carrier for one component of a state vector.
pub type ComplexAmplitude = Complex64;

/// Tolerance for analytic identities (norms, simplex sums).
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Probabilities at or below this value count as zero when conditioning or
/// collapsing.
pub const ZERO_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("state is not normalized: norm {norm} differs from 1 by more than {NORM_TOLERANCE:e}")]
    NotNormalized { norm: f64 },
    #[error("state vector has zero or non-finite norm")]
    Degenerate,
    #[error("conditioning on {side} = {channel} which has probability {probability:e}")]
    ZeroProbability {
        side: Side,
        channel: Channel,
        probability: f64,
    },
}

/// One of the two spacelike separated wings of the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Side {
    A,
    B,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::A, Side::B];

    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::A => 0,
            Side::B => 1,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "A",
            Side::B => "B",
        })
    }
}

/// Exit channel of a Stern-Gerlach magnet, i.e. the outcome ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    Plus,
    Minus,
}

impl Channel {
    pub const BOTH: [Channel; 2] = [Channel::Plus, Channel::Minus];

    /// `+1` or `-1`.
    pub fn sign(self) -> i8 {
        match self {
            Channel::Plus => 1,
            Channel::Minus => -1,
        }
    }

    pub fn from_sign(sign: i8) -> Option<Channel> {
        match sign {
            1 => Some(Channel::Plus),
            -1 => Some(Channel::Minus),
            _ => None,
        }
    }

    /// Position in probability vectors: `Plus` first.
    pub fn index(self) -> usize {
        match self {
            Channel::Plus => 0,
            Channel::Minus => 1,
        }
    }

    pub fn flipped(self) -> Channel {
        match self {
            Channel::Plus => Channel::Minus,
            Channel::Minus => Channel::Plus,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Plus => "+1",
            Channel::Minus => "-1",
        })
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Channel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.sign())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Channel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let sign = <i8 as serde::Deserialize>::deserialize(d)?;
        Channel::from_sign(sign).ok_or_else(|| serde::de::Error::custom("channel must be +1 or -1"))
    }
}

/// Joint outcome `(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Outcome {
    pub alpha: Channel,
    pub beta: Channel,
}

impl Outcome {
    /// All four outcomes in the canonical order `(+,+), (+,-), (-,+), (-,-)`.
    pub const ALL: [Outcome; 4] = [
        Outcome::new(Channel::Plus, Channel::Plus),
        Outcome::new(Channel::Plus, Channel::Minus),
        Outcome::new(Channel::Minus, Channel::Plus),
        Outcome::new(Channel::Minus, Channel::Minus),
    ];

    pub const fn new(alpha: Channel, beta: Channel) -> Self {
        Outcome { alpha, beta }
    }

    pub fn index(self) -> usize {
        2 * self.alpha.index() + self.beta.index()
    }

    pub fn channel(self, side: Side) -> Channel {
        match side {
            Side::A => self.alpha,
            Side::B => self.beta,
        }
    }

    /// `αβ`
    pub fn product(self) -> i8 {
        self.alpha.sign() * self.beta.sign()
    }
}

/// Measurement direction, an angle normalized to `[0, 2π)`. Serialized as
/// the bare angle in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(transparent))]
pub struct Setting {
    angle: f64,
}

impl Setting {
    pub fn new(angle: f64) -> Self {
        let mut r = angle % TAU;
        if r < 0.0 {
            r += TAU;
        }
        // `-1e-17 % TAU + TAU` rounds to TAU itself
        if r >= TAU {
            r = 0.0;
        }
        Setting { angle: r }
    }

    pub fn angle(self) -> f64 {
        self.angle
    }

    /// Whether two settings denote the same direction up to `tol` radians.
    pub fn same_direction(self, other: Setting, tol: f64) -> bool {
        let d = (self.angle - other.angle).abs();
        d <= tol || (TAU - d) <= tol
    }

    fn eigenvector(self, channel: Channel) -> [f64; 2] {
        let half = 0.5 * self.angle;
        let (s, c) = (libm::sin(half), libm::cos(half));
        match channel {
            Channel::Plus => [c, s],
            Channel::Minus => [-s, c],
        }
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Setting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let angle = <f64 as serde::Deserialize>::deserialize(d)?;
        Ok(Setting::new(angle))
    }
}

/// The settings `(F_A, F_B)` chosen on both wings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SettingPair {
    pub a: Setting,
    pub b: Setting,
}

impl SettingPair {
    pub fn new(a: f64, b: f64) -> Self {
        SettingPair {
            a: Setting::new(a),
            b: Setting::new(b),
        }
    }

    pub fn side(&self, side: Side) -> Setting {
        match side {
            Side::A => self.a,
            Side::B => self.b,
        }
    }
}

/// Probabilities of the four joint outcomes, ordered as [`Outcome::ALL`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JointProbabilities(pub [f64; 4]);

impl JointProbabilities {
    pub fn get(&self, alpha: Channel, beta: Channel) -> f64 {
        self.0[Outcome::new(alpha, beta).index()]
    }

    pub fn of(&self, outcome: Outcome) -> f64 {
        self.0[outcome.index()]
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.0
    }
}

/// Normalized two-particle spin state.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PureState {
    amplitudes: [ComplexAmplitude; 4],
}

fn norm_sqr(amplitudes: &[ComplexAmplitude; 4]) -> f64 {
    amplitudes.iter().map(|z| z.norm_sqr()).sum()
}

impl PureState {
    /// Accepts amplitudes whose norm is 1 within [`NORM_TOLERANCE`].
    pub fn new(amplitudes: [ComplexAmplitude; 4]) -> Result<Self, QuantumError> {
        let n2 = norm_sqr(&amplitudes);
        if !n2.is_finite() {
            return Err(QuantumError::Degenerate);
        }
        let norm = libm::sqrt(n2);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QuantumError::NotNormalized { norm });
        }
        Ok(PureState { amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: [ComplexAmplitude; 4]) -> Result<Self, QuantumError> {
        let n2 = norm_sqr(&amplitudes);
        if !n2.is_finite() || n2 <= 0.0 {
            return Err(QuantumError::Degenerate);
        }
        let inv = 1.0 / libm::sqrt(n2);
        Ok(PureState {
            amplitudes: amplitudes.map(|z| z * inv),
        })
    }

    /// `(|+-⟩ - |-+⟩)/√2`
    pub fn singlet() -> Self {
        let z = Complex64::new(0.0, 0.0);
        PureState {
            amplitudes: [
                z,
                Complex64::new(FRAC_1_SQRT_2, 0.0),
                Complex64::new(-FRAC_1_SQRT_2, 0.0),
                z,
            ],
        }
    }

    /// The z-basis product state `|α β⟩`.
    pub fn basis(alpha: Channel, beta: Channel) -> Self {
        let mut amplitudes = [Complex64::new(0.0, 0.0); 4];
        amplitudes[Outcome::new(alpha, beta).index()] = Complex64::new(1.0, 0.0);
        PureState { amplitudes }
    }

    pub fn amplitudes(&self) -> &[ComplexAmplitude; 4] {
        &self.amplitudes
    }

    pub fn amplitude(&self, alpha: Channel, beta: Channel) -> ComplexAmplitude {
        self.amplitudes[Outcome::new(alpha, beta).index()]
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(norm_sqr(&self.amplitudes))
    }

    /// Components of the partial projection `⟨e| ⊗ 1` (or `1 ⊗ ⟨e|`) onto
    /// the eigenvector of `(side, setting, channel)`: the unnormalized state of
    /// the other particle in the z-basis.
    fn contract(&self, side: Side, e: [f64; 2]) -> [ComplexAmplitude; 2] {
        let psi = &self.amplitudes;
        match side {
            Side::A => [psi[0] * e[0] + psi[2] * e[1], psi[1] * e[0] + psi[3] * e[1]],
            Side::B => [psi[0] * e[0] + psi[1] * e[1], psi[2] * e[0] + psi[3] * e[1]],
        }
    }
}

/// Born probabilities `P(α, β) = |⟨α_a ⊗ β_b | ψ⟩|²`.
pub fn born_joint(state: &PureState, settings: SettingPair) -> JointProbabilities {
    let mut p = [0.0; 4];
    for alpha in Channel::BOTH {
        let rest = state.contract(Side::A, settings.a.eigenvector(alpha));
        for beta in Channel::BOTH {
            let e = settings.b.eigenvector(beta);
            let amp = rest[0] * e[0] + rest[1] * e[1];
            p[Outcome::new(alpha, beta).index()] = amp.norm_sqr();
        }
    }
    JointProbabilities(p)
}

/// Outcome probabilities on one side, `[P(+1), P(-1)]`, independent of the
/// other side's setting.
pub fn born_marginal(state: &PureState, side: Side, setting: Setting) -> [f64; 2] {
    Channel::BOTH.map(|c| {
        let rest = state.contract(side, setting.eigenvector(c));
        rest[0].norm_sqr() + rest[1].norm_sqr()
    })
}

/// Distribution of the *other* side's outcome given `given_side` came out in
/// `given_channel`.
pub fn born_conditional(
    state: &PureState,
    settings: SettingPair,
    given_side: Side,
    given_channel: Channel,
) -> Result<[f64; 2], QuantumError> {
    let marginal =
        born_marginal(state, given_side, settings.side(given_side))[given_channel.index()];
    if marginal <= ZERO_PROBABILITY {
        return Err(QuantumError::ZeroProbability {
            side: given_side,
            channel: given_channel,
            probability: marginal,
        });
    }
    let joint = born_joint(state, settings);
    Ok(Channel::BOTH.map(|c| {
        let p = match given_side {
            Side::A => joint.get(given_channel, c),
            Side::B => joint.get(c, given_channel),
        };
        p / marginal
    }))
}

/// Projective collapse of `side` onto `channel` followed by renormalization.
pub fn collapse(
    state: &PureState,
    side: Side,
    setting: Setting,
    channel: Channel,
) -> Result<PureState, QuantumError> {
    collapse_softened(state, side, setting, channel, 0.0)
}

/// Collapse that leaves a floor `epsilon` of the other channel's component in
/// place before renormalizing: `ψ' ∝ Πψ + ε(1 - Π)ψ`. `epsilon = 0` is exact
/// projection.
pub fn collapse_softened(
    state: &PureState,
    side: Side,
    setting: Setting,
    channel: Channel,
    epsilon: f64,
) -> Result<PureState, QuantumError> {
    let keep = setting.eigenvector(channel);
    let drop = setting.eigenvector(channel.flipped());
    let kept = state.contract(side, keep);
    let probability = kept[0].norm_sqr() + kept[1].norm_sqr();
    if probability <= ZERO_PROBABILITY {
        return Err(QuantumError::ZeroProbability {
            side,
            channel,
            probability,
        });
    }
    let dropped = state.contract(side, drop);

    // ψ' = |keep⟩⊗kept + ε |drop⟩⊗dropped, laid out in the z-basis
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for s_own in 0..2 {
        for s_other in 0..2 {
            let z = kept[s_other] * keep[s_own] + dropped[s_other] * (epsilon * drop[s_own]);
            let idx = match side {
                Side::A => 2 * s_own + s_other,
                Side::B => 2 * s_other + s_own,
            };
            out[idx] = z;
        }
    }
    PureState::normalized(out)
}

/// `E(a, b) = Σ αβ P(α, β)`.
pub fn correlator(state: &PureState, settings: SettingPair) -> f64 {
    let p = born_joint(state, settings);
    Outcome::ALL
        .iter()
        .map(|o| f64::from(o.product()) * p.of(*o))
        .sum()
}

/// `S = E(a,b) - E(a,b') + E(a',b) + E(a',b')`.
///
/// With the singlet and `(a, a', b, b') = (0, π/2, π/4, 3π/4)` this reaches the
/// Tsirelson value `-2√2`.
pub fn chsh_value(state: &PureState, a: Setting, a2: Setting, b: Setting, b2: Setting) -> f64 {
    let e = |x: Setting, y: Setting| correlator(state, SettingPair { a: x, b: y });
    chsh_combination([e(a, b), e(a, b2), e(a2, b), e(a2, b2)])
}

/// Combines the correlators `[E(a,b), E(a,b'), E(a',b), E(a',b')]` into the
/// CHSH value. Shared by every estimator so all of them use one sign
/// convention.
pub fn chsh_combination(e: [f64; 4]) -> f64 {
    e[0] - e[1] + e[2] + e[3]
}
