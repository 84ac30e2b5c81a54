//! Built-in local hidden-variable strategy.
//!
//! The shared hidden variable is an angle `λ` plus a selector bit. Given
//! them, side A answers `sign cos(θ - λ)` (selector 0) or `sign cos 2(θ - λ)`
//! (selector 1) and side B answers the negation, so equal settings are always
//! anticorrelated. The mixture has uniform marginals and correlator
//!
//! ```text
//! E(d) = -½ (1 - 2|d|/π) - ½ (1 - 4|d₂|/π)
//! ```
//!
//! where `d ∈ [-π, π]` and `d₂ ∈ [-π/2, π/2]` are `a - b` wrapped to the
//! respective periods. At the CHSH angles `(0, π/2, π/4, 3π/4)` it yields
//! `S = -1`, well inside the local bound.

use core::f64::consts::TAU;

use crate::quantum::{Channel, Setting, Side};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenVariable {
    pub angle: f64,
    pub doubled: bool,
}

impl HiddenVariable {
    pub fn from_uniforms(u_angle: f64, u_selector: f64) -> Self {
        HiddenVariable {
            angle: TAU * u_angle,
            doubled: u_selector >= 0.5,
        }
    }

    /// Deterministic response of `side` to `setting`.
    pub fn response(&self, side: Side, setting: Setting) -> Channel {
        let d = setting.angle() - self.angle;
        let phase = if self.doubled { 2.0 * d } else { d };
        let a = if libm::cos(phase) >= 0.0 {
            Channel::Plus
        } else {
            Channel::Minus
        };
        match side {
            Side::A => a,
            Side::B => a.flipped(),
        }
    }
}

/// Analytic correlator of the built-in mixture.
pub fn correlator(a: Setting, b: Setting) -> f64 {
    use core::f64::consts::{FRAC_PI_2, PI};
    let wrap = |d: f64, period: f64| {
        let mut r = d % period;
        if r > 0.5 * period {
            r -= period;
        } else if r < -0.5 * period {
            r += period;
        }
        r.abs()
    };
    let d = a.angle() - b.angle();
    let single = 1.0 - 2.0 * wrap(d, TAU) / PI;
    let double = 1.0 - 2.0 * wrap(d, PI) / FRAC_PI_2;
    -0.5 * (single + double)
}
