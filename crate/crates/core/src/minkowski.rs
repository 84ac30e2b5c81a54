//! 1+1 dimensional Minkowski geometry in natural units (`c = 1`).
//!
//! Frames are boosts along `x` labelled by rapidity. A frame's simultaneity
//! hyperplanes are the surfaces of constant boosted time `t'`.

use core::fmt;

use thiserror::Error;

use crate::quantum::Side;

/// Largest admissible `|rapidity|`; `cosh 20 ≈ 2.4e8`.
pub const RAPIDITY_GUARD: f64 = 20.0;

/// Boosted times closer than this are a simultaneity tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("rapidity {0} is outside the guard |χ| <= {RAPIDITY_GUARD}")]
    RapidityOutOfRange(f64),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("region {label} is empty: needs t_min < t_max and x_min < x_max")]
    EmptyRegion { label: Side },
    #[error("events are simultaneous in frame χ = {rapidity} (|Δt'| = {gap:e})")]
    Tie { rapidity: f64, gap: f64 },
    #[error("order is frame-invariant: events are not spacelike separated (interval {interval})")]
    OrderInvariant { interval: f64 },
}

/// A space-time point `(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Event {
    pub t: f64,
    pub x: f64,
}

impl Event {
    pub const fn new(t: f64, x: f64) -> Self {
        Event { t, x }
    }
}

/// Inertial frame obtained from the lab frame by a boost of the given rapidity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    rapidity: f64,
    cosh: f64,
    sinh: f64,
}

impl Frame {
    pub fn new(rapidity: f64) -> Result<Self, GeometryError> {
        if !rapidity.is_finite() || rapidity.abs() > RAPIDITY_GUARD {
            return Err(GeometryError::RapidityOutOfRange(rapidity));
        }
        Ok(Frame {
            rapidity,
            cosh: libm::cosh(rapidity),
            sinh: libm::sinh(rapidity),
        })
    }

    pub fn lab() -> Self {
        Frame {
            rapidity: 0.0,
            cosh: 1.0,
            sinh: 0.0,
        }
    }

    pub fn rapidity(&self) -> f64 {
        self.rapidity
    }

    /// Time coordinate of `e` in this frame.
    pub fn time_of(&self, e: Event) -> f64 {
        e.t * self.cosh - e.x * self.sinh
    }
}

impl Default for Frame {
    fn default() -> Self {
        Frame::lab()
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "χ={}", self.rapidity)
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Frame {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Frame", 1)?;
        st.serialize_field("rapidity", &self.rapidity)?;
        st.end()
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Frame {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        struct Raw {
            rapidity: f64,
        }
        let raw = Raw::deserialize(d)?;
        Frame::new(raw.rapidity).map_err(serde::de::Error::custom)
    }
}

/// Axis-aligned lab-frame box `[t_min, t_max] × [x_min, x_max]` holding one
/// wing of the experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Region {
    label: Side,
    t_min: f64,
    t_max: f64,
    x_min: f64,
    x_max: f64,
}

impl Region {
    pub fn new(label: Side, t: (f64, f64), x: (f64, f64)) -> Result<Self, GeometryError> {
        if ![t.0, t.1, x.0, x.1].iter().all(|v| v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if !(t.0 < t.1 && x.0 < x.1) {
            return Err(GeometryError::EmptyRegion { label });
        }
        Ok(Region {
            label,
            t_min: t.0,
            t_max: t.1,
            x_min: x.0,
            x_max: x.1,
        })
    }

    pub fn label(&self) -> Side {
        self.label
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.t_min, self.t_max)
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    pub fn duration(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn corners(&self) -> [Event; 4] {
        [
            Event::new(self.t_min, self.x_min),
            Event::new(self.t_min, self.x_max),
            Event::new(self.t_max, self.x_min),
            Event::new(self.t_max, self.x_max),
        ]
    }

    pub fn center(&self) -> Event {
        Event::new(
            0.5 * (self.t_min + self.t_max),
            0.5 * (self.x_min + self.x_max),
        )
    }

    pub fn contains(&self, e: Event) -> bool {
        (self.t_min..=self.t_max).contains(&e.t) && (self.x_min..=self.x_max).contains(&e.x)
    }

    /// Range of boosted times `t'` covered by the box in `frame`.
    pub fn time_span(&self, frame: &Frame) -> (f64, f64) {
        self.corners()
            .iter()
            .map(|c| frame.time_of(*c))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
                (lo.min(t), hi.max(t))
            })
    }
}

/// Coordinates of `e` in frame `f`: `t' = t coshχ - x sinhχ`, `x' = x coshχ - t sinhχ`.
pub fn boost(e: Event, f: &Frame) -> Event {
    Event {
        t: e.t * f.cosh - e.x * f.sinh,
        x: e.x * f.cosh - e.t * f.sinh,
    }
}

/// Signed interval `(Δt)² - (Δx)²`: negative for spacelike pairs.
pub fn interval(e1: Event, e2: Event) -> f64 {
    let dt = e2.t - e1.t;
    let dx = e2.x - e1.x;
    dt * dt - dx * dx
}

pub fn spacelike(e1: Event, e2: Event) -> bool {
    interval(e1, e2) < 0.0
}

/// Whether `e1` happens before `e2` in frame `f`. Near-simultaneous pairs are
/// reported as [`GeometryError::Tie`] so the caller can apply its own rule.
pub fn precedes(e1: Event, e2: Event, f: &Frame) -> Result<bool, GeometryError> {
    let gap = f.time_of(e2) - f.time_of(e1);
    if gap.abs() <= TIE_TOLERANCE {
        return Err(GeometryError::Tie {
            rapidity: f.rapidity,
            gap: gap.abs(),
        });
    }
    Ok(gap > 0.0)
}

/// A frame in which the lab-frame temporal order of two spacelike events is
/// reversed. Lab-simultaneous pairs count as `e1` first.
///
/// The rapidity sits one unit past the order-flip threshold `atanh(Δt/Δx)`,
/// or halfway between the threshold and the guard when that is closer.
pub fn order_flip_rapidity(e1: Event, e2: Event) -> Result<Frame, GeometryError> {
    if !spacelike(e1, e2) {
        return Err(GeometryError::OrderInvariant {
            interval: interval(e1, e2),
        });
    }
    let dt = e2.t - e1.t;
    let dx = e2.x - e1.x;
    let threshold = libm::atanh(dt / dx);
    let lab_sign = if dt >= 0.0 { 1.0 } else { -1.0 };
    let direction = lab_sign * dx.signum();
    let room = RAPIDITY_GUARD - direction * threshold;
    let step = (0.5 * room).min(1.0);
    Frame::new(threshold + direction * step)
}

/// Every pair of corners across the two boxes is spacelike separated.
pub fn regions_spacelike(a: &Region, b: &Region) -> bool {
    a.corners()
        .iter()
        .all(|p| b.corners().iter().all(|q| spacelike(*p, *q)))
}

/// The side whose whole region precedes the other's in `frame`, if the
/// regions are strictly ordered there.
pub fn region_order(a: &Region, b: &Region, frame: &Frame) -> Option<Side> {
    let (a_lo, a_hi) = a.time_span(frame);
    let (b_lo, b_hi) = b.time_span(frame);
    if a_hi < b_lo {
        Some(a.label)
    } else if b_hi < a_lo {
        Some(b.label)
    } else {
        None
    }
}

/// A frame in which the regions' strict order is the reverse of `frame`'s.
pub fn regions_flip_rapidity(a: &Region, b: &Region, frame: &Frame) -> Option<Frame> {
    let first = region_order(a, b, frame)?;
    // Flip the latest corner of the earlier box against the earliest corner
    // of the later one in the frame-boosted picture.
    let (early, late) = if first == a.label { (a, b) } else { (b, a) };
    let mut best: Option<Frame> = None;
    for p in early.corners() {
        for q in late.corners() {
            let cand = order_flip_rapidity(boost(p, frame), boost(q, frame)).ok()?;
            let cand = Frame::new(cand.rapidity + frame.rapidity).ok()?;
            if region_order(a, b, &cand) == Some(late.label) {
                let better = best.is_none_or(|f| {
                    (cand.rapidity - frame.rapidity).abs() < (f.rapidity - frame.rapidity).abs()
                });
                if better {
                    best = Some(cand);
                }
            }
        }
    }
    best
}
