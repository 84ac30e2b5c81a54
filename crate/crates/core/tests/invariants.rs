//! Randomized invariants of the quantum and geometry layers, checked against
//! an independent tensor-product oracle where one applies.

use std::f64::consts::{SQRT_2, TAU};

use flashlab_core::minkowski::{boost, interval, order_flip_rapidity, precedes, spacelike};
use flashlab_core::quantum::{
    born_conditional, born_joint, born_marginal, chsh_value, collapse, Channel, Outcome, PureState,
    Setting, SettingPair, Side,
};
use flashlab_core::{Event, Frame};
use num_complex::Complex64;
use proptest::prelude::*;

const CASES: u32 = 1000;
const PROB_TOL: f64 = 1e-12;

fn state() -> impl Strategy<Value = PureState> {
    prop::array::uniform8(-1.0f64..1.0)
        .prop_filter("non-degenerate", |v| {
            v.iter().map(|x| x * x).sum::<f64>() > 1e-3
        })
        .prop_map(|v| {
            let amps = [0, 1, 2, 3].map(|i| Complex64::new(v[2 * i], v[2 * i + 1]));
            PureState::normalized(amps).unwrap()
        })
}

fn angle() -> impl Strategy<Value = f64> {
    -10.0f64..10.0
}

fn event() -> impl Strategy<Value = Event> {
    (-50.0f64..50.0, -50.0f64..50.0).prop_map(|(t, x)| Event::new(t, x))
}

fn rapidity() -> impl Strategy<Value = f64> {
    -3.0f64..3.0
}

// Independent oracle: spin-½ projector eigenvector for outcome `c` along
// `θ`, built as (cos θ/2, sin θ/2) rotated by the outcome sign, then a plain
// Kronecker product with the amplitude vector.
fn oracle_joint(s: &PureState, a: f64, b: f64) -> [f64; 4] {
    let vec = |theta: f64, c: Channel| -> [f64; 2] {
        let h = 0.5 * theta;
        match c {
            Channel::Plus => [h.cos(), h.sin()],
            Channel::Minus => [-h.sin(), h.cos()],
        }
    };
    let amps = s.amplitudes();
    Outcome::ALL.map(|o| {
        let (u, v) = (vec(a, o.alpha), vec(b, o.beta));
        let kron = [u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]];
        let amp: Complex64 = (0..4).map(|i| amps[i] * kron[i]).sum();
        amp.norm_sqr()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn joint_matches_oracle_and_is_normalized(s in state(), a in angle(), b in angle()) {
        let p = born_joint(&s, SettingPair::new(a, b)).as_array();
        let q = oracle_joint(&s, a, b);
        for i in 0..4 {
            prop_assert!((p[i] - q[i]).abs() < PROB_TOL);
            prop_assert!(p[i] >= 0.0);
        }
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < PROB_TOL);
    }

    #[test]
    fn marginals_sum_the_joint_and_ignore_the_distant_setting(s in state(), a in angle(), b in angle(), b2 in angle()) {
        let p = born_joint(&s, SettingPair::new(a, b));
        let p2 = born_joint(&s, SettingPair::new(a, b2));
        let m = born_marginal(&s, Side::A, Setting::new(a));
        for alpha in Channel::BOTH {
            let sum = p.get(alpha, Channel::Plus) + p.get(alpha, Channel::Minus);
            let sum2 = p2.get(alpha, Channel::Plus) + p2.get(alpha, Channel::Minus);
            prop_assert!((sum - m[alpha.index()]).abs() < PROB_TOL);
            prop_assert!((sum2 - m[alpha.index()]).abs() < PROB_TOL);
        }
    }

    #[test]
    fn chain_rule_and_conditioning_symmetry(s in state(), a in angle(), b in angle()) {
        let settings = SettingPair::new(a, b);
        let joint = born_joint(&s, settings);
        let ma = born_marginal(&s, Side::A, settings.a);
        let mb = born_marginal(&s, Side::B, settings.b);
        for alpha in Channel::BOTH {
            for beta in Channel::BOTH {
                let p = joint.get(alpha, beta);
                if ma[alpha.index()] > 1e-9 {
                    let c = born_conditional(&s, settings, Side::A, alpha).unwrap();
                    prop_assert!((ma[alpha.index()] * c[beta.index()] - p).abs() < PROB_TOL);
                }
                if mb[beta.index()] > 1e-9 {
                    let c = born_conditional(&s, settings, Side::B, beta).unwrap();
                    prop_assert!((mb[beta.index()] * c[alpha.index()] - p).abs() < PROB_TOL);
                }
            }
        }
    }

    #[test]
    fn collapse_reproduces_the_conditional(s in state(), a in angle(), b in angle()) {
        let settings = SettingPair::new(a, b);
        let ma = born_marginal(&s, Side::A, settings.a);
        for alpha in Channel::BOTH {
            if ma[alpha.index()] <= 1e-9 {
                continue;
            }
            let post = collapse(&s, Side::A, settings.a, alpha).unwrap();
            prop_assert!((post.norm() - 1.0).abs() < PROB_TOL);
            let after = born_joint(&post, settings);
            let cond = born_conditional(&s, settings, Side::A, alpha).unwrap();
            for beta in Channel::BOTH {
                prop_assert!((after.get(alpha, beta) - cond[beta.index()]).abs() < 1e-10);
                prop_assert!(after.get(alpha.flipped(), beta).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tsirelson_bound(s in state(), angles in prop::array::uniform4(angle())) {
        let [a, a2, b, b2] = angles.map(Setting::new);
        prop_assert!(chsh_value(&s, a, a2, b, b2).abs() <= 2.0 * SQRT_2 + 1e-12);
    }

    #[test]
    fn settings_are_normalized(a in -1e3f64..1e3) {
        let s = Setting::new(a);
        prop_assert!((0.0..TAU).contains(&s.angle()));
        prop_assert!(s.same_direction(Setting::new(a + TAU), 1e-9));
    }

    #[test]
    fn boosts_compose_additively(e in event(), r1 in rapidity(), r2 in rapidity()) {
        let f1 = Frame::new(r1).unwrap();
        let f2 = Frame::new(r2).unwrap();
        let f12 = Frame::new(r1 + r2).unwrap();
        let twice = boost(boost(e, &f1), &f2);
        let once = boost(e, &f12);
        let scale = 1.0 + e.t.abs().max(e.x.abs()) * (r1.abs() + r2.abs()).exp();
        prop_assert!((twice.t - once.t).abs() < 1e-12 * scale);
        prop_assert!((twice.x - once.x).abs() < 1e-12 * scale);
    }

    #[test]
    fn interval_is_invariant(e1 in event(), e2 in event(), r in rapidity()) {
        let f = Frame::new(r).unwrap();
        let s0 = interval(e1, e2);
        let s1 = interval(boost(e1, &f), boost(e2, &f));
        let scale = 1.0 + 1e4 * (2.0 * r.abs()).exp();
        prop_assert!((s0 - s1).abs() < 1e-12 * scale);
    }

    #[test]
    fn order_flip_frame_reverses_spacelike_order(e1 in event(), e2 in event()) {
        prop_assume!(interval(e1, e2) < -1e-3);
        let lab = Frame::lab();
        let flip = order_flip_rapidity(e1, e2).unwrap();
        let lab_first = precedes(e1, e2, &lab).unwrap_or(true);
        prop_assert_eq!(precedes(e1, e2, &flip).unwrap(), !lab_first);
    }

    #[test]
    fn timelike_order_is_frame_invariant(e in event(), dt in 0.1f64..20.0, frac in -0.99f64..0.99, r in rapidity()) {
        let later = Event::new(e.t + dt, e.x + frac * dt);
        prop_assert!(!spacelike(e, later));
        prop_assert!(order_flip_rapidity(e, later).is_err());
        prop_assert!(precedes(e, later, &Frame::new(r).unwrap()).unwrap());
    }

    #[test]
    fn precedes_is_antisymmetric(e1 in event(), e2 in event(), r in rapidity()) {
        let f = Frame::new(r).unwrap();
        match (precedes(e1, e2, &f), precedes(e2, e1, &f)) {
            (Ok(x), Ok(y)) => prop_assert_ne!(x, y),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "tie reported in one direction only"),
        }
    }
}
