//! Acceptance run: one PASS/FAIL line per criterion, with its runtime.
//! Exits nonzero when any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, TAU};
use std::process::ExitCode;
use std::time::Instant;

use flashlab::classifier::{classify, estimate_chsh, ClassifierConfig, Verdict};
use flashlab::flashlab_core::determinism::{
    chsh_of, enumerate_strategies, find_influence_witness,
    no_effectively_causal_nonlocal_determinism_check, past_influence_probe, CertificateConfig,
    DeterministicRealization, InfluenceProbe, JanusRealization, LocalHvRealization,
    StrategyMixture,
};
use flashlab::flashlab_core::minkowski::{boost, interval};
use flashlab::flashlab_core::models::draws::BitString;
use flashlab::flashlab_core::models::{ModelError, OutcomeCounts};
use flashlab::flashlab_core::quantum::{born_conditional, born_joint, born_marginal, Channel};
use flashlab::flashlab_core::{
    seed, Event, Frame, ModelId, ModelParams, PureState, Setting, SettingPair, Side,
};
use flashlab::sampling::outcome_counts;
use flashlab::stats::{goodness_of_fit, homogeneity};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const N: u64 = 100_000;
const ALPHA: f64 = 1e-3;
const BALANCE: (f64, f64) = (0.49, 0.51);
const CHSH_MIN: f64 = 2.7;
const MARGINAL_GAP: f64 = 0.02;
const LOCAL_BOUND_TOL: f64 = 1e-12;
const MIXTURES: usize = 10_000;
const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const NATIVE_SAMPLES: u64 = 10_000;
const FLIPPED_SAMPLES: u64 = 1_000;
const INVARIANT_CASES: usize = 1_000;
const PROB_TOL: f64 = 1e-12;
const GEOM_TOL: f64 = 1e-9;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;
type Criterion = (&'static str, fn() -> Outcome);

fn frame(r: f64) -> Frame {
    Frame::new(r).expect("rapidity in range")
}

fn marginal(c: &OutcomeCounts, side: Side) -> Vec<u64> {
    let [pp, pm, mp, mm] = c.counts;
    match side {
        Side::A => vec![pp + pm, mp + mm],
        Side::B => vec![pp + mp, pm + mm],
    }
}

fn first_flash_balance() -> Outcome {
    let c = outcome_counts(
        &ModelId::Rgrwf,
        &ModelParams::default(),
        SettingPair::new(0.0, FRAC_PI_3),
        Frame::lab(),
        N,
        101,
    )?;
    let p = c.first_in_a as f64 / c.conclusive() as f64;
    Ok((
        p >= BALANCE.0 && p <= BALANCE.1,
        format!("P(first in A) = {p:.5}"),
    ))
}

fn qf_agreement() -> Outcome {
    let params = ModelParams::default();
    let s = SettingPair::new(0.0, FRAC_PI_3);
    let c = outcome_counts(&ModelId::Rgrwf, &params, s, Frame::lab(), N, 102)?;
    let oracle = born_joint(params.state(), s).as_array();
    let expected = [0.125, 0.375, 0.375, 0.125];
    let oracle_ok = oracle
        .iter()
        .zip(expected)
        .all(|(o, e)| (o - e).abs() < PROB_TOL);
    let t = goodness_of_fit(&c.counts, &oracle);
    Ok((
        oracle_ok && t.p_value > ALPHA,
        format!("chi2 = {:.3}, p = {:.4}", t.statistic, t.p_value),
    ))
}

fn frame_covariance() -> Outcome {
    let params = ModelParams::default();
    let s = SettingPair::new(0.0, FRAC_PI_3);
    let c0 = outcome_counts(&ModelId::Rgrwf, &params, s, frame(0.0), N, 103)?;
    let c1 = outcome_counts(&ModelId::Rgrwf, &params, s, frame(1.0), N, 104)?;
    let t = homogeneity(&[c0.counts.to_vec(), c1.counts.to_vec()]);
    Ok((
        t.p_value > ALPHA,
        format!("chi2 = {:.3}, p = {:.4}", t.statistic, t.p_value),
    ))
}

fn nonlocality() -> Outcome {
    let angles = [0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4].map(Setting::new);
    let e = estimate_chsh(&ModelId::Rgrwf, &ModelParams::default(), angles, N, 105)?;
    Ok((
        e.value.abs() >= CHSH_MIN,
        format!("S = {:.4} +- {:.4}", e.value, e.std_error),
    ))
}

fn no_signalling() -> Outcome {
    let params = ModelParams::default();
    let distant = [0.0, FRAC_PI_4, FRAC_PI_2];
    let mut gap = 0.0f64;
    let mut p_min = 1.0f64;
    for side in [Side::A, Side::B] {
        let mut rows = Vec::new();
        for (k, &d) in distant.iter().enumerate() {
            let s = match side {
                Side::A => SettingPair::new(0.0, d),
                Side::B => SettingPair::new(d, 0.0),
            };
            let c = outcome_counts(
                &ModelId::Rgrwf,
                &params,
                s,
                Frame::lab(),
                N,
                seed::derive(106, &[side.index() as u64, k as u64]),
            )?;
            rows.push(marginal(&c, side));
        }
        let plus: Vec<f64> = rows
            .iter()
            .map(|r| r[0] as f64 / (r[0] + r[1]) as f64)
            .collect();
        for x in &plus {
            for y in &plus {
                gap = gap.max((x - y).abs());
            }
        }
        p_min = p_min.min(homogeneity(&rows).p_value);
    }
    // two homogeneity tests share the significance level
    Ok((
        gap < MARGINAL_GAP && p_min > ALPHA / 2.0,
        format!("max gap = {gap:.5}, min p = {p_min:.4}"),
    ))
}

fn classification_table() -> Outcome {
    use Verdict::{Fail, Pass};
    let params = ModelParams::default();
    let rows = [
        (ModelId::Rgrwf, [Pass, Pass, Fail, Pass, Pass]),
        (ModelId::PreferredFrame, [Pass, Pass, Fail, Fail, Fail]),
        (ModelId::LocalHv, [Fail, Pass, Pass, Pass, Pass]),
    ];
    let mut mismatches = Vec::new();
    for s in SEEDS {
        let mut c = ClassifierConfig::for_params(&params);
        c.n = N;
        c.master_seed = s;
        for (model, row) in rows {
            let r = classify(&model, &params, &c)?;
            if r.verdicts() != row.map(Some) {
                mismatches.push(format!("{model} seed {s}: {}", r.row()));
            }
        }
    }
    let detail = if mismatches.is_empty() {
        format!("3 rows stable over {} seeds", SEEDS.len())
    } else {
        mismatches.join("; ")
    };
    Ok((mismatches.is_empty(), detail))
}

fn local_bound() -> Outcome {
    let cert = no_effectively_causal_nonlocal_determinism_check(&CertificateConfig::default())?;
    let exact = cert.levels.len() == 3 && cert.levels.iter().all(|l| l.max_chsh == 2.0);

    let angles = [0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4].map(Setting::new);
    let pure = enumerate_strategies(&angles[..2], &angles[2..], 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut worst = 0.0f64;
    for _ in 0..MIXTURES {
        let k = 2 + (rng.next_u32() as usize) % (pure.len() - 1);
        let picked: Vec<_> = (0..k)
            .map(|_| pure[rng.next_u32() as usize % pure.len()].clone())
            .collect();
        let raw: Vec<f64> = (0..k)
            .map(|_| (rng.next_u32() % 1000) as f64 + 1.0)
            .collect();
        let total: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
        w[0] = 1.0 - w[1..].iter().sum::<f64>();
        worst = worst.max(chsh_of(&StrategyMixture::new(picked, w)?, angles)?.abs());
    }
    let per_k: Vec<String> = cert
        .levels
        .iter()
        .map(|l| format!("k={} {}", l.k, l.max_chsh))
        .collect();
    Ok((
        exact && worst <= 2.0 + LOCAL_BOUND_TOL,
        format!("{}; mixtures max {worst:.12}", per_k.join(", ")),
    ))
}

fn epr_filter() -> Outcome {
    let cert = no_effectively_causal_nonlocal_determinism_check(&CertificateConfig {
        k_max: 0,
        ..CertificateConfig::default()
    })?;
    let w = &cert.wigner;
    let quantum =
        (w.quantum_lhs - 0.375).abs() < PROB_TOL && (w.quantum_rhs - 0.25).abs() < PROB_TOL;
    Ok((
        cert.epr_filter.survivor_count == 8
            && w.strategies_checked == 8
            && w.all_satisfied
            && w.quantum_violates
            && quantum,
        format!(
            "{} survivors, quantum {:.4} > {:.4}",
            cert.epr_filter.survivor_count, w.quantum_lhs, w.quantum_rhs
        ),
    ))
}

fn janus_asymmetry() -> Outcome {
    let params = ModelParams::default();
    let native = frame(-1.0);
    let janus = JanusRealization::with_default_budget(native, params.clone());
    let s = SettingPair::new(0.0, FRAC_PI_3);
    let mut counts = OutcomeCounts::default();
    let mut starved = 0u64;
    for i in 0..N {
        let bits = BitString::random(janus.bit_budget(), seed::mix(108, i));
        match janus.janus_run(s, &bits) {
            Err(ModelError::BitsExhausted { .. }) => starved += 1,
            run => counts.record(run)?,
        }
    }
    let fit = goodness_of_fit(&counts.counts, &born_joint(params.state(), s).as_array());
    let rg = outcome_counts(&ModelId::Rgrwf, &params, s, native, N, 109)?;
    let same = homogeneity(&[counts.counts.to_vec(), rg.counts.to_vec()]);

    let probe = InfluenceProbe::default();
    let in_native = find_influence_witness(&janus, native, probe, NATIVE_SAMPLES, 110)?;
    let flipped = past_influence_probe(&janus, frame(1.0), probe, FLIPPED_SAMPLES, 111)?;
    let local = LocalHvRealization::with_default_budget(native, params);
    let mut local_witness = false;
    for (k, r) in [-1.0, 1.0].into_iter().enumerate() {
        local_witness |=
            find_influence_witness(&local, frame(r), probe, NATIVE_SAMPLES, 112 + k as u64)?
                .is_some();
    }
    let ok = fit.p_value > ALPHA / 2.0
        && same.p_value > ALPHA / 2.0
        && in_native.is_none()
        && flipped.is_some()
        && !local_witness;
    Ok((
        ok,
        format!(
            "born p = {:.4}, vs rgrwf p = {:.4}, starved {starved}, native witness {}, flipped witness at sample {}, local_hv witness {}",
            fit.p_value,
            same.p_value,
            if in_native.is_some() { "found" } else { "none" },
            flipped.map_or("none".to_owned(), |w| w.sample.to_string()),
            if local_witness { "found" } else { "none" },
        ),
    ))
}

fn random_state(rng: &mut ChaCha8Rng, unit: &mut impl FnMut(&mut ChaCha8Rng) -> f64) -> PureState {
    loop {
        let v: Vec<f64> = (0..8).map(|_| 2.0 * unit(rng) - 1.0).collect();
        if v.iter().map(|x| x * x).sum::<f64>() > 1e-3 {
            let amps = [0, 1, 2, 3].map(|i| Complex64::new(v[2 * i], v[2 * i + 1]));
            return PureState::normalized(amps).expect("non-degenerate");
        }
    }
}

fn analytic_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(120);
    let mut unit = |r: &mut ChaCha8Rng| (r.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut failures: Vec<&str> = Vec::new();
    let mut check = |ok: bool, what: &'static str| {
        if !ok && !failures.contains(&what) {
            failures.push(what);
        }
    };
    for _ in 0..INVARIANT_CASES {
        let psi = random_state(&mut rng, &mut unit);
        let s = SettingPair::new(TAU * unit(&mut rng), TAU * unit(&mut rng));
        let joint = born_joint(&psi, s);
        check(
            (joint.as_array().iter().sum::<f64>() - 1.0).abs() < PROB_TOL,
            "normalization",
        );

        let ma = born_marginal(&psi, Side::A, s.a);
        let mb = born_marginal(&psi, Side::B, s.b);
        for alpha in Channel::BOTH {
            for beta in Channel::BOTH {
                let p = joint.get(alpha, beta);
                if let Ok(cond) = born_conditional(&psi, s, Side::A, alpha) {
                    check(
                        (ma[alpha.index()] * cond[beta.index()] - p).abs() < PROB_TOL,
                        "chain rule",
                    );
                }
                if let (Ok(ab), Ok(ba)) = (
                    born_conditional(&psi, s, Side::A, alpha),
                    born_conditional(&psi, s, Side::B, beta),
                ) {
                    let lhs = ma[alpha.index()] * ab[beta.index()];
                    let rhs = mb[beta.index()] * ba[alpha.index()];
                    check((lhs - rhs).abs() < PROB_TOL, "conditioning symmetry");
                }
            }
        }

        let (r1, r2) = (6.0 * unit(&mut rng) - 3.0, 6.0 * unit(&mut rng) - 3.0);
        let e = Event::new(100.0 * unit(&mut rng) - 50.0, 100.0 * unit(&mut rng) - 50.0);
        let e2 = Event::new(100.0 * unit(&mut rng) - 50.0, 100.0 * unit(&mut rng) - 50.0);
        let twice = boost(boost(e, &frame(r1)), &frame(r2));
        let once = boost(e, &frame(r1 + r2));
        let scale = 1.0 + e.t.abs().max(e.x.abs()) * (r1.abs() + r2.abs()).exp();
        check(
            (twice.t - once.t).abs() < GEOM_TOL * scale
                && (twice.x - once.x).abs() < GEOM_TOL * scale,
            "boost composition",
        );
        let f = frame(r1);
        let (i0, i1) = (interval(e, e2), interval(boost(e, &f), boost(e2, &f)));
        check(
            (i0 - i1).abs() < GEOM_TOL * (1.0 + i0.abs()) * r1.abs().exp().powi(2),
            "interval invariance",
        );
    }
    let detail = if failures.is_empty() {
        format!("{INVARIANT_CASES} random cases")
    } else {
        format!("violated: {}", failures.join(", "))
    };
    Ok((failures.is_empty(), detail))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("first-flash balance", first_flash_balance),
        ("QF agreement", qf_agreement),
        ("frame covariance", frame_covariance),
        ("nonlocality", nonlocality),
        ("no-signalling", no_signalling),
        ("classification table", classification_table),
        ("local bound certificate", local_bound),
        ("EPR filter and Wigner", epr_filter),
        ("Janus asymmetry", janus_asymmetry),
        ("analytic micro-suite", analytic_invariants),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} {:>2} {name}: {detail} ({secs:.1} s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        );
        failed += usize::from(!ok);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
