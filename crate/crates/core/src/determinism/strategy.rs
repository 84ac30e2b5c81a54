//! Deterministic strategies with shared randomness "given in advance".
//!
//! A strategy answers each side's setting with a fixed function of that
//! setting and a shared bit string of `k` bits; shared randomness is the
//! uniform average over all `2^k` strings, and a [`StrategyMixture`] adds
//! arbitrary convex weights on top.

use alloc::vec::Vec;

use super::DeterminismError;
use crate::quantum::{
    born_joint, chsh_combination, Channel, PureState, Setting, SettingPair, Side,
};

/// Largest `k` accepted anywhere in this module.
pub const MAX_K_BITS: u32 = 10;
/// Largest number of table entries per side in an enumeration.
pub const MAX_ENTRIES_PER_SIDE: u32 = 20;
/// Largest total number of table entries (both sides) in an enumeration,
/// i.e. at most 2^20 enumerated objects.
pub const MAX_ENTRIES_TOTAL: u32 = 20;

/// Settings are matched up to this many radians.
const ANGLE_TOL: f64 = 1e-12;

/// `table_a[(i << k) | bits]` is A's answer to `settings_a[i]`; same for B.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DeterministicStrategy {
    settings_a: Vec<Setting>,
    settings_b: Vec<Setting>,
    k_bits: u32,
    table_a: Vec<Channel>,
    table_b: Vec<Channel>,
}

impl DeterministicStrategy {
    pub fn new(
        settings_a: Vec<Setting>,
        settings_b: Vec<Setting>,
        k_bits: u32,
        table_a: Vec<Channel>,
        table_b: Vec<Channel>,
    ) -> Result<Self, DeterminismError> {
        if k_bits > MAX_K_BITS {
            return Err(DeterminismError::KBitsTooLarge(k_bits));
        }
        if table_a.len() != settings_a.len() << k_bits
            || table_b.len() != settings_b.len() << k_bits
        {
            return Err(DeterminismError::TableNotTotal);
        }
        Ok(DeterministicStrategy {
            settings_a,
            settings_b,
            k_bits,
            table_a,
            table_b,
        })
    }

    pub fn k_bits(&self) -> u32 {
        self.k_bits
    }

    pub fn settings(&self, side: Side) -> &[Setting] {
        match side {
            Side::A => &self.settings_a,
            Side::B => &self.settings_b,
        }
    }

    /// Answer of `side` to its `setting_index`-th setting given shared bits.
    pub fn response(&self, side: Side, setting_index: usize, bits: usize) -> Channel {
        let table = match side {
            Side::A => &self.table_a,
            Side::B => &self.table_b,
        };
        table[(setting_index << self.k_bits) | bits]
    }

    fn bit_strings(&self) -> usize {
        1 << self.k_bits
    }
}

/// Convex combination of strategies defined on the same settings.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyMixture {
    strategies: Vec<DeterministicStrategy>,
    weights: Vec<f64>,
}

impl StrategyMixture {
    pub fn new(
        strategies: Vec<DeterministicStrategy>,
        weights: Vec<f64>,
    ) -> Result<Self, DeterminismError> {
        if strategies.is_empty() || strategies.len() != weights.len() {
            return Err(DeterminismError::InvalidWeights);
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w.is_nan() || w < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(DeterminismError::InvalidWeights);
        }
        let first = &strategies[0];
        if strategies
            .iter()
            .any(|s| s.settings_a != first.settings_a || s.settings_b != first.settings_b)
        {
            return Err(DeterminismError::SettingMismatch);
        }
        Ok(StrategyMixture {
            strategies,
            weights,
        })
    }

    pub fn strategies(&self) -> &[DeterministicStrategy] {
        &self.strategies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Outcome statistics of a local model, by setting indices.
pub trait LocalCorrelations {
    fn settings(&self, side: Side) -> &[Setting];

    /// `E(a_i, b_j)`
    fn correlator(&self, a_index: usize, b_index: usize) -> f64;

    /// `P(α = +1, β = +1 | a_i, b_j)`
    fn p_plus_plus(&self, a_index: usize, b_index: usize) -> f64;
}

impl LocalCorrelations for DeterministicStrategy {
    fn settings(&self, side: Side) -> &[Setting] {
        DeterministicStrategy::settings(self, side)
    }

    fn correlator(&self, a_index: usize, b_index: usize) -> f64 {
        let n = self.bit_strings();
        let sum: i32 = (0..n)
            .map(|bits| {
                i32::from(
                    self.response(Side::A, a_index, bits).sign()
                        * self.response(Side::B, b_index, bits).sign(),
                )
            })
            .sum();
        f64::from(sum) / n as f64
    }

    fn p_plus_plus(&self, a_index: usize, b_index: usize) -> f64 {
        let n = self.bit_strings();
        let hits = (0..n)
            .filter(|&bits| {
                self.response(Side::A, a_index, bits) == Channel::Plus
                    && self.response(Side::B, b_index, bits) == Channel::Plus
            })
            .count();
        hits as f64 / n as f64
    }
}

impl LocalCorrelations for StrategyMixture {
    fn settings(&self, side: Side) -> &[Setting] {
        self.strategies[0].settings(side)
    }

    fn correlator(&self, a_index: usize, b_index: usize) -> f64 {
        self.strategies
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| w * s.correlator(a_index, b_index))
            .sum()
    }

    fn p_plus_plus(&self, a_index: usize, b_index: usize) -> f64 {
        self.strategies
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| w * s.p_plus_plus(a_index, b_index))
            .sum()
    }
}

fn find_setting(list: &[Setting], target: Setting) -> Option<usize> {
    list.iter()
        .position(|s| s.same_direction(target, ANGLE_TOL))
}

/// All strategies on the given settings with `k_bits` shared bits, ordered by
/// `(A table, B table)` read as binary numbers with `+1 ↦ 0`.
pub fn enumerate_strategies(
    settings_a: &[Setting],
    settings_b: &[Setting],
    k_bits: u32,
) -> Result<Vec<DeterministicStrategy>, DeterminismError> {
    if k_bits > MAX_K_BITS {
        return Err(DeterminismError::KBitsTooLarge(k_bits));
    }
    let entries_a = (settings_a.len() as u32) << k_bits;
    let entries_b = (settings_b.len() as u32) << k_bits;
    if entries_a > MAX_ENTRIES_PER_SIDE
        || entries_b > MAX_ENTRIES_PER_SIDE
        || entries_a + entries_b > MAX_ENTRIES_TOTAL
    {
        return Err(DeterminismError::TooLarge {
            required: 1u128 << (entries_a + entries_b),
        });
    }
    let tables_a = all_tables(entries_a);
    let tables_b = all_tables(entries_b);
    let mut out = Vec::with_capacity(tables_a.len() * tables_b.len());
    for ta in &tables_a {
        for tb in &tables_b {
            out.push(DeterministicStrategy {
                settings_a: settings_a.to_vec(),
                settings_b: settings_b.to_vec(),
                k_bits,
                table_a: ta.clone(),
                table_b: tb.clone(),
            });
        }
    }
    Ok(out)
}

/// Every ±1 table with `entries` entries; entry `e` of table `m` is `-1` iff
/// bit `e` of `m` is set.
pub(crate) fn all_tables(entries: u32) -> Vec<Vec<Channel>> {
    (0u64..1 << entries)
        .map(|m| {
            (0..entries)
                .map(|e| {
                    if m >> e & 1 == 1 {
                        Channel::Minus
                    } else {
                        Channel::Plus
                    }
                })
                .collect()
        })
        .collect()
}

/// Closed-form size of [`enumerate_strategies`]: `2^(n_a 2^k) · 2^(n_b 2^k)`.
pub fn strategy_count(n_a: usize, n_b: usize, k_bits: u32) -> u128 {
    1u128 << ((n_a + n_b) << k_bits)
}

/// CHSH value `E(a,b) - E(a,b') + E(a',b) + E(a',b')` for
/// `angles = [a, a', b, b']`. The model must be defined on exactly these two
/// settings per side.
pub fn chsh_of<M: LocalCorrelations + ?Sized>(
    model: &M,
    angles: [Setting; 4],
) -> Result<f64, DeterminismError> {
    let (sa, sb) = (model.settings(Side::A), model.settings(Side::B));
    if sa.len() != 2 || sb.len() != 2 {
        return Err(DeterminismError::SettingMismatch);
    }
    let ia = [find_setting(sa, angles[0]), find_setting(sa, angles[1])];
    let ib = [find_setting(sb, angles[2]), find_setting(sb, angles[3])];
    let (Some(a0), Some(a1), Some(b0), Some(b1)) = (ia[0], ia[1], ib[0], ib[1]) else {
        return Err(DeterminismError::SettingMismatch);
    };
    if a0 == a1 || b0 == b1 {
        return Err(DeterminismError::SettingMismatch);
    }
    Ok(chsh_combination([
        model.correlator(a0, b0),
        model.correlator(a0, b1),
        model.correlator(a1, b0),
        model.correlator(a1, b1),
    ]))
}

/// Largest `|CHSH|` over a set of strategies.
pub fn max_abs_chsh(
    strategies: &[DeterministicStrategy],
    angles: [Setting; 4],
) -> Result<f64, DeterminismError> {
    strategies
        .iter()
        .try_fold(0.0f64, |m, s| Ok(m.max(chsh_of(s, angles)?.abs())))
}

/// Keeps the strategies that reproduce perfect anticorrelation at equal
/// settings: `B(θ, bits) = -A(θ, bits)` for every common `θ` and every bit
/// string.
pub fn epr_filter(
    strategies: &[DeterministicStrategy],
    common_settings: &[Setting],
) -> Result<Vec<DeterministicStrategy>, DeterminismError> {
    let mut out = Vec::new();
    for s in strategies {
        let mut pairs = Vec::with_capacity(common_settings.len());
        for &theta in common_settings {
            match (
                find_setting(&s.settings_a, theta),
                find_setting(&s.settings_b, theta),
            ) {
                (Some(i), Some(j)) => pairs.push((i, j)),
                _ => return Err(DeterminismError::MissingCommonSetting(theta.angle())),
            }
        }
        let anticorrelated = pairs.iter().all(|&(i, j)| {
            (0..s.bit_strings())
                .all(|bits| s.response(Side::A, i, bits) == s.response(Side::B, j, bits).flipped())
        });
        if anticorrelated {
            out.push(s.clone());
        }
    }
    Ok(out)
}

/// Wigner inequality `P₊₊(0, 2θ) <= P₊₊(0, θ) + P₊₊(θ, 2θ)` checked over
/// anticorrelated strategies, with the singlet's values for contrast.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct WignerReport {
    pub theta: f64,
    /// `P₊₊(0, 2θ)` of the strategy closest to violating.
    pub lhs: f64,
    /// `P₊₊(0, θ) + P₊₊(θ, 2θ)` of the same strategy.
    pub rhs: f64,
    pub quantum_lhs: f64,
    pub quantum_rhs: f64,
    pub strategies_checked: usize,
    pub all_satisfied: bool,
    pub quantum_violates: bool,
}

pub fn wigner_check<M: LocalCorrelations>(
    filtered: &[M],
    theta: f64,
) -> Result<WignerReport, DeterminismError> {
    let angles = [
        Setting::new(0.0),
        Setting::new(theta),
        Setting::new(2.0 * theta),
    ];
    let mut worst: Option<(f64, f64)> = None;
    let mut all_satisfied = true;
    for s in filtered {
        let idx = |side: Side, k: usize| {
            find_setting(s.settings(side), angles[k])
                .ok_or(DeterminismError::MissingCommonSetting(angles[k].angle()))
        };
        let lhs = s.p_plus_plus(idx(Side::A, 0)?, idx(Side::B, 2)?);
        let rhs = s.p_plus_plus(idx(Side::A, 0)?, idx(Side::B, 1)?)
            + s.p_plus_plus(idx(Side::A, 1)?, idx(Side::B, 2)?);
        all_satisfied &= lhs <= rhs + 1e-12;
        if worst.is_none_or(|(l, r)| lhs - rhs > l - r) {
            worst = Some((lhs, rhs));
        }
    }
    let singlet = PureState::singlet();
    let pp = |x: Setting, y: Setting| {
        born_joint(&singlet, SettingPair { a: x, b: y }).get(Channel::Plus, Channel::Plus)
    };
    let quantum_lhs = pp(angles[0], angles[2]);
    let quantum_rhs = pp(angles[0], angles[1]) + pp(angles[1], angles[2]);
    let (lhs, rhs) = worst.unwrap_or((0.0, 0.0));
    Ok(WignerReport {
        theta,
        lhs,
        rhs,
        quantum_lhs,
        quantum_rhs,
        strategies_checked: filtered.len(),
        all_satisfied,
        quantum_violates: quantum_lhs > quantum_rhs + 1e-12,
    })
}

/// One side's deterministic answer as a function of *both* settings and the
/// shared bits: `table[((own · n_other + other) << k) | bits]`. Such a
/// function may depend on the distant setting, i.e. signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SideFunction {
    n_own: usize,
    n_other: usize,
    k_bits: u32,
    table: Vec<Channel>,
}

impl SideFunction {
    pub fn response(&self, own: usize, other: usize, bits: usize) -> Channel {
        self.table[((own * self.n_other + other) << self.k_bits) | bits]
    }

    /// Whether some answer changes with the distant setting alone.
    pub fn depends_on_other(&self) -> bool {
        (0..self.n_own).any(|own| {
            (0..1usize << self.k_bits).any(|bits| {
                let first = self.response(own, 0, bits);
                (1..self.n_other).any(|other| self.response(own, other, bits) != first)
            })
        })
    }
}

/// Every side function on `n_own × n_other` settings with `k_bits` bits.
pub fn enumerate_side_functions(
    n_own: usize,
    n_other: usize,
    k_bits: u32,
) -> Result<Vec<SideFunction>, DeterminismError> {
    if k_bits > MAX_K_BITS {
        return Err(DeterminismError::KBitsTooLarge(k_bits));
    }
    let entries = ((n_own * n_other) as u32) << k_bits;
    if entries > MAX_ENTRIES_TOTAL {
        return Err(DeterminismError::TooLarge {
            required: 1u128 << entries,
        });
    }
    Ok(all_tables(entries)
        .into_iter()
        .map(|table| SideFunction {
            n_own,
            n_other,
            k_bits,
            table,
        })
        .collect())
}

/// CHSH of a pair of side functions on settings `[a, a']`, `[b, b']`.
pub fn side_pair_chsh(fa: &SideFunction, fb: &SideFunction) -> f64 {
    let n = 1usize << fa.k_bits;
    let e = |i: usize, j: usize| {
        let sum: i32 = (0..n)
            .map(|bits| i32::from(fa.response(i, j, bits).sign() * fb.response(j, i, bits).sign()))
            .sum();
        f64::from(sum) / n as f64
    };
    chsh_combination([e(0, 0), e(0, 1), e(1, 0), e(1, 1)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    fn chsh_angles() -> [Setting; 4] {
        [0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4].map(Setting::new)
    }

    fn two(a: f64, b: f64) -> Vec<Setting> {
        vec![Setting::new(a), Setting::new(b)]
    }

    #[test]
    fn enumeration_counts() {
        let s2 = two(0.0, 1.0);
        let s3 = vec![Setting::new(0.0), Setting::new(1.0), Setting::new(2.0)];
        assert_eq!(enumerate_strategies(&s2, &s2, 0).unwrap().len(), 16);
        assert_eq!(enumerate_strategies(&s3, &s3, 0).unwrap().len(), 64);
        assert_eq!(enumerate_strategies(&s2, &s2, 1).unwrap().len(), 256);
        assert_eq!(strategy_count(2, 2, 1), 256);
        let err = enumerate_strategies(&s3, &s3, 2).unwrap_err();
        assert_eq!(err, DeterminismError::TooLarge { required: 1 << 24 });
    }

    #[test]
    fn constant_strategy_has_chsh_two() {
        let s = DeterministicStrategy::new(
            two(0.0, FRAC_PI_2),
            two(FRAC_PI_4, 3.0 * FRAC_PI_4),
            0,
            vec![Channel::Plus; 2],
            vec![Channel::Plus; 2],
        )
        .unwrap();
        assert_eq!(chsh_of(&s, chsh_angles()).unwrap(), 2.0);
    }

    #[test]
    fn exhaustive_local_bound_is_two() {
        let sa = two(0.0, FRAC_PI_2);
        let sb = two(FRAC_PI_4, 3.0 * FRAC_PI_4);
        for k in 0..=1 {
            let all = enumerate_strategies(&sa, &sb, k).unwrap();
            assert_eq!(max_abs_chsh(&all, chsh_angles()).unwrap(), 2.0);
        }
    }

    #[test]
    fn setting_mismatch_is_reported() {
        let all = enumerate_strategies(&two(0.0, 1.0), &two(2.0, 3.0), 0).unwrap();
        assert_eq!(
            chsh_of(&all[0], chsh_angles()),
            Err(DeterminismError::SettingMismatch)
        );
        let three = enumerate_strategies(&[Setting::new(0.0)], &two(0.0, 1.0), 0).unwrap();
        assert_eq!(
            chsh_of(&three[0], chsh_angles()),
            Err(DeterminismError::SettingMismatch)
        );
    }

    #[test]
    fn epr_filter_survivors() {
        let s3 = vec![
            Setting::new(0.0),
            Setting::new(FRAC_PI_3),
            Setting::new(2.0 * FRAC_PI_3),
        ];
        let all = enumerate_strategies(&s3, &s3, 0).unwrap();
        assert_eq!(epr_filter(&all, &s3).unwrap().len(), 8);

        let s2 = two(0.0, 1.0);
        let all = enumerate_strategies(&s2, &s2, 0).unwrap();
        let kept = epr_filter(&all, &s2).unwrap();
        assert_eq!(kept.len(), 4);

        let all = enumerate_strategies(&s2, &s2, 1).unwrap();
        assert_eq!(epr_filter(&all, &s2).unwrap().len(), 16);
        assert!(matches!(
            epr_filter(&all, &[Setting::new(2.5)]),
            Err(DeterminismError::MissingCommonSetting(_))
        ));
    }

    #[test]
    fn wigner_examples() {
        let theta = FRAC_PI_3;
        let s3 = vec![
            Setting::new(0.0),
            Setting::new(theta),
            Setting::new(2.0 * theta),
        ];
        let kept = epr_filter(&enumerate_strategies(&s3, &s3, 0).unwrap(), &s3).unwrap();
        let r = wigner_check(&kept, theta).unwrap();
        assert!(r.all_satisfied);
        assert_eq!(r.strategies_checked, 8);
        assert!((r.quantum_lhs - 0.375).abs() < 1e-12);
        assert!((r.quantum_rhs - 0.25).abs() < 1e-12);
        assert!(r.quantum_violates);

        let s1 = vec![Setting::new(0.0)];
        let kept = epr_filter(&enumerate_strategies(&s1, &s1, 0).unwrap(), &s1).unwrap();
        let r = wigner_check(&kept, 0.0).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.quantum_lhs.abs() < 1e-12 && r.quantum_rhs.abs() < 1e-12);
        assert!(!r.quantum_violates);
    }

    #[test]
    fn side_functions_split_into_local_and_signalling() {
        let all = enumerate_side_functions(2, 2, 0).unwrap();
        assert_eq!(all.len(), 16);
        assert_eq!(all.iter().filter(|f| !f.depends_on_other()).count(), 4);
        let all = enumerate_side_functions(2, 2, 1).unwrap();
        assert_eq!(all.iter().filter(|f| !f.depends_on_other()).count(), 16);
    }

    #[test]
    fn signalling_pairs_reach_four() {
        let all = enumerate_side_functions(2, 2, 0).unwrap();
        let max = all
            .iter()
            .flat_map(|fa| all.iter().map(move |fb| side_pair_chsh(fa, fb).abs()))
            .fold(0.0, f64::max);
        assert_eq!(max, 4.0);
    }

    #[test]
    fn mixture_validation() {
        let all = enumerate_strategies(&two(0.0, 1.0), &two(0.0, 1.0), 0).unwrap();
        assert!(StrategyMixture::new(all[..2].to_vec(), vec![0.5, 0.6]).is_err());
        assert!(StrategyMixture::new(all[..2].to_vec(), vec![1.5, -0.5]).is_err());
        assert!(StrategyMixture::new(vec![], vec![]).is_err());
        assert!(StrategyMixture::new(all[..2].to_vec(), vec![0.25, 0.75]).is_ok());
    }
}
