//! Pearson chi-square tests and normal tails.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Expected counts below this are treated as structural zeros.
const ZERO_EXPECTED: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquare {
    fn from_statistic(statistic: f64, dof: usize) -> Self {
        let p_value = if statistic.is_infinite() {
            0.0
        } else if dof == 0 {
            1.0
        } else {
            ChiSquared::new(dof as f64)
                .expect("positive dof")
                .sf(statistic)
        };
        ChiSquare {
            statistic,
            dof,
            p_value,
        }
    }
}

/// Goodness of fit of `observed` counts to cell probabilities `expected`.
///
/// Cells with zero expectation are dropped from the statistic; an observation
/// in such a cell is an outright rejection (infinite statistic, p = 0).
pub fn goodness_of_fit(observed: &[u64], expected: &[f64]) -> ChiSquare {
    assert_eq!(observed.len(), expected.len(), "cell count mismatch");
    let n: u64 = observed.iter().sum();
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(expected) {
        let e = p * n as f64;
        if e < ZERO_EXPECTED {
            if o > 0 {
                return ChiSquare::from_statistic(f64::INFINITY, 0);
            }
            continue;
        }
        cells += 1;
        statistic += (o as f64 - e).powi(2) / e;
    }
    ChiSquare::from_statistic(statistic, cells.saturating_sub(1))
}

/// Test that the rows of a contingency table share one distribution.
/// Empty columns and empty rows are dropped.
pub fn homogeneity(table: &[Vec<u64>]) -> ChiSquare {
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
    let width = rows.first().map_or(0, |r| r.len());
    let col_totals: Vec<u64> = (0..width)
        .map(|j| rows.iter().map(|r| r[j]).sum())
        .collect();
    let cols: Vec<usize> = (0..width).filter(|&j| col_totals[j] > 0).collect();
    if rows.len() < 2 || cols.len() < 2 {
        return ChiSquare::from_statistic(0.0, 0);
    }
    let total: u64 = col_totals.iter().sum();
    let mut statistic = 0.0;
    for r in &rows {
        let row_total: u64 = r.iter().sum();
        for &j in &cols {
            let e = row_total as f64 * col_totals[j] as f64 / total as f64;
            statistic += (r[j] as f64 - e).powi(2) / e;
        }
    }
    ChiSquare::from_statistic(statistic, (rows.len() - 1) * (cols.len() - 1))
}

/// `P(Z > z)` for a standard normal `Z`.
pub fn normal_sf(z: f64) -> f64 {
    Normal::standard().sf(z)
}
