//! Parallel, reproducible collection of experiment runs.
//!
//! Run `i` of a batch always uses the seed `seed::mix(master_seed, i)` and
//! records are returned in index order, so the result does not depend on the
//! number of worker threads.

use flashlab_core::models::{ChannelDraw, ExperimentRun, ModelError, OutcomeCounts};
use flashlab_core::{seed, Frame, ModelParams, Outcome, OutcomeModel, SettingPair, Side};
use rayon::prelude::*;

/// What the classifier needs from one conclusive run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub outcome: Outcome,
    /// Side whose outcome-fixing flash came first in the run's frame.
    pub leading: Side,
    pub draws: [ChannelDraw; 2],
    /// Whether the very first flash of the run was in region A.
    pub first_flash_in_a: bool,
}

impl RunSummary {
    fn of(run: &ExperimentRun) -> Self {
        RunSummary {
            outcome: run.outcome,
            leading: run.leading_side(&run.frame),
            draws: run.first_draws,
            first_flash_in_a: run.flashes.first().map(|f| f.region) == Some(Side::A),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    /// `None` for an inconclusive run.
    pub result: Option<RunSummary>,
}

/// All runs of one model at one settings pair and frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub model: String,
    pub params: ModelParams,
    pub settings: SettingPair,
    pub frame: Frame,
    pub master_seed: u64,
    pub records: Vec<RunRecord>,
}

impl SampleSet {
    pub fn collect<M: OutcomeModel + Sync + ?Sized>(
        model: &M,
        params: &ModelParams,
        settings: SettingPair,
        frame: Frame,
        n: u64,
        master_seed: u64,
    ) -> Result<Self, ModelError> {
        let records = (0..n)
            .into_par_iter()
            .map(|i| {
                let seed = seed::mix(master_seed, i);
                match model.run(settings, frame, seed, params) {
                    Ok(run) => Ok(RunRecord {
                        seed,
                        result: Some(RunSummary::of(&run)),
                    }),
                    Err(ModelError::Inconclusive { .. }) => Ok(RunRecord { seed, result: None }),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SampleSet {
            model: model.name().to_owned(),
            params: params.clone(),
            settings,
            frame,
            master_seed,
            records,
        })
    }

    pub fn n(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn conclusive(&self) -> impl Iterator<Item = &RunSummary> {
        self.records.iter().filter_map(|r| r.result.as_ref())
    }

    pub fn inconclusive_fraction(&self) -> f64 {
        let bad = self.records.iter().filter(|r| r.result.is_none()).count();
        bad as f64 / self.records.len().max(1) as f64
    }

    pub fn counts(&self) -> OutcomeCounts {
        let mut c = OutcomeCounts::default();
        for r in &self.records {
            match &r.result {
                Some(s) => {
                    c.counts[s.outcome.index()] += 1;
                    c.first_in_a += u64::from(s.first_flash_in_a);
                }
                None => c.inconclusive += 1,
            }
        }
        c
    }
}

/// Joint outcome counts only, without keeping per-run records.
pub fn outcome_counts<M: OutcomeModel + Sync + ?Sized>(
    model: &M,
    params: &ModelParams,
    settings: SettingPair,
    frame: Frame,
    n: u64,
    master_seed: u64,
) -> Result<OutcomeCounts, ModelError> {
    if n == 0 {
        return Err(ModelError::NoRuns);
    }
    let counts = (0..n)
        .into_par_iter()
        .try_fold(OutcomeCounts::default, |mut acc, i| {
            acc.record(model.run(settings, frame, seed::mix(master_seed, i), params))?;
            Ok::<_, ModelError>(acc)
        })
        .try_reduce(OutcomeCounts::default, |x, y| Ok(x.merge(y)))?;
    if counts.conclusive() == 0 {
        return Err(ModelError::AllInconclusive(n));
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use flashlab_core::models::outcome_distribution;
    use flashlab_core::ModelId;

    #[test]
    fn parallel_counts_equal_sequential_counts() {
        let params = ModelParams::default();
        let s = SettingPair::new(0.0, 1.0);
        let f = Frame::new(0.5).unwrap();
        for model in ModelId::ALL {
            let seq = outcome_distribution(&model, s, f, &params, 3000, 9).unwrap();
            let par = outcome_counts(&model, &params, s, f, 3000, 9).unwrap();
            let set = SampleSet::collect(&model, &params, s, f, 3000, 9).unwrap();
            assert_eq!(seq, par);
            assert_eq!(seq, set.counts());
            assert_eq!(set.n(), 3000);
        }
    }
}
