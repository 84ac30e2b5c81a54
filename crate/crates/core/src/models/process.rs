//! The flash process shared by every model.
//!
//! 1. Flash counts per region: Poisson with mean `rate × duration`, by
//!    inversion.
//! 2. Flash coordinates: uniform in each region's lab box.
//! 3. Channel assignment in the order of a *processing* frame. Under the
//!    quantum law a flash samples its channel from the current state's
//!    marginal for its region's setting and then collapses the state; under
//!    the local law channels are read off the shared hidden variable.
//! 4. Flashes are reported in the order of the *reporting* frame.

use alloc::vec::Vec;

use super::draws::{poisson_inverse, Draw, Uniforms};
use super::local_hv::HiddenVariable;
use super::{ChannelDraw, ExperimentRun, Flash, ModelError, ModelParams};
use crate::minkowski::{Event, Frame, TIE_TOLERANCE};
use crate::quantum::{born_marginal, collapse_softened, Channel, Outcome, SettingPair, Side};

#[derive(Debug, Clone, Copy)]
pub(crate) enum ChannelLaw {
    /// Sequential quantum conditioning in the temporal order of the frame.
    Quantum { processing: Frame },
    /// Channels from the built-in local strategy; no state is carried.
    Local,
}

struct Pending {
    event: Event,
    region: Side,
    generated: usize,
}

/// Sorts into `frame`'s temporal order. Cross-region pairs closer than the
/// tie tolerance are put A first; returns how many such ties occurred.
fn sort_in_frame(frame: &Frame, items: &mut [Pending]) -> u32 {
    let key = |p: &Pending| (frame.time_of(p.event), p.region, p.generated);
    items.sort_by(|p, q| {
        let (tp, rp, gp) = key(p);
        let (tq, rq, gq) = key(q);
        tp.total_cmp(&tq).then(rp.cmp(&rq)).then(gp.cmp(&gq))
    });
    let mut ties = 0;
    for i in 1..items.len() {
        let (t0, r0, _) = key(&items[i - 1]);
        let (t1, r1, _) = key(&items[i]);
        if r0 != r1 && (t1 - t0).abs() <= TIE_TOLERANCE {
            ties += 1;
            if r1 < r0 {
                items.swap(i - 1, i);
            }
        }
    }
    ties
}

pub(crate) fn simulate<U: Uniforms>(
    law: ChannelLaw,
    settings: SettingPair,
    report: Frame,
    params: &ModelParams,
    seed: Option<u64>,
    uniforms: &mut U,
) -> Result<ExperimentRun, ModelError> {
    let mut counts = [0u32; 2];
    for side in Side::BOTH {
        let mean = params.flash_rate() * params.region(side).duration();
        counts[side.index()] = poisson_inverse(mean, uniforms.uniform(Draw::FlashCount(side))?);
    }

    let mut pending = Vec::with_capacity((counts[0] + counts[1]) as usize);
    for side in Side::BOTH {
        let region = params.region(side);
        let (t0, t1) = region.t_range();
        let (x0, x1) = region.x_range();
        for i in 0..counts[side.index()] as usize {
            let t = t0 + (t1 - t0) * uniforms.uniform(Draw::FlashTime(side, i))?;
            let x = x0 + (x1 - x0) * uniforms.uniform(Draw::FlashPosition(side, i))?;
            pending.push(Pending {
                event: Event::new(t, x),
                region: side,
                generated: pending.len(),
            });
        }
    }

    let processing = match law {
        ChannelLaw::Quantum { processing } => processing,
        ChannelLaw::Local => report,
    };
    let ties = sort_in_frame(&processing, &mut pending);

    let hidden = match law {
        ChannelLaw::Local => Some(HiddenVariable::from_uniforms(
            uniforms.uniform(Draw::HiddenAngle)?,
            uniforms.uniform(Draw::StrategySelector)?,
        )),
        ChannelLaw::Quantum { .. } => None,
    };

    let mut state = *params.state();
    let mut state_trace = Vec::new();
    let mut first: [Option<(Channel, ChannelDraw)>; 2] = [None, None];
    let mut per_region = [0u32; 2];
    let mut flashes = Vec::with_capacity(pending.len());
    for p in &pending {
        let side = p.region;
        let setting = settings.side(side);
        let index = per_region[side.index()];
        let (channel, p_plus) = match &hidden {
            Some(hv) => {
                let c = hv.response(side, setting);
                (c, if c == Channel::Plus { 1.0 } else { 0.0 })
            }
            None => {
                let marginal = born_marginal(&state, side, setting);
                let u = uniforms.uniform(Draw::Channel(side, index as usize))?;
                let c = if u < marginal[0] {
                    Channel::Plus
                } else {
                    Channel::Minus
                };
                state = collapse_softened(&state, side, setting, c, params.epsilon())?;
                state_trace.push(state);
                (c, marginal[0])
            }
        };
        if first[side.index()].is_none() {
            let conditioned_on = match law {
                ChannelLaw::Quantum { .. } => first[side.other().index()].map(|(c, _)| c),
                ChannelLaw::Local => None,
            };
            first[side.index()] = Some((
                channel,
                ChannelDraw {
                    p_plus,
                    conditioned_on,
                },
            ));
        }
        per_region[side.index()] += 1;
        flashes.push(Flash {
            event: p.event,
            region: side,
            channel,
            index,
        });
    }

    if report != processing {
        let mut reordered: Vec<Pending> = pending
            .iter()
            .enumerate()
            .map(|(i, p)| Pending {
                event: p.event,
                region: p.region,
                generated: i,
            })
            .collect();
        sort_in_frame(&report, &mut reordered);
        flashes = reordered.iter().map(|p| flashes[p.generated]).collect();
    }

    match first {
        [Some((alpha, draw_a)), Some((beta, draw_b))] => Ok(ExperimentRun {
            settings,
            frame: report,
            seed,
            flashes,
            outcome: Outcome::new(alpha, beta),
            state_trace,
            first_draws: [draw_a, draw_b],
            ties,
        }),
        _ => Err(ModelError::Inconclusive { flashes }),
    }
}
