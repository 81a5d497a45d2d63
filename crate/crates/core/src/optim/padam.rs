use serde::{Deserialize, Serialize};

use super::{adam_step, AdamState, ChannelSpec, HyperParams};
use crate::error::{Error, Result};
use crate::params::ParamVector;
use crate::prng::RngStream;
use crate::problems::StochasticObjective;

/// Parallel averaged Adam.
///
/// `raw` is the plain Adam iterate. Each channel is an exponential moving
/// average of `raw` with its own weight schedule. Channels never feed back
/// into `raw`, so the raw trajectory is exactly that of standalone Adam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PadamState {
    adam: AdamState,
    raw: ParamVector,
    channels: Vec<ParamVector>,
    specs: Vec<ChannelSpec>,
    /// 1-based index of the last selected channel.
    best_index: usize,
}

impl PadamState {
    /// All channels start at `initial`.
    pub fn new(initial: ParamVector, specs: Vec<ChannelSpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Usage("PADAM needs at least one channel".into()));
        }
        Ok(PadamState {
            adam: AdamState::new(initial.len()),
            channels: vec![initial.clone(); specs.len()],
            raw: initial,
            specs,
            best_index: 1,
        })
    }

    /// Fresh Adam moments with explicitly placed channel iterates.
    pub fn from_channels(
        raw: ParamVector,
        channels: Vec<ParamVector>,
        specs: Vec<ChannelSpec>,
    ) -> Result<Self> {
        if specs.is_empty() || channels.len() != specs.len() {
            return Err(Error::shape(
                "padam channels",
                specs.len().max(1),
                channels.len(),
            ));
        }
        if let Some(bad) = channels.iter().find(|c| c.len() != raw.len()) {
            return Err(Error::shape("padam channel", raw.len(), bad.len()));
        }
        Ok(PadamState {
            adam: AdamState::new(raw.len()),
            raw,
            channels,
            specs,
            best_index: 1,
        })
    }

    pub fn adam(&self) -> &AdamState {
        &self.adam
    }

    pub fn raw(&self) -> &ParamVector {
        &self.raw
    }

    pub fn channels(&self) -> &[ParamVector] {
        &self.channels
    }

    pub fn specs(&self) -> &[ChannelSpec] {
        &self.specs
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn best_index(&self) -> usize {
        self.best_index
    }

    /// The currently selected channel iterate.
    pub fn selected(&self) -> &ParamVector {
        &self.channels[self.best_index - 1]
    }

    pub fn steps(&self) -> u64 {
        self.adam.n
    }
}

/// `delta * channel + (1 - delta) * current`, in place.
pub fn ema_update(channel: &mut [f64], current: &[f64], delta: f64) -> Result<()> {
    if channel.len() != current.len() {
        return Err(Error::shape("ema update", channel.len(), current.len()));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::ScheduleDomain { step: 0, delta });
    }
    if delta == 0.0 {
        channel.copy_from_slice(current);
    } else if delta < 1.0 {
        let keep = 1.0 - delta;
        for (c, x) in channel.iter_mut().zip(current) {
            *c = delta * *c + keep * x;
        }
    }
    Ok(())
}

/// 1-based argmin over the finite losses; ties go to the lowest index.
pub fn select_channel(losses: &[f64]) -> Result<usize> {
    if losses.is_empty() {
        return Err(Error::Selection("no channels"));
    }
    let mut best: Option<(usize, f64)> = None;
    for (k, &loss) in losses.iter().enumerate() {
        if !loss.is_finite() {
            continue;
        }
        match best {
            Some((_, b)) if loss >= b => {}
            _ => best = Some((k, loss)),
        }
    }
    best.map(|(k, _)| k + 1)
        .ok_or(Error::Selection("every channel loss is non-finite"))
}

/// Advances the underlying Adam iterate with `grad` (evaluated at `raw`), then
/// folds the new iterate into every channel.
pub fn padam_step(state: &mut PadamState, grad: &[f64], hp: &HyperParams) -> Result<()> {
    adam_step(&mut state.adam, &mut state.raw, grad, hp)?;
    let n = state.adam.n;
    for (channel, spec) in state.channels.iter_mut().zip(&state.specs) {
        let delta = spec.delta(n);
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::ScheduleDomain { step: n, delta });
        }
        ema_update(channel, &state.raw, delta)?;
    }
    Ok(())
}

/// Scores each channel on its own fresh batch of `batch_size` samples (the
/// batches are drawn one after another, so they never share samples) and
/// records the winner in `best_index`. Returns the per-channel losses.
pub fn evaluate_and_select(
    state: &mut PadamState,
    objective: &dyn StochasticObjective,
    stream: &mut RngStream,
    batch_size: usize,
) -> Result<Vec<f64>> {
    if batch_size == 0 {
        return Err(Error::Usage(
            "selection batch size must be at least 1".into(),
        ));
    }
    let losses: Vec<f64> = state
        .channels
        .iter()
        .map(|channel| {
            let batch = objective.sample_batch(stream, batch_size);
            objective.loss(channel, &batch).unwrap_or(f64::NAN)
        })
        .collect();
    state.best_index = select_channel(&losses)?;
    Ok(losses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::{padam3_channels, ChannelKind};

    fn constant(c: f64, horizon: u64) -> ChannelSpec {
        ChannelSpec::new(ChannelKind::Constant { c }, horizon).unwrap()
    }

    #[test]
    fn ema_limits_and_midpoint() {
        let mut ch = vec![2.0];
        ema_update(&mut ch, &[4.0], 0.5).unwrap();
        assert_eq!(ch, vec![3.0]);
        ema_update(&mut ch, &[10.0], 1.0).unwrap();
        assert_eq!(ch, vec![3.0]);
        ema_update(&mut ch, &[-0.0], 0.0).unwrap();
        assert_eq!(ch[0].to_bits(), (-0.0f64).to_bits());
        assert!(ema_update(&mut ch, &[1.0, 2.0], 0.5).is_err());
        assert!(ema_update(&mut ch, &[1.0], 1.5).is_err());
    }

    #[test]
    fn selection_rules() {
        assert_eq!(select_channel(&[3.0, 1.0, 2.0]).unwrap(), 2);
        assert_eq!(select_channel(&[5.0, 5.0, 5.0]).unwrap(), 1);
        assert_eq!(select_channel(&[f64::NAN, 5.0]).unwrap(), 2);
        assert_eq!(select_channel(&[f64::INFINITY, 7.0, 7.0]).unwrap(), 2);
        assert!(select_channel(&[f64::NAN, f64::NAN]).is_err());
        assert!(select_channel(&[]).is_err());
    }

    #[test]
    fn fresh_state_shape() {
        let st = PadamState::new(vec![1.0, 2.0].into(), padam3_channels(10).unwrap()).unwrap();
        assert_eq!(st.channel_count(), 3);
        assert!(st.channels().iter().all(|c| c.as_slice() == [1.0, 2.0]));
        assert_eq!(st.best_index(), 1);
        assert!(PadamState::new(vec![0.0].into(), vec![]).is_err());
    }

    #[test]
    fn single_step_constant_channel() {
        let theta0 = vec![1.0, -2.0];
        let mut st = PadamState::new(theta0.clone().into(), vec![constant(0.999, 10)]).unwrap();
        padam_step(&mut st, &[0.5, 0.25], &HyperParams::default()).unwrap();
        let theta1 = st.raw().clone();
        for i in 0..2 {
            let expected = 0.999 * theta0[i] + (1.0 - 0.999) * theta1[i];
            assert_eq!(st.channels()[0][i], expected);
        }
    }

    #[test]
    fn zero_delta_channel_tracks_raw() {
        let mut st = PadamState::new(vec![0.3, 0.1].into(), vec![constant(0.0, 50)]).unwrap();
        for k in 0..50 {
            let g = [(k as f64).sin(), (k as f64 * 0.3).cos()];
            padam_step(&mut st, &g, &HyperParams::default()).unwrap();
            assert_eq!(st.channels()[0], *st.raw());
        }
    }
}
