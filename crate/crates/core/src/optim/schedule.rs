//! Averaging-weight schedules for the EMA channels.

use std::f64::consts::LN_10;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed form of one channel's averaging weight `delta_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelKind {
    /// `c`
    Constant { c: f64 },
    /// `1 - c * n^(-p)`
    PolynomialGap { c: f64, p: f64 },
    /// `1 - c * exp(-r * n * ln(10) / N)`
    ExpDecayGap { c: f64, r: f64 },
    /// `1 - c * n^(-p)` clamped into `[0, 1)`.
    ClampedPolynomialGap { c: f64, p: f64 },
}

/// Largest double below 1.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

impl ChannelKind {
    pub fn eval(&self, n: u64, horizon: u64) -> f64 {
        let n = n as f64;
        match *self {
            ChannelKind::Constant { c } => c,
            ChannelKind::PolynomialGap { c, p } => 1.0 - c * libm::pow(n, -p),
            ChannelKind::ExpDecayGap { c, r } => {
                1.0 - c * libm::exp(-r * n * LN_10 / horizon as f64)
            }
            ChannelKind::ClampedPolynomialGap { c, p } => {
                (1.0 - c * libm::pow(n, -p)).clamp(0.0, BELOW_ONE)
            }
        }
    }
}

/// A channel schedule bound to a planned number of steps `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    kind: ChannelKind,
    horizon: u64,
}

impl ChannelSpec {
    /// Builds the schedule and checks `delta_n` in `[0, 1)` for every
    /// `n` in `1..=horizon`.
    pub fn new(kind: ChannelKind, horizon: u64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Usage("channel horizon must be at least 1".into()));
        }
        for n in 1..=horizon {
            let delta = kind.eval(n, horizon);
            if !(0.0..1.0).contains(&delta) {
                return Err(Error::ScheduleDomain { step: n, delta });
            }
        }
        Ok(ChannelSpec { kind, horizon })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// `delta_n`. Steps past the horizon keep following the closed form.
    pub fn delta(&self, n: u64) -> f64 {
        self.kind.eval(n, self.horizon)
    }
}

/// Checked evaluation of `delta_n` for `1 <= n <= N`.
pub fn schedule_delta(spec: &ChannelSpec, n: u64) -> Result<f64> {
    if n == 0 || n > spec.horizon {
        return Err(Error::Usage(format!(
            "schedule step {n} outside 1..={}",
            spec.horizon
        )));
    }
    let delta = spec.delta(n);
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::ScheduleDomain { step: n, delta });
    }
    Ok(delta)
}

fn build(kinds: &[ChannelKind], horizon: u64) -> Result<Vec<ChannelSpec>> {
    kinds
        .iter()
        .map(|&k| ChannelSpec::new(k, horizon))
        .collect()
}

/// The three PADAM3 channels.
pub fn padam3_channels(horizon: u64) -> Result<Vec<ChannelSpec>> {
    use ChannelKind::*;
    build(
        &[
            Constant { c: 0.999 },
            PolynomialGap { c: 1.0, p: 0.7 },
            ExpDecayGap { c: 0.1, r: 2.0 },
        ],
        horizon,
    )
}

/// The ten PADAM10 channels.
///
/// Channel 6 defaults to `1 - 0.5 n^(-0.7)`, matching the family of channels
/// 3 to 5. With `channel6_literal` it becomes `1 - 0.5 n^(0.7)` clamped into
/// `[0, 1)`, which is 0 from `n = 3` on.
pub fn padam10_channels(horizon: u64, channel6_literal: bool) -> Result<Vec<ChannelSpec>> {
    use ChannelKind::*;
    let sixth = if channel6_literal {
        ClampedPolynomialGap { c: 0.5, p: -0.7 }
    } else {
        PolynomialGap { c: 0.5, p: 0.7 }
    };
    build(
        &[
            Constant { c: 0.99 },
            Constant { c: 0.999 },
            PolynomialGap { c: 1.0, p: 0.6 },
            PolynomialGap { c: 1.0, p: 0.7 },
            PolynomialGap { c: 1.0, p: 0.8 },
            sixth,
            ExpDecayGap { c: 0.1, r: 2.0 },
            ExpDecayGap { c: 0.01, r: 1.0 },
            ExpDecayGap { c: 0.1, r: 3.0 },
            ExpDecayGap { c: 0.1, r: 5.0 },
        ],
        horizon,
    )
}

/// Single constant-0.999 channel used by the Adam+EMA baseline.
pub fn adam_ema_channels(horizon: u64) -> Result<Vec<ChannelSpec>> {
    build(&[ChannelKind::Constant { c: 0.999 }], horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn padam3_values() {
        let n_total = 1000;
        let ch = padam3_channels(n_total).unwrap();
        assert_eq!(schedule_delta(&ch[0], 17).unwrap(), 0.999);
        assert_eq!(schedule_delta(&ch[1], 1).unwrap(), 0.0);
        let last = schedule_delta(&ch[2], n_total).unwrap();
        assert!((last - 0.999).abs() < 1e-15);
    }

    #[test]
    fn literal_channel6_unclamped_leaves_domain() {
        let printed = ChannelKind::PolynomialGap { c: 0.5, p: -0.7 };
        match ChannelSpec::new(printed, 10) {
            Err(Error::ScheduleDomain { step, delta }) => {
                assert_eq!(step, 3);
                assert!(delta < 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        let ch = padam10_channels(10, true).unwrap();
        assert_eq!(ch[5].delta(1), 0.5);
        assert_eq!(ch[5].delta(3), 0.0);
    }

    #[test]
    fn step_outside_horizon_rejected() {
        let ch = padam3_channels(5).unwrap();
        assert!(schedule_delta(&ch[0], 0).is_err());
        assert!(schedule_delta(&ch[0], 6).is_err());
    }

    #[test]
    fn constant_one_rejected() {
        assert!(matches!(
            ChannelSpec::new(ChannelKind::Constant { c: 1.0 }, 3),
            Err(Error::ScheduleDomain { step: 1, .. })
        ));
    }

    #[test]
    fn serde_shape() {
        let json = serde_json::to_string(&ChannelKind::ExpDecayGap { c: 0.1, r: 2.0 }).unwrap();
        assert_eq!(json, r#"{"kind":"exp_decay_gap","c":0.1,"r":2.0}"#);
    }
}
