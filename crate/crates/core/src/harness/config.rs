//! Run configuration: built-in presets, JSON config files and CLI overrides.
//!
//! Resolution order is preset (or the problem's desk defaults), then the
//! config file, then command-line flags; later sources win.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{
    adam_ema_channels, padam10_channels, padam3_channels, ChannelKind, ChannelSpec, HyperParams,
};
use crate::problems::{
    GaussianDensityProblem, HeatDkmProblem, PolyRegProblem, QuadraticProblem, StochasticObjective,
};

macro_rules! id_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $id:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $id)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn id(self) -> &'static str {
                match self {
                    $($name::$variant => $id),+
                }
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($id => Ok($name::$variant),)+
                    other => Err(Error::Usage(format!(
                        "unknown {} `{other}`; expected one of: {}",
                        stringify!($name),
                        [$($id),+].join(", ")
                    ))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.id())
            }
        }
    };
}

id_enum!(ProblemKind {
    Quadratic => "quadratic",
    Polyreg => "polyreg",
    GaussDensity => "gauss_density",
    HeatDkm => "heat_dkm",
});

id_enum!(OptimizerKind {
    Sgd => "sgd",
    Momentum => "momentum",
    Adam => "adam",
    Adamw => "adamw",
    AdamEma => "adam_ema",
    Padam3 => "padam3",
    Padam10 => "padam10",
});

impl OptimizerKind {
    /// Optimizers whose reported iterate is chosen among several channels.
    pub fn selects_channels(self) -> bool {
        matches!(self, OptimizerKind::Padam3 | OptimizerKind::Padam10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Full,
    Desk,
}

/// Problem description with every per-problem knob; fields a problem does not
/// use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    pub dim: usize,
    pub hidden: Vec<usize>,
    pub horizon: f64,
    pub sigma2: f64,
    pub noise_var: f64,
    pub degree: usize,
}

impl ProblemConfig {
    pub fn defaults(kind: ProblemKind, scale: Scale) -> Self {
        let full = scale == Scale::Full;
        let (dim, hidden) = match kind {
            ProblemKind::Quadratic => (10, vec![]),
            ProblemKind::Polyreg => (1, vec![]),
            ProblemKind::GaussDensity if full => (20, vec![300, 500, 100]),
            ProblemKind::GaussDensity => (5, vec![32, 32]),
            ProblemKind::HeatDkm if full => (10, vec![50, 100, 50]),
            ProblemKind::HeatDkm => (5, vec![32, 32]),
        };
        ProblemConfig {
            kind,
            dim,
            hidden,
            horizon: 2.0,
            sigma2: 3.0,
            noise_var: 0.2,
            degree: 25,
        }
    }

    pub fn build(&self) -> Result<Box<dyn StochasticObjective>> {
        if self.dim == 0 {
            return Err(Error::Usage("dim must be at least 1".into()));
        }
        Ok(match self.kind {
            ProblemKind::Quadratic => Box::new(QuadraticProblem::new(self.dim)),
            ProblemKind::Polyreg => {
                if self.noise_var.is_nan() || self.noise_var < 0.0 {
                    return Err(Error::Usage(format!(
                        "noise-var {} must be >= 0",
                        self.noise_var
                    )));
                }
                Box::new(PolyRegProblem {
                    degree: self.degree,
                    noise_var: self.noise_var,
                })
            }
            ProblemKind::GaussDensity => {
                if self.sigma2.is_nan() || self.sigma2 <= 0.0 {
                    return Err(Error::Usage(format!("sigma2 {} must be > 0", self.sigma2)));
                }
                Box::new(GaussianDensityProblem::new(
                    self.dim,
                    &self.hidden,
                    self.sigma2,
                )?)
            }
            ProblemKind::HeatDkm => {
                if self.horizon.is_nan() || self.horizon < 0.0 {
                    return Err(Error::Usage(format!(
                        "horizon {} must be >= 0",
                        self.horizon
                    )));
                }
                Box::new(HeatDkmProblem::new(self.dim, &self.hidden, self.horizon)?)
            }
        })
    }
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub optimizer: OptimizerKind,
    pub hyper: HyperParams,
    pub steps: u64,
    pub batch: usize,
    /// Channel re-selection cadence.
    pub n_t: u64,
    pub seeds: u64,
    pub seed_base: u64,
    pub mc_samples: usize,
    pub eval_every: u64,
    pub padam10_channel6_literal: bool,
    /// Replaces the optimizer's built-in averaging channels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<Vec<ChannelKind>>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Default selection cadence for a run of `steps` steps.
pub fn default_n_t(steps: u64) -> u64 {
    if steps >= 5000 {
        5000
    } else if steps >= 500 {
        500
    } else {
        steps.max(1)
    }
}

/// Learning rates as used for each benchmark; the desk presets of the two
/// network problems train ten times faster to fit their shorter budgets.
pub fn default_lr(problem: ProblemKind, optimizer: OptimizerKind, scale: Scale) -> f64 {
    match problem {
        ProblemKind::Quadratic => match optimizer {
            OptimizerKind::Sgd | OptimizerKind::Momentum => 0.001,
            _ => 0.01,
        },
        ProblemKind::Polyreg => 0.01,
        ProblemKind::GaussDensity | ProblemKind::HeatDkm => match scale {
            Scale::Full => 1e-4,
            Scale::Desk => 1e-3,
        },
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Usage("steps must be at least 1".into()));
        }
        if self.batch == 0 {
            return Err(Error::Usage("batch must be at least 1".into()));
        }
        if self.n_t == 0 || self.n_t > self.steps {
            return Err(Error::Usage(format!(
                "nt must lie in 1..={} (got {})",
                self.steps, self.n_t
            )));
        }
        if self.seeds == 0 {
            return Err(Error::Usage("seeds must be at least 1".into()));
        }
        if self.eval_every == 0 {
            return Err(Error::Usage("eval-every must be at least 1".into()));
        }
        if self.mc_samples == 0 {
            return Err(Error::Usage("mc-samples must be at least 1".into()));
        }
        self.hyper.validate()?;
        Ok(())
    }

    /// Averaging channels for the configured optimizer, bound to `steps`.
    /// Empty for optimizers without averaging.
    pub fn channel_specs(&self) -> Result<Vec<ChannelSpec>> {
        let uses_channels = matches!(
            self.optimizer,
            OptimizerKind::AdamEma | OptimizerKind::Padam3 | OptimizerKind::Padam10
        );
        if !uses_channels {
            return Ok(Vec::new());
        }
        if let Some(kinds) = &self.channels {
            return kinds
                .iter()
                .map(|&k| ChannelSpec::new(k, self.steps))
                .collect();
        }
        match self.optimizer {
            OptimizerKind::AdamEma => adam_ema_channels(self.steps),
            OptimizerKind::Padam3 => padam3_channels(self.steps),
            OptimizerKind::Padam10 => padam10_channels(self.steps, self.padam10_channel6_literal),
            _ => unreachable!(),
        }
    }
}

/// A named starting point for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub problem: ProblemKind,
    pub scale: Scale,
    pub steps: u64,
    pub seeds: u64,
    pub mc_samples: usize,
    pub description: &'static str,
}

pub fn presets() -> Vec<Preset> {
    use ProblemKind::*;
    use Scale::*;
    vec![
        Preset {
            name: "quadratic",
            problem: Quadratic,
            scale: Full,
            steps: 100_000,
            seeds: 50,
            mc_samples: 1,
            description: "E|theta - X|^2, d=10, J=256, 50 seeds",
        },
        Preset {
            name: "quadratic-desk",
            problem: Quadratic,
            scale: Desk,
            steps: 20_000,
            seeds: 20,
            mc_samples: 1,
            description: "quadratic, d=10, 20k steps, 20 seeds",
        },
        Preset {
            name: "polyreg",
            problem: Polyreg,
            scale: Full,
            steps: 100_000,
            seeds: 50,
            mc_samples: 50_000,
            description: "degree-25 fit of sin(pi x), noise variance 0.2, 50 seeds",
        },
        Preset {
            name: "polyreg-desk",
            problem: Polyreg,
            scale: Desk,
            steps: 50_000,
            seeds: 3,
            mc_samples: 10_000,
            description: "degree-25 polynomial regression, 50k steps, 3 seeds",
        },
        Preset {
            name: "gauss-density",
            problem: GaussDensity,
            scale: Full,
            steps: 100_000,
            seeds: 50,
            mc_samples: 100_000,
            description: "Gaussian density, d=20, ReLU 300/500/100, 50 seeds",
        },
        Preset {
            name: "gauss-density-desk",
            problem: GaussDensity,
            scale: Desk,
            steps: 20_000,
            seeds: 3,
            mc_samples: 10_000,
            description: "Gaussian density, d=5, ReLU 32/32, 3 seeds",
        },
        Preset {
            name: "heat-dkm",
            problem: HeatDkm,
            scale: Full,
            steps: 100_000,
            seeds: 50,
            mc_samples: 100_000,
            description: "heat equation via deep Kolmogorov, d=10, GELU 50/100/50, 50 seeds",
        },
        Preset {
            name: "heat-dkm-desk",
            problem: HeatDkm,
            scale: Desk,
            steps: 20_000,
            seeds: 3,
            mc_samples: 10_000,
            description: "heat equation via deep Kolmogorov, d=5, GELU 32/32, 3 seeds",
        },
    ]
}

pub fn find_preset(name: &str) -> Result<Preset> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Usage(format!("unknown preset `{name}`")))
}

/// The desk preset of `kind`.
fn desk_preset(kind: ProblemKind) -> Preset {
    presets()
        .into_iter()
        .find(|p| p.problem == kind && p.scale == Scale::Desk)
        .expect("every problem has a desk preset")
}

/// Partial configuration from a config file or the command line. Field
/// names double as JSON keys and CLI flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, clap::Args)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigOverrides {
    /// quadratic | polyreg | gauss_density | heat_dkm
    #[arg(long)]
    pub problem: Option<String>,
    /// sgd | momentum | adam | adamw | adam_ema | padam3 | padam10
    #[arg(long)]
    pub optimizer: Option<String>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub batch: Option<usize>,
    /// Channel re-selection cadence n_T.
    #[arg(long)]
    pub nt: Option<u64>,
    #[arg(long)]
    pub seeds: Option<u64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[arg(long)]
    pub eval_every: Option<u64>,
    #[arg(long)]
    pub seed_base: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    /// Final time T of the heat problem.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub noise_var: Option<f64>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub momentum: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    /// Use the printed `1 - 0.5 n^0.7` form (clamped) for PADAM10 channel 6.
    #[arg(long)]
    pub padam10_channel6_literal: Option<bool>,
    #[arg(skip)]
    pub channels: Option<Vec<ChannelKind>>,
}

macro_rules! merge_fields {
    ($low:ident, $high:ident; $($field:ident),+) => {
        ConfigOverrides { $($field: $high.$field.or($low.$field)),+ }
    };
}

impl ConfigOverrides {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Usage(format!("config: {e}")))
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
    }

    /// Field-wise merge where `higher` wins.
    pub fn merged_with(self, higher: ConfigOverrides) -> ConfigOverrides {
        let low = self;
        let high = higher;
        merge_fields!(low, high;
            problem, optimizer, preset, steps, batch, nt, seeds, lr, mc_samples,
            eval_every, seed_base, out, dim, hidden, horizon, sigma2, noise_var, degree,
            alpha, beta, eps, momentum, weight_decay, padam10_channel6_literal, channels)
    }

    /// Resolves against presets and defaults, then validates.
    pub fn resolve(self) -> Result<RunConfig> {
        let preset = self.preset.as_deref().map(find_preset).transpose()?;
        let problem = match (&self.problem, &preset) {
            (Some(p), _) => p.parse::<ProblemKind>()?,
            (None, Some(p)) => p.problem,
            (None, None) => return Err(Error::Usage("missing required key `problem`".into())),
        };
        let optimizer: OptimizerKind = self
            .optimizer
            .as_deref()
            .ok_or_else(|| Error::Usage("missing required key `optimizer`".into()))?
            .parse()?;
        let preset = match preset {
            Some(p) if p.problem != problem => {
                return Err(Error::Usage(format!(
                    "preset `{}` is for problem {}, not {problem}",
                    p.name, p.problem
                )))
            }
            Some(p) => p,
            None => desk_preset(problem),
        };

        let mut pc = ProblemConfig::defaults(problem, preset.scale);
        if let Some(v) = self.dim {
            pc.dim = v;
        }
        if let Some(v) = self.hidden {
            pc.hidden = v;
        }
        if let Some(v) = self.horizon {
            pc.horizon = v;
        }
        if let Some(v) = self.sigma2 {
            pc.sigma2 = v;
        }
        if let Some(v) = self.noise_var {
            pc.noise_var = v;
        }
        if let Some(v) = self.degree {
            pc.degree = v;
        }

        let defaults = HyperParams::default();
        let hyper = HyperParams {
            alpha: self.alpha.unwrap_or(defaults.alpha),
            beta: self.beta.unwrap_or(defaults.beta),
            eps: self.eps.unwrap_or(defaults.eps),
            lr: self
                .lr
                .unwrap_or_else(|| default_lr(problem, optimizer, preset.scale)),
            momentum: self.momentum.unwrap_or(defaults.momentum),
            weight_decay: self.weight_decay.unwrap_or(defaults.weight_decay),
        };

        let steps = self.steps.unwrap_or(preset.steps);
        let n_t = self.nt.unwrap_or_else(|| default_n_t(steps));
        let config = RunConfig {
            problem: pc,
            optimizer,
            hyper,
            steps,
            batch: self.batch.unwrap_or(256),
            n_t,
            seeds: self.seeds.unwrap_or(preset.seeds),
            seed_base: self.seed_base.unwrap_or(0),
            mc_samples: self.mc_samples.unwrap_or(preset.mc_samples),
            eval_every: self.eval_every.unwrap_or((n_t / 10).max(1)),
            padam10_channel6_literal: self.padam10_channel6_literal.unwrap_or(false),
            channels: self.channels,
            out: self.out,
        };
        config.validate()?;
        config.channel_specs()?;
        Ok(config)
    }
}

/// Builds a [`RunConfig`] from an optional JSON config file and command-line
/// overrides.
pub fn parse_config(file: Option<&Path>, cli: ConfigOverrides) -> Result<RunConfig> {
    let base = match file {
        Some(path) => ConfigOverrides::from_json_file(path)?,
        None => ConfigOverrides::default(),
    };
    base.merged_with(cli).resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(problem: Option<&str>, optimizer: &str) -> ConfigOverrides {
        ConfigOverrides {
            problem: problem.map(String::from),
            optimizer: Some(optimizer.into()),
            ..ConfigOverrides::default()
        }
    }

    #[test]
    fn quadratic_padam3_defaults() {
        let c = parse_config(None, cli(Some("quadratic"), "padam3")).unwrap();
        assert_eq!(c.problem.dim, 10);
        assert_eq!(c.batch, 256);
        assert_eq!(c.hyper.lr, 0.01);
        assert_eq!(c.n_t, 5000);
        assert_eq!(c.eval_every, 500);
    }

    #[test]
    fn quadratic_sgd_lr() {
        let c = parse_config(None, cli(Some("quadratic"), "sgd")).unwrap();
        assert_eq!(c.hyper.lr, 0.001);
    }

    #[test]
    fn missing_problem_is_usage_error() {
        let e = parse_config(None, cli(None, "adam")).unwrap_err();
        assert!(
            matches!(e, Error::Usage(ref m) if m.contains("problem")),
            "{e}"
        );
    }

    #[test]
    fn unknown_key_names_the_key() {
        let e = ConfigOverrides::from_json_str(r#"{"problem":"quadratic","stepz":3}"#).unwrap_err();
        assert!(e.to_string().contains("stepz"), "{e}");
    }

    #[test]
    fn out_of_range_values_rejected() {
        let mut o = cli(Some("quadratic"), "adam");
        o.steps = Some(100);
        o.nt = Some(200);
        assert!(o.clone().resolve().is_err());
        o.nt = None;
        o.beta = Some(1.5);
        assert!(matches!(
            o.resolve(),
            Err(Error::InvalidHyperParameter { name: "beta", .. })
        ));
        assert!(cli(Some("parabola"), "adam").resolve().is_err());
    }

    #[test]
    fn cli_beats_file_beats_preset() {
        let file = ConfigOverrides::from_json_str(
            r#"{"preset":"heat-dkm-desk","optimizer":"adam","steps":1000,"seeds":4}"#,
        )
        .unwrap();
        let flags = ConfigOverrides {
            steps: Some(600),
            ..ConfigOverrides::default()
        };
        let c = file.merged_with(flags).resolve().unwrap();
        assert_eq!(c.problem.kind, ProblemKind::HeatDkm);
        assert_eq!(c.steps, 600);
        assert_eq!(c.seeds, 4);
        assert_eq!(c.hyper.lr, 1e-3);
        assert_eq!(c.n_t, 500);
    }

    #[test]
    fn full_presets_use_full_scale() {
        let mut o = cli(None, "padam10");
        o.preset = Some("heat-dkm".into());
        let c = o.resolve().unwrap();
        assert_eq!(c.problem.dim, 10);
        assert_eq!(c.problem.hidden, vec![50, 100, 50]);
        assert_eq!(c.hyper.lr, 1e-4);
        assert_eq!(c.channel_specs().unwrap().len(), 10);
    }

    #[test]
    fn preset_problem_conflict() {
        let mut o = cli(Some("quadratic"), "adam");
        o.preset = Some("polyreg-desk".into());
        assert!(o.resolve().is_err());
    }

    #[test]
    fn ids_round_trip() {
        for &k in ProblemKind::ALL {
            assert_eq!(k.id().parse::<ProblemKind>().unwrap(), k);
        }
        for &k in OptimizerKind::ALL {
            assert_eq!(k.id().parse::<OptimizerKind>().unwrap(), k);
        }
    }
}
