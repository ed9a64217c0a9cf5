//! Parameter sweeps over seeded trials.
//!
//! Every cell of a sweep (one arm at one swept value) runs the same list of
//! trial seeds, so cells are compared under common random numbers: the
//! arrival process of trial `i` is identical in every cell.

use std::fmt;
use std::panic::{self, AssertUnwindSafe};
use std::str::FromStr;

use rayon::prelude::*;
use swarm_core::rng::trial_seed;
use swarm_core::{run_trial, Algorithm, ConfigError, ExperimentConfig, TrialResult};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("unknown sweep parameter `{0}` (expected lambda_inv, p_prop, t_rw, i_p or t_p)")]
    UnknownParam(String),
    #[error("unknown preset `{0}` (expected fig3, fig5, fig7 or fig9)")]
    UnknownPreset(String),
    #[error("unknown algorithm `{0}`")]
    UnknownAlgo(String),
    #[error("`{param}` does not apply to algo = {algo}")]
    NotApplicable {
        param: SweepParam,
        algo: &'static str,
    },
    #[error("`{param}` needs a non-negative integer, got {value}")]
    NotAnInteger { param: SweepParam, value: f64 },
    #[error("sweep has no {0}")]
    Empty(&'static str),
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("trial panicked (seed {seed}): {message}\nconfiguration:\n{config}")]
    TrialPanicked {
        config: String,
        seed: u64,
        message: String,
    },
}

/// Parameters a sweep can vary; each has its own CSV column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    LambdaInv,
    PProp,
    TRw,
    IP,
    TP,
}

impl SweepParam {
    pub fn column(&self) -> &'static str {
        match self {
            SweepParam::LambdaInv => "lambda_inv",
            SweepParam::PProp => "p_prop",
            SweepParam::TRw => "t_rw",
            SweepParam::IP => "i_p",
            SweepParam::TP => "t_p",
        }
    }

    /// Sets this parameter on `config`.
    pub fn apply(&self, config: &mut ExperimentConfig, value: f64) -> Result<(), SweepError> {
        let int = || -> Result<u32, SweepError> {
            if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as u32)
            } else {
                Err(SweepError::NotAnInteger {
                    param: *self,
                    value,
                })
            }
        };
        match self {
            SweepParam::LambdaInv => config.lambda_inv = value,
            SweepParam::PProp => match config.algo {
                Algorithm::Dl { .. } => config.algo = Algorithm::Dl { p_prop: value },
                other => {
                    return Err(SweepError::NotApplicable {
                        param: *self,
                        algo: other.name(),
                    })
                }
            },
            SweepParam::TRw => match config.algo {
                Algorithm::Hybrid { .. } => config.algo = Algorithm::Hybrid { t_rw: int()? },
                other => {
                    return Err(SweepError::NotApplicable {
                        param: *self,
                        algo: other.name(),
                    })
                }
            },
            SweepParam::IP => config.i_p = int()?,
            SweepParam::TP => config.t_p = int()?,
        }
        Ok(())
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl FromStr for SweepParam {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "lambda_inv" => SweepParam::LambdaInv,
            "p_prop" => SweepParam::PProp,
            "t_rw" => SweepParam::TRw,
            "i_p" => SweepParam::IP,
            "t_p" => SweepParam::TP,
            _ => return Err(SweepError::UnknownParam(s.to_string())),
        })
    }
}

/// One series of a sweep: an algorithm plus fixed parameter overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    pub algo: Algorithm,
    pub overrides: Vec<(SweepParam, f64)>,
}

impl Arm {
    pub fn new(algo: Algorithm) -> Self {
        Self {
            algo,
            overrides: Vec::new(),
        }
    }

    pub fn with(mut self, param: SweepParam, value: f64) -> Self {
        self.overrides.push((param, value));
        self
    }
}

/// Parses an algorithm list such as `rw,prop,dl,hybrid`; `dl` and `hybrid`
/// take `p_prop` and `t_rw`.
pub fn parse_algos(list: &str, p_prop: f64, t_rw: u32) -> Result<Vec<Algorithm>, SweepError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s {
            "rw" => Ok(Algorithm::Rw),
            "prop" => Ok(Algorithm::Prop),
            "dl" => Ok(Algorithm::Dl { p_prop }),
            "hybrid" => Ok(Algorithm::Hybrid { t_rw }),
            other => Err(SweepError::UnknownAlgo(other.to_string())),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub arms: Vec<Arm>,
}

/// Preset `fig3`: task rate sweep for all four algorithms.
pub const TASK_RATES: [f64; 8] = [3.0e4, 4.0e4, 5.0e4, 6.0e4, 7.0e4, 8.0e4, 9.0e4, 1.0e5];
/// Rates used by the per-algorithm parameter sweeps.
pub const SWEEP_RATES: [f64; 3] = [3.0e4, 5.0e4, 9.0e4];
pub const DL_SHARE: f64 = 0.6;
pub const HYBRID_WALK: u32 = 50;

impl SweepSpec {
    pub fn preset(name: &str, base: ExperimentConfig) -> Result<Self, SweepError> {
        let per_rate = |algo: Algorithm, rates: &[f64]| -> Vec<Arm> {
            rates
                .iter()
                .map(|&r| Arm::new(algo).with(SweepParam::LambdaInv, r))
                .collect()
        };
        Ok(match name {
            "fig3" => SweepSpec {
                base,
                param: SweepParam::LambdaInv,
                values: TASK_RATES.to_vec(),
                arms: vec![
                    Arm::new(Algorithm::Rw),
                    Arm::new(Algorithm::Prop),
                    Arm::new(Algorithm::Dl { p_prop: DL_SHARE }),
                    Arm::new(Algorithm::Hybrid { t_rw: HYBRID_WALK }),
                ],
            },
            "fig5" => SweepSpec {
                base,
                param: SweepParam::PProp,
                values: (0..=10).map(|i| i as f64 / 10.0).collect(),
                arms: per_rate(Algorithm::Dl { p_prop: 0.0 }, &SWEEP_RATES),
            },
            "fig7" => SweepSpec {
                base,
                param: SweepParam::TRw,
                values: vec![0.0, 5.0, 10.0, 25.0, 50.0, 100.0, 200.0],
                arms: per_rate(Algorithm::Hybrid { t_rw: 0 }, &SWEEP_RATES),
            },
            "fig9" => SweepSpec {
                base,
                param: SweepParam::IP,
                values: (1..=5).map(f64::from).collect(),
                arms: [5.0e4, 9.0e4]
                    .iter()
                    .map(|&r| {
                        Arm::new(Algorithm::Prop)
                            .with(SweepParam::LambdaInv, r)
                            .with(SweepParam::TP, 1.0)
                    })
                    .collect(),
            },
            other => return Err(SweepError::UnknownPreset(other.to_string())),
        })
    }

    /// Configuration of every cell, arm-major then value order.
    pub fn cells(&self) -> Result<Vec<ExperimentConfig>, SweepError> {
        if self.values.is_empty() {
            return Err(SweepError::Empty("values"));
        }
        if self.arms.is_empty() {
            return Err(SweepError::Empty("algorithms"));
        }
        let mut out = Vec::with_capacity(self.values.len() * self.arms.len());
        for arm in &self.arms {
            for &value in &self.values {
                let mut cfg = ExperimentConfig {
                    algo: arm.algo,
                    ..self.base.clone()
                };
                for &(p, v) in &arm.overrides {
                    p.apply(&mut cfg, v)?;
                }
                self.param.apply(&mut cfg, value)?;
                cfg.validate()?;
                out.push(cfg);
            }
        }
        Ok(out)
    }

    pub fn trial_count(&self) -> usize {
        self.values.len() * self.arms.len() * self.base.trials as usize
    }
}

/// Results of one cell, in trial order.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialResult>,
}

/// Runs every trial of `spec`, in parallel, and returns cells in
/// arm-major, value, trial order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<Cell>, SweepError> {
    let cells = spec.cells()?;
    let trials = spec.base.trials;
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..trials).map(move |t| (c, trial_seed(spec.base.master_seed, t))))
        .collect();
    let results: Vec<Result<TrialResult, SweepError>> = jobs
        .par_iter()
        .map(|&(c, seed)| run_guarded(&cells[c], seed))
        .collect();
    let mut out: Vec<Cell> = cells
        .into_iter()
        .map(|config| Cell {
            config,
            trials: Vec::with_capacity(trials as usize),
        })
        .collect();
    for ((c, _), r) in jobs.into_iter().zip(results) {
        out[c].trials.push(r?);
    }
    Ok(out)
}

/// Runs `config.trials` trials of a single configuration.
pub fn run_config(config: &ExperimentConfig) -> Result<Cell, SweepError> {
    config.validate()?;
    let trials: Result<Vec<_>, _> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_guarded(config, trial_seed(config.master_seed, t)))
        .collect();
    Ok(Cell {
        config: config.clone(),
        trials: trials?,
    })
}

fn run_guarded(config: &ExperimentConfig, seed: u64) -> Result<TrialResult, SweepError> {
    match panic::catch_unwind(AssertUnwindSafe(|| run_trial(config, seed))) {
        Ok(r) => Ok(r?),
        Err(payload) => {
            let message = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".to_string());
            Err(SweepError::TrialPanicked {
                config: config.to_text(),
                seed,
                message,
            })
        }
    }
}
