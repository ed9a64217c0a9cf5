//! Experiment configuration and its flat `key = value` text form.
//!
//! ```text
//! # comments start with '#'
//! algo = dl
//! p_prop = 0.6
//! lambda_inv = 90000
//! ```
//!
//! Unset keys take the default experimental setup: a 50×50 lattice, 50
//! followers, demands N(6, 3), `t_d = 5`, radii 2, `t_p = 3`, `d_p = 25`,
//! 2000 rounds and 50 trials.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{0}` given more than once")]
    DuplicateKey(String),
    #[error("`{field}`: cannot parse `{value}` as {expected}")]
    InvalidValue {
        field: &'static str,
        value: String,
        expected: &'static str,
    },
    #[error("`{field}` out of range: {reason}")]
    OutOfRange { field: &'static str, reason: String },
    #[error("`{field}` is required when algo = {algo}")]
    Missing {
        field: &'static str,
        algo: &'static str,
    },
    #[error("`{field}` does not apply to algo = {algo}")]
    NotApplicable {
        field: &'static str,
        algo: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Rw,
    Prop,
    Dl { p_prop: f64 },
    Hybrid { t_rw: u32 },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Rw => "rw",
            Algorithm::Prop => "prop",
            Algorithm::Dl { .. } => "dl",
            Algorithm::Hybrid { .. } => "hybrid",
        }
    }

    pub fn uses_propagators(&self) -> bool {
        !matches!(self, Algorithm::Rw)
    }

    pub fn p_prop(&self) -> Option<f64> {
        match *self {
            Algorithm::Dl { p_prop } => Some(p_prop),
            _ => None,
        }
    }

    pub fn t_rw(&self) -> Option<u32> {
        match *self {
            Algorithm::Hybrid { t_rw } => Some(t_rw),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub width: u32,
    pub height: u32,
    pub followers: u32,
    pub algo: Algorithm,
    /// Mean rounds between arrivals at one vertex (1/λ).
    pub lambda_inv: f64,
    pub demand_mean: f64,
    pub demand_var: f64,
    pub t_d: u32,
    /// Sensing radius `I` of followers.
    pub follower_radius: u32,
    /// Broadcast radius `I_p` of propagators.
    pub i_p: u32,
    pub t_p: u32,
    pub d_p: f64,
    pub levy_alpha: f64,
    pub rounds: u32,
    pub trials: u32,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub const DEFAULT_LAMBDA_INV: f64 = 5.0e4;

    /// Default setup running `algo`.
    pub fn with_algo(algo: Algorithm) -> Self {
        Self {
            width: 50,
            height: 50,
            followers: 50,
            algo,
            lambda_inv: Self::DEFAULT_LAMBDA_INV,
            demand_mean: 6.0,
            demand_var: 3.0,
            t_d: 5,
            follower_radius: 2,
            i_p: 2,
            t_p: 3,
            d_p: 25.0,
            levy_alpha: 1.5,
            rounds: 2000,
            trials: 50,
            master_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn range(ok: bool, field: &'static str, reason: &str) -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange {
                    field,
                    reason: reason.to_string(),
                })
            }
        }
        range(self.width >= 1, "width", "must be at least 1")?;
        range(self.height >= 1, "height", "must be at least 1")?;
        range(
            self.width as u64 * self.height as u64 <= u32::MAX as u64,
            "width",
            "lattice has too many vertices",
        )?;
        range(self.followers >= 1, "followers", "must be at least 1")?;
        range(self.lambda_inv > 0.0, "lambda_inv", "must be positive")?;
        range(
            self.demand_mean.is_finite(),
            "demand_mean",
            "must be finite",
        )?;
        range(
            self.demand_var > 0.0 && self.demand_var.is_finite(),
            "demand_var",
            "must be positive and finite",
        )?;
        range(self.t_d >= 1, "t_d", "must be at least 1")?;
        range(self.t_p >= 1, "t_p", "must be at least 1")?;
        range(self.d_p >= 0.0, "d_p", "must be non-negative")?;
        range(
            self.levy_alpha > 0.0 && self.levy_alpha.is_finite(),
            "levy_alpha",
            "must be positive and finite",
        )?;
        range(self.rounds >= 1, "rounds", "must be at least 1")?;
        range(self.trials >= 1, "trials", "must be at least 1")?;
        if let Algorithm::Dl { p_prop } = self.algo {
            range(
                (0.0..=1.0).contains(&p_prop),
                "p_prop",
                "must lie in [0, 1]",
            )?;
        }
        Ok(())
    }

    /// Parses the flat text form; unset keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut pairs = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: n + 1,
                text: raw.trim().to_string(),
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        Self::from_pairs(pairs)
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut raw = RawConfig::default();
        for (k, v) in pairs {
            raw.set(k.as_ref(), v.as_ref())?;
        }
        raw.build()
    }

    /// Text form accepted by [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut s = format!("algo = {}\n", self.algo);
        match self.algo {
            Algorithm::Dl { p_prop } => s += &format!("p_prop = {p_prop}\n"),
            Algorithm::Hybrid { t_rw } => s += &format!("t_rw = {t_rw}\n"),
            _ => {}
        }
        s += &format!(
            "width = {}\nheight = {}\nfollowers = {}\nlambda_inv = {}\ndemand_mean = {}\n\
             demand_var = {}\nt_d = {}\nfollower_radius = {}\ni_p = {}\nt_p = {}\nd_p = {}\n\
             levy_alpha = {}\nrounds = {}\ntrials = {}\nmaster_seed = {}\n",
            self.width,
            self.height,
            self.followers,
            self.lambda_inv,
            self.demand_mean,
            self.demand_var,
            self.t_d,
            self.follower_radius,
            self.i_p,
            self.t_p,
            self.d_p,
            self.levy_alpha,
            self.rounds,
            self.trials,
            self.master_seed
        );
        s
    }
}

pub const KEYS: &[&str] = &[
    "width",
    "height",
    "followers",
    "algo",
    "lambda_inv",
    "demand_mean",
    "demand_var",
    "t_d",
    "follower_radius",
    "i_p",
    "t_p",
    "d_p",
    "p_prop",
    "t_rw",
    "levy_alpha",
    "rounds",
    "trials",
    "master_seed",
];

#[derive(Default)]
struct RawConfig {
    seen: Vec<&'static str>,
    width: Option<u32>,
    height: Option<u32>,
    followers: Option<u32>,
    algo: Option<&'static str>,
    lambda_inv: Option<f64>,
    demand_mean: Option<f64>,
    demand_var: Option<f64>,
    t_d: Option<u32>,
    follower_radius: Option<u32>,
    i_p: Option<u32>,
    t_p: Option<u32>,
    d_p: Option<f64>,
    p_prop: Option<f64>,
    t_rw: Option<u32>,
    levy_alpha: Option<f64>,
    rounds: Option<u32>,
    trials: Option<u32>,
    master_seed: Option<u64>,
}

fn value<T: FromStr>(
    field: &'static str,
    v: &str,
    expected: &'static str,
) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError::InvalidValue {
        field,
        value: v.to_string(),
        expected,
    })
}

fn real(field: &'static str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = value(field, v, "a real number")?;
    if x.is_nan() {
        return Err(ConfigError::InvalidValue {
            field,
            value: v.to_string(),
            expected: "a real number",
        });
    }
    Ok(x)
}

impl RawConfig {
    fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        let field = *KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
        if self.seen.contains(&field) {
            return Err(ConfigError::DuplicateKey(field.to_string()));
        }
        self.seen.push(field);
        const UINT: &str = "a non-negative integer";
        match field {
            "width" => self.width = Some(value(field, v, UINT)?),
            "height" => self.height = Some(value(field, v, UINT)?),
            "followers" => self.followers = Some(value(field, v, UINT)?),
            "algo" => {
                self.algo = Some(match v {
                    "rw" => "rw",
                    "prop" => "prop",
                    "dl" => "dl",
                    "hybrid" => "hybrid",
                    _ => {
                        return Err(ConfigError::InvalidValue {
                            field,
                            value: v.to_string(),
                            expected: "one of rw, prop, dl, hybrid",
                        })
                    }
                })
            }
            "lambda_inv" => self.lambda_inv = Some(real(field, v)?),
            "demand_mean" => self.demand_mean = Some(real(field, v)?),
            "demand_var" => self.demand_var = Some(real(field, v)?),
            "t_d" => self.t_d = Some(value(field, v, UINT)?),
            "follower_radius" => self.follower_radius = Some(value(field, v, UINT)?),
            "i_p" => self.i_p = Some(value(field, v, UINT)?),
            "t_p" => self.t_p = Some(value(field, v, UINT)?),
            "d_p" => self.d_p = Some(real(field, v)?),
            "p_prop" => self.p_prop = Some(real(field, v)?),
            "t_rw" => self.t_rw = Some(value(field, v, UINT)?),
            "levy_alpha" => self.levy_alpha = Some(real(field, v)?),
            "rounds" => self.rounds = Some(value(field, v, UINT)?),
            "trials" => self.trials = Some(value(field, v, UINT)?),
            "master_seed" => self.master_seed = Some(value(field, v, UINT)?),
            _ => unreachable!("every key in KEYS is handled"),
        }
        Ok(())
    }

    fn build(self) -> Result<ExperimentConfig, ConfigError> {
        let name = self.algo.ok_or(ConfigError::Missing {
            field: "algo",
            algo: "any",
        })?;
        let algo = match name {
            "dl" => Algorithm::Dl {
                p_prop: self.p_prop.ok_or(ConfigError::Missing {
                    field: "p_prop",
                    algo: "dl",
                })?,
            },
            "hybrid" => Algorithm::Hybrid {
                t_rw: self.t_rw.ok_or(ConfigError::Missing {
                    field: "t_rw",
                    algo: "hybrid",
                })?,
            },
            "rw" => Algorithm::Rw,
            _ => Algorithm::Prop,
        };
        if name != "dl" && self.p_prop.is_some() {
            return Err(ConfigError::NotApplicable {
                field: "p_prop",
                algo: algo.name(),
            });
        }
        if name != "hybrid" && self.t_rw.is_some() {
            return Err(ConfigError::NotApplicable {
                field: "t_rw",
                algo: algo.name(),
            });
        }
        let d = ExperimentConfig::with_algo(algo);
        let cfg = ExperimentConfig {
            width: self.width.unwrap_or(d.width),
            height: self.height.unwrap_or(d.height),
            followers: self.followers.unwrap_or(d.followers),
            algo,
            lambda_inv: self.lambda_inv.unwrap_or(d.lambda_inv),
            demand_mean: self.demand_mean.unwrap_or(d.demand_mean),
            demand_var: self.demand_var.unwrap_or(d.demand_var),
            t_d: self.t_d.unwrap_or(d.t_d),
            follower_radius: self.follower_radius.unwrap_or(d.follower_radius),
            i_p: self.i_p.unwrap_or(d.i_p),
            t_p: self.t_p.unwrap_or(d.t_p),
            d_p: self.d_p.unwrap_or(d.d_p),
            levy_alpha: self.levy_alpha.unwrap_or(d.levy_alpha),
            rounds: self.rounds.unwrap_or(d.rounds),
            trials: self.trials.unwrap_or(d.trials),
            master_seed: self.master_seed.unwrap_or(d.master_seed),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_for_prop() {
        let c = ExperimentConfig::parse("algo = prop\n").unwrap();
        assert_eq!(c, ExperimentConfig::with_algo(Algorithm::Prop));
        assert_eq!((c.width, c.height, c.followers), (50, 50, 50));
        assert_eq!((c.demand_mean, c.demand_var, c.t_d), (6.0, 3.0, 5));
        assert_eq!((c.follower_radius, c.i_p, c.t_p, c.d_p), (2, 2, 3, 25.0));
        assert_eq!((c.rounds, c.trials, c.levy_alpha), (2000, 50, 1.5));
    }

    #[test]
    fn dl_requires_p_prop() {
        let e = ExperimentConfig::parse("algo = dl").unwrap_err();
        assert_eq!(
            e,
            ConfigError::Missing {
                field: "p_prop",
                algo: "dl"
            }
        );
        assert!(e.to_string().contains("p_prop"));
    }

    #[test]
    fn negative_rate_is_out_of_range() {
        let e = ExperimentConfig::parse("algo = rw\nlambda_inv = -1").unwrap_err();
        assert!(matches!(
            e,
            ConfigError::OutOfRange {
                field: "lambda_inv",
                ..
            }
        ));
    }

    #[test]
    fn rejects_unknown_duplicate_and_irrelevant_keys() {
        assert_eq!(
            ExperimentConfig::parse("algo = rw\nspeed = 3").unwrap_err(),
            ConfigError::UnknownKey("speed".into())
        );
        assert_eq!(
            ExperimentConfig::parse("algo = rw\nalgo = prop").unwrap_err(),
            ConfigError::DuplicateKey("algo".into())
        );
        assert_eq!(
            ExperimentConfig::parse("algo = prop\nt_rw = 5").unwrap_err(),
            ConfigError::NotApplicable {
                field: "t_rw",
                algo: "prop"
            }
        );
        assert!(matches!(
            ExperimentConfig::parse("algo = dl\np_prop = 1.5").unwrap_err(),
            ConfigError::OutOfRange {
                field: "p_prop",
                ..
            }
        ));
        assert!(matches!(
            ExperimentConfig::parse("algo = rw\ni_p = -2").unwrap_err(),
            ConfigError::InvalidValue { field: "i_p", .. }
        ));
        assert!(matches!(
            ExperimentConfig::parse("algo rw").unwrap_err(),
            ConfigError::Syntax { line: 1, .. }
        ));
    }

    #[test]
    fn comments_and_infinite_gap() {
        let c = ExperimentConfig::parse(
            "# none ever\nalgo = hybrid # trailing\nt_rw = 50\nlambda_inv = inf\n",
        )
        .unwrap();
        assert_eq!(c.algo, Algorithm::Hybrid { t_rw: 50 });
        assert!(c.lambda_inv.is_infinite());
    }

    #[test]
    fn text_roundtrip() {
        let mut c = ExperimentConfig::with_algo(Algorithm::Dl { p_prop: 0.6 });
        c.lambda_inv = 90000.0;
        c.master_seed = 17;
        assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
    }
}
