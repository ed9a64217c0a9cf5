//! CSV results table.

use std::io::{Read, Write};

use swarm_core::{ExperimentConfig, TrialResult};
use thiserror::Error;

use crate::sweep::Cell;

pub const HEADER: [&str; 11] = [
    "algo",
    "lambda_inv",
    "p_prop",
    "t_rw",
    "i_p",
    "t_p",
    "seed",
    "mu_unsatisfied",
    "mu_completion",
    "tasks_spawned",
    "tasks_completed",
];

/// Parameter columns, in header order.
pub const PARAM_COLUMNS: [&str; 5] = ["lambda_inv", "p_prop", "t_rw", "i_p", "t_p"];
pub const METRIC_COLUMNS: [&str; 4] = [
    "mu_unsatisfied",
    "mu_completion",
    "tasks_spawned",
    "tasks_completed",
];

/// Seed field of aggregate rows.
pub const MEAN_SEED: &str = "mean";

#[derive(Debug, Error)]
pub enum TableError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
}

/// Formats like C's `%g` with six significant digits.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn param_fields(config: &ExperimentConfig) -> [String; 6] {
    [
        config.algo.name().to_string(),
        fmt_g6(config.lambda_inv),
        config.algo.p_prop().map(fmt_g6).unwrap_or_default(),
        config
            .algo
            .t_rw()
            .map(|t| t.to_string())
            .unwrap_or_default(),
        config.i_p.to_string(),
        config.t_p.to_string(),
    ]
}

fn trial_row(config: &ExperimentConfig, trial: &TrialResult) -> Vec<String> {
    let m = &trial.metrics;
    let mut row = param_fields(config).to_vec();
    row.extend([
        trial.seed.to_string(),
        fmt_g6(m.mu_unsatisfied),
        m.mu_completion.map(fmt_g6).unwrap_or_default(),
        m.tasks_spawned.to_string(),
        m.tasks_completed.to_string(),
    ]);
    row
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn mean_row(cell: &Cell) -> Vec<String> {
    let t = &cell.trials;
    let mut row = param_fields(&cell.config).to_vec();
    let opt = |v: Option<f64>| v.map(fmt_g6).unwrap_or_default();
    row.extend([
        MEAN_SEED.to_string(),
        opt(mean(t.iter().map(|r| r.metrics.mu_unsatisfied))),
        opt(mean(t.iter().filter_map(|r| r.metrics.mu_completion))),
        opt(mean(t.iter().map(|r| r.metrics.tasks_spawned as f64))),
        opt(mean(t.iter().map(|r| r.metrics.tasks_completed as f64))),
    ]);
    row
}

/// Writes one row per trial and, if `means` is set, one aggregate row after
/// each cell.
pub fn write_csv<W: Write>(out: W, cells: &[Cell], means: bool) -> Result<(), TableError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for cell in cells {
        for trial in &cell.trials {
            w.write_record(trial_row(&cell.config, trial))?;
        }
        if means && !cell.trials.is_empty() {
            w.write_record(mean_row(cell))?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// A results table read back from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read<R: Read>(input: R) -> Result<Self, TableError> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Self { headers, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize, TableError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| TableError::MissingColumn(name.to_string()))
    }

    /// Per-trial rows, without aggregates.
    pub fn trial_rows(&self) -> Result<Vec<&Vec<String>>, TableError> {
        let seed = self.column("seed")?;
        Ok(self.rows.iter().filter(|r| r[seed] != MEAN_SEED).collect())
    }

    pub fn mean_rows(&self) -> Result<Vec<&Vec<String>>, TableError> {
        let seed = self.column("seed")?;
        Ok(self.rows.iter().filter(|r| r[seed] == MEAN_SEED).collect())
    }
}
