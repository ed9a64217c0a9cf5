//! Trial performance metrics: mean unsatisfied demand and mean completion
//! time per unit of demand.

use thiserror::Error;

use crate::arrivals::Task;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no rounds were recorded")]
    NoRounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Completion {
    pub demand: u32,
    /// Rounds from spawn to completion.
    pub elapsed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsAccumulator {
    rounds: u64,
    unsatisfied_sum: u128,
    completions: Vec<Completion>,
    spawned: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsSummary {
    pub mu_unsatisfied: f64,
    /// Absent when no task was completed.
    pub mu_completion: Option<f64>,
    pub tasks_completed: u64,
    pub tasks_spawned: u64,
}

impl MetricsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `D_t`, the post-commit sum of live residual demands of one round.
    pub fn record_round(&mut self, unsatisfied: u64) {
        self.rounds += 1;
        self.unsatisfied_sum += unsatisfied as u128;
    }

    pub fn record_completion(&mut self, task: &Task, completion_round: u64) {
        debug_assert!(completion_round >= task.spawn_round);
        self.completions.push(Completion {
            demand: task.demand,
            elapsed: completion_round - task.spawn_round,
        });
    }

    pub fn record_spawn(&mut self) {
        self.spawned += 1;
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn completions(&self) -> &[Completion] {
        &self.completions
    }

    pub fn finalize(&self) -> Result<MetricsSummary, MetricsError> {
        if self.rounds == 0 {
            return Err(MetricsError::NoRounds);
        }
        let mu_completion = (!self.completions.is_empty()).then(|| {
            self.completions
                .iter()
                .map(|c| c.elapsed as f64 / c.demand as f64)
                .sum::<f64>()
                / self.completions.len() as f64
        });
        Ok(MetricsSummary {
            mu_unsatisfied: self.unsatisfied_sum as f64 / self.rounds as f64,
            mu_completion,
            tasks_completed: self.completions.len() as u64,
            tasks_spawned: self.spawned,
        })
    }
}
