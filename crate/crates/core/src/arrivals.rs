//! Dynamic task arrivals.
//!
//! Each vertex runs an independent countdown drawn from an exponential
//! distribution. The countdown starts at round 0 and again in the round the
//! previous task at that vertex completes; it never runs while a task
//! occupies the vertex. Demands are normal draws rounded to a positive
//! integer.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::grid::{Lattice, Position};
use crate::rng::{StreamLabel, StreamSet};

pub type TaskId = u64;

/// Rate and demand distribution of the arrival process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalParams {
    /// Arrivals per vertex per round (λ).
    pub rate: f64,
    pub demand_mean: f64,
    pub demand_var: f64,
}

impl ArrivalParams {
    /// An infinite `lambda_inv` gives rate zero: no task ever arrives.
    pub fn from_mean_gap(lambda_inv: f64, demand_mean: f64, demand_var: f64) -> Self {
        assert!(lambda_inv > 0.0 && demand_var > 0.0);
        Self {
            rate: 1.0 / lambda_inv,
            demand_mean,
            demand_var,
        }
    }
}

/// A live task on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Task {
    pub id: TaskId,
    pub location: Position,
    pub demand: u32,
    pub residual: u32,
    pub spawn_round: u64,
}

/// Discretizes a raw exponential draw: nearest integer, at least one round.
pub fn interarrival_from_draw(raw: f64) -> u64 {
    let rounded = raw.round();
    if rounded < 1.0 {
        1
    } else if rounded >= u64::MAX as f64 {
        u64::MAX
    } else {
        rounded as u64
    }
}

/// Discretizes a raw normal draw; `None` means the draw must be rejected.
pub fn demand_from_draw(raw: f64) -> Option<u32> {
    let rounded = raw.round();
    if rounded >= 1.0 {
        Some(rounded.min(u32::MAX as f64) as u32)
    } else {
        None
    }
}

pub fn sample_interarrival<R: Rng + ?Sized>(params: &ArrivalParams, rng: &mut R) -> u64 {
    if params.rate == 0.0 {
        return u64::MAX;
    }
    let exp = Exp::new(params.rate).expect("positive arrival rate");
    interarrival_from_draw(exp.sample(rng))
}

pub fn sample_demand<R: Rng + ?Sized>(params: &ArrivalParams, rng: &mut R) -> u32 {
    let normal =
        Normal::new(params.demand_mean, params.demand_var.sqrt()).expect("positive variance");
    loop {
        if let Some(d) = demand_from_draw(normal.sample(rng)) {
            return d;
        }
    }
}

/// One spawn, kept for auditing arrival sequences across runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpawnRecord {
    pub task: TaskId,
    pub location: Position,
    pub round: u64,
    pub demand: u32,
    /// How many tasks this vertex had spawned before this one.
    pub ordinal: u32,
    /// Length of the countdown that produced this task.
    pub gap: u64,
}

#[derive(Debug, Clone, Copy)]
struct Countdown {
    started: u64,
    due: u64,
}

/// Per-vertex arrival clocks, each with its own random stream.
#[derive(Debug, Clone)]
pub struct ArrivalField {
    params: ArrivalParams,
    lattice: Lattice,
    clocks: Vec<Option<Countdown>>,
    spawned: Vec<u32>,
    streams: Vec<ChaCha8Rng>,
}

impl ArrivalField {
    pub fn new(lattice: Lattice, params: ArrivalParams, streams: &StreamSet) -> Self {
        let n = lattice.len();
        Self {
            params,
            lattice,
            clocks: vec![None; n],
            spawned: vec![0; n],
            streams: (0..n)
                .map(|v| streams.stream(StreamLabel::Arrivals, v as u32))
                .collect(),
        }
    }

    pub fn params(&self) -> &ArrivalParams {
        &self.params
    }

    /// Rounds left until vertex `v` spawns, if its countdown is running.
    pub fn remaining(&self, v: usize, round: u64) -> Option<u64> {
        self.clocks[v].map(|c| c.due.saturating_sub(round))
    }

    pub fn is_running(&self, v: usize) -> bool {
        self.clocks[v].is_some()
    }

    /// Marks vertex `v` occupied by a task placed from outside the process.
    pub fn occupy(&mut self, v: usize) {
        self.clocks[v] = None;
    }

    /// Arrival transition for `round`, applied to the post-completion task
    /// layer. Due countdowns spawn a task (their vertex is necessarily
    /// free); free vertices without a countdown start one.
    #[allow(clippy::needless_range_loop)]
    pub fn tick(
        &mut self,
        round: u64,
        tasks: &[Option<Task>],
        next_id: &mut TaskId,
    ) -> Vec<(Task, SpawnRecord)> {
        let mut out = Vec::new();
        for v in 0..self.clocks.len() {
            match self.clocks[v] {
                Some(c) if c.due == round => {
                    debug_assert!(tasks[v].is_none(), "countdown ran on an occupied vertex");
                    let demand = sample_demand(&self.params, &mut self.streams[v]);
                    let location = self.lattice.position(v);
                    let task = Task {
                        id: *next_id,
                        location,
                        demand,
                        residual: demand,
                        spawn_round: round,
                    };
                    *next_id += 1;
                    let record = SpawnRecord {
                        task: task.id,
                        location,
                        round,
                        demand,
                        ordinal: self.spawned[v],
                        gap: c.due - c.started,
                    };
                    self.spawned[v] += 1;
                    self.clocks[v] = None;
                    out.push((task, record));
                }
                Some(_) => {}
                None if tasks[v].is_none() => {
                    let gap = sample_interarrival(&self.params, &mut self.streams[v]);
                    self.clocks[v] = Some(Countdown {
                        started: round,
                        due: round.saturating_add(gap),
                    });
                }
                None => {}
            }
        }
        out
    }
}
