//! The round engine.
//!
//! A round is computed entirely from the state at its start: every
//! follower decides from the same snapshot, propagators sense and
//! broadcast from the same task layer, and only then are moves, work and
//! arrivals committed together.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::arrivals::{ArrivalField, ArrivalParams, SpawnRecord, Task, TaskId};
use crate::config::{Algorithm, ConfigError, ExperimentConfig};
use crate::grid::{Lattice, Position};
use crate::metrics::{MetricsAccumulator, MetricsSummary};
use crate::policy::{self, FollowerAgent, FollowerRng, PolicyKind, PolicyParams, Step, View};
use crate::propagation::{PropagationParams, PropagatorLattice, PropagatorState};
use crate::rng::{StreamLabel, StreamSet};

/// Configuration of one vertex as seen by a neighbour.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexView<'a> {
    pub position: Position,
    pub task: Option<&'a Task>,
    pub propagator: Option<&'a PropagatorState>,
    pub followers: Vec<u32>,
}

/// What changed in one round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundReport {
    pub round: u64,
    /// Tasks whose residual reached zero, with their final state.
    pub completed: Vec<Task>,
    pub spawned: Vec<SpawnRecord>,
    /// Post-commit sum of live residual demands.
    pub unsatisfied: u64,
}

#[derive(Debug, Clone)]
pub struct WorldState {
    round: u64,
    lattice: Lattice,
    policy_params: PolicyParams,
    tasks: Vec<Option<Task>>,
    arrivals: ArrivalField,
    propagators: Option<PropagatorLattice>,
    followers: Vec<FollowerAgent>,
    rngs: Vec<FollowerRng>,
    next_task_id: TaskId,
    live_residual: u64,
    spawned_demand: u64,
    work_units: u64,
    spawn_log: Vec<SpawnRecord>,
}

impl WorldState {
    /// Round-0 state of a trial. `config` must be valid.
    pub fn new(config: &ExperimentConfig, seed: u64) -> Self {
        let lattice = Lattice::new(config.width, config.height);
        let streams = StreamSet::new(seed);
        let mut placement = streams.stream(StreamLabel::Placement, 0);
        let split = match config.algo {
            Algorithm::Dl { p_prop } => Some(policy::dl_assign(config.followers, p_prop)),
            _ => None,
        };
        let followers = (0..config.followers)
            .map(|id| {
                let pos = Position::new(
                    placement.random_range(0..lattice.width),
                    placement.random_range(0..lattice.height),
                );
                let kind = match config.algo {
                    Algorithm::Rw => PolicyKind::Rw,
                    Algorithm::Prop => PolicyKind::Prop,
                    Algorithm::Dl { .. } => {
                        PolicyKind::Dl(split.as_ref().expect("dl split")[id as usize])
                    }
                    Algorithm::Hybrid { t_rw } => PolicyKind::Hybrid { t_rw },
                };
                FollowerAgent::new(id, pos, kind)
            })
            .collect();
        let rngs = (0..config.followers)
            .map(|id| FollowerRng {
                policy: streams.stream(StreamLabel::Policy, id),
                levy: streams.stream(StreamLabel::Levy, id),
            })
            .collect();
        let propagators = config.algo.uses_propagators().then(|| {
            PropagatorLattice::new(
                lattice,
                PropagationParams {
                    radius: config.i_p as i32,
                    period: config.t_p as u64,
                    max_distance: config.d_p,
                },
            )
        });
        let params =
            ArrivalParams::from_mean_gap(config.lambda_inv, config.demand_mean, config.demand_var);
        let mut world = Self {
            round: 0,
            lattice,
            policy_params: PolicyParams {
                follower_radius: config.follower_radius as i32,
                work_period: config.t_d,
                levy_alpha: config.levy_alpha,
                leg_cap: config.width.max(config.height),
            },
            tasks: vec![None; lattice.len()],
            arrivals: ArrivalField::new(lattice, params, &streams),
            propagators,
            followers,
            rngs,
            next_task_id: 0,
            live_residual: 0,
            spawned_demand: 0,
            work_units: 0,
            spawn_log: Vec::new(),
        };
        let initial = world
            .arrivals
            .tick(0, &world.tasks, &mut world.next_task_id);
        debug_assert!(initial.is_empty());
        world
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn followers(&self) -> &[FollowerAgent] {
        &self.followers
    }

    /// Replaces the follower at `id`'s slot, e.g. to stage a scenario.
    pub fn follower_mut(&mut self, id: u32) -> &mut FollowerAgent {
        &mut self.followers[id as usize]
    }

    pub fn tasks(&self) -> impl Iterator<Item = &Task> + '_ {
        self.tasks.iter().flatten()
    }

    pub fn task_at(&self, p: Position) -> Option<&Task> {
        self.tasks[self.lattice.index(p)].as_ref()
    }

    pub fn propagators(&self) -> Option<&PropagatorLattice> {
        self.propagators.as_ref()
    }

    pub fn arrivals(&self) -> &ArrivalField {
        &self.arrivals
    }

    pub fn spawn_log(&self) -> &[SpawnRecord] {
        &self.spawn_log
    }

    pub fn unsatisfied_demand(&self) -> u64 {
        self.live_residual
    }

    /// Spawned demand minus applied work units; equals the live residual
    /// sum at every round.
    pub fn outstanding_demand(&self) -> u64 {
        self.spawned_demand - self.work_units
    }

    /// Places a task outside the arrival process (scenario set-up). The
    /// vertex's countdown stops until this task completes.
    pub fn insert_task(&mut self, at: Position, demand: u32) -> TaskId {
        assert!(demand >= 1);
        let v = self.lattice.index(at);
        assert!(self.tasks[v].is_none(), "vertex {at} already has a task");
        let id = self.next_task_id;
        self.next_task_id += 1;
        self.tasks[v] = Some(Task {
            id,
            location: at,
            demand,
            residual: demand,
            spawn_round: self.round,
        });
        self.arrivals.occupy(v);
        self.live_residual += demand as u64;
        self.spawned_demand += demand as u64;
        id
    }

    /// In-bounds vertices within Chebyshev `radius` of `center`, keyed by
    /// their offset from it.
    pub fn neighborhood(&self, center: Position, radius: u32) -> Vec<((i32, i32), VertexView<'_>)> {
        self.lattice
            .square(center, radius as i32)
            .map(|p| {
                let view = VertexView {
                    position: p,
                    task: self.task_at(p),
                    propagator: self.propagators.as_ref().map(|l| l.at(p)),
                    followers: self
                        .followers
                        .iter()
                        .filter(|f| f.position == p)
                        .map(|f| f.id)
                        .collect(),
                };
                ((p.x - center.x, p.y - center.y), view)
            })
            .collect()
    }

    /// Advances one round.
    pub fn step_round(&mut self) -> RoundReport {
        let t = self.round + 1;

        let mut next = self.followers.clone();
        let steps: Vec<Step> = {
            let view = View {
                lattice: self.lattice,
                params: &self.policy_params,
                tasks: &self.tasks,
                followers: &self.followers,
                propagators: self.propagators.as_ref(),
            };
            next.iter_mut()
                .zip(self.rngs.iter_mut())
                .map(|(agent, rng)| policy::decide(agent, &view, rng))
                .collect()
        };

        if let Some(props) = self.propagators.as_mut() {
            props.step(t, &self.tasks);
        }

        let mut units: HashMap<usize, u32> = HashMap::new();
        for (agent, step) in next.iter_mut().zip(&steps) {
            if let Some(task) = step.work_unit {
                let v = self.lattice.index(agent.position);
                debug_assert_eq!(self.tasks[v].map(|t| t.id), Some(task));
                *units.entry(v).or_default() += 1;
            }
            agent.position = self.lattice.apply_move(agent.position, step.direction);
        }
        self.followers = next;

        let mut report = RoundReport {
            round: t,
            ..RoundReport::default()
        };
        let mut worked: Vec<(usize, u32)> = units.into_iter().collect();
        worked.sort_unstable();
        for (v, n) in worked {
            let task = self.tasks[v].as_mut().expect("work on a live task");
            let applied = n.min(task.residual);
            task.residual -= applied;
            self.work_units += applied as u64;
            self.live_residual -= applied as u64;
            if task.residual == 0 {
                report.completed.push(*task);
                self.tasks[v] = None;
            }
        }

        for (task, record) in self.arrivals.tick(t, &self.tasks, &mut self.next_task_id) {
            let v = self.lattice.index(task.location);
            self.tasks[v] = Some(task);
            self.live_residual += task.demand as u64;
            self.spawned_demand += task.demand as u64;
            self.spawn_log.push(record);
            report.spawned.push(record);
        }

        self.round = t;
        report.unsatisfied = self.live_residual;
        report
    }
}

/// Outcome of one seeded trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub metrics: MetricsSummary,
    pub wall_time: Duration,
}

/// Runs `config.rounds` rounds from the round-0 state seeded by `seed`.
pub fn run_trial(config: &ExperimentConfig, seed: u64) -> Result<TrialResult, ConfigError> {
    config.validate()?;
    let started = Instant::now();
    let mut world = WorldState::new(config, seed);
    let mut acc = MetricsAccumulator::new();
    for _ in 0..config.rounds {
        let report = world.step_round();
        for task in &report.completed {
            acc.record_completion(task, report.round);
        }
        for _ in &report.spawned {
            acc.record_spawn();
        }
        acc.record_round(report.unsatisfied);
    }
    Ok(TrialResult {
        config: config.clone(),
        seed,
        metrics: acc.finalize().expect("at least one round"),
        wall_time: started.elapsed(),
    })
}
