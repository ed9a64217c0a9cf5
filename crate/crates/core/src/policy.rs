//! Follower behaviour.
//!
//! A follower is either searching (a Lévy leg for random-walk agents, a
//! propagator-guided or uniformly random single step for PROP agents),
//! moving to a task it can see, or working on the task under it. Working
//! agents spend `t_d` consecutive rounds per unit of demand. PROP agents
//! may release a task after each unit with probability `1 - min(r/k, 1)`
//! and never return to it; random-walk agents stay until completion.
//!
//! Every decision reads only the round-start [`View`], so agents may be
//! evaluated in any order.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::arrivals::{Task, TaskId};
use crate::grid::{step_toward, Direction, Lattice, Position};
use crate::propagation::{PropagatorLattice, PropagatorState, TaskInfo};

/// Which algorithm a division-of-labour follower runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubPolicy {
    Rw,
    Prop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Rw,
    Prop,
    Dl(SubPolicy),
    Hybrid { t_rw: u32 },
}

/// Remaining straight-line part of a Lévy flight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevyLeg {
    pub direction: Direction,
    pub remaining: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Behavior {
    /// No task assigned. `leg` is only used by random-walk steps.
    Searching {
        leg: Option<LevyLeg>,
    },
    MovingToTarget {
        task: TaskId,
        target: Position,
    },
    Working {
        task: TaskId,
    },
}

impl Behavior {
    pub const IDLE: Behavior = Behavior::Searching { leg: None };

    pub fn assigned_task(&self) -> Option<TaskId> {
        match *self {
            Behavior::MovingToTarget { task, .. } | Behavior::Working { task } => Some(task),
            Behavior::Searching { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FollowerAgent {
    pub id: u32,
    pub position: Position,
    pub policy: PolicyKind,
    pub behavior: Behavior,
    pub blacklist: BTreeSet<TaskId>,
    /// Consecutive rounds spent on the current unit of demand.
    pub work_counter: u32,
    /// Rounds of forced random walk left (hybrid followers only).
    pub forced_rw_remaining: u32,
}

impl FollowerAgent {
    pub fn new(id: u32, position: Position, policy: PolicyKind) -> Self {
        let forced_rw_remaining = match policy {
            PolicyKind::Hybrid { t_rw } => t_rw,
            _ => 0,
        };
        Self {
            id,
            position,
            policy,
            behavior: Behavior::IDLE,
            blacklist: BTreeSet::new(),
            work_counter: 0,
            forced_rw_remaining,
        }
    }

    fn left_task(&mut self) {
        self.behavior = Behavior::IDLE;
        self.work_counter = 0;
        if let PolicyKind::Hybrid { t_rw } = self.policy {
            self.forced_rw_remaining = t_rw;
        }
    }
}

/// Per-follower random streams.
#[derive(Debug, Clone)]
pub struct FollowerRng {
    pub policy: ChaCha8Rng,
    pub levy: ChaCha8Rng,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyParams {
    /// Chebyshev sensing radius `I` of followers.
    pub follower_radius: i32,
    /// Rounds per unit of demand (`t_d`).
    pub work_period: u32,
    pub levy_alpha: f64,
    /// Longest Lévy leg, in cells.
    pub leg_cap: u32,
}

/// Read-only round-start state a follower decides from.
#[derive(Clone, Copy)]
pub struct View<'a> {
    pub lattice: Lattice,
    pub params: &'a PolicyParams,
    pub tasks: &'a [Option<Task>],
    pub followers: &'a [FollowerAgent],
    pub propagators: Option<&'a PropagatorLattice>,
}

impl<'a> View<'a> {
    pub fn task_at(&self, p: Position) -> Option<&'a Task> {
        self.tasks[self.lattice.index(p)].as_ref()
    }

    pub fn propagator_at(&self, p: Position) -> Option<&'a PropagatorState> {
        self.propagators.map(|l| l.at(p))
    }
}

/// Outcome of one follower's transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub direction: Direction,
    /// Task whose residual this follower decrements this round.
    pub work_unit: Option<TaskId>,
}

impl Step {
    fn moving(direction: Direction) -> Self {
        Self {
            direction,
            work_unit: None,
        }
    }
}

/// Applies one round of `agent`'s policy.
pub fn decide(agent: &mut FollowerAgent, view: &View<'_>, rng: &mut FollowerRng) -> Step {
    match agent.policy {
        PolicyKind::Rw | PolicyKind::Dl(SubPolicy::Rw) => rw_transition(agent, view, rng),
        PolicyKind::Prop | PolicyKind::Dl(SubPolicy::Prop) => prop_transition(agent, view, rng),
        PolicyKind::Hybrid { .. } => hybrid_transition(agent, view, rng),
    }
}

/// Leg length for a uniform draw `u ∈ (0, 1]`: `floor(u^(-1/α))`, capped,
/// so that `P(length ≥ L) = L^(-α)` below the cap.
pub fn levy_length(u: f64, alpha: f64, cap: u32) -> u32 {
    let raw = u.powf(-1.0 / alpha).floor();
    if raw >= cap as f64 {
        cap
    } else {
        (raw as u32).max(1)
    }
}

/// Fresh Lévy leg: uniform cardinal direction, power-law length.
pub fn levy_step<R: Rng + ?Sized>(rng: &mut R, alpha: f64, cap: u32) -> LevyLeg {
    let direction = Direction::CARDINAL[rng.random_range(0..4)];
    let u = 1.0 - rng.random::<f64>();
    LevyLeg {
        direction,
        remaining: levy_length(u, alpha, cap),
    }
}

/// Advances the work counter; returns the new counter and whether a unit
/// of demand was completed this round.
pub fn work_tick(counter: u32, work_period: u32) -> (u32, bool) {
    let next = counter + 1;
    if next >= work_period {
        (0, true)
    } else {
        (next, false)
    }
}

pub fn stay_probability(residual: u32, assigned: u32) -> f64 {
    debug_assert!(assigned >= 1);
    (residual as f64 / assigned as f64).min(1.0)
}

/// Whether a follower keeps working after finishing a unit. `residual` is
/// what is left after its own unit, `assigned` counts the followers
/// assigned to the task within its radius, itself included.
pub fn decide_stay<R: Rng + ?Sized>(residual: u32, assigned: u32, rng: &mut R) -> bool {
    if residual == 0 {
        return false;
    }
    let p = stay_probability(residual, assigned.max(1));
    p >= 1.0 || rng.random::<f64>() < p
}

/// Division-of-labour split: the first `round(p_prop·F)` followers by id
/// run PROP, the rest random walk.
pub fn dl_assign(follower_count: u32, p_prop: f64) -> Vec<SubPolicy> {
    let n_prop = (p_prop * follower_count as f64).round() as u32;
    (0..follower_count)
        .map(|i| {
            if i < n_prop {
                SubPolicy::Prop
            } else {
                SubPolicy::Rw
            }
        })
        .collect()
}

/// Propagator records a PROP follower at `pos` may steer toward, with
/// their selection probabilities `(r_i / d_i²) / Σ_j (r_j / d_j²)`.
pub fn move_probabilities<'a>(
    pos: Position,
    records: impl Iterator<Item = &'a TaskInfo>,
    blacklist: &BTreeSet<TaskId>,
) -> Vec<(TaskInfo, f64)> {
    let mut out: Vec<(TaskInfo, f64)> = records
        .filter(|r| r.residual > 0 && r.location != pos && !blacklist.contains(&r.task))
        .map(|r| (*r, r.residual as f64 / pos.dist_sq(r.location) as f64))
        .collect();
    let total: f64 = out.iter().map(|(_, w)| w).sum();
    for (_, w) in out.iter_mut() {
        *w /= total;
    }
    out
}

/// Index of the entry selected by `u ∈ [0, 1)` under cumulative weights.
pub fn sample_weighted(weights: &[(TaskInfo, f64)], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, (_, w)) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Number of followers within the sensing radius of `pos` assigned to `task`.
pub fn assigned_count(view: &View<'_>, pos: Position, task: TaskId) -> u32 {
    view.followers
        .iter()
        .filter(|f| f.position.chebyshev(pos) <= view.params.follower_radius)
        .filter(|f| f.behavior.assigned_task() == Some(task))
        .count() as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Release {
    OnCompletion,
    Probabilistic,
}

/// Random-walk transition: commit to the closest visible task and work it
/// to completion, otherwise continue the Lévy walk.
pub fn rw_transition(agent: &mut FollowerAgent, view: &View<'_>, rng: &mut FollowerRng) -> Step {
    if let Some(step) = continue_work(agent, view, rng, Release::OnCompletion) {
        return step;
    }
    if let Some(target) = acquire(agent, view) {
        return go_to(agent, target, view, rng, Release::OnCompletion);
    }
    Step::moving(levy_walk(agent, view, rng))
}

/// PROP transition: keep working, head for a visible task, or follow propagator records.
pub fn prop_transition(agent: &mut FollowerAgent, view: &View<'_>, rng: &mut FollowerRng) -> Step {
    if let Some(step) = continue_work(agent, view, rng, Release::Probabilistic) {
        return step;
    }
    choose_move_prop(agent, view, rng)
}

/// Search step of a PROP follower that is not working.
pub fn choose_move_prop(agent: &mut FollowerAgent, view: &View<'_>, rng: &mut FollowerRng) -> Step {
    if let Some(target) = acquire(agent, view) {
        return go_to(agent, target, view, rng, Release::Probabilistic);
    }
    agent.behavior = Behavior::IDLE;
    agent.work_counter = 0;
    let choices = match view.propagator_at(agent.position) {
        Some(p) => move_probabilities(agent.position, p.known(), &agent.blacklist),
        None => Vec::new(),
    };
    let direction = if choices.is_empty() {
        Direction::CARDINAL[rng.policy.random_range(0..4)]
    } else {
        let i = sample_weighted(&choices, rng.policy.random::<f64>());
        step_toward(agent.position, choices[i].0.location)
    };
    Step::moving(direction)
}

/// Hybrid transition: a forced Lévy walk for `t_rw` rounds at the start
/// and after every task departure, PROP otherwise. Spotting a task ends
/// the forced walk.
pub fn hybrid_transition(
    agent: &mut FollowerAgent,
    view: &View<'_>,
    rng: &mut FollowerRng,
) -> Step {
    if let Some(step) = continue_work(agent, view, rng, Release::Probabilistic) {
        return step;
    }
    if agent.forced_rw_remaining == 0 {
        return choose_move_prop(agent, view, rng);
    }
    if let Some(target) = acquire(agent, view) {
        agent.forced_rw_remaining = 0;
        return go_to(agent, target, view, rng, Release::Probabilistic);
    }
    agent.forced_rw_remaining -= 1;
    Step::moving(levy_walk(agent, view, rng))
}

/// Keeps a working follower on its task. Returns `None` (with the
/// follower released) when the task is gone.
fn continue_work(
    agent: &mut FollowerAgent,
    view: &View<'_>,
    rng: &mut FollowerRng,
    release: Release,
) -> Option<Step> {
    let Behavior::Working { task } = agent.behavior else {
        return None;
    };
    match view.task_at(agent.position) {
        Some(t) if t.id == task => Some(work_round(agent, t, view, rng, release)),
        _ => {
            agent.left_task();
            None
        }
    }
}

fn work_round(
    agent: &mut FollowerAgent,
    task: &Task,
    view: &View<'_>,
    rng: &mut FollowerRng,
    release: Release,
) -> Step {
    agent.behavior = Behavior::Working { task: task.id };
    let (counter, unit) = work_tick(agent.work_counter, view.params.work_period);
    agent.work_counter = counter;
    if unit {
        let left = task.residual - 1;
        if left == 0 {
            agent.left_task();
        } else if release == Release::Probabilistic {
            let k = assigned_count(view, agent.position, task.id).max(1);
            if !decide_stay(left, k, &mut rng.policy) {
                agent.blacklist.insert(task.id);
                agent.left_task();
            }
        }
    }
    Step {
        direction: Direction::Stay,
        work_unit: unit.then_some(task.id),
    }
}

/// The task this follower should head for: its current target while that
/// task is still there, else the closest visible non-blacklisted task
/// (ties to the lowest id).
fn acquire(agent: &FollowerAgent, view: &View<'_>) -> Option<(TaskId, Position)> {
    if let Behavior::MovingToTarget { task, target } = agent.behavior {
        if view.task_at(target).map(|t| t.id) == Some(task) && !agent.blacklist.contains(&task) {
            return Some((task, target));
        }
    }
    view.lattice
        .square(agent.position, view.params.follower_radius)
        .filter_map(|p| view.task_at(p))
        .filter(|t| !agent.blacklist.contains(&t.id))
        .min_by_key(|t| (agent.position.dist_sq(t.location), t.id))
        .map(|t| (t.id, t.location))
}

fn go_to(
    agent: &mut FollowerAgent,
    (task, target): (TaskId, Position),
    view: &View<'_>,
    rng: &mut FollowerRng,
    release: Release,
) -> Step {
    if agent.position == target {
        let live = view.task_at(target).expect("acquired task is live");
        if agent.behavior != (Behavior::Working { task }) {
            agent.work_counter = 0;
        }
        return work_round(agent, live, view, rng, release);
    }
    agent.behavior = Behavior::MovingToTarget { task, target };
    agent.work_counter = 0;
    Step::moving(step_toward(agent.position, target))
}

fn levy_walk(agent: &mut FollowerAgent, view: &View<'_>, rng: &mut FollowerRng) -> Direction {
    let lattice = view.lattice;
    let pos = agent.position;
    agent.work_counter = 0;
    let current = match agent.behavior {
        Behavior::Searching { leg: Some(leg) }
            if leg.remaining > 0 && !lattice.is_blocked(pos, leg.direction) =>
        {
            Some(leg)
        }
        _ => None,
    };
    let leg = match current {
        Some(leg) => leg,
        None if Direction::CARDINAL
            .iter()
            .all(|&d| lattice.is_blocked(pos, d)) =>
        {
            agent.behavior = Behavior::IDLE;
            return Direction::Stay;
        }
        None => loop {
            let leg = levy_step(&mut rng.levy, view.params.levy_alpha, view.params.leg_cap);
            if !lattice.is_blocked(pos, leg.direction) {
                break leg;
            }
        },
    };
    agent.behavior = Behavior::Searching {
        leg: Some(LevyLeg {
            remaining: leg.remaining - 1,
            ..leg
        }),
    };
    leg.direction
}
