//! The propagator lattice.
//!
//! One immobile propagator sits on every vertex. It senses the task on its
//! own vertex every round and, every `period` rounds, forwards the records
//! that changed since its previous broadcast to the propagators within its
//! Chebyshev radius that lie within `max_distance` (Euclidean) of the task.
//! Incoming records are min-merged on residual demand. A residual of zero
//! erases the task: the record is forwarded once more and then dropped.

use crate::arrivals::{Task, TaskId};
use crate::grid::{Lattice, Position};

/// What a propagator knows about one task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskInfo {
    pub task: TaskId,
    pub location: Position,
    pub residual: u32,
}

/// Result of folding an incoming record into the stored one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Merged {
    pub record: Option<TaskInfo>,
    /// The stored record is new or its residual dropped; it becomes fresh.
    pub changed: bool,
}

/// Min-merge on residual demand.
///
/// An unknown task arriving with residual zero is ignored: the erasure
/// has nothing to erase here, and storing it would echo it back forever.
pub fn merge(existing: Option<&TaskInfo>, incoming: &TaskInfo) -> Merged {
    match existing {
        None if incoming.residual == 0 => Merged {
            record: None,
            changed: false,
        },
        None => Merged {
            record: Some(*incoming),
            changed: true,
        },
        Some(old) => {
            debug_assert_eq!(old.task, incoming.task);
            if incoming.residual < old.residual {
                Merged {
                    record: Some(TaskInfo {
                        residual: incoming.residual,
                        ..*old
                    }),
                    changed: true,
                }
            } else {
                Merged {
                    record: Some(*old),
                    changed: false,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Entry {
    info: TaskInfo,
    fresh: bool,
}

/// Records held by one propagator, ordered by task id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropagatorState {
    position: Position,
    entries: Vec<Entry>,
}

impl PropagatorState {
    pub fn new(position: Position) -> Self {
        Self {
            position,
            entries: Vec::new(),
        }
    }

    pub fn position(&self) -> Position {
        self.position
    }

    /// Known records in ascending task id order.
    pub fn known(&self) -> impl Iterator<Item = &TaskInfo> + '_ {
        self.entries.iter().map(|e| &e.info)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, task: TaskId) -> Option<&TaskInfo> {
        self.find(task).ok().map(|i| &self.entries[i].info)
    }

    pub fn is_fresh(&self, task: TaskId) -> bool {
        self.find(task)
            .map(|i| self.entries[i].fresh)
            .unwrap_or(false)
    }

    pub fn has_fresh(&self) -> bool {
        self.entries.iter().any(|e| e.fresh)
    }

    fn find(&self, task: TaskId) -> Result<usize, usize> {
        self.entries.binary_search_by_key(&task, |e| e.info.task)
    }

    /// Folds `incoming` in; returns whether the stored record changed.
    pub fn receive(&mut self, incoming: &TaskInfo) -> bool {
        match self.find(incoming.task) {
            Ok(i) => {
                let m = merge(Some(&self.entries[i].info), incoming);
                if m.changed {
                    self.entries[i] = Entry {
                        info: m.record.expect("merge keeps known records"),
                        fresh: true,
                    };
                }
                m.changed
            }
            Err(i) => {
                let m = merge(None, incoming);
                if let Some(info) = m.record {
                    self.entries.insert(i, Entry { info, fresh: true });
                }
                m.changed
            }
        }
    }

    /// Synchronizes with the task on this propagator's own vertex.
    ///
    /// The live task's residual overwrites the stored one. Records for
    /// tasks located here that are no longer present drop to residual zero
    /// so the erasure propagates.
    pub fn sense_local(&mut self, task_here: Option<&Task>) {
        if let Some(task) = task_here {
            debug_assert_eq!(task.location, self.position);
            let info = TaskInfo {
                task: task.id,
                location: task.location,
                residual: task.residual,
            };
            match self.find(task.id) {
                Ok(i) => {
                    if self.entries[i].info.residual != task.residual {
                        self.entries[i] = Entry { info, fresh: true };
                    }
                }
                Err(i) => self.entries.insert(i, Entry { info, fresh: true }),
            }
        }
        let live = task_here.map(|t| t.id);
        let here = self.position;
        for e in self.entries.iter_mut() {
            if e.info.location == here && Some(e.info.task) != live && e.info.residual != 0 {
                e.info.residual = 0;
                e.fresh = true;
            }
        }
    }

    fn take_fresh(&mut self, out: &mut Vec<TaskInfo>) {
        for e in self.entries.iter_mut().filter(|e| e.fresh) {
            e.fresh = false;
            out.push(e.info);
        }
    }

    fn forget_forwarded_erasure(&mut self, task: TaskId) {
        if let Ok(i) = self.find(task) {
            if self.entries[i].info.residual == 0 {
                self.entries.remove(i);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationParams {
    /// Chebyshev radius `I_p` of a broadcast.
    pub radius: i32,
    /// Broadcast every `period` rounds (`t_p`).
    pub period: u64,
    /// Largest Euclidean distance from a task at which it is stored (`d_p`).
    pub max_distance: f64,
}

/// All propagators of a lattice.
#[derive(Debug, Clone)]
pub struct PropagatorLattice {
    lattice: Lattice,
    params: PropagationParams,
    states: Vec<PropagatorState>,
    outbox: Vec<(usize, TaskInfo)>,
    scratch: Vec<TaskInfo>,
}

impl PropagatorLattice {
    pub fn new(lattice: Lattice, params: PropagationParams) -> Self {
        assert!(params.period >= 1 && params.radius >= 0);
        Self {
            lattice,
            params,
            states: lattice.positions().map(PropagatorState::new).collect(),
            outbox: Vec::new(),
            scratch: Vec::new(),
        }
    }

    pub fn params(&self) -> &PropagationParams {
        &self.params
    }

    pub fn at(&self, pos: Position) -> &PropagatorState {
        &self.states[self.lattice.index(pos)]
    }

    pub fn at_mut(&mut self, pos: Position) -> &mut PropagatorState {
        let i = self.lattice.index(pos);
        &mut self.states[i]
    }

    pub fn states(&self) -> &[PropagatorState] {
        &self.states
    }

    /// Propagator half of the vertex transition for `round`, computed from
    /// the round-start task layer.
    pub fn step(&mut self, round: u64, tasks: &[Option<Task>]) {
        self.sense_all(tasks);
        if round.is_multiple_of(self.params.period) {
            self.broadcast();
        }
    }

    pub fn sense_all(&mut self, tasks: &[Option<Task>]) {
        for (state, task) in self.states.iter_mut().zip(tasks) {
            if task.is_some() || !state.entries.is_empty() {
                state.sense_local(task.as_ref());
            }
        }
    }

    /// Delivers every fresh record to its eligible neighbours. All outgoing
    /// records are collected before any merge, so delivery order is
    /// irrelevant.
    pub fn broadcast(&mut self) {
        let mut outbox = std::mem::take(&mut self.outbox);
        let mut scratch = std::mem::take(&mut self.scratch);
        outbox.clear();
        for (i, state) in self.states.iter_mut().enumerate() {
            if state.entries.is_empty() {
                continue;
            }
            scratch.clear();
            state.take_fresh(&mut scratch);
            outbox.extend(scratch.iter().map(|info| (i, *info)));
        }

        let reach_sq = self.params.max_distance * self.params.max_distance;
        for &(sender, info) in &outbox {
            let from = self.lattice.position(sender);
            for q in self.lattice.square(from, self.params.radius) {
                if q == from || q.dist_sq(info.location) as f64 > reach_sq {
                    continue;
                }
                let qi = self.lattice.index(q);
                self.states[qi].receive(&info);
            }
        }

        for &(sender, info) in &outbox {
            if info.residual == 0 {
                self.states[sender].forget_forwarded_erasure(info.task);
            }
        }
        self.outbox = outbox;
        self.scratch = scratch;
    }

    /// Total number of stored records across the lattice.
    pub fn record_count(&self) -> usize {
        self.states.iter().map(|s| s.entries.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn info(task: TaskId, residual: u32) -> TaskInfo {
        TaskInfo {
            task,
            location: Position::new(3, 3),
            residual,
        }
    }

    fn task(id: TaskId, at: Position, residual: u32) -> Task {
        Task {
            id,
            location: at,
            demand: residual.max(1),
            residual,
            spawn_round: 0,
        }
    }

    #[test]
    fn merge_takes_minimum() {
        let m = merge(Some(&info(1, 7)), &info(1, 5));
        assert_eq!(m.record.unwrap().residual, 5);
        assert!(m.changed);

        let m = merge(Some(&info(1, 5)), &info(1, 7));
        assert_eq!(m.record.unwrap().residual, 5);
        assert!(!m.changed);

        let m = merge(Some(&info(1, 3)), &info(1, 0));
        assert_eq!(m.record.unwrap().residual, 0);
        assert!(m.changed);

        let m = merge(None, &info(1, 4));
        assert_eq!(m.record, Some(info(1, 4)));
        assert!(m.changed);

        let m = merge(None, &info(1, 0));
        assert_eq!(m.record, None);
        assert!(!m.changed);
    }

    #[test]
    fn sensing_tracks_the_live_task() {
        let at = Position::new(3, 3);
        let mut p = PropagatorState::new(at);
        p.sense_local(None);
        assert!(p.is_empty());

        p.sense_local(Some(&task(9, at, 13)));
        assert_eq!(p.get(9).unwrap().residual, 13);
        assert!(p.is_fresh(9));

        let mut out = Vec::new();
        p.take_fresh(&mut out);
        assert!(!p.is_fresh(9));
        p.sense_local(Some(&task(9, at, 13)));
        assert!(!p.is_fresh(9));

        p.sense_local(Some(&task(9, at, 12)));
        assert_eq!(p.get(9).unwrap().residual, 12);
        assert!(p.is_fresh(9));

        p.take_fresh(&mut out);
        p.sense_local(None);
        assert_eq!(p.get(9).unwrap().residual, 0);
        assert!(p.is_fresh(9));
    }

    #[test]
    fn one_broadcast_reaches_the_chebyshev_ring() {
        let lattice = Lattice::new(9, 9);
        let mut lat = PropagatorLattice::new(
            lattice,
            PropagationParams {
                radius: 1,
                period: 1,
                max_distance: 8.0,
            },
        );
        let src = Position::new(4, 4);
        let mut tasks = vec![None; lattice.len()];
        tasks[lattice.index(src)] = Some(task(1, src, 13));
        lat.step(1, &tasks);
        let informed: Vec<Position> = lattice
            .positions()
            .filter(|&p| lat.at(p).get(1).is_some())
            .collect();
        assert_eq!(informed.len(), 9);
        assert!(informed.iter().all(|p| p.chebyshev(src) <= 1));
    }

    #[test]
    fn erasure_is_forwarded_once_then_dropped() {
        let lattice = Lattice::new(7, 7);
        let mut lat = PropagatorLattice::new(
            lattice,
            PropagationParams {
                radius: 1,
                period: 1,
                max_distance: 10.0,
            },
        );
        let src = Position::new(3, 3);
        let mut tasks = vec![None; lattice.len()];
        tasks[lattice.index(src)] = Some(task(1, src, 2));
        for r in 1..=5 {
            lat.step(r, &tasks);
        }
        assert_eq!(lat.record_count(), 49);
        tasks[lattice.index(src)] = None;
        for r in 6..=20 {
            lat.step(r, &tasks);
        }
        assert_eq!(lat.record_count(), 0);
    }
}
