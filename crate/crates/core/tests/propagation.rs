use std::collections::{HashMap, HashSet, VecDeque};

use swarm_core::propagation::{PropagationParams, PropagatorLattice};
use swarm_core::{Algorithm, ExperimentConfig, Lattice, Position, Task, WorldState};

fn lone_task(lattice: Lattice, at: Position, residual: u32) -> Vec<Option<Task>> {
    let mut tasks = vec![None; lattice.len()];
    tasks[lattice.index(at)] = Some(Task {
        id: 0,
        location: at,
        demand: residual,
        residual,
        spawn_round: 0,
    });
    tasks
}

/// Vertices reached in at most `hops` relays, each relay spanning
/// Chebyshev distance `radius` and landing within `reach` of the task.
fn bfs_front(
    lattice: Lattice,
    source: Position,
    radius: i32,
    reach: f64,
    hops: u32,
) -> HashSet<Position> {
    let within =
        |q: Position| ((q.x - source.x).pow(2) + (q.y - source.y).pow(2)) as f64 <= reach * reach;
    let mut depth: HashMap<Position, u32> = HashMap::from([(source, 0)]);
    let mut queue = VecDeque::from([source]);
    while let Some(p) = queue.pop_front() {
        let d = depth[&p];
        if d == hops {
            continue;
        }
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let q = Position::new(p.x + dx, p.y + dy);
                if lattice.contains(q) && within(q) && !depth.contains_key(&q) {
                    depth.insert(q, d + 1);
                    queue.push_back(q);
                }
            }
        }
    }
    depth.into_keys().collect()
}

fn informed(props: &PropagatorLattice, lattice: Lattice) -> HashSet<Position> {
    lattice
        .positions()
        .filter(|&p| props.at(p).get(0).is_some())
        .collect()
}

fn check_front(source: Position, radius: i32, reach: f64) {
    let lattice = Lattice::new(15, 15);
    let mut props = PropagatorLattice::new(
        lattice,
        PropagationParams {
            radius,
            period: 1,
            max_distance: reach,
        },
    );
    let tasks = lone_task(lattice, source, 5);
    props.sense_all(&tasks);
    assert_eq!(informed(&props, lattice), HashSet::from([source]));
    for k in 1..=15 {
        props.sense_all(&tasks);
        props.broadcast();
        let expected = bfs_front(lattice, source, radius, reach, k);
        assert_eq!(
            informed(&props, lattice),
            expected,
            "k={k} source={source} I_p={radius} d_p={reach}"
        );
    }
}

#[test]
fn front_matches_bfs_oracle() {
    check_front(Position::new(7, 7), 1, 100.0);
    check_front(Position::new(7, 7), 2, 5.0);
    check_front(Position::new(1, 2), 2, 6.5);
    check_front(Position::new(14, 0), 3, 9.0);
    check_front(Position::new(4, 10), 1, 3.0);
}

#[test]
fn front_is_a_clipped_chebyshev_square() {
    let lattice = Lattice::new(15, 15);
    let source = Position::new(6, 8);
    let (radius, reach) = (2, 6.0);
    let mut props = PropagatorLattice::new(
        lattice,
        PropagationParams {
            radius,
            period: 1,
            max_distance: reach,
        },
    );
    let tasks = lone_task(lattice, source, 3);
    props.sense_all(&tasks);
    for k in 1..=4 {
        props.sense_all(&tasks);
        props.broadcast();
        let expected: HashSet<Position> = lattice
            .positions()
            .filter(|q| q.chebyshev(source) <= k * radius && q.euclidean(source) <= reach)
            .collect();
        assert_eq!(informed(&props, lattice), expected, "k={k}");
    }
}

#[test]
fn residual_updates_follow_the_front() {
    let lattice = Lattice::new(15, 15);
    let source = Position::new(7, 7);
    let mut props = PropagatorLattice::new(
        lattice,
        PropagationParams {
            radius: 1,
            period: 1,
            max_distance: 100.0,
        },
    );
    let mut tasks = lone_task(lattice, source, 9);
    for _ in 0..10 {
        props.sense_all(&tasks);
        props.broadcast();
    }
    assert!(lattice
        .positions()
        .all(|p| props.at(p).get(0).map(|r| r.residual) == Some(9)));
    tasks[lattice.index(source)].as_mut().unwrap().residual = 4;
    for k in 1..=7 {
        props.sense_all(&tasks);
        props.broadcast();
        for p in lattice.positions() {
            let want = if p.chebyshev(source) <= k { 4 } else { 9 };
            assert_eq!(props.at(p).get(0).unwrap().residual, want, "k={k} at {p}");
        }
    }
}

fn prop_world(width: u32, lambda_inv: f64, seed: u64) -> (ExperimentConfig, WorldState) {
    let cfg = ExperimentConfig {
        width,
        height: width,
        followers: 10,
        lambda_inv,
        d_p: 6.0,
        ..ExperimentConfig::with_algo(Algorithm::Prop)
    };
    let world = WorldState::new(&cfg, seed);
    (cfg, world)
}

#[test]
fn records_respect_the_distance_cutoff() {
    let (cfg, mut world) = prop_world(20, 400.0, 3);
    for _ in 0..400 {
        world.step_round();
        let props = world.propagators().unwrap();
        for state in props.states() {
            for r in state.known() {
                assert!(
                    r.location == state.position()
                        || r.location.euclidean(state.position()) <= cfg.d_p,
                    "record of task at {} stored at {}",
                    r.location,
                    state.position()
                );
            }
        }
    }
}

#[test]
fn stored_residuals_never_increase() {
    let (_, mut world) = prop_world(20, 300.0, 11);
    let mut seen: HashMap<(Position, u64), u32> = HashMap::new();
    for _ in 0..400 {
        world.step_round();
        for state in world.propagators().unwrap().states() {
            for r in state.known() {
                if let Some(old) = seen.insert((state.position(), r.task), r.residual) {
                    assert!(
                        r.residual <= old,
                        "task {} at {} rose {old} -> {}",
                        r.task,
                        state.position(),
                        r.residual
                    );
                }
            }
        }
    }
    assert!(!seen.is_empty());
}

#[test]
fn finished_tasks_are_forgotten() {
    let cfg = ExperimentConfig {
        width: 15,
        height: 15,
        followers: 1,
        lambda_inv: f64::INFINITY,
        ..ExperimentConfig::with_algo(Algorithm::Prop)
    };
    let mut world = WorldState::new(&cfg, 0);
    let at = world.followers()[0].position;
    world.insert_task(at, 2);
    let mut done = None;
    for _ in 0..200 {
        let report = world.step_round();
        if !report.completed.is_empty() {
            done = Some(report.round);
        }
    }
    assert_eq!(done, Some(10));
    assert_eq!(world.propagators().unwrap().record_count(), 0);
}
