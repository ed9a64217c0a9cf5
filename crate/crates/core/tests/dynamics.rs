use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use swarm_core::arrivals::SpawnRecord;
use swarm_core::{run_trial, Algorithm, Behavior, ExperimentConfig, Position, WorldState};

fn small(algo: Algorithm, lambda_inv: f64) -> ExperimentConfig {
    ExperimentConfig {
        width: 20,
        height: 20,
        followers: 15,
        lambda_inv,
        rounds: 600,
        ..ExperimentConfig::with_algo(algo)
    }
}

const ALGOS: [Algorithm; 4] = [
    Algorithm::Rw,
    Algorithm::Prop,
    Algorithm::Dl { p_prop: 0.6 },
    Algorithm::Hybrid { t_rw: 25 },
];

#[test]
fn invariants_hold_every_round() {
    for algo in ALGOS {
        let cfg = small(algo, 800.0);
        let mut world = WorldState::new(&cfg, 5);
        let lattice = world.lattice();
        let mut completions = 0;
        for _ in 0..cfg.rounds {
            let report = world.step_round();
            let live: u64 = world.tasks().map(|t| t.residual as u64).sum();
            assert_eq!(world.unsatisfied_demand(), live);
            assert_eq!(world.outstanding_demand(), live);
            assert_eq!(report.unsatisfied, live);
            for t in world.tasks() {
                assert!(t.residual >= 1 && t.residual <= t.demand);
            }
            for t in &report.completed {
                assert!(
                    report.round - t.spawn_round >= cfg.t_d as u64,
                    "{algo}: task {} too fast",
                    t.id
                );
            }
            completions += report.completed.len();
            for f in world.followers() {
                assert!(
                    lattice.contains(f.position),
                    "{algo}: follower {} at {}",
                    f.id,
                    f.position
                );
                if let Some(task) = f.behavior.assigned_task() {
                    assert!(
                        !f.blacklist.contains(&task),
                        "{algo}: follower {} on blacklisted {task}",
                        f.id
                    );
                }
                if let Behavior::Working { task } = f.behavior {
                    let here = world.task_at(f.position).map(|t| t.id) == Some(task);
                    assert!(here || report.completed.iter().any(|t| t.id == task));
                }
            }
        }
        assert!(completions > 10, "{algo}: only {completions} completions");
    }
}

#[test]
fn same_seed_same_trajectory() {
    for algo in ALGOS {
        let cfg = small(algo, 500.0);
        let mut a = WorldState::new(&cfg, 42);
        let mut b = WorldState::new(&cfg, 42);
        for _ in 0..cfg.rounds {
            assert_eq!(a.step_round(), b.step_round());
            assert_eq!(a.followers(), b.followers());
        }
        assert_eq!(
            run_trial(&cfg, 9).unwrap().metrics,
            run_trial(&cfg, 9).unwrap().metrics
        );
    }
}

fn assert_same_trajectory(a: Algorithm, b: Algorithm) {
    for seed in 0..3 {
        let mut x = WorldState::new(&small(a, 400.0), seed);
        let mut y = WorldState::new(&small(b, 400.0), seed);
        for round in 1..=600 {
            assert_eq!(
                x.step_round(),
                y.step_round(),
                "{a} vs {b}, seed {seed}, round {round}"
            );
            for (f, g) in x.followers().iter().zip(y.followers()) {
                assert_eq!(
                    (f.position, f.behavior, &f.blacklist, f.work_counter),
                    (g.position, g.behavior, &g.blacklist, g.work_counter),
                    "{a} vs {b}, seed {seed}, round {round}, follower {}",
                    f.id
                );
            }
        }
    }
}

#[test]
fn degenerate_mixtures_match_pure_algorithms() {
    assert_same_trajectory(Algorithm::Dl { p_prop: 1.0 }, Algorithm::Prop);
    assert_same_trajectory(Algorithm::Dl { p_prop: 0.0 }, Algorithm::Rw);
    assert_same_trajectory(Algorithm::Hybrid { t_rw: 0 }, Algorithm::Prop);
}

fn spawn_log(algo: Algorithm, seed: u64) -> Vec<SpawnRecord> {
    let cfg = small(algo, 300.0);
    let mut world = WorldState::new(&cfg, seed);
    for _ in 0..cfg.rounds {
        world.step_round();
    }
    world.spawn_log().to_vec()
}

#[test]
fn arrivals_are_common_across_algorithms() {
    let base = spawn_log(Algorithm::Rw, 8);
    assert!(base.len() > 100);
    let firsts = |log: &[SpawnRecord]| -> Vec<(Position, u64, u32)> {
        log.iter()
            .filter(|r| r.ordinal == 0)
            .map(|r| (r.location, r.round, r.demand))
            .collect()
    };
    let draws = |log: &[SpawnRecord]| -> BTreeMap<(i32, i32, u32), (u64, u32)> {
        log.iter()
            .map(|r| ((r.location.x, r.location.y, r.ordinal), (r.gap, r.demand)))
            .collect()
    };
    for algo in &ALGOS[1..] {
        let other = spawn_log(*algo, 8);
        assert_eq!(firsts(&base), firsts(&other), "{algo}");
        let (a, b) = (draws(&base), draws(&other));
        for (k, v) in &a {
            if let Some(w) = b.get(k) {
                assert_eq!(v, w, "{algo}: vertex draw {k:?}");
            }
        }
    }
}

#[test]
fn spawn_count_matches_monte_carlo() {
    // Independent renewal simulation per vertex, ignoring occupancy.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let exp: Exp<f64> = Exp::new(1.0 / 5.0e4).unwrap();
    let runs = 40;
    let mut total = 0u64;
    for _ in 0..runs {
        for _ in 0..2500 {
            let mut t = 0u64;
            loop {
                t += exp.sample(&mut rng).round().max(1.0) as u64;
                if t > 2000 {
                    break;
                }
                total += 1;
            }
        }
    }
    let oracle = total as f64 / runs as f64;
    assert!((oracle - 100.0).abs() < 5.0, "oracle {oracle}");

    let cfg = ExperimentConfig::with_algo(Algorithm::Rw);
    let trials = 40;
    let spawned: u64 = (0..trials)
        .map(|s| run_trial(&cfg, s).unwrap().metrics.tasks_spawned)
        .sum();
    let mean = spawned as f64 / trials as f64;
    assert!(
        (mean - oracle).abs() <= 0.1 * oracle,
        "simulated {mean} vs oracle {oracle}"
    );
}

fn quiet(width: u32, followers: u32, algo: Algorithm) -> ExperimentConfig {
    ExperimentConfig {
        width,
        height: width,
        followers,
        lambda_inv: f64::INFINITY,
        ..ExperimentConfig::with_algo(algo)
    }
}

fn completion_round(world: &mut WorldState, limit: u64) -> Option<u64> {
    (0..limit).find_map(|_| world.step_round().completed.first().map(|_| world.round()))
}

#[test]
fn work_takes_t_d_rounds_per_unit() {
    let mut one = WorldState::new(&quiet(1, 1, Algorithm::Rw), 0);
    one.insert_task(Position::new(0, 0), 6);
    assert_eq!(completion_round(&mut one, 100), Some(30));

    let mut two = WorldState::new(&quiet(1, 2, Algorithm::Rw), 0);
    two.insert_task(Position::new(0, 0), 6);
    assert_eq!(completion_round(&mut two, 100), Some(15));

    let mut three = WorldState::new(&quiet(1, 4, Algorithm::Rw), 0);
    three.insert_task(Position::new(0, 0), 6);
    // Four units land in round 5; the remaining two in round 10.
    assert_eq!(completion_round(&mut three, 100), Some(10));
}

#[test]
fn hybrid_walks_for_t_rw_rounds_after_leaving() {
    let mut world = WorldState::new(&quiet(1, 1, Algorithm::Hybrid { t_rw: 50 }), 0);
    world.insert_task(Position::new(0, 0), 60);
    assert_eq!(completion_round(&mut world, 400), Some(300));
    assert_eq!(world.followers()[0].forced_rw_remaining, 50);
    for round in 301..=350 {
        world.step_round();
        let f = &world.followers()[0];
        assert_eq!(f.forced_rw_remaining as u64, 350 - round);
        assert!(matches!(f.behavior, Behavior::Searching { .. }));
    }
}

#[test]
fn hybrid_pickup_ends_the_forced_walk() {
    let mut world = WorldState::new(&quiet(9, 1, Algorithm::Hybrid { t_rw: 50 }), 1);
    let at = world.followers()[0].position;
    let target = Position::new(if at.x > 4 { at.x - 2 } else { at.x + 2 }, at.y);
    world.insert_task(target, 1);
    world.step_round();
    let f = &world.followers()[0];
    assert_eq!(f.forced_rw_remaining, 0);
    assert!(matches!(f.behavior, Behavior::MovingToTarget { .. }));
}

#[test]
fn random_walkers_never_release_early() {
    // Eight walkers crowd one large task; none may leave before it is done.
    let mut world = WorldState::new(&quiet(1, 8, Algorithm::Rw), 0);
    world.insert_task(Position::new(0, 0), 40);
    for _ in 0..24 {
        world.step_round();
        assert!(world
            .followers()
            .iter()
            .all(|f| matches!(f.behavior, Behavior::Working { .. })));
    }
    assert_eq!(completion_round(&mut world, 10), Some(25));
}

#[test]
fn prop_workers_thin_out_on_small_tasks() {
    let mut released = 0;
    for seed in 0..50 {
        let mut world = WorldState::new(&quiet(1, 6, Algorithm::Prop), seed);
        world.insert_task(Position::new(0, 0), 8);
        assert_eq!(completion_round(&mut world, 20), Some(10));
        released += world
            .followers()
            .iter()
            .filter(|f| !f.blacklist.is_empty())
            .count();
    }
    // The first six units leave two; each of the six workers then keeps the
    // last unit with probability 1/6.
    let rate = released as f64 / 300.0;
    assert!((rate - 5.0 / 6.0).abs() < 0.08, "release rate {rate}");
}
