use edged3::agents::{Agent, AgentConfig, AgentKind};
use edged3::expectile::{solve_expectile, DecaySchedule, ExpectileParams};
use edged3::numkit::Matrix;
use edged3::replay::{Batch, ReplayBuffer, Transition};
use edged3::rng::{stream, Stream};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn tiny_config(kind: AgentKind) -> AgentConfig {
    let mut cfg = AgentConfig::for_kind(kind, 3, 2);
    cfg.hidden = vec![8, 8];
    cfg.batch_size = 8;
    cfg
}

fn random_buffer(items: usize, seed: u64) -> ReplayBuffer {
    let mut rng = stream(seed, Stream::Data);
    let mut buf = ReplayBuffer::new(items, 3, 2).unwrap();
    for _ in 0..items {
        let mut v = |n: usize| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
        let t = Transition {
            s: v(3),
            a: v(2),
            r: v(1)[0],
            s_next: v(3),
            d: false,
        };
        let d = rng.random_bool(0.1);
        buf.push(Transition { d, ..t }).unwrap();
    }
    buf
}

fn fixed_batch(n: usize, dones: f64) -> Batch {
    let buf = random_buffer(n, 77);
    let mut batch = Batch::from_transitions(&buf.iter_chronological().collect::<Vec<_>>()).unwrap();
    batch.dones = vec![dones; n];
    batch
}

#[test]
fn noiseless_action_is_the_actor_output() {
    let mut rng = stream(0, Stream::Explore);
    for kind in AgentKind::ALL {
        let agent = Agent::new(kind, tiny_config(kind), 1).unwrap();
        let s = [0.3, -0.1, 0.8];
        let a = agent.select_action(&s, false, &mut rng).unwrap();
        let direct = agent.actor().predict(&Matrix::from_vec(1, 3, s.to_vec()).unwrap()).unwrap();
        assert_eq!(a, direct.into_vec());
        assert_eq!(a, agent.select_action(&s, false, &mut rng).unwrap());
    }
}

#[test]
fn zero_exploration_noise_is_noiseless() {
    let mut cfg = tiny_config(AgentKind::EdgeD3);
    cfg.sigma_explore = 0.0;
    let mut agent = Agent::new(AgentKind::EdgeD3, cfg, 2).unwrap();
    let buf = random_buffer(64, 1);
    let mut rng = stream(2, Stream::Train);
    for _ in 0..20 {
        agent.train_step(&buf, &mut rng).unwrap();
    }
    let s = [0.1, 0.2, 0.3];
    assert_eq!(
        agent.select_action(&s, true, &mut rng).unwrap(),
        agent.select_action(&s, false, &mut rng).unwrap()
    );
}

#[test]
fn non_finite_state_is_a_numeric_error() {
    let agent = Agent::new(AgentKind::Ddpg, tiny_config(AgentKind::Ddpg), 0).unwrap();
    let r = agent.select_action(&[f64::NAN, 0.0, 0.0], true, &mut stream(0, Stream::Explore));
    assert!(matches!(r, Err(edged3::Error::Numeric(_))));
}

proptest! {
    #[test]
    fn actions_stay_in_bounds(seed in any::<u64>(), s in prop::collection::vec(-1e3f64..1e3, 3), sigma in 0.0f64..5.0) {
        let mut cfg = tiny_config(AgentKind::EdgeD3);
        cfg.sigma_explore = sigma;
        let agent = Agent::new(AgentKind::EdgeD3, cfg, seed).unwrap();
        let a = agent.select_action(&s, true, &mut stream(seed, Stream::Explore)).unwrap();
        prop_assert!(a.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn actor_updates_are_floor_of_steps_over_period(kind_ix in 0usize..4, steps in 0u64..40) {
        let kind = AgentKind::ALL[kind_ix];
        let mut agent = Agent::new(kind, tiny_config(kind), 5).unwrap();
        let buf = random_buffer(32, 2);
        let mut rng = stream(5, Stream::Train);
        for _ in 0..steps {
            agent.train_step(&buf, &mut rng).unwrap();
        }
        let k = agent.config().actor_period as u64;
        prop_assert_eq!(agent.actor_updates(), steps / k);
        prop_assert_eq!(agent.steps(), steps);
    }
}

#[test]
fn ten_step_update_counts() {
    for (kind, expected) in [(AgentKind::EdgeD3, 5), (AgentKind::Td3, 5), (AgentKind::Ddpg, 10), (AgentKind::EdgeDdpg, 10)] {
        let mut agent = Agent::new(kind, tiny_config(kind), 0).unwrap();
        let buf = random_buffer(32, 0);
        let mut rng = stream(0, Stream::Train);
        for _ in 0..10 {
            agent.train_step(&buf, &mut rng).unwrap();
        }
        assert_eq!(agent.actor_updates(), expected, "{kind:?}");
    }
}

#[test]
fn terminal_or_undiscounted_targets_equal_rewards() {
    let mut rng = stream(0, Stream::Train);
    for kind in AgentKind::ALL {
        let agent = Agent::new(kind, tiny_config(kind), 3).unwrap();
        let batch = fixed_batch(6, 1.0);
        assert_eq!(agent.compute_target(&batch, &mut rng).unwrap(), batch.rewards);

        let mut cfg = tiny_config(kind);
        cfg.gamma = 0.0;
        let agent = Agent::new(kind, cfg, 3).unwrap();
        let batch = fixed_batch(6, 0.0);
        assert_eq!(agent.compute_target(&batch, &mut rng).unwrap(), batch.rewards);
    }
}

#[test]
fn td3_with_equal_critics_gives_the_edge_d3_target() {
    let edge = Agent::new(AgentKind::EdgeD3, tiny_config(AgentKind::EdgeD3), 9).unwrap();
    let mut td3 = Agent::new(AgentKind::Td3, tiny_config(AgentKind::Td3), 9).unwrap();
    *td3.actor_target_mut() = edge.actor_target().clone();
    for c in td3.critics_mut() {
        c.target = edge.critics()[0].target.clone();
    }
    let batch = fixed_batch(4, 0.0);
    let a = edge.compute_target(&batch, &mut stream(4, Stream::Train)).unwrap();
    let b = td3.compute_target(&batch, &mut stream(4, Stream::Train)).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
    }
}

#[test]
fn edge_ddpg_with_equal_weights_is_bit_identical_to_ddpg() {
    let mut edge_cfg = tiny_config(AgentKind::EdgeDdpg);
    edge_cfg.expectile = ExpectileParams::new(1.5, 1.5).unwrap();
    edge_cfg.sigma_target = 0.0;
    edge_cfg.actor_period = 1;
    let mut edge = Agent::new(AgentKind::EdgeDdpg, edge_cfg, 11).unwrap();
    let mut ddpg = Agent::new(AgentKind::Ddpg, tiny_config(AgentKind::Ddpg), 11).unwrap();
    let buf = random_buffer(256, 3);
    let (mut r1, mut r2) = (stream(11, Stream::Train), stream(11, Stream::Train));
    for step in 0..1000 {
        let d1 = edge.train_step(&buf, &mut r1).unwrap();
        let d2 = ddpg.train_step(&buf, &mut r2).unwrap();
        assert_eq!(d1.critic_loss.to_bits(), d2.critic_loss.to_bits(), "step {step}");
        assert_eq!(d1.actor_objective.map(f64::to_bits), d2.actor_objective.map(f64::to_bits));
    }
    assert_eq!(edge.actor().flat_params(), ddpg.actor().flat_params());
    assert_eq!(edge.critics()[0].net.flat_params(), ddpg.critics()[0].net.flat_params());
    assert_eq!(edge.critics()[0].target.flat_params(), ddpg.critics()[0].target.flat_params());
}

#[test]
fn equal_weight_expectile_loss_is_the_squared_error() {
    let mut cfg = tiny_config(AgentKind::EdgeDdpg);
    cfg.expectile = ExpectileParams::new(3.0, 3.0).unwrap();
    let mut edge = Agent::new(AgentKind::EdgeDdpg, cfg, 8).unwrap();
    let mut ddpg = Agent::new(AgentKind::Ddpg, tiny_config(AgentKind::Ddpg), 8).unwrap();
    let batch = fixed_batch(8, 0.0);
    let (l1, _) = edge.critic_update(&batch, &mut stream(0, Stream::Train)).unwrap();
    let (l2, _) = ddpg.critic_update(&batch, &mut stream(0, Stream::Train)).unwrap();
    assert_eq!(l1, l2);
}

#[test]
fn critic_at_its_target_has_zero_loss_and_stays_put() {
    let mut cfg = tiny_config(AgentKind::Ddpg);
    cfg.gamma = 0.0;
    let mut agent = Agent::new(AgentKind::Ddpg, cfg, 4).unwrap();
    let mut batch = fixed_batch(8, 0.0);
    let q = agent.critics()[0].net.predict(&Matrix::hcat(&batch.states, &batch.actions).unwrap()).unwrap();
    batch.rewards = q.into_vec();
    let before = agent.critics()[0].net.flat_params();
    let (loss, _) = agent.critic_update(&batch, &mut stream(0, Stream::Train)).unwrap();
    assert_eq!(loss, 0.0);
    assert_eq!(agent.critics()[0].net.flat_params(), before);
}

#[test]
fn critic_update_golden_value() {
    // Generated by `cargo run --release --example golden_critic_update` and
    // recomputed independently by tests/golden/critic_update_oracle.py.
    const BEFORE: f64 = 0.6742286195392376;
    const AFTER: f64 = 0.6557166032921753;
    let mut cfg = AgentConfig::for_kind(AgentKind::EdgeDdpg, 2, 1);
    cfg.hidden = vec![4];
    cfg.batch_size = 4;
    cfg.gamma = 0.9;
    cfg.lr_critic = 1e-2;
    cfg.expectile = ExpectileParams::new(1.0, 2.0).unwrap();
    let mut agent = Agent::new(AgentKind::EdgeDdpg, cfg, 42).unwrap();
    let batch = Batch {
        states: Matrix::from_rows(&[[0.1, -0.2], [0.5, 0.3], [-0.7, 0.9], [0.0, 0.4]]).unwrap(),
        actions: Matrix::from_rows(&[[0.2], [-0.5], [0.9], [0.0]]).unwrap(),
        rewards: vec![1.0, -0.5, 0.25, 2.0],
        next_states: Matrix::from_rows(&[[0.2, -0.1], [0.4, 0.2], [-0.6, 1.0], [0.1, 0.5]]).unwrap(),
        dones: vec![0.0, 0.0, 1.0, 0.0],
    };
    let (before, _) = agent.critic_update(&batch, &mut stream(0, Stream::Train)).unwrap();
    let (after, _) = agent.critic_update(&batch, &mut stream(0, Stream::Train)).unwrap();
    assert!((before - BEFORE).abs() <= 1e-12 * BEFORE);
    assert!((after - AFTER).abs() <= 1e-12 * AFTER);
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn targets_move_only_on_actor_steps_and_lag_by_tau() {
    for kind in AgentKind::ALL {
        let mut agent = Agent::new(kind, tiny_config(kind), 6).unwrap();
        let buf = random_buffer(64, 6);
        let mut rng = stream(6, Stream::Train);
        let tau = agent.config().tau1;
        for _ in 0..12 {
            let old_targets: Vec<Vec<f64>> = agent.critics().iter().map(|c| c.target.flat_params()).collect();
            let old_actor_target = agent.actor_target().flat_params();
            let diag = agent.train_step(&buf, &mut rng).unwrap();
            for (c, old) in agent.critics().iter().zip(&old_targets) {
                let new = c.target.flat_params();
                if diag.actor_objective.is_none() {
                    assert_eq!(&new, old);
                } else {
                    let moved = max_abs_diff(&new, old);
                    let bound = tau * max_abs_diff(&c.net.flat_params(), old);
                    // Rounding of the blend scales with the target magnitude.
                    let slack = 4.0 * f64::EPSILON * old.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    assert!(moved <= bound + slack, "{kind:?}: {moved} > {bound}");
                }
            }
            if diag.actor_objective.is_none() {
                assert_eq!(agent.actor_target().flat_params(), old_actor_target);
            }
        }
    }
}

#[test]
fn episode_decay_follows_the_schedule() {
    let mut cfg = tiny_config(AgentKind::EdgeD3);
    cfg.expectile = ExpectileParams::new(1.0, 2.0).unwrap();
    let mut agent = Agent::new(AgentKind::EdgeD3, cfg.clone(), 0).unwrap();
    for _ in 0..5 {
        agent.end_episode();
    }
    assert_eq!(agent.expectile(), cfg.expectile);

    cfg.decay = DecaySchedule::linear(1.0);
    let mut agent = Agent::new(AgentKind::EdgeD3, cfg.clone(), 0).unwrap();
    agent.end_episode();
    assert_eq!((agent.expectile().alpha(), agent.expectile().beta()), (2.0, 2.0));

    let mut dcfg = tiny_config(AgentKind::Ddpg);
    dcfg.decay = DecaySchedule::linear(1.0);
    let mut ddpg = Agent::new(AgentKind::Ddpg, dcfg, 0).unwrap();
    let before = ddpg.expectile();
    ddpg.end_episode();
    assert_eq!(ddpg.expectile(), before);
}

#[test]
fn checkpoint_resume_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("agent.json");
    let kind = AgentKind::EdgeD3;
    let buf = random_buffer(128, 12);
    let mut straight = Agent::new(kind, tiny_config(kind), 12).unwrap();
    let mut rng = stream(12, Stream::Train);
    for _ in 0..50 {
        straight.train_step(&buf, &mut rng).unwrap();
    }
    straight.save(&path).unwrap();
    let mut resumed = Agent::load(&path).unwrap();
    assert_eq!(resumed, straight);
    let mut rng2 = rng.clone();
    for _ in 0..50 {
        straight.train_step(&buf, &mut rng).unwrap();
        resumed.train_step(&buf, &mut rng2).unwrap();
    }
    assert_eq!(resumed, straight);
}

/// Batch with one constant state-action pair and noisy rewards, as a
/// one-step problem whose regression target is the reward distribution.
fn noisy_bandit_batch(n: usize, seed: u64) -> Batch {
    let mut rng = stream(seed, Stream::Data);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let items: Vec<Transition> = (0..n)
        .map(|_| {
            let z: f64 = noise.sample(&mut rng);
            Transition {
                s: vec![0.2, -0.4, 0.6],
                a: vec![0.1, -0.3],
                r: z + 0.5 * z.abs(),
                s_next: vec![0.0; 3],
                d: true,
            }
        })
        .collect();
    Batch::from_transitions(&items).unwrap()
}

fn trained_prediction(alpha: f64, beta: f64, batch: &Batch, seed: u64) -> f64 {
    let mut cfg = tiny_config(AgentKind::EdgeDdpg);
    cfg.expectile = ExpectileParams::new(alpha, beta).unwrap();
    cfg.lr_critic = 1e-2;
    let mut agent = Agent::new(AgentKind::EdgeDdpg, cfg, seed).unwrap();
    let mut rng = stream(seed, Stream::Train);
    for _ in 0..3000 {
        agent.critic_update(batch, &mut rng).unwrap();
    }
    let q = agent.critics()[0].net.predict(&Matrix::hcat(&batch.states, &batch.actions).unwrap()).unwrap();
    q.data().iter().sum::<f64>() / q.rows() as f64
}

#[test]
fn critic_bias_follows_weight_order() {
    let batch = noisy_bandit_batch(256, 0);
    // Oracle ordering on the batch itself.
    let low = solve_expectile(&batch.rewards, &ExpectileParams::new(1.0, 2.0).unwrap()).unwrap();
    let mid = solve_expectile(&batch.rewards, &ExpectileParams::symmetric()).unwrap();
    let high = solve_expectile(&batch.rewards, &ExpectileParams::new(2.0, 1.0).unwrap()).unwrap();
    assert!(low <= mid + 1e-6 && mid <= high + 1e-6);

    let ordered = (0..10)
        .filter(|&seed| {
            let l = trained_prediction(1.0, 2.0, &batch, seed);
            let m = trained_prediction(1.0, 1.0, &batch, seed);
            let h = trained_prediction(2.0, 1.0, &batch, seed);
            l <= m && m <= h
        })
        .count();
    assert!(ordered >= 9, "ordered on {ordered}/10 seeds");
}
