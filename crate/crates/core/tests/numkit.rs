mod common;

use common::{composite_gradient_error, net_gradient_errors, random_matrix, small_agent};
use edged3::agents::dpg_gradient;
use edged3::numkit::{soft_update, Activation, AdamState, Matrix, Mlp};
use proptest::prelude::*;

fn net_strategy() -> impl Strategy<Value = (Vec<usize>, Vec<Activation>, u64, usize)> {
    (prop::collection::vec(1usize..=8, 2..=4), any::<u64>(), 1usize..=4).prop_flat_map(|(sizes, seed, batch)| {
        let n = sizes.len() - 1;
        (
            Just(sizes),
            prop::collection::vec(
                prop_oneof![Just(Activation::Relu), Just(Activation::Tanh), Just(Activation::Identity)],
                n,
            ),
            Just(seed),
            Just(batch),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn backward_matches_central_differences((sizes, acts, seed, batch) in net_strategy()) {
        let errors = net_gradient_errors(&sizes, &acts, seed, batch);
        prop_assume!(errors.is_some());
        let (param, input) = errors.unwrap();
        prop_assert!(param <= 1e-6, "param grad rel error {param}");
        prop_assert!(input <= 1e-6, "input grad rel error {input}");
    }

    #[test]
    fn forward_stays_finite_for_bounded_inputs(seed in any::<u64>(), scale in 1.0f64..1e6) {
        let net = Mlp::new(&[3, 8, 8, 1], &[Activation::Relu, Activation::Tanh, Activation::Identity], seed).unwrap();
        let mut x = random_matrix(4, 3, seed);
        x.map_inplace(|v| v * scale);
        let (y, cache) = net.forward(&x).unwrap();
        prop_assert!(y.is_finite());
        let (g, gi) = net.backward(&cache, &Matrix::filled(4, 1, 1.0)).unwrap();
        prop_assert!(g.is_finite() && gi.is_finite());
    }

    #[test]
    fn soft_update_is_elementwise_blend(seed in any::<u64>(), tau in 0.001f64..=1.0) {
        let acts = [Activation::Relu, Activation::Identity];
        let online = Mlp::new(&[2, 4, 1], &acts, seed).unwrap();
        let mut target = Mlp::new(&[2, 4, 1], &acts, seed.wrapping_add(1)).unwrap();
        let before = target.flat_params();
        soft_update(&mut target, &online, tau).unwrap();
        for ((t, b), o) in target.flat_params().iter().zip(&before).zip(online.flat_params()) {
            prop_assert_eq!(*t, tau * o + (1.0 - tau) * b);
        }
    }
}

#[test]
fn composite_actor_objective_matches_central_differences() {
    let checked: Vec<(u64, f64, f64)> = (0..40)
        .filter_map(|seed| composite_gradient_error(seed).map(|(e, g)| (seed, e, g)))
        .take(20)
        .collect();
    assert_eq!(checked.len(), 20);
    for (seed, err, objective_gap) in checked {
        assert!(objective_gap < 1e-14);
        assert!(err <= 1e-5, "seed {seed}: composite rel error {err}");
    }
}

#[test]
fn dpg_against_frozen_quadratic_critic_reaches_target_action() {
    // Q(s, a) = -|a - a*|^2, maximized at a*.
    let target = [0.3, -0.6];
    let actor = Mlp::new(&[3, 16, 16, 2], &[Activation::Relu, Activation::Relu, Activation::Tanh], 5).unwrap();
    let mut actor = actor;
    let mut opt = AdamState::new(&actor);
    let states = random_matrix(32, 3, 11);
    for _ in 0..2000 {
        let (_, grad) = dpg_gradient(&actor, &states, |a| {
            let n = a.rows() as f64;
            let mut g = a.clone();
            let mut j = 0.0;
            for r in 0..a.rows() {
                for (c, v) in g.row_mut(r).iter_mut().enumerate() {
                    let d = *v - target[c];
                    j -= d * d / n;
                    *v = -2.0 * d / n;
                }
            }
            Ok((j, g))
        })
        .unwrap();
        opt.step(&mut actor, &grad, 1e-3).unwrap();
    }
    let out = actor.predict(&states).unwrap();
    for r in 0..out.rows() {
        let d = ((out.get(r, 0) - target[0]).powi(2) + (out.get(r, 1) - target[1]).powi(2)).sqrt();
        assert!(d <= 0.05, "row {r}: distance {d}");
    }
}

#[test]
fn constant_critic_leaves_actor_unchanged() {
    let mut agent = small_agent(3);
    // Zero last-layer weights: Q is the bias, so its action gradient vanishes.
    let critic = &mut agent.critics_mut()[0].net;
    let last = critic.layers_mut().last_mut().unwrap();
    last.weight.map_inplace(|_| 0.0);
    last.bias[0] = 1.5;
    let before = agent.actor().flat_params();
    let states = random_matrix(4, 3, 9);
    let batch = edged3::replay::Batch {
        states: states.clone(),
        actions: Matrix::zeros(4, 2),
        rewards: vec![0.0; 4],
        next_states: states,
        dones: vec![0.0; 4],
    };
    let objective = agent.actor_update(&batch).unwrap();
    assert_eq!(objective, 1.5);
    assert_eq!(agent.actor().flat_params(), before);
}
