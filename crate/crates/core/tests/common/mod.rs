//! Oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use edged3::agents::{Agent, AgentConfig, AgentKind};
use edged3::envs::{builtin_world, Env, NavWorld, Point, Pose, Segment};
use edged3::expectile::ExpectileParams;
use edged3::numkit::{Activation, Matrix, Mlp};
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use statrs::distribution::{Continuous, ContinuousCDF, Normal as StdNormal};

pub const FD_STEP: f64 = 1e-5;

/// Norm-wise relative error between two gradient vectors.
pub fn rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let scale = l2(analytic).max(l2(numeric));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn inner(a: &Matrix, b: &Matrix) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

/// Distance of every hidden ReLU pre-activation from the kink.
pub fn min_kink_distance(net: &Mlp, inputs: &Matrix) -> f64 {
    let mut x = inputs.clone();
    let mut best = f64::INFINITY;
    for (layer, act) in net.layers().iter().zip(net.activations()) {
        let mut z = x.matmul(&layer.weight).unwrap();
        for r in 0..z.rows() {
            for (v, b) in z.row_mut(r).iter_mut().zip(&layer.bias) {
                *v += b;
            }
        }
        if *act == Activation::Relu {
            best = best.min(z.data().iter().fold(f64::INFINITY, |m, v| m.min(v.abs())));
            z.map_inplace(|v| v.max(0.0));
        } else if *act == Activation::Tanh {
            z.map_inplace(f64::tanh);
        }
        x = z;
    }
    best
}

/// Central-difference derivative of `f` along every coordinate of `p`.
pub fn central_differences(p: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut q = p.to_vec();
    (0..p.len())
        .map(|i| {
            q[i] = p[i] + FD_STEP;
            let up = f(&q);
            q[i] = p[i] - FD_STEP;
            let down = f(&q);
            q[i] = p[i];
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

/// Relative errors of the parameter and input gradients of a random network
/// against central differences, or `None` when a ReLU sits within 1e-3 of its
/// kink (where the derivative is undefined).
pub fn net_gradient_errors(sizes: &[usize], acts: &[Activation], seed: u64, batch: usize) -> Option<(f64, f64)> {
    let mut net = Mlp::new(sizes, acts, seed).unwrap();
    // Non-zero biases so every parameter is exercised.
    jitter(&mut net, seed ^ 0x5eed);
    let p = net.flat_params();
    let inputs = random_matrix(batch, sizes[0], seed.wrapping_add(1));
    let out_grad = random_matrix(batch, *sizes.last().unwrap(), seed.wrapping_add(2));
    if min_kink_distance(&net, &inputs) <= 1e-3 {
        return None;
    }
    let (_, cache) = net.forward(&inputs).unwrap();
    let (param_grad, input_grad) = net.backward(&cache, &out_grad).unwrap();

    let mut probe = net.clone();
    let numeric = central_differences(&p, |q| {
        probe.set_flat_params(q).unwrap();
        inner(&probe.predict(&inputs).unwrap(), &out_grad)
    });
    let numeric_in = central_differences(inputs.data(), |x| {
        let x = Matrix::from_vec(batch, sizes[0], x.to_vec()).unwrap();
        inner(&net.predict(&x).unwrap(), &out_grad)
    });
    Some((rel_error(&param_grad.flat(), &numeric), rel_error(input_grad.data(), &numeric_in)))
}

/// Small EdgeD3 agent for the composite actor objective.
pub fn small_agent(seed: u64) -> Agent {
    let mut cfg = AgentConfig::for_kind(AgentKind::EdgeD3, 3, 2);
    cfg.hidden = vec![8, 6];
    cfg.batch_size = 4;
    Agent::new(AgentKind::EdgeD3, cfg, seed).unwrap()
}

fn jitter(net: &mut Mlp, seed: u64) {
    let mut p = net.flat_params();
    let noise = random_matrix(1, p.len(), seed);
    for (v, n) in p.iter_mut().zip(noise.data()) {
        *v += 0.1 * n;
    }
    net.set_flat_params(&p).unwrap();
}

/// Relative error of the actor's descent direction `∇θ(-J)` with
/// `J = mean Q(s, μθ(s))`, plus the gap between the reported and recomputed `J`.
/// Parameters are jittered so biases are non-zero; `None` when a ReLU of the
/// actor or critic sits within 1e-3 of its kink.
pub fn composite_gradient_error(seed: u64) -> Option<(f64, f64)> {
    let mut agent = small_agent(seed);
    jitter(agent.actor_mut(), seed ^ 0xac7);
    jitter(&mut agent.critics_mut()[0].net, seed ^ 0xc21);
    let states = random_matrix(4, 3, 100 + seed);
    let critic = &agent.critics()[0].net;
    let actions = agent.actor().predict(&states).unwrap();
    let kink = min_kink_distance(agent.actor(), &states)
        .min(min_kink_distance(critic, &Matrix::hcat(&states, &actions).unwrap()));
    if kink <= 1e-3 {
        return None;
    }
    let (objective, grad) = agent.actor_gradient(&states).unwrap();
    let j = |actor: &Mlp| {
        let a = actor.predict(&states).unwrap();
        let q = critic.predict(&Matrix::hcat(&states, &a).unwrap()).unwrap();
        q.data().iter().sum::<f64>() / 4.0
    };
    let mut probe = agent.actor().clone();
    let numeric = central_differences(&agent.actor().flat_params(), |q| {
        probe.set_flat_params(q).unwrap();
        -j(&probe)
    });
    Some((rel_error(&grad.flat(), &numeric), (objective - j(agent.actor())).abs()))
}

/// Population expectile of N(0, 1) under the loss convention
/// `α·E[(X − t)+] = β·E[(t − X)+]`, by bisection.
pub fn normal_expectile(p: &ExpectileParams) -> f64 {
    let n = StdNormal::new(0.0, 1.0).unwrap();
    let upper = |t: f64| n.pdf(t) - t * (1.0 - n.cdf(t));
    let lower = |t: f64| n.pdf(t) + t * n.cdf(t);
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p.alpha() * upper(mid) - p.beta() * lower(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn normal_draws(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let d = Normal::new(0.0, 1.0).unwrap();
    (0..n).map(|_| d.sample(rng)).collect()
}

/// Least-squares slope through `(x, y)` points.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Independent ray/segment intersection through homogeneous line coordinates.
pub fn oracle_range(walls: &[Segment], x: f64, y: f64, phi: f64, max_range: f64) -> f64 {
    let (dx, dy) = (phi.cos(), phi.sin());
    let ray_line = [dy, -dx, dx * y - dy * x];
    let mut best = max_range;
    for w in walls {
        let wall_line = [
            w.a.y - w.b.y,
            w.b.x - w.a.x,
            w.a.x * w.b.y - w.b.x * w.a.y,
        ];
        let hx = ray_line[1] * wall_line[2] - ray_line[2] * wall_line[1];
        let hy = ray_line[2] * wall_line[0] - ray_line[0] * wall_line[2];
        let hz = ray_line[0] * wall_line[1] - ray_line[1] * wall_line[0];
        if hz.abs() < 1e-14 {
            continue;
        }
        let (px, py) = (hx / hz, hy / hz);
        let t = (px - x) * dx + (py - y) * dy;
        let (lo_x, hi_x) = (w.a.x.min(w.b.x) - 1e-9, w.a.x.max(w.b.x) + 1e-9);
        let (lo_y, hi_y) = (w.a.y.min(w.b.y) - 1e-9, w.a.y.max(w.b.y) + 1e-9);
        if t >= 0.0 && (lo_x..=hi_x).contains(&px) && (lo_y..=hi_y).contains(&py) {
            best = best.min(t);
        }
    }
    best
}

pub fn random_free_pose(world: &NavWorld, rng: &mut impl Rng) -> Pose {
    let (lo, hi) = world.boundary.bounds();
    loop {
        let p = Point::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        if world.is_free(p) {
            return Pose {
                x: p.x,
                y: p.y,
                theta: rng.random_range(-PI..PI),
            };
        }
    }
}

pub fn nav_world(name: &str) -> NavWorld {
    match builtin_world(name).unwrap() {
        Env::Nav(env) => env.world().clone(),
        Env::PointMass(_) => unreachable!(),
    }
}

/// Reward written out from its definition: progress bonus, turning and
/// proximity penalties, or the collision penalty inside the safety distance.
pub fn direct_reward(v: f64, w: f64, d: f64) -> f64 {
    if d >= 0.2 {
        3.0 * v - (w / 2.0f64).abs() - 0.5 * (1.0 - d)
    } else {
        -5.0
    }
}
