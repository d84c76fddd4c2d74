//! Polynomial regression under the expectile loss, on the noisy cubic
//! `y = 0.1 x³ + ε` with `x ~ U(−10, 10)`.

use rand_distr::{Distribution, Normal, Uniform};

use super::loss::{expectile_loss_grad, ExpectileParams};
use crate::numkit::{Activation, AdamState, Layer, Matrix, Mlp};
use crate::rng::{stream, Stream};
use crate::{Error, Result};

/// Standard deviation of the additive noise on the cubic.
pub const CUBIC_NOISE_STD: f64 = 8.0;

/// Min-max scaling to `[0, 1]`; constant input maps to zeros.
pub fn normalize_unit(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    values
        .iter()
        .map(|v| if span > 0.0 { (v - lo) / span } else { 0.0 })
        .collect()
}

/// `n` noisy samples of `0.1 x³`, features and targets scaled to `[0, 1]`.
pub fn cubic_dataset(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = stream(seed, Stream::Data);
    let xdist = Uniform::new(-10.0, 10.0).expect("valid range");
    let noise = Normal::new(0.0, CUBIC_NOISE_STD).expect("valid std");
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|_| {
            let x: f64 = xdist.sample(&mut rng);
            (x, 0.1 * x.powi(3) + noise.sample(&mut rng))
        })
        .unzip();
    normalize_unit(&xs)
        .into_iter()
        .zip(normalize_unit(&ys))
        .collect()
}

/// `c₀ + c₁x + … + c_d x^d`.
pub fn eval_polynomial(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn features(degree: usize, data: &[(f64, f64)]) -> Matrix {
    let mut m = Matrix::zeros(data.len(), degree);
    for (r, (x, _)) in data.iter().enumerate() {
        let mut power = 1.0;
        for c in 0..degree {
            power *= x;
            m.set(r, c, power);
        }
    }
    m
}

/// Fits polynomial coefficients (constant term first) by full-batch Adam on
/// the mean expectile loss, starting from all zeros.
pub fn fit_polynomial_expectile(
    degree: usize,
    data: &[(f64, f64)],
    p: &ExpectileParams,
    lr: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    if degree == 0 {
        return Err(Error::Argument("polynomial degree must be at least 1".into()));
    }
    if data.len() < 2 {
        return Err(Error::Argument("need at least two data points".into()));
    }
    let first_x = data[0].0;
    if data.iter().all(|(x, _)| *x == first_x) {
        return Err(Error::Argument("all data points share one abscissa".into()));
    }
    // The polynomial is a single identity layer over the powers of x; the
    // bias plays the constant coefficient.
    let mut model = Mlp::from_layers(
        vec![Layer {
            weight: Matrix::zeros(degree, 1),
            bias: vec![0.0],
        }],
        vec![Activation::Identity],
    )?;
    let mut opt = AdamState::new(&model);
    let inputs = features(degree, data);
    let n = data.len() as f64;
    let mut out_grad = Matrix::zeros(data.len(), 1);
    for _ in 0..steps {
        let (pred, cache) = model.forward(&inputs)?;
        for (i, (_, y)) in data.iter().enumerate() {
            out_grad.set(i, 0, expectile_loss_grad(pred.get(i, 0), *y, p) / n);
        }
        let (grad, _) = model.backward(&cache, &out_grad)?;
        opt.step(&mut model, &grad, lr)?;
    }
    let layer = &model.layers()[0];
    let mut coeffs = vec![layer.bias[0]];
    coeffs.extend_from_slice(layer.weight.data());
    Ok(coeffs)
}

/// Ordinary least-squares polynomial via the normal equations.
pub fn least_squares_polynomial(degree: usize, data: &[(f64, f64)]) -> Result<Vec<f64>> {
    let k = degree + 1;
    let mut ata = vec![vec![0.0; k]; k];
    let mut aty = vec![0.0; k];
    for (x, y) in data {
        let powers: Vec<f64> = (0..k).map(|j| x.powi(j as i32)).collect();
        for i in 0..k {
            aty[i] += powers[i] * y;
            for j in 0..k {
                ata[i][j] += powers[i] * powers[j];
            }
        }
    }
    solve_dense(ata, aty)
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::Numeric("singular normal equations".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

/// Uniform grid of `n` points over `[0, 1]`.
pub fn unit_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| i as f64 / (n.max(2) - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_evaluation() {
        assert_eq!(eval_polynomial(&[1.0, 2.0, 3.0], 2.0), 17.0);
    }

    #[test]
    fn dataset_is_normalized_and_seeded() {
        let a = cubic_dataset(200, 4);
        assert_eq!(a, cubic_dataset(200, 4));
        assert_ne!(a, cubic_dataset(200, 5));
        assert!(a.iter().all(|(x, y)| (0.0..=1.0).contains(x) && (0.0..=1.0).contains(y)));
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let p = ExpectileParams::default();
        assert!(fit_polynomial_expectile(3, &[(0.5, 0.5)], &p, 1e-3, 10).is_err());
        assert!(fit_polynomial_expectile(3, &[(0.5, 0.1), (0.5, 0.9)], &p, 1e-3, 10).is_err());
        assert!(fit_polynomial_expectile(0, &[(0.1, 0.1), (0.5, 0.9)], &p, 1e-3, 10).is_err());
    }

    #[test]
    fn noise_free_data_is_interpolated() {
        let truth = [0.0, 3.0, -6.0, 4.0];
        let data: Vec<(f64, f64)> = unit_grid(50).map(|x| (x, eval_polynomial(&truth, x))).collect();
        for (a, b) in [(1.0, 4.0), (4.0, 1.0), (1.0, 1.0)] {
            let p = ExpectileParams::new(a, b).unwrap();
            let c = fit_polynomial_expectile(3, &data, &p, 0.01, 60_000).unwrap();
            for x in unit_grid(200) {
                let err = (eval_polynomial(&c, x) - eval_polynomial(&truth, x)).abs();
                assert!(err <= 1e-3, "({a},{b}) x={x} err={err}");
            }
        }
    }

    #[test]
    fn least_squares_recovers_exact_polynomial() {
        let truth = [0.5, -1.0, 2.0];
        let data: Vec<(f64, f64)> = unit_grid(20).map(|x| (x, eval_polynomial(&truth, x))).collect();
        let c = least_squares_polynomial(2, &data).unwrap();
        for (a, b) in c.iter().zip(truth) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
