//! Restarted Lanczos for the lowest eigenpair of a real symmetric operator.
//!
//! Each cycle builds a Krylov basis with full (two-pass) Gram–Schmidt
//! reorthogonalization and restarts from the current Ritz vector. All
//! reductions run over fixed-size chunks summed in order, so results do not
//! depend on the rayon thread count.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

const CHUNK: usize = 1 << 13;

/// A real symmetric matrix-free operator.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Target for `||A v - E v||`.
    pub tol: f64,
    /// Krylov basis size per cycle.
    pub basis_size: usize,
    /// Cap on the total number of operator applications.
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            basis_size: 100,
            max_iterations: 5000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Second Ritz value of the first (random-start) cycle.
    pub next_value: Option<f64>,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.into_iter().sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_chunks_mut(CHUNK)
        .zip(x.par_chunks(CHUNK))
        .for_each(|(ys, xs)| ys.iter_mut().zip(xs).for_each(|(yv, xv)| *yv += alpha * xv));
}

fn scale(alpha: f64, x: &mut [f64]) {
    x.par_chunks_mut(CHUNK)
        .for_each(|xs| xs.iter_mut().for_each(|v| *v *= alpha));
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    orthogonalize_against(w, basis, &[]);
}

fn orthogonalize_against(w: &mut [f64], first: &[Vec<f64>], second: &[Vec<f64>]) {
    for _ in 0..2 {
        for v in first.iter().chain(second) {
            let c = dot(v, w);
            axpy(-c, v, w);
        }
    }
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    SymmetricEigen::new(t)
}

fn sorted_pairs(eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
}

/// Lowest eigenpair of `op` restricted to the orthogonal complement of
/// `deflate` (which must be orthonormal).
pub fn lowest_eigenpair<A: SymmetricOperator>(
    op: &A,
    opts: &LanczosOptions,
    deflate: &[Vec<f64>],
) -> Result<Eigenpair> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("empty operator".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    orthogonalize(&mut start, deflate);
    let nrm = norm(&start);
    scale(1.0 / nrm, &mut start);

    let available = n.saturating_sub(deflate.len()).max(1);
    let m_max = opts.basis_size.clamp(2, available.max(2)).min(available);
    let mut iterations = 0usize;
    let mut next_value = None;
    let mut w = vec![0.0; n];
    let mut best_residual = f64::INFINITY;

    loop {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        loop {
            let v = basis.last().unwrap();
            op.apply(v, &mut w);
            iterations += 1;
            let a = dot(v, &w);
            alpha.push(a);
            orthogonalize_against(&mut w, deflate, &basis);
            let b = norm(&w);
            let j = alpha.len();
            let exhausted = b < 1e-13 * a.abs().max(1.0);
            if j >= m_max || exhausted || iterations >= opts.max_iterations {
                break;
            }
            // cheap convergence probe on the tridiagonal problem
            if j % 5 == 0 {
                let eig = tridiagonal_eigen(&alpha, &beta);
                let order = sorted_pairs(&eig);
                let last = eig.eigenvectors[(j - 1, order[0])];
                if (b * last).abs() < 0.1 * opts.tol {
                    break;
                }
            }
            beta.push(b);
            let mut next = w.clone();
            scale(1.0 / b, &mut next);
            basis.push(next);
        }

        let eig = tridiagonal_eigen(&alpha, &beta);
        let order = sorted_pairs(&eig);
        if next_value.is_none() && order.len() > 1 {
            next_value = Some(eig.eigenvalues[order[1]]);
        }
        let mut ritz = vec![0.0; n];
        for (i, v) in basis.iter().enumerate() {
            axpy(eig.eigenvectors[(i, order[0])], v, &mut ritz);
        }
        orthogonalize(&mut ritz, deflate);
        let nrm = norm(&ritz);
        scale(1.0 / nrm, &mut ritz);

        op.apply(&ritz, &mut w);
        iterations += 1;
        let value = dot(&ritz, &w);
        axpy(-value, &ritz, &mut w);
        // the residual lives in the deflated space
        orthogonalize(&mut w, deflate);
        let residual = norm(&w);
        best_residual = best_residual.min(residual);
        if residual <= opts.tol {
            return Ok(Eigenpair {
                value,
                vector: ritz,
                residual,
                iterations,
                next_value,
            });
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NoConvergence {
                iterations,
                residual: best_residual,
                tol: opts.tol,
            });
        }
        start = ritz;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Dense(DMatrix<f64>);

    impl SymmetricOperator for Dense {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for i in 0..self.dim() {
                y[i] = (0..self.dim()).map(|j| self.0[(i, j)] * x[j]).sum();
            }
        }
    }

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        &a + a.transpose()
    }

    #[test]
    fn matches_dense_spectrum() {
        let m = random_symmetric(120, 3);
        let exact = SymmetricEigen::new(m.clone()).eigenvalues.min();
        let pair = lowest_eigenpair(&Dense(m), &LanczosOptions::default(), &[]).unwrap();
        assert!((pair.value - exact).abs() < 1e-10);
        assert!(pair.residual <= 1e-10);
    }

    #[test]
    fn deflation_finds_second_level() {
        let m = random_symmetric(60, 5);
        let mut values: Vec<f64> = SymmetricEigen::new(m.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        values.sort_by(f64::total_cmp);
        let op = Dense(m);
        let ground = lowest_eigenpair(&op, &LanczosOptions::default(), &[]).unwrap();
        let excited = lowest_eigenpair(&op, &LanczosOptions::default(), &[ground.vector]).unwrap();
        assert!((excited.value - values[1]).abs() < 1e-9);
    }

    #[test]
    fn tiny_operator() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let pair = lowest_eigenpair(&Dense(m), &LanczosOptions::default(), &[]).unwrap();
        assert!((pair.value + 1.0).abs() < 1e-12);
    }
}
