//! Self-contained problem generators with a controlled spectrum.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sketchy_core::scalar::sigmoid;
use sketchy_core::sketchlin::gaussian_matrix;
use sketchy_core::{Dataset, DesignMatrix};

use crate::error::{BenchError, Result};

fn default_noise() -> f64 {
    0.1
}

fn default_margin() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Synthetic {
    /// `A = √n · Q diag(j^{-β}) Vᵀ` with Haar `Q`, `V`; `b = A w₀ + noise · e`.
    Ridge {
        n: usize,
        p: usize,
        beta: f64,
        #[serde(default = "default_noise")]
        noise: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Gaussian rows scaled by `1/√p`, labels drawn from the logistic model at `w₀ ~ margin · N(0, I)`.
    Logistic {
        n: usize,
        p: usize,
        #[serde(default = "default_margin")]
        margin: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl Synthetic {
    pub fn generate(&self) -> Result<Dataset<f64>> {
        match *self {
            Synthetic::Ridge { n, p, beta, noise, seed } => {
                Ok(synthetic_ridge(n, p, beta, noise, &mut ChaCha8Rng::seed_from_u64(seed))?.0)
            }
            Synthetic::Logistic { n, p, margin, seed } => {
                Ok(synthetic_logistic(n, p, margin, &mut ChaCha8Rng::seed_from_u64(seed))?.0)
            }
        }
    }
}

fn check_shape(n: usize, p: usize) -> Result<()> {
    if n == 0 || p == 0 {
        return Err(BenchError::Config(format!("synthetic shape must be positive, got {n}×{p}")));
    }
    Ok(())
}

/// Returns the data and the planted coefficient vector.
pub fn synthetic_ridge<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    beta: f64,
    noise: f64,
    rng: &mut R,
) -> Result<(Dataset<f64>, DVector<f64>)> {
    check_shape(n, p)?;
    let k = n.min(p);
    let q = gaussian_matrix::<f64, _>(n, k, rng).qr().q();
    let v = gaussian_matrix::<f64, _>(p, k, rng).qr().q();
    let s = DMatrix::from_diagonal(&DVector::from_fn(k, |j, _| ((j + 1) as f64).powf(-beta)));
    let a = q * s * v.transpose() * (n as f64).sqrt();
    let w = gaussian_matrix::<f64, _>(p, 1, rng).column(0).into_owned();
    let e = gaussian_matrix::<f64, _>(n, 1, rng).column(0) * noise;
    let b = &a * &w + e;
    Ok((Dataset::new(DesignMatrix::from_dense(&a), b)?, w))
}

pub fn synthetic_logistic<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    margin: f64,
    rng: &mut R,
) -> Result<(Dataset<f64>, DVector<f64>)> {
    check_shape(n, p)?;
    let a = gaussian_matrix::<f64, _>(n, p, rng) / (p as f64).sqrt();
    let w = gaussian_matrix::<f64, _>(p, 1, rng).column(0) * margin;
    let b = DVector::from_fn(n, |i, _| {
        let m = a.row(i).transpose().dot(&w);
        if rng.random::<f64>() < sigmoid(m) { 1.0 } else { -1.0 }
    });
    Ok((Dataset::new(DesignMatrix::from_dense(&a), b)?, w))
}
