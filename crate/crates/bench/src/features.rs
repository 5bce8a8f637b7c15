use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};
use sketchy_core::{Dataset, DesignMatrix, Real};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RandomFeatures {
    #[default]
    None,
    /// Random Fourier features for the Gaussian kernel of the given bandwidth.
    Gaussian { dim: usize, bandwidth: f64 },
    Relu { dim: usize },
}

impl RandomFeatures {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RandomFeatures::None => Ok(()),
            RandomFeatures::Gaussian { dim, bandwidth } => {
                if dim == 0 {
                    return Err(BenchError::Config("random feature dimension must be ≥ 1".into()));
                }
                if !(bandwidth > 0.0 && bandwidth.is_finite()) {
                    return Err(BenchError::Config(format!("bandwidth must be positive, got {bandwidth}")));
                }
                Ok(())
            }
            RandomFeatures::Relu { dim } => {
                if dim == 0 {
                    return Err(BenchError::Config("random feature dimension must be ≥ 1".into()));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Cosine,
    Relu,
}

/// `z = √(2/D) · act(W x + c)`; `W` is `D × p`.
#[derive(Debug, Clone)]
pub struct FeatureMap<T: Real> {
    pub w: DMatrix<T>,
    pub c: DVector<T>,
    pub activation: Activation,
}

impl<T: Real> FeatureMap<T> {
    /// Draws the map for `p` input features, or `None` when `spec` is `None`.
    pub fn draw<R: Rng + ?Sized>(spec: &RandomFeatures, p: usize, rng: &mut R) -> Result<Option<Self>> {
        spec.validate()?;
        let normal = |rng: &mut R, rows: usize, scale: f64| -> DMatrix<T> {
            DMatrix::from_fn(rows, p, |_, _| { let z: f64 = rng.sample(StandardNormal); T::lit(scale * z) })
        };
        Ok(match *spec {
            RandomFeatures::None => None,
            RandomFeatures::Gaussian { dim, bandwidth } => {
                let w = normal(rng, dim, 1.0 / bandwidth);
                let u = Uniform::new(0.0, std::f64::consts::TAU).expect("valid range");
                let c = DVector::from_fn(dim, |_, _| T::lit(u.sample(rng)));
                Some(Self { w, c, activation: Activation::Cosine })
            }
            RandomFeatures::Relu { dim } => {
                let w = normal(rng, dim, 1.0 / (p as f64).sqrt());
                Some(Self { w, c: DVector::zeros(dim), activation: Activation::Relu })
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    /// `n × D` feature matrix.
    pub fn transform(&self, a: &DesignMatrix<T>) -> Result<DMatrix<T>> {
        if a.ncols() != self.w.ncols() {
            return Err(sketchy_core::Error::InvalidInput(format!(
                "feature map expects {} inputs, data has {}",
                self.w.ncols(),
                a.ncols()
            ))
            .into());
        }
        let mut z = a.mul_dense(&self.w.transpose());
        let scale = (T::lit(2.0) / T::from_usize_lossy(self.dim())).sqrt();
        for (j, mut col) in z.column_iter_mut().enumerate() {
            let c = self.c[j];
            col.apply(|v| {
                *v = scale
                    * match self.activation {
                        Activation::Cosine => (*v + c).cos(),
                        Activation::Relu => (*v + c).max(T::zero()),
                    }
            });
        }
        Ok(z)
    }

    pub fn apply(&self, ds: &Dataset<T>) -> Result<Dataset<T>> {
        let z = self.transform(ds.design())?;
        Ok(Dataset::new(DesignMatrix::from_dense(&z), ds.labels().clone())?)
    }
}

/// Draws a feature map and applies it. `None` returns a copy of `ds`.
pub fn random_features<T: Real, R: Rng + ?Sized>(ds: &Dataset<T>, spec: &RandomFeatures, rng: &mut R) -> Result<Dataset<T>> {
    match FeatureMap::draw(spec, ds.p(), rng)? {
        Some(map) => map.apply(ds),
        None => Ok(ds.clone()),
    }
}
