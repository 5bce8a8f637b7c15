//! ℓ²-regularized generalized linear models `F(w) = (1/n) Σ φᵢ(aᵢᵀw) + (ν/2)‖w‖²`
//! and the oracles the optimizers and preconditioners consume.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::DesignMatrix;
use crate::scalar::{log1p_exp_neg, sigmoid, Real};

/// Data matrix with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T: Real> {
    a: DesignMatrix<T>,
    labels: DVector<T>,
}

impl<T: Real> Dataset<T> {
    pub fn new(a: DesignMatrix<T>, labels: DVector<T>) -> Result<Self> {
        if a.nrows() != labels.len() {
            return Err(Error::dims("dataset labels", a.nrows(), labels.len()));
        }
        if a.nrows() == 0 {
            return Err(Error::InvalidInput("dataset has no samples".into()));
        }
        if !a.is_finite() || labels.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("dataset contains NaN or Inf".into()));
        }
        Ok(Self { a, labels })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn p(&self) -> usize {
        self.a.ncols()
    }

    pub fn design(&self) -> &DesignMatrix<T> {
        &self.a
    }

    pub fn labels(&self) -> &DVector<T> {
        &self.labels
    }

    /// True when every label is exactly `-1` or `+1`.
    pub fn has_sign_labels(&self) -> bool {
        self.labels.iter().all(|&y| y == T::one() || y == -T::one())
    }

    /// Restriction to the given rows, in order.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        let a = self.a.select_rows(rows)?;
        let labels = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.labels[i]));
        Ok(Self { a, labels })
    }

    pub fn into_parts(self) -> (DesignMatrix<T>, DVector<T>) {
        (self.a, self.labels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Loss {
    /// `φᵢ(z) = (z − bᵢ)² / 2`
    Squared,
    /// `φᵢ(z) = log(1 + exp(−bᵢ z))`, labels in `{−1, +1}`
    Logistic,
}

/// A loss, a regularization level `ν`, and a borrowed dataset.
#[derive(Debug, Clone, Copy)]
pub struct GlmModel<'a, T: Real> {
    loss: Loss,
    nu: T,
    data: &'a Dataset<T>,
}

impl<'a, T: Real> GlmModel<'a, T> {
    pub fn new(data: &'a Dataset<T>, loss: Loss, nu: T) -> Result<Self> {
        if !(nu >= T::zero()) || !nu.is_finite() {
            return Err(Error::InvalidInput(format!("regularization must be finite and ≥ 0, got {nu}")));
        }
        if nu == T::zero() {
            log::warn!("nu = 0: the objective is not strongly convex");
        }
        if loss == Loss::Logistic && !data.has_sign_labels() {
            return Err(Error::InvalidInput("logistic loss needs labels in {-1, +1}".into()));
        }
        Ok(Self { loss, nu, data })
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn data(&self) -> &'a Dataset<T> {
        self.data
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn p(&self) -> usize {
        self.data.p()
    }

    /// The regularization level ν.
    pub fn get_reg(&self) -> T {
        self.nu
    }

    /// Rows `A_B`, stacked in batch order.
    pub fn get_data(&self, batch: &[usize]) -> Result<DesignMatrix<T>> {
        self.data.a.select_rows(batch)
    }

    /// `φᵢ(z)`.
    #[inline]
    pub fn sample_loss(&self, i: usize, z: T) -> T {
        let y = self.data.labels[i];
        match self.loss {
            Loss::Squared => {
                let r = z - y;
                r * r * T::lit(0.5)
            }
            Loss::Logistic => log1p_exp_neg(y * z),
        }
    }

    /// `φᵢ'(z)`, the scalar multiplying `aᵢ` in `∇fᵢ`.
    #[inline]
    pub fn loss_derivative(&self, i: usize, z: T) -> T {
        let y = self.data.labels[i];
        match self.loss {
            Loss::Squared => z - y,
            Loss::Logistic => -y * sigmoid(-y * z),
        }
    }

    /// `φᵢ''(z)`.
    #[inline]
    pub fn loss_curvature(&self, i: usize, z: T) -> T {
        match self.loss {
            Loss::Squared => T::one(),
            Loss::Logistic => {
                let m = self.data.labels[i] * z;
                sigmoid(m) * sigmoid(-m)
            }
        }
    }

    /// `φᵢ'(aᵢᵀw)`.
    #[inline]
    pub fn grad_coefficient(&self, i: usize, w: &DVector<T>) -> T {
        self.loss_derivative(i, self.data.a.row_dot(i, w))
    }

    /// `Φ''(A_B w)` as a vector.
    pub fn get_hessian_diagonal(&self, batch: &[usize], w: &DVector<T>) -> Result<DVector<T>> {
        self.check_w(w)?;
        self.check_batch(batch)?;
        Ok(DVector::from_iterator(
            batch.len(),
            batch
                .iter()
                .map(|&i| self.loss_curvature(i, self.data.a.row_dot(i, w))),
        ))
    }

    /// `(1/|B|) Σ_{i∈B} ∇fᵢ(w) + νw`.
    pub fn get_stoch_grad(&self, batch: &[usize], w: &DVector<T>) -> Result<DVector<T>> {
        if batch.is_empty() {
            return Err(Error::InvalidInput("empty batch".into()));
        }
        self.check_w(w)?;
        self.check_batch(batch)?;
        let mut g = DVector::zeros(self.p());
        self.accumulate_grad(batch, w, &mut g);
        g /= T::from_usize_lossy(batch.len());
        g.axpy(self.nu, w, T::one());
        Ok(g)
    }

    /// `∇F(w)`.
    pub fn get_full_grad(&self, w: &DVector<T>) -> Result<DVector<T>> {
        self.check_w(w)?;
        let n = self.n();
        let mut g = DVector::zeros(self.p());
        for i in 0..n {
            let c = self.grad_coefficient(i, w);
            self.data.a.add_row_to(i, c, &mut g);
        }
        g /= T::from_usize_lossy(n);
        g.axpy(self.nu, w, T::one());
        Ok(g)
    }

    /// `F(w)`.
    pub fn full_loss(&self, w: &DVector<T>) -> Result<T> {
        self.check_w(w)?;
        let n = self.n();
        let sum = (0..n).fold(T::zero(), |acc, i| acc + self.sample_loss(i, self.data.a.row_dot(i, w)));
        Ok(sum / T::from_usize_lossy(n) + self.nu * w.norm_squared() * T::lit(0.5))
    }

    /// Square root of the unregularized subsampled Hessian,
    /// `X = (1/√b) diag(√Φ''(A_B w)) A_B`, so that `XᵀX = (1/b) A_Bᵀ Φ'' A_B`.
    pub fn hessian_sqrt_factor(&self, batch: &[usize], w: &DVector<T>) -> Result<DesignMatrix<T>> {
        if batch.is_empty() {
            return Err(Error::InvalidInput("empty batch".into()));
        }
        let d = self.get_hessian_diagonal(batch, w)?;
        let mut x = self.get_data(batch)?;
        let inv_b = T::one() / T::from_usize_lossy(batch.len());
        let scales: Vec<T> = d.iter().map(|&di| (di * inv_b).sqrt()).collect();
        x.scale_rows_mut(&scales)?;
        Ok(x)
    }

    /// Dense `∇²F(w) = (1/n) Aᵀ Φ''(Aw) A + νI`. Intended for small `p`.
    pub fn full_hessian(&self, w: &DVector<T>) -> Result<DMatrix<T>> {
        let all: Vec<usize> = (0..self.n()).collect();
        let x = self.hessian_sqrt_factor(&all, w)?;
        let p = self.p();
        Ok(x.gram_features() + DMatrix::identity(p, p) * self.nu)
    }

    /// Average smoothness bound `L̂_avg`: `(1/n) Σ‖aᵢ‖²`, quartered for the
    /// logistic loss.
    pub fn smoothness_avg(&self) -> T {
        let n = self.n();
        let s = (0..n).fold(T::zero(), |acc, i| acc + self.data.a.row_norm_sq(i)) / T::from_usize_lossy(n);
        match self.loss {
            Loss::Squared => s,
            Loss::Logistic => s * T::lit(0.25),
        }
    }

    /// Adds `Σ_{i∈B} φᵢ'(aᵢᵀw) aᵢ` into `out` (no normalization, no ν term).
    pub(crate) fn accumulate_grad(&self, batch: &[usize], w: &DVector<T>, out: &mut DVector<T>) {
        for &i in batch {
            let c = self.grad_coefficient(i, w);
            self.data.a.add_row_to(i, c, out);
        }
    }

    fn check_w(&self, w: &DVector<T>) -> Result<()> {
        if w.len() != self.p() {
            return Err(Error::dims("parameter vector", self.p(), w.len()));
        }
        Ok(())
    }

    fn check_batch(&self, batch: &[usize]) -> Result<()> {
        let n = self.n();
        match batch.iter().find(|&&i| i >= n) {
            Some(&bad) => Err(Error::IndexOutOfRange { index: bad, len: n }),
            None => Ok(()),
        }
    }
}

/// `b` distinct indices drawn uniformly from `0..n`.
pub fn sample_batch<R: Rng + ?Sized>(rng: &mut R, n: usize, b: usize) -> Vec<usize> {
    rand::seq::index::sample(rng, n, b.min(n)).into_vec()
}
