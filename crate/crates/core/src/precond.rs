//! Subsampled-Newton preconditioners and their low-rank, sketched and
//! diagonal variants, behind a single update/direction interface.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::glm::GlmModel;
use crate::matrix::DesignMatrix;
use crate::scalar::Real;
use crate::sketchlin::{
    gram_cholesky, randomized_nystrom, sparse_embedding_cols, sparse_embedding_rows,
    top_generalized_eigenvalue, GramCholesky, NystromFactors, PowerIterationOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PreconditionerKind {
    /// Subsampled Newton: `P = XᵀX + ρI`.
    Ssn,
    /// Randomized Nyström approximation of `XᵀX`, plus `ρI`.
    NySsn,
    /// Sketch-and-solve with a column-sparse embedding: `P = (ΩX)ᵀ(ΩX) + ρI`.
    SassnC,
    /// Sketch-and-solve with a row-sparse embedding.
    SassnR,
    /// `P = diag(XᵀX) + ρI`.
    DiagSsn,
}

impl PreconditionerKind {
    pub const ALL: [PreconditionerKind; 5] = [
        PreconditionerKind::Ssn,
        PreconditionerKind::NySsn,
        PreconditionerKind::SassnC,
        PreconditionerKind::SassnR,
        PreconditionerKind::DiagSsn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PreconditionerKind::Ssn => "ssn",
            PreconditionerKind::NySsn => "nyssn",
            PreconditionerKind::SassnC => "sassn-c",
            PreconditionerKind::SassnR => "sassn-r",
            PreconditionerKind::DiagSsn => "diagssn",
        }
    }

    /// Whether the kind takes a rank (sketch size) parameter.
    pub fn uses_rank(self) -> bool {
        matches!(
            self,
            PreconditionerKind::NySsn | PreconditionerKind::SassnC | PreconditionerKind::SassnR
        )
    }
}

impl fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PreconditionerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown preconditioner '{s}'")))
    }
}

/// Recommended `(rank, ρ)`: rank 10 for the low-rank kinds, `ρ = 10⁻³` for all.
pub fn default_config<T: Real>(kind: PreconditionerKind) -> (Option<usize>, T) {
    let rank = kind.uses_rank().then_some(10);
    (rank, T::lit(1e-3))
}

/// Iteration counts at which the preconditioner is rebuilt. Step 0 always is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateSchedule {
    /// Built once at step 0 and never again (`u = ∞`).
    Once,
    /// Rebuilt whenever the step counter is a multiple of `u`.
    Every(usize),
}

impl UpdateSchedule {
    pub fn contains(self, k: usize) -> bool {
        match self {
            UpdateSchedule::Once => k == 0,
            UpdateSchedule::Every(0) => k == 0,
            UpdateSchedule::Every(u) => k.is_multiple_of(u),
        }
    }
}

#[derive(Debug, Clone)]
enum Factors<T: Real> {
    Empty,
    Ssn(GramCholesky<T>),
    Nystrom(NystromFactors<T>),
    Sketch { y: DMatrix<T>, chol: GramCholesky<T> },
    Diag(DVector<T>),
}

#[derive(Debug, Clone)]
pub struct Preconditioner<T: Real> {
    kind: PreconditionerKind,
    rank: usize,
    rho: T,
    factors: Factors<T>,
    lambda_p: Option<T>,
    power: PowerIterationOptions<T>,
}

impl<T: Real> Preconditioner<T> {
    /// `rank` is required for the low-rank kinds and ignored otherwise.
    /// `ρ` must be positive and at least the model's `ν`.
    pub fn new(kind: PreconditionerKind, rank: Option<usize>, rho: T, nu: T) -> Result<Self> {
        if !(rho > T::zero()) || !rho.is_finite() {
            return Err(Error::Config(format!("rho must be positive, got {rho}")));
        }
        if rho < nu {
            return Err(Error::Config(format!("rho = {rho} is below nu = {nu}")));
        }
        let rank = if kind.uses_rank() {
            match rank {
                Some(r) if r >= 1 => r,
                Some(_) => return Err(Error::Config("rank must be at least 1".into())),
                None => return Err(Error::Config(format!("{kind} needs a rank"))),
            }
        } else {
            0
        };
        Ok(Self {
            kind,
            rank,
            rho,
            factors: Factors::Empty,
            lambda_p: None,
            power: PowerIterationOptions::default(),
        })
    }

    /// Preconditioner with [`default_config`] settings.
    pub fn with_defaults(kind: PreconditionerKind, nu: T) -> Result<Self> {
        let (rank, rho) = default_config::<T>(kind);
        Self::new(kind, rank, rho.max(nu), nu)
    }

    pub fn set_power_options(&mut self, opts: PowerIterationOptions<T>) {
        self.power = opts;
    }

    pub fn kind(&self) -> PreconditionerKind {
        self.kind
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn rank(&self) -> Option<usize> {
        self.kind.uses_rank().then_some(self.rank)
    }

    pub fn is_initialized(&self) -> bool {
        !matches!(self.factors, Factors::Empty)
    }

    /// Latest estimate of the preconditioned smoothness constant.
    pub fn lambda_p(&self) -> Option<T> {
        self.lambda_p
    }

    /// Rebuilds the factors from batch `b1` at `w`, then re-estimates `λ_P`
    /// against the subsampled Hessian of batch `b2`.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        model: &GlmModel<'_, T>,
        b1: &[usize],
        b2: &[usize],
        w: &DVector<T>,
        rng: &mut R,
    ) -> Result<()> {
        let x1 = model.hessian_sqrt_factor(b1, w)?;
        self.build(&x1, rng)?;
        let x2 = model.hessian_sqrt_factor(b2, w)?;
        let nu = model.get_reg();
        self.estimate_lambda_p(|v| x2.tr_matvec(&x2.matvec(v)) + v * nu, rng)?;
        Ok(())
    }

    /// Phase 1 only: builds `P` from a square-root factor `X` with `XᵀX`
    /// approximating the unregularized Hessian.
    pub fn build<R: Rng + ?Sized>(&mut self, x: &DesignMatrix<T>, rng: &mut R) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::numerical("hessian factor contains non-finite values"));
        }
        self.factors = match self.kind {
            PreconditionerKind::Ssn => Factors::Ssn(gram_cholesky(x, self.rho)?),
            PreconditionerKind::NySsn => {
                let r = self.rank.min(x.ncols());
                Factors::Nystrom(randomized_nystrom(x, r, rng)?)
            }
            PreconditionerKind::SassnC | PreconditionerKind::SassnR => {
                let omega = if self.kind == PreconditionerKind::SassnC {
                    sparse_embedding_cols::<T, R>(self.rank, x.nrows(), rng)
                } else {
                    sparse_embedding_rows::<T, R>(self.rank, x.nrows(), rng)
                };
                let y = omega.apply(x)?;
                let chol = gram_cholesky(&DesignMatrix::from_dense(&y), self.rho)?;
                Factors::Sketch { y, chol }
            }
            PreconditionerKind::DiagSsn => Factors::Diag(x.column_sq_norms()),
        };
        Ok(())
    }

    /// Phase 2 only: `λ_P = λ₁(Ẑ P⁻¹)` by power iteration with `Ẑ` given as a
    /// matrix-vector product.
    pub fn estimate_lambda_p<R, F>(&mut self, apply_z: F, rng: &mut R) -> Result<T>
    where
        R: Rng + ?Sized,
        F: FnMut(&DVector<T>) -> DVector<T>,
    {
        let dim = self.dim().ok_or(Error::NotInitialized)?;
        let this = &*self;
        let est = top_generalized_eigenvalue(
            dim,
            apply_z,
            |v| this.direction(v).expect("dimension checked"),
            this.power,
            rng,
        )?;
        if !(est.value > T::zero()) || !est.value.is_finite() {
            return Err(Error::numerical(format!(
                "preconditioned smoothness estimate is not positive: {}",
                est.value
            )));
        }
        if !est.converged {
            log::debug!("power iteration stopped after {} iterations", est.iterations);
        }
        self.lambda_p = Some(est.value);
        Ok(est.value)
    }

    fn dim(&self) -> Option<usize> {
        match &self.factors {
            Factors::Empty => None,
            Factors::Ssn(c) => Some(c.dim()),
            Factors::Nystrom(f) => Some(f.dim()),
            Factors::Sketch { y, .. } => Some(y.ncols()),
            Factors::Diag(d) => Some(d.len()),
        }
    }

    /// `P⁻¹ g`.
    pub fn direction(&self, g: &DVector<T>) -> Result<DVector<T>> {
        let dim = self.dim().ok_or(Error::NotInitialized)?;
        if g.len() != dim {
            return Err(Error::dims("preconditioner direction", dim, g.len()));
        }
        match &self.factors {
            Factors::Empty => Err(Error::NotInitialized),
            Factors::Ssn(c) => c.inverse_apply(g),
            Factors::Nystrom(f) => f.inverse_apply(self.rho, g),
            Factors::Sketch { chol, .. } => chol.inverse_apply(g),
            Factors::Diag(d) => Ok(g.zip_map(d, |gi, di| gi / (di + self.rho))),
        }
    }

    /// The assembled `p × p` matrix `P`.
    pub fn to_dense(&self) -> Result<DMatrix<T>> {
        let dim = self.dim().ok_or(Error::NotInitialized)?;
        let eye = DMatrix::<T>::identity(dim, dim);
        Ok(match &self.factors {
            Factors::Empty => return Err(Error::NotInitialized),
            Factors::Ssn(c) => c.to_dense_operator(),
            Factors::Nystrom(f) => f.to_dense() + eye * self.rho,
            Factors::Sketch { y, .. } => y.tr_mul(y) + eye * self.rho,
            Factors::Diag(d) => DMatrix::from_diagonal(&d.add_scalar(self.rho)),
        })
    }

    /// `ζ̂ = max(1 − λ_min, λ_max − 1)` over the generalized eigenvalues of `(H, P)`.
    pub fn zeta_estimate(&self, h: &DMatrix<T>) -> Result<T> {
        zeta_between(h, &self.to_dense()?)
    }
}

/// Eigenvalues of `P^{-1/2} H P^{-1/2}` in ascending order.
pub fn generalized_eigenvalues<T: Real>(h: &DMatrix<T>, p: &DMatrix<T>) -> Result<DVector<T>> {
    if !h.is_square() || h.shape() != p.shape() {
        return Err(Error::dims("generalized eigenproblem", p.nrows(), h.nrows()));
    }
    let l = p
        .clone()
        .cholesky()
        .ok_or_else(|| Error::numerical("preconditioner is not positive definite"))?
        .l();
    let li_h = l
        .solve_lower_triangular(h)
        .ok_or_else(|| Error::numerical("singular cholesky factor"))?;
    let m = l
        .solve_lower_triangular(&li_h.transpose())
        .ok_or_else(|| Error::numerical("singular cholesky factor"))?;
    let m = (&m + m.transpose()) * T::lit(0.5);
    let mut ev: Vec<T> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(DVector::from_vec(ev))
}

/// Smallest `ζ` with `(1−ζ)P ⪯ H ⪯ (1+ζ)P`.
pub fn zeta_between<T: Real>(h: &DMatrix<T>, p: &DMatrix<T>) -> Result<T> {
    let ev = generalized_eigenvalues(h, p)?;
    let lo = ev[0];
    let hi = ev[ev.len() - 1];
    Ok((T::one() - lo).max(hi - T::one()))
}
