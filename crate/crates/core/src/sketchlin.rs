//! Randomized linear algebra kernels behind the preconditioners: Nyström
//! low-rank approximation, regularized Gram Cholesky factors with Woodbury
//! inverse applies, sparse sign embeddings, and power iteration for the top
//! eigenvalue of a matrix pencil.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::DesignMatrix;
use crate::scalar::Real;

/// Factored low-rank approximation `U diag(d) Uᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct NystromFactors<T: Real> {
    /// `p × r` with orthonormal columns.
    pub u: DMatrix<T>,
    /// Nonnegative, sorted descending.
    pub d: DVector<T>,
}

impl<T: Real> NystromFactors<T> {
    pub fn rank(&self) -> usize {
        self.d.len()
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// `U diag(d) Uᵀ` as a dense matrix.
    pub fn to_dense(&self) -> DMatrix<T> {
        let mut ud = self.u.clone();
        for (mut col, &dj) in ud.column_iter_mut().zip(self.d.iter()) {
            col *= dj;
        }
        ud * self.u.transpose()
    }

    /// `(U diag(d) Uᵀ + ρI)⁻¹ v` via the Woodbury identity, `O(rp)`.
    pub fn inverse_apply(&self, rho: T, v: &DVector<T>) -> Result<DVector<T>> {
        if rho <= T::zero() {
            return Err(Error::InvalidInput("regularizer rho must be positive".into()));
        }
        if v.len() != self.dim() {
            return Err(Error::dims("nystrom inverse apply", self.dim(), v.len()));
        }
        let inv_rho = T::one() / rho;
        let mut coef = self.u.tr_mul(v);
        for (c, &dj) in coef.iter_mut().zip(self.d.iter()) {
            *c *= T::one() / (dj + rho) - inv_rho;
        }
        let mut out = v * inv_rho;
        out.gemv(T::one(), &self.u, &coef, T::one());
        Ok(out)
    }
}

/// Draws a `rows × cols` standard Gaussian matrix.
pub fn gaussian_matrix<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| T::lit(rng.sample::<f64, _>(StandardNormal)))
}

/// Stabilized randomized Nyström approximation of `H = XᵀX` for a
/// square-root factor `X` (`b × p`), using a QR-orthonormalized Gaussian test
/// matrix with `rank` columns.
///
/// A Cholesky breakdown of the shifted core matrix triggers one fresh test
/// matrix before the error is returned.
pub fn randomized_nystrom<T: Real, R: Rng + ?Sized>(
    x: &DesignMatrix<T>,
    rank: usize,
    rng: &mut R,
) -> Result<NystromFactors<T>> {
    let p = x.ncols();
    if rank == 0 || rank > p {
        return Err(Error::InvalidInput(format!(
            "nystrom rank must lie in [1, {p}], got {rank}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::InvalidInput("square-root factor contains non-finite values".into()));
    }
    match nystrom_attempt(x, rank, rng) {
        Err(Error::Numerical { retriable: true, .. }) => nystrom_attempt(x, rank, rng),
        other => other,
    }
}

fn nystrom_attempt<T: Real, R: Rng + ?Sized>(
    x: &DesignMatrix<T>,
    rank: usize,
    rng: &mut R,
) -> Result<NystromFactors<T>> {
    let p = x.ncols();
    let omega = gaussian_matrix::<T, R>(p, rank, rng).qr().q();

    // Y = Xᵀ (X Ω)
    let y = x.tr_mul_dense(&x.mul_dense(&omega));
    let fro = y.norm();
    if fro == T::zero() {
        return Ok(NystromFactors {
            u: omega,
            d: DVector::zeros(rank),
        });
    }
    let shift = T::from_usize_lossy(p).sqrt() * T::unit_roundoff() * fro;
    let y_shift = &y + &omega * shift;

    let mut core = omega.tr_mul(&y_shift);
    core = (&core + core.transpose()) * T::lit(0.5);
    let chol = core.cholesky().ok_or_else(|| Error::Numerical {
        message: "cholesky of the shifted nystrom core failed".into(),
        retriable: true,
    })?;

    // S = Y_shift C⁻ᵀ, computed as (C⁻¹ Y_shiftᵀ)ᵀ
    let s = chol
        .l()
        .solve_lower_triangular(&y_shift.transpose())
        .ok_or_else(|| Error::numerical("singular nystrom cholesky factor"))?
        .transpose();

    let svd = s.svd(true, false);
    let u = svd.u.ok_or_else(|| Error::numerical("svd did not return left vectors"))?;
    let mut order: Vec<usize> = (0..rank).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let u = u.select_columns(&order);
    let d = DVector::from_iterator(
        rank,
        order.iter().map(|&j| {
            let sig = svd.singular_values[j];
            (sig * sig - shift).max(T::zero())
        }),
    );
    Ok(NystromFactors { u, d })
}

/// `(U diag(d) Uᵀ + ρI)⁻¹ v`.
pub fn nystrom_inverse_apply<T: Real>(f: &NystromFactors<T>, rho: T, v: &DVector<T>) -> Result<DVector<T>> {
    f.inverse_apply(rho, v)
}

/// Cholesky factor of the regularized Gram matrix of a square-root factor
/// `X` (`b × p`): `XᵀX + ρI` when `b ≥ p`, otherwise `XXᵀ + ρI` with `X`
/// retained for the Woodbury apply.
#[derive(Debug, Clone)]
pub struct GramCholesky<T: Real> {
    chol: Cholesky<T, Dyn>,
    rho: T,
    dim: usize,
    x: Option<DesignMatrix<T>>,
}

impl<T: Real> GramCholesky<T> {
    /// Lower triangular factor `L`.
    pub fn l(&self) -> DMatrix<T> {
        self.chol.l()
    }

    pub fn wide_case(&self) -> bool {
        self.x.is_some()
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    /// Feature dimension `p`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The retained factor `X`, present only in the wide case.
    pub fn factor(&self) -> Option<&DesignMatrix<T>> {
        self.x.as_ref()
    }

    /// `(XᵀX + ρI)⁻¹ g` in either storage case.
    pub fn inverse_apply(&self, g: &DVector<T>) -> Result<DVector<T>> {
        if g.len() != self.dim {
            return Err(Error::dims("gram inverse apply", self.dim, g.len()));
        }
        Ok(match &self.x {
            None => self.chol.solve(g),
            Some(x) => {
                let v = self.chol.solve(&x.matvec(g));
                (g - x.tr_matvec(&v)) / self.rho
            }
        })
    }

    /// The factored operator `XᵀX + ρI` as a dense `p × p` matrix.
    pub fn to_dense_operator(&self) -> DMatrix<T> {
        match &self.x {
            None => self.chol.l() * self.chol.l().transpose(),
            Some(x) => x.gram_features() + DMatrix::identity(self.dim, self.dim) * self.rho,
        }
    }
}

pub fn gram_cholesky<T: Real>(x: &DesignMatrix<T>, rho: T) -> Result<GramCholesky<T>> {
    if rho <= T::zero() {
        return Err(Error::InvalidInput("regularizer rho must be positive".into()));
    }
    let (b, p) = (x.nrows(), x.ncols());
    let (gram, keep) = if b >= p {
        (x.gram_features(), None)
    } else {
        (x.gram_samples(), Some(x.clone()))
    };
    let m = gram.nrows();
    let chol = (gram + DMatrix::identity(m, m) * rho)
        .cholesky()
        .ok_or_else(|| Error::numerical("cholesky of regularized gram failed (non-finite data?)"))?;
    Ok(GramCholesky {
        chol,
        rho,
        dim: p,
        x: keep,
    })
}

pub fn gram_inverse_apply<T: Real>(c: &GramCholesky<T>, rho: T, g: &DVector<T>) -> Result<DVector<T>> {
    if rho != c.rho {
        return Err(Error::InvalidInput(format!(
            "rho {rho} differs from the factorization's rho {}",
            c.rho
        )));
    }
    c.inverse_apply(g)
}

/// Which dimension of the embedding carries the fixed nonzero count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingLayout {
    /// Fixed count per column (column-sparse sketch).
    ColumnSparse,
    /// Fixed count per row (row-sparse, LESS-uniform style).
    RowSparse,
}

/// Sparse sign embedding `Ω` of shape `rows × cols`, stored as triplets.
/// Duplicate positions are allowed and add up when applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseEmbedding<T: Real> {
    rows: usize,
    cols: usize,
    sparsity: usize,
    layout: EmbeddingLayout,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> SparseEmbedding<T> {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn layout(&self) -> EmbeddingLayout {
        self.layout
    }

    /// Stored `(row, col, value)` triplets.
    pub fn entries(&self) -> &[(usize, usize, T)] {
        &self.entries
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            out[(r, c)] += v;
        }
        out
    }

    /// `Ω X` for `X` with `cols` rows; returns a dense `rows × p` matrix.
    pub fn apply(&self, x: &DesignMatrix<T>) -> Result<DMatrix<T>> {
        if x.nrows() != self.cols {
            return Err(Error::dims("sparse embedding apply", self.cols, x.nrows()));
        }
        let p = x.ncols();
        let mut rows = vec![DVector::<T>::zeros(p); self.rows];
        for &(r, c, v) in &self.entries {
            x.add_row_to(c, v, &mut rows[r]);
        }
        Ok(DMatrix::from_fn(self.rows, p, |i, j| rows[i][j]))
    }
}

fn random_sign<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    if rng.random::<f64>() < 0.5 {
        -T::one()
    } else {
        T::one()
    }
}

/// Column-sparse embedding: every column holds `ζ = min(r, 8)` entries
/// `±√(1/ζ)` at rows drawn uniformly with replacement.
pub fn sparse_embedding_cols<T: Real, R: Rng + ?Sized>(r: usize, b: usize, rng: &mut R) -> SparseEmbedding<T> {
    let zeta = r.min(8);
    let scale = (T::one() / T::from_usize_lossy(zeta)).sqrt();
    let mut entries = Vec::with_capacity(zeta * b);
    for col in 0..b {
        for _ in 0..zeta {
            let row = rng.random_range(0..r);
            entries.push((row, col, random_sign::<T, R>(rng) * scale));
        }
    }
    SparseEmbedding {
        rows: r,
        cols: b,
        sparsity: zeta,
        layout: EmbeddingLayout::ColumnSparse,
        entries,
    }
}

/// Row-sparse embedding: every row holds `ζ = min(b, 8)` entries
/// `±√(b/(ζr))` at columns drawn uniformly with replacement.
pub fn sparse_embedding_rows<T: Real, R: Rng + ?Sized>(r: usize, b: usize, rng: &mut R) -> SparseEmbedding<T> {
    let zeta = b.min(8);
    let scale = (T::from_usize_lossy(b) / T::from_usize_lossy(zeta * r)).sqrt();
    let mut entries = Vec::with_capacity(zeta * r);
    for row in 0..r {
        for _ in 0..zeta {
            let col = rng.random_range(0..b);
            entries.push((row, col, random_sign::<T, R>(rng) * scale));
        }
    }
    SparseEmbedding {
        rows: r,
        cols: b,
        sparsity: zeta,
        layout: EmbeddingLayout::RowSparse,
        entries,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIterationOptions<T> {
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for PowerIterationOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-3),
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate<T> {
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

const MAX_RESTARTS: usize = 3;

/// Largest eigenvalue of `Z P⁻¹` for symmetric PSD `Z` and SPD `P`, both
/// available only through matrix-vector products.
///
/// Iterates `x ← Z P⁻¹ x`; with `y = P⁻¹x` the quotient `yᵀZy / xᵀy` is the
/// Rayleigh quotient of the symmetrized pencil, so the estimates increase
/// monotonically towards `λ₁`.
pub fn top_generalized_eigenvalue<T, R, FZ, FP>(
    dim: usize,
    mut apply_z: FZ,
    mut apply_pinv: FP,
    opts: PowerIterationOptions<T>,
    rng: &mut R,
) -> Result<PowerEstimate<T>>
where
    T: Real,
    R: Rng + ?Sized,
    FZ: FnMut(&DVector<T>) -> DVector<T>,
    FP: FnMut(&DVector<T>) -> DVector<T>,
{
    if opts.tol <= T::zero() {
        return Err(Error::InvalidInput("power iteration tolerance must be positive".into()));
    }
    let mut x = DVector::<T>::zeros(dim);
    let mut drawn = false;
    for _ in 0..MAX_RESTARTS {
        x = DVector::from_fn(dim, |_, _| T::lit(rng.sample::<f64, _>(StandardNormal)));
        let nrm = x.norm();
        if nrm > T::zero() && nrm.is_finite() {
            x /= nrm;
            drawn = true;
            break;
        }
    }
    if !drawn {
        return Err(Error::numerical("power iteration could not draw a nonzero start vector"));
    }

    let mut prev: Option<T> = None;
    let mut value = T::zero();
    for it in 1..=opts.max_iter.max(1) {
        let y = apply_pinv(&x);
        let z = apply_z(&y);
        let denom = x.dot(&y);
        if !(denom > T::zero()) {
            return Err(Error::numerical("inverse preconditioner is not positive definite"));
        }
        value = y.dot(&z) / denom;
        if !value.is_finite() {
            return Err(Error::numerical("power iteration produced a non-finite estimate"));
        }
        let zn = z.norm();
        if zn == T::zero() {
            // Z annihilated a generic vector: the pencil is zero.
            return Ok(PowerEstimate {
                value: T::zero(),
                iterations: it,
                converged: true,
            });
        }
        if let Some(p) = prev {
            if (value - p).abs() <= opts.tol * value.abs() {
                return Ok(PowerEstimate {
                    value,
                    iterations: it,
                    converged: true,
                });
            }
        }
        prev = Some(value);
        x = z / zn;
    }
    Ok(PowerEstimate {
        value,
        iterations: opts.max_iter,
        converged: false,
    })
}
