//! Spectral and regularity diagnostics. Everything here takes a dense path
//! and is meant for tests and reports at small scale.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::glm::GlmModel;
use crate::matrix::DesignMatrix;
use crate::precond::Preconditioner;
use crate::scalar::Real;

/// Largest `n` or `p` accepted by the SVD-based diagnostics.
pub const MAX_SVD_DIM: usize = 2000;
/// Largest `p` accepted by [`hessian_dissimilarity`].
pub const MAX_DISSIMILARITY_DIM: usize = 200;
/// Default quadrature order of [`local_qr_ratio`].
pub const QR_QUADRATURE_ORDER: usize = 16;
/// Trajectory segments longer than this are thinned to evenly spaced points.
pub const MAX_SEGMENT_POINTS: usize = 64;

struct ThinSvd<T: Real> {
    u: DMatrix<T>,
    s: DVector<T>,
}

fn thin_svd<T: Real>(a: &DesignMatrix<T>) -> Result<ThinSvd<T>> {
    let (n, p) = (a.nrows(), a.ncols());
    if n > MAX_SVD_DIM || p > MAX_SVD_DIM {
        return Err(Error::InvalidInput(format!(
            "dense spectral diagnostics are limited to {MAX_SVD_DIM} rows and columns, got {n}×{p}"
        )));
    }
    let svd = a.to_dense().svd(true, false);
    let u = svd.u.ok_or_else(|| Error::numerical("svd did not return left vectors"))?;
    // exact zeros below the rank threshold, so ν = 0 behaves as a pseudoinverse
    let smax = svd.singular_values.max();
    let cut = smax * T::from_usize_lossy(n.max(p)) * T::default_epsilon();
    let s = svd.singular_values.map(|v| if v > cut { v } else { T::zero() });
    Ok(ThinSvd { u, s })
}

fn shrink_factors<T: Real>(s: &DVector<T>, n: usize, nu: T) -> DVector<T> {
    let shift = T::from_usize_lossy(n) * nu;
    s.map(|sj| {
        let s2 = sj * sj;
        if s2 == T::zero() {
            T::zero()
        } else {
            s2 / (s2 + shift)
        }
    })
}

fn check_nu<T: Real>(nu: T) -> Result<()> {
    if !(nu >= T::zero()) || !nu.is_finite() {
        return Err(Error::InvalidInput(format!("nu must be finite and ≥ 0, got {nu}")));
    }
    Ok(())
}

/// `ℓᵢ = aᵢᵀ(AᵀA + nνI)⁺aᵢ` for every row.
pub fn ridge_leverage_scores<T: Real>(a: &DesignMatrix<T>, nu: T) -> Result<DVector<T>> {
    check_nu(nu)?;
    let svd = thin_svd(a)?;
    Ok(leverage_from_svd(&svd, a.nrows(), nu))
}

fn leverage_from_svd<T: Real>(svd: &ThinSvd<T>, n: usize, nu: T) -> DVector<T> {
    let f = shrink_factors(&svd.s, n, nu);
    DVector::from_fn(n, |i, _| {
        svd.u
            .row(i)
            .iter()
            .zip(f.iter())
            .fold(T::zero(), |acc, (&uij, &fj)| acc + fj * uij * uij)
    })
}

/// `d_eff = Σⱼ σⱼ² / (σⱼ² + nν)`.
pub fn effective_dimension<T: Real>(a: &DesignMatrix<T>, nu: T) -> Result<T> {
    check_nu(nu)?;
    let svd = thin_svd(a)?;
    Ok(shrink_factors(&svd.s, a.nrows(), nu).sum())
}

/// `χ = (n / d_eff) · maxᵢ ℓᵢ`.
pub fn ridge_leverage_coherence<T: Real>(a: &DesignMatrix<T>, nu: T) -> Result<T> {
    check_nu(nu)?;
    let svd = thin_svd(a)?;
    coherence_from_svd(&svd, a.nrows(), nu)
}

fn coherence_from_svd<T: Real>(svd: &ThinSvd<T>, n: usize, nu: T) -> Result<T> {
    let d_eff = shrink_factors(&svd.s, n, nu).sum();
    if d_eff <= T::zero() {
        return Err(Error::InvalidInput("coherence is undefined for a zero matrix".into()));
    }
    let lmax = leverage_from_svd(svd, n, nu).max();
    Ok(T::from_usize_lossy(n) / d_eff * lmax)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport<T: Real> {
    /// Singular values of `A`, descending.
    pub singular_values: DVector<T>,
    pub nu_grid: Vec<T>,
    /// `d_eff` at each grid point.
    pub effective_dimension: Vec<T>,
    /// Leverage scores at `nu`.
    pub leverage_scores: DVector<T>,
    /// Coherence at `nu`.
    pub coherence: T,
    pub nu: T,
}

/// One SVD, then all spectral quantities at `nu` and `d_eff` over `nu_grid`.
pub fn spectrum_report<T: Real>(a: &DesignMatrix<T>, nu: T, nu_grid: &[T]) -> Result<SpectrumReport<T>> {
    check_nu(nu)?;
    for &g in nu_grid {
        check_nu(g)?;
    }
    let n = a.nrows();
    let svd = thin_svd(a)?;
    let mut sv: Vec<T> = svd.s.iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    Ok(SpectrumReport {
        singular_values: DVector::from_vec(sv),
        nu_grid: nu_grid.to_vec(),
        effective_dimension: nu_grid.iter().map(|&g| shrink_factors(&svd.s, n, g).sum()).collect(),
        leverage_scores: leverage_from_svd(&svd, n, nu),
        coherence: coherence_from_svd(&svd, n, nu)?,
        nu,
    })
}

/// Largest eigenvalue of `diag(k) + c·z zᵀ` for `c ≥ 0`.
fn rank_one_top_eigenvalue<T: Real>(k: &DVector<T>, c: T, z: &DVector<T>) -> T {
    let kmax = k.max();
    let mass = c * z.norm_squared();
    if mass <= T::zero() {
        return kmax;
    }
    // secular equation 1 = c Σ zⱼ² / (λ − kⱼ), increasing in λ on (kmax, ∞)
    let f = |lam: T| {
        T::one()
            - c * k
                .iter()
                .zip(z.iter())
                .fold(T::zero(), |acc, (&kj, &zj)| acc + zj * zj / (lam - kj))
    };
    let mut lo = kmax;
    let mut hi = kmax + mass;
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Grid maximum of `λ₁((∇²f(w) + νI)^{-1/2} (∇²fᵢ(w) + νI) (∇²f(w) + νI)^{-1/2})`
/// over the points in `w_grid` and every sample `i`.
pub fn hessian_dissimilarity<T: Real>(model: &GlmModel<'_, T>, w_grid: &[DVector<T>]) -> Result<T> {
    let (n, p) = (model.n(), model.p());
    if p > MAX_DISSIMILARITY_DIM || n > MAX_SVD_DIM {
        return Err(Error::InvalidInput(format!(
            "hessian dissimilarity is limited to p ≤ {MAX_DISSIMILARITY_DIM}, n ≤ {MAX_SVD_DIM}"
        )));
    }
    if w_grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let nu = model.get_reg();
    let a = model.data().design();
    let mut best = T::zero();
    for w in w_grid {
        let h = model.full_hessian(w)?;
        let eig = h.symmetric_eigen();
        if eig.eigenvalues.iter().any(|&v| !(v > T::zero())) {
            return Err(Error::numerical("full hessian is singular; dissimilarity needs nu > 0"));
        }
        let k = eig.eigenvalues.map(|h| nu / h);
        let scale = eig.eigenvalues.map(|h| T::one() / h.sqrt());
        let curv = model.get_hessian_diagonal(&(0..n).collect::<Vec<_>>(), w)?;
        for i in 0..n {
            let mut ai = DVector::zeros(p);
            a.add_row_to(i, T::one(), &mut ai);
            let z = eig.eigenvectors.tr_mul(&ai).component_mul(&scale);
            best = best.max(rank_one_top_eigenvalue(&k, curv[i], &z));
        }
    }
    Ok(best)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let m = order;
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_m(x) and P_m'(x) by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            let pm = if m == 0 { 1.0 } else if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        let wt = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = wt;
        weights[m - 1 - i] = wt;
    }
    (nodes, weights)
}

/// `dᵀ ∇²F(x) d` without forming the Hessian.
fn hessian_quadratic_form<T: Real>(model: &GlmModel<'_, T>, x: &DVector<T>, d: &DVector<T>) -> T {
    let a = model.data().design();
    let n = model.n();
    let s = (0..n).fold(T::zero(), |acc, i| {
        let ad = a.row_dot(i, d);
        acc + model.loss_curvature(i, a.row_dot(i, x)) * ad * ad
    });
    s / T::from_usize_lossy(n) + model.get_reg() * d.norm_squared()
}

/// Up to `MAX_SEGMENT_POINTS` evenly spaced points, endpoints included.
fn thin_segment<T: Real>(segment: &[DVector<T>]) -> Vec<&DVector<T>> {
    let len = segment.len();
    if len <= MAX_SEGMENT_POINTS {
        return segment.iter().collect();
    }
    (0..MAX_SEGMENT_POINTS)
        .map(|k| &segment[k * (len - 1) / (MAX_SEGMENT_POINTS - 1)])
        .collect()
}

/// Local quadratic-regularity ratio `γ_u / γ_ℓ` over a trajectory segment,
/// with the Hessian norm of `w_j` as reference. Uses order-16 quadrature.
pub fn local_qr_ratio<T: Real>(
    model: &GlmModel<'_, T>,
    w_j: &DVector<T>,
    segment: &[DVector<T>],
    w_star: &DVector<T>,
) -> Result<T> {
    local_qr_ratio_with_order(model, w_j, segment, w_star, QR_QUADRATURE_ORDER)
}

pub fn local_qr_ratio_with_order<T: Real>(
    model: &GlmModel<'_, T>,
    w_j: &DVector<T>,
    segment: &[DVector<T>],
    w_star: &DVector<T>,
    order: usize,
) -> Result<T> {
    if order == 0 {
        return Err(Error::InvalidInput("quadrature order must be positive".into()));
    }
    let p = model.p();
    for v in std::iter::once(w_j).chain(std::iter::once(w_star)).chain(segment) {
        if v.len() != p {
            return Err(Error::dims("quadratic regularity point", p, v.len()));
        }
    }
    let (nodes, weights) = gauss_legendre(order);
    let mut hi: Option<T> = None;
    let mut lo: Option<T> = None;
    for w in thin_segment(segment) {
        let d = w_star - w;
        if d.iter().all(|&v| v == T::zero()) {
            continue;
        }
        let denom = hessian_quadratic_form(model, w_j, &d);
        // ∫₀¹ 2(1−t) dᵀ∇²F(w + t d)d dt on t = (x + 1)/2
        let numer = nodes.iter().zip(&weights).fold(T::zero(), |acc, (&x, &wt)| {
            let t = T::lit(0.5 * (x + 1.0));
            let pt = w + &d * t;
            acc + T::lit(0.5 * wt) * T::lit(2.0) * (T::one() - t) * hessian_quadratic_form(model, &pt, &d)
        });
        let r = numer / denom;
        hi = Some(hi.map_or(r, |h| h.max(r)));
        lo = Some(lo.map_or(r, |l| l.min(r)));
    }
    match (hi, lo) {
        (Some(h), Some(l)) => Ok(h / l),
        _ => Err(Error::InvalidInput("every segment point coincides with w*".into())),
    }
}

/// `ζ̂` of a built preconditioner against the exact Hessian at `w`.
pub fn zeta_of<T: Real>(precond: &Preconditioner<T>, model: &GlmModel<'_, T>, w: &DVector<T>) -> Result<T> {
    precond.zeta_estimate(&model.full_hessian(w)?)
}
