//! Reference minima: a dense solve for ridge, damped Newton for logistic.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sketchy_core::{GlmModel, Loss};

use crate::error::Result;

pub const NEWTON_MAX_ITER: usize = 200;
pub const MAX_REFERENCE_DIM: usize = 2000;
const GRAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSolution {
    pub w: Vec<f64>,
    pub f_star: f64,
    pub method: String,
    /// `‖∇F(w*)‖₂`.
    pub grad_norm: f64,
}

impl ReferenceSolution {
    pub fn w(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.w)
    }
}

fn numerical(msg: String) -> crate::error::BenchError {
    sketchy_core::Error::Numerical { message: msg, retriable: false }.into()
}

/// `‖∇F(w*)‖ ≤ 1e-10 · max(1, ‖∇F(0)‖)` is enforced; failing it is an error.
pub fn reference_minimum(model: &GlmModel<'_, f64>) -> Result<ReferenceSolution> {
    let p = model.p();
    if p > MAX_REFERENCE_DIM {
        return Err(sketchy_core::Error::InvalidInput(format!(
            "reference solve needs a dense p × p system, p = {p} exceeds {MAX_REFERENCE_DIM}"
        ))
        .into());
    }
    let tol = GRAD_TOL * model.get_full_grad(&DVector::zeros(p))?.norm().max(1.0);
    let (w, method) = match model.loss() {
        Loss::Squared => (ridge_solve(model, tol)?, "dense-solve"),
        Loss::Logistic => (newton(model, tol)?, "newton"),
    };
    let grad_norm = model.get_full_grad(&w)?.norm();
    if !(grad_norm <= tol) {
        return Err(numerical(format!("reference residual {grad_norm:e} above {tol:e}")));
    }
    Ok(ReferenceSolution {
        f_star: model.full_loss(&w)?,
        w: w.iter().copied().collect(),
        method: method.into(),
        grad_norm,
    })
}

fn solve(h: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        let d = ch.l_dirty().diagonal();
        if d.min() > d.max() * 1e-7 {
            return Ok(ch.solve(rhs));
        }
    }
    // singular normal equations (ν = 0, rank deficient): minimum-norm solution
    let svd = h.svd(true, true);
    let eps = svd.singular_values.max() * 1e-14;
    svd.solve(rhs, eps).map_err(|e| numerical(e.to_string()))
}

fn ridge_solve(model: &GlmModel<'_, f64>, tol: f64) -> Result<DVector<f64>> {
    let p = model.p();
    let h = model.full_hessian(&DVector::zeros(p))?;
    let mut w = solve(h.clone(), &-model.get_full_grad(&DVector::zeros(p))?)?;
    // iterative refinement
    for _ in 0..3 {
        let g = model.get_full_grad(&w)?;
        if g.norm() <= tol {
            break;
        }
        w -= solve(h.clone(), &g)?;
    }
    Ok(w)
}

fn newton(model: &GlmModel<'_, f64>, tol: f64) -> Result<DVector<f64>> {
    let mut w = DVector::zeros(model.p());
    let mut f = model.full_loss(&w)?;
    for _ in 0..NEWTON_MAX_ITER {
        let g = model.get_full_grad(&w)?;
        if g.norm() <= tol {
            return Ok(w);
        }
        let d = solve(model.full_hessian(&w)?, &g)?;
        let dec = g.dot(&d);
        // Armijo backtracking; inside the quadratic region F is flat to roundoff, take the full step
        let mut t = 1.0;
        if dec > 1e-14 * f.abs().max(1.0) {
            loop {
                let trial = &w - &d * t;
                let ft = model.full_loss(&trial)?;
                if ft <= f - 1e-4 * t * dec {
                    break;
                }
                t *= 0.5;
                if t < 1e-12 {
                    return Err(numerical("newton line search failed".into()));
                }
            }
        }
        w -= &d * t;
        f = model.full_loss(&w)?;
    }
    Err(numerical(format!("newton did not converge in {NEWTON_MAX_ITER} iterations")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{synthetic_logistic, synthetic_ridge};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use sketchy_core::{Dataset, DesignMatrix};

    #[test]
    fn diagonal_ridge_closed_form() {
        let n = 3usize;
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let b = DVector::from_vec(vec![1.0, -1.0, 2.0]);
        let ds = Dataset::new(DesignMatrix::from_dense(&a), b.clone()).unwrap();
        let nu = 0.1;
        let r = reference_minimum(&GlmModel::new(&ds, Loss::Squared, nu).unwrap()).unwrap();
        for j in 0..3 {
            let d = a[(j, j)];
            let exact = (d * b[j] / n as f64) / (d * d / n as f64 + nu);
            assert!((r.w[j] - exact).abs() < 1e-14);
        }
        assert_eq!(r.method, "dense-solve");
    }

    #[test]
    fn rank_deficient_unregularized_ridge() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, -1.0, -1.0]);
        let ds = Dataset::new(DesignMatrix::from_dense(&a), DVector::from_vec(vec![1.0, 2.0, 0.5])).unwrap();
        let r = reference_minimum(&GlmModel::new(&ds, Loss::Squared, 0.0).unwrap()).unwrap();
        assert!((r.w[0] - r.w[1]).abs() < 1e-12);
    }

    #[test]
    fn residual_contract_on_generated_instances() {
        for seed in 0..4 {
            let mut g = ChaCha8Rng::seed_from_u64(seed);
            let (ds, _) = synthetic_ridge(300, 20, 1.0, 0.1, &mut g).unwrap();
            let m = GlmModel::new(&ds, Loss::Squared, 1e-2 / 300.0).unwrap();
            let r = reference_minimum(&m).unwrap();
            let g0 = m.get_full_grad(&DVector::zeros(20)).unwrap().norm();
            assert!(r.grad_norm <= 1e-10 * g0.max(1.0));

            let (ds, _) = synthetic_logistic(300, 10, 3.0, &mut g).unwrap();
            let m = GlmModel::new(&ds, Loss::Logistic, 1e-2 / 300.0).unwrap();
            let r = reference_minimum(&m).unwrap();
            assert_eq!(r.method, "newton");
            assert!(r.grad_norm <= 1e-10);
            assert!(r.f_star <= m.full_loss(&DVector::zeros(10)).unwrap());
        }
    }

    #[test]
    fn heavy_regularization_shrinks_to_zero() {
        let (ds, _) = synthetic_logistic(50, 5, 2.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let mut prev = f64::INFINITY;
        for nu in [1.0, 1e2, 1e4, 1e6] {
            let r = reference_minimum(&GlmModel::new(&ds, Loss::Logistic, nu).unwrap()).unwrap();
            let norm = r.w().norm();
            assert!(norm < prev);
            prev = norm;
        }
        assert!(prev < 1e-6);
    }
}
