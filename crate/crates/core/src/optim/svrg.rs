use nalgebra::DVector;
use rand::Rng;

use super::driver::Driver;
use super::{Resolved, RunRecord, RunResult, SvrgOption};
use crate::error::Result;
use crate::glm::GlmModel;
use crate::scalar::Real;

/// Variance-reduced estimate `∇̂F(w) − ∇̂F(ŵ) + ∇F(ŵ)` on a shared batch.
pub fn svrg_gradient<T: Real>(
    model: &GlmModel<'_, T>,
    batch: &[usize],
    w: &DVector<T>,
    snapshot: &DVector<T>,
    snapshot_grad: &DVector<T>,
) -> Result<DVector<T>> {
    let gw = model.get_stoch_grad(batch, w)?;
    let gs = model.get_stoch_grad(batch, snapshot)?;
    Ok(gw - gs + snapshot_grad)
}

pub(crate) fn run<T: Real>(
    model: &GlmModel<'_, T>,
    cfg: Resolved<T>,
    callback: &mut dyn FnMut(&RunRecord),
) -> Result<RunResult<T>> {
    let n = model.n();
    let m = cfg.inner;
    let option = cfg.svrg_option;
    let mut snap = cfg.w0.clone();
    let mut w = snap.clone();
    let mut d = Driver::new(model, cfg, callback)?;
    let mut eta = d.cfg.learning_rate.unwrap_or_else(|| d.saga_rate(None));
    if !d.cfg.method.is_preconditioned() {
        d.set_eta(eta);
    }
    let mut running = d.start(&w);
    while running {
        let g_snap = model.get_full_grad(&snap)?;
        d.charge(n);
        w.copy_from(&snap);
        let pick = match option {
            SvrgOption::I => m - 1,
            SvrgOption::II => d.rng.random_range(0..m),
        };
        let mut chosen = None;
        for k in 0..m {
            if d.due(d.steps()) {
                let lambda = d.refresh(&w)?;
                if lambda.is_some() {
                    eta = d.saga_rate(lambda);
                    d.set_eta(eta);
                }
            }
            if option == SvrgOption::II && k == pick {
                chosen = Some(w.clone());
            }
            let batch = d.gradient_batch();
            let g = svrg_gradient(model, &batch, &w, &snap, &g_snap)?;
            d.charge(batch.len());
            let v = d.direction(g)?;
            w.axpy(-eta, &v, T::one());
            running = d.end_step(&w);
            if !running {
                break;
            }
        }
        snap = match chosen {
            Some(c) if running => c,
            _ => w.clone(),
        };
    }
    Ok(d.finish(w))
}
