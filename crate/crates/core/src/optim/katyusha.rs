use rand::Rng;

use super::driver::Driver;
use super::svrg::svrg_gradient;
use super::{Resolved, RunRecord, RunResult};
use crate::error::Result;
use crate::glm::GlmModel;
use crate::scalar::Real;

/// Epochs without a snapshot refresh after which one is forced.
const MAX_STALE_EPOCHS: usize = 3;

pub(crate) fn run<T: Real>(
    model: &GlmModel<'_, T>,
    cfg: Resolved<T>,
    callback: &mut dyn FnMut(&RunRecord),
) -> Result<RunResult<T>> {
    let n = model.n();
    let mu = cfg.mu;
    let alpha = cfg.alpha;
    let theta2 = cfg.theta2;
    let pi = cfg.pi.to_f64_lossy();
    let mut w = cfg.w0.clone();
    let mut z = w.clone();
    let mut y = w.clone();
    let mut d = Driver::new(model, cfg, callback)?;
    let stale_limit = MAX_STALE_EPOCHS * d.cfg.epoch_len;

    // L, σ, θ₁, η
    let params = |l: T, lr: Option<T>| {
        let sigma = mu / l;
        let theta1 = (alpha * T::from_usize_lossy(n) * sigma).sqrt().min(T::lit(0.5));
        let eta = lr.unwrap_or(theta2 / ((T::one() + theta2) * theta1));
        (l, sigma, theta1, eta)
    };
    let (mut l, mut sigma, mut theta1, mut eta) = params(d.smoothness(None), d.cfg.learning_rate);
    if !d.cfg.method.is_preconditioned() {
        d.set_eta(eta);
    }

    let mut running = d.start(&w);
    let mut g_snap = model.get_full_grad(&y)?;
    if running {
        d.charge(n);
    }
    let mut last_snapshot = 0usize;
    while running {
        let k = d.steps();
        if d.due(k) {
            if let Some(lambda) = d.refresh(&w)? {
                (l, sigma, theta1, eta) = params(lambda, d.cfg.learning_rate);
                d.set_eta(eta);
            }
        }
        let x = &z * theta1 + &y * theta2 + &w * (T::one() - theta1 - theta2);
        let batch = d.gradient_batch();
        let g = svrg_gradient(model, &batch, &x, &y, &g_snap)?;
        d.charge(batch.len());
        let v = d.direction(g)?;
        let es = eta * sigma;
        let z_next = (&x * es + &z - v * (eta / l)) / (T::one() + es);
        let w_next = &x + (&z_next - &z) * theta1;

        let draw: f64 = d.rng.random();
        if draw < pi || k + 1 - last_snapshot >= stale_limit {
            y.copy_from(&w);
            g_snap = model.get_full_grad(&y)?;
            d.charge(n);
            last_snapshot = k + 1;
        }
        w = w_next;
        z = z_next;
        running = d.end_step(&w);
    }
    Ok(d.finish(w))
}
