use super::driver::Driver;
use super::{Resolved, RunRecord, RunResult};
use crate::error::Result;
use crate::glm::GlmModel;
use crate::scalar::Real;

pub(crate) fn run<T: Real>(
    model: &GlmModel<'_, T>,
    cfg: Resolved<T>,
    callback: &mut dyn FnMut(&RunRecord),
) -> Result<RunResult<T>> {
    let mut w = cfg.w0.clone();
    let mut d = Driver::new(model, cfg, callback)?;
    let mut eta = T::zero();
    let mut running = d.start(&w);
    while running {
        let k = d.steps();
        if d.due(k) {
            let lambda = d.refresh(&w)?;
            eta = d
                .cfg
                .learning_rate
                .unwrap_or_else(|| d.cfg.alpha / d.smoothness(lambda));
            d.set_eta(eta);
        }
        let batch = d.gradient_batch();
        let g = model.get_stoch_grad(&batch, &w)?;
        d.charge(batch.len());
        let v = d.direction(g)?;
        w.axpy(-eta, &v, T::one());
        running = d.end_step(&w);
    }
    Ok(d.finish(w))
}
