use nalgebra::DVector;

use super::driver::Driver;
use super::{Resolved, RunRecord, RunResult};
use crate::error::{Error, Result};
use crate::glm::GlmModel;
use crate::scalar::Real;

/// Gradient table for GLMs: one scalar `φᵢ'(aᵢᵀw)` per sample plus the
/// running average `(1/n) Σ sᵢ aᵢ`. The `νw` term is kept out of the table.
#[derive(Debug, Clone, PartialEq)]
pub struct SagaTable<T: Real> {
    slots: DVector<T>,
    avg: DVector<T>,
}

impl<T: Real> SagaTable<T> {
    pub fn new(n: usize, p: usize) -> Self {
        Self {
            slots: DVector::zeros(n),
            avg: DVector::zeros(p),
        }
    }

    pub fn slots(&self) -> &DVector<T> {
        &self.slots
    }

    pub fn average(&self) -> &DVector<T> {
        &self.avg
    }

    /// Returns the estimate `x + aux/|B| + νw` and refreshes the slots of `batch`.
    pub fn step(&mut self, model: &GlmModel<'_, T>, batch: &[usize], w: &DVector<T>) -> Result<DVector<T>> {
        if batch.is_empty() {
            return Err(Error::InvalidInput("empty batch".into()));
        }
        if self.slots.len() != model.n() || self.avg.len() != model.p() {
            return Err(Error::dims("saga table", model.n(), self.slots.len()));
        }
        if w.len() != model.p() {
            return Err(Error::dims("parameter vector", model.p(), w.len()));
        }
        let a = model.data().design();
        let mut aux = DVector::zeros(model.p());
        for &i in batch {
            if i >= model.n() {
                return Err(Error::IndexOutOfRange { index: i, len: model.n() });
            }
            let c = model.grad_coefficient(i, w);
            a.add_row_to(i, c - self.slots[i], &mut aux);
            self.slots[i] = c;
        }
        let mut g = &self.avg + &aux / T::from_usize_lossy(batch.len());
        g.axpy(model.get_reg(), w, T::one());
        self.avg.axpy(T::one() / T::from_usize_lossy(model.n()), &aux, T::one());
        Ok(g)
    }

    /// `(1/n) Σ sᵢ aᵢ` recomputed from the slots.
    pub fn recompute_average(&self, model: &GlmModel<'_, T>) -> DVector<T> {
        let a = model.data().design();
        let mut out = DVector::zeros(model.p());
        for (i, &s) in self.slots.iter().enumerate() {
            a.add_row_to(i, s, &mut out);
        }
        out / T::from_usize_lossy(model.n())
    }
}

pub(crate) fn run<T: Real>(
    model: &GlmModel<'_, T>,
    cfg: Resolved<T>,
    callback: &mut dyn FnMut(&RunRecord),
) -> Result<RunResult<T>> {
    let mut w = cfg.w0.clone();
    let mut table = SagaTable::new(model.n(), model.p());
    let mut d = Driver::new(model, cfg, callback)?;
    let mut eta = d.cfg.learning_rate.unwrap_or_else(|| d.saga_rate(None));
    if !d.cfg.method.is_preconditioned() {
        d.set_eta(eta);
    }
    let mut running = d.start(&w);
    while running {
        if d.due(d.steps()) {
            let lambda = d.refresh(&w)?;
            if lambda.is_some() {
                eta = d.saga_rate(lambda);
                d.set_eta(eta);
            }
        }
        let batch = d.gradient_batch();
        let g = table.step(model, &batch, &w)?;
        d.charge(batch.len());
        let v = d.direction(g)?;
        w.axpy(-eta, &v, T::one());
        running = d.end_step(&w);
    }
    Ok(d.finish(w))
}
