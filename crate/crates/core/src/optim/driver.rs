use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{learning_rate_saga_rule, Resolved, RunRecord, RunResult, RunStatus};
use crate::error::Result;
use crate::glm::{sample_batch, GlmModel};
use crate::precond::Preconditioner;
use crate::scalar::Real;

const DIVERGENCE_FACTOR: f64 = 1e6;

/// Bookkeeping shared by every method: randomness, the preconditioner (absent
/// for baselines), pass counting, timing and per-epoch records.
pub(crate) struct Driver<'r, 'm, 'a, T: Real> {
    pub model: &'m GlmModel<'a, T>,
    pub cfg: Resolved<T>,
    pub rng: ChaCha8Rng,
    precond: Option<Preconditioner<T>>,
    evals: u128,
    steps: usize,
    epoch: usize,
    elapsed: Duration,
    started: Instant,
    loss0: f64,
    records: Vec<RunRecord>,
    iterates: Vec<DVector<T>>,
    updates: Vec<usize>,
    eta: Option<T>,
    status: Option<RunStatus>,
    callback: &'r mut dyn FnMut(&RunRecord),
}

impl<'r, 'm, 'a, T: Real> Driver<'r, 'm, 'a, T> {
    pub fn new(
        model: &'m GlmModel<'a, T>,
        cfg: Resolved<T>,
        callback: &'r mut dyn FnMut(&RunRecord),
    ) -> Result<Self> {
        let precond = if cfg.method.is_preconditioned() {
            let mut pc = Preconditioner::new(cfg.kind, cfg.rank, cfg.rho, model.get_reg())?;
            pc.set_power_options(cfg.power);
            Some(pc)
        } else {
            None
        };
        Ok(Self {
            model,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            precond,
            evals: 0,
            steps: 0,
            epoch: 0,
            elapsed: Duration::ZERO,
            started: Instant::now(),
            loss0: f64::NAN,
            records: Vec::new(),
            iterates: Vec::new(),
            updates: Vec::new(),
            eta: None,
            status: None,
            callback,
        })
    }

    /// Records epoch 0 and starts the clock. Returns false if the run should
    /// not take any step.
    pub fn start(&mut self, w: &DVector<T>) -> bool {
        self.record(w);
        self.started = Instant::now();
        self.status.is_none()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Counts `count` sample-gradient evaluations.
    pub fn charge(&mut self, count: usize) {
        self.evals += count as u128;
    }

    pub fn sample(&mut self, b: usize) -> Vec<usize> {
        sample_batch(&mut self.rng, self.model.n(), b)
    }

    pub fn gradient_batch(&mut self) -> Vec<usize> {
        self.sample(self.cfg.bg)
    }

    /// True if the preconditioner is due at step `k`.
    pub fn due(&self, k: usize) -> bool {
        self.cfg.schedule.contains(k)
    }

    /// Rebuilds the preconditioner at `w` and returns `λ_P`, or `None` for
    /// unpreconditioned methods.
    pub fn refresh(&mut self, w: &DVector<T>) -> Result<Option<T>> {
        let Some(pc) = self.precond.as_mut() else {
            return Ok(None);
        };
        let b1 = sample_batch(&mut self.rng, self.model.n(), self.cfg.bh);
        let b2 = sample_batch(&mut self.rng, self.model.n(), self.cfg.bh);
        pc.update(self.model, &b1, &b2, w, &mut self.rng)?;
        self.evals += 2 * self.cfg.bh as u128;
        self.updates.push(self.steps);
        Ok(pc.lambda_p())
    }

    /// `P⁻¹g`, or `g` itself for baselines.
    pub fn direction(&self, g: DVector<T>) -> Result<DVector<T>> {
        match &self.precond {
            Some(pc) => pc.direction(&g),
            None => Ok(g),
        }
    }

    /// Smoothness used by the step-size rules: `λ_P` for preconditioned
    /// methods, `L̂_avg` otherwise.
    pub fn smoothness(&self, lambda_p: Option<T>) -> T {
        lambda_p.unwrap_or_else(|| self.model.smoothness_avg())
    }

    /// Step size from the variance-reduced rule unless fixed by the config.
    pub fn saga_rate(&self, lambda_p: Option<T>) -> T {
        self.cfg.learning_rate.unwrap_or_else(|| {
            learning_rate_saga_rule(self.smoothness(lambda_p), self.model.get_reg(), self.model.n())
        })
    }

    pub fn set_eta(&mut self, eta: T) {
        self.eta = Some(eta);
    }

    /// Closes a step. Returns false when the run must stop.
    pub fn end_step(&mut self, w: &DVector<T>) -> bool {
        self.steps += 1;
        if self.steps.is_multiple_of(self.cfg.epoch_len) || !w.iter().all(|v| v.is_finite()) {
            self.epoch += 1;
            self.record(w);
        }
        self.status.is_none()
    }

    fn record(&mut self, w: &DVector<T>) {
        if self.epoch > 0 {
            self.elapsed += self.started.elapsed();
        }
        let loss = if w.iter().all(|v| v.is_finite()) {
            self.model.full_loss(w).map(|v| v.to_f64_lossy()).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        if self.epoch == 0 {
            self.loss0 = loss;
        }
        let subopt = self.cfg.f_star.map(|f| loss - f.to_f64_lossy());
        let rec = RunRecord {
            epoch: self.epoch,
            passes: self.evals as f64 / self.model.n() as f64,
            train_loss: loss,
            subopt,
            seconds: self.elapsed.as_secs_f64(),
            lambda_p: self
                .precond
                .as_ref()
                .and_then(|p| p.lambda_p())
                .map(|v| v.to_f64_lossy()),
            eta: self.eta.map(|v| v.to_f64_lossy()),
        };
        (self.callback)(&rec);
        self.records.push(rec);
        if self.cfg.keep_iterates {
            self.iterates.push(w.clone());
        }

        if !loss.is_finite() || loss > DIVERGENCE_FACTOR * self.loss0.abs().max(f64::MIN_POSITIVE) {
            log::warn!("{} diverged at epoch {} (loss {loss})", self.cfg.method, self.epoch);
            self.status = Some(RunStatus::Diverged);
        } else if matches!((subopt, self.cfg.target), (Some(s), Some(t)) if s <= t.to_f64_lossy()) {
            self.status = Some(RunStatus::Converged);
        } else if self.epoch >= self.cfg.max_epochs {
            self.status = Some(RunStatus::Completed);
        }
        self.started = Instant::now();
    }

    pub fn finish(self, w: DVector<T>) -> RunResult<T> {
        RunResult {
            w,
            records: self.records,
            status: self.status.unwrap_or(RunStatus::Completed),
            iterates: self.iterates,
            precond_updates: self.updates,
        }
    }
}
