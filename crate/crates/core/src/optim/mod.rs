//! Preconditioned stochastic optimizers and their unpreconditioned baselines.
//!
//! Every run starts from `w₀ = 0` unless an initial point is given, records a
//! [`RunRecord`] before the first step and after every epoch of `⌈n/b_g⌉`
//! steps, and is fully determined by the config's seed.

mod driver;
mod katyusha;
mod saga;
mod sgd;
mod svrg;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::glm::{GlmModel, Loss};
use crate::precond::{default_config, PreconditionerKind, UpdateSchedule};
use crate::scalar::Real;
use crate::sketchlin::PowerIterationOptions;

pub use saga::SagaTable;
pub use svrg::svrg_gradient;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    SketchySgd,
    SketchySvrg,
    SketchySaga,
    SketchyKatyusha,
    Svrg,
    Saga,
    LKatyusha,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::SketchySgd,
        Method::SketchySvrg,
        Method::SketchySaga,
        Method::SketchyKatyusha,
        Method::Svrg,
        Method::Saga,
        Method::LKatyusha,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::SketchySgd => "sketchysgd",
            Method::SketchySvrg => "sketchysvrg",
            Method::SketchySaga => "sketchysaga",
            Method::SketchyKatyusha => "sketchykatyusha",
            Method::Svrg => "svrg",
            Method::Saga => "saga",
            Method::LKatyusha => "lkatyusha",
        }
    }

    pub fn is_preconditioned(self) -> bool {
        matches!(
            self,
            Method::SketchySgd | Method::SketchySvrg | Method::SketchySaga | Method::SketchyKatyusha
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

/// Snapshot rule at the end of an SVRG outer loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SvrgOption {
    /// Last inner iterate.
    #[default]
    I,
    /// Uniformly random inner iterate.
    II,
}

/// Optimizer settings. `None` fields fall back to the documented defaults
/// when the run starts.
#[derive(Debug, Clone)]
pub struct OptimizerConfig<T: Real> {
    pub method: Method,
    /// Gradient batch size `b_g`.
    pub grad_batch: usize,
    /// Hessian batch size `b_H`; default `⌊√n⌋`.
    pub hess_batch: Option<usize>,
    pub precond: PreconditionerKind,
    /// Sketch rank; default 10 for the low-rank kinds.
    pub rank: Option<usize>,
    /// Preconditioner regularization; default `max(10⁻³, ν)`.
    pub rho: Option<T>,
    /// Default: every `⌈n/b_g⌉` steps for logistic loss, once for squared loss.
    pub schedule: Option<UpdateSchedule>,
    /// Multiplier `α`; default 1/2 for SGD and 2/3 for Katyusha.
    pub alpha: Option<T>,
    /// Fixed step size replacing the default rule.
    pub learning_rate: Option<T>,
    /// SVRG inner loop length `m`; default `⌈n/b_g⌉`.
    pub inner_steps: Option<usize>,
    /// Katyusha `θ₂`.
    pub theta2: T,
    /// Katyusha snapshot probability `π`; default `b_g/n`.
    pub snapshot_prob: Option<T>,
    /// Katyusha strong convexity `μ`; default `ν`.
    pub mu: Option<T>,
    pub svrg_option: SvrgOption,
    pub max_epochs: usize,
    pub seed: u64,
    pub power: PowerIterationOptions<T>,
    /// Minimum objective value, enabling the `subopt` column.
    pub f_star: Option<T>,
    /// Stop once `F(w) − F*` falls to this level.
    pub target_subopt: Option<T>,
    /// Starting point; default zero.
    pub initial_point: Option<DVector<T>>,
    /// Keep a copy of the iterate at every epoch boundary.
    pub keep_iterates: bool,
}

impl<T: Real> OptimizerConfig<T> {
    pub fn new(method: Method, grad_batch: usize) -> Self {
        Self {
            method,
            grad_batch,
            hess_batch: None,
            precond: PreconditionerKind::NySsn,
            rank: None,
            rho: None,
            schedule: None,
            alpha: None,
            learning_rate: None,
            inner_steps: None,
            theta2: T::lit(0.5),
            snapshot_prob: None,
            mu: None,
            svrg_option: SvrgOption::I,
            max_epochs: 40,
            seed: 0,
            power: PowerIterationOptions::default(),
            f_star: None,
            target_subopt: None,
            initial_point: None,
            keep_iterates: false,
        }
    }

    pub fn with_precond(mut self, kind: PreconditionerKind) -> Self {
        self.precond = kind;
        self
    }

    pub fn with_epochs(mut self, max_epochs: usize) -> Self {
        self.max_epochs = max_epochs;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_f_star(mut self, f_star: T) -> Self {
        self.f_star = Some(f_star);
        self
    }

    fn resolve(&self, model: &GlmModel<'_, T>) -> Result<Resolved<T>> {
        let n = model.n();
        let p = model.p();
        let nu = model.get_reg();
        let bg = self.grad_batch;
        if bg == 0 || bg > n {
            return Err(Error::Config(format!("gradient batch {bg} outside [1, {n}]")));
        }
        let bh = self.hess_batch.unwrap_or(((n as f64).sqrt().floor() as usize).max(1));
        if bh == 0 || bh > n {
            return Err(Error::Config(format!("hessian batch {bh} outside [1, {n}]")));
        }
        let epoch_len = n.div_ceil(bg);
        let (rank, rho_default) = default_config::<T>(self.precond);
        let rho = self.rho.unwrap_or(rho_default.max(nu));
        let schedule = self.schedule.unwrap_or(match model.loss() {
            Loss::Logistic => UpdateSchedule::Every(epoch_len),
            Loss::Squared => UpdateSchedule::Once,
        });
        let alpha = self.alpha.unwrap_or(match self.method {
            Method::SketchyKatyusha | Method::LKatyusha => T::lit(2.0 / 3.0),
            _ => T::lit(0.5),
        });
        if !(alpha > T::zero()) {
            return Err(Error::Config("alpha must be positive".into()));
        }
        if let Some(lr) = self.learning_rate {
            if !(lr > T::zero()) || !lr.is_finite() {
                return Err(Error::Config("learning rate must be positive".into()));
            }
        }
        let inner = self.inner_steps.unwrap_or(epoch_len);
        if inner == 0 {
            return Err(Error::Config("inner loop length must be at least 1".into()));
        }
        let pi = self
            .snapshot_prob
            .unwrap_or(T::from_usize_lossy(bg) / T::from_usize_lossy(n));
        if !(pi > T::zero() && pi <= T::one()) {
            return Err(Error::Config("snapshot probability must lie in (0, 1]".into()));
        }
        let mu = self.mu.unwrap_or(nu);
        if matches!(self.method, Method::SketchyKatyusha | Method::LKatyusha) && !(mu > T::zero()) {
            return Err(Error::Config("katyusha needs mu > 0 (set nu > 0 or mu)".into()));
        }
        if !(self.theta2 > T::zero() && self.theta2 < T::one()) {
            return Err(Error::Config("theta2 must lie in (0, 1)".into()));
        }
        if let Some(w0) = &self.initial_point {
            if w0.len() != p {
                return Err(Error::dims("initial point", p, w0.len()));
            }
        }
        Ok(Resolved {
            method: self.method,
            bg,
            bh,
            epoch_len,
            kind: self.precond,
            rank: self.rank.or(rank),
            rho,
            schedule,
            alpha,
            learning_rate: self.learning_rate,
            inner,
            theta2: self.theta2,
            pi,
            mu,
            svrg_option: self.svrg_option,
            max_epochs: self.max_epochs,
            seed: self.seed,
            power: self.power,
            f_star: self.f_star,
            target: self.target_subopt,
            w0: self.initial_point.clone().unwrap_or_else(|| DVector::zeros(p)),
            keep_iterates: self.keep_iterates,
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Resolved<T: Real> {
    pub method: Method,
    pub bg: usize,
    pub bh: usize,
    pub epoch_len: usize,
    pub kind: PreconditionerKind,
    pub rank: Option<usize>,
    pub rho: T,
    pub schedule: UpdateSchedule,
    pub alpha: T,
    pub learning_rate: Option<T>,
    pub inner: usize,
    pub theta2: T,
    pub pi: T,
    pub mu: T,
    pub svrg_option: SvrgOption,
    pub max_epochs: usize,
    pub seed: u64,
    pub power: PowerIterationOptions<T>,
    pub f_star: Option<T>,
    pub target: Option<T>,
    pub w0: DVector<T>,
    pub keep_iterates: bool,
}

/// Metrics at one epoch boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub epoch: usize,
    /// Sample gradients evaluated so far, divided by `n`.
    pub passes: f64,
    pub train_loss: f64,
    pub subopt: Option<f64>,
    /// Optimizer time, excluding metric evaluation.
    pub seconds: f64,
    pub lambda_p: Option<f64>,
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// Ran for `max_epochs`.
    Completed,
    /// Reached the target suboptimality.
    Converged,
    /// Loss became non-finite or grew by a factor of 10⁶.
    Diverged,
}

#[derive(Debug, Clone)]
pub struct RunResult<T: Real> {
    pub w: DVector<T>,
    pub records: Vec<RunRecord>,
    pub status: RunStatus,
    /// Iterates at epoch boundaries, when requested.
    pub iterates: Vec<DVector<T>>,
    /// Steps at which the preconditioner was rebuilt.
    pub precond_updates: Vec<usize>,
}

/// `η = max{1/(2(νn + λ)), 1/(3λ)}`.
pub fn learning_rate_saga_rule<T: Real>(lambda: T, nu: T, n: usize) -> T {
    let a = T::one() / (T::lit(2.0) * (nu * T::from_usize_lossy(n) + lambda));
    let b = T::one() / (T::lit(3.0) * lambda);
    a.max(b)
}

/// Runs `config.method`.
pub fn run<T: Real>(
    model: &GlmModel<'_, T>,
    config: &OptimizerConfig<T>,
    callback: &mut dyn FnMut(&RunRecord),
) -> Result<RunResult<T>> {
    let cfg = config.resolve(model)?;
    match cfg.method {
        Method::SketchySgd => sgd::run(model, cfg, callback),
        Method::SketchySvrg | Method::Svrg => svrg::run(model, cfg, callback),
        Method::SketchySaga | Method::Saga => saga::run(model, cfg, callback),
        Method::SketchyKatyusha | Method::LKatyusha => katyusha::run(model, cfg, callback),
    }
}

fn run_as<T: Real>(
    method: Method,
    model: &GlmModel<'_, T>,
    config: &OptimizerConfig<T>,
    callback: &mut dyn FnMut(&RunRecord),
) -> Result<RunResult<T>> {
    let mut cfg = config.clone();
    cfg.method = method;
    run(model, &cfg, callback)
}

pub fn run_sketchy_sgd<T: Real>(
    model: &GlmModel<'_, T>,
    config: &OptimizerConfig<T>,
    callback: &mut dyn FnMut(&RunRecord),
) -> Result<RunResult<T>> {
    run_as(Method::SketchySgd, model, config, callback)
}

pub fn run_sketchy_svrg<T: Real>(
    model: &GlmModel<'_, T>,
    config: &OptimizerConfig<T>,
    callback: &mut dyn FnMut(&RunRecord),
) -> Result<RunResult<T>> {
    run_as(Method::SketchySvrg, model, config, callback)
}

pub fn run_sketchy_saga<T: Real>(
    model: &GlmModel<'_, T>,
    config: &OptimizerConfig<T>,
    callback: &mut dyn FnMut(&RunRecord),
) -> Result<RunResult<T>> {
    run_as(Method::SketchySaga, model, config, callback)
}

pub fn run_sketchy_katyusha<T: Real>(
    model: &GlmModel<'_, T>,
    config: &OptimizerConfig<T>,
    callback: &mut dyn FnMut(&RunRecord),
) -> Result<RunResult<T>> {
    run_as(Method::SketchyKatyusha, model, config, callback)
}

/// Runs one of the unpreconditioned methods (`Svrg`, `Saga`, `LKatyusha`).
pub fn run_baseline<T: Real>(
    model: &GlmModel<'_, T>,
    config: &OptimizerConfig<T>,
    callback: &mut dyn FnMut(&RunRecord),
) -> Result<RunResult<T>> {
    if config.method.is_preconditioned() {
        return Err(Error::Config(format!("{} is not a baseline method", config.method)));
    }
    run(model, config, callback)
}

#[cfg(test)]
mod tests;
