#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diag;
pub mod error;
pub mod glm;
pub mod matrix;
pub mod optim;
pub mod precond;
pub mod scalar;
pub mod sketchlin;

pub use error::{Error, Result};
pub use glm::{Dataset, GlmModel, Loss};
pub use matrix::{CsrMatrix, DesignMatrix};
pub use optim::{Method, OptimizerConfig, RunRecord, RunResult, RunStatus};
pub use precond::{Preconditioner, PreconditionerKind, UpdateSchedule};
pub use scalar::Real;

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type DesignMatrix64 = DesignMatrix<f64>;
pub type DesignMatrix32 = DesignMatrix<f32>;
pub type GlmModel64<'a> = GlmModel<'a, f64>;
pub type GlmModel32<'a> = GlmModel<'a, f32>;
pub type Preconditioner64 = Preconditioner<f64>;
pub type Preconditioner32 = Preconditioner<f32>;
pub type OptimizerConfig64 = OptimizerConfig<f64>;
pub type OptimizerConfig32 = OptimizerConfig<f32>;
pub type RunResult64 = RunResult<f64>;
pub type RunResult32 = RunResult<f32>;
