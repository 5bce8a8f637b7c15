//! Experiment harness: data ingestion, preprocessing, random features,
//! reference minima, JSON experiment configs and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiment;
pub mod features;
pub mod preprocess;
pub mod reference;
pub mod svmlight;
pub mod synthetic;

pub use config::{DataSource, ExperimentConfig, NuRule, RunSpec, Split, Task};
pub use error::{BenchError, Result};
pub use experiment::{prepare, run_experiment, solve_reference, write_spectrum, ExperimentReport, RunSummary};
pub use features::{random_features, RandomFeatures};
pub use preprocess::{preprocess, Preprocessing};
pub use reference::{reference_minimum, ReferenceSolution};
pub use svmlight::{parse_svmlight, read_svmlight, save_svmlight, write_svmlight};
pub use synthetic::{synthetic_logistic, synthetic_ridge, Synthetic};
