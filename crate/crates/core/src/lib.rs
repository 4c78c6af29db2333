//! Simulation and inference for network-dependent data.
//!
//! Networks form from scalar characteristics and logistic link shocks. Node
//! statistics computed on them are dependent, with dependence decaying in a
//! random, model-implied proximity `g_ij`. The crate provides the formation
//! models, the statistics, the proximity calculus with mixingale bounds and
//! diagnostics, a proximity-driven blocking scheme, and a blocked variance
//! estimator for studentized inference. The [`harness`] module runs LLN and
//! CLT Monte Carlo experiments on top of these pieces.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); aliases for
//! the common `f64` instantiations live at the crate root.

pub mod blocking;
pub mod error;
pub mod harness;
pub mod inference;
pub mod matrix;
pub mod mixingale;
pub mod models;
pub mod netstats;
pub mod proximity;
pub mod rng;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ModelParamsF64 = models::ModelParams<f64>;
pub type ModelParamsF32 = models::ModelParams<f32>;
pub type StatVectorF64 = netstats::StatVector<f64>;
pub type ProximityMatrixF64 = proximity::ProximityMatrix<f64>;
pub type LambdaMapF64 = proximity::LambdaMap<f64>;
pub type PsiBoundTableF64 = mixingale::PsiBoundTable<f64>;
pub type BlockPartitionF64 = blocking::BlockPartition<f64>;
