//! Dual-stream CNN for telling computer-generated images from photographs.
//!
//! The residual stream sees fixed SRM high-pass residuals, the joint stream sees
//! raw RGB, and a linear head fuses both. Every layer has a hand-written
//! backward pass; see [`gradcheck`] for the verification harness.

pub mod checkpoint;
pub mod cli;
pub mod data;
pub mod error;
pub mod gradcheck;
pub mod model;
pub mod ops;
pub mod optim;
pub mod params;
pub mod run;
pub mod softpool;
pub mod srm;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use tensor::{Dims, Real, Tensor4};
