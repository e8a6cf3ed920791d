#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bifurcate;
pub mod error;
pub mod fit;
pub mod linop;
pub mod norms;
pub mod profile;
pub mod quadrature;
pub mod range_solver;
pub mod strip_kernel;
pub mod wave;

pub use error::{Error, Result};
