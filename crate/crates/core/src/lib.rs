//! Counting orbit points, net points and random-walk trajectories in
//! hyperbolic settings, together with the combinatorics of witness graphs.
//!
//! The crate is `no_std` with `alloc`; the `std` feature only adds
//! thread-parallel execution of sampling loops. Results are identical with
//! and without it for a fixed seed and worker count.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod fuchsian;
pub mod hyperbolic;
pub mod margulis;
pub mod model;
pub mod nets;
pub mod par;
pub mod quasi;
pub mod stats;
pub mod walk;
pub mod witness;

pub(crate) mod math;

pub use error::{Error, Result};
