//! Variational quantum regression with a trainable data encoder.
//!
//! A memory circuit prepares `|Ψ⟩ = M_θ|0⟩`, a variational encoder prepares
//! `|ψ(x)⟩ = E_ξ(x)|0⟩`, and a swap test reads out `f(x) = |⟨Ψ|ψ(x)⟩|`.
//! Both parameter sets are trained with Adam over central finite-difference
//! gradients. Local noise channels can be inserted after the encoder.

pub mod error;
pub mod circuits;
pub mod cli;
pub mod evaluator;
pub mod experiments;
pub mod model;
pub mod noise;
pub mod optimize;
pub mod report;
pub mod selftest;
pub mod sim;

pub use error::{Error, Result};
