//! Simulation and verification of processes driven by hidden sequences of
//! random probability measures.
//!
//! A sequence `ξ = (ξ₀, ξ₁, …)` of random measures on `S` is a product
//! disintegration of `X = (X₀, X₁, …)` when, given `ξ`, the `Xᵢ` are
//! independent with `Xᵢ ~ ξᵢ`. This crate samples such pairs in two stages,
//! computes exact finite-dimensional laws for the discrete models, checks that
//! `(1/n) Σ (f(Xᵢ) - ξᵢ(f))` vanishes, and checks conditional Hoeffding-type
//! tail bounds.

pub mod concentration;
pub mod measure;
pub mod models;
pub mod observable;
pub mod oracle;
pub mod replicate;
pub mod rng;
pub mod slln;
pub mod stats;

pub use measure::{FiniteMeasure, Measure, PointMass, PushforwardMeasure};
pub use models::{LatentPath, Model, ModelId, ModelSpec, ObservedPath, ProductDisintegration};
pub use observable::Observable;
pub use rng::{Stream, StreamKey};
