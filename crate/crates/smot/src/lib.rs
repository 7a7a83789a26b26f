//! Canonical couplings for marginals in convex-decreasing order.
//!
//! Two finite measures `μ ≤cd ν` on the real line can be coupled by a
//! supermartingale; among all such couplings this crate constructs the two
//! canonical ones — the Increasing and the Decreasing Supermartingale
//! Transport — via the shadow construction, decomposes the problem into
//! barrier-separated irreducible components, solves the associated transport
//! linear programs with full dual certificates, and verifies the geometric
//! (support-monotonicity) characterizations of the optimizers.
//!
//! Entry points by capability:
//!
//! * [`measure`] — exact/float atomic measures, put and potential functions,
//!   stochastic orders, 1-Wasserstein distance.
//! * [`shadow`] — the shadow `S^ν(μ)`, by quantile windows and additivity.
//! * [`coupling`] — `increasing_transport` / `decreasing_transport`, drift
//!   classification, marginal/supermartingale validation.
//! * [`structure`] — maximal barrier `x*`, irreducible components, the set Σ,
//!   extremal-decomposition checking.
//! * [`lp`] — self-contained dense simplex and the three transport LPs with
//!   dual certificates `(φ, ψ, h)`.
//! * [`geometry`] — Spence–Mirrlees reward catalog, support monotonicity and
//!   nondegeneracy checkers, local competitor search.
//! * [`render`] — SVG figures of a coupling's transport segments.
//! * [`io`] — JSON/CSV measure and coupling formats with deterministic output.
//!
//! The runnable examples under `examples/` walk through each capability; the
//! `smot` binary is a thin command-line wrapper over the same functions.

pub mod coupling;
pub mod expr;
pub mod geometry;
pub mod io;
pub mod lp;
pub mod measure;
pub mod render;
pub mod scalar;
pub mod shadow;
pub mod structure;

pub use measure::{DiscreteMeasure, Interval};
pub use scalar::{set_tolerance, tolerance, Value};
