//! Simulation and statistical verification toolkit for preferential
//! attachment with an edge-step function.
//!
//! The process grows a multigraph one edge per step. With probability
//! `f(t+1)` the step is a *vertex-step*: a brand-new vertex arrives and
//! attaches to an existing vertex chosen proportionally to degree.
//! Otherwise it is an *edge-step*: both endpoints of the new edge are drawn
//! independently, degree-proportionally, from the current graph (loops and
//! parallel edges allowed). The starting graph is a single vertex with one
//! loop.
//!
//! The crate provides:
//!
//! * [`edge_step`] — the edge-step function families, their partial sums
//!   `F`/`F⁻¹`, and regularity-condition classification;
//! * [`normalization`] — the normalizing factors `φ(t)`, `ξ(t) = φ(t)/t`
//!   and `φ_k(t)` that turn degrees into (super)martingales, computed in
//!   log-space over a horizon;
//! * [`generator`] — the graph process itself plus trajectory recording;
//! * [`urn`] — the equivalent two-color Pólya urn with immigration;
//! * [`bootstrap`] — threshold bootstrap percolation on generated snapshots;
//! * [`exact`] — exhaustive small-horizon laws in rational arithmetic,
//!   used as oracles by the verification suite;
//! * [`experiments`] — replica-parallel Monte-Carlo campaigns with
//!   statistical gates and reproducible raw output.

pub mod bootstrap;
pub mod edge_step;
pub mod exact;
pub mod experiments;
pub mod generator;
pub mod normalization;
pub mod rng;
pub mod snapshot;
pub mod stats;
pub mod urn;

mod error;

pub use error::{Error, Result};
