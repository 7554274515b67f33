//! Energy-saving study of a RAN whose terrestrial BSs can hand their traffic
//! to a HAPS-mounted super macro base station and go to sleep.
//!
//! The pipeline is:
//! - [`traffic`]: synthetic weekly per-BS traffic matched to target statistics,
//! - [`energy`]: load-dependent BS energy,
//! - [`linkbudget`] and [`capacity`]: the HAPS downlink capacity for a UE population,
//! - [`offload`]: hourly least-traffic-first offloading (plus an exact oracle),
//! - [`montecarlo`]: the randomised parametric study,
//! - [`metrics`] and [`io`]: derived quantities and CSV/JSON output.
//!
//! Trials and UE evaluations run on rayon when the `parallel` feature is on
//! (the default); results are identical with it off.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod energy;
pub mod error;
pub mod io;
pub mod linkbudget;
pub mod metrics;
pub mod montecarlo;
pub mod offload;
pub mod par;
pub mod rng;
pub mod traffic;

pub use error::{Result, SimError};
pub use par::Execution;
