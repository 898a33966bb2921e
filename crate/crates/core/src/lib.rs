//! Simulator for beam-compression resonant beam (BCRB) links: a spatially
//! separated laser resonator whose transmitter carries a telescope-like
//! internal modulator (TIM) that compresses the returning beam before the
//! limiting aperture.
//!
//! The crate covers the cavity ray-matrix chain and its stability test,
//! fundamental-mode spot radii, the distance-dependent power budget, the
//! data-branch noise and spectral efficiency, boundary searches, and the
//! figure datasets built on top of them.
//!
//! ```
//! use bcrb::ray_matrix::{is_stable, round_trip_bcrb, CavityGeometry};
//!
//! let g = CavityGeometry::default();
//! let m = round_trip_bcrb(&g).unwrap();
//! assert!(is_stable(&m));
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod comms;
pub mod error;
pub mod figures;
pub mod format;
pub mod gaussian_beam;
pub mod link_budget;
pub mod ray_matrix;
pub mod scenario;
pub mod search;

pub use error::{Error, Result};
pub use figures::{generate_figure, run_sweep, FigureDataset, FigureId, FigureOptions, SweepSpec, SweepVariable};
pub use ray_matrix::{CavityGeometry, System, TransferMatrix};
pub use scenario::{load_scenario, Scenario};
