//! Continuous-time marginal structural models for event-history data.
//!
//! The crate covers the whole estimation chain:
//!
//! * [`history`] and [`design`]: event histories and left-limit design rows,
//! * [`aalen`]: weighted additive hazard regression and Nelson–Aalen,
//! * [`weights`]: likelihood-ratio weight processes (estimated, censoring,
//!   baseline and exact),
//! * [`iptw`]: the discrete-time stabilized IPTW comparator,
//! * [`transform`]: plugin estimators of survival-type parameters,
//! * [`sim`]: data generators for validation.
//!
//! Everything is `no_std` with `alloc`; file formats and the command line
//! live in the companion `ctmsm` crate.

#![no_std]

extern crate alloc;

pub mod aalen;
pub mod design;
pub mod error;
pub mod expand;
pub mod history;
pub mod iptw;
pub mod linalg;
pub mod logistic;
pub mod quad;
pub mod sim;
pub mod step;
pub mod transform;
pub mod weights;

pub use aalen::{fit_additive, nelson_aalen, CumCoef};
pub use design::{design_row, DesignSpec};
pub use error::{Error, Result};
pub use expand::{expand_to_event_grid, ExpandedTable};
pub use history::{build_history, Baseline, EventHistory, EventKind, EventRecord};
pub use step::StepPath;
pub use weights::{WeightSet, WeightSource};
