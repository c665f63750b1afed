//! Goodness-of-fit testing for counting-process (spike train) models.
//!
//! Event times are mapped through the integrated conditional intensity of a
//! candidate model; under the correct model the mapped train is a unit-rate
//! Poisson process. The [`gof`] module tests that property with Ogata's
//! battery and the Wiener process test, whose boundaries come from
//! [`boundary`]. [`simulate`] and [`harness`] produce the Monte Carlo
//! studies; [`fit`] estimates renewal models by maximum likelihood.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod error;
pub mod exec;
pub mod fit;
pub mod gof;
pub mod harness;
pub mod intensity;
pub mod rescale;
pub mod simulate;
pub mod special;
pub mod trains;

pub use error::{Error, Result};
pub use exec::Execution;
pub use intensity::{Hazard, IntensityModel, InverseGaussianHazard, LogLogisticHazard, StimulusTerm};

pub use trains::{SpikeTrain, TransformedTrain};
