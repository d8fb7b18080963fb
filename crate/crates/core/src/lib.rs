// Copyright 2026 The gainloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Mean-field spectra, covariance dynamics and Gaussian correlations of a
//! two-mode bosonic system with loss on one mode and gain plus loss on the other.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod fock_oracle;
pub mod gaussian;
pub mod model;
pub mod ode;

pub use dynamics::{DriftDiffusion, Method, PhaseInsensitiveDynamics, PropagationResult};
pub use error::{Error, Result};
pub use gaussian::{CorrelationReport, CovarianceAA, CovarianceXP, DiscordDirection, PhaseInsensitiveState};
pub use model::{ModelParams, Param, Regime, RegimeClass, Spectrum, Stability, StabilityClass, Thresholds};
