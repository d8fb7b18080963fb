// Copyright 2026 The gainloss Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("parameters are not on the PT line: |gamma_L - effective gain| = {mismatch}")]
    NotPtSymmetric { mismatch: f64 },

    #[error("effective gain {effective_gain} must be positive")]
    NonPositiveEffectiveGain { effective_gain: f64 },

    #[error("non-physical covariance: {0}")]
    NonPhysical(String),

    #[error("entropy argument {x} is below 1")]
    Domain { x: f64 },

    #[error("negative diffusion entry {value}")]
    NegativeDiffusion { value: f64 },

    #[error("covariance diverged at t = {t} (max entry {max_entry:e})")]
    Diverged { t: f64, max_entry: f64 },

    #[error("drift is unstable (max Re eig = {margin}); no stationary state")]
    Unstable { margin: f64 },

    #[error("drift is marginally stable (max Re eig = {margin}); no unique stationary state")]
    MarginallyStable { margin: f64 },

    #[error("adaptive step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("Fock cutoff exceeded at t = {t}: top-layer population {leakage:e}")]
    CutoffExceeded { t: f64, leakage: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
