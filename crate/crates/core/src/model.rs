// Copyright 2026 The gainloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Model parameters, the mean-field Hamiltonian and its spectrum.
//!
//! Two bosonic modes `L` and `G` exchange excitations at rate `g`. Mode `L`
//! leaks at rate `gamma_l`; mode `G` leaks at rate `gamma_g` and is pumped at
//! rate `big_gamma_g`. First moments `(⟨a_L⟩, ⟨a_G⟩)` obey `i dΨ/dt = H Ψ` with
//!
//! ```text
//! H = [[-i gamma_l, g], [g, i (big_gamma_g - gamma_g)]]
//! ```
//!
//! and the same matrix generates the second-moment drift (see [`crate::dynamics`]).

use std::fmt;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance (in units of the rate scale) for declaring `E+ = E-`.
pub const COALESCENCE_TOL: f64 = 1e-9;

/// Relative margin (in units of the rate scale) separating stable, marginal and unstable drift.
pub const STABILITY_MARGIN: f64 = 1e-10;

/// Relative bisection tolerance of the numeric lasing threshold.
pub const THRESHOLD_REL_TOL: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The four physical rates of the two-mode system, all in one frequency unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    g: f64,
    gamma_l: f64,
    gamma_g: f64,
    big_gamma_g: f64,
}

/// Names of the scalar model parameters, used by sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    G,
    GammaL,
    GammaG,
    BigGammaG,
}

impl Param {
    pub const ALL: [Param; 4] = [Param::G, Param::GammaL, Param::GammaG, Param::BigGammaG];

    pub fn name(self) -> &'static str {
        match self {
            Param::G => "g",
            Param::GammaL => "gamma_l",
            Param::GammaG => "gamma_g",
            Param::BigGammaG => "big_gamma_g",
        }
    }

    /// Accepts both the snake_case name and the CLI flag spelling (`gamma-l`).
    pub fn parse(s: &str) -> Option<Param> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Param::ALL.into_iter().find(|p| p.name() == norm)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl ModelParams {
    pub fn new(g: f64, gamma_l: f64, gamma_g: f64, big_gamma_g: f64) -> Result<Self> {
        let p = ModelParams {
            g,
            gamma_l,
            gamma_g,
            big_gamma_g,
        };
        for param in Param::ALL {
            let v = p.get(param);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{} must be finite and non-negative, got {v}",
                    param.name()
                )));
            }
        }
        Ok(p)
    }

    /// Parameters on the PT line: `gamma_l` is set equal to the effective gain.
    pub fn on_pt_line(g: f64, gamma_g: f64, big_gamma_g: f64) -> Result<Self> {
        Self::new(g, big_gamma_g - gamma_g, gamma_g, big_gamma_g)
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn gamma_l(&self) -> f64 {
        self.gamma_l
    }

    pub fn gamma_g(&self) -> f64 {
        self.gamma_g
    }

    pub fn big_gamma_g(&self) -> f64 {
        self.big_gamma_g
    }

    pub fn get(&self, param: Param) -> f64 {
        match param {
            Param::G => self.g,
            Param::GammaL => self.gamma_l,
            Param::GammaG => self.gamma_g,
            Param::BigGammaG => self.big_gamma_g,
        }
    }

    /// Copy with one parameter replaced; validated like [`ModelParams::new`].
    pub fn with(&self, param: Param, value: f64) -> Result<Self> {
        let mut p = *self;
        match param {
            Param::G => p.g = value,
            Param::GammaL => p.gamma_l = value,
            Param::GammaG => p.gamma_g = value,
            Param::BigGammaG => p.big_gamma_g = value,
        }
        Self::new(p.g, p.gamma_l, p.gamma_g, p.big_gamma_g)
    }

    /// All four rates multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.g * factor,
            self.gamma_l * factor,
            self.gamma_g * factor,
            self.big_gamma_g * factor,
        )
    }

    /// Net gain of mode G, `big_gamma_g - gamma_g`. May be negative.
    pub fn effective_gain(&self) -> f64 {
        self.big_gamma_g - self.gamma_g
    }

    /// Frequency scale used for relative tolerances: `g`, or the largest rate when `g = 0`.
    pub fn rate_scale(&self) -> f64 {
        if self.g > 0.0 {
            return self.g;
        }
        let m = self.gamma_l.max(self.gamma_g).max(self.big_gamma_g);
        if m > 0.0 {
            m
        } else {
            1.0
        }
    }

    /// The 2×2 non-Hermitian mean-field Hamiltonian in basis order (L, G).
    pub fn mean_field_hamiltonian(&self) -> Matrix2<Complex64> {
        let g = Complex64::from(self.g);
        Matrix2::new(
            -I * self.gamma_l,
            g,
            g,
            I * self.effective_gain(),
        )
    }

    /// Closed-form eigenvalues `E± = -i(γ_L-Γ̃)/2 ± sqrt(g² - ((γ_L+Γ̃)/2)²)`.
    ///
    /// The labels follow the sign in front of the square root (principal
    /// branch), so `E+` and `E-` are continuous along sweeps away from the EP.
    pub fn eigenvalues(&self) -> Spectrum {
        let gt = self.effective_gain();
        let center = -I * (self.gamma_l - gt) / 2.0;
        let half_sum = (self.gamma_l + gt) / 2.0;
        // g² - h² factored to keep precision close to the EP.
        let disc = (self.g - half_sum) * (self.g + half_sum);
        let root = real_sqrt_principal(disc);
        Spectrum::new(center + root, center - root, COALESCENCE_TOL * self.rate_scale())
    }

    /// Eigenvalues on the PT line, `E± = ±sqrt(g² - Γ̃²)`.
    pub fn pt_eigenvalues(&self) -> Result<Spectrum> {
        let gt = self.effective_gain();
        let mismatch = (self.gamma_l - gt).abs();
        if mismatch > COALESCENCE_TOL * self.rate_scale() {
            return Err(Error::NotPtSymmetric { mismatch });
        }
        let root = real_sqrt_principal((self.g - gt) * (self.g + gt));
        Ok(Spectrum::new(root, -root, COALESCENCE_TOL * self.rate_scale()))
    }

    /// Largest real part of the second-moment drift spectrum.
    ///
    /// The drift eigenvalues are `-iE±` and their conjugates, so this is
    /// `max(Im E+, Im E-)`.
    pub fn growth_rate(&self) -> f64 {
        let s = self.eigenvalues();
        s.e_plus.im.max(s.e_minus.im)
    }

    /// Hurwitz classification of the drift with margin `STABILITY_MARGIN · scale`.
    pub fn stability(&self) -> Stability {
        let margin = self.growth_rate();
        let tol = STABILITY_MARGIN * self.rate_scale();
        let class = if margin < -tol {
            StabilityClass::Stable
        } else if margin <= tol {
            StabilityClass::Marginal
        } else {
            StabilityClass::Unstable
        };
        Stability { class, margin }
    }

    /// Critical loss rates of mode L for the current `g`, `gamma_g`, `big_gamma_g`.
    pub fn thresholds(&self) -> Result<Thresholds> {
        let gt = self.effective_gain();
        if gt <= 0.0 {
            return Err(Error::NonPositiveEffectiveGain { effective_gain: gt });
        }
        let g = self.g;
        Ok(Thresholds {
            gamma_l_pt: gt,
            gamma_l_ep: 2.0 * g + self.gamma_g - self.big_gamma_g,
            gamma_l_th_paper: 2.0 * g * g / gt,
            gamma_l_th_numeric: self.lasing_threshold_bisect()?,
        })
    }

    /// Upper end of the stable `gamma_l` interval, located by bisection on the
    /// sign of [`ModelParams::growth_rate`]. When no stable interval exists
    /// (`Γ̃ ≥ g`) this collapses onto the PT value.
    fn lasing_threshold_bisect(&self) -> Result<f64> {
        let lo0 = self.effective_gain();
        let unstable = |gl: f64| -> Result<bool> {
            Ok(self.with(Param::GammaL, gl)?.growth_rate() > 0.0)
        };
        let mut lo = lo0;
        let mut hi = 2.0 * lo0.max(self.rate_scale());
        let mut expand = 0;
        while !unstable(hi)? {
            lo = hi;
            hi *= 2.0;
            expand += 1;
            if expand > 200 {
                return Err(Error::InvalidParams(
                    "no loss-induced instability found".into(),
                ));
            }
        }
        while hi - lo > THRESHOLD_REL_TOL * hi {
            let mid = 0.5 * (lo + hi);
            if unstable(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Regime of the mean-field Hamiltonian.
    ///
    /// `tol` is relative to the rate scale: parameters with
    /// `|γ_L - Γ̃| ≤ tol·g` count as PT-symmetric, and points within `tol·g` of
    /// the EP condition are reported as the EP.
    pub fn classify_regime(&self, tol: f64) -> RegimeClass {
        let gt = self.effective_gain();
        let band = tol * self.rate_scale();
        let regime = if (self.gamma_l - gt).abs() <= band {
            if (gt - self.g).abs() <= band {
                Regime::PtExceptionalPoint
            } else if gt < self.g {
                Regime::PtUnbroken
            } else {
                Regime::PtBroken
            }
        } else {
            let s = self.gamma_l + gt;
            if (s - 2.0 * self.g).abs() <= band {
                Regime::NonPtAtEp
            } else if s < 2.0 * self.g {
                Regime::NonPtBelowEp
            } else {
                Regime::NonPtAboveEp
            }
        };
        RegimeClass {
            regime,
            stable: self.stability().class == StabilityClass::Stable,
        }
    }

    /// `exp(-iHt) psi0`, the mean-field evolution.
    ///
    /// Uses the closed form for 2×2 exponentials,
    /// `e^M = e^μ (cosh s · 1 + sinh(s)/s · (M - μ))`, which stays finite at the EP.
    pub fn mean_field_evolve(&self, psi0: Vector2<Complex64>, t: f64) -> Result<Vector2<Complex64>> {
        if t < 0.0 || !t.is_finite() {
            return Err(Error::InvalidGrid(format!("time must be finite and >= 0, got {t}")));
        }
        Ok(mean_field_propagator(self, t) * psi0)
    }
}

/// `exp(-iHt)` in closed form.
pub fn mean_field_propagator(params: &ModelParams, t: f64) -> Matrix2<Complex64> {
    let m = params.mean_field_hamiltonian() * (-I * t);
    let mu = (m[(0, 0)] + m[(1, 1)]) / 2.0;
    let k = m - Matrix2::identity() * mu;
    let s2 = k[(0, 0)] * k[(0, 0)] + k[(0, 1)] * k[(1, 0)];
    let s = s2.sqrt();
    let sinhc = if s.norm() < 1e-4 {
        Complex64::from(1.0) + s2 / 6.0 + s2 * s2 / 120.0
    } else {
        s.sinh() / s
    };
    (Matrix2::identity() * s.cosh() + k * sinhc) * mu.exp()
}

fn real_sqrt_principal(x: f64) -> Complex64 {
    if x >= 0.0 {
        Complex64::new(x.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-x).sqrt())
    }
}

/// The two complex eigenvalues of the mean-field Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub e_plus: Complex64,
    pub e_minus: Complex64,
    /// `|E+ - E-| <= tol_abs`.
    pub is_coalesced: bool,
    pub tol_abs: f64,
}

impl Spectrum {
    fn new(e_plus: Complex64, e_minus: Complex64, tol_abs: f64) -> Self {
        Spectrum {
            e_plus,
            e_minus,
            is_coalesced: (e_plus - e_minus).norm() <= tol_abs,
            tol_abs,
        }
    }
}

/// Critical values of `gamma_l`.
///
/// `gamma_l_th_paper` is the closed form `2g²/Γ̃`; `gamma_l_th_numeric` is the
/// actual Hurwitz boundary of the drift, which sits at `γ_L Γ̃ = g²`. The two
/// differ by a factor of 2; sweeps use the numeric value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub gamma_l_pt: f64,
    pub gamma_l_ep: f64,
    pub gamma_l_th_paper: f64,
    pub gamma_l_th_numeric: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    PtUnbroken,
    PtExceptionalPoint,
    PtBroken,
    NonPtBelowEp,
    NonPtAtEp,
    NonPtAboveEp,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::PtUnbroken => "pt-unbroken",
            Regime::PtExceptionalPoint => "pt-exceptional-point",
            Regime::PtBroken => "pt-broken",
            Regime::NonPtBelowEp => "non-pt-below-ep",
            Regime::NonPtAtEp => "non-pt-at-ep",
            Regime::NonPtAboveEp => "non-pt-above-ep",
        }
    }

    pub fn is_pt(self) -> bool {
        matches!(
            self,
            Regime::PtUnbroken | Regime::PtExceptionalPoint | Regime::PtBroken
        )
    }

    pub fn is_ep(self) -> bool {
        matches!(self, Regime::PtExceptionalPoint | Regime::NonPtAtEp)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A regime together with the strict-stability flag of the drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegimeClass {
    pub regime: Regime,
    pub stable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StabilityClass {
    Stable,
    Marginal,
    Unstable,
}

impl StabilityClass {
    pub fn label(self) -> &'static str {
        match self {
            StabilityClass::Stable => "stable",
            StabilityClass::Marginal => "marginal",
            StabilityClass::Unstable => "unstable",
        }
    }
}

/// Stability class plus the raw margin `max Re eig(Y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub class: StabilityClass,
    pub margin: f64,
}
