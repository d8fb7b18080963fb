// Copyright 2026 The gainloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Covariance dynamics `σ̇ = Yσ + σY† + 4D`.
//!
//! `Y = blockdiag(-iℋ, iℋ*)` acts on `(a_L, a_G, a_L†, a_G†)`; since `ℋ` is
//! symmetric, `ℋ* = ℋ†`. The noise matrix is
//! `D = 1₂ ⊗ diag(γ_L, Γ̃_G + 2γ_G)/2`.
//!
//! Two exact propagators are provided. [`propagate`] handles any covariance
//! via a block-triangular exponential. [`PhaseInsensitiveDynamics`] evolves
//! states without anomalous moments (everything reachable from the vacuum)
//! through a six-dimensional linear system that also carries `det N`, which
//! keeps the symplectic spectrum accurate when entries grow exponentially.

use nalgebra::{Matrix3, Matrix4, SMatrix, Vector3, Vector6};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{CovarianceAA, PhaseInsensitiveState};
use crate::model::{ModelParams, Stability, StabilityClass};
use crate::ode::Dopri5;

/// Entries above this magnitude are reported as divergence.
pub const DIVERGENCE_CAP: f64 = 1e100;

type Matrix8c = SMatrix<Complex64, 8, 8>;
type Matrix6 = SMatrix<f64, 6, 6>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn max_abs(m: &Matrix4<Complex64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Drift and diffusion matrices of the Lyapunov equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftDiffusion {
    y: Matrix4<Complex64>,
    d: Matrix4<f64>,
    params: ModelParams,
}

pub fn build_drift_diffusion(params: &ModelParams) -> Result<DriftDiffusion> {
    let h = params.mean_field_hamiltonian();
    let minus_i = Complex64::new(0.0, -1.0);
    let mut y = Matrix4::zeros();
    y.fixed_view_mut::<2, 2>(0, 0).copy_from(&(h * minus_i));
    y.fixed_view_mut::<2, 2>(2, 2).copy_from(&(h.conjugate() * -minus_i));
    let dl = 0.5 * params.gamma_l();
    let dg = 0.5 * (params.effective_gain() + 2.0 * params.gamma_g());
    for v in [dl, dg] {
        if v < 0.0 {
            return Err(Error::NegativeDiffusion { value: v });
        }
    }
    let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(dl, dg, dl, dg));
    Ok(DriftDiffusion { y, d, params: *params })
}

impl DriftDiffusion {
    pub fn y(&self) -> &Matrix4<Complex64> {
        &self.y
    }

    pub fn d(&self) -> &Matrix4<f64> {
        &self.d
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Replaces the diffusion matrix. Exists for fault-injection checks.
    pub fn with_diffusion(mut self, d: Matrix4<f64>) -> Self {
        self.d = d;
        self
    }

    fn forcing(&self) -> Matrix4<Complex64> {
        self.d.map(|v| c(4.0 * v))
    }

    /// `{-iE+, -iE-, iE+*, iE-*}`.
    pub fn eigenvalues(&self) -> [Complex64; 4] {
        let s = self.params.eigenvalues();
        let mi = Complex64::new(0.0, -1.0);
        [mi * s.e_plus, mi * s.e_minus, -mi * s.e_plus.conj(), -mi * s.e_minus.conj()]
    }

    /// Right-hand side `Yσ + σY† + 4D`.
    pub fn rhs(&self, sigma: &Matrix4<Complex64>) -> Matrix4<Complex64> {
        self.y * sigma + sigma * self.y.adjoint() + self.forcing()
    }

    /// `‖Yσ + σY† + 4D‖_max / ‖4D‖_max` (absolute if D = 0).
    pub fn residual(&self, sigma: &CovarianceAA) -> f64 {
        let r = max_abs(&self.rhs(sigma.matrix()));
        let scale = 4.0 * self.d.amax();
        if scale > 0.0 {
            r / scale
        } else {
            r
        }
    }

    /// `(Φ, Q)` with `Φ = e^{Yt}` and `Q = ∫₀ᵗ e^{Ys} 4D e^{Y†s} ds`.
    ///
    /// One block-triangular exponential at a step short enough to be well
    /// conditioned, then exact doubling `Q ← ΦQΦ† + Q`, `Φ ← Φ²`.
    pub fn propagator(&self, t: f64) -> (Matrix4<Complex64>, Matrix4<Complex64>) {
        if t == 0.0 {
            return (Matrix4::identity(), Matrix4::zeros());
        }
        let norm = self.y.iter().map(|z| z.norm()).sum::<f64>().max(f64::MIN_POSITIVE);
        let mut doublings = 0u32;
        while norm * t / 2f64.powi(doublings as i32) > 0.5 && doublings < 200 {
            doublings += 1;
        }
        let tau = t / 2f64.powi(doublings as i32);
        let mut m = Matrix8c::zeros();
        m.fixed_view_mut::<4, 4>(0, 0).copy_from(&(-self.y * c(tau)));
        m.fixed_view_mut::<4, 4>(0, 4).copy_from(&(self.forcing() * c(tau)));
        m.fixed_view_mut::<4, 4>(4, 4).copy_from(&(self.y.adjoint() * c(tau)));
        let e = m.exp();
        let mut phi: Matrix4<Complex64> = e.fixed_view::<4, 4>(4, 4).adjoint();
        let mut q = phi * e.fixed_view::<4, 4>(0, 4);
        for _ in 0..doublings {
            q = phi * q * phi.adjoint() + q;
            q = (q + q.adjoint()) * c(0.5);
            phi = phi * phi;
        }
        (phi, q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ExactExponential,
    AdaptiveIntegrator,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::ExactExponential => "exact-exponential",
            Method::AdaptiveIntegrator => "adaptive-integrator",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationResult {
    pub sigma_t: CovarianceAA,
    pub t: f64,
    pub method: Method,
    /// Largest violation of Hermiticity or the reality structure before symmetrisation.
    pub asymmetry: f64,
}

fn ladder_swap(m: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    let p = [2usize, 3, 0, 1];
    Matrix4::from_fn(|i, j| m[(p[i], p[j])])
}

/// Projects onto Hermitian matrices with the reality structure, returning the
/// size of the correction.
fn symmetrize(m: Matrix4<Complex64>) -> (Matrix4<Complex64>, f64) {
    let h = (m + m.adjoint()) * c(0.5);
    let r = (h + ladder_swap(&h).conjugate()) * c(0.5);
    (r, max_abs(&(m - r)))
}

fn check_divergence(m: &Matrix4<Complex64>, t: f64) -> Result<()> {
    // f64::max drops NaN, so overflow that has turned into NaN needs its own check.
    let finite = m.iter().all(|z| z.re.is_finite() && z.im.is_finite());
    let big = if finite { max_abs(m) } else { f64::INFINITY };
    if big > DIVERGENCE_CAP {
        return Err(Error::Diverged { t, max_entry: big });
    }
    Ok(())
}

pub fn propagate(sigma0: &CovarianceAA, params: &ModelParams, t: f64) -> Result<PropagationResult> {
    propagate_with(&build_drift_diffusion(params)?, sigma0, t)
}

/// [`propagate`] with explicit drift and diffusion.
pub fn propagate_with(dd: &DriftDiffusion, sigma0: &CovarianceAA, t: f64) -> Result<PropagationResult> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidGrid(format!("propagation time {t} must be finite and ≥ 0")));
    }
    if t == 0.0 {
        return Ok(PropagationResult {
            sigma_t: *sigma0,
            t,
            method: Method::ExactExponential,
            asymmetry: 0.0,
        });
    }
    let (phi, q) = dd.propagator(t);
    let raw = phi * sigma0.matrix() * phi.adjoint() + q;
    check_divergence(&raw, t)?;
    let (sigma, asymmetry) = symmetrize(raw);
    Ok(PropagationResult {
        sigma_t: CovarianceAA::from_matrix_unchecked(sigma),
        t,
        method: Method::ExactExponential,
        asymmetry,
    })
}

/// Adaptive Dormand–Prince integration of the Lyapunov equation from `t = 0`,
/// sampled on `t_grid`.
pub fn propagate_adaptive(sigma0: &CovarianceAA, params: &ModelParams, t_grid: &[f64]) -> Result<Vec<PropagationResult>> {
    let dd = build_drift_diffusion(params)?;
    if let Some(&t0) = t_grid.first() {
        if !(t0 >= 0.0) {
            return Err(Error::InvalidGrid(format!("first grid time {t0} is negative")));
        }
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    let y0: Vec<Complex64> = sigma0.matrix().iter().copied().collect();
    let mut out = Vec::with_capacity(t_grid.len());
    Dopri5::default().integrate(
        |_, s, ds| {
            let m = Matrix4::from_column_slice(s);
            ds.copy_from_slice(dd.rhs(&m).as_slice());
        },
        0.0,
        &y0,
        t_grid,
        |_, t, s| {
            let raw = Matrix4::from_column_slice(s);
            check_divergence(&raw, t)?;
            let (sigma, asymmetry) = symmetrize(raw);
            out.push(PropagationResult {
                sigma_t: CovarianceAA::from_matrix_unchecked(sigma),
                t,
                method: Method::AdaptiveIntegrator,
                asymmetry,
            });
            Ok(())
        },
    )?;
    Ok(out)
}

fn require_stable(params: &ModelParams) -> Result<()> {
    let s = is_stable(params);
    match s.class {
        StabilityClass::Stable => Ok(()),
        StabilityClass::Marginal => Err(Error::MarginallyStable { margin: s.margin }),
        StabilityClass::Unstable => Err(Error::Unstable { margin: s.margin }),
    }
}

/// Unique solution of `Yσ + σY† + 4D = 0`, by direct solution of the
/// vectorised 16×16 system plus one step of iterative refinement.
pub fn stationary(params: &ModelParams) -> Result<CovarianceAA> {
    require_stable(params)?;
    let dd = build_drift_diffusion(params)?;
    let y = dd.y;
    // Unknown σ_kl sits at index 4k + l; row (k, l) encodes Σ_m Y_km σ_ml + σ_km conj(Y_lm).
    let mut a = SMatrix::<Complex64, 16, 16>::zeros();
    for k in 0..4 {
        for l in 0..4 {
            let row = 4 * k + l;
            for m in 0..4 {
                a[(row, 4 * m + l)] += y[(k, m)];
                a[(row, 4 * k + m)] += y[(l, m)].conj();
            }
        }
    }
    let lu = a.lu();
    let forcing = dd.forcing();
    let rhs = SMatrix::<Complex64, 16, 1>::from_fn(|r, _| -forcing[(r / 4, r % 4)]);
    let singular = || Error::NonPhysical("Lyapunov system is singular".into());
    let mut x = lu.solve(&rhs).ok_or_else(singular)?;
    let correction = lu.solve(&(rhs - a * x)).ok_or_else(singular)?;
    x += correction;
    let sigma = Matrix4::from_fn(|k, l| x[4 * k + l]);
    Ok(CovarianceAA::from_matrix_unchecked(symmetrize(sigma).0))
}

/// Hurwitz classification from the closed-form drift spectrum.
pub fn is_stable(params: &ModelParams) -> Stability {
    params.stability()
}

/// Exact propagation of phase-insensitive states.
///
/// The state vector is `(N_LL, N_GG, Re N_LG, Im N_LG, det N, 1)`, which obeys
/// a linear ODE: with `κ = Γ̃ - γ_L`, `q_L = 2γ_L`, `q_G = 2(Γ̃ + 2γ_G)`,
///
/// ```text
/// N_LL'  = -2γ_L N_LL - 2g Im N_LG + q_L
/// N_GG'  =  2Γ̃ N_GG + 2g Im N_LG + q_G
/// N_LG'  =  κ N_LG + i g (N_LL - N_GG)
/// det N' =  2κ det N + q_G N_LL + q_L N_GG
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseInsensitiveDynamics {
    generator: Matrix6,
    params: ModelParams,
}

impl PhaseInsensitiveDynamics {
    pub fn new(params: &ModelParams) -> Self {
        let (g, gl, gt) = (params.g(), params.gamma_l(), params.effective_gain());
        let (ql, qg) = (2.0 * gl, 2.0 * (gt + 2.0 * params.gamma_g()));
        let kappa = gt - gl;
        #[rustfmt::skip]
        let generator = Matrix6::from_row_slice(&[
            -2.0 * gl, 0.0,      0.0,   -2.0 * g, 0.0,         ql,
            0.0,       2.0 * gt, 0.0,   2.0 * g,  0.0,         qg,
            0.0,       0.0,      kappa, 0.0,      0.0,         0.0,
            g,         -g,       0.0,   kappa,    0.0,         0.0,
            qg,        ql,       0.0,   0.0,      2.0 * kappa, 0.0,
            0.0,       0.0,      0.0,   0.0,      0.0,         0.0,
        ]);
        PhaseInsensitiveDynamics { generator, params: *params }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn generator(&self) -> &Matrix6 {
        &self.generator
    }

    fn to_vector(s: &PhaseInsensitiveState) -> Vector6<f64> {
        Vector6::new(s.n_ll, s.n_gg, s.n_lg.re, s.n_lg.im, s.det, 1.0)
    }

    fn from_vector(v: &Vector6<f64>) -> PhaseInsensitiveState {
        PhaseInsensitiveState {
            n_ll: v[0],
            n_gg: v[1],
            n_lg: Complex64::new(v[2], v[3]),
            det: v[4],
        }
    }

    pub fn propagator(&self, t: f64) -> Matrix6 {
        (self.generator * t).exp()
    }

    pub fn propagate(&self, s0: &PhaseInsensitiveState, t: f64) -> Result<PhaseInsensitiveState> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidGrid(format!("propagation time {t} must be finite and ≥ 0")));
        }
        if t == 0.0 {
            return Ok(*s0);
        }
        self.apply(&self.propagator(t), s0, t)
    }

    /// Applies a precomputed [`PhaseInsensitiveDynamics::propagator`]; `t` is
    /// only used to label a divergence. Fixed-step sweeps reuse one propagator.
    pub fn apply(&self, propagator: &Matrix6, s: &PhaseInsensitiveState, t: f64) -> Result<PhaseInsensitiveState> {
        let v = propagator * Self::to_vector(s);
        let big = if v.iter().all(|x| x.is_finite()) {
            v.iter().take(5).fold(0.0f64, |m, x| m.max(x.abs()))
        } else {
            f64::INFINITY
        };
        if big > DIVERGENCE_CAP {
            return Err(Error::Diverged { t, max_entry: big });
        }
        Ok(Self::from_vector(&v))
    }

    /// Stationary state from the linear fixed point; `det N` is solved for
    /// directly rather than formed from the entries.
    pub fn stationary(&self) -> Result<PhaseInsensitiveState> {
        require_stable(&self.params)?;
        let m = &self.generator;
        // (N_LL, N_GG, Im N_LG) decouple from Re N_LG, which relaxes to 0.
        let idx = [0usize, 1, 3];
        let a = Matrix3::from_fn(|i, j| m[(idx[i], idx[j])]);
        let rhs = Vector3::from_fn(|i, _| -m[(idx[i], 5)]);
        let x = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NonPhysical("stationary moment system is singular".into()))?;
        let det = -(m[(4, 0)] * x[0] + m[(4, 1)] * x[1]) / m[(4, 4)];
        Ok(PhaseInsensitiveState {
            n_ll: x[0],
            n_gg: x[1],
            n_lg: Complex64::new(0.0, x[2]),
            det,
        })
    }
}
