// Copyright 2026 The gainloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Two-mode Gaussian covariance matrices and their information content.
//!
//! Covariances are normalised so that the vacuum is the identity. Entropies
//! are in nats. The ladder representation [`CovarianceAA`] stores
//! `σ_ij = ⟨{A_i, A_j†}⟩ - 2⟨A_i⟩⟨A_j†⟩` for `A = (a_L, a_G, a_L†, a_G†)`;
//! the quadrature representation [`CovarianceXP`] is real and mode-major,
//! `(x_L, p_L, x_G, p_G)`, with block form `[[L, C], [Cᵀ, G]]`.
//!
//! Local entropies use the single-mode symplectic eigenvalue `sqrt(det M)`,
//! so `S_M = f(sqrt(det M))`, and the Gaussian discord adds `f(sqrt(E_min))`
//! where `E_min` is the optimised conditional determinant.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Multiply by this to convert nats to bits.
pub const NATS_TO_BITS: f64 = std::f64::consts::LOG2_E;

/// Symplectic eigenvalues in `[1 - SNAP_TOL, 1)` are silently set to 1.
pub const SNAP_TOL: f64 = 1e-9;

/// Symplectic eigenvalues below `1 - PHYSICAL_TOL` are rejected.
pub const PHYSICAL_TOL: f64 = 1e-6;

/// Negative discord values down to `-DISCORD_CLAMP_TOL` are clamped to 0.
pub const DISCORD_CLAMP_TOL: f64 = 1e-10;

const STRUCTURE_TOL: f64 = 1e-10;

static CLAMP_EVENTS: AtomicU64 = AtomicU64::new(0);

/// Number of symplectic eigenvalues clamped from `[1 - 1e-6, 1 - 1e-9)` up to 1
/// since process start.
pub fn clamp_events() -> u64 {
    CLAMP_EVENTS.load(Ordering::Relaxed)
}

fn clamp_unit(x: f64, what: &str) -> Result<f64> {
    if x >= 1.0 {
        Ok(x)
    } else if x >= 1.0 - SNAP_TOL {
        Ok(1.0)
    } else if x >= 1.0 - PHYSICAL_TOL {
        CLAMP_EVENTS.fetch_add(1, Ordering::Relaxed);
        Ok(1.0)
    } else if x.is_nan() {
        Err(Error::NonPhysical(format!("{what} is NaN")))
    } else {
        Err(Error::NonPhysical(format!("{what} = {x} violates the uncertainty bound")))
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn max_abs_c(m: &Matrix4<Complex64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Swaps annihilation and creation blocks of the ladder vector.
fn ladder_swap() -> Matrix4<Complex64> {
    let mut x = Matrix4::zeros();
    x[(0, 2)] = c(1., 0.);
    x[(1, 3)] = c(1., 0.);
    x[(2, 0)] = c(1., 0.);
    x[(3, 1)] = c(1., 0.);
    x
}

/// `(a_L, a_G, a_L†, a_G†)` → `(a_L, a_L†, a_G, a_G†)`.
fn mode_major() -> Matrix4<Complex64> {
    let mut p = Matrix4::zeros();
    p[(0, 0)] = c(1., 0.);
    p[(1, 2)] = c(1., 0.);
    p[(2, 1)] = c(1., 0.);
    p[(3, 3)] = c(1., 0.);
    p
}

/// `√2` times the per-mode map `x = (a + a†)/√2`, `p = -i(a - a†)/√2`; the
/// factor 1/2 is applied once after the congruence so the vacuum maps exactly.
fn quadrature_map() -> Matrix4<Complex64> {
    let s = 1.0;
    let mut t = Matrix4::zeros();
    for k in 0..2 {
        let o = 2 * k;
        t[(o, o)] = c(s, 0.);
        t[(o, o + 1)] = c(s, 0.);
        t[(o + 1, o)] = c(0., -s);
        t[(o + 1, o + 1)] = c(0., s);
    }
    t
}

/// Ladder-basis covariance matrix (vacuum = identity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceAA(Matrix4<Complex64>);

impl CovarianceAA {
    /// Checks Hermiticity and the reality structure `σ* = XσX`.
    pub fn new(m: Matrix4<Complex64>) -> Result<Self> {
        let scale = max_abs_c(&m).max(1.0);
        let herm = max_abs_c(&(m - m.adjoint()));
        if herm > STRUCTURE_TOL * scale {
            return Err(Error::NonPhysical(format!("ladder covariance not Hermitian (residual {herm:e})")));
        }
        let x = ladder_swap();
        let real = max_abs_c(&(m.conjugate() - x * m * x));
        if real > STRUCTURE_TOL * scale {
            return Err(Error::NonPhysical(format!(
                "ladder covariance violates the reality structure (residual {real:e})"
            )));
        }
        Ok(CovarianceAA(m))
    }

    pub fn from_matrix_unchecked(m: Matrix4<Complex64>) -> Self {
        CovarianceAA(m)
    }

    pub fn vacuum() -> Self {
        CovarianceAA(Matrix4::identity())
    }

    /// Product of thermal states with mean occupations `n_l`, `n_g`.
    pub fn thermal(n_l: f64, n_g: f64) -> Self {
        let (l, g) = (2.0 * n_l + 1.0, 2.0 * n_g + 1.0);
        CovarianceAA(Matrix4::from_diagonal(&nalgebra::Vector4::new(
            c(l, 0.),
            c(g, 0.),
            c(l, 0.),
            c(g, 0.),
        )))
    }

    /// Two-mode squeezed vacuum with squeezing parameter `r`.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let mut m = Matrix4::identity() * c(ch, 0.);
        m[(0, 3)] = c(sh, 0.);
        m[(1, 2)] = c(sh, 0.);
        m[(2, 1)] = c(sh, 0.);
        m[(3, 0)] = c(sh, 0.);
        CovarianceAA(m)
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix4<Complex64> {
        self.0
    }

    pub fn max_abs(&self) -> f64 {
        max_abs_c(&self.0)
    }

    /// Normal block `N_kl = ⟨{a_k, a_l†}⟩` (minus mean products).
    pub fn normal_block(&self) -> Matrix2<Complex64> {
        self.0.fixed_view::<2, 2>(0, 0).into_owned()
    }

    /// Anomalous block `M_kl = ⟨{a_k, a_l}⟩` (minus mean products).
    pub fn anomalous_block(&self) -> Matrix2<Complex64> {
        self.0.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// Congruence `σ_xp = T P σ Pᵀ T†` to the real quadrature representation.
    pub fn to_quadrature(&self) -> Result<CovarianceXP> {
        let p = mode_major();
        let t = quadrature_map();
        let v = t * p * self.0 * p.transpose() * t.adjoint() * c(0.5, 0.);
        let scale = max_abs_c(&v);
        let imag = v.iter().fold(0.0f64, |acc, z| acc.max(z.im.abs()));
        if imag > STRUCTURE_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NonPhysical(format!(
                "quadrature covariance has imaginary residue {imag:e} (scale {scale:e})"
            )));
        }
        let re = v.map(|z| z.re);
        Ok(CovarianceXP((re + re.transpose()) * 0.5))
    }
}

/// Returns the 4×4 identity (vacuum or any coherent product state).
pub fn vacuum_covariance() -> CovarianceAA {
    CovarianceAA::vacuum()
}

/// Real quadrature covariance in mode-major ordering `(x_L, p_L, x_G, p_G)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceXP(Matrix4<f64>);

impl CovarianceXP {
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        let scale = m.amax().max(1.0);
        let asym = (m - m.transpose()).amax();
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::NonPhysical("quadrature covariance has non-finite entries".into()));
        }
        if asym > STRUCTURE_TOL * scale {
            return Err(Error::NonPhysical(format!("quadrature covariance not symmetric (residual {asym:e})")));
        }
        Ok(CovarianceXP((m + m.transpose()) * 0.5))
    }

    pub fn identity() -> Self {
        CovarianceXP(Matrix4::identity())
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn block_l(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn block_g(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(2, 2).into_owned()
    }

    pub fn block_c(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// Exchange the roles of modes L and G.
    pub fn swap_modes(&self) -> Self {
        let mut m = Matrix4::zeros();
        let perm = [2usize, 3, 0, 1];
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = self.0[(perm[i], perm[j])];
            }
        }
        CovarianceXP(m)
    }

    pub fn invariants(&self) -> SymplecticInvariants {
        // Averaging over both mode orderings makes the invariants, and hence every
        // derived quantity, exactly covariant under swap_modes.
        let det_sigma = 0.5 * (self.0.determinant() + self.swap_modes().0.determinant());
        SymplecticInvariants {
            det_l: self.block_l().determinant(),
            det_g: self.block_g().determinant(),
            det_c: self.block_c().determinant(),
            det_sigma,
        }
    }

    /// `(ν-, ν+)` from the Hermitian matrix `σ^½ iΩ σ^½`, whose eigenvalues are
    /// `±ν±`. Unlike the invariant formula this keeps full accuracy near pure
    /// states, where `Δ² - 4 det σ` cancels. Both mode orderings are averaged so
    /// the result is exactly invariant under [`CovarianceXP::swap_modes`].
    pub fn symplectic_eigenvalues(&self) -> Result<(f64, f64)> {
        let (a_minus, a_plus) = Self::symplectic_spectrum(&self.0)?;
        let (b_minus, b_plus) = Self::symplectic_spectrum(&self.swap_modes().0)?;
        Ok((
            clamp_unit(0.5 * (a_minus + b_minus), "ν-")?,
            clamp_unit(0.5 * (a_plus + b_plus), "ν+")?,
        ))
    }

    fn symplectic_spectrum(m: &Matrix4<f64>) -> Result<(f64, f64)> {
        let eig = m.symmetric_eigen();
        let lambda_min = eig.eigenvalues.min();
        if !(lambda_min > 0.0) {
            return Err(Error::NonPhysical(format!(
                "quadrature covariance not positive definite (eigenvalue {lambda_min:e})"
            )));
        }
        let root = eig.eigenvectors
            * Matrix4::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
            * eig.eigenvectors.transpose();
        let mut omega = Matrix4::<f64>::zeros();
        for k in [0, 2] {
            omega[(k, k + 1)] = 1.0;
            omega[(k + 1, k)] = -1.0;
        }
        let r = root.map(|x| c(x, 0.));
        let k = r * omega.map(|x| c(0., x)) * r;
        let k = (k + k.adjoint()) * c(0.5, 0.);
        let mut ev: Vec<f64> = k.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        Ok((0.5 * (ev[1] - ev[2]), 0.5 * (ev[0] - ev[3])))
    }

    /// Inverse of [`CovarianceAA::to_quadrature`].
    pub fn to_ladder(&self) -> CovarianceAA {
        let p = mode_major();
        let t = quadrature_map();
        let v = self.0.map(|x| c(x, 0.));
        CovarianceAA(p.transpose() * t.adjoint() * v * t * p * c(0.5, 0.))
    }
}

/// Local symplectic invariants of a two-mode covariance: `det L`, `det G`,
/// `det C` and `det σ`. All Gaussian information quantities here depend only on these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticInvariants {
    pub det_l: f64,
    pub det_g: f64,
    pub det_c: f64,
    pub det_sigma: f64,
}

impl SymplecticInvariants {
    pub fn swapped(&self) -> Self {
        SymplecticInvariants {
            det_l: self.det_g,
            det_g: self.det_l,
            ..*self
        }
    }

    /// `2ν±² = Δ ± sqrt(Δ² - 4 det σ)` with `Δ = det L + det G + 2 det C`.
    pub fn symplectic_eigenvalues(&self) -> Result<(f64, f64)> {
        let d = self.det_sigma;
        if !(d > 0.0) {
            return Err(Error::NonPhysical(format!("det σ = {d} is not positive")));
        }
        let delta = self.det_l + self.det_g + 2.0 * self.det_c;
        let disc = (delta * delta - 4.0 * d).max(0.0);
        let nu_plus_sq = 0.5 * (delta + disc.sqrt());
        if !(nu_plus_sq > 0.0) {
            return Err(Error::NonPhysical(format!("Δ = {delta} is not positive")));
        }
        // ν-² = det σ / ν+² avoids the cancellation in Δ - sqrt(...).
        let nu_minus_sq = d / nu_plus_sq;
        let nu_plus = clamp_unit(nu_plus_sq.sqrt(), "ν+")?;
        let nu_minus = clamp_unit(nu_minus_sq.sqrt(), "ν-")?;
        Ok((nu_minus, nu_plus))
    }

    /// Conditional determinant minimised over Gaussian measurements on G.
    ///
    /// Both closed-form branches are evaluated when `δ` is within rounding of 0
    /// and the one giving the smaller entropy is kept.
    fn min_conditional_det(&self) -> f64 {
        let (a, b, cc, d) = (self.det_l, self.det_g, self.det_c, self.det_sigma);
        let heterodyne_like = || {
            let inner = (cc * cc + (b - 1.0) * (d - a)).max(0.0);
            (2.0 * cc * cc + (b - 1.0) * (d - a) + 2.0 * cc.abs() * inner.sqrt()) / ((b - 1.0) * (b - 1.0))
        };
        let homodyne_like = || {
            let inner = (cc.powi(4) + (d - a * b).powi(2) - 2.0 * cc * cc * (d + a * b)).max(0.0);
            (a * b - cc * cc + d - inner.sqrt()) / (2.0 * b)
        };
        // With G pure (det G = 1) the first branch is 0/0; the second reduces to det L.
        if b - 1.0 <= 1e-12 {
            return homodyne_like();
        }
        let p = (d - a * b).powi(2);
        let q = cc * cc * (b + 1.0) * (d + a);
        let delta = p - q;
        let band = 1e-12 * p.abs().max(q.abs());
        if delta < -band {
            heterodyne_like()
        } else if delta > band {
            homodyne_like()
        } else {
            let (e1, e2) = (heterodyne_like(), homodyne_like());
            match (e1.is_finite(), e2.is_finite()) {
                (true, true) => e1.min(e2),
                (true, false) => e1,
                _ => e2,
            }
        }
    }

    /// Gaussian discord with the measurement on the mode selected by `direction`.
    pub fn discord(&self, direction: DiscordDirection) -> Result<f64> {
        self.discord_with(direction, self.symplectic_eigenvalues()?)
    }

    fn discord_with(&self, direction: DiscordDirection, (nu_minus, nu_plus): (f64, f64)) -> Result<f64> {
        let inv = match direction {
            DiscordDirection::LG => *self,
            DiscordDirection::GL => self.swapped(),
        };
        let e_min = inv.min_conditional_det();
        let value = entropy_f(inv.det_g.sqrt())? - entropy_f(nu_minus)? - entropy_f(nu_plus)?
            + entropy_f(e_min.max(0.0).sqrt())?;
        clamp_discord(value)
    }

    pub fn correlation_report(&self) -> Result<CorrelationReport> {
        self.correlation_report_with(self.symplectic_eigenvalues()?)
    }

    fn correlation_report_with(&self, nu: (f64, f64)) -> Result<CorrelationReport> {
        let (nu_minus, nu_plus) = nu;
        let s_total = entropy_f(nu_minus)? + entropy_f(nu_plus)?;
        let s_l = entropy_f(self.det_l.max(0.0).sqrt())?;
        let s_g = entropy_f(self.det_g.max(0.0).sqrt())?;
        let discord_lg = self.discord_with(DiscordDirection::LG, nu)?;
        let discord_gl = self.discord_with(DiscordDirection::GL, nu)?;
        Ok(CorrelationReport::assemble(
            s_total, s_l, s_g, discord_lg, discord_gl, nu_minus, nu_plus,
        ))
    }
}

fn clamp_discord(value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -DISCORD_CLAMP_TOL {
        Ok(0.0)
    } else {
        Err(Error::NonPhysical(format!("negative discord {value:e}")))
    }
}

/// Symplectic eigenvalues `(ν-, ν+)` of a quadrature covariance.
pub fn symplectic_eigenvalues(sigma: &CovarianceXP) -> Result<(f64, f64)> {
    sigma.symplectic_eigenvalues()
}

/// `f(x) = (x+1)/2 ln((x+1)/2) - (x-1)/2 ln((x-1)/2)`, the entropy of a
/// single-mode thermal state with symplectic eigenvalue `x`.
pub fn entropy_f(x: f64) -> Result<f64> {
    if x.is_nan() || x < 1.0 - PHYSICAL_TOL {
        return Err(Error::Domain { x });
    }
    if x <= 1.0 {
        return Ok(0.0);
    }
    let y = 0.5 * (x - 1.0);
    // (y+1) ln(y+1) - y ln y, rearranged so neither the y→0 nor the y→∞ end cancels.
    Ok(if y < 1.0 {
        (y + 1.0) * y.ln_1p() - if y > 0.0 { y * y.ln() } else { 0.0 }
    } else {
        y.ln_1p() + y * (1.0 / y).ln_1p()
    })
}

/// Which mode is measured: `LG` measures G (discord `D_LG`), `GL` measures L.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiscordDirection {
    LG,
    GL,
}

pub fn gaussian_discord(sigma: &CovarianceXP, direction: DiscordDirection) -> Result<f64> {
    sigma.invariants().discord_with(direction, sigma.symplectic_eigenvalues()?)
}

pub fn correlation_report(sigma: &CovarianceXP) -> Result<CorrelationReport> {
    sigma.invariants().correlation_report_with(sigma.symplectic_eigenvalues()?)
}

/// Entropies and correlations of one two-mode Gaussian state, in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub s_total: f64,
    pub s_l: f64,
    pub s_g: f64,
    pub mutual_information: f64,
    pub discord_lg: f64,
    pub discord_gl: f64,
    pub nu_minus: f64,
    pub nu_plus: f64,
    /// Discord above 1 in either direction certifies entanglement.
    pub entangled_by_discord: bool,
}

impl CorrelationReport {
    fn assemble(
        s_total: f64,
        s_l: f64,
        s_g: f64,
        discord_lg: f64,
        discord_gl: f64,
        nu_minus: f64,
        nu_plus: f64,
    ) -> Self {
        CorrelationReport {
            s_total,
            s_l,
            s_g,
            mutual_information: s_l + s_g - s_total,
            discord_lg,
            discord_gl,
            nu_minus,
            nu_plus,
            entangled_by_discord: discord_lg.max(discord_gl) > 1.0,
        }
    }

    pub fn max_discord(&self) -> f64 {
        self.discord_lg.max(self.discord_gl)
    }
}

/// Covariance of a state with vanishing anomalous moments `⟨a_k a_l⟩`, kept as
/// the 2×2 normal block plus its determinant.
///
/// Every state reachable from the vacuum under the gain-loss dynamics has this
/// form. Carrying `det N` separately lets it be computed without the
/// catastrophic cancellation `N_LL N_GG - |N_LG|²` suffers once the entries
/// grow large, and the correlation formulas below are written so that no
/// other large-number cancellation occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseInsensitiveState {
    /// `⟨{a_L, a_L†}⟩ = 2 n_L + 1`.
    pub n_ll: f64,
    /// `⟨{a_G, a_G†}⟩ = 2 n_G + 1`.
    pub n_gg: f64,
    /// `⟨{a_L, a_G†}⟩`.
    pub n_lg: Complex64,
    /// `det N = n_ll n_gg - |n_lg|²`.
    pub det: f64,
}

impl PhaseInsensitiveState {
    pub fn vacuum() -> Self {
        PhaseInsensitiveState {
            n_ll: 1.0,
            n_gg: 1.0,
            n_lg: c(0., 0.),
            det: 1.0,
        }
    }

    /// Builds from a normal block, computing `det N` directly.
    pub fn from_normal_block(n: &Matrix2<Complex64>) -> Self {
        let (a, b, x) = (n[(0, 0)].re, n[(1, 1)].re, n[(0, 1)]);
        PhaseInsensitiveState {
            n_ll: a,
            n_gg: b,
            n_lg: x,
            det: a * b - x.norm_sqr(),
        }
    }

    /// `None` when the ladder covariance has anomalous entries above `tol · max|σ|`.
    pub fn from_covariance(sigma: &CovarianceAA, tol: f64) -> Option<Self> {
        let anomalous = sigma.anomalous_block().iter().fold(0.0f64, |a, z| a.max(z.norm()));
        (anomalous <= tol * sigma.max_abs().max(1.0)).then(|| Self::from_normal_block(&sigma.normal_block()))
    }

    pub fn to_covariance(&self) -> CovarianceAA {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = c(self.n_ll, 0.);
        m[(1, 1)] = c(self.n_gg, 0.);
        m[(0, 1)] = self.n_lg;
        m[(1, 0)] = self.n_lg.conj();
        m[(2, 2)] = c(self.n_ll, 0.);
        m[(3, 3)] = c(self.n_gg, 0.);
        m[(2, 3)] = self.n_lg.conj();
        m[(3, 2)] = self.n_lg;
        CovarianceAA(m)
    }

    pub fn max_abs(&self) -> f64 {
        self.n_ll.abs().max(self.n_gg.abs()).max(self.n_lg.norm())
    }

    /// In quadratures: `det L = n_ll²`, `det G = n_gg²`, `det C = |n_lg|²`, `det σ = det(N)²`.
    pub fn invariants(&self) -> SymplecticInvariants {
        SymplecticInvariants {
            det_l: self.n_ll * self.n_ll,
            det_g: self.n_gg * self.n_gg,
            det_c: self.n_lg.norm_sqr(),
            det_sigma: self.det * self.det,
        }
    }

    /// The symplectic eigenvalues are the eigenvalues of the normal block.
    pub fn symplectic_eigenvalues(&self) -> Result<(f64, f64)> {
        let (a, b) = (self.n_ll, self.n_gg);
        let nu_plus = 0.5 * (a + b) + (0.5 * (a - b)).hypot(self.n_lg.norm());
        if !(nu_plus > 0.0) || !(self.det > 0.0) {
            return Err(Error::NonPhysical(format!(
                "normal block not positive definite (ν+ = {nu_plus}, det = {})",
                self.det
            )));
        }
        let nu_minus = self.det / nu_plus;
        Ok((clamp_unit(nu_minus, "ν-")?, clamp_unit(nu_plus, "ν+")?))
    }

    /// `sqrt(E_min)` for the measurement on G, with `a` the unmeasured and `b`
    /// the measured local noise.
    ///
    /// For these states `δ ≤ 0` always, and the first closed-form branch
    /// factorises into `(det N + a)/(b + 1)` when `b det N ≥ a`, else
    /// `|det N - a|/(b - 1)`.
    fn sqrt_min_conditional_det(a: f64, b: f64, det: f64) -> f64 {
        if b * det >= a {
            (det + a) / (b + 1.0)
        } else if b > 1.0 {
            (det - a).abs() / (b - 1.0)
        } else {
            a
        }
    }

    pub fn correlation_report(&self) -> Result<CorrelationReport> {
        let (nu_minus, nu_plus) = self.symplectic_eigenvalues()?;
        let s_total = entropy_f(nu_minus)? + entropy_f(nu_plus)?;
        let s_l = entropy_f(self.n_ll)?;
        let s_g = entropy_f(self.n_gg)?;
        let discord = |a: f64, b: f64, s_b: f64| -> Result<f64> {
            let e = Self::sqrt_min_conditional_det(a, b, self.det);
            clamp_discord(s_b - s_total + entropy_f(e)?)
        };
        let discord_lg = discord(self.n_ll, self.n_gg, s_g)?;
        let discord_gl = discord(self.n_gg, self.n_ll, s_l)?;
        Ok(CorrelationReport::assemble(
            s_total, s_l, s_g, discord_lg, discord_gl, nu_minus, nu_plus,
        ))
    }
}

#[cfg(test)]
pub(crate) mod testing {
    //! Random physical covariances for property tests.
    use nalgebra::Matrix4;

    pub fn rotation(theta_l: f64, theta_g: f64) -> Matrix4<f64> {
        let mut s = Matrix4::zeros();
        for (k, th) in [theta_l, theta_g].into_iter().enumerate() {
            let o = 2 * k;
            s[(o, o)] = th.cos();
            s[(o, o + 1)] = th.sin();
            s[(o + 1, o)] = -th.sin();
            s[(o + 1, o + 1)] = th.cos();
        }
        s
    }

    pub fn squeezer(r_l: f64, r_g: f64) -> Matrix4<f64> {
        Matrix4::from_diagonal(&nalgebra::Vector4::new(
            (-r_l).exp(),
            r_l.exp(),
            (-r_g).exp(),
            r_g.exp(),
        ))
    }

    pub fn beam_splitter(theta: f64) -> Matrix4<f64> {
        let (c, s) = (theta.cos(), theta.sin());
        let mut m = Matrix4::zeros();
        for k in 0..2 {
            m[(k, k)] = c;
            m[(k, k + 2)] = s;
            m[(k + 2, k)] = -s;
            m[(k + 2, k + 2)] = c;
        }
        m
    }

    pub fn two_mode_squeezer(r: f64) -> Matrix4<f64> {
        let (ch, sh) = (r.cosh(), r.sinh());
        let mut m = Matrix4::identity() * ch;
        m[(0, 2)] = sh;
        m[(1, 3)] = -sh;
        m[(2, 0)] = sh;
        m[(3, 1)] = -sh;
        m
    }

    /// `S diag(ν1, ν1, ν2, ν2) Sᵀ` with `S` a product of symplectic factors.
    pub fn physical(nu: [f64; 2], angles: [f64; 5], squeeze: [f64; 3]) -> Matrix4<f64> {
        let s = rotation(angles[0], angles[1])
            * squeezer(squeeze[0], squeeze[1])
            * beam_splitter(angles[2])
            * two_mode_squeezer(squeeze[2])
            * rotation(angles[3], angles[4]);
        let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(nu[0], nu[0], nu[1], nu[1]));
        s * d * s.transpose()
    }

    /// Mixture of product pure states: local pure squeezed states plus classical noise.
    pub fn separable(angles: [f64; 2], squeeze: [f64; 2], noise: Matrix4<f64>) -> Matrix4<f64> {
        let s = rotation(angles[0], angles[1]) * squeezer(squeeze[0], squeeze[1]);
        s * s.transpose() + noise * noise.transpose()
    }
}
