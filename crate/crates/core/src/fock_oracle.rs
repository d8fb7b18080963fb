// Copyright 2026 The gainloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force Lindblad integration in a truncated two-mode Fock space.
//!
//! Used only to validate the Gaussian pipeline. The master equation is
//!
//! ```text
//! ρ' = -i[H, ρ] + 2γ_L 𝒟[a_L]ρ + 2γ_G 𝒟[a_G]ρ + 2Γ_G 𝒟[a_G†]ρ,   H = g(a_L† a_G + a_G† a_L)
//! ```
//!
//! with every operator truncated at `n ≤ N` per mode, so the truncated
//! generator is itself of Lindblad form and preserves the trace exactly.
//! Population reaching the top layer is reported, never renormalised away.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::CovarianceAA;
use crate::model::ModelParams;
use crate::ode::{Dopri5, Stats};

/// Largest tolerated top-layer population.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

const TRACE_TOL: f64 = 1e-9;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    L,
    G,
}

/// One ladder operator: `a_mode` or, with `dagger`, `a_mode†`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ladder {
    pub mode: Mode,
    pub dagger: bool,
}

impl Ladder {
    pub const fn a(mode: Mode) -> Self {
        Ladder { mode, dagger: false }
    }

    pub const fn ad(mode: Mode) -> Self {
        Ladder { mode, dagger: true }
    }
}

/// Density operator on `span{|n_L, n_G⟩ : n_L, n_G ≤ N}`, stored row-major
/// with basis index `n_L (N+1) + n_G`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState {
    cutoff: usize,
    rho: Vec<Complex64>,
}

impl TruncatedState {
    /// Validates trace and Hermiticity (to 1e-9); positivity is not checked here.
    pub fn from_density(cutoff: usize, rho: Vec<Complex64>) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::InvalidParams("Fock cutoff must be at least 1".into()));
        }
        let dim = (cutoff + 1) * (cutoff + 1);
        if rho.len() != dim * dim {
            return Err(Error::InvalidParams(format!("density has {} entries, expected {}", rho.len(), dim * dim)));
        }
        let s = TruncatedState { cutoff, rho };
        let tr = s.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NonPhysical(format!("density trace {tr}")));
        }
        if s.hermiticity_error() > TRACE_TOL {
            return Err(Error::NonPhysical("density is not Hermitian".into()));
        }
        Ok(s)
    }

    /// Pure product state from truncated single-mode amplitudes.
    fn product_pure(cutoff: usize, psi_l: &[Complex64], psi_g: &[Complex64]) -> Self {
        let n = cutoff + 1;
        let psi: Vec<Complex64> = (0..n * n).map(|m| psi_l[m / n] * psi_g[m % n]).collect();
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let dim = n * n;
        let mut rho = vec![zero(); dim * dim];
        for (m, row) in rho.chunks_mut(dim).enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = psi[m] * psi[k].conj() / norm;
            }
        }
        TruncatedState { cutoff, rho }
    }

    pub fn vacuum(cutoff: usize) -> Self {
        Self::fock(cutoff, 0, 0)
    }

    pub fn fock(cutoff: usize, n_l: usize, n_g: usize) -> Self {
        let basis = |k: usize| -> Vec<Complex64> {
            (0..=cutoff).map(|j| if j == k { Complex64::new(1.0, 0.0) } else { zero() }).collect()
        };
        Self::product_pure(cutoff, &basis(n_l.min(cutoff)), &basis(n_g.min(cutoff)))
    }

    /// `|α⟩ ⊗ |β⟩`, truncated and renormalised.
    pub fn coherent(cutoff: usize, alpha: Complex64, beta: Complex64) -> Self {
        let amps = |z: Complex64| -> Vec<Complex64> {
            let mut v = Vec::with_capacity(cutoff + 1);
            let mut term = Complex64::new((-0.5 * z.norm_sqr()).exp(), 0.0);
            for k in 0..=cutoff {
                v.push(term);
                term = term * z / ((k + 1) as f64).sqrt();
            }
            v
        };
        Self::product_pure(cutoff, &amps(alpha), &amps(beta))
    }

    /// Product of thermal states with mean occupations `n_l`, `n_g`, truncated and renormalised.
    pub fn thermal(cutoff: usize, n_l: f64, n_g: f64) -> Self {
        let n = cutoff + 1;
        let dist = |mean: f64| -> Vec<f64> {
            let r = mean / (1.0 + mean);
            let p: Vec<f64> = (0..n).map(|k| r.powi(k as i32)).collect();
            let s: f64 = p.iter().sum();
            p.into_iter().map(|x| x / s).collect()
        };
        let (pl, pg) = (dist(n_l), dist(n_g));
        let dim = n * n;
        let mut rho = vec![zero(); dim * dim];
        for m in 0..dim {
            rho[m * dim + m] = Complex64::new(pl[m / n] * pg[m % n], 0.0);
        }
        TruncatedState { cutoff, rho }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        (self.cutoff + 1) * (self.cutoff + 1)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.rho
    }

    pub fn entry(&self, m: usize, n: usize) -> Complex64 {
        self.rho[m * self.dim() + n]
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|m| self.rho[m * dim + m]).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for m in 0..dim {
            for n in m..dim {
                worst = worst.max((self.rho[m * dim + n] - self.rho[n * dim + m].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue (dense Hermitian eigensolve; expensive for large cutoffs).
    pub fn min_eigenvalue(&self) -> f64 {
        let dim = self.dim();
        let m = DMatrix::from_fn(dim, dim, |i, j| 0.5 * (self.rho[i * dim + j] + self.rho[j * dim + i].conj()));
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Population with either mode in the top Fock level `N`.
    pub fn leakage(&self) -> f64 {
        let n = self.cutoff + 1;
        let dim = self.dim();
        (0..dim)
            .filter(|&m| m / n == self.cutoff || m % n == self.cutoff)
            .map(|m| self.rho[m * dim + m].re)
            .sum()
    }

    fn check_leakage(&self, t: f64) -> Result<()> {
        let leakage = self.leakage();
        if leakage > LEAKAGE_LIMIT {
            return Err(Error::CutoffExceeded { t, leakage });
        }
        Ok(())
    }

    /// Applies a word of ladder operators (rightmost first) to a basis ket.
    fn apply(&self, word: &[Ladder], ket: usize) -> Option<(f64, usize)> {
        let n = self.cutoff + 1;
        let (mut l, mut g) = (ket / n, ket % n);
        let mut coef = 1.0;
        for op in word.iter().rev() {
            let k = match op.mode {
                Mode::L => &mut l,
                Mode::G => &mut g,
            };
            if op.dagger {
                if *k == self.cutoff {
                    return None;
                }
                *k += 1;
                coef *= (*k as f64).sqrt();
            } else {
                if *k == 0 {
                    return None;
                }
                coef *= (*k as f64).sqrt();
                *k -= 1;
            }
        }
        Some((coef, l * n + g))
    }

    /// `Tr(A ρ)` for `A` a product of ladder operators.
    pub fn expect(&self, word: &[Ladder]) -> Complex64 {
        let dim = self.dim();
        (0..dim)
            .filter_map(|k| self.apply(word, k).map(|(c, m)| self.rho[k * dim + m] * c))
            .sum()
    }

    /// Mean field `(⟨a_L⟩, ⟨a_G⟩)`.
    pub fn mean(&self) -> [Complex64; 2] {
        [self.expect(&[Ladder::a(Mode::L)]), self.expect(&[Ladder::a(Mode::G)])]
    }

    /// Covariance in the ladder representation; `{a, a†}` is evaluated as
    /// `2a†a + 1`, the untruncated identity.
    pub fn covariance(&self) -> Result<CovarianceAA> {
        self.check_leakage(f64::NAN)?;
        let modes = [Mode::L, Mode::G];
        let mean = self.mean();
        let mut normal = Matrix2::zeros();
        let mut anomalous = Matrix2::zeros();
        for (k, &mk) in modes.iter().enumerate() {
            for (l, &ml) in modes.iter().enumerate() {
                // ⟨{a_k, a_l†}⟩ = 2⟨a_l† a_k⟩ + δ_kl.
                let delta = if k == l { 1.0 } else { 0.0 };
                normal[(k, l)] = self.expect(&[Ladder::ad(ml), Ladder::a(mk)]) * 2.0 + delta
                    - mean[k] * mean[l].conj() * 2.0;
                anomalous[(k, l)] = self.expect(&[Ladder::a(mk), Ladder::a(ml)]) * 2.0 - mean[k] * mean[l] * 2.0;
            }
        }
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&normal);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&anomalous);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&anomalous.conjugate());
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&normal.conjugate());
        CovarianceAA::new((m + m.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// Largest third-order joint cumulant among the ladder operators; zero for Gaussian states.
    pub fn third_order_cumulant(&self) -> f64 {
        let ops = [Ladder::a(Mode::L), Ladder::ad(Mode::L), Ladder::a(Mode::G), Ladder::ad(Mode::G)];
        let m1: Vec<Complex64> = ops.iter().map(|o| self.expect(&[*o])).collect();
        let m2 = |i: usize, j: usize| self.expect(&[ops[i], ops[j]]);
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let third = self.expect(&[ops[i], ops[j], ops[k]]);
                    let cum = third - m1[k] * m2(i, j) - m1[j] * m2(i, k) - m1[i] * m2(j, k)
                        + m1[i] * m1[j] * m1[k] * 2.0;
                    worst = worst.max(cum.norm());
                }
            }
        }
        worst
    }
}

/// Precomputed truncated Lindblad generator.
///
/// Every term of the generator maps row `m` of `ρ` to row `m` of `ℒρ` from at
/// most one source row, shifted by a fixed column offset and weighted by a
/// row factor times a per-column factor; the per-column factors are cached.
#[derive(Debug, Clone)]
pub struct Lindbladian {
    cutoff: usize,
    g: f64,
    gamma_l: f64,
    gamma_g: f64,
    big_gamma_g: f64,
    sqrt: Vec<f64>,
    /// `√k √(l+1)` for `ρ(·, (k-1, l+1))`, zero where the source is outside the space.
    hop_down: Vec<f64>,
    /// `√(k+1) √l` for `ρ(·, (k+1, l-1))`.
    hop_up: Vec<f64>,
    /// `√(k+1)` for the `a_L` jump.
    jump_l: Vec<f64>,
    /// `√(l+1)` for the `a_G` jump.
    jump_g: Vec<f64>,
    /// `√l` for the `a_G†` jump.
    jump_gain: Vec<f64>,
    /// `-(γ_L k + γ_G l + Γ_G (a a†)_l)`, half of the anticommutator term.
    decay: Vec<f64>,
}

impl Lindbladian {
    pub fn new(params: &ModelParams, cutoff: usize) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::InvalidParams("Fock cutoff must be at least 1".into()));
        }
        let n = cutoff + 1;
        let top = cutoff;
        let s: Vec<f64> = (0..=n).map(|k| (k as f64).sqrt()).collect();
        let (gl, gg, bg) = (params.gamma_l(), params.gamma_g(), params.big_gamma_g());
        let cols = |f: &dyn Fn(usize, usize) -> f64| -> Vec<f64> { (0..n * n).map(|x| f(x / n, x % n)).collect() };
        Ok(Lindbladian {
            cutoff,
            g: params.g(),
            gamma_l: gl,
            gamma_g: gg,
            big_gamma_g: bg,
            hop_down: cols(&|k, l| if k >= 1 && l < top { s[k] * s[l + 1] } else { 0.0 }),
            hop_up: cols(&|k, l| if k < top && l >= 1 { s[k + 1] * s[l] } else { 0.0 }),
            jump_l: cols(&|k, _| if k < top { s[k + 1] } else { 0.0 }),
            jump_g: cols(&|_, l| if l < top { s[l + 1] } else { 0.0 }),
            jump_gain: cols(&|_, l| s[l]),
            decay: cols(&|k, l| -(gl * k as f64 + gg * l as f64 + bg * Self::aad(l, top))),
            sqrt: s,
        })
    }

    /// Truncated `a a†` is `diag(k + 1)` except 0 on the top level.
    fn aad(k: usize, top: usize) -> f64 {
        if k == top {
            0.0
        } else {
            (k + 1) as f64
        }
    }

    /// Writes `ℒρ` into `out`; both are row-major `dim × dim`.
    pub fn apply(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.cutoff + 1;
        let dim = n * n;
        if dim * dim >= crate::ode::PAR_THRESHOLD {
            out.par_chunks_mut(dim).enumerate().for_each(|(m, row)| self.apply_row(rho, m, row));
        } else {
            out.chunks_mut(dim).enumerate().for_each(|(m, row)| self.apply_row(rho, m, row));
        }
    }

    fn apply_row(&self, rho: &[Complex64], m: usize, out: &mut [Complex64]) {
        let n = self.cutoff + 1;
        let top = self.cutoff;
        let dim = n * n;
        let s = &self.sqrt;
        let (i, j) = (m / n, m % n);
        let row = |r: usize| &rho[r * dim..(r + 1) * dim];
        let own = row(m);

        // Anticommutator part of all three dissipators.
        let row_decay = -(self.gamma_l * i as f64 + self.gamma_g * j as f64 + self.big_gamma_g * Self::aad(j, top));
        for ((o, r), d) in out.iter_mut().zip(own).zip(&self.decay) {
            *o = r * (row_decay + d);
        }

        if self.g != 0.0 {
            let mig = Complex64::new(0.0, -self.g);
            // H ρ: ρ((i-1, j+1), ·) and ρ((i+1, j-1), ·).
            if i >= 1 && j < top {
                let w = mig * (s[i] * s[j + 1]);
                out.iter_mut().zip(row(m - n + 1)).for_each(|(o, r)| *o += w * r);
            }
            if i < top && j >= 1 {
                let w = mig * (s[i + 1] * s[j]);
                out.iter_mut().zip(row(m + n - 1)).for_each(|(o, r)| *o += w * r);
            }
            // -ρ H: column shifts of -(n-1) and +(n-1) within the same row.
            let shift = n - 1;
            for x in shift..dim {
                out[x] -= mig * (own[x - shift] * self.hop_down[x]);
            }
            for x in 0..dim - shift {
                out[x] -= mig * (own[x + shift] * self.hop_up[x]);
            }
        }
        if self.gamma_l != 0.0 && i < top {
            let w = 2.0 * self.gamma_l * s[i + 1];
            let src = &row(m + n)[n..];
            for ((o, r), c) in out[..dim - n].iter_mut().zip(src).zip(&self.jump_l) {
                *o += r * (w * c);
            }
        }
        if self.gamma_g != 0.0 && j < top {
            let w = 2.0 * self.gamma_g * s[j + 1];
            let src = &row(m + 1)[1..];
            for ((o, r), c) in out[..dim - 1].iter_mut().zip(src).zip(&self.jump_g) {
                *o += r * (w * c);
            }
        }
        if self.big_gamma_g != 0.0 && j >= 1 {
            let w = 2.0 * self.big_gamma_g * s[j];
            let src = &row(m - 1)[..dim - 1];
            for ((o, r), c) in out[1..].iter_mut().zip(src).zip(&self.jump_gain[1..]) {
                *o += r * (w * c);
            }
        }
    }
}

pub fn lindblad_rhs(rho: &TruncatedState, params: &ModelParams) -> Result<Vec<Complex64>> {
    let op = Lindbladian::new(params, rho.cutoff)?;
    let mut out = vec![zero(); rho.rho.len()];
    op.apply(&rho.rho, &mut out);
    Ok(out)
}

/// States on the requested grid plus integration diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<TruncatedState>,
    /// Largest `|Tr ρ - 1|` seen at the grid points (reported, not corrected).
    pub max_trace_drift: f64,
    pub stats: Stats,
}

/// Integrates from `t = 0`; aborts with `CutoffExceeded` as soon as a grid
/// point has top-layer population above [`LEAKAGE_LIMIT`].
pub fn integrate(rho0: &TruncatedState, params: &ModelParams, t_grid: &[f64]) -> Result<Trajectory> {
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.first().is_some_and(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidGrid("grid must be non-negative and strictly increasing".into()));
    }
    rho0.check_leakage(0.0)?;
    let op = Lindbladian::new(params, rho0.cutoff)?;
    let mut states = Vec::with_capacity(t_grid.len());
    let mut max_trace_drift = 0.0f64;
    let stats = Dopri5::default().integrate(
        |_, y, dy| op.apply(y, dy),
        0.0,
        &rho0.rho,
        t_grid,
        |_, t, y| {
            let state = TruncatedState {
                cutoff: rho0.cutoff,
                rho: y.to_vec(),
            };
            state.check_leakage(t)?;
            max_trace_drift = max_trace_drift.max((state.trace() - 1.0).norm());
            states.push(state);
            Ok(())
        },
    )?;
    Ok(Trajectory {
        times: t_grid.to_vec(),
        states,
        max_trace_drift,
        stats,
    })
}

pub fn covariance_from_state(rho: &TruncatedState) -> Result<CovarianceAA> {
    rho.covariance()
}
