// Copyright 2026 The gainloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Dormand–Prince 5(4) integrator for large complex linear systems.
//!
//! Steps are clipped to land on every requested output time, so no dense
//! output is needed. Vector updates go parallel above [`PAR_THRESHOLD`].

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// State length above which stage combinations are split across threads.
pub const PAR_THRESHOLD: usize = 1 << 14;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth- minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    /// Accepted local error per step, relative to the largest state entry.
    pub rtol: f64,
    /// Steps shorter than `h_min_rel · max(1, |t|)` abort with `StepSizeUnderflow`.
    pub h_min_rel: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 {
            rtol: 1e-10,
            h_min_rel: 1e-14,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Largest `|z|²`; squared moduli avoid a `hypot` per entry.
fn max_norm_sqr(y: &[Complex64]) -> f64 {
    let chunk = |c: &[Complex64]| c.iter().fold(0.0f64, |m, z| m.max(z.norm_sqr()));
    if y.len() >= PAR_THRESHOLD {
        y.par_chunks(4096).map(chunk).reduce(|| 0.0, f64::max)
    } else {
        chunk(y)
    }
}

fn max_abs(y: &[Complex64]) -> f64 {
    max_norm_sqr(y).sqrt()
}

/// `out = y + h Σ w_k k_k`, one fused pass per term.
fn combine(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    let run = |o: &mut [Complex64], offset: usize| {
        let len = o.len();
        o.copy_from_slice(&y[offset..offset + len]);
        for (w, k) in terms {
            let hw = h * w;
            for (a, b) in o.iter_mut().zip(&k[offset..offset + len]) {
                *a += b * hw;
            }
        }
    };
    if out.len() >= PAR_THRESHOLD {
        out.par_chunks_mut(4096).enumerate().for_each(|(c, o)| run(o, c * 4096));
    } else {
        run(out, 0);
    }
}

/// `max_i |h Σ e_k k_k[i]|`, reusing `scratch` for the weighted sum.
fn error_max(scratch: &mut [Complex64], h: f64, terms: &[(f64, &[Complex64])]) -> f64 {
    scratch.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    let n = scratch.len();
    let run = |o: &mut [Complex64], offset: usize| {
        let len = o.len();
        for (w, k) in terms {
            let hw = h * w;
            for (a, b) in o.iter_mut().zip(&k[offset..offset + len]) {
                *a += b * hw;
            }
        }
    };
    if n >= PAR_THRESHOLD {
        scratch.par_chunks_mut(4096).enumerate().for_each(|(c, o)| run(o, c * 4096));
    } else {
        run(scratch, 0);
    }
    max_abs(scratch)
}

impl Dopri5 {
    /// Integrates `y' = f(t, y)` from `(t0, y0)` and calls `observe(i, t_i, y(t_i))`
    /// at every grid time; grid times must be `≥ t0` and strictly increasing.
    ///
    /// An error returned by `observe` stops the integration and is propagated.
    pub fn integrate<F, O>(&self, mut f: F, t0: f64, y0: &[Complex64], grid: &[f64], mut observe: O) -> Result<Stats>
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
        O: FnMut(usize, f64, &[Complex64]) -> Result<()>,
    {
        let n = y0.len();
        let mut stats = Stats::default();
        let mut y = y0.to_vec();
        let mut y_new = vec![Complex64::new(0.0, 0.0); n];
        let mut tmp = y_new.clone();
        let mut k: [Vec<Complex64>; 7] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n]);
        let mut t = t0;
        let mut have_k1 = false;
        let mut h = 0.0f64;

        for (i, &t_out) in grid.iter().enumerate() {
            if !(t_out >= t) {
                return Err(Error::InvalidGrid(format!("grid time {t_out} precedes {t}")));
            }
            while t < t_out {
                if !have_k1 {
                    f(t, &y, &mut k[0]);
                    stats.rhs_evals += 1;
                    have_k1 = true;
                }
                if h == 0.0 {
                    h = self.initial_step(&y, &k[0], t_out - t);
                }
                let remaining = t_out - t;
                // Avoid leaving a sliver shorter than rounding can resolve.
                let last = h >= remaining * (1.0 - 1e-12);
                let h_try = if last { remaining } else { h };
                if h_try < self.h_min_rel * t.abs().max(1.0) {
                    return Err(Error::StepSizeUnderflow { t, h: h_try });
                }
                if stats.accepted + stats.rejected >= self.max_steps {
                    return Err(Error::StepSizeUnderflow { t, h: h_try });
                }

                let [k1, k2, k3, k4, k5, k6, k7] = &mut k;
                combine(&mut tmp, &y, h_try, &[(A21, &k1[..])]);
                f(t + C2 * h_try, &tmp, k2);
                combine(&mut tmp, &y, h_try, &[(A31, &k1[..]), (A32, &k2[..])]);
                f(t + C3 * h_try, &tmp, k3);
                combine(&mut tmp, &y, h_try, &[(A41, &k1[..]), (A42, &k2[..]), (A43, &k3[..])]);
                f(t + C4 * h_try, &tmp, k4);
                combine(&mut tmp, &y, h_try, &[(A51, &k1[..]), (A52, &k2[..]), (A53, &k3[..]), (A54, &k4[..])]);
                f(t + C5 * h_try, &tmp, k5);
                combine(&mut tmp, &y, h_try, &[(A61, &k1[..]), (A62, &k2[..]), (A63, &k3[..]), (A64, &k4[..]), (A65, &k5[..])]);
                f(t + h_try, &tmp, k6);
                combine(&mut y_new, &y, h_try, &[(B1, &k1[..]), (B3, &k3[..]), (B4, &k4[..]), (B5, &k5[..]), (B6, &k6[..])]);
                f(t + h_try, &y_new, k7);
                stats.rhs_evals += 6;

                let err = error_max(&mut tmp, h_try, &[(E1, &k1[..]), (E3, &k3[..]), (E4, &k4[..]), (E5, &k5[..]), (E6, &k6[..]), (E7, &k7[..])]);
                let scale = self.rtol * max_abs(&y).max(max_abs(&y_new)).max(f64::MIN_POSITIVE);
                let ratio = err / scale;

                if ratio.is_finite() && ratio <= 1.0 {
                    stats.accepted += 1;
                    t = if last { t_out } else { t + h_try };
                    std::mem::swap(&mut y, &mut y_new);
                    k.swap(0, 6); // first-same-as-last
                    let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
                    // A step clipped to the grid says little about the natural step.
                    h = if last { h.max(h_try * grow) } else { h_try * grow };
                } else {
                    stats.rejected += 1;
                    let shrink = if ratio.is_finite() { (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                    h = h_try * shrink;
                }
            }
            observe(i, t, &y)?;
        }
        Ok(stats)
    }

    fn initial_step(&self, y: &[Complex64], f0: &[Complex64], span: f64) -> f64 {
        let dy = max_abs(f0);
        let ym = max_abs(y).max(1e-300);
        let h = if dy > 0.0 { 0.01 * ym / dy } else { span };
        h.min(span).max(self.h_min_rel * 10.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponential_decay_and_rotation() {
        let lam = c(-0.3, 2.0);
        let grid: Vec<f64> = (0..=20).map(|i| 0.5 * i as f64).collect();
        let mut out = Vec::new();
        Dopri5::default()
            .integrate(|_, y, dy| dy[0] = lam * y[0], 0.0, &[c(1.0, 0.0)], &grid, |_, t, y| {
                out.push((t, y[0]));
                Ok(())
            })
            .unwrap();
        assert_eq!(out.len(), grid.len());
        for (t, y) in out {
            let exact = (lam * t).exp();
            assert!((y - exact).norm() < 1e-9, "t={t}: {y} vs {exact}");
        }
    }

    #[test]
    fn grid_times_are_hit_exactly_and_t0_is_observed() {
        let grid = [0.0, 0.1, 0.35, 1.0];
        let mut seen = Vec::new();
        Dopri5::default()
            .integrate(|_, _, dy| dy[0] = c(1.0, 0.0), 0.0, &[c(0.0, 0.0)], &grid, |_, t, y| {
                seen.push(t);
                assert!((y[0].re - t).abs() < 1e-14);
                Ok(())
            })
            .unwrap();
        assert_eq!(seen, grid);
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = cos t, y(0) = 0.
        let mut last = c(0.0, 0.0);
        Dopri5::default()
            .integrate(|t, _, dy| dy[0] = c(t.cos(), 0.0), 0.0, &[c(0.0, 0.0)], &[3.0], |_, _, y| {
                last = y[0];
                Ok(())
            })
            .unwrap();
        assert!((last.re - 3f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn decreasing_grid_is_rejected() {
        let r = Dopri5::default().integrate(|_, _, _| {}, 0.0, &[c(0.0, 0.0)], &[1.0, 0.5], |_, _, _| Ok(()));
        assert!(matches!(r, Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn stiff_blowup_reports_underflow() {
        // y' = y², y(0) = 1 explodes at t = 1.
        let r = Dopri5::default().integrate(|_, y, dy| dy[0] = y[0] * y[0], 0.0, &[c(1.0, 0.0)], &[2.0], |_, _, _| Ok(()));
        assert!(matches!(r, Err(Error::StepSizeUnderflow { .. })));
    }

    #[test]
    fn large_states_use_parallel_path_consistently() {
        let n = PAR_THRESHOLD + 7;
        let y0: Vec<Complex64> = (0..n).map(|i| c(1.0 + i as f64 * 1e-4, 0.0)).collect();
        let mut last = Vec::new();
        Dopri5::default()
            .integrate(|_, y, dy| dy.iter_mut().zip(y).for_each(|(d, v)| *d = *v * -1.0), 0.0, &y0, &[1.0], |_, _, y| {
                last = y.to_vec();
                Ok(())
            })
            .unwrap();
        let e = (-1.0f64).exp();
        for (a, b) in last.iter().zip(&y0) {
            assert!((a - b * e).norm() < 1e-9);
        }
    }
}
