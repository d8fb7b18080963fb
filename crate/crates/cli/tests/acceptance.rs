// Copyright 2026 The gainloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Every test prints exactly one `PASS`/`FAIL` line to the
//! real stderr (bypassing the test harness's capture) and then asserts.
//! Tolerances are fixed here and are not tuned to the results.

use std::io::Write;
use std::time::Instant;

use gainloss_cli::commands::{evolve_series, steady_point, Sample};
use gainloss_cli::presets::{resolve_end, PresetKind, PresetName, SeriesSpec};
use gainloss_core::dynamics::{self, build_drift_diffusion};
use gainloss_core::fock_oracle::{self, TruncatedState};
use gainloss_core::gaussian::{correlation_report, CovarianceXP};
use gainloss_core::{CorrelationReport, CovarianceAA, Error, ModelParams, Param, PhaseInsensitiveDynamics};
use nalgebra::{Complex, Matrix4, Schur};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C64 = Complex<f64>;

fn verdict(name: &str, passed: bool, detail: String) {
    let line = format!("{} {name}: {detail}\n", if passed { "PASS" } else { "FAIL" });
    // Direct handle writes are not captured by the test harness.
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(passed, "{name}: {detail}");
}

fn p(g: f64, gl: f64, gg: f64, bg: f64) -> ModelParams {
    ModelParams::new(g, gl, gg, bg).unwrap()
}

fn fig6_params(gamma_l_over_g: f64) -> ModelParams {
    p(2.0, 2.0 * gamma_l_over_g, 1.2, 2.32)
}

fn max_dev(a: &CovarianceAA, b: &CovarianceAA) -> f64 {
    (a.matrix() - b.matrix()).iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Correlations along `times` (units of 1/g) from the vacuum; panics on divergence.
fn series(params: &ModelParams, times: &[f64]) -> Vec<CorrelationReport> {
    evolve_series(params, times, 1.0 / params.g())
        .unwrap()
        .into_iter()
        .map(|s| match s {
            Sample::Finite { report, .. } => report,
            Sample::Diverged { t } => panic!("diverged at t = {t}"),
        })
        .collect()
}

fn at(params: &ModelParams, t: f64) -> CorrelationReport {
    series(params, &[t])[0]
}

fn fig2(label: &str) -> ModelParams {
    let preset = PresetName::Fig2.preset();
    let PresetKind::Evolve { series, .. } = preset.kind else { unreachable!() };
    series
        .iter()
        .find(|s: &&SeriesSpec| s.label == label)
        .unwrap()
        .params(preset.g)
        .unwrap()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn pearson(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (sxy / (sxx * syy).sqrt(), sxy / sxx)
}

fn rel_variation(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::MIN, f64::max);
    let min = v.iter().cloned().fold(f64::MAX, f64::min);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (max - min) / mean.abs()
}

fn local_maxima(v: &[f64]) -> usize {
    v.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count()
}

#[test]
fn oracle_equivalence() {
    let start = Instant::now();
    let params = fig6_params(0.8);
    let grid: Vec<f64> = (1..=12).map(|k| 0.125 * k as f64).collect();
    let vac = CovarianceAA::vacuum();
    let result = fock_oracle::integrate(&TruncatedState::vacuum(30), &params, &grid).and_then(|traj| {
        let mut worst = 0.0f64;
        for (t, rho) in grid.iter().zip(&traj.states) {
            let oracle = fock_oracle::covariance_from_state(rho)?;
            let exact = dynamics::propagate(&vac, &params, *t)?.sigma_t;
            worst = worst.max(max_dev(&oracle, &exact));
        }
        Ok(worst)
    });
    let secs = start.elapsed().as_secs_f64();
    match result {
        Ok(dev) => verdict(
            "oracle-equivalence",
            dev < 1e-6 && secs < 60.0,
            format!("N=30, t in [0, 3/g]: max entry deviation {dev:.3e} (tol 1e-6), {secs:.1} s (limit 60 s)"),
        ),
        Err(e) => verdict(
            "oracle-equivalence",
            false,
            format!("N=30, t in [0, 3/g]: {e} after {secs:.1} s"),
        ),
    }
}

#[test]
fn amplitude_independence() {
    let start = Instant::now();
    // Net-loss point: occupations stay low enough for N = 30 over the whole window.
    let params = p(2.0, 1.6, 1.2, 0.6);
    let grid: Vec<f64> = (1..=6).map(|k| 0.25 * k as f64).collect();
    let n = 30;
    let run = |rho0: &TruncatedState| -> Result<Vec<CovarianceAA>, Error> {
        let traj = fock_oracle::integrate(rho0, &params, &grid)?;
        traj.states.iter().map(fock_oracle::covariance_from_state).collect()
    };
    let coherent = TruncatedState::coherent(n, C64::new(1.0, 0.0), C64::new(0.5, 0.0));
    let result = run(&TruncatedState::vacuum(n))
        .and_then(|v| Ok((v, run(&coherent)?)))
        .map(|(v, c)| v.iter().zip(&c).map(|(a, b)| max_dev(a, b)).fold(0.0, f64::max));
    let secs = start.elapsed().as_secs_f64();
    match result {
        Ok(dev) => verdict(
            "amplitude-independence",
            dev < 1e-7 && secs < 60.0,
            format!("|1>|0.5> vs vacuum, N=30, t in [0, 3/g]: max deviation {dev:.3e} (tol 1e-7), {secs:.1} s"),
        ),
        Err(e) => verdict("amplitude-independence", false, e.to_string()),
    }
}

#[test]
fn pt_unbroken_asymptotics() {
    let mut ok = true;
    let mut detail = Vec::new();
    for label in ["pure-unbroken", "dissipative-unbroken"] {
        let params = fig2(label);
        let r = series(&params, &[20.0, 40.0]);
        let di = (r[1].mutual_information - r[0].mutual_information).abs();
        let d40 = r[1].discord_lg;
        ok &= di < 1e-3 && d40 < 1e-3;
        detail.push(format!("{label}: |I(40)-I(20)| = {di:.3e}, D_LG(40) = {d40:.3e}"));
    }
    verdict("pt-unbroken-asymptotics", ok, format!("{} (tol 1e-3 each)", detail.join("; ")));
}

#[test]
fn ep_logarithmic_divergence() {
    let params = fig2("pure-ep");
    let times = linspace(10.0, 100.0, 91);
    let r = series(&params, &times);
    let ln_t: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let info: Vec<f64> = r.iter().map(|x| x.mutual_information).collect();
    let (corr, slope) = pearson(&ln_t, &info);
    // "D → 0" on a finite window: D keeps falling on the tail with a clearly
    // negative log-log slope, as opposed to settling on a plateau.
    let d: Vec<f64> = r.iter().map(|x| x.discord_lg).collect();
    let tail_decreasing = d[45..].windows(2).all(|w| w[1] <= w[0]);
    let ln_d: Vec<f64> = d[40..].iter().map(|x| x.ln()).collect();
    let (_, decay) = pearson(&ln_t[40..], &ln_d);
    let d_end = *d.last().unwrap();
    verdict(
        "ep-logarithmic-divergence",
        corr > 0.99 && slope > 0.0 && tail_decreasing && decay <= -0.5,
        format!(
            "I vs ln t on [10,100]/g: r = {corr:.5} (> 0.99), slope {slope:.4}; D_LG decreasing on [55,100]/g: {tail_decreasing}, d ln D / d ln t on [50,100]/g = {decay:.3} (<= -0.5), D_LG(100) = {d_end:.3e}"
        ),
    );
}

#[test]
fn broken_phase_linear_divergence() {
    let params = fig2("pure-broken");
    let times = linspace(20.0, 40.0, 41);
    let r = series(&params, &times);
    let per_t: Vec<f64> = r.iter().zip(&times).map(|(x, t)| x.mutual_information / t).collect();
    let d: Vec<f64> = r.iter().map(|x| x.discord_lg).collect();
    let (vi, vd) = (rel_variation(&per_t), rel_variation(&d));
    let slope_positive = per_t.iter().all(|v| *v > 0.0);
    let d_end = *d.last().unwrap();
    verdict(
        "broken-phase-linear-divergence",
        vi < 0.05 && slope_positive && vd < 0.05 && d_end > 0.0,
        format!(
            "I/t on [20,40]/g: relative variation {vi:.3e} (< 5%), I(40)/40 = {:.4}; D_LG relative variation {vd:.3e} (< 5%), D_LG(40) = {d_end:.4}",
            per_t.last().unwrap()
        ),
    );
}

#[test]
fn dissipation_effect() {
    let mut ok = true;
    let mut detail = Vec::new();
    for phase in ["unbroken", "ep", "broken"] {
        let pure = at(&fig2(&format!("pure-{phase}")), 20.0);
        let diss = at(&fig2(&format!("dissipative-{phase}")), 20.0);
        let good = diss.mutual_information > pure.mutual_information && diss.discord_lg < pure.discord_lg;
        ok &= good;
        detail.push(format!(
            "{phase}: I {:.4} -> {:.4}, D_LG {:.4e} -> {:.4e}",
            pure.mutual_information, diss.mutual_information, pure.discord_lg, diss.discord_lg
        ));
    }
    verdict("dissipation-effect", ok, format!("pure -> dissipative at t = 20/g: {}", detail.join("; ")));
}

#[test]
fn stationary_correlations_near_threshold() {
    let preset = PresetName::Fig7.preset();
    let PresetKind::Steady { gamma_g, big_gamma_g, from, to, count } = preset.kind else { unreachable!() };
    let g = preset.g;
    let base = p(g, 0.0, gamma_g * g, big_gamma_g * g);
    let (lo, hi) = (resolve_end(from, &base).unwrap(), resolve_end(to, &base).unwrap());
    let reports: Vec<CorrelationReport> = linspace(lo, hi, count)
        .into_iter()
        .map(|gl| steady_point(&base.with(Param::GammaL, gl).unwrap()).unwrap().unwrap())
        .collect();
    let max_d = reports.iter().map(|r| r.max_discord()).fold(0.0, f64::max);
    let max_ratio = reports
        .iter()
        .map(|r| r.max_discord() / r.mutual_information)
        .fold(0.0, f64::max);

    // Kink test across the EP: second differences on a uniform grid centred on
    // gamma_l = 1.44 g, compared with their neighbours.
    let ep = base.thresholds().unwrap().gamma_l_ep;
    let h = 0.01 * g;
    let xs: Vec<f64> = (-10..=10).map(|k| ep + h * (k as f64 + 0.5)).collect();
    let local: Vec<CorrelationReport> = xs
        .iter()
        .map(|&gl| steady_point(&base.with(Param::GammaL, gl).unwrap()).unwrap().unwrap())
        .collect();
    let kink = |f: &dyn Fn(&CorrelationReport) -> f64| -> f64 {
        let v: Vec<f64> = local.iter().map(f).collect();
        let d2: Vec<f64> = v.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]).abs()).collect();
        // Cells 9 and 10 of d2 are centred on the two points straddling the EP.
        let at_ep = d2[9].max(d2[10]);
        let around = d2.iter().enumerate().filter(|(k, _)| !(8..=11).contains(k)).map(|(_, x)| *x).fold(0.0, f64::max);
        at_ep / around.max(1e-14)
    };
    let kinks = [
        kink(&|r| r.mutual_information),
        kink(&|r| r.discord_lg),
        kink(&|r| r.discord_gl),
    ];
    let smooth = kinks.iter().all(|k| *k < 3.0);
    let d_ok = (max_d - 0.5).abs() <= 0.15;
    let ratio_ok = (max_ratio - 0.10).abs() <= 0.03;
    verdict(
        "stationary-correlations-near-threshold",
        d_ok && ratio_ok && smooth,
        format!(
            "max D = {max_d:.4} (0.5 ± 0.15: {d_ok}); max D/I = {max_ratio:.4} (0.10 ± 0.03: {ratio_ok}); EP second-difference ratios I/D_LG/D_GL = {:.2}/{:.2}/{:.2} (< 3: {smooth})",
            kinks[0], kinks[1], kinks[2]
        ),
    );
}

#[test]
fn transient_oscillations_across_ep() {
    let times = linspace(0.0, 5.0, 2001);
    let count = |gl: f64| {
        let i: Vec<f64> = series(&fig6_params(gl), &times).iter().map(|r| r.mutual_information).collect();
        local_maxima(&i)
    };
    let (below, above) = (count(0.8), count(1.6));
    verdict(
        "transient-oscillations-across-ep",
        below >= 2 && above == 0,
        format!("local maxima of I on (0, 5/g): gamma_l = 0.8g -> {below} (need >= 2), gamma_l = 1.6g -> {above} (need 0)"),
    );
}

fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    p(
        rng.gen_range(0.0..3.0),
        rng.gen_range(0.0..3.0),
        rng.gen_range(0.0..3.0),
        rng.gen_range(0.0..3.0),
    )
}

#[test]
fn spectral_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let (mut worst_id, mut worst_eig) = (0.0f64, 0.0f64);
    let i = C64::new(0.0, 1.0);
    for _ in 0..10_000 {
        let params = random_params(&mut rng);
        let h = params.mean_field_hamiltonian();
        let s = params.eigenvalues();
        let tr = (s.e_plus + s.e_minus - h.trace()).norm();
        let det = (s.e_plus * s.e_minus - h.determinant()).norm();
        worst_id = worst_id.max(tr).max(det);

        let y = *build_drift_diffusion(&params).unwrap().y();
        let mut found: Vec<C64> = Schur::new(y).eigenvalues().unwrap().iter().copied().collect();
        let expected = [-i * s.e_plus, -i * s.e_minus, i * s.e_plus.conj(), i * s.e_minus.conj()];
        for e in expected {
            let (k, d) = found
                .iter()
                .enumerate()
                .map(|(k, z)| (k, (z - e).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            worst_eig = worst_eig.max(d);
            found.swap_remove(k);
        }
    }
    verdict(
        "spectral-invariants",
        worst_id < 1e-10 && worst_eig < 1e-10,
        format!("10^4 draws: trace/det identities max error {worst_id:.2e}, eig(Y) vs ±i-mapped E± max error {worst_eig:.2e} (tol 1e-10)"),
    );
}

// Symplectic building blocks in (x_L, p_L, x_G, p_G) ordering.
fn rotation(a: f64, b: f64) -> Matrix4<f64> {
    let mut s = Matrix4::zeros();
    for (k, th) in [a, b].into_iter().enumerate() {
        let o = 2 * k;
        s[(o, o)] = th.cos();
        s[(o, o + 1)] = th.sin();
        s[(o + 1, o)] = -th.sin();
        s[(o + 1, o + 1)] = th.cos();
    }
    s
}

fn squeezer(ra: f64, rb: f64) -> Matrix4<f64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new((-ra).exp(), ra.exp(), (-rb).exp(), rb.exp()))
}

fn beam_splitter(th: f64) -> Matrix4<f64> {
    let (c, s) = (th.cos(), th.sin());
    let mut m = Matrix4::zeros();
    for k in 0..2 {
        m[(k, k)] = c;
        m[(k + 2, k + 2)] = c;
        m[(k, k + 2)] = s;
        m[(k + 2, k)] = -s;
    }
    m
}

fn two_mode_squeezer(r: f64) -> Matrix4<f64> {
    let (c, s) = (r.cosh(), r.sinh());
    let z = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, 1.0, -1.0)) * s;
    let mut m = Matrix4::identity() * c;
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&z.fixed_view::<2, 2>(0, 0));
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&z.fixed_view::<2, 2>(0, 0));
    m
}

fn random_physical(rng: &mut ChaCha8Rng) -> Matrix4<f64> {
    let nu = [rng.gen_range(1.0..4.0), rng.gen_range(1.0..4.0)];
    let mut ang = || rng.gen_range(0.0..std::f64::consts::TAU);
    let (a1, a2, a3, a4, b) = (ang(), ang(), ang(), ang(), ang());
    let (r1, r2, r3) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.5));
    let s = rotation(a1, a2) * squeezer(r1, r2) * beam_splitter(b) * two_mode_squeezer(r3) * rotation(a3, a4);
    let thermal = Matrix4::from_diagonal(&nalgebra::Vector4::new(nu[0], nu[0], nu[1], nu[1]));
    s * thermal * s.transpose()
}

fn random_single_mode(rng: &mut ChaCha8Rng) -> nalgebra::Matrix2<f64> {
    let nu = rng.gen_range(1.0..4.0);
    let (th, r) = (rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(-1.5f64..1.5));
    let rot = nalgebra::Matrix2::new(th.cos(), th.sin(), -th.sin(), th.cos());
    let sq = nalgebra::Matrix2::new((-r).exp(), 0.0, 0.0, r.exp());
    let s = rot * sq;
    s * s.transpose() * nu
}

#[test]
fn gaussian_information_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut violations = 0usize;
    let mut min_nu = f64::INFINITY;
    let mut min_i = f64::INFINITY;
    let mut min_d = f64::INFINITY;
    for _ in 0..10_000 {
        let sigma = CovarianceXP::new(random_physical(&mut rng)).unwrap();
        match correlation_report(&sigma) {
            Ok(r) => {
                min_nu = min_nu.min(r.nu_minus);
                min_i = min_i.min(r.mutual_information);
                min_d = min_d.min(r.discord_lg.min(r.discord_gl));
                if r.nu_minus < 1.0 || r.mutual_information < 0.0 || r.discord_lg < 0.0 || r.discord_gl < 0.0 {
                    violations += 1;
                }
            }
            Err(_) => violations += 1,
        }
    }

    let mut product_worst = 0.0f64;
    for _ in 0..1_000 {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&random_single_mode(&mut rng));
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&random_single_mode(&mut rng));
        let r = correlation_report(&CovarianceXP::new(m).unwrap()).unwrap();
        product_worst = product_worst
            .max(r.mutual_information.abs())
            .max(r.discord_lg.abs())
            .max(r.discord_gl.abs());
    }

    let mut tmsv_ok = true;
    let mut tmsv_detail = Vec::new();
    for r in [1.0, 1.5, 2.0] {
        let s = two_mode_squeezer(r);
        let rep = correlation_report(&CovarianceXP::new(s * s.transpose()).unwrap()).unwrap();
        let nu_err = (rep.nu_minus - 1.0).abs().max((rep.nu_plus - 1.0).abs());
        tmsv_ok &= rep.discord_lg > 1.0 && rep.discord_gl > 1.0 && nu_err < 1e-10;
        tmsv_detail.push(format!("r={r}: D={:.3}, |ν±-1|={nu_err:.1e}", rep.discord_lg));
    }

    verdict(
        "gaussian-information-invariants",
        violations == 0 && product_worst < 1e-10 && tmsv_ok,
        format!(
            "10^4 random states: {violations} violations (min ν- {min_nu:.6}, min I {min_i:.2e}, min D {min_d:.2e}); product states max |I|,|D| {product_worst:.1e} (tol 1e-10); two-mode squeezed {}",
            tmsv_detail.join(", ")
        ),
    );
}

#[test]
fn stationary_solver() {
    let preset = PresetName::Fig7.preset();
    let PresetKind::Steady { gamma_g, big_gamma_g, from, to, count } = preset.kind else { unreachable!() };
    let g = preset.g;
    let base = p(g, 0.0, gamma_g * g, big_gamma_g * g);
    let (lo, hi) = (resolve_end(from, &base).unwrap(), resolve_end(to, &base).unwrap());
    let mut worst_residual = 0.0f64;
    for gl in linspace(lo, hi, count) {
        let q = base.with(Param::GammaL, gl).unwrap();
        let sigma = dynamics::stationary(&q).unwrap();
        worst_residual = worst_residual.max(build_drift_diffusion(&q).unwrap().residual(&sigma));
    }

    let q = fig6_params(1.6);
    let ss = dynamics::stationary(&q).unwrap();
    let late = dynamics::propagate(&CovarianceAA::vacuum(), &q, 50.0 / g).unwrap().sigma_t;
    let gap = max_dev(&late, &ss) / ss.max_abs();
    // The same comparison through the phase-insensitive path, for reference.
    let pi = PhaseInsensitiveDynamics::new(&q);
    let pi_gap = {
        let a = pi.propagate(&gainloss_core::PhaseInsensitiveState::vacuum(), 50.0 / g).unwrap();
        let b = pi.stationary().unwrap();
        (a.n_ll - b.n_ll).abs().max((a.n_gg - b.n_gg).abs()).max((a.n_lg - b.n_lg).norm()) / b.max_abs()
    };
    verdict(
        "stationary-solver",
        worst_residual <= 1e-10 && gap <= 1e-6,
        format!(
            "relative residual over {count} sweep points {worst_residual:.2e} (tol 1e-10); propagate(50/g) vs stationary at gamma_l = 1.6g: relative gap {gap:.3e} (tol 1e-6; moment path {pi_gap:.3e}), slowest drift rate {:.4}",
            -q.growth_rate()
        ),
    );
}

#[test]
fn threshold_discrepancy_surfaced() {
    let mut worst = 0.0f64;
    let mut printed_ok = true;
    let mut check = |q: &ModelParams| {
        let th = q.thresholds().unwrap();
        let gt = q.effective_gain();
        worst = worst.max((th.gamma_l_th_numeric * gt - q.g() * q.g()).abs() / gt / q.g());
        printed_ok &= th.gamma_l_th_paper == 2.0 * q.g() * q.g() / gt;
    };
    check(&fig6_params(0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    for _ in 0..1_000 {
        // Only 0 < Γ̃ < g has a stable window ending at a loss-induced threshold.
        let g = rng.gen_range(0.5..3.0);
        let gt = g * rng.gen_range(0.01..0.99);
        let gg = rng.gen_range(0.0..3.0);
        check(&p(g, 0.0, gg, gg + gt));
    }
    let fig6 = fig6_params(0.0).thresholds().unwrap();
    verdict(
        "threshold-discrepancy-surfaced",
        worst <= 1e-8 && printed_ok,
        format!(
            "fig6 parameters: printed 2g²/Γ̃ = {:.6}, numeric = {:.6}; max |γ_L^th - g²/Γ̃| / g over 1001 points = {worst:.2e} (tol 1e-8)",
            fig6.gamma_l_th_paper, fig6.gamma_l_th_numeric
        ),
    );
}
