// Copyright 2026 The gainloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Figure-reproduction presets. All rates are stored in units of `g`, so a
//! `--g` override rescales the whole preset.

use std::fmt;
use std::str::FromStr;

use gainloss_core::{ModelParams, Result as CoreResult};

/// One fixed-parameter curve of a time-evolution preset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSpec {
    pub label: &'static str,
    /// `None` puts the curve on the PT line, `gamma_l = big_gamma_g - gamma_g`.
    pub gamma_l: Option<f64>,
    pub gamma_g: f64,
    pub big_gamma_g: f64,
}

impl SeriesSpec {
    pub fn params(&self, g: f64) -> CoreResult<ModelParams> {
        let (gg, bg) = (self.gamma_g * g, self.big_gamma_g * g);
        match self.gamma_l {
            Some(gl) => ModelParams::new(g, gl * g, gg, bg),
            None => ModelParams::on_pt_line(g, gg, bg),
        }
    }
}

/// Where the ends of a `gamma_l` sweep sit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepEnd {
    Zero,
    /// `Γ̃ (1 + offset)`: just above the PT value.
    AbovePt(f64),
    /// `(2g²/Γ̃)(1 + offset)`.
    PaperThreshold(f64),
    /// Numeric Hurwitz boundary times `(1 + offset)`.
    NumericThreshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PresetKind {
    /// Time evolution of several curves; `t_max` in units of 1/g.
    Evolve {
        series: &'static [SeriesSpec],
        t_max: f64,
        samples: usize,
    },
    /// `gamma_l` sweep of the spectrum at fixed `gamma_g`, `big_gamma_g`.
    Spectrum {
        gamma_g: f64,
        big_gamma_g: f64,
        from: SweepEnd,
        to: SweepEnd,
        count: usize,
    },
    /// `gamma_l` sweep of stationary correlations.
    Steady {
        gamma_g: f64,
        big_gamma_g: f64,
        from: SweepEnd,
        to: SweepEnd,
        count: usize,
    },
    /// `big_gamma_g ∈ (0, max]`, `gamma_g = big_gamma_g·j/n` for `j < n`, on the PT line.
    AsymptoticGrid {
        big_gamma_g_max: f64,
        n_big: usize,
        n_small: usize,
        t_max: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetName {
    Fig2,
    Fig4,
    Fig6,
    Fig7,
    Fig8,
}

impl PresetName {
    pub const ALL: [PresetName; 5] = [
        PresetName::Fig2,
        PresetName::Fig4,
        PresetName::Fig6,
        PresetName::Fig7,
        PresetName::Fig8,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PresetName::Fig2 => "fig2",
            PresetName::Fig4 => "fig4",
            PresetName::Fig6 => "fig6",
            PresetName::Fig7 => "fig7",
            PresetName::Fig8 => "fig8",
        }
    }

    pub fn preset(self) -> &'static Preset {
        PRESETS
            .iter()
            .find(|p| p.name == self)
            .expect("every preset name has a table entry")
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PresetName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.label() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown preset '{s}' (expected fig2, fig4, fig6, fig7 or fig8)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: PresetName,
    pub g: f64,
    pub kind: PresetKind,
    pub description: &'static str,
}

// Shared by figs. 6–8.
const NON_PT_GAMMA_G: f64 = 0.6;
const NON_PT_BIG_GAMMA_G: f64 = 1.16;

const FIG2_SERIES: [SeriesSpec; 6] = [
    SeriesSpec { label: "pure-unbroken", gamma_l: None, gamma_g: 0.0, big_gamma_g: 0.5 },
    SeriesSpec { label: "pure-ep", gamma_l: None, gamma_g: 0.0, big_gamma_g: 1.0 },
    SeriesSpec { label: "pure-broken", gamma_l: None, gamma_g: 0.0, big_gamma_g: 1.5 },
    SeriesSpec { label: "dissipative-unbroken", gamma_l: None, gamma_g: 0.5, big_gamma_g: 1.0 },
    SeriesSpec { label: "dissipative-ep", gamma_l: None, gamma_g: 1.0, big_gamma_g: 2.0 },
    SeriesSpec { label: "dissipative-broken", gamma_l: None, gamma_g: 1.5, big_gamma_g: 3.0 },
];

const FIG8_SERIES: [SeriesSpec; 3] = [
    SeriesSpec {
        label: "below-ep",
        gamma_l: Some(0.8),
        gamma_g: NON_PT_GAMMA_G,
        big_gamma_g: NON_PT_BIG_GAMMA_G,
    },
    SeriesSpec {
        label: "at-ep",
        gamma_l: Some(1.44),
        gamma_g: NON_PT_GAMMA_G,
        big_gamma_g: NON_PT_BIG_GAMMA_G,
    },
    SeriesSpec {
        label: "above-ep",
        gamma_l: Some(1.6),
        gamma_g: NON_PT_GAMMA_G,
        big_gamma_g: NON_PT_BIG_GAMMA_G,
    },
];

/// The one place preset values live.
pub const PRESETS: [Preset; 5] = [
    Preset {
        name: PresetName::Fig2,
        g: 1.0,
        kind: PresetKind::Evolve { series: &FIG2_SERIES, t_max: 40.0, samples: 801 },
        description: "correlation dynamics on the PT line, pure and dissipative gain",
    },
    Preset {
        name: PresetName::Fig4,
        g: 1.0,
        kind: PresetKind::AsymptoticGrid { big_gamma_g_max: 4.0, n_big: 100, n_small: 100, t_max: 200.0 },
        description: "long-time discord over the PT-constructible (big_gamma_g, gamma_g) plane",
    },
    Preset {
        name: PresetName::Fig6,
        g: 2.0,
        kind: PresetKind::Spectrum {
            gamma_g: NON_PT_GAMMA_G,
            big_gamma_g: NON_PT_BIG_GAMMA_G,
            from: SweepEnd::Zero,
            to: SweepEnd::PaperThreshold(0.0),
            count: 501,
        },
        description: "mean-field spectrum against gamma_l",
    },
    Preset {
        name: PresetName::Fig7,
        g: 2.0,
        kind: PresetKind::Steady {
            gamma_g: NON_PT_GAMMA_G,
            big_gamma_g: NON_PT_BIG_GAMMA_G,
            from: SweepEnd::AbovePt(1e-3),
            to: SweepEnd::NumericThreshold(-1e-3),
            count: 401,
        },
        description: "stationary correlations between the PT value and the lasing threshold",
    },
    Preset {
        name: PresetName::Fig8,
        g: 2.0,
        kind: PresetKind::Evolve { series: &FIG8_SERIES, t_max: 10.0, samples: 1001 },
        description: "transient correlations below, at and above the non-PT exceptional point",
    },
];

/// Resolves a sweep end to an absolute `gamma_l` for the given base parameters
/// (`gamma_l` of `base` is ignored).
pub fn resolve_end(end: SweepEnd, base: &ModelParams) -> CoreResult<f64> {
    let gt = base.effective_gain();
    Ok(match end {
        SweepEnd::Zero => 0.0,
        SweepEnd::AbovePt(o) => gt * (1.0 + o),
        SweepEnd::PaperThreshold(o) => base.thresholds()?.gamma_l_th_paper * (1.0 + o),
        SweepEnd::NumericThreshold(o) => base.thresholds()?.gamma_l_th_numeric * (1.0 + o),
    })
}
