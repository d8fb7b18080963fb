// Copyright 2026 The gainloss Authors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end runs of the `gainloss` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn gainloss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gainloss"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gainloss-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Data lines and header, i.e. everything but the `#` preamble.
fn body(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

const FIG6_POINT: [&str; 8] = ["--g", "2", "--gamma-l", "1.6", "--gamma-g", "1.2", "--big-gamma-g", "2.32"];

#[test]
fn preset_reruns_are_identical_apart_from_timestamp() {
    let run = || {
        let o = gainloss(&["preset", "fig8", "--t-max", "5", "--samples", "51"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
            .lines()
            .filter(|l| !l.starts_with("# timestamp:"))
            .map(str::to_owned)
            .collect::<Vec<_>>()
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert_eq!(a.iter().filter(|l| !l.starts_with('#')).count(), 1 + 3 * 51);
}

#[test]
fn csv_preamble_and_header() {
    let o = gainloss(&["preset", "fig6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    let first_data = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    let preamble = &lines[..first_data];
    for key in ["generator", "command", "method", "params", "timestamp"] {
        assert!(preamble.iter().any(|l| l.starts_with(&format!("# {key}: "))), "missing {key}");
    }
    let stamp = preamble.iter().find(|l| l.starts_with("# timestamp: ")).unwrap();
    assert!(chrono::DateTime::parse_from_rfc3339(&stamp["# timestamp: ".len()..]).is_ok());
    assert_eq!(
        lines[first_data],
        "sweep_param,sweep_value,re_e_plus,im_e_plus,re_e_minus,im_e_minus,regime,stable"
    );
    assert_eq!(lines.len() - first_data - 1, 501);
}

#[test]
fn json_output() {
    let mut args = vec!["steady"];
    args.extend(FIG6_POINT);
    args.extend(["--format", "json"]);
    let o = gainloss(&args);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metadata"]["command"], "steady");
    let row = &v["rows"][0];
    assert_eq!(row["stability"], "stable");
    assert!(row["mutual_information"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_file_under_flags() {
    let cfg = scratch("point.cfg");
    std::fs::write(&cfg, "g = 2\ngamma_l = 1.6\ngamma_g = 1.2\nbig_gamma_g = 2.32\nt_max = 1\nsamples = 3\n").unwrap();
    let path = cfg.to_str().unwrap();
    let from_file = stdout(&gainloss(&["evolve", "--config", path]));
    assert_eq!(body(&from_file).len(), 4);
    let overridden = stdout(&gainloss(&["evolve", "--config", path, "--samples", "5"]));
    assert_eq!(body(&overridden).len(), 6);
    assert!(overridden.contains("# params: g=2, gamma_l=1.6, gamma_g=1.2, big_gamma_g=2.32"));
}

#[test]
fn out_flag_writes_file() {
    let out = scratch("spectrum.csv");
    let mut args = vec!["spectrum"];
    args.extend(FIG6_POINT);
    args.extend(["--out", out.to_str().unwrap()]);
    let o = gainloss(&args);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(body(&text).len(), 2);
}

#[test]
fn zero_time_evolution_is_one_uncorrelated_row() {
    let mut args = vec!["evolve"];
    args.extend(FIG6_POINT);
    args.extend(["--t-max", "0"]);
    let text = stdout(&gainloss(&args));
    let b = body(&text);
    assert_eq!(b.len(), 2);
    assert_eq!(
        b[1],
        "point,0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,\
         1.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0"
    );
}

#[test]
fn broken_phase_is_flagged_diverged() {
    let o = gainloss(&[
        "evolve", "--g", "1", "--gamma-l", "3", "--gamma-g", "0", "--big-gamma-g", "3", "--t-max", "100", "--samples", "11",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let last = *body(&text).last().unwrap();
    assert!(last.ends_with("diverged,diverged,diverged,diverged,diverged,diverged"), "{last}");
}

#[test]
fn config_errors_exit_1() {
    for args in [
        vec!["spectrum", "--sweep", "gamma_l:0:1"],
        vec!["spectrum", "--g", "1"],
        vec!["preset", "fig2", "--sweep", "g:1:2:2"],
        vec!["evolve", "--config", "/nonexistent/gainloss.cfg"],
        vec!["steady", "--g", "-1", "--gamma-l", "1", "--gamma-g", "1", "--big-gamma-g", "1"],
    ] {
        let o = gainloss(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn sweep_rows_follow_sweep_order() {
    let o = gainloss(&["steady", "--g", "2", "--gamma-g", "1.2", "--big-gamma-g", "2.32", "--sweep", "gamma_l:4:1:7"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let values: Vec<f64> = body(&text)[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values, vec![4.0, 3.5, 3.0, 2.5, 2.0, 1.5, 1.0]);
    // gamma_l = 4 lies beyond the lasing threshold g²/Γ̃ ≈ 3.57.
    assert!(body(&text)[1].ends_with(",,,,unstable"));
}

#[test]
fn oracle_check_passes_on_short_window() {
    let o = gainloss(&["oracle-check", "--only", "fig8-short-window"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(body(&text)[1].starts_with("fig8-short-window,"));
    assert!(body(&text)[1].contains(",pass,"));
}

#[test]
fn oracle_check_catches_corrupted_diffusion() {
    let o = gainloss(&["oracle-check", "--only", "fig8-short-window", "--corrupt-diffusion", "1.01"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert!(text.contains("fig8-short-window,") && text.contains(",fail,deviation above tolerance"), "{text}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("fig8-short-window"));
}

#[test]
fn oracle_check_reports_small_cutoff() {
    let o = gainloss(&["oracle-check", "--cutoff", "3"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    let rows = &body(&text)[1..];
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.contains("cutoff-exceeded")), "{text}");
}
