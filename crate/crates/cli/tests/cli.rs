use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qwork(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwork"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn ttm_and_mf_outputs_follow_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\nkind = \"random\"\ndim = 5\n\n[schedule]\nshape = \"smoothstep\"\nduration = 2.0\n\n[run]\nbeta = 0.7\nsteps = 400\n",
    );
    for (cmd, csv, json, keys) in [
        (
            "ttm",
            "ttm_distribution.csv",
            "ttm_summary.json",
            &["mean_work", "exp_avg", "z0", "ztau", "delta_f", "jarzynski_residual"][..],
        ),
        (
            "mf",
            "mf_distribution.csv",
            "mf_summary.json",
            &[
                "mean_work",
                "exp_avg",
                "z_tilde",
                "s_rel_matrix",
                "s_rel_closed_form",
                "residual_eq18",
                "slack_eq19",
                "basis_convention",
            ][..],
        ),
    ] {
        let out = qwork(&[cmd, "--config", &cfg, "--seed", "11"], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let text = fs::read_to_string(dir.path().join(csv)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("w,prob"));
        let total: f64 = lines
            .map(|l| {
                let cells: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
                assert_eq!(cells.len(), 2);
                cells[1]
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-10);
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join(json)).unwrap()).unwrap();
        for k in keys {
            assert!(!v[k].is_null(), "{cmd}: missing {k}");
        }
    }
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for cmd in [
        &["verify", "--seed", "5"][..],
        &["mf", "--seed", "5"],
        &["oscillator", "--preset", "fig1"],
    ] {
        assert!(qwork(cmd, a.path()).status.success());
        assert!(qwork(cmd, b.path()).status.success());
    }
    for name in [
        "verify_report.json",
        "mf_distribution.csv",
        "mf_summary.json",
        "oscillator_sweep.csv",
        "oscillator_sweep.json",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn tau_sweep_reports_dynamics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[oscillator]\nmode = \"tau\"\ntaus = [0.0001, 1.0, 100.0]\n",
    );
    let out = qwork(&["oscillator", "--config", &cfg], dir.path());
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("oscillator_sweep.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(text.lines().next(), Some("tau,qstar,beta_w,beta_df,beta_df_plus_s"));
    assert_eq!(rows.len(), 3);
    assert!((rows[0][1] - 1.25).abs() < 1e-3);
    assert!(rows[2][1] - 1.0 < 1e-3);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_syntax = write_config(dir.path(), "[run]\nbeta = = 1\n");
    let out = qwork(&["ttm", "--config", &bad_syntax], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let bad_value = write_config(dir.path(), "[run]\nhbar = 0.0\n");
    let out = qwork(&["mf", "--config", &bad_value], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run.hbar"));

    let out = qwork(&["ttm", "--config", "/nonexistent/run.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = qwork(&["oscillator", "--preset", "fig3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tolerance_violation_exits_with_one_and_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    // Twelve Fock levels cannot hold the driven state: the tail check fails.
    let cfg = write_config(
        dir.path(),
        "[verify]\ninstances = 5\ndephasing_pairs = 5\noscillator = true\nn_trunc = 12\noscillator_steps = 200\n",
    );
    let out = qwork(&["verify", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify_report.json")).unwrap()).unwrap();
    assert_eq!(v["all_within_tolerance"], false);
    let tail = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "tail_occupancy")
        .unwrap();
    assert_eq!(tail["within_tolerance"], false);
}
