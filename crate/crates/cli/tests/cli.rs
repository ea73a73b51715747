//! End-to-end checks of the binary: exit codes, report formats, config
//! handling.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sharpline"))
}

#[test]
fn verify_passes_and_reports() {
    let out = bin()
        .args(["verify", "--mu", "2", "--eps", "0"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("sharp constant = 2.25"));
    assert!(text.contains("verify: PASS"));
    assert!(text.contains("\"status\": \"ok\""));
}

#[test]
fn verify_rejects_inadmissible_eps() {
    let out = bin()
        .args(["verify", "--mu", "2", "--eps", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("inadmissible"));
}

#[test]
fn extremal_rejects_mu_zero() {
    let out = bin()
        .args(["extremal", "--mu", "0", "--eps", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn extremal_negative_branch_runs() {
    let out = bin()
        .args(["extremal", "--mu", "-1", "--eps", "0", "--lambda", "1"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("extremal: PASS"));
}

#[test]
fn kummer_values_and_exit_codes() {
    let out = bin()
        .args(["kummer", "--b", "2", "--mu", "2", "--z", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("2.718281828459045"), "{text}");

    let out = bin()
        .args(["kummer", "--b", "1", "--mu", "3", "--z", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("1.436563656918090"), "{text}");

    // Nonpositive-integer denominator parameter: pole, exit 2.
    let out = bin()
        .args(["kummer", "--b", "1", "--mu", "-2", "--z", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_validates_config_before_work() {
    let out = bin()
        .args(["sweep", "--eps-fracs", "0.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty mu grid"));

    let out = bin().args(["sweep", "--mu-grid", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["sweep", "--mu-grid", "2", "--eps-fracs", "1.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Inadmissible absolute eps fails upfront.
    let out = bin()
        .args(["sweep", "--mu-grid", "2", "--eps-list", "2.0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Basis size past the supported cap fails upfront too.
    let out = bin()
        .args(["sweep", "--mu-grid", "2", "--eps-fracs", "0", "--k", "25"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_csv_shape_and_boundary_warning() {
    let dir = std::env::temp_dir().join("sharpline-test-csv");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("boundary.csv");
    let out = bin()
        .args([
            "sweep",
            "--mu-grid",
            "2",
            "--eps-fracs",
            "1.0",
            "--k",
            "4",
            "--output",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "mu,eps,s,sharp_const,extremal_quotient,identity_gap_max,minimiser_value,min_minus_sharp,status"
    );
    let row = lines.next().unwrap();
    assert!(row.ends_with("warning(membership)"), "{row}");
    assert_eq!(lines.next(), None);
    assert!(!text.contains('\r'));
}

#[test]
fn sweep_config_file_with_flag_override() {
    let dir = std::env::temp_dir().join("sharpline-test-config");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("sweep.conf");
    std::fs::write(
        &cfg_path,
        "# comment line\nmu_grid=2,3\neps_fracs=0\nk=3\nseed=7\n",
    )
    .unwrap();
    let out_path = dir.join("from-config.csv");
    // --k on the command line overrides the file's k=3.
    let out = bin()
        .args([
            "sweep",
            "--config",
            cfg_path.to_str().unwrap(),
            "--k",
            "4",
            "--output",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().count(), 3, "{text}");

    // JSON mirrors the CSV fields plus metadata.
    let json_path = dir.join("from-config.json");
    let out = bin()
        .args([
            "sweep",
            "--config",
            cfg_path.to_str().unwrap(),
            "--k",
            "4",
            "--format",
            "json",
            "--output",
            json_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert!(parsed["metadata"]["config_hash"].is_string());
    assert!(parsed["metadata"]["generated_at_unix"].is_u64());
    let records = parsed["records"].as_array().unwrap();
    assert_eq!(records.len(), 2);
    for r in records {
        for field in [
            "mu",
            "eps",
            "s",
            "sharp_const",
            "extremal_quotient",
            "identity_gap_max",
            "minimiser_value",
            "min_minus_sharp",
            "status",
        ] {
            assert!(
                !r[field].is_null() || field == "extremal_quotient",
                "missing {field}"
            );
        }
    }
}

#[test]
fn sweep_example_grid_all_ok() {
    // μ ∈ {1,2,3,5} × fractions {0, 0.5}: 8 rows, every status ok.
    let out = bin()
        .args(["sweep", "--mu-grid", "1,2,3,5", "--eps-fracs", "0,0.5", "--k", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    for row in rows {
        assert!(row.ends_with(",ok"), "{row}");
    }
}

#[test]
fn sweep_negative_branch_rows() {
    let out = bin()
        .args(["sweep", "--mu-grid", "-1,-2.5", "--eps-fracs", "0,0.5", "--k", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().skip(1).filter(|r| r.ends_with(",ok")).count(), 4, "{text}");
}

#[test]
fn minimise_reports_lower_bound() {
    let out = bin()
        .args(["minimise", "--mu", "2", "--eps", "0", "--k", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("minimise: PASS"), "{text}");
    assert!(text.contains("2.2500000"), "{text}");
}
