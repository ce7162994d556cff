use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn coexsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coexsim")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("scenario.toml");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn golden(name: &str) -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string() + "\n"
}

#[test]
fn default_config_validates() {
    let o = coexsim(&["validate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.starts_with("valid\n"));
    assert!(out.contains(&format!("macro pattern: {}", ["D".repeat(14).as_str(); 3].join("|") + "|" + &"U".repeat(14))));
    assert!(out.contains(&format!("factory pattern: {}{}", "D".repeat(7), "U".repeat(7))));
}

#[test]
fn invalid_values_are_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[scenario.radio.factory_pc]\nalpha = 1.5\n");
    let o = coexsim(&["--validate", "--config", &cfg]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("alpha out of [0,1]"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), "[scenario.radio.acir]\nue_to_ue_db = -28.2\n");
    let o = coexsim(&["validate", "--config", &cfg]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("radio.acir.ue_to_ue_db"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_report_their_line() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[scenario]\ndrops = 2\nwal_loss = 3\n");
    let o = coexsim(&["validate", "--config", &cfg]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("wal_loss"), "{err}");
}

#[test]
fn empty_matrix_has_no_scenarios() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[matrix]\nwall_loss_db = []\n");
    let out = dir.path().join("out");
    let o = coexsim(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no scenarios"));
}

#[test]
fn run_writes_pinned_schema_and_reruns_identically() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let args = ["run", "--drops", "1", "--seed", "5", "--out", out_s, "--dump-couplings"];
    let o = coexsim(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let cell = "co_channel_utdd_f0_w14_t10_bs3";
    assert_eq!(first_line(&out.join("campaign.csv")), golden("campaign_header.csv"));
    assert_eq!(fs::read_to_string(out.join("campaign.csv")).unwrap().lines().count(), 2);
    assert!(out.join(format!("{cell}_couplings_drop0.csv")).exists());

    let json = fs::read(out.join(format!("{cell}.json"))).unwrap();
    let drops = fs::read(out.join(format!("{cell}_drops.csv"))).unwrap();
    let o = coexsim(&args);
    assert!(o.status.success());
    assert_eq!(fs::read(out.join(format!("{cell}.json"))).unwrap(), json);
    assert_eq!(fs::read(out.join(format!("{cell}_drops.csv"))).unwrap(), drops);
}

#[test]
fn figure_presets_sweep_their_axes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("f6");
    let o = coexsim(&["run", "--figure", "6", "--drops", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sweep = fs::read_to_string(out.join("figure6.csv")).unwrap();
    assert_eq!(first_line(&out.join("figure6.csv")), golden("figure6_header.csv"));
    let axes: Vec<(String, String)> = sweep
        .lines()
        .skip(1)
        .map(|l| {
            let mut f = l.split(',');
            (f.next().unwrap().to_string(), f.next().unwrap().to_string())
        })
        .collect();
    let want: Vec<(String, String)> =
        (0..9).flat_map(|i| ["10", "20"].map(|t| ((14 + 3 * i).to_string(), t.to_string()))).collect();
    assert_eq!(axes, want);

    let o = coexsim(&["validate", "--figure", "7"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("cells: 2\n"));
    for (fig, cells) in [("4a", 6), ("5b", 6)] {
        let o = coexsim(&["validate", "--figure", fig]);
        assert!(String::from_utf8(o.stdout).unwrap().contains(&format!("cells: {cells}\n")));
    }
    let o = coexsim(&["validate", "--figure", "9"]);
    assert!(!o.status.success());
}

#[test]
fn mcs_table_lists_nine_entries() {
    let o = coexsim(&["mcs-table"]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "modulation,code_rate,spectral_efficiency,n_re,threshold_db");
    assert_eq!(lines.len(), 10);
    assert!(lines[1].starts_with("QPSK,1/20,0.1000,2560,"));
    assert!(lines[9].starts_with("64QAM,3/4,4.5000,60,"), "{}", lines[9]);
}

#[test]
fn non_convergence_names_the_cell() {
    let dir = TempDir::new().unwrap();
    let cfg =
        write_config(dir.path(), "[scenario]\ndrops = 1\nfactory_embb_mbps = 10.0\n[scenario.solver]\nmax_iter = 1\n");
    let out = dir.path().join("out");
    let o = coexsim(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("co_channel_utdd_f10_w14_t10_bs3"), "{}", stderr(&o));
}
