use std::fs;
use std::process::{Command, Output};

fn cmph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmph"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(i).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn spectrum_reference_ground_states() {
    let out = cmph(&[
        "spectrum", "--units", "natural", "--a", "0.03125", "--b", "1", "--d", "0", "--l", "0..2",
        "--n", "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(column(&text, "energy"), vec![-7.625, -7.375, -7.125]);
    assert_eq!(column(&text, "c"), vec![4.0, 8.0, 12.0]);
}

#[test]
fn spectrum_without_linear_term_has_zero_c_for_even_levels() {
    let out = cmph(&[
        "spectrum", "--units", "natural", "--a", "0.5", "--b", "0", "--l", "0..2", "--n", "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(column(&text, "c").iter().all(|&c| c == 0.0));
    // ℏω(1 + l′/2) with ℏω = 1
    assert_eq!(column(&text, "energy"), vec![1.5, 2.5, 3.5]);
}

#[test]
fn spectrum_rejects_d_above_bound() {
    let out = cmph(&[
        "spectrum", "--units", "natural", "--a", "0.5", "--b", "1", "--d", "0.2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bound"));
}

#[test]
fn units_are_mandatory() {
    let out = cmph(&["spectrum", "--a", "0.5", "--b", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--units"));
}

#[test]
fn verify_accepts_reference_levels() {
    let out = cmph(&[
        "verify", "--units", "natural", "--a", "0.03125", "--b", "1", "--l", "0..2",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(column(&text, "relative_deviation")
        .iter()
        .all(|&d| d < 1e-6));
}

#[test]
fn verify_flags_perturbed_c() {
    let out = cmph(&[
        "verify", "--units", "natural", "--a", "0.03125", "--b", "1", "--c", "4.05",
    ]);
    assert_eq!(out.status.code(), Some(5));
    let residual = column(&stdout(&out), "ode_residual")[0];
    assert!(residual > 1e-4, "{residual}");
}

#[test]
fn verify_rejects_too_few_steps() {
    let out = cmph(&[
        "verify", "--units", "natural", "--a", "0.03125", "--b", "1", "--steps", "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn table1_columns() {
    let out = cmph(&["table1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "a,b,c,d,l,Numerical,Present");
    let present = column(&text, "Present");
    assert_eq!(present, vec![-7.625, -7.375, -7.125]);
    for (n, p) in column(&text, "Numerical").iter().zip(&present) {
        assert!((n - p).abs() < 0.01);
    }
    assert!(text.contains("-7.625,-7.625"));
}

#[test]
fn ground_state_curves_at_origin() {
    let out = cmph(&[
        "wavefunction",
        "--units",
        "ev-nm",
        "--mass",
        "0.05",
        "--omega",
        "1e15",
        "--c",
        "0.001",
        "--l",
        "0..1",
        "--n",
        "0",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "r,psi_n0_l0,psi_n0_l1");
    assert!(column(&text, "psi_n0_l0")[0] > 0.0);
    assert_eq!(column(&text, "psi_n0_l1")[0], 0.0);
}

#[test]
fn single_wavefunction_uses_grid_schema() {
    let out = cmph(&[
        "wavefunction",
        "--units",
        "natural",
        "--a",
        "0.03125",
        "--b",
        "1",
        "--points",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "r,psi,phi");
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn omega_sweep_is_increasing_for_both_curves() {
    let out = cmph(&[
        "sweep",
        "--units",
        "ev-nm",
        "--variable",
        "omega",
        "--lo",
        "2e14",
        "--hi",
        "1e15",
        "--points",
        "9",
        "--c",
        "0.001",
        "--l",
        "0..1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "x,quantity,value,units,constraint_satisfied"
    );
    for tag in ["E0_l0", "E0_l1"] {
        let values: Vec<f64> = text
            .lines()
            .filter(|l| l.split(',').nth(1) == Some(tag))
            .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
            .collect();
        assert_eq!(values.len(), 9);
        assert!(values.windows(2).all(|w| w[1] > w[0]), "{tag}");
    }
}

#[test]
fn empty_sweep_range_is_rejected() {
    let out = cmph(&[
        "sweep",
        "--units",
        "ev-nm",
        "--variable",
        "c",
        "--lo",
        "0.002",
        "--hi",
        "0.001",
        "--omega",
        "1e15",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("t.csv");
    let out = cmph(&["table1", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(10));
}

#[test]
fn json_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let out = cmph(&[
        "spectrum",
        "--units",
        "natural",
        "--a",
        "0.03125",
        "--b",
        "1",
        "--l",
        "0..2",
        "--n",
        "0..1",
        "--format",
        "json",
        "-o",
        first.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = cmph(&[
        "run",
        "--config",
        first.to_str().unwrap(),
        "-o",
        second.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn ini_config_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let ini = dir.path().join("dot.ini");
    fs::write(
        &ini,
        "command = spectrum\nunits = natural\na = 0.03125\nb = 1\n\n[levels]\nl = 0..2\n",
    )
    .unwrap();
    let out = cmph(&["run", "--config", ini.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(column(&stdout(&out), "energy").len(), 3);

    let out = cmph(&["run", "--config", ini.to_str().unwrap(), "--l", "1"]);
    assert_eq!(column(&stdout(&out), "energy"), vec![-7.375]);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"command": "spectrum", "units": "natural", "colour": 3}"#,
    )
    .unwrap();
    let out = cmph(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = [
        "sweep",
        "--units",
        "ev-nm",
        "--variable",
        "c",
        "--lo",
        "0.0005",
        "--hi",
        "0.003",
        "--points",
        "25",
        "--omega",
        "1e15",
        "--quantity",
        "psi0",
    ];
    assert_eq!(cmph(&args).stdout, cmph(&args).stdout);
}

#[test]
fn constrain_inverts_both_ways() {
    let out = cmph(&[
        "constrain",
        "--units",
        "natural",
        "--a",
        "0.03125",
        "--b",
        "1",
        "--n",
        "1",
    ]);
    let c = column(&stdout(&out), "c")[0];
    let out = cmph(&[
        "constrain",
        "--units",
        "natural",
        "--a",
        "0.03125",
        "--c",
        &c.to_string(),
        "--n",
        "1",
    ]);
    let b = column(&stdout(&out), "b")[0];
    assert!((b - 1.0).abs() < 1e-9, "{b}");
}
