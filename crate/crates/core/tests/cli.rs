use std::path::Path;
use std::process::{Command, Output};

use asian_boundary::output::parse_csv;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asian-boundary"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn table(path: &Path) -> (String, Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let (cols, rows) = parse_csv(&text).unwrap();
    (text, cols, rows)
}

const SMALL: [&str; 10] = ["--T", "1", "--q", "0", "--r", "0.06", "--n", "60", "--m", "400"];

#[test]
fn hstar_prints_the_constant() {
    let out = ok(&["hstar"]);
    let value: f64 = out.trim().trim_start_matches("h* = ").parse().unwrap();
    assert!((value + 0.638833).abs() < 1e-4);
}

#[test]
fn expiry_is_one_when_rates_match() {
    let out = ok(&["expiry", "--r", "0.05", "--q", "0.05", "--T", "3"]);
    let (_, rows) = parse_csv(&out).unwrap_or_else(|_| {
        // The branch column is text; read the numeric cell directly.
        let line = out.lines().find(|l| !l.starts_with('#') && !l.starts_with("x_star")).unwrap();
        let v: f64 = line.split(',').next().unwrap().parse().unwrap();
        (vec![], vec![vec![v]])
    });
    assert_eq!(rows[0][0], 1.0);
}

#[test]
fn boundary_file_is_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    let mut args = SMALL.to_vec();
    args.extend(["boundary", "--out", path.to_str().unwrap()]);
    let summary = ok(&args);
    assert!(summary.contains("min x* ="));
    let (text, cols, rows) = table(&path);
    for key in ["# command = boundary", "# r = 0.06", "# q = 0", "# sigma = 0.2", "# T = 1", "# n = 60", "# m = 400", "# L = 2"] {
        assert!(text.contains(key), "missing {key}");
    }
    assert_eq!(cols, ["t", "tau", "rho", "x_star"]);
    assert_eq!(rows.len(), 401);
    // First row is t = T at the expiry limit.
    assert_eq!(rows[0][0], 1.0);
    assert!((rows[0][3] - 1.0 / 1.06).abs() < 1e-9);

    // Identical configuration gives a byte-identical file.
    let again = dir.path().join("b2.csv");
    let mut args = SMALL.to_vec();
    args.extend(["boundary", "--out", again.to_str().unwrap()]);
    ok(&args);
    assert_eq!(text, std::fs::read_to_string(&again).unwrap());
}

#[test]
fn surface_has_fixed_edges_and_slices() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let mut args = SMALL.to_vec();
    args.extend(["surface", "--taus", "0.1,0.5", "--out", path.to_str().unwrap()]);
    ok(&args);
    let (_, cols, rows) = table(&path);
    assert_eq!(cols, ["tau", "rho", "xi", "pi", "slice"]);
    let n = 61;
    for level in rows.chunks(n) {
        assert_eq!(level[0][3], -1.0);
        assert_eq!(level[n - 1][3], 0.0);
    }
    // Initial row is the payoff step: -1 below x = 1, i.e. xi < ln rho(0), then 0.
    let jump = rows[0][1].ln();
    assert!(rows[..n].iter().all(|r| r[3] == if r[2] < jump { -1.0 } else { 0.0 }));
    let slice: Vec<&Vec<f64>> = rows.iter().filter(|r| r[4] == 1.0 && (r[0] - 0.1).abs() < 1e-9).collect();
    assert_eq!(slice.len(), n);
    assert!(slice.windows(2).all(|w| w[1][3] >= w[0][3]));
}

#[test]
fn compare_reports_norms() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let mut args = SMALL.to_vec();
    args.extend(["compare", "--psor-n", "300", "--out", path.to_str().unwrap()]);
    let summary = ok(&args);
    assert!(summary.contains("min x* psor"));
    let (text, cols, rows) = table(&path);
    assert!(text.contains("# norm_inf = "));
    assert_eq!(cols, ["t", "tau", "x_star_trans", "x_star_psor", "abs_diff"]);
    assert!(rows.iter().all(|r| (r[4] - (r[2] - r[3]).abs()).abs() < 1e-9));
    assert!(rows.iter().map(|r| r[4]).fold(0.0, f64::max) < 0.05);
}

#[test]
fn asymptote_overlay_and_sweep() {
    let mut args = SMALL.to_vec();
    args.extend(["asymptote", "--points", "6", "--solve"]);
    let out = ok(&args);
    let (cols, rows) = parse_csv(&out).unwrap();
    assert_eq!(cols, ["t", "remaining", "x_asymptote", "x_star_solved"]);
    assert_eq!(rows.len(), 6);
    assert!(rows.windows(2).all(|w| w[1][2] < w[0][2]));
    assert_eq!(rows[0][2], rows[0][3]);

    let out = ok(&["sweep", "--steps", "3", "--T", "2"]);
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 1 + 9);
}

#[test]
fn value_from_a_boundary_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    let mut args = SMALL.to_vec();
    args.extend(["boundary", "--out", path.to_str().unwrap()]);
    ok(&args);
    let mut args = SMALL.to_vec();
    args.extend([
        "value",
        "--t",
        "0.5",
        "--spot",
        "100",
        "--average",
        "95",
        "--boundary-file",
        path.to_str().unwrap(),
    ]);
    let out = ok(&args);
    let (cols, rows) = parse_csv(&out).unwrap();
    assert_eq!(cols, ["t", "x", "european", "premium", "total", "value_original"]);
    let r = &rows[0];
    assert!(r[3] >= 0.0);
    assert!((r[4] - r[2] - r[3]).abs() < 1e-9);
    assert!((r[5] - 100.0 * r[4]).abs() < 1e-6);

    // At expiry the value is the payoff.
    let mut args = SMALL.to_vec();
    args.extend(["value", "--t", "1", "--x", "0.8"]);
    let (_, rows) = parse_csv(&ok(&args)).unwrap();
    assert!((rows[0][4] - 0.2).abs() < 1e-12);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# desk run\nr = 0.05\nq = 0.05\nT = 3\n").unwrap();
    let out = ok(&["expiry", "--config", cfg.to_str().unwrap()]);
    assert!(out.contains("# r = 0.05") && out.contains("\n1,at_the_money"));
    let out = ok(&["expiry", "--config", cfg.to_str().unwrap(), "--r", "0.08"]);
    assert!(out.contains("# r = 0.08") && out.contains("in_the_money"));
}

#[test]
fn failures_exit_nonzero_with_a_message() {
    let out = run(&["expiry", "--sigma", "-0.2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma"));
    let out = run(&["boundary", "--kind", "put", "--n", "20", "--m", "20"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("calls only"));
    let out = run(&["value"]);
    assert!(!out.status.success());
}
