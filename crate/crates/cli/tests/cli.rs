use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qbaker::io::{read_eigenphases_csv, read_matrix, read_state};
use qbaker::propagator::{corrected_matrix, eigenphases};
use qbaker::torus::HilbertConfig;
use tempfile::TempDir;

fn qbaker(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbaker"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn matrix_n2_parity() {
    let dir = TempDir::new().unwrap();
    let path = out(&dir, "m.txt");
    let o = qbaker(&["matrix", "--n", "2", "--variant", "parity", "--out", s(&path)]);
    assert_eq!(code(&o), 0);
    let m = read_matrix(fs::File::open(&path).map(std::io::BufReader::new).unwrap()).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let want = [(h, 0.0), (h, 0.0), (0.0, h), (0.0, -h)];
    for (z, (re, im)) in m.matrix.as_slice().iter().zip(want) {
        assert!((z.re - re).abs() < 1e-15 && (z.im - im).abs() < 1e-15);
    }
}

#[test]
fn odd_dimension_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let path = out(&dir, "m.txt");
    let o = qbaker(&["matrix", "--n", "3", "--out", s(&path)]);
    assert_eq!(code(&o), 2);
    assert!(!path.exists());
    assert!(!o.stderr.is_empty());
}

#[test]
fn missing_flag_is_usage_error() {
    assert_eq!(code(&qbaker(&["matrix", "--n", "4"])), 2);
    assert_eq!(code(&qbaker(&["frobnicate"])), 2);
}

#[test]
fn unwritable_output_is_io_error() {
    let o = qbaker(&["matrix", "--n", "2", "--out", "/nonexistent-dir/qbaker/m.txt"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn unreadable_input_is_io_error() {
    let dir = TempDir::new().unwrap();
    let o = qbaker(&["spectrum", "--input", "/nonexistent-dir/m.txt", "--out", s(&out(&dir, "e.csv"))]);
    assert_eq!(code(&o), 3);
}

#[test]
fn variants_share_even_rows_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (out(&dir, "bv.txt"), out(&dir, "parity.txt"));
    assert_eq!(code(&qbaker(&["matrix", "--n", "8", "--variant", "bv", "--out", s(&a)])), 0);
    assert_eq!(code(&qbaker(&["matrix", "--n", "8", "--variant", "parity", "--out", s(&b)])), 0);
    let (ta, tb) = (fs::read_to_string(a).unwrap(), fs::read_to_string(b).unwrap());
    let (la, lb): (Vec<_>, Vec<_>) = (ta.lines().skip(1).collect(), tb.lines().skip(1).collect());
    for row in (0..8).step_by(2) {
        assert_eq!(la[row], lb[row], "row {row}");
    }
    assert_ne!(la[1], lb[1]);
}

#[test]
fn verify_parity_passes_and_bv_fails() {
    let dir = TempDir::new().unwrap();
    let path = out(&dir, "v.csv");
    assert_eq!(code(&qbaker(&["verify", "--n", "16", "--out", s(&path)])), 0);
    let report = fs::read_to_string(&path).unwrap();
    assert!(report.starts_with("check,value,threshold,pass\n"));
    assert_eq!(report.lines().filter(|l| l.ends_with(",true")).count(), 4);

    assert_eq!(code(&qbaker(&["verify", "--n", "16", "--variant", "bv", "--out", s(&path)])), 1);
    let report = fs::read_to_string(&path).unwrap();
    let parity = report.lines().find(|l| l.starts_with("parity_commutator,")).unwrap();
    assert!(parity.ends_with(",false"));
}

#[test]
fn verify_n2_oracle() {
    let dir = TempDir::new().unwrap();
    let path = out(&dir, "v.csv");
    assert_eq!(code(&qbaker(&["verify", "--n", "2", "--out", s(&path)])), 0);
    let report = fs::read_to_string(&path).unwrap();
    let line = report.lines().find(|l| l.starts_with("oracle_equivalence,")).unwrap();
    let value: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
    assert!(value < 1e-10);
}

#[test]
fn evolve_examples() {
    let dir = TempDir::new().unwrap();
    let path = out(&dir, "s.txt");
    let o = qbaker(&["evolve", "--n", "2", "--basis-index", "0", "--steps", "1", "--out", s(&path)]);
    assert_eq!(code(&o), 0);
    let st = read_state(std::io::BufReader::new(fs::File::open(&path).unwrap())).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((st.coeffs[0].re - h).abs() < 1e-15 && st.coeffs[0].im.abs() < 1e-15);
    assert!(st.coeffs[1].re.abs() < 1e-15 && (st.coeffs[1].im - h).abs() < 1e-15);

    let o = qbaker(&["evolve", "--n", "8", "--basis-index", "3", "--steps", "0", "--out", s(&path)]);
    assert_eq!(code(&o), 0);
    let st = read_state(std::io::BufReader::new(fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(st, qbaker::torus::StateVector::basis_vector(8, 3).unwrap());
}

#[test]
fn evolve_long_run_drift() {
    let dir = TempDir::new().unwrap();
    let path = out(&dir, "s.txt");
    let o = qbaker(&["evolve", "--n", "1024", "--x0", "0.3", "--p0", "0.7", "--steps", "1000", "--out", s(&path)]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8(o.stdout).unwrap();
    let drift: f64 = stdout.trim().strip_prefix("norm_drift=").unwrap().parse().unwrap();
    assert!(drift < 1e-9);
}

#[test]
fn evolve_needs_an_initial_state() {
    let dir = TempDir::new().unwrap();
    let o = qbaker(&["evolve", "--n", "4", "--out", s(&out(&dir, "s.txt"))]);
    assert_eq!(code(&o), 2);
    let o = qbaker(&["evolve", "--n", "4", "--basis-index", "9", "--out", s(&out(&dir, "s.txt"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn spectrum_identity_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let e = out(&dir, "e.csv");
    assert_eq!(code(&qbaker(&["spectrum", "--n", "6", "--identity", "--out", s(&e)])), 0);
    let phases = read_eigenphases_csv(std::io::BufReader::new(fs::File::open(&e).unwrap())).unwrap();
    assert_eq!(phases, vec![0.0; 6]);

    let m = out(&dir, "m.txt");
    assert_eq!(code(&qbaker(&["matrix", "--n", "24", "--out", s(&m)])), 0);
    assert_eq!(code(&qbaker(&["spectrum", "--input", s(&m), "--out", s(&e)])), 0);
    let from_file = read_eigenphases_csv(std::io::BufReader::new(fs::File::open(&e).unwrap())).unwrap();
    let direct = eigenphases(&corrected_matrix(&HilbertConfig::new(24).unwrap()).matrix).unwrap();
    assert_eq!(from_file.len(), direct.len());
    for (a, b) in from_file.iter().zip(&direct) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn classical_limit_errors_decrease() {
    let dir = TempDir::new().unwrap();
    let path = out(&dir, "l.csv");
    let o = qbaker(&[
        "classical-limit", "--a", "1", "--b", "1", "--x0", "0.3", "--p0", "0.7", "--n-list", "32,128,512", "--out", s(&path),
    ]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,re_q,im_q,re_c,im_c,error"));
    let errors: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(errors.len(), 3);
    assert!(errors[0] > errors[1] && errors[1] > errors[2]);
}

#[test]
fn classical_limit_rejects_boundary() {
    let dir = TempDir::new().unwrap();
    let o = qbaker(&["classical-limit", "--x0", "0.5", "--p0", "0.3", "--out", s(&out(&dir, "l.csv"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn phase_portrait_of_comb() {
    let dir = TempDir::new().unwrap();
    let path = out(&dir, "p.csv");
    let g = 8;
    let o = qbaker(&["phase-portrait", "--n", "16", "--basis-index", "4", "--grid", "8", "--out", s(&path)]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&path).unwrap();
    let rows: Vec<(f64, f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|t| t.parse().unwrap()).collect();
            (v[0], v[1], v[2])
        })
        .collect();
    assert_eq!(rows.len(), g * g);
    // x0 = 1/4 lies on the comb; the overlap is flat along p0 there.
    let on: Vec<f64> = rows.iter().filter(|r| r.0 == 0.25).map(|r| r.2).collect();
    let spread = on.iter().cloned().fold(f64::MIN, f64::max) - on.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 1e-6 * on[0]);
}

#[test]
fn phase_portrait_from_state_file() {
    let dir = TempDir::new().unwrap();
    let st = out(&dir, "s.txt");
    assert_eq!(code(&qbaker(&["evolve", "--n", "16", "--x0", "0.3", "--p0", "0.2", "--steps", "0", "--out", s(&st)])), 0);
    let path = out(&dir, "p.csv");
    let o = qbaker(&["phase-portrait", "--n", "16", "--input", s(&st), "--grid", "4", "--out", s(&path)]);
    assert_eq!(code(&o), 0);
    let o = qbaker(&["phase-portrait", "--n", "8", "--input", s(&st), "--grid", "4", "--out", s(&path)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn sector_reports_leakage() {
    let dir = TempDir::new().unwrap();
    let path = out(&dir, "f.txt");
    let o = qbaker(&["sector", "--n", "8", "--out", s(&path)]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8(o.stdout).unwrap();
    let leak: f64 = stdout.trim().strip_prefix("leakage=").unwrap().parse().unwrap();
    assert!(leak < 1e-12);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("qbaker-matrix v1 dim=16 basis=theta_00,theta_0half\n"));
}

#[test]
fn orbit_and_localization_outputs() {
    let dir = TempDir::new().unwrap();
    let path = out(&dir, "o.csv");
    assert_eq!(code(&qbaker(&["orbit", "--x0", "0", "--p0", "0", "--steps", "5", "--out", s(&path)])), 0);
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 7);
    assert_eq!(code(&qbaker(&["orbit", "--x0", "1.5", "--p0", "0", "--out", s(&path)])), 2);

    let loc = out(&dir, "loc.csv");
    assert_eq!(code(&qbaker(&["localization", "--n", "64", "--out", s(&loc)])), 0);
    let text = fs::read_to_string(&loc).unwrap();
    assert!(text.starts_with("operator,region,measured_mass,expected_limit\n"));
    assert_eq!(text.lines().count(), 17);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let runs: [&[&str]; 4] = [
        &["matrix", "--n", "12"],
        &["spectrum", "--n", "12"],
        &["evolve", "--n", "64", "--x0", "0.2", "--p0", "0.9", "--steps", "7"],
        &["classical-limit", "--n-list", "16,32"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let (a, b) = (out(&dir, &format!("{i}a")), out(&dir, &format!("{i}b")));
        for p in [&a, &b] {
            let mut full: Vec<&str> = args.to_vec();
            full.extend(["--out", s(p)]);
            assert_eq!(code(&qbaker(&full)), 0, "{args:?}");
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{args:?}");
    }
}
