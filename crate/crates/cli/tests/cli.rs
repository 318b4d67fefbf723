use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ransac_cs::format::{parse_experiment_csv, parse_mask_csv, parse_sidecar_csv, parse_signal_csv};
use ransac_cs::metrics::snr_db;
use ransac_cs::recovery::reconstruct_signal;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ransac-cs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn generate(dir: &Path, name: &str, extra: &[&str]) -> std::path::PathBuf {
    let out = dir.join(name);
    let mut args = vec!["generate", "--output", p(&out)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

fn field(text: &str, label: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(label)).unwrap_or_else(|| panic!("{label} in {text}"));
    line[label.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn predict_prints_probabilities() {
    for (i, p, nit) in [(8, 0.0927, 10.78), (16, 0.0071, 140.95), (0, 1.0, 1.0)] {
        let o = run(&["predict", "32", "128", &i.to_string()]);
        assert!(o.status.success());
        let s = stdout(&o);
        assert!((field(&s, "P(M,N,I)") - p).abs() < 5e-5, "{s}");
        assert!((field(&s, "expected N_it") - nit).abs() < 5e-3, "{s}");
    }
}

#[test]
fn predict_gain_lines() {
    let o = run(&["predict", "32", "128", "8", "--d", "119.46", "--k", "5"]);
    let s = stdout(&o);
    assert!(s.contains("SNR_out - SNR_in0  13.78"), "{s}");
    assert!(s.contains("SNR_out0 - SNR_in0 8.06"), "{s}");
    assert_eq!(run(&["predict", "32", "128", "8", "--d", "100"]).status.code(), Some(1));
}

#[test]
fn predict_infeasible_is_not_an_error() {
    let o = run(&["predict", "32", "128", "97"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("infeasible"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["predict", "32"]).status.code(), Some(1));
    assert_eq!(run(&["experiment", "--runs", "x"]).status.code(), Some(1));
    assert_eq!(run(&["experiment", "--d", "wide"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn generate_is_deterministic_and_writes_truth() {
    let dir = tempfile::tempdir().unwrap();
    let flags = ["--n", "64", "--k", "3", "--i", "4", "--sigma", "0.1", "--seed", "5"];
    let a = generate(dir.path(), "a.csv", &flags);
    let b = generate(dir.path(), "b.csv", &flags);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(
        fs::read(dir.path().join("a.truth.csv")).unwrap(),
        fs::read(dir.path().join("b.truth.csv")).unwrap()
    );
    let truth = parse_sidecar_csv(&fs::read_to_string(dir.path().join("a.truth.csv")).unwrap()).unwrap();
    assert_eq!(truth.spectrum.len(), 3);
    assert_eq!(truth.outliers.len(), 4);
    assert_eq!(parse_signal_csv(&fs::read_to_string(&a).unwrap()).unwrap().len(), 64);
}

#[test]
fn generate_zero_sparsity_gives_pure_noise() {
    let dir = tempfile::tempdir().unwrap();
    let side = dir.path().join("truth.csv");
    generate(dir.path(), "noise.csv", &["--k", "0", "--i", "3", "--sidecar", p(&side)]);
    let truth = parse_sidecar_csv(&fs::read_to_string(&side).unwrap()).unwrap();
    assert!(truth.spectrum.is_empty());
    assert_eq!(truth.outliers.len(), 3);
}

#[test]
fn generate_to_unwritable_path_fails() {
    let o = run(&["generate", "--output", "/nonexistent/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/dir/x.csv"));
}

#[test]
fn denoise_clean_signal_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let input = generate(dir.path(), "clean.csv", &["--k", "5", "--i", "0", "--sigma", "0"]);
    let output = dir.path().join("out.csv");
    let o = run(&["denoise", "--input", p(&input), "--output", p(&output), "--k", "5", "--m", "32"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let x = parse_signal_csv(&fs::read_to_string(&input).unwrap()).unwrap();
    let y = parse_signal_csv(&fs::read_to_string(&output).unwrap()).unwrap();
    for (a, b) in x.samples().iter().zip(y.samples()) {
        assert!((a - b).norm() <= 1e-8);
    }
    let mask = parse_mask_csv(&fs::read_to_string(dir.path().join("out.mask.csv")).unwrap()).unwrap();
    assert_eq!(mask, vec![true; 128]);
    let report = fs::read_to_string(dir.path().join("out.report.txt")).unwrap();
    assert!(report.contains("consensus        reached"));
    assert!(report.contains("consensus D      128"));
}

#[test]
fn denoise_masks_planted_outliers() {
    let dir = tempfile::tempdir().unwrap();
    let input = generate(dir.path(), "in.csv", &["--i", "8", "--offset-real", "100", "--seed", "3"]);
    let output = dir.path().join("out.csv");
    let mask_path = dir.path().join("m.csv");
    let o = run(&[
        "denoise", "--input", p(&input), "--output", p(&output), "--mask", p(&mask_path), "--k", "5", "--m", "32",
        "--seed", "1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mask = parse_mask_csv(&fs::read_to_string(&mask_path).unwrap()).unwrap();
    let truth = parse_sidecar_csv(&fs::read_to_string(dir.path().join("in.truth.csv")).unwrap()).unwrap();
    let caught = truth.outlier_positions().iter().filter(|&&i| !mask[i]).count();
    assert!(caught >= 7, "{caught} of 8");
}

#[test]
fn generate_denoise_score() {
    let dir = tempfile::tempdir().unwrap();
    let input = generate(
        dir.path(),
        "in.csv",
        &["--i", "8", "--offset-real", "100", "--sigma", "0.5", "--seed", "11"],
    );
    let output = dir.path().join("out.csv");
    let o = run(&[
        "denoise", "--input", p(&input), "--output", p(&output), "--k", "5", "--m", "32", "--sigma", "0.5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let truth = parse_sidecar_csv(&fs::read_to_string(dir.path().join("in.truth.csv")).unwrap()).unwrap();
    let clean = reconstruct_signal(&truth.sparse_spectrum(128).unwrap());
    let noisy = parse_signal_csv(&fs::read_to_string(&input).unwrap()).unwrap();
    let out = parse_signal_csv(&fs::read_to_string(&output).unwrap()).unwrap();
    let snr_in = snr_db(&clean, &noisy).unwrap();
    let snr_out = snr_db(&clean, &out).unwrap();
    // Unit tones under per-part σ=0.5 start near 10 dB before the outliers;
    // consensus over ~120 samples adds about 13.8 dB.
    assert!(snr_in < 0.0, "{snr_in}");
    assert!(snr_out > 18.0 && snr_out < 30.0, "{snr_out}");
}

#[test]
fn denoise_reports_parse_errors_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "index,re,im\n0,1,2\n1,oops,3\n").unwrap();
    let o = run(&["denoise", "--input", p(&input), "--output", p(&dir.path().join("o.csv")), "--k", "1", "--m", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn denoise_without_consensus_exits_two_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let input = generate(dir.path(), "in.csv", &["--i", "8", "--sigma", "0.5"]);
    let output = dir.path().join("out.csv");
    let o = run(&[
        "denoise", "--input", p(&input), "--output", p(&output), "--k", "5", "--m", "32", "--d", "0", "--nmax", "5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("warning"));
    assert_eq!(parse_signal_csv(&fs::read_to_string(&output).unwrap()).unwrap().len(), 128);
    assert!(dir.path().join("out.mask.csv").exists());
    assert!(fs::read_to_string(dir.path().join("out.report.txt")).unwrap().contains("not reached"));
}

#[test]
fn experiment_is_reproducible_and_summarized() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.txt");
    fs::write(&scenario, "# small\nn = 64\nk = 3\nm = 16\ni = 4\nsigma = 0.2\noffset_real = 50\nruns = 4\n").unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let plots = dir.path().join("plots");
    for (out, extra) in [(&a, vec!["--emit-plot", p(&plots)]), (&b, vec![])] {
        let mut args = vec!["experiment", "--scenario", p(&scenario), "--seed", "9", "--output", p(out)];
        args.extend(extra);
        let o = run(&args);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.as_bytes(), fs::read(&b).unwrap().as_slice());
    let table = parse_experiment_csv(&text).unwrap();
    assert_eq!(table.records.len(), 4);
    let mean_out = table.records.iter().map(|r| r.snr_out).sum::<f64>() / 4.0;
    assert!((table.summary.snr_out - mean_out).abs() <= 1e-9);
    for f in ["nit.csv", "consensus.csv", "snr.csv"] {
        assert_eq!(fs::read_to_string(plots.join(f)).unwrap().lines().count(), 5, "{f}");
    }
}

#[test]
fn experiment_single_run_to_stdout() {
    let args = ["experiment", "--n", "32", "--k", "2", "--m", "12", "--i", "2", "--runs", "1", "--seed", "4"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("run,N_it,SNR_in,SNR_in0,SNR_out0,SNR_out,D,reached\n0,"));
}

#[test]
fn experiment_warns_when_no_clean_subset_exists() {
    let o = run(&[
        "experiment", "--n", "32", "--k", "2", "--m", "20", "--i", "16", "--runs", "1", "--nmax", "20",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("clean samples"));
}
