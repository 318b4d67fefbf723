//! Text file formats: signal, inlier-mask, ground-truth and experiment CSVs,
//! plus `key = value` scenario files.
//!
//! Floats are written in shortest round-trip form, so a written file parses
//! back to the identical bits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::experiment::{ExperimentReport, RunRecord, Summary};
use crate::recovery::SparseSpectrum;
use crate::transform::ComplexSignal;

pub const SIGNAL_HEADER: &str = "index,re,im";
pub const MASK_HEADER: &str = "index,inlier";
pub const SIDECAR_HEADER: &str = "kind,index,re,im";
pub const EXPERIMENT_HEADER: &str = "run,N_it,SNR_in,SNR_in0,SNR_out0,SNR_out,D,reached";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Non-blank lines with 1-based line numbers, trailing `\r` removed.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn fields<'a>(line: usize, row: &'a str, count: usize) -> Result<Vec<&'a str>> {
    let f: Vec<&str> = row.split(',').map(str::trim).collect();
    if f.len() != count {
        return Err(parse_err(line, format!("expected {count} fields, found {}", f.len())));
    }
    Ok(f)
}

fn parse_f64(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| parse_err(line, format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value: {s:?}")));
    }
    Ok(v)
}

/// Like [`parse_f64`] but accepts `inf`, as written for an exact estimate.
fn parse_db(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| parse_err(line, format!("not a number: {s:?}")))?;
    if v.is_nan() {
        return Err(parse_err(line, "NaN value"));
    }
    Ok(v)
}

fn parse_usize(line: usize, s: &str) -> Result<usize> {
    s.parse().map_err(|_| parse_err(line, format!("not an index: {s:?}")))
}

fn expect_header<'a>(it: &mut impl Iterator<Item = (usize, &'a str)>, header: &str) -> Result<()> {
    match it.next() {
        Some((_, h)) if h.trim() == header => Ok(()),
        Some((line, h)) => Err(parse_err(line, format!("expected header {header:?}, found {h:?}"))),
        None => Err(parse_err(1, "empty file")),
    }
}

fn expect_index(line: usize, s: &str, want: usize) -> Result<()> {
    let got = parse_usize(line, s)?;
    if got != want {
        return Err(parse_err(line, format!("expected index {want}, found {got}")));
    }
    Ok(())
}

pub fn parse_signal_csv(text: &str) -> Result<ComplexSignal> {
    let mut it = lines(text);
    expect_header(&mut it, SIGNAL_HEADER)?;
    let mut samples = Vec::new();
    for (line, row) in it {
        let f = fields(line, row, 3)?;
        expect_index(line, f[0], samples.len())?;
        samples.push(Complex64::new(parse_f64(line, f[1])?, parse_f64(line, f[2])?));
    }
    if samples.is_empty() {
        return Err(parse_err(1, "no samples"));
    }
    ComplexSignal::new(samples)
}

pub fn write_signal_csv(signal: &ComplexSignal) -> String {
    let mut out = String::with_capacity(48 * signal.len());
    out.push_str(SIGNAL_HEADER);
    out.push('\n');
    for (i, z) in signal.samples().iter().enumerate() {
        let _ = writeln!(out, "{i},{:?},{:?}", z.re, z.im);
    }
    out
}

pub fn parse_mask_csv(text: &str) -> Result<Vec<bool>> {
    let mut it = lines(text);
    expect_header(&mut it, MASK_HEADER)?;
    let mut mask = Vec::new();
    for (line, row) in it {
        let f = fields(line, row, 2)?;
        expect_index(line, f[0], mask.len())?;
        mask.push(match f[1] {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(line, format!("inlier flag must be 0 or 1, found {other:?}"))),
        });
    }
    Ok(mask)
}

pub fn write_mask_csv(mask: &[bool]) -> String {
    let mut out = String::from(MASK_HEADER);
    out.push('\n');
    for (i, &b) in mask.iter().enumerate() {
        let _ = writeln!(out, "{i},{}", u8::from(b));
    }
    out
}

/// Planted spectrum entries and outlier values of a generated signal.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub spectrum: Vec<(usize, Complex64)>,
    pub outliers: Vec<(usize, Complex64)>,
}

impl GroundTruth {
    pub fn new(spectrum: &SparseSpectrum, impulsive: &ComplexSignal, positions: &[usize]) -> Self {
        Self {
            spectrum: spectrum.entries().to_vec(),
            outliers: positions.iter().map(|&p| (p, impulsive.samples()[p])).collect(),
        }
    }

    pub fn outlier_positions(&self) -> Vec<usize> {
        self.outliers.iter().map(|&(p, _)| p).collect()
    }

    /// Rebuilds the sparse spectrum for a signal of length `n`.
    pub fn sparse_spectrum(&self, n: usize) -> Result<SparseSpectrum> {
        SparseSpectrum::new(n, self.spectrum.clone())
    }
}

pub fn parse_sidecar_csv(text: &str) -> Result<GroundTruth> {
    let mut it = lines(text);
    expect_header(&mut it, SIDECAR_HEADER)?;
    let mut truth = GroundTruth {
        spectrum: Vec::new(),
        outliers: Vec::new(),
    };
    for (line, row) in it {
        let f = fields(line, row, 4)?;
        let entry = (
            parse_usize(line, f[1])?,
            Complex64::new(parse_f64(line, f[2])?, parse_f64(line, f[3])?),
        );
        let list = match f[0] {
            "spectrum" => &mut truth.spectrum,
            "outlier" => &mut truth.outliers,
            other => return Err(parse_err(line, format!("unknown kind {other:?}"))),
        };
        if list.iter().any(|&(i, _)| i == entry.0) {
            return Err(parse_err(line, format!("duplicate {} index {}", f[0], entry.0)));
        }
        list.push(entry);
    }
    Ok(truth)
}

pub fn write_sidecar_csv(truth: &GroundTruth) -> String {
    let mut out = String::from(SIDECAR_HEADER);
    out.push('\n');
    for (kind, list) in [("spectrum", &truth.spectrum), ("outlier", &truth.outliers)] {
        for (i, z) in list {
            let _ = writeln!(out, "{kind},{i},{:?},{:?}", z.re, z.im);
        }
    }
    out
}

/// Splits `key = value` lines, skipping blanks and `#` comments. Keys are
/// lower-cased. Returns `(line, key, value)`.
pub fn key_values(text: &str) -> Result<Vec<(usize, &str, &str)>> {
    let mut out = Vec::new();
    for (line, raw) in lines(text) {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected key = value, found {body:?}")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(parse_err(line, "empty key or value"));
        }
        if k.chars().any(|c| c.is_ascii_uppercase()) {
            return Err(parse_err(line, format!("keys are lower case, found {k:?}")));
        }
        out.push((line, k, v));
    }
    Ok(out)
}

/// Per-run rows followed by an `avg` row, columns in table order.
pub fn write_experiment_csv(records: &[RunRecord], summary: &Summary) -> String {
    let mut out = String::from(EXPERIMENT_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{:?},{:?},{:?},{:?},{},{}",
            r.run_index,
            r.trials,
            r.snr_in,
            r.snr_in0,
            r.snr_out0,
            r.snr_out,
            r.consensus_size,
            u8::from(r.reached_consensus)
        );
    }
    let s = summary;
    let _ = writeln!(
        out,
        "avg,{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
        s.trials, s.snr_in, s.snr_in0, s.snr_out0, s.snr_out, s.consensus_size, s.consensus_rate
    );
    out
}

/// Parsed experiment CSV. The summary is taken from the `avg` row as written.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentTable {
    pub records: Vec<RunRecord>,
    pub summary: Summary,
}

pub fn parse_experiment_csv(text: &str) -> Result<ExperimentTable> {
    let mut it = lines(text);
    expect_header(&mut it, EXPERIMENT_HEADER)?;
    let mut records = Vec::new();
    let mut summary = None;
    for (line, row) in it {
        if summary.is_some() {
            return Err(parse_err(line, "rows after the avg row"));
        }
        let f = fields(line, row, 8)?;
        if f[0] == "avg" {
            let v = f[1..]
                .iter()
                .map(|s| parse_db(line, s))
                .collect::<Result<Vec<f64>>>()?;
            summary = Some(Summary {
                trials: v[0],
                snr_in: v[1],
                snr_in0: v[2],
                snr_out0: v[3],
                snr_out: v[4],
                consensus_size: v[5],
                consensus_rate: v[6],
            });
            continue;
        }
        expect_index(line, f[0], records.len())?;
        records.push(RunRecord {
            run_index: records.len(),
            trials: parse_usize(line, f[1])?,
            snr_in: parse_db(line, f[2])?,
            snr_in0: parse_db(line, f[3])?,
            snr_out0: parse_db(line, f[4])?,
            snr_out: parse_db(line, f[5])?,
            consensus_size: parse_usize(line, f[6])?,
            reached_consensus: match f[7] {
                "0" => false,
                "1" => true,
                other => return Err(parse_err(line, format!("reached must be 0 or 1, found {other:?}"))),
            },
        });
    }
    let summary = summary.ok_or_else(|| parse_err(1, "missing avg row"))?;
    Ok(ExperimentTable { records, summary })
}

/// Writes `nit.csv`, `consensus.csv` and `snr.csv` (one row per run) into
/// `dir`, creating it if needed.
pub fn write_plot_data(dir: &Path, report: &ExperimentReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    let predicted = report.predicted_trials().unwrap_or(f64::NAN);
    let mut nit = String::from("run,N_it,predicted\n");
    let mut cons = String::from("run,D\n");
    let mut snr = String::from("run,SNR_in,SNR_in0,SNR_out0,SNR_out\n");
    for r in &report.records {
        let _ = writeln!(nit, "{},{},{:?}", r.run_index, r.trials, predicted);
        let _ = writeln!(cons, "{},{}", r.run_index, r.consensus_size);
        let _ = writeln!(
            snr,
            "{},{:?},{:?},{:?},{:?}",
            r.run_index, r.snr_in, r.snr_in0, r.snr_out0, r.snr_out
        );
    }
    fs::write(dir.join("nit.csv"), nit)?;
    fs::write(dir.join("consensus.csv"), cons)?;
    fs::write(dir.join("snr.csv"), snr)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn signal_round_trip_is_bit_exact() {
        let x = ComplexSignal::new(vec![c(0.1, -0.0), c(1e-300, 3.0f64.sqrt()), c(-7.0, f64::MAX)]).unwrap();
        let text = write_signal_csv(&x);
        assert!(text.starts_with("index,re,im\n0,0.1,-0.0\n"));
        let y = parse_signal_csv(&text).unwrap();
        for (a, b) in x.samples().iter().zip(y.samples()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn signal_parse_errors() {
        let line_of = |t: &str| match parse_signal_csv(t) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line_of(""), 1);
        assert_eq!(line_of("index,re,im\n"), 1);
        assert_eq!(line_of("i,r,j\n0,1,2\n"), 1);
        assert_eq!(line_of("index,re,im\n0,1,2\n2,1,2\n"), 3);
        assert_eq!(line_of("index,re,im\n0,1,2\n1,abc,2\n"), 3);
        assert_eq!(line_of("index,re,im\n0,1\n"), 2);
        assert_eq!(line_of("index,re,im\n0,inf,0\n"), 2);
        assert_eq!(line_of("index,re,im\n0,1,2,3\n"), 2);
        assert!(parse_signal_csv("index,re,im\r\n0, 1 ,2\r\n\n1,3,4\n").is_ok());
    }

    #[test]
    fn mask_round_trip() {
        let m = vec![true, false, true];
        assert_eq!(write_mask_csv(&m), "index,inlier\n0,1\n1,0\n2,1\n");
        assert_eq!(parse_mask_csv(&write_mask_csv(&m)).unwrap(), m);
        assert!(parse_mask_csv("index,inlier\n0,2\n").is_err());
    }

    #[test]
    fn sidecar_round_trip() {
        let t = GroundTruth {
            spectrum: vec![(3, c(128.0, 0.5)), (9, c(-1.0, 2.0))],
            outliers: vec![(0, c(100.25, -3.0))],
        };
        let text = write_sidecar_csv(&t);
        assert_eq!(parse_sidecar_csv(&text).unwrap(), t);
        assert_eq!(t.outlier_positions(), vec![0]);
        assert_eq!(t.sparse_spectrum(16).unwrap().support(), vec![3, 9]);
        let empty = GroundTruth {
            spectrum: vec![],
            outliers: vec![],
        };
        assert_eq!(write_sidecar_csv(&empty), "kind,index,re,im\n");
        assert!(parse_sidecar_csv("kind,index,re,im\nnoise,1,0,0\n").is_err());
        assert!(parse_sidecar_csv("kind,index,re,im\noutlier,1,0,0\noutlier,1,0,0\n").is_err());
    }

    #[test]
    fn key_value_lines() {
        let kv = key_values("# header\n\nn = 128 # trailing\nd=auto\n").unwrap();
        assert_eq!(kv, vec![(3, "n", "128"), (4, "d", "auto")]);
        assert!(matches!(key_values("n 128"), Err(Error::Parse { line: 1, .. })));
        assert!(key_values("n =").is_err());
        assert!(key_values("N = 3").is_err());
    }

    #[test]
    fn experiment_round_trip() {
        let records = vec![
            RunRecord {
                run_index: 0,
                trials: 3,
                snr_in: -1.5,
                snr_in0: 13.0,
                snr_out0: 21.0,
                snr_out: f64::INFINITY,
                consensus_size: 120,
                reached_consensus: true,
            },
            RunRecord {
                run_index: 1,
                trials: 100000,
                snr_in: 0.25,
                snr_in0: 12.5,
                snr_out0: 20.0,
                snr_out: 25.0,
                consensus_size: 40,
                reached_consensus: false,
            },
        ];
        let summary = Summary::from_records(&records).unwrap();
        let text = write_experiment_csv(&records, &summary);
        assert!(text.starts_with("run,N_it,SNR_in,SNR_in0,SNR_out0,SNR_out,D,reached\n0,3,"));
        assert!(text.lines().last().unwrap().starts_with("avg,50001.5,"));
        let table = parse_experiment_csv(&text).unwrap();
        assert_eq!(table.records, records);
        assert_eq!(table.summary, summary);
        assert!(parse_experiment_csv("run,N_it,SNR_in,SNR_in0,SNR_out0,SNR_out,D,reached\n").is_err());
    }
}
