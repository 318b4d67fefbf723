use std::fs;
use std::path::PathBuf;

use num_complex::Complex64;
use proptest::prelude::*;

use ransac_cs::experiment::{BoundRule, ExperimentScenario, RunRecord, Summary};
use ransac_cs::format::{
    parse_experiment_csv, parse_mask_csv, parse_sidecar_csv, parse_signal_csv, write_experiment_csv, write_mask_csv,
    write_sidecar_csv, write_signal_csv, GroundTruth,
};
use ransac_cs::transform::ComplexSignal;
use ransac_cs::Error;

fn corpus(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

fn accepted<T, E>(seeds: &[(String, String)], parse: impl Fn(&str) -> Result<T, E>) -> Vec<&str> {
    seeds
        .iter()
        .filter(|(_, text)| parse(text).is_ok())
        .map(|(name, _)| name.as_str())
        .collect()
}

#[test]
fn signal_corpus() {
    let seeds = corpus("signal_csv");
    for (_, text) in &seeds {
        if let Ok(x) = parse_signal_csv(text) {
            assert_eq!(parse_signal_csv(&write_signal_csv(&x)).unwrap(), x);
        }
    }
    assert_eq!(accepted(&seeds, parse_signal_csv), ["seed_basic", "seed_crlf"]);
}

#[test]
fn mask_corpus() {
    let seeds = corpus("mask_csv");
    for (_, text) in &seeds {
        if let Ok(m) = parse_mask_csv(text) {
            assert_eq!(parse_mask_csv(&write_mask_csv(&m)).unwrap(), m);
        }
    }
    assert_eq!(accepted(&seeds, parse_mask_csv), ["seed_basic"]);
}

#[test]
fn sidecar_corpus() {
    let seeds = corpus("sidecar_csv");
    for (_, text) in &seeds {
        if let Ok(t) = parse_sidecar_csv(text) {
            assert_eq!(parse_sidecar_csv(&write_sidecar_csv(&t)).unwrap(), t);
        }
    }
    assert_eq!(accepted(&seeds, parse_sidecar_csv), ["seed_basic", "seed_empty"]);
}

#[test]
fn scenario_corpus() {
    let seeds = corpus("scenario");
    for (_, text) in &seeds {
        if let Ok(s) = ExperimentScenario::parse(text) {
            assert_eq!(ExperimentScenario::parse(&s.to_key_values()).unwrap(), s);
        }
    }
    assert_eq!(accepted(&seeds, ExperimentScenario::parse), ["seed_fixed", "seed_forced"]);
    let forced = ExperimentScenario::parse(&seeds.iter().find(|(n, _)| n == "seed_forced").unwrap().1).unwrap();
    assert_eq!(forced.outlier_offset, Complex64::new(100.0, 0.0));
    assert_eq!(forced.bound, BoundRule::Auto);
    assert_eq!(forced.consensus_threshold(), 96);
    match ExperimentScenario::parse(&seeds.iter().find(|(n, _)| n == "seed_bad_value").unwrap().1) {
        Err(Error::Parse { line: 2, .. }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn experiment_corpus() {
    let seeds = corpus("experiment_csv");
    for (_, text) in &seeds {
        if let Ok(t) = parse_experiment_csv(text) {
            let again = parse_experiment_csv(&write_experiment_csv(&t.records, &t.summary)).unwrap();
            assert_eq!(again, t);
        }
    }
    assert_eq!(accepted(&seeds, parse_experiment_csv), ["seed_avg_only", "seed_basic"]);
}

#[test]
fn huge_scenario_values_are_rejected_without_panic() {
    let s = ExperimentScenario::parse("n = 18446744073709551615\nk = 18446744073709551615\nm = 1").unwrap();
    assert!(s.validate().is_err());
    let s = ExperimentScenario::parse("n = 18446744073709551615\nk = 3689348814741910324\nm = 18446744073709551615")
        .unwrap();
    let _ = s.validate();
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -1e3f64..1e3,
    ]
}

proptest! {
    #[test]
    fn signal_text_round_trips_bit_exact(v in prop::collection::vec((finite(), finite()), 1..40)) {
        let x = ComplexSignal::new(v.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap();
        let y = parse_signal_csv(&write_signal_csv(&x)).unwrap();
        for (a, b) in x.samples().iter().zip(y.samples()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn mask_text_round_trips(m in prop::collection::vec(any::<bool>(), 0..64)) {
        prop_assert_eq!(parse_mask_csv(&write_mask_csv(&m)).unwrap(), m);
    }

    #[test]
    fn sidecar_text_round_trips(
        spec in prop::collection::btree_map(0usize..1000, (finite(), finite()), 0..10),
        out in prop::collection::btree_map(0usize..1000, (finite(), finite()), 0..10),
    ) {
        let conv = |m: std::collections::BTreeMap<usize, (f64, f64)>| {
            m.into_iter().map(|(i, (a, b))| (i, Complex64::new(a, b))).collect::<Vec<_>>()
        };
        let t = GroundTruth { spectrum: conv(spec), outliers: conv(out) };
        prop_assert_eq!(parse_sidecar_csv(&write_sidecar_csv(&t)).unwrap(), t);
    }

    #[test]
    fn summary_row_is_column_mean(
        rows in prop::collection::vec((1usize..100_000, -40.0f64..40.0, 0.0f64..30.0, 0usize..256, any::<bool>()), 1..30)
    ) {
        let records: Vec<RunRecord> = rows
            .iter()
            .enumerate()
            .map(|(i, &(t, a, b, d, ok))| RunRecord {
                run_index: i,
                trials: t,
                snr_in: a,
                snr_in0: b,
                snr_out0: b + 8.0,
                snr_out: b + 13.0,
                consensus_size: d,
                reached_consensus: ok,
            })
            .collect();
        let text = write_experiment_csv(&records, &Summary::from_records(&records).unwrap());
        let table = parse_experiment_csv(&text).unwrap();
        prop_assert_eq!(&table.records, &records);
        let n = records.len() as f64;
        let mean_t = records.iter().map(|r| r.trials as f64).sum::<f64>() / n;
        let mean_in = records.iter().map(|r| r.snr_in).sum::<f64>() / n;
        let mean_d = records.iter().map(|r| r.consensus_size as f64).sum::<f64>() / n;
        prop_assert!((table.summary.trials - mean_t).abs() <= 1e-9 * mean_t.max(1.0));
        prop_assert!((table.summary.snr_in - mean_in).abs() <= 1e-9);
        prop_assert!((table.summary.consensus_size - mean_d).abs() <= 1e-9 * mean_d.max(1.0));
    }

    #[test]
    fn parsers_never_panic(text in "\\PC{0,200}") {
        let _ = parse_signal_csv(&text);
        let _ = parse_mask_csv(&text);
        let _ = parse_sidecar_csv(&text);
        let _ = parse_experiment_csv(&text);
        let _ = ExperimentScenario::parse(&text);
    }
}
