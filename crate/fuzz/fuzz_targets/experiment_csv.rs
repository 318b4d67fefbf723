#![no_main]
use libfuzzer_sys::fuzz_target;
use ransac_cs::format::{parse_experiment_csv, write_experiment_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = parse_experiment_csv(text) {
        let again = parse_experiment_csv(&write_experiment_csv(&table.records, &table.summary)).unwrap();
        assert_eq!(table, again);
    }
});
