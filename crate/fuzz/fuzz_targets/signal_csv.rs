#![no_main]
use libfuzzer_sys::fuzz_target;
use ransac_cs::format::{parse_signal_csv, write_signal_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(signal) = parse_signal_csv(text) {
        let again = parse_signal_csv(&write_signal_csv(&signal)).expect("written signal must parse");
        assert_eq!(signal, again);
    }
});
