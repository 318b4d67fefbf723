#![no_main]
use libfuzzer_sys::fuzz_target;
use ransac_cs::format::{parse_sidecar_csv, write_sidecar_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(truth) = parse_sidecar_csv(text) {
        assert_eq!(parse_sidecar_csv(&write_sidecar_csv(&truth)).unwrap(), truth);
        // Out-of-range or duplicate entries must be rejected, not panic.
        let _ = truth.sparse_spectrum(64);
    }
});
