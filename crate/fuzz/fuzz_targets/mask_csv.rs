#![no_main]
use libfuzzer_sys::fuzz_target;
use ransac_cs::format::{parse_mask_csv, write_mask_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(mask) = parse_mask_csv(text) {
        assert_eq!(parse_mask_csv(&write_mask_csv(&mask)).unwrap(), mask);
    }
});
