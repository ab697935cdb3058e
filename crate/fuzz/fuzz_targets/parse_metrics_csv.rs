#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(records) = burstsep::bench::parse_csv(text) {
        let mut out = Vec::new();
        let _ = burstsep::bench::write_csv(&records, &mut out);
    }
});
