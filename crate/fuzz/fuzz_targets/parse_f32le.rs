#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(frame) = burstsep::siggen::parse_f32le(data) {
        assert_eq!(frame.len() * 8, data.len());
    }
});
