#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(frame) = burstsep::siggen::parse_csv(text) {
        let mut out = Vec::new();
        burstsep::siggen::write_csv(&mut out, &frame).unwrap();
        let back = burstsep::siggen::parse_csv(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(back.samples(), frame.samples());
    }
});
