#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let _ = burstsep::bench::SweepConfig::from_json(text);
});
