#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(result) = burstsep::SeparationResult::from_json(text) {
        let again = burstsep::SeparationResult::from_json(&result.to_json().unwrap()).unwrap();
        assert_eq!(again.mask, result.mask);
    }
});
