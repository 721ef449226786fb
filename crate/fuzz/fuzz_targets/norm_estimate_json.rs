#![no_main]

use disklab::spaces::NormEstimate;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(est) = NormEstimate::from_json(text) {
        let again = est.to_json().expect("serialize");
        let _ = NormEstimate::from_json(&again);
        let _ = est.is_consistent();
    }
});
