#![no_main]

use disklab::funclib::TaylorSeries;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(t) = TaylorSeries::from_text(data) {
        // whatever parses must survive a round trip
        let back = TaylorSeries::from_text(&t.to_text()).expect("re-parse");
        assert_eq!(back.coeffs.len(), t.coeffs.len());
    }
});
