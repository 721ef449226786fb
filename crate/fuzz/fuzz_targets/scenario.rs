#![no_main]

use disklab::lab::Scenario;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    // relative catalogue paths resolve into an empty directory
    let _ = Scenario::from_toml(data, "/nonexistent");
});
