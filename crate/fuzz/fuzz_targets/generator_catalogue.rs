#![no_main]

use disklab::semigroup::load_generator_catalogue;
use disklab::Complex64;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(gens) = load_generator_catalogue(data) {
        for g in gens {
            let _ = g.eval(Complex64::new(0.25, -0.1));
        }
    }
});
