//! Replays the checked-in fuzz seeds through the same entry points.

use disklab::funclib::TaylorSeries;
use disklab::lab::Scenario;
use disklab::semigroup::load_generator_catalogue;
use disklab::spaces::NormEstimate;
use std::path::{Path, PathBuf};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn taylor_text_seeds() {
    let mut parsed = 0;
    for (_, bytes) in seeds("taylor_text") {
        if let Ok(t) = TaylorSeries::from_text(&String::from_utf8_lossy(&bytes)) {
            assert_eq!(TaylorSeries::from_text(&t.to_text()).unwrap(), t);
            parsed += 1;
        }
    }
    assert!(parsed >= 2);
}

#[test]
fn generator_catalogue_seeds() {
    for (path, bytes) in seeds("generator_catalogue") {
        let text = String::from_utf8_lossy(&bytes);
        let res = load_generator_catalogue(&text);
        if path.ends_with("builtin") {
            assert_eq!(res.unwrap().len(), 6);
        }
    }
}

#[test]
fn scenario_seeds() {
    for (path, bytes) in seeds("scenario") {
        let res = Scenario::from_toml(&String::from_utf8_lossy(&bytes), "/nonexistent");
        assert!(res.is_ok(), "{}: {:?}", path.display(), res.err());
    }
}

#[test]
fn norm_estimate_seeds() {
    for (path, bytes) in seeds("norm_estimate_json") {
        if let Ok(est) = NormEstimate::from_json(&String::from_utf8_lossy(&bytes)) {
            assert!(est.is_consistent(), "{}", path.display());
            assert_eq!(NormEstimate::from_json(&est.to_json().unwrap()).unwrap(), est);
        }
    }
}

mod mutations {
    use super::*;
    use proptest::prelude::*;

    fn all_seeds() -> Vec<String> {
        ["taylor_text", "generator_catalogue", "scenario", "norm_estimate_json"]
            .iter()
            .flat_map(|t| seeds(t))
            .map(|(_, b)| String::from_utf8_lossy(&b).into_owned())
            .collect()
    }

    fn feed(text: &str) {
        let _ = TaylorSeries::from_text(text);
        let _ = load_generator_catalogue(text);
        let _ = Scenario::from_toml(text, "/nonexistent");
        let _ = NormEstimate::from_json(text);
    }

    proptest! {
        #[test]
        fn parsers_never_panic_on_noise(text in "\\PC{0,200}") {
            feed(&text);
        }

        #[test]
        fn parsers_never_panic_on_mutated_seeds(pick in any::<prop::sample::Index>(), at in any::<prop::sample::Index>(),
                                               cut in 0usize..64, insert in "\\PC{0,16}") {
            let pool = all_seeds();
            let seed = &pool[pick.index(pool.len())];
            let chars: Vec<char> = seed.chars().collect();
            let i = at.index(chars.len() + 1);
            let j = (i + cut).min(chars.len());
            let mutated: String = chars[..i].iter().chain(insert.chars().collect::<Vec<_>>().iter()).chain(chars[j..].iter()).collect();
            feed(&mutated);
        }
    }
}
