#![no_main]

use crowdelo::dataset::load_ratings;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ratings) = load_ratings(data) {
        assert!(ratings.values().all(|r| r.is_finite()));
        assert!(ratings.keys().all(|k| !k.is_empty()));
    }
});
