#![no_main]

use crowdelo::sim::{SimParams, Sweep};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(sweep) = text.parse::<Sweep>() else {
        return;
    };
    assert!(!sweep.values.is_empty());
    assert!(sweep.values.iter().all(|v| v.is_finite()));
    assert_eq!(
        sweep
            .parameter
            .name()
            .parse::<crowdelo::sim::SweepParameter>()
            .unwrap(),
        sweep.parameter
    );
    let mut params = SimParams::default();
    for &v in &sweep.values {
        let _ = params.set(sweep.parameter, v);
    }
});
