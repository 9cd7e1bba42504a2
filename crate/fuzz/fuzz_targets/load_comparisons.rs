#![no_main]

use crowdelo::dataset::{load_comparisons, write_comparisons};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(dataset) = load_comparisons(data) else {
        return;
    };
    for r in dataset.records() {
        assert!(r.validate().is_ok());
        assert!(dataset.items().contains(&r.item_a));
        assert!(dataset.items().contains(&r.item_b));
    }
    // Whatever loads must survive a write and reload unchanged.
    let mut out = Vec::new();
    write_comparisons(&dataset, &mut out).unwrap();
    let again = load_comparisons(out.as_slice()).unwrap();
    assert_eq!(again.records(), dataset.records());
});
