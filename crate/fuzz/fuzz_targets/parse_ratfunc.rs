#![no_main]

use libfuzzer_sys::fuzz_target;
use qhat_core::qarith::parse_ratfunc;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_ratfunc(text) {
        // Display is canonical, so it must reparse to the same value.
        assert_eq!(parse_ratfunc(&f.to_string()).unwrap(), f);
    }
});
