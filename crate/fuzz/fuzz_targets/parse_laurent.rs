#![no_main]

use libfuzzer_sys::fuzz_target;
use qhat_core::qarith::parse_laurent;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_laurent(text) {
        assert_eq!(parse_laurent(&p.to_string()).unwrap(), p);
    }
});
