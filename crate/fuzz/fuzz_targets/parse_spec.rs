#![no_main]

use libfuzzer_sys::fuzz_target;
use qhat_cli::parse_spec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = parse_spec(text) {
        let again = parse_spec(&spec.to_string()).expect("canonical text reparses");
        assert_eq!(spec, again);
    }
});
