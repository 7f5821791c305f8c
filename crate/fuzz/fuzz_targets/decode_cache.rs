#![no_main]

use libfuzzer_sys::fuzz_target;
use qhat_cli::cache::{decode, unframe};

fuzz_target!(|data: &[u8]| {
    let _ = unframe(data);
    let _ = decode(data);
});
