#![no_main]

use libfuzzer_sys::fuzz_target;

// The config parser must never panic: any byte soup either yields a clean
// key/value map or a descriptive error.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = openbo_cli::parse_config(text);
    }
});
