#![no_main]

use infodesign::io::parse_sampler_spec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_sampler_spec(text);
    }
});
