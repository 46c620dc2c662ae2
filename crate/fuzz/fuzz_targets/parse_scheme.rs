#![no_main]

use infodesign::io::SchemeFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(scheme) = SchemeFile::from_json(text) else { return };
    let canonical = scheme.to_json();
    let again = SchemeFile::from_json(&canonical).expect("canonical form parses");
    assert_eq!(again.to_json(), canonical);
});
