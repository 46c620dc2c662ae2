#![no_main]

use infodesign::io::{parse_instance_str, Instance, InstanceFile};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(instance) = parse_instance_str(text) else { return };
    // anything accepted must survive a canonical round trip
    let file = InstanceFile::from_json(text).expect("parsed once already");
    let again = parse_instance_str(&file.to_json()).expect("canonical form parses");
    match (&instance, &again) {
        (Instance::Game { raw: a, .. }, Instance::Game { raw: b, .. }) => assert_eq!(a, b),
        (Instance::Auction { raw: a, .. }, Instance::Auction { raw: b, .. }) => assert_eq!(a, b),
        _ => panic!("kind changed on round trip"),
    }
});
