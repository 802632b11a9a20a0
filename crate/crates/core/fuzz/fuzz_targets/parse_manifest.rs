#![no_main]

use libfuzzer_sys::fuzz_target;
use netobs::harness::parse_manifest;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(parsed) = parse_manifest(text) {
        assert_eq!(parse_manifest(&parsed.to_text()).expect("printed form parses"), parsed);
    }
});
