#![no_main]

use libfuzzer_sys::fuzz_target;
use trifpp::montecarlo::{arm_kind_name, parse_arm_kind};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(k) = parse_arm_kind(text) {
        assert_eq!(parse_arm_kind(&arm_kind_name(k)).unwrap(), k);
    }
});
