#![no_main]

use libfuzzer_sys::fuzz_target;
use trifpp::Configuration;

fuzz_target!(|data: &[u8]| {
    // accepted dumps must re-encode byte for byte
    if let Ok(c) = Configuration::decode(data) {
        assert_eq!(c.encode(), data);
    }
});
