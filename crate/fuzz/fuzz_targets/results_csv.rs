#![no_main]

use libfuzzer_sys::fuzz_target;
use trifpp::records::{parse_csv, to_csv_string};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(recs) = parse_csv(text) {
        let _ = parse_csv(&to_csv_string(&recs)).expect("written records parse");
    }
});
