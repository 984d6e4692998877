#![no_main]

use libfuzzer_sys::fuzz_target;
use trifpp::scaling::Pi4Table;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = Pi4Table::parse(text) {
        let again = Pi4Table::parse(&t.to_csv_string()).expect("written tables parse");
        assert_eq!(again, t);
    }
});
