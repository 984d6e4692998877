#![no_main]

use libfuzzer_sys::fuzz_target;
use trifpp::montecarlo::ExperimentSpec;
use trifpp::records::SweepConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = SweepConfig::parse(text) {
        // `table` keys would touch the filesystem
        if cfg.defaults.contains_key("table") || cfg.sections.iter().any(|(_, m)| m.contains_key("table")) {
            return;
        }
        let _ = ExperimentSpec::from_sweep(&cfg);
    }
});
