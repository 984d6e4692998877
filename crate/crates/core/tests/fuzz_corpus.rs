//! Replays the checked-in fuzz seeds through the decoders.

use std::fs;
use std::path::PathBuf;

use trifpp::montecarlo::{arm_kind_name, parse_arm_kind};
use trifpp::records::{parse_csv, parse_json, to_csv_string, to_json_string, SweepConfig};
use trifpp::scaling::Pi4Table;
use trifpp::Configuration;

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<_> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(!files.is_empty(), "no seeds in {}", dir.display());
    files.into_iter().map(|p| fs::read(p).unwrap()).collect()
}

fn text(b: &[u8]) -> &str {
    std::str::from_utf8(b).unwrap()
}

#[test]
fn config_dump_seeds_decode_and_reencode() {
    for s in seeds("config_dump") {
        assert_eq!(Configuration::decode(&s).unwrap().encode(), s);
    }
}

#[test]
fn pi4_seeds_parse() {
    for s in seeds("pi4_table_csv") {
        let t = Pi4Table::parse(text(&s)).unwrap();
        assert_eq!(Pi4Table::parse(&t.to_csv_string()).unwrap(), t);
    }
}

#[test]
fn result_seeds_parse() {
    for s in seeds("results_csv") {
        let recs = parse_csv(text(&s)).unwrap();
        assert_eq!(to_csv_string(&recs), text(&s));
    }
    for s in seeds("results_json") {
        let recs = parse_json(text(&s)).unwrap();
        assert_eq!(parse_json(&to_json_string(&recs)).unwrap(), recs);
    }
}

#[test]
fn sweep_and_arm_seeds_parse() {
    for s in seeds("sweep_config") {
        SweepConfig::parse(text(&s)).unwrap();
    }
    for s in seeds("arm_kind") {
        let k = parse_arm_kind(text(&s)).unwrap();
        assert_eq!(arm_kind_name(k), text(&s));
    }
}

#[test]
fn decoders_reject_truncations() {
    for s in seeds("config_dump") {
        for cut in [0, 8, 40, s.len() - 1] {
            assert!(Configuration::decode(&s[..cut]).is_err());
        }
    }
}
