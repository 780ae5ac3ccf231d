#![no_main]

use leo_pla::harness::Scenario;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(scn) = Scenario::parse(data) {
        // anything that validates must survive a round trip and hash
        let again = Scenario::parse(scn.to_json_pretty().as_bytes()).expect("round trip");
        assert_eq!(again.config_hash(), scn.config_hash());
    }
});
