#![no_main]

use leo_pla::fusion::FusionRule;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rule) = text.parse::<FusionRule>() {
        assert_eq!(rule.to_string().parse::<FusionRule>().unwrap(), rule);
    }
    let _ = serde_json::from_str::<FusionRule>(text);
});
