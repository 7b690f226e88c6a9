#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(scenario) = gcm::io::scenario_from_json(s) {
        let text = gcm::io::scenario_to_json(&scenario).expect("valid scenario must serialize");
        let back = gcm::io::scenario_from_json(&text).expect("serialized scenario must re-parse");
        assert_eq!(back, scenario);
    }
});
