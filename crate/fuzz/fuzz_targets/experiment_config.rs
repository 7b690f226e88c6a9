#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = gcm::ExperimentConfig::from_json(s) {
        let text = config.to_json().expect("valid config must serialize");
        let back =
            gcm::ExperimentConfig::from_json(&text).expect("serialized config must re-parse");
        assert_eq!(back, config);
    }
});
