#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(state) = gcm::io::state_from_json(s) {
        let text = gcm::io::state_to_json(&state).expect("valid state must serialize");
        let back = gcm::io::state_from_json(&text).expect("serialized state must re-parse");
        assert_eq!(back, state);
    }
});
