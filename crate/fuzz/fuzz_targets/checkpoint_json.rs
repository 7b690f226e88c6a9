#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(clf) = gcm::io::checkpoint_from_json(s) {
        let text = gcm::io::checkpoint_to_json(&clf).expect("valid checkpoint must serialize");
        let back =
            gcm::io::checkpoint_from_json(&text).expect("serialized checkpoint must re-parse");
        assert_eq!(back.state(), clf.state());
        assert_eq!(back.mode(), clf.mode());
        assert_eq!(back.trial_counter(), clf.trial_counter());
    }
});
