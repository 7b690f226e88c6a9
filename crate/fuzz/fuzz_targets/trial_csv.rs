#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ds) = gcm::io::parse_trial_csv(s, 1) {
        let text = gcm::io::trial_csv_to_string(&ds).expect("parsed trial must re-serialize");
        let back = gcm::io::parse_trial_csv(&text, 1).expect("serialized trial must re-parse");
        assert_eq!(back, ds);
    }
});
