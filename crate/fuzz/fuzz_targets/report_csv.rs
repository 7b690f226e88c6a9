#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(report) = gcm::ExperimentReport::from_csv(s) {
        let text = report
            .to_csv_string()
            .expect("parsed report must re-serialize");
        let back = gcm::ExperimentReport::from_csv(&text).expect("serialized report must re-parse");
        assert_eq!(back, report);
    }
});
