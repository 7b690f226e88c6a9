#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(v) = gcm::io::parse_hex_f64(s) {
        // Anything the parser accepts must survive a write/read cycle with
        // the exact same bits.
        let encoded = gcm::io::encode_hex_f64(v).expect("parsed value must re-encode");
        let back = gcm::io::parse_hex_f64(&encoded).expect("encoded value must re-parse");
        assert_eq!(back.to_bits(), v.to_bits());
    }
});
