#![no_main]
use antijam::qnet::QNetworkParams;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // The format has one encoding per network, so anything accepted must
    // re-encode to the same bytes.
    if let Ok(params) = QNetworkParams::from_bytes(data) {
        assert_eq!(params.to_bytes(), data);
    }
});
