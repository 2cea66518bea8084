#![no_main]
use antijam::harness::{parse_metrics, write_metrics};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_metrics(text) {
        let mut out = Vec::new();
        write_metrics(&rows, &mut out).unwrap();
        let again = parse_metrics(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(again.len(), rows.len());
    }
});
