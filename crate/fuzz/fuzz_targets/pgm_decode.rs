#![no_main]
use antijam::harness::Pgm;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = Pgm::from_bytes(data) {
        assert_eq!(img.pixels.len(), img.width * img.height);
        assert_eq!(Pgm::from_bytes(&img.to_bytes()).unwrap(), img);
    }
});
