#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(profile) = geomatch::io::parse_profile(text) {
        for s in profile.strategies() {
            assert!(s.weights().iter().all(|w| w.is_finite() && *w >= 0.0));
        }
    }
});
