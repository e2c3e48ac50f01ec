#![no_main]
use corridor::eizo::EizoParams;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        for p in [EizoParams::from_toml(text), EizoParams::from_json(text)].into_iter().flatten() {
            assert!(p.validate().is_ok());
            let _ = p.bisection_steps(10.0);
        }
    }
});
