#![no_main]
use corridor::bench::BenchConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = BenchConfig::from_toml(text);
    }
});
