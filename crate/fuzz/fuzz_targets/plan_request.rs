#![no_main]
use corridor::planner::PlanRequest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = PlanRequest::from_json(text);
    }
});
