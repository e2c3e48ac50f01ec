#![no_main]
use corridor::cpoly::HPolytope;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = HPolytope::from_json(text) {
            let again = HPolytope::from_json(&p.to_json()).expect("serialized polytope parses");
            assert_eq!(again.dim(), p.dim());
            assert_eq!(again.num_faces(), p.num_faces());
        }
    }
});
