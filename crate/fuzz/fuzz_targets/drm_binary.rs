#![no_main]
use corridor::drm::{decode_drm, encode_drm};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(drm) = decode_drm(data) {
        assert!(drm.is_symmetric());
        let again = decode_drm(&encode_drm(&drm)).expect("re-encoded roadmap decodes");
        assert_eq!(again.len(), drm.len());
        assert_eq!(again.num_edges(), drm.num_edges());
        assert_eq!(again.nodes(), drm.nodes());
    }
});
