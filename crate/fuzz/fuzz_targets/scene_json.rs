#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(scene) = corridor::world::parse_scene_json(text) {
            // A parsed scene must survive a collision query at the domain center.
            let q: Vec<f64> = scene.domain_lower.iter().zip(&scene.domain_upper).map(|(l, u)| 0.5 * (l + u)).collect();
            let _ = scene.world.check_config(&q);
        }
    }
});
