#![no_main]
use corridor::world::{encode_point_cloud_binary, parse_point_cloud, parse_point_cloud_binary};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(points) = parse_point_cloud(data) {
        let f32_points: Vec<[f64; 3]> =
            points.iter().map(|p| [p[0] as f32 as f64, p[1] as f32 as f64, p[2] as f32 as f64]).collect();
        if f32_points.iter().flatten().all(|v| v.is_finite()) {
            let again = parse_point_cloud_binary(&encode_point_cloud_binary(&f32_points)).unwrap();
            assert_eq!(again, f32_points);
        }
    }
});
