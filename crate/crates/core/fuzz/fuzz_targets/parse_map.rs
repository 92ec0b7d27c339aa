#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    let region = deltaform::Region::cube(1.0);
    if let Ok(map) = deltaform::scenarios::parse_map(src, &region) {
        let _ = map.apply(&[0.1, 0.2, -0.3, 0.4]);
    }
});
