#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = deltaform::scenarios::parse_config(src) {
        let _ = deltaform::scenarios::build_scenario(&config);
    }
});
