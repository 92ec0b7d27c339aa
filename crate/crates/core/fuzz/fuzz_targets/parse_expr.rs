#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(e) = deltaform::parse_expr(src) {
        // printing and reparsing must give an expression with the same values
        let again = deltaform::parse_expr(&e.to_string()).expect("printed form parses");
        let p = [0.3, -0.2, 0.7, 0.1];
        if let (Ok(a), Ok(b)) = (e.eval(&p), again.eval(&p)) {
            assert!(a == b || (a - b).abs() <= 1e-9 * a.abs().max(1.0) || (a.is_nan() && b.is_nan()));
        }
        for v in 0..4 {
            let _ = e.diff(v).eval(&p);
        }
    }
});
