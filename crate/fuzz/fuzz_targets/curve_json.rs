#![no_main]

use hyperkappa::report::parse_curve_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(curve) = parse_curve_json(text) {
        // Anything accepted is a valid curve with distinct finite branch points.
        let e = curve.branch_points();
        assert_eq!(e.len(), 2 * curve.genus() + 1);
        assert!(e.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    }
});
