#![no_main]

use hyperkappa::theta::Characteristic;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ch) = text.parse::<Characteristic>() {
        let again: Characteristic = ch.to_string().parse().expect("display output parses");
        assert_eq!(again, ch);
    }
});
