#![no_main]

use dyadic_walsh::Exponent;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = text.parse::<Exponent>() {
        let again: Exponent = p.to_string().parse().expect("printed exponent parses");
        assert_eq!(p, again);
    }
});
