#![no_main]

use dyadic_walsh::DyadicRational;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = text.parse::<DyadicRational>() {
        let again: DyadicRational = x.to_string().parse().expect("printed value parses");
        assert_eq!(x, again);
    }
});
