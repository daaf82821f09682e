#![no_main]

use dyadic_walsh::fixture::{parse_step_function, to_text};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_step_function(text) {
        let again = parse_step_function(&to_text(&f)).expect("printed fixture parses");
        assert_eq!(f, again);
    }
});
