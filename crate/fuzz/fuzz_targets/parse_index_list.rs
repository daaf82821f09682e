#![no_main]

use dyadic_walsh::index::parse_index_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(list) = parse_index_list(text) {
        assert!(!list.is_empty());
        assert!(list.iter().all(|&n| n >= 1));
    }
});
