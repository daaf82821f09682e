//! Replays the checked-in fuzz corpus through the parsers on stable, with the
//! same properties the fuzz targets assert.

use std::path::PathBuf;

use dyadic_walsh::fixture::{parse_step_function, to_text};
use dyadic_walsh::index::parse_index_list;
use dyadic_walsh::{DyadicRational, Exponent};

fn corpus(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (
                name,
                String::from_utf8_lossy(&std::fs::read(&path).unwrap()).into_owned(),
            )
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus for {target}");
    out
}

#[test]
fn step_function_corpus() {
    let mut accepted = 0;
    for (name, text) in corpus("parse_step_function") {
        if let Ok(f) = parse_step_function(&text) {
            accepted += 1;
            assert_eq!(parse_step_function(&to_text(&f)).unwrap(), f, "{name}");
        }
    }
    assert!(accepted >= 2);
}

#[test]
fn dyadic_rational_corpus() {
    for (name, text) in corpus("parse_dyadic_rational") {
        if let Ok(x) = text.parse::<DyadicRational>() {
            assert_eq!(
                x.to_string().parse::<DyadicRational>().unwrap(),
                x,
                "{name}"
            );
        }
    }
    assert!("1/3".parse::<DyadicRational>().is_err());
}

#[test]
fn index_list_corpus() {
    for (name, text) in corpus("parse_index_list") {
        if let Ok(list) = parse_index_list(&text) {
            assert!(!list.is_empty() && list.iter().all(|&n| n >= 1), "{name}");
        }
    }
    assert_eq!(parse_index_list("9,13").unwrap(), vec![9, 13]);
}

#[test]
fn exponent_corpus() {
    for (name, text) in corpus("parse_exponent") {
        if let Ok(p) = text.parse::<Exponent>() {
            assert_eq!(p.to_string().parse::<Exponent>().unwrap(), p, "{name}");
        }
    }
    assert_eq!(
        "0.75".parse::<Exponent>().unwrap(),
        Exponent::new(3, 4).unwrap()
    );
}
