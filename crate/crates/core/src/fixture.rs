//! Plain-text step-function fixtures.
//!
//! ```text
//! N=2
//! 3/2^0
//! 1/2^0
//! -1/2^0
//! -1/2^0
//! ```
//!
//! Line 1 gives the resolution; then exactly `2^N` values follow in coset
//! order. Trailing blank lines and `\r\n` endings are tolerated.

use crate::domain::StepFunction;
use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::MAX_RESOLUTION;

pub fn to_text(f: &StepFunction) -> String {
    let mut out = format!("N={}\n", f.resolution());
    for v in f.values() {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_step_function(text: &str) -> Result<StepFunction> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((i, l)) => break (i + 1, l.trim()),
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "empty input".into(),
                })
            }
        }
    };
    let resolution = header
        .1
        .strip_prefix("N=")
        .filter(|t| !t.is_empty() && t.len() <= 3 && t.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|t| t.parse::<u32>().ok())
        .ok_or_else(|| Error::Parse {
            line: header.0,
            message: "expected header N=<resolution>".into(),
        })?;
    if resolution > MAX_RESOLUTION {
        return Err(Error::ResolutionTooLarge(resolution));
    }
    let expected = 1usize << resolution;
    // Do not trust the header for the allocation size.
    let mut values = Vec::with_capacity(expected.min(text.len() / 2 + 1));
    let mut trailing_blank = false;
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            trailing_blank = true;
            continue;
        }
        if trailing_blank {
            return Err(Error::Parse {
                line: i + 1,
                message: "blank line inside the value list".into(),
            });
        }
        if values.len() == expected {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("more than 2^{resolution} values"),
            });
        }
        let v: DyadicRational = line.parse().map_err(|e: Error| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        values.push(v);
    }
    if values.len() != expected {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: format!("expected {expected} values, found {}", values.len()),
        });
    }
    StepFunction::new(resolution, values)
}
