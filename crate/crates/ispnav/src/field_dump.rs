//! Plain-text field dumps.
//!
//! ```text
//! 3 2
//! inf:inf 2:-0.1 inf:inf
//! inf:inf 2:-0.1 0.5:-1
//! ```
//!
//! The first line holds `width height`; each following line is one image row
//! of `tau:tau_dot` entries separated by single spaces. Values carry six
//! significant digits, so a dump of a parsed dump is byte-identical to the
//! original dump.

use std::fmt::Write as _;

use ispnav_core::{IspField, PotentialTuple};
use thiserror::Error;

use crate::numfmt;

pub const SIGNIFICANT_DIGITS: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum DumpError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Value {
        line: usize,
        #[source]
        source: ispnav_core::Error,
    },
}

fn syntax(line: usize, message: impl Into<String>) -> DumpError {
    DumpError::Syntax {
        line,
        message: message.into(),
    }
}

pub fn dump(field: &IspField) -> String {
    let mut out = String::with_capacity(field.width() * field.height() * 12 + 16);
    let _ = writeln!(out, "{} {}", field.width(), field.height());
    for y in 0..field.height() {
        for (x, cell) in field.row(y).iter().enumerate() {
            if x > 0 {
                out.push(' ');
            }
            out.push_str(&numfmt::sig(cell.tau().get(), SIGNIFICANT_DIGITS));
            out.push(':');
            out.push_str(&numfmt::sig(cell.tau_dot().get(), SIGNIFICANT_DIGITS));
        }
        out.push('\n');
    }
    out
}

pub fn parse(text: &str) -> Result<IspField, DumpError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| syntax(1, "missing header"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let [w, h] = dims[..] else {
        return Err(syntax(1, "header must be `width height`"));
    };
    let width: usize = w.parse().map_err(|_| syntax(1, format!("bad width `{w}`")))?;
    let height: usize = h.parse().map_err(|_| syntax(1, format!("bad height `{h}`")))?;
    if width == 0 || height == 0 {
        return Err(syntax(1, "dimensions must be positive"));
    }

    let mut cells = Vec::with_capacity(width * height);
    for row in 0..height {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| syntax(row + 2, format!("expected {height} rows, found {row}")))?;
        let mut count = 0;
        for entry in line.split_whitespace() {
            let (tau, tau_dot) = entry
                .split_once(':')
                .ok_or_else(|| syntax(line_no, format!("entry `{entry}` is not `tau:tau_dot`")))?;
            let tau: f64 = tau.parse().map_err(|_| syntax(line_no, format!("bad tau `{tau}`")))?;
            let tau_dot: f64 = tau_dot
                .parse()
                .map_err(|_| syntax(line_no, format!("bad tau_dot `{tau_dot}`")))?;
            let cell = PotentialTuple::new(tau, tau_dot).map_err(|source| DumpError::Value { line: line_no, source })?;
            cells.push(cell);
            count += 1;
        }
        if count != width {
            return Err(syntax(line_no, format!("expected {width} entries, found {count}")));
        }
    }
    if let Some((line_no, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(syntax(line_no, format!("unexpected trailing content `{extra}`")));
    }
    IspField::from_cells(width, height, cells).map_err(|source| DumpError::Value { line: 1, source })
}
