//! Plain-text formats.
//!
//! Edge lists are `x y weight` per line and vertex functions `x value` per
//! line; `#` starts a comment line. Floats are written with 17 significant
//! digits, which round-trips every `f64` exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{GraphBuilder, WeightedGraph};

/// 17 significant digits in scientific notation.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `digits` significant digits in scientific notation.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    format!("{x:.*e}", digits.saturating_sub(1))
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            None
        } else {
            Some((i + 1, t.split_whitespace().collect()))
        }
    })
}

fn parse_field<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    tok.parse().map_err(|e| Error::Parse {
        line,
        message: format!("bad {what} `{tok}`: {e}"),
    })
}

/// Parses an edge list into a builder; the vertex count is one more than the
/// largest id seen. Structural checks are left to the builder.
pub fn parse_edge_list(text: &str) -> Result<GraphBuilder> {
    let mut b = GraphBuilder::new(0);
    for (line, cols) in data_lines(text) {
        if cols.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected `x y weight`, found {} fields", cols.len()),
            });
        }
        let x: usize = parse_field(cols[0], line, "vertex")?;
        let y: usize = parse_field(cols[1], line, "vertex")?;
        let w: f64 = parse_field(cols[2], line, "weight")?;
        b.ensure_vertex(x).ensure_vertex(y).add_edge(x, y, w);
    }
    Ok(b)
}

pub fn write_edge_list(g: &WeightedGraph) -> String {
    let mut out = String::new();
    for &(x, y, w) in g.edges() {
        writeln!(out, "{x} {y} {}", fmt17(w)).unwrap();
    }
    out
}

/// Parses `x value` lines. Every id in `0..n` must appear exactly once,
/// where `n` is one more than the largest id.
pub fn parse_vertex_function(text: &str) -> Result<VertexFunction> {
    let mut entries: Vec<Option<f64>> = Vec::new();
    let mut max_line = 0;
    for (line, cols) in data_lines(text) {
        max_line = line;
        if cols.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected `x value`, found {} fields", cols.len()),
            });
        }
        let x: usize = parse_field(cols[0], line, "vertex")?;
        let v: f64 = parse_field(cols[1], line, "value")?;
        if entries.len() <= x {
            entries.resize(x + 1, None);
        }
        if entries[x].replace(v).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("vertex {x} listed twice"),
            });
        }
    }
    let values = entries
        .into_iter()
        .enumerate()
        .map(|(x, v)| {
            v.ok_or(Error::Parse {
                line: max_line,
                message: format!("no value for vertex {x}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VertexFunction::new(values))
}

pub fn write_vertex_function(u: &VertexFunction) -> String {
    let mut out = String::new();
    for (x, v) in u.values().iter().enumerate() {
        writeln!(out, "{x} {}", fmt17(*v)).unwrap();
    }
    out
}
