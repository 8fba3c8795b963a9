//! Plain-text edge lists and seed files.
//!
//! Edge list: first non-comment line `n m`, then `m` lines `u v` with
//! 0-indexed decimal ids. Lines starting with `#` are ignored. Seed file:
//! one vertex id per line, same comment rule.

use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::graph::{Graph, SeedSet};

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, line)| line.map(|l| (i + 1, l)).map_err(Error::from))
        .filter(|r| match r {
            Ok((_, l)) => {
                let t = l.trim();
                !t.is_empty() && !t.starts_with('#')
            }
            Err(_) => true,
        })
}

fn parse_fields<const N: usize>(line: usize, text: &str) -> Result<[usize; N]> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != N {
        return Err(Error::Parse {
            line,
            msg: format!("expected {N} integers, found {:?}", text.trim()),
        });
    }
    let mut out = [0usize; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("not a vertex id: {p:?}"),
        })?;
    }
    Ok(out)
}

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    let mut lines = content_lines(reader);
    let (line, header) = lines.next().transpose()?.ok_or(Error::Parse {
        line: 1,
        msg: "missing `n m` header".into(),
    })?;
    let [n, m] = parse_fields::<2>(line, &header)?;
    let mut edges = Vec::with_capacity(m);
    for entry in lines {
        let (line, text) = entry?;
        let [u, v] = parse_fields::<2>(line, &text)?;
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line,
            msg: format!("header announces {m} edges, found {}", edges.len()),
        });
    }
    Graph::from_edges(n, &edges)
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.m());
    for &(u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

pub fn read_seeds<R: BufRead>(reader: R, n: usize) -> Result<SeedSet> {
    let mut ids = Vec::new();
    for entry in content_lines(reader) {
        let (line, text) = entry?;
        let [v] = parse_fields::<1>(line, &text)?;
        ids.push(v);
    }
    SeedSet::new(ids, n)
}

/// Comma-separated seed ids, e.g. `0,5,9`.
pub fn parse_seed_list(text: &str, n: usize) -> Result<SeedSet> {
    let ids = text
        .split(',')
        .map(|t| {
            t.trim().parse::<usize>().map_err(|_| Error::Parse {
                line: 1,
                msg: format!("not a vertex id: {t:?}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SeedSet::new(ids, n)
}
