//! Plain-text edge lists.
//!
//! ```text
//! n m [wired_id]
//! u v
//! ...
//! ```
//!
//! Vertex ids are 0-based decimals; a parallel edge is a repeated line.
//! Edge `i` of the file gets id `i`. Blank lines and lines starting with `#`
//! are ignored.

use std::io::{BufRead, Write};

use super::Graph;
use crate::error::{Error, Result};

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    read_edge_list(text.as_bytes())
}

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    let mut header: Option<(usize, usize, Option<usize>)> = None;
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields = trimmed
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("not a non-negative integer: {t:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        match header {
            None => {
                header = Some(match fields.as_slice() {
                    [n, m] => (*n, *m, None),
                    [n, m, w] => (*n, *m, Some(*w)),
                    _ => {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: "header must be \"n m [wired_id]\"".into(),
                        })
                    }
                });
            }
            Some((n, _, _)) => match fields.as_slice() {
                [u, v] if *u < n && *v < n && u != v => edges.push((*u, *v)),
                [u, v] if u == v => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("self-loop at {u}"),
                    })
                }
                [_, _] => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("vertex id out of range 0..{n}"),
                    })
                }
                _ => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "edge line must be \"u v\"".into(),
                    })
                }
            },
        }
    }
    let (n, m, wired) = header.ok_or(Error::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    if edges.len() != m {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    if wired.is_some_and(|w| w >= n) {
        return Err(Error::Parse {
            line: 1,
            msg: "wired id out of range".into(),
        });
    }
    Graph::from_edges(n, &edges, wired)
}

pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> std::io::Result<()> {
    match g.wired_vertex() {
        Some(w) => writeln!(out, "{} {} {}", g.vertex_count(), g.edge_count(), w)?,
        None => writeln!(out, "{} {}", g.vertex_count(), g.edge_count())?,
    }
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_multigraph_with_wired_vertex() {
        let g = parse_edge_list("3 3 2\n0 1\n0 1\n1 2\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.wired_vertex(), Some(2));
        assert_eq!(g.edge(1), (0, 1));
    }

    #[test]
    fn round_trip() {
        let g = parse_edge_list("4 4\n0 1\n1 2\n2 3\n3 0\n").unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        assert_eq!(
            parse_edge_list(std::str::from_utf8(&buf).unwrap()).unwrap(),
            g
        );
    }

    #[test]
    fn reports_line_numbers() {
        match parse_edge_list("3 2\n0 1\n0 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_edge_list("3 2\n0 1\n").is_err());
        assert!(parse_edge_list("3 1\n0 3\n").is_err());
        assert!(parse_edge_list("").is_err());
    }
}
