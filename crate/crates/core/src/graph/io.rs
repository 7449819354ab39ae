use std::io::{BufRead, Write};

use super::{Edge, SimilarityGraph};
use crate::error::{NbseError, Result};

const MAGIC: &str = "nbse-graph";
const VERSION: &str = "v1";

/// Write `nbse-graph v1 <n_nodes> <n_edges>` then one `i j weight [type]`
/// line per edge. Weights carry 17 significant digits.
pub fn write_edge_list<W: Write>(g: &SimilarityGraph, mut out: W) -> Result<()> {
    writeln!(out, "{MAGIC} {VERSION} {} {}", g.n_nodes(), g.n_edges())?;
    for e in g.edges() {
        match e.edge_type {
            Some(t) => writeln!(out, "{} {} {:.16e} {t}", e.i, e.j, e.weight)?,
            None => writeln!(out, "{} {} {:.16e}", e.i, e.j, e.weight)?,
        }
    }
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> NbseError {
    NbseError::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_edge_list<R: BufRead>(input: R) -> Result<SimilarityGraph> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty graph file"))?;
    let header = header?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != MAGIC || fields[1] != VERSION {
        return Err(parse_err(1, format!("bad header '{header}'")));
    }
    let n_nodes: usize = fields[2]
        .parse()
        .map_err(|_| parse_err(1, "bad node count"))?;
    let n_edges: usize = fields[3]
        .parse()
        .map_err(|_| parse_err(1, "bad edge count"))?;

    let mut edges = Vec::with_capacity(n_edges);
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if !(3..=4).contains(&f.len()) {
            return Err(parse_err(lineno, "expected 'i j weight [type]'"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| parse_err(lineno, format!("bad index '{s}'")));
        let weight = f[2]
            .parse::<f64>()
            .map_err(|_| parse_err(lineno, format!("bad weight '{}'", f[2])))?;
        let edge_type = match f.get(3) {
            Some(t) => Some(
                t.parse::<u32>()
                    .map_err(|_| parse_err(lineno, format!("bad edge type '{t}'")))?,
            ),
            None => None,
        };
        edges.push(Edge {
            i: num(f[0])?,
            j: num(f[1])?,
            weight,
            edge_type,
        });
    }
    if edges.len() != n_edges {
        return Err(parse_err(
            1,
            format!("header declares {n_edges} edges, found {}", edges.len()),
        ));
    }
    SimilarityGraph::new(n_nodes, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_lossless() {
        let g = SimilarityGraph::new(
            4,
            vec![
                Edge { i: 0, j: 1, weight: 0.1 + 0.2, edge_type: Some(3) },
                Edge { i: 1, j: 3, weight: std::f64::consts::PI / 7.0, edge_type: None },
                Edge { i: 2, j: 3, weight: f64::MIN_POSITIVE, edge_type: Some(0) },
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("nbse-graph v1 4 3\n"));
        let back = read_edge_list(buf.as_slice()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(read_edge_list("graph v1 2 1\n0 1 1.0\n".as_bytes()).is_err());
        assert!(read_edge_list("nbse-graph v1 2 2\n0 1 1.0\n".as_bytes()).is_err());
        assert!(read_edge_list("nbse-graph v1 2 1\n0 x 1.0\n".as_bytes()).is_err());
    }
}
