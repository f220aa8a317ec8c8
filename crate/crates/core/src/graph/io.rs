//! Text formats: SNAP-style edge lists and per-vertex attribute CSV files.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::Serialize;

use super::{AttributeTable, Directedness, DroppedEdges, Graph, VertexId};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EdgeListStats {
    pub lines: usize,
    pub vertices: usize,
    pub edges: usize,
    pub duplicates_dropped: usize,
    pub self_loops_dropped: usize,
}

/// Parses a whitespace-separated edge list, one `u v` pair per line.
///
/// Lines starting with `#` and blank lines are skipped. A line holding a
/// single label declares an isolated vertex. Labels are arbitrary
/// non-negative integers and are remapped to dense IDs in ascending label
/// order. Self-loops and duplicate edges are dropped and counted.
pub fn load_edge_list<R: BufRead>(
    source: R,
    directedness: Directedness,
) -> Result<(Graph, EdgeListStats)> {
    let mut raw_edges: Vec<(u64, u64)> = Vec::new();
    let mut labels: Vec<u64> = Vec::new();
    let mut lines = 0;
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        lines = line_no;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let first = parse_label(tokens.next().expect("non-empty line"), line_no)?;
        match tokens.next() {
            None => labels.push(first),
            Some(tok) => {
                let second = parse_label(tok, line_no)?;
                if let Some(extra) = tokens.next() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("unexpected trailing token `{extra}`"),
                    });
                }
                labels.push(first);
                labels.push(second);
                raw_edges.push((first, second));
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    labels.sort_unstable();
    labels.dedup();
    let index: HashMap<u64, VertexId> =
        labels.iter().enumerate().map(|(i, &l)| (l, i as VertexId)).collect();
    let (graph, DroppedEdges { duplicates, self_loops }) = Graph::from_edges(
        directedness,
        labels.len(),
        raw_edges.iter().map(|(u, v)| (index[u], index[v])),
    )?;
    let stats = EdgeListStats {
        lines,
        vertices: graph.vertex_count(),
        edges: graph.edge_count(),
        duplicates_dropped: duplicates,
        self_loops_dropped: self_loops,
    };
    Ok((graph.with_labels(labels)?, stats))
}

fn parse_label(token: &str, line: usize) -> Result<u64> {
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{token}` is not a non-negative integer vertex label"),
    })
}

/// Writes the canonical edge list using original labels; isolated vertices
/// are written as single-label lines. Output of this function parses back to
/// an identical graph.
pub fn emit_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(
        out,
        "# {} graph: {} vertices, {} edges",
        g.directedness().name(),
        g.vertex_count(),
        g.edge_count()
    )?;
    for v in 0..g.vertex_count() as VertexId {
        if g.out_neighbors(v).is_empty() && g.in_neighbors(v).is_empty() {
            writeln!(out, "{}", g.label(v))?;
        }
    }
    for (u, v) in g.edges() {
        writeln!(out, "{} {}", g.label(u), g.label(v))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads `vertex,<attr1>,<attr2>,...` rows keyed by original label.
/// Vertices without a row get 0 for every attribute.
pub fn load_attributes<R: std::io::Read>(source: R, g: &Graph) -> Result<AttributeTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    if headers.get(0) != Some("vertex") {
        return Err(Error::Parse {
            line: 1,
            message: "attribute header must start with `vertex`".into(),
        });
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let n = g.vertex_count();
    let mut columns = vec![vec![0i64; n]; names.len()];
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let label: u64 = parse_label(&record[0], line)?;
        let v = g.vertex_of_label(label).ok_or_else(|| Error::Parse {
            line,
            message: format!("vertex {label} is not in the graph"),
        })?;
        for (col, field) in columns.iter_mut().zip(record.iter().skip(1)) {
            col[v as usize] = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("`{field}` is not an integer attribute value"),
            })?;
        }
    }
    let mut table = AttributeTable::new(n);
    for (name, values) in names.into_iter().zip(columns) {
        table.add_column(name, values)?;
    }
    Ok(table)
}
