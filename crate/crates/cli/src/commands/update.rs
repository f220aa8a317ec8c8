use std::time::Instant;

use gwin_core::graph::emit_edge_list;
use gwin_core::iindex::EdgeOp;
use gwin_core::{evaluate_nonindexed, AggregateSpec, AttributeTable, Graph};
use serde::Serialize;

use super::query::{check_fingerprint, evaluate_index, index_window, AVG_REL_TOL};
use crate::args::UpdateArgs;
use crate::error::{io_error, CliError, CliResult};
use crate::files::{load_attrs, load_graph, load_index, with_output, write_bytes, write_json, AnyIndex};
use crate::synthetic::random_table;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Update {
    line: usize,
    op: EdgeOp,
    u: u64,
    v: u64,
}

#[derive(Serialize)]
struct UpdateRecord {
    line: usize,
    op: EdgeOp,
    u: u64,
    v: u64,
    secs: f64,
    reorganized: bool,
}

#[derive(Serialize)]
struct UpdateReport {
    updates: usize,
    insertions: usize,
    deletions: usize,
    reorganizations: usize,
    total_secs: f64,
    median_secs: f64,
    max_secs: f64,
    verified_each: bool,
    per_update: Vec<UpdateRecord>,
}

fn parse_stream(text: &str) -> Result<Vec<Update>, String> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let [op, u, v] = tokens[..] else {
            return Err(format!("line {line}: expected `+ u v` or `- u v`"));
        };
        let op = match op {
            "+" => EdgeOp::Insert,
            "-" => EdgeOp::Delete,
            other => return Err(format!("line {line}: unknown operation `{other}`")),
        };
        let label = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| format!("line {line}: `{s}` is not a vertex label"))
        };
        out.push(Update { line, op, u: label(u)?, v: label(v)? });
    }
    Ok(out)
}

/// Applies one update; returns the new graph and whether a rebuild happened.
fn apply(index: &mut AnyIndex, g: &Graph, u: u32, v: u32, op: EdgeOp) -> gwin_core::Result<(Graph, bool)> {
    match index {
        AnyIndex::Inherit(i) => Ok((i.apply_edge_update(g, u, v, op)?, false)),
        AnyIndex::Dense(i) => match op {
            EdgeOp::Insert => {
                let g2 = i.apply_edge_insertion(g, u, v)?;
                if i.needs_reorganize() {
                    *i = i.reorganize(&g2)?.0;
                    Ok((g2, true))
                } else {
                    Ok((g2, false))
                }
            }
            // Deletions are absorbed by a rebuild.
            EdgeOp::Delete => {
                let g2 = g.with_edge_removed(u, v)?;
                *i = i.reorganize(&g2)?.0;
                Ok((g2, true))
            }
        },
    }
}

fn verify(index: &AnyIndex, g: &Graph, attrs: &AttributeTable, a: &AggregateSpec) -> CliResult<()> {
    if let AnyIndex::Dense(i) = index {
        let report = i.validate(g, &i.window_spec());
        if !report.is_valid() {
            return Err(CliError::Verify(format!("{} index violations", report.violations.len())));
        }
    }
    let expected = evaluate_nonindexed(g, attrs, &index_window(index), a)?;
    let bad = expected.mismatches(&evaluate_index(index, g, attrs, a)?, AVG_REL_TOL);
    if let Some(&v) = bad.first() {
        return Err(CliError::Verify(format!(
            "{} vertices differ from the traversal result, first is vertex {}",
            bad.len(),
            g.label(v)
        )));
    }
    Ok(())
}

pub fn run(args: &UpdateArgs) -> CliResult<()> {
    let mut g = load_graph(&args.graph)?;
    let mut index = load_index(&args.index)?;
    check_fingerprint(&index, &g)?;
    let text = std::fs::read_to_string(&args.stream).map_err(|e| io_error(&args.stream, e))?;
    let stream = parse_stream(&text).map_err(|m| CliError::Data(format!("{}: {m}", args.stream.display())))?;

    let check = if args.verify_each {
        let (attrs, columns) = load_attrs(args.agg.attrs.as_deref(), &g)?;
        let (attrs, columns) = if columns.is_empty() {
            (random_table(g.vertex_count(), 0), vec!["x".to_string()])
        } else {
            (attrs, columns)
        };
        let spec = args.agg.spec(&columns)?;
        Some((attrs, spec))
    } else {
        None
    };

    let mut records = Vec::with_capacity(stream.len());
    for up in &stream {
        let at = |e: CliError| e.context(format!("{} line {}", args.stream.display(), up.line));
        let id = |label: u64| {
            g.vertex_of_label(label)
                .ok_or_else(|| at(CliError::Data(format!("unknown vertex {label}"))))
        };
        let (u, v) = (id(up.u)?, id(up.v)?);
        let start = Instant::now();
        let (g2, reorganized) = apply(&mut index, &g, u, v, up.op).map_err(|e| at(e.into()))?;
        let secs = start.elapsed().as_secs_f64();
        g = g2;
        if let Some((attrs, spec)) = &check {
            verify(&index, &g, attrs, spec).map_err(at)?;
        }
        records.push(UpdateRecord {
            line: up.line,
            op: up.op,
            u: up.u,
            v: up.v,
            secs,
            reorganized,
        });
    }

    if let Some(path) = &args.output {
        write_bytes(path, &index.to_bytes())?;
    }
    if let Some(path) = &args.graph_out {
        with_output(Some(path), |w| Ok(emit_edge_list(&g, w)?))?;
    }
    let mut times: Vec<f64> = records.iter().map(|r| r.secs).collect();
    times.sort_by(f64::total_cmp);
    let report = UpdateReport {
        updates: records.len(),
        insertions: records.iter().filter(|r| r.op == EdgeOp::Insert).count(),
        deletions: records.iter().filter(|r| r.op == EdgeOp::Delete).count(),
        reorganizations: records.iter().filter(|r| r.reorganized).count(),
        total_secs: times.iter().sum(),
        median_secs: times.get(times.len() / 2).copied().unwrap_or(0.0),
        max_secs: times.last().copied().unwrap_or(0.0),
        verified_each: args.verify_each,
        per_update: records,
    };
    write_json(args.report.as_deref(), &report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_stream() {
        let ups = parse_stream("# c\n+ 1 2\n\n- 3 4\n").unwrap();
        assert_eq!(
            ups,
            vec![
                Update { line: 2, op: EdgeOp::Insert, u: 1, v: 2 },
                Update { line: 4, op: EdgeOp::Delete, u: 3, v: 4 },
            ]
        );
        assert!(parse_stream("+ 1\n").unwrap_err().starts_with("line 1"));
        assert!(parse_stream("+ 1 2\n* 1 2\n").unwrap_err().starts_with("line 2"));
        assert!(parse_stream("+ a 2\n").is_err());
    }
}
