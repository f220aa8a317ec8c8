use std::time::Instant;

use gwin_core::{evaluate_nonindexed, AggregateSpec, AttributeTable, Graph, ResultTable, WindowSpec};

use crate::args::{OutputFormat, QueryArgs};
use crate::error::{CliError, CliResult};
use crate::files::{load_attrs, load_graph, load_index, with_output, AnyIndex};

/// Relative tolerance for averages when comparing with the oracle.
pub const AVG_REL_TOL: f64 = 1e-9;

/// Fails unless the index was built for `g`.
pub fn check_fingerprint(index: &AnyIndex, g: &Graph) -> CliResult<()> {
    let expected = match index {
        AnyIndex::Dense(i) => i.graph_fingerprint(),
        AnyIndex::Inherit(i) => i.graph_fingerprint(),
    };
    let actual = g.fingerprint();
    if expected != actual {
        return Err(gwin_core::Error::FingerprintMismatch { expected, actual }.into());
    }
    Ok(())
}

pub fn index_window(index: &AnyIndex) -> WindowSpec {
    match index {
        AnyIndex::Dense(i) => i.window_spec(),
        AnyIndex::Inherit(_) => WindowSpec::topological(),
    }
}

pub fn evaluate_index(index: &AnyIndex, g: &Graph, attrs: &AttributeTable, a: &AggregateSpec) -> CliResult<ResultTable> {
    Ok(match index {
        AnyIndex::Dense(i) => i.evaluate(attrs, a)?,
        AnyIndex::Inherit(i) => i.evaluate(g, attrs, a)?,
    })
}

pub fn run(args: &QueryArgs) -> CliResult<()> {
    if args.index.is_none() && !args.oracle {
        return Err(CliError::usage("give --index, or --oracle with --window"));
    }
    if args.verify && args.index.is_none() {
        return Err(CliError::usage("--verify needs --index"));
    }
    let g = load_graph(&args.graph)?;
    let (attrs, columns) = load_attrs(args.agg.attrs.as_deref(), &g)?;
    let spec = args.agg.spec(&columns)?;
    let index = args.index.as_deref().map(load_index).transpose()?;
    let requested = args.window.resolve(&g)?;
    let w = match (&index, requested) {
        (Some(idx), Some(w)) if w != index_window(idx) => {
            return Err(CliError::usage(format!(
                "index answers {} windows, not {w}",
                index_window(idx)
            )))
        }
        (Some(idx), _) => index_window(idx),
        (None, Some(w)) => w,
        (None, None) => return Err(CliError::usage("--oracle without --index needs --window")),
    };
    if let Some(idx) = &index {
        check_fingerprint(idx, &g)?;
    }

    let start = Instant::now();
    let result = match &index {
        Some(idx) if !args.oracle => evaluate_index(idx, &g, &attrs, &spec)?,
        _ => evaluate_nonindexed(&g, &attrs, &w, &spec)?,
    };
    let label = if args.oracle { "traversal" } else { "index" };
    eprintln!(
        "{} over {w} windows of {} vertices by {label} in {:.3} ms",
        spec.function.name(),
        g.vertex_count(),
        start.elapsed().as_secs_f64() * 1e3
    );

    let mismatches = if args.verify {
        let expected = evaluate_nonindexed(&g, &attrs, &w, &spec)?;
        let bad = expected.mismatches(&result, AVG_REL_TOL);
        eprintln!("verify: {} mismatches", bad.len());
        bad
    } else {
        Vec::new()
    };

    with_output(args.output.as_deref(), |out| {
        match args.format {
            OutputFormat::Csv => result.write_csv(&g, out)?,
            OutputFormat::Json => result.write_json(&g, out)?,
        }
        Ok(())
    })?;

    if let Some(&v) = mismatches.first() {
        return Err(CliError::Verify(format!(
            "{} vertices differ from the traversal result, first is vertex {}",
            mismatches.len(),
            g.label(v)
        )));
    }
    Ok(())
}
