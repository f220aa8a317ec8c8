use std::fs::File;
use std::io::{BufReader, Write};

use gwin_core::graph::{emit_edge_list, generate_random_dag, generate_random_graph, load_edge_list, EdgeListStats};
use gwin_core::{Directedness, Graph};
use serde::Serialize;

use crate::args::{GeneratorKind, IngestArgs};
use crate::error::{io_error, CliError, CliResult};
use crate::files::{with_output, write_json};
use crate::synthetic::random_attrs;

#[derive(Serialize)]
struct IngestReport {
    directed: bool,
    vertices: usize,
    edges: usize,
    /// Hex hash of the canonical edge list; index files carry the same value.
    fingerprint: String,
    graph_bytes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    parsed: Option<EdgeListStats>,
}

pub fn run(args: &IngestArgs) -> CliResult<()> {
    let (g, parsed) = match (&args.input, args.generate) {
        (Some(path), _) => {
            let file = File::open(path).map_err(|e| io_error(path, e))?;
            let directedness = if args.directed {
                Directedness::Directed
            } else {
                Directedness::Undirected
            };
            let (g, stats) = load_edge_list(BufReader::new(file), directedness)
                .map_err(|e| CliError::from(e).context(path.display()))?;
            (g, Some(stats))
        }
        (None, Some(kind)) => (generate(args, kind)?, None),
        (None, None) => return Err(CliError::usage("give --input or --generate")),
    };

    if let Some(path) = &args.output {
        with_output(Some(path), |w| Ok(emit_edge_list(&g, w)?))?;
    }
    if let Some(path) = &args.attrs_out {
        let values = random_attrs(g.vertex_count(), args.seed);
        with_output(Some(path), |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["vertex", "x"])?;
            for (v, x) in values.iter().enumerate() {
                out.write_record([g.label(v as u32).to_string(), x.to_string()])?;
            }
            out.flush().map_err(|e| CliError::Data(e.to_string()))
        })?;
    }
    let report = IngestReport {
        directed: g.is_directed(),
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        fingerprint: format!("{:016x}", g.fingerprint()),
        graph_bytes: g.encoded_len(),
        parsed,
    };
    write_json(None, &report)?;
    std::io::stdout().flush().ok();
    Ok(())
}

fn generate(args: &IngestArgs, kind: GeneratorKind) -> CliResult<Graph> {
    let n = args.n.ok_or_else(|| CliError::usage("--generate needs --n"))?;
    let degree = args.degree.ok_or_else(|| CliError::usage("--generate needs --degree"))?;
    Ok(match kind {
        GeneratorKind::Er => {
            let directedness = if args.directed {
                Directedness::Directed
            } else {
                Directedness::Undirected
            };
            generate_random_graph(n, degree, args.seed, directedness)?
        }
        GeneratorKind::Dag => generate_random_dag(n, degree, args.seed)?,
    })
}
