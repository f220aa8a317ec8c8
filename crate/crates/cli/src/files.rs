use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use gwin_core::dbindex::DbIndex;
use gwin_core::graph::load_edge_list;
use gwin_core::iindex::IIndex;
use gwin_core::{AttributeTable, Directedness, Graph};
use serde::Serialize;

use crate::args::GraphArgs;
use crate::error::{io_error, CliError, CliResult};

pub enum AnyIndex {
    Dense(DbIndex),
    Inherit(IIndex),
}

impl AnyIndex {
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            AnyIndex::Dense(i) => i.to_bytes(),
            AnyIndex::Inherit(i) => i.to_bytes(),
        }
    }
}

pub fn load_graph(args: &GraphArgs) -> CliResult<Graph> {
    let file = File::open(&args.graph).map_err(|e| io_error(&args.graph, e))?;
    let directedness = if args.directed {
        Directedness::Directed
    } else {
        Directedness::Undirected
    };
    let (g, _) = load_edge_list(BufReader::new(file), directedness)
        .map_err(|e| CliError::from(e).context(args.graph.display()))?;
    Ok(g)
}

/// Attribute table from a CSV, or a table without columns.
pub fn load_attrs(path: Option<&Path>, g: &Graph) -> CliResult<(AttributeTable, Vec<String>)> {
    let Some(path) = path else {
        return Ok((AttributeTable::new(g.vertex_count()), Vec::new()));
    };
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let attrs = gwin_core::graph::load_attributes(BufReader::new(file), g)
        .map_err(|e| CliError::from(e).context(path.display()))?;
    let names = attrs.names().map(str::to_string).collect();
    Ok((attrs, names))
}

pub fn load_index(path: &Path) -> CliResult<AnyIndex> {
    let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
    let loaded = if bytes.starts_with(b"GWDB") {
        DbIndex::from_bytes(&bytes).map(AnyIndex::Dense)
    } else if bytes.starts_with(b"GWII") {
        IIndex::from_bytes(&bytes).map(AnyIndex::Inherit)
    } else {
        return Err(CliError::Data(format!("{}: not an index file", path.display())));
    };
    loaded.map_err(|e| CliError::from(e).context(path.display()))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| io_error(path, e))
}

/// Runs `f` against a buffered writer on `path`, or on stdout.
pub fn with_output<F>(path: Option<&Path>, f: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> CliResult<()>,
{
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| io_error(p, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(|e| io_error(p, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush().map_err(|e| CliError::Data(e.to_string()))
        }
    }
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult<()> {
    with_output(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w).map_err(|e| CliError::Data(e.to_string()))
    })
}
