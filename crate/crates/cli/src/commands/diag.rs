use gwin_core::dbindex::{jaccard_profile, JaccardProfile, ValidationReport};
use gwin_core::iindex::IIndexSizeReport;
use serde::Serialize;

use super::query::check_fingerprint;
use crate::args::DiagArgs;
use crate::error::{CliError, CliResult};
use crate::files::{load_graph, load_index, write_json, AnyIndex};

#[derive(Serialize)]
#[serde(untagged)]
enum SizeReport {
    Dense {
        index_bytes: usize,
        graph_bytes: usize,
        ratio: f64,
        blocks: usize,
        dense_blocks: usize,
        links: usize,
        total_work: u64,
    },
    Inherit(IIndexSizeReport),
}

#[derive(Serialize, Default)]
struct DiagReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    jaccard: Option<JaccardProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    size: Option<SizeReport>,
}

pub fn run(args: &DiagArgs) -> CliResult<()> {
    if !(args.jaccard || args.validate || args.size) {
        return Err(CliError::usage("give at least one of --jaccard, --validate, --size"));
    }
    let g = load_graph(&args.graph)?;
    let mut report = DiagReport::default();
    if args.jaccard {
        report.jaccard = Some(jaccard_profile(&g, args.kmax, args.pairs, args.seed)?);
    }
    let index = args.index.as_deref().map(load_index).transpose()?;
    if let Some(idx) = &index {
        check_fingerprint(idx, &g)?;
    }
    if args.validate {
        report.validation = Some(match index.as_ref().expect("clap requires --index") {
            AnyIndex::Dense(i) => i.validate(&g, &i.window_spec()),
            AnyIndex::Inherit(i) => {
                let violations = (0..g.vertex_count() as u32)
                    .filter_map(|v| {
                        let expected = gwin_core::graph::topological_window(&g, v).ok()?;
                        let got = i.materialize_window(v).ok()?;
                        (expected != got).then(|| gwin_core::dbindex::Violation::Coverage {
                            vertex: v,
                            missing: expected.difference(&got).into_vec(),
                            extra: got.difference(&expected).into_vec(),
                        })
                    })
                    .collect();
                ValidationReport { violations }
            }
        });
    }
    if args.size {
        report.size = Some(match index.as_ref().expect("clap requires --index") {
            AnyIndex::Dense(i) => {
                let index_bytes = i.encoded_len();
                let graph_bytes = g.encoded_len();
                SizeReport::Dense {
                    index_bytes,
                    graph_bytes,
                    ratio: index_bytes as f64 / graph_bytes.max(1) as f64,
                    blocks: i.block_count(),
                    dense_blocks: i.dense_block_count(),
                    links: i.link_count(),
                    total_work: i.total_work(),
                }
            }
            AnyIndex::Inherit(i) => SizeReport::Inherit(i.index_size_report(&g)),
        });
    }
    write_json(None, &report)?;
    match &report.validation {
        Some(v) if !v.is_valid() => Err(CliError::Verify(format!(
            "index has {} violations",
            v.violations.len()
        ))),
        _ => Ok(()),
    }
}
