//! Binary and JSON encodings of a [`DbIndex`].
//!
//! Binary layout, integers as LEB128 varints unless noted:
//!
//! ```text
//! "GWDB1"
//! window      kind byte (0 k-hop, 1 topological); k-hop adds k and a
//!             direction byte (0 out, 1 in, 2 undirected)
//! params      strategy byte (0 mc, 1 emc), emc adds k_cluster; hashes;
//!             seed (u64 LE); max_cluster; max_rounds; threshold + 1 (0 = none)
//! fingerprint u64 LE
//! vertices, insertions
//! blocks      count, then per block: length and ascending members
//! links       per vertex: length and block ids
//! ```

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{BlockStore, BuildParams, BuildStrategy, DbIndex, UpdateLog};
use crate::codec::{varint_len, write_varint, Reader};
use crate::graph::{Direction, VertexId};
use crate::window::WindowSpec;
use crate::{Error, Result};

const MAGIC: &[u8] = b"GWDB1";

fn direction_code(d: Direction) -> u8 {
    match d {
        Direction::Out => 0,
        Direction::In => 1,
        Direction::Undirected => 2,
    }
}

fn write_header(out: &mut Vec<u8>, idx: &DbIndex) {
    out.extend_from_slice(MAGIC);
    match idx.window {
        WindowSpec::Khop { k, direction } => {
            out.push(0);
            write_varint(out, k.into());
            out.push(direction_code(direction));
        }
        WindowSpec::Topological => out.push(1),
    }
    let p = &idx.params;
    match p.strategy {
        BuildStrategy::Mc => out.push(0),
        BuildStrategy::Emc { k_cluster } => {
            out.push(1);
            write_varint(out, k_cluster.into());
        }
    }
    write_varint(out, p.hashes as u64);
    out.extend_from_slice(&p.seed.to_le_bytes());
    write_varint(out, p.max_cluster as u64);
    write_varint(out, p.max_rounds as u64);
    write_varint(out, p.reorganize_threshold.map_or(0, |t| t + 1));
    out.extend_from_slice(&idx.fingerprint.to_le_bytes());
    write_varint(out, idx.vertex_count as u64);
    write_varint(out, idx.log.insertions);
}

impl DbIndex {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        write_header(&mut out, self);
        write_varint(&mut out, self.blocks.len() as u64);
        for block in self.blocks() {
            write_varint(&mut out, block.members.len() as u64);
            for &x in block.members {
                write_varint(&mut out, x.into());
            }
        }
        for links in &self.links {
            write_varint(&mut out, links.len() as u64);
            for &b in links {
                write_varint(&mut out, b.into());
            }
        }
        out
    }

    /// Size in bytes of [`DbIndex::to_bytes`], without encoding.
    pub fn encoded_len(&self) -> usize {
        let mut header = Vec::new();
        write_header(&mut header, self);
        let blocks: usize = self
            .blocks()
            .map(|b| {
                varint_len(b.members.len() as u64)
                    + b.members.iter().map(|&x| varint_len(x.into())).sum::<usize>()
            })
            .sum();
        let links: usize = self
            .links
            .iter()
            .map(|l| varint_len(l.len() as u64) + l.iter().map(|&b| varint_len(b.into())).sum::<usize>())
            .sum();
        header.len() + varint_len(self.blocks.len() as u64) + blocks + links
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&self.to_bytes())?;
        out.flush()?;
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.expect_magic(MAGIC)?;
        let window = match r.u8()? {
            0 => {
                let k = r.varint_below(u64::from(u32::MAX) + 1, "hop count")?;
                let direction = match r.u8()? {
                    0 => Direction::Out,
                    1 => Direction::In,
                    2 => Direction::Undirected,
                    d => return Err(Error::Format(format!("unknown direction code {d}"))),
                };
                WindowSpec::Khop { k, direction }
            }
            1 => WindowSpec::Topological,
            c => return Err(Error::Format(format!("unknown window code {c}"))),
        };
        let strategy = match r.u8()? {
            0 => BuildStrategy::Mc,
            1 => BuildStrategy::Emc {
                k_cluster: r.varint_below(u64::from(u32::MAX) + 1, "k_cluster")?,
            },
            c => return Err(Error::Format(format!("unknown strategy code {c}"))),
        };
        let hashes = r.varint()? as usize;
        let seed = r.u64_le()?;
        let max_cluster = r.varint()? as usize;
        let max_rounds = r.varint()? as usize;
        let reorganize_threshold = r.varint()?.checked_sub(1);
        let params = BuildParams {
            strategy,
            hashes,
            seed,
            max_cluster,
            max_rounds,
            reorganize_threshold,
        };
        let fingerprint = r.u64_le()?;
        let vertex_count = r.varint_below(u64::from(u32::MAX), "vertex count")? as usize;
        let insertions = r.varint()?;

        let block_count = r.varint_below(u64::from(u32::MAX), "block count")?;
        let mut blocks = BlockStore::new();
        let mut members = Vec::new();
        for id in 0..block_count {
            let len = r.varint_below(vertex_count as u64 + 1, "block length")?;
            members.clear();
            for _ in 0..len {
                members.push(r.varint_below(vertex_count as u64, "block member")?);
            }
            check_block(id, &members)?;
            blocks.push_unchecked(&members);
        }
        if let Some((a, b)) = blocks.reindex().first() {
            return Err(Error::Format(format!("blocks {a} and {b} are duplicates")));
        }
        let mut links = Vec::with_capacity(vertex_count);
        for _ in 0..vertex_count {
            let len = r.varint_below(u64::from(block_count) + 1, "link count")?;
            let mut l = Vec::with_capacity(len as usize);
            for _ in 0..len {
                l.push(r.varint_below(block_count.into(), "block id")?);
            }
            links.push(l);
        }
        if !r.is_empty() {
            return Err(Error::Format("trailing bytes after link section".into()));
        }
        Ok(Self {
            window,
            params,
            vertex_count,
            fingerprint,
            blocks,
            links,
            log: UpdateLog { insertions },
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&JsonIndex::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: JsonIndex = serde_json::from_str(text)?;
        let mut blocks = BlockStore::new();
        for (id, b) in doc.blocks.iter().enumerate() {
            check_block(id as u32, b)?;
            if let Some(&x) = b.iter().find(|&&x| x as usize >= doc.vertex_count) {
                return Err(Error::InvalidVertex(x.into()));
            }
            blocks.push_unchecked(b);
        }
        if let Some((a, b)) = blocks.reindex().first() {
            return Err(Error::Format(format!("blocks {a} and {b} are duplicates")));
        }
        if doc.links.len() != doc.vertex_count {
            return Err(Error::Format(format!(
                "{} link lists for {} vertices",
                doc.links.len(),
                doc.vertex_count
            )));
        }
        if let Some(&b) = doc.links.iter().flatten().find(|&&b| b as usize >= blocks.len()) {
            return Err(Error::Format(format!("link to missing block {b}")));
        }
        Ok(Self {
            window: doc.window,
            params: doc.params,
            vertex_count: doc.vertex_count,
            fingerprint: doc.fingerprint,
            blocks,
            links: doc.links,
            log: doc.update_log,
        })
    }
}

fn check_block(id: u32, members: &[VertexId]) -> Result<()> {
    if members.is_empty() {
        return Err(Error::Format(format!("block {id} is empty")));
    }
    if members.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Format(format!("block {id} members are not strictly ascending")));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct JsonIndex {
    window: WindowSpec,
    params: BuildParams,
    vertex_count: usize,
    fingerprint: u64,
    update_log: UpdateLog,
    blocks: Vec<Vec<VertexId>>,
    links: Vec<Vec<u32>>,
}

impl From<&DbIndex> for JsonIndex {
    fn from(idx: &DbIndex) -> Self {
        Self {
            window: idx.window,
            params: idx.params,
            vertex_count: idx.vertex_count,
            fingerprint: idx.fingerprint,
            update_log: idx.log,
            blocks: idx.blocks().map(|b| b.members.to_vec()).collect(),
            links: idx.links.clone(),
        }
    }
}
