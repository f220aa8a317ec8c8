//! Binary and JSON encodings of an [`IIndex`].
//!
//! Binary layout: `"GWII1"`, the graph fingerprint (u64 LE), the vertex
//! count, then per vertex `pid + 1` (0 for none), the difference length and
//! its ascending members, all as varints. Window sizes are recomputed on load.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{IIndex, IIndexEntry};
use crate::codec::{varint_len, write_varint, Reader};
use crate::graph::{VertexId, VertexSet};
use crate::{Error, Result};

const MAGIC: &[u8] = b"GWII1";

impl IIndex {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.fingerprint.to_le_bytes());
        write_varint(&mut out, self.entries.len() as u64);
        for e in &self.entries {
            write_varint(&mut out, e.pid.map_or(0, |p| u64::from(p) + 1));
            write_varint(&mut out, e.wd.len() as u64);
            for x in e.wd.iter() {
                write_varint(&mut out, x.into());
            }
        }
        out
    }

    pub fn encoded_len(&self) -> usize {
        MAGIC.len()
            + 8
            + varint_len(self.entries.len() as u64)
            + self
                .entries
                .iter()
                .map(|e| {
                    varint_len(e.pid.map_or(0, |p| u64::from(p) + 1))
                        + varint_len(e.wd.len() as u64)
                        + e.wd.iter().map(|x| varint_len(x.into())).sum::<usize>()
                })
                .sum::<usize>()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&self.to_bytes())?;
        out.flush()?;
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.expect_magic(MAGIC)?;
        let fingerprint = r.u64_le()?;
        let n = r.varint_below(u64::from(u32::MAX), "vertex count")? as usize;
        let mut entries = Vec::with_capacity(n);
        for _ in 0..n {
            let pid = match r.varint_below(n as u64 + 1, "parent id")? {
                0 => None,
                p => Some(p - 1),
            };
            let len = r.varint_below(n as u64 + 1, "difference length")?;
            let mut wd = Vec::with_capacity(len as usize);
            for _ in 0..len {
                wd.push(r.varint_below(n as u64, "difference member")?);
            }
            if wd.windows(2).any(|p| p[0] >= p[1]) {
                return Err(Error::Format("difference members are not strictly ascending".into()));
            }
            entries.push(IIndexEntry {
                pid,
                wd: VertexSet::from_sorted_unchecked(wd),
            });
        }
        if !r.is_empty() {
            return Err(Error::Format("trailing bytes after entries".into()));
        }
        Self::from_entries(fingerprint, entries)
    }

    /// Checks the entries and recomputes window sizes along parent chains.
    fn from_entries(fingerprint: u64, entries: Vec<IIndexEntry>) -> Result<Self> {
        let n = entries.len();
        for (v, e) in entries.iter().enumerate() {
            if e.pid.is_some_and(|p| p as usize >= n) {
                return Err(Error::Format(format!("vertex {v} has parent out of range")));
            }
            if e.wd.iter().any(|x| x as usize >= n || x as usize == v) {
                return Err(Error::Format(format!("vertex {v} has an invalid difference set")));
            }
            if e.pid.is_none() && !e.wd.is_empty() {
                return Err(Error::Format(format!("vertex {v} has a difference but no parent")));
            }
        }
        const UNKNOWN: u64 = 0;
        let mut cardinality = vec![UNKNOWN; n];
        let mut chain: Vec<VertexId> = Vec::new();
        for start in 0..n as VertexId {
            let mut cur = Some(start);
            while let Some(x) = cur {
                if cardinality[x as usize] != UNKNOWN {
                    break;
                }
                if chain.len() > n {
                    return Err(Error::Format("parent links form a cycle".into()));
                }
                chain.push(x);
                cur = entries[x as usize].pid;
            }
            let mut below = cur.map_or(0, |x| cardinality[x as usize]);
            while let Some(x) = chain.pop() {
                below += 1 + entries[x as usize].wd.len() as u64;
                cardinality[x as usize] = below;
            }
        }
        Ok(Self {
            fingerprint,
            entries,
            cardinality,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&JsonIndex {
            fingerprint: self.fingerprint,
            entries: self.entries.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: JsonIndex = serde_json::from_str(text)?;
        let entries = doc
            .entries
            .into_iter()
            .map(|e| IIndexEntry {
                pid: e.pid,
                wd: VertexSet::from_unsorted(e.wd.into_vec()),
            })
            .collect();
        Self::from_entries(doc.fingerprint, entries)
    }
}

#[derive(Serialize, Deserialize)]
struct JsonIndex {
    fingerprint: u64,
    entries: Vec<IIndexEntry>,
}
