//! Index file format, little-endian:
//!
//! | field | type |
//! |-------|------|
//! | magic | `b"JAG1"` |
//! | version | `u32` = 1 |
//! | n, d | `u32`, `u32` |
//! | family tag, mode tag | `u8`, `u8` |
//! | R | `u32` |
//! | alpha | `f32` |
//! | thresholds or weights | `u32` count, then `f64` each |
//! | entry | `u64`, `u64::MAX` when empty |
//! | vectors | `n*d f32` |
//! | attributes | attribute payload as in [`crate::datasets::io`] |
//! | adjacency | per vertex `u32` degree, then the ids |
//! | checksum | CRC32 of every preceding byte |

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::attr::{AttrDistanceConfig, Family};
use crate::bytes::{put_f32, put_f32s, put_f64, put_u32, put_u64, put_u8, to_u32, LeReader};
use crate::datasets::io::{get_attributes, put_attributes};
use crate::error::{JagError, Result};
use crate::graph::{BuildMode, JagGraph};

pub const MAGIC: [u8; 4] = *b"JAG1";
pub const VERSION: u32 = 1;

/// Serializes `g`. Graphs built with frequency-weighted subset distances
/// cannot be stored, since the weights are not part of the format.
pub fn to_bytes(g: &JagGraph) -> Result<Vec<u8>> {
    if g.attr_config().label_weights().is_some() {
        return Err(JagError::InvalidParam(
            "graphs with weighted subset distances cannot be saved".into(),
        ));
    }
    let mut w = Vec::new();
    w.write_all(&MAGIC)?;
    put_u32(&mut w, VERSION)?;
    put_u32(&mut w, to_u32(g.len(), "point count")?)?;
    put_u32(&mut w, to_u32(g.dim(), "dimension")?)?;
    put_u8(&mut w, g.family().tag())?;
    put_u8(&mut w, g.mode().tag())?;
    put_u32(&mut w, to_u32(g.max_degree(), "degree bound")?)?;
    put_f32(&mut w, g.alpha())?;
    let values = g.mode().values();
    put_u32(&mut w, to_u32(values.len(), "mode value count")?)?;
    for &v in values {
        put_f64(&mut w, v)?;
    }
    put_u64(&mut w, g.entry().map_or(u64::MAX, u64::from))?;
    put_f32s(&mut w, g.vectors())?;
    put_attributes(&mut w, g.family(), g.attributes())?;
    for list in g.links() {
        put_u32(&mut w, list.len() as u32)?;
        for &u in list {
            put_u32(&mut w, u)?;
        }
    }
    let crc = crc32fast::hash(&w);
    put_u32(&mut w, crc)?;
    Ok(w)
}

/// Parses an index, checking magic, version, checksum and structure.
pub fn from_bytes(bytes: &[u8]) -> Result<JagGraph> {
    if bytes.len() < 8 || bytes[..4] != MAGIC {
        return Err(JagError::VersionMismatch("not an index file (bad magic)".into()));
    }
    let version = u32::from_le_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]);
    if version != VERSION {
        return Err(JagError::VersionMismatch(format!("index version {version}, expected {VERSION}")));
    }
    if bytes.len() < 12 {
        return Err(JagError::Truncated("index checksum".into()));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes([tail[0], tail[1], tail[2], tail[3]]);
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(JagError::ChecksumMismatch { stored, computed });
    }

    let mut r = LeReader::new(&body[8..]);
    let n = r.u32("index header")? as usize;
    let dim = r.u32("index header")? as usize;
    let tag = r.u8("index header")?;
    let family = Family::from_tag(tag).ok_or(JagError::TagMismatch {
        tag,
        context: "index family",
    })?;
    let mode_tag = r.u8("index header")?;
    let max_degree = r.u32("index header")? as usize;
    let alpha = r.f32("index header")?;
    let count = r.u32("mode values")? as usize;
    let mut values = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        values.push(r.f64("mode values")?);
    }
    let mode = match mode_tag {
        0 => BuildMode::Threshold(values),
        1 => BuildMode::Weight(values),
        tag => {
            return Err(JagError::TagMismatch {
                tag,
                context: "index mode",
            })
        }
    };
    let entry = match r.u64("entry")? {
        u64::MAX => None,
        e => Some(u32::try_from(e).map_err(|_| JagError::InvalidParam(format!("entry {e} out of range")))?),
    };
    let vectors = r.f32s(n.saturating_mul(dim), "vectors")?;
    let attrs = get_attributes(&mut r, family, n)?;
    let mut links = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let deg = r.u32("adjacency")? as usize;
        if deg > max_degree {
            return Err(JagError::InvalidParam(format!("degree {deg} exceeds bound {max_degree}")));
        }
        let mut list = Vec::with_capacity(deg);
        for _ in 0..deg {
            list.push(r.u32("adjacency")?);
        }
        links.push(list);
    }
    r.expect_end("adjacency")?;
    JagGraph::from_parts(dim, vectors, attrs, links, entry, max_degree, alpha, mode, AttrDistanceConfig::new(family))
}

pub fn save(g: &JagGraph, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_bytes(g)?)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<JagGraph> {
    from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attr::Attribute;

    fn single() -> JagGraph {
        JagGraph::from_parts(
            2,
            vec![0.5, -1.0],
            vec![Attribute::Scalar(3.0)],
            vec![vec![]],
            Some(0),
            4,
            1.2,
            BuildMode::Threshold(vec![1.0, 0.0]),
            AttrDistanceConfig::new(Family::Scalar),
        )
        .unwrap()
    }

    #[test]
    fn single_point_round_trip() {
        let g = single();
        let bytes = to_bytes(&g).unwrap();
        assert_eq!(from_bytes(&bytes).unwrap(), g);
    }

    #[test]
    fn empty_graph_round_trip() {
        let g = JagGraph::new(3, AttrDistanceConfig::new(Family::Label), 8, 1.3, BuildMode::Weight(vec![0.0])).unwrap();
        assert_eq!(from_bytes(&to_bytes(&g).unwrap()).unwrap(), g);
    }

    #[test]
    fn corrupted_magic() {
        let mut bytes = to_bytes(&single()).unwrap();
        bytes[0] = b'X';
        assert!(matches!(from_bytes(&bytes), Err(JagError::VersionMismatch(_))));
    }

    #[test]
    fn wrong_version() {
        let mut bytes = to_bytes(&single()).unwrap();
        bytes[4] = 2;
        assert!(matches!(from_bytes(&bytes), Err(JagError::VersionMismatch(_))));
    }

    #[test]
    fn flipped_byte_fails_checksum() {
        let mut bytes = to_bytes(&single()).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x10;
        assert!(matches!(from_bytes(&bytes), Err(JagError::ChecksumMismatch { .. })));
    }

    #[test]
    fn truncated_file() {
        let bytes = to_bytes(&single()).unwrap();
        let cut = &bytes[..bytes.len() - 9];
        let mut fixed = cut.to_vec();
        let crc = crc32fast::hash(&fixed);
        fixed.extend_from_slice(&crc.to_le_bytes());
        assert!(matches!(from_bytes(&fixed), Err(JagError::Truncated(_))));
    }
}
