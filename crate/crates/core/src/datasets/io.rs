//! Binary files, all little-endian.
//!
//! | file | layout |
//! |------|--------|
//! | vectors | `u32 n, u32 d, n*d f32` |
//! | attributes | `u32 n, u8 family tag`, then the attribute payload |
//! | filters | `u32 n, u8 family tag`, then the filter payload |
//! | ground truth | `u32 n, u32 k, n*k u32`, short rows padded with `u32::MAX` |
//!
//! Attribute payload: label `u32`; scalar `f64`; bitset and boolean
//! `u32 L` then `ceil(L/8)` bytes per point, bit `i` at byte `i/8`,
//! position `i%8`. Filter payload: equality `u32`; range `f64 lo, f64 hi`;
//! subset `u32 L` then `ceil(L/8)` bytes per query; boolean `u32 L` then
//! `ceil(2^L/8)` truth-table bytes per query.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::attr::{Assignment, Attribute, BitSet, Family, Filter, Interval, TruthTable};
use crate::bytes::{put_f32s, put_f64, put_u32, put_u8, to_u32, LeReader};
use crate::error::{JagError, Result};

const PAD: u32 = u32::MAX;

fn family_of(tag: u8, context: &'static str) -> Result<Family> {
    Family::from_tag(tag).ok_or(JagError::TagMismatch { tag, context })
}

pub fn write_vectors(w: &mut impl Write, dim: usize, vectors: &[f32]) -> Result<()> {
    if dim == 0 || !vectors.len().is_multiple_of(dim) {
        return Err(JagError::InvalidParam(format!("{} floats do not form rows of {dim}", vectors.len())));
    }
    put_u32(w, to_u32(vectors.len() / dim, "point count")?)?;
    put_u32(w, to_u32(dim, "dimension")?)?;
    put_f32s(w, vectors)?;
    Ok(())
}

/// Returns `(dim, vectors)`.
pub fn read_vectors(r: impl Read) -> Result<(usize, Vec<f32>)> {
    let mut r = LeReader::new(r);
    let n = r.u32("vector header")? as usize;
    let d = r.u32("vector header")? as usize;
    if d == 0 {
        return Err(JagError::InvalidParam("vector file has dimension 0".into()));
    }
    let v = r.f32s(n.saturating_mul(d), "vector data")?;
    r.expect_end("vector data")?;
    Ok((d, v))
}

fn attr_width(family: Family, attrs: &[Attribute]) -> Result<usize> {
    let width = attrs.first().and_then(Attribute::width).unwrap_or(0);
    for a in attrs {
        if a.family() != family {
            return Err(JagError::FilterFamilyMismatch {
                attribute: a.family(),
                filter: family,
            });
        }
        if a.width().unwrap_or(0) != width {
            return Err(JagError::WidthMismatch {
                expected: width,
                found: a.width().unwrap_or(0),
            });
        }
    }
    Ok(width)
}

/// Attribute payload for a known family and count.
pub(crate) fn put_attributes(w: &mut impl Write, family: Family, attrs: &[Attribute]) -> Result<()> {
    let width = attr_width(family, attrs)?;
    if matches!(family, Family::Bitset | Family::Boolean) {
        put_u32(w, to_u32(width, "attribute width")?)?;
    }
    for a in attrs {
        match a {
            Attribute::Label(l) => put_u32(w, *l)?,
            Attribute::Scalar(x) => put_f64(w, *x)?,
            Attribute::Bitset(b) => w.write_all(&b.to_bytes())?,
            Attribute::BoolAssign(x) => {
                let bytes = x.bits().to_le_bytes();
                w.write_all(&bytes[..width.div_ceil(8)])?
            }
        }
    }
    Ok(())
}

pub(crate) fn get_attributes<R: Read>(r: &mut LeReader<R>, family: Family, n: usize) -> Result<Vec<Attribute>> {
    let mut out = Vec::with_capacity(n.min(1 << 20));
    match family {
        Family::Label => {
            for _ in 0..n {
                out.push(Attribute::Label(r.u32("label attributes")?));
            }
        }
        Family::Scalar => {
            for _ in 0..n {
                out.push(Attribute::Scalar(r.f64("scalar attributes")?));
            }
        }
        Family::Bitset => {
            let width = r.u32("attribute width")? as usize;
            let stride = width.div_ceil(8);
            for _ in 0..n {
                out.push(Attribute::Bitset(BitSet::from_bytes(width, &r.bytes(stride, "bitset attributes")?)?));
            }
        }
        Family::Boolean => {
            let width = r.u32("attribute width")? as usize;
            if width > 30 {
                return Err(JagError::InvalidParam(format!("boolean width {width} exceeds 30")));
            }
            let stride = width.div_ceil(8);
            for _ in 0..n {
                let raw = r.bytes(stride, "boolean attributes")?;
                let mut b = [0u8; 4];
                b[..stride].copy_from_slice(&raw);
                out.push(Attribute::BoolAssign(Assignment::new(u32::from_le_bytes(b), width as u8)?));
            }
        }
    }
    Ok(out)
}

/// Writes an attribute file. An empty list is written with the label tag.
pub fn write_attributes(w: &mut impl Write, attrs: &[Attribute]) -> Result<()> {
    let family = attrs.first().map_or(Family::Label, Attribute::family);
    put_u32(w, to_u32(attrs.len(), "attribute count")?)?;
    put_u8(w, family.tag())?;
    put_attributes(w, family, attrs)
}

pub fn read_attributes(r: impl Read) -> Result<Vec<Attribute>> {
    let mut r = LeReader::new(r);
    let n = r.u32("attribute header")? as usize;
    let family = family_of(r.u8("attribute header")?, "attribute file")?;
    let attrs = get_attributes(&mut r, family, n)?;
    r.expect_end("attribute data")?;
    Ok(attrs)
}

pub fn write_filters(w: &mut impl Write, filters: &[Filter]) -> Result<()> {
    let family = filters.first().map_or(Family::Label, Filter::family);
    let width = filters.first().and_then(Filter::width).unwrap_or(0);
    for f in filters {
        if f.family() != family {
            return Err(JagError::FilterFamilyMismatch {
                attribute: family,
                filter: f.family(),
            });
        }
        if f.width().unwrap_or(0) != width {
            return Err(JagError::WidthMismatch {
                expected: width,
                found: f.width().unwrap_or(0),
            });
        }
    }
    put_u32(w, to_u32(filters.len(), "query count")?)?;
    put_u8(w, family.tag())?;
    if matches!(family, Family::Bitset | Family::Boolean) {
        put_u32(w, to_u32(width, "filter width")?)?;
    }
    for f in filters {
        match f {
            Filter::Equality(l) => put_u32(w, *l)?,
            Filter::Range(iv) => {
                put_f64(w, iv.lo())?;
                put_f64(w, iv.hi())?;
            }
            Filter::Subset(b) => w.write_all(&b.to_bytes())?,
            Filter::BoolPredicate(t) => w.write_all(&t.table().to_bytes())?,
        }
    }
    Ok(())
}

pub fn read_filters(r: impl Read) -> Result<Vec<Filter>> {
    let mut r = LeReader::new(r);
    let n = r.u32("filter header")? as usize;
    let family = family_of(r.u8("filter header")?, "filter file")?;
    let mut out = Vec::with_capacity(n.min(1 << 20));
    match family {
        Family::Label => {
            for _ in 0..n {
                out.push(Filter::Equality(r.u32("equality filters")?));
            }
        }
        Family::Scalar => {
            for _ in 0..n {
                let lo = r.f64("range filters")?;
                let hi = r.f64("range filters")?;
                out.push(Filter::Range(Interval::new(lo, hi)?));
            }
        }
        Family::Bitset => {
            let width = r.u32("filter width")? as usize;
            for _ in 0..n {
                out.push(Filter::Subset(BitSet::from_bytes(width, &r.bytes(width.div_ceil(8), "subset filters")?)?));
            }
        }
        Family::Boolean => {
            let vars = r.u32("filter width")?;
            if vars > 30 {
                return Err(JagError::InvalidParam(format!("predicate over {vars} variables exceeds 30")));
            }
            let size = 1usize << vars;
            for _ in 0..n {
                let table = BitSet::from_bytes(size, &r.bytes(size.div_ceil(8), "boolean filters")?)?;
                out.push(Filter::BoolPredicate(TruthTable::new(vars as u8, table)?));
            }
        }
    }
    r.expect_end("filter data")?;
    Ok(out)
}

/// Writes `k` ids per query, padding short rows with `u32::MAX`.
pub fn write_ground_truth(w: &mut impl Write, rows: &[Vec<u32>], k: usize) -> Result<()> {
    put_u32(w, to_u32(rows.len(), "query count")?)?;
    put_u32(w, to_u32(k, "k")?)?;
    let mut buf = Vec::with_capacity(rows.len() * k * 4);
    for row in rows {
        if row.len() > k {
            return Err(JagError::InvalidParam(format!("ground-truth row has {} ids, above k = {k}", row.len())));
        }
        for i in 0..k {
            buf.extend_from_slice(&row.get(i).copied().unwrap_or(PAD).to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Returns `(k, rows)` with padding removed.
pub fn read_ground_truth(r: impl Read) -> Result<(usize, Vec<Vec<u32>>)> {
    let mut r = LeReader::new(r);
    let n = r.u32("ground-truth header")? as usize;
    let k = r.u32("ground-truth header")? as usize;
    let raw = r.bytes(n.saturating_mul(k).saturating_mul(4), "ground-truth ids")?;
    r.expect_end("ground-truth ids")?;
    let ids: Vec<u32> = raw
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let rows = if k == 0 {
        vec![Vec::new(); n]
    } else {
        ids.chunks(k)
            .map(|c| c.iter().copied().take_while(|&id| id != PAD).collect())
            .collect()
    };
    Ok((k, rows))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn finish(mut w: BufWriter<File>) -> Result<()> {
    w.flush()?;
    Ok(())
}

pub fn save_vectors(path: impl AsRef<Path>, dim: usize, vectors: &[f32]) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_vectors(&mut w, dim, vectors)?;
    finish(w)
}

pub fn load_vectors(path: impl AsRef<Path>) -> Result<(usize, Vec<f32>)> {
    read_vectors(open(path.as_ref())?)
}

pub fn save_attributes(path: impl AsRef<Path>, attrs: &[Attribute]) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_attributes(&mut w, attrs)?;
    finish(w)
}

pub fn load_attributes(path: impl AsRef<Path>) -> Result<Vec<Attribute>> {
    read_attributes(open(path.as_ref())?)
}

pub fn save_filters(path: impl AsRef<Path>, filters: &[Filter]) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_filters(&mut w, filters)?;
    finish(w)
}

pub fn load_filters(path: impl AsRef<Path>) -> Result<Vec<Filter>> {
    read_filters(open(path.as_ref())?)
}

pub fn save_ground_truth(path: impl AsRef<Path>, rows: &[Vec<u32>], k: usize) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_ground_truth(&mut w, rows, k)?;
    finish(w)
}

pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<(usize, Vec<Vec<u32>>)> {
    read_ground_truth(open(path.as_ref())?)
}
