use std::io;

use thiserror::Error;

use crate::attr::Family;

/// Errors produced by the index, its distance functions and the file formats.
#[derive(Debug, Error)]
pub enum JagError {
    #[error("filter family {filter:?} does not apply to attribute family {attribute:?}")]
    FilterFamilyMismatch { attribute: Family, filter: Family },

    #[error("bit width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("boolean predicate has no satisfying assignment")]
    UnsatisfiableFilter,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index is empty")]
    EmptyIndex,

    #[error("attribute sample has zero spread; cannot scale weights")]
    DegenerateAttributeSample,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("unsupported format version or magic: {0}")]
    VersionMismatch(String),

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },

    #[error("truncated input: {0}")]
    Truncated(String),

    #[error("unknown or unexpected tag {tag} in {context}")]
    TagMismatch { tag: u8, context: &'static str },

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

pub type Result<T, E = JagError> = std::result::Result<T, E>;
