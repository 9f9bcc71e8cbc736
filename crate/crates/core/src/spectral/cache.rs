//! Binary mode-table cache.
//!
//! Layout (all little-endian):
//!
//! ```text
//! magic        4 bytes  "GSMT"
//! version      u32
//! geometry     u32 tag, then parameters:
//!                1 = rectangle: c1 f64, c2 f64
//!                2 = triangle:  (none)
//!                3 = shifted:   inner geometry, shift f64
//! lambda_max   f64
//! count        u64
//! records      count × (u32, u32, f64)   quantum numbers, eigenvalue
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use super::geometry::ResonatorGeometry;
use super::table::{Mode, ModeTable};

pub const MAGIC: [u8; 4] = *b"GSMT";
pub const FORMAT_VERSION: u32 = 1;

const TAG_RECTANGLE: u32 = 1;
const TAG_TRIANGLE: u32 = 2;
const TAG_SHIFTED: u32 = 3;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("i/o error on mode cache: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt mode cache: {0}")]
    Corrupt(String),
    #[error("mode cache format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("mode cache holds {found}, but {expected} was requested")]
    GeometryMismatch { found: String, expected: String },
    #[error("mode cache covers lambda <= {available}, but {requested} was requested")]
    InsufficientCutoff { available: f64, requested: f64 },
}

/// Header fields of a cache file.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheHeader {
    pub version: u32,
    pub geometry: ResonatorGeometry,
    pub lambda_max: f64,
    pub count: u64,
}

pub fn cache_store(table: &ModeTable, path: impl AsRef<Path>) -> Result<(), CacheError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_table(table, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_table<W: Write>(table: &ModeTable, w: &mut W) -> Result<(), CacheError> {
    w.write_all(&MAGIC)?;
    w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
    write_geometry(table.geometry(), w)?;
    w.write_f64::<LittleEndian>(table.lambda_max())?;
    w.write_u64::<LittleEndian>(table.len() as u64)?;
    for m in table.modes() {
        w.write_u32::<LittleEndian>(m.quantum.0)?;
        w.write_u32::<LittleEndian>(m.quantum.1)?;
        w.write_f64::<LittleEndian>(m.eigenvalue)?;
    }
    Ok(())
}

/// Loads a table for `geometry`, truncated to `lambda_max`.
pub fn cache_load(
    path: impl AsRef<Path>,
    geometry: &ResonatorGeometry,
    lambda_max: f64,
) -> Result<ModeTable, CacheError> {
    let mut r = BufReader::new(File::open(path)?);
    read_table(&mut r, geometry, lambda_max)
}

/// Reads only the header, for freshness checks.
pub fn read_header(path: impl AsRef<Path>) -> Result<CacheHeader, CacheError> {
    let mut r = BufReader::new(File::open(path)?);
    read_header_from(&mut r)
}

fn read_header_from<R: Read>(r: &mut R) -> Result<CacheHeader, CacheError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    if magic != MAGIC {
        return Err(CacheError::Corrupt(format!("bad magic bytes {magic:?}")));
    }
    let version = r.read_u32::<LittleEndian>().map_err(truncated)?;
    if version != FORMAT_VERSION {
        return Err(CacheError::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let geometry = read_geometry(r, 0)?;
    let lambda_max = r.read_f64::<LittleEndian>().map_err(truncated)?;
    let count = r.read_u64::<LittleEndian>().map_err(truncated)?;
    Ok(CacheHeader {
        version,
        geometry,
        lambda_max,
        count,
    })
}

pub fn read_table<R: Read>(
    r: &mut R,
    geometry: &ResonatorGeometry,
    lambda_max: f64,
) -> Result<ModeTable, CacheError> {
    let header = read_header_from(r)?;
    if &header.geometry != geometry {
        return Err(CacheError::GeometryMismatch {
            found: header.geometry.to_string(),
            expected: geometry.to_string(),
        });
    }
    if header.lambda_max < lambda_max {
        return Err(CacheError::InsufficientCutoff {
            available: header.lambda_max,
            requested: lambda_max,
        });
    }

    let count = usize::try_from(header.count)
        .map_err(|_| CacheError::Corrupt(format!("record count {} too large", header.count)))?;
    let mut modes = Vec::new();
    let mut previous: Option<Mode> = None;
    for i in 0..count {
        let a = r.read_u32::<LittleEndian>().map_err(truncated)?;
        let b = r.read_u32::<LittleEndian>().map_err(truncated)?;
        let eigenvalue = r.read_f64::<LittleEndian>().map_err(truncated)?;
        let mode = Mode {
            quantum: (a, b),
            eigenvalue,
        };
        if !geometry.is_admissible(mode.quantum)
            || geometry.eigenvalue(mode.quantum).to_bits() != eigenvalue.to_bits()
        {
            return Err(CacheError::Corrupt(format!(
                "record {i} {:?} does not match its eigenvalue formula",
                mode.quantum
            )));
        }
        if eigenvalue > header.lambda_max {
            return Err(CacheError::Corrupt(format!(
                "record {i} exceeds the stored cutoff"
            )));
        }
        if let Some(p) = previous {
            if (p.eigenvalue, p.quantum) >= (eigenvalue, mode.quantum) {
                return Err(CacheError::Corrupt(format!("record {i} is out of order")));
            }
        }
        previous = Some(mode);
        if eigenvalue <= lambda_max {
            modes.push(mode);
        }
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(CacheError::Corrupt("trailing bytes after records".into()));
    }
    Ok(ModeTable::from_sorted_parts(
        geometry.clone(),
        lambda_max,
        modes,
    ))
}

fn truncated(e: io::Error) -> CacheError {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        CacheError::Corrupt("file is truncated".into())
    } else {
        CacheError::Io(e)
    }
}

fn write_geometry<W: Write>(g: &ResonatorGeometry, w: &mut W) -> io::Result<()> {
    match g {
        ResonatorGeometry::Rectangle { c1, c2 } => {
            w.write_u32::<LittleEndian>(TAG_RECTANGLE)?;
            w.write_f64::<LittleEndian>(*c1)?;
            w.write_f64::<LittleEndian>(*c2)
        }
        ResonatorGeometry::Triangle => w.write_u32::<LittleEndian>(TAG_TRIANGLE),
        ResonatorGeometry::Shifted { inner, shift } => {
            w.write_u32::<LittleEndian>(TAG_SHIFTED)?;
            write_geometry(inner, w)?;
            w.write_f64::<LittleEndian>(*shift)
        }
    }
}

fn read_geometry<R: Read>(r: &mut R, depth: u32) -> Result<ResonatorGeometry, CacheError> {
    let tag = r.read_u32::<LittleEndian>().map_err(truncated)?;
    let g = match tag {
        TAG_RECTANGLE => {
            let c1 = r.read_f64::<LittleEndian>().map_err(truncated)?;
            let c2 = r.read_f64::<LittleEndian>().map_err(truncated)?;
            ResonatorGeometry::Rectangle { c1, c2 }
        }
        TAG_TRIANGLE => ResonatorGeometry::Triangle,
        TAG_SHIFTED if depth == 0 => {
            let inner = read_geometry(r, depth + 1)?;
            let shift = r.read_f64::<LittleEndian>().map_err(truncated)?;
            ResonatorGeometry::Shifted {
                inner: Box::new(inner),
                shift,
            }
        }
        other => return Err(CacheError::Corrupt(format!("unknown geometry tag {other}"))),
    };
    g.validate()
        .map_err(|e| CacheError::Corrupt(format!("invalid geometry: {e}")))?;
    Ok(g)
}
