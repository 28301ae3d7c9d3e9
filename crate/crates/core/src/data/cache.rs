//! Flat little-endian dataset cache.
//!
//! Layout: magic `BRL1`, `u32` n, `u32` d, then n rows of d `f64` values
//! followed by one label byte (`0x00` for −1, `0x01` for +1).

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::measures::{Label, LabeledDataset};

pub const CACHE_MAGIC: &[u8; 4] = b"BRL1";

pub fn write_cache_to<W: Write>(mut w: W, data: &LabeledDataset) -> std::io::Result<()> {
    let too_big = |what| std::io::Error::new(std::io::ErrorKind::InvalidInput, format!("{what} exceeds u32"));
    let n = u32::try_from(data.len()).map_err(|_| too_big("row count"))?;
    let d = u32::try_from(data.dim()).map_err(|_| too_big("dimension"))?;
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&d.to_le_bytes())?;
    for (x, y) in data.iter() {
        for v in x {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&[u8::from(y.is_positive())])?;
    }
    w.flush()
}

pub fn write_cache(path: impl AsRef<Path>, data: &LabeledDataset) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_cache_to(BufWriter::new(file), data).map_err(|e| Error::io(path, e))
}

pub fn read_cache_from<R: Read>(mut r: R) -> Result<LabeledDataset> {
    let io = |e| Error::io("<cache>", e);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::Schema(format!("bad cache magic {magic:?}")));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word).map_err(io)?;
    let n = u32::from_le_bytes(word) as usize;
    r.read_exact(&mut word).map_err(io)?;
    let d = u32::from_le_bytes(word) as usize;

    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    let mut row = vec![0u8; d * 8 + 1];
    for i in 0..n {
        r.read_exact(&mut row).map_err(io)?;
        for chunk in row[..d * 8].chunks_exact(8) {
            features.push(f64::from_le_bytes(chunk.try_into().expect("8-byte chunk")));
        }
        labels.push(match row[d * 8] {
            0 => Label::Negative,
            1 => Label::Positive,
            b => {
                return Err(Error::Parse {
                    row: i + 1,
                    column: d + 1,
                    message: format!("invalid label byte {b:#04x}"),
                })
            }
        });
    }
    LabeledDataset::from_flat(d, features, labels)
}

pub fn read_cache(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_cache_from(BufReader::new(file))
}
