//! Binary model files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "FHTNN1\n"                      magic, 7 bytes
//! u32                             number of blobs
//! per blob: u32 rank, rank × u32 dims, product(dims) × f64
//! ```

use std::path::Path;

use super::{NnError, Param};

pub const MODEL_MAGIC: &[u8; 7] = b"FHTNN1\n";

pub fn encode_model(params: &[Param]) -> Vec<u8> {
    let mut out = MODEL_MAGIC.to_vec();
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for p in params {
        out.extend_from_slice(&(p.dims.len() as u32).to_le_bytes());
        for &d in &p.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in &p.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<&[u8], NnError> {
        if self.bytes.len() - self.pos < n {
            return Err(NnError::ModelFormat {
                offset: self.pos,
                message: format!(
                    "truncated while reading {what}: need {n} bytes, {} left",
                    self.bytes.len() - self.pos
                ),
            });
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32, NnError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<Vec<Param>, NnError> {
    let mut r = Reader { bytes, pos: 0 };
    if bytes.len() < MODEL_MAGIC.len() || &bytes[..MODEL_MAGIC.len()] != MODEL_MAGIC {
        return Err(NnError::ModelFormat {
            offset: 0,
            message: "bad magic, expected \"FHTNN1\\n\"".into(),
        });
    }
    r.pos = MODEL_MAGIC.len();
    let count = r.u32("blob count")?;
    let mut params = Vec::new();
    for b in 0..count {
        let rank = r.u32(&format!("rank of blob {b}"))? as usize;
        let mut dims = Vec::with_capacity(rank.min(8));
        for _ in 0..rank {
            dims.push(r.u32(&format!("dims of blob {b}"))? as usize);
        }
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or(NnError::ModelFormat {
                offset: r.pos,
                message: format!("blob {b} is too large"),
            })?;
        let nbytes = len.checked_mul(8).ok_or(NnError::ModelFormat {
            offset: r.pos,
            message: "overflow".into(),
        })?;
        let raw = r.take(nbytes, &format!("values of blob {b}"))?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        params.push(Param { dims, data });
    }
    if r.pos != bytes.len() {
        return Err(NnError::ModelFormat {
            offset: r.pos,
            message: "trailing bytes after last blob".into(),
        });
    }
    Ok(params)
}

/// Writes through a temporary file renamed into place.
pub fn save_model(path: &Path, params: &[Param]) -> Result<(), NnError> {
    crate::fsutil::write_atomic(path, &encode_model(params))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<Vec<Param>, NnError> {
    decode_model(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> Vec<Param> {
        vec![
            Param {
                dims: vec![2, 1, 3, 3],
                data: (0..18).map(|i| i as f64 * -0.1 + f64::EPSILON).collect(),
            },
            Param {
                dims: vec![2],
                data: vec![f64::MIN_POSITIVE, -0.0],
            },
        ]
    }

    #[test]
    fn bit_exact_round_trip() {
        let p = params();
        let back = decode_model(&encode_model(&p)).unwrap();
        for (a, b) in p.iter().zip(&back) {
            assert_eq!(a.dims, b.dims);
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a.data), bits(&b.data));
        }
    }

    #[test]
    fn truncation_reports_offset() {
        let bytes = encode_model(&params());
        let cut = &bytes[..bytes.len() - 3];
        match decode_model(cut) {
            Err(NnError::ModelFormat { offset, message }) => {
                assert!(offset > 7);
                assert!(message.contains("truncated"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_magic_names_expected() {
        let mut bytes = encode_model(&params());
        bytes[0] = b'X';
        match decode_model(&bytes) {
            Err(NnError::ModelFormat { offset: 0, message }) => assert!(message.contains("FHTNN1")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        save_model(&path, &params()).unwrap();
        assert_eq!(load_model(&path).unwrap(), params());
    }
}
