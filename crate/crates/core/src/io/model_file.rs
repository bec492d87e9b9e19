//! Versioned binary container for fitted models.
//!
//! Layout (little endian):
//!
//! ```text
//! "STML"                 magic
//! u32                    format version
//! u32 + bytes            feature-space tag (UTF-8)
//! u64                    n
//! f64 f64 f64            lambda1 lambda2 lambda3
//! u64 u64 f64            tau max_iters rel_tol
//! u32 + bytes            provenance (UTF-8 run configuration, may be empty)
//! n·n × f64              transform, row-major
//! [u8; 32]               SHA-256 of everything above
//! ```

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model_core::{HyperParams, RealMatrix};
use crate::shared_transform::SharedTransformModel;

pub const MAGIC: &[u8; 4] = b"STML";
pub const FORMAT_VERSION: u32 = 1;
const CHECKSUM_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: SharedTransformModel,
    pub provenance: String,
}

impl ModelFile {
    /// Learned scalars stored in the payload: the transform entries only.
    pub fn parameter_count(&self) -> usize {
        self.model.parameter_count()
    }
}

pub fn encode_model(model: &SharedTransformModel, provenance: &str) -> Vec<u8> {
    let n = model.feature_dim();
    let h = model.hyper();
    let mut out = Vec::with_capacity(64 + 8 * n * n + provenance.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    put_str(&mut out, model.feature_space_tag());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for v in [h.lambda1, h.lambda2, h.lambda3] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(h.tau as u64).to_le_bytes());
    out.extend_from_slice(&(h.max_iters as u64).to_le_bytes());
    out.extend_from_slice(&h.rel_tol.to_le_bytes());
    put_str(&mut out, provenance);
    let t = model.transform();
    for r in 0..n {
        for c in 0..n {
            out.extend_from_slice(&t[(r, c)].to_le_bytes());
        }
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

pub fn decode_model(bytes: &[u8]) -> Result<ModelFile> {
    if bytes.len() < MAGIC.len() + 4 + CHECKSUM_LEN {
        return Err(Error::Format("file is truncated".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("missing STML magic".into()));
    }
    let (body, stored) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
    if Sha256::digest(body).as_slice() != stored {
        return Err(Error::Checksum);
    }
    let mut cur = Cursor { buf: body, pos: 4 };
    let version = cur.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let tag = cur.string()?;
    let n = cur.u64()? as usize;
    let hyper = HyperParams {
        lambda1: cur.f64()?,
        lambda2: cur.f64()?,
        lambda3: cur.f64()?,
        tau: cur.u64()? as usize,
        max_iters: cur.u64()? as usize,
        rel_tol: cur.f64()?,
    };
    let provenance = cur.string()?;
    let count = n
        .checked_mul(n)
        .filter(|&c| c > 0 && c <= (body.len() - cur.pos) / 8)
        .ok_or_else(|| Error::Format(format!("payload cannot hold a {n}x{n} transform")))?;
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        entries.push(cur.f64()?);
    }
    if cur.pos != body.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes",
            body.len() - cur.pos
        )));
    }
    let transform = RealMatrix::from_row_slice(n, n, &entries)?;
    Ok(ModelFile {
        model: SharedTransformModel::new(transform, hyper, tag)?,
        provenance,
    })
}

pub fn save_model(model: &SharedTransformModel, provenance: &str, path: &Path) -> Result<()> {
    fs::write(path, encode_model(model, provenance)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<SharedTransformModel> {
    Ok(load_model_file(path)?.model)
}

pub fn load_model_file(path: &Path) -> Result<ModelFile> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, len: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format("file is truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|_| Error::Format("string is not UTF-8".into()))
    }
}
