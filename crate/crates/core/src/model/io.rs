//! Versioned binary model files.
//!
//! Layout: 8-byte magic `SHSPMDL\0`, u32 format version, u32 model kind
//! (1 = global, 2 = local), little-endian f64 payload, and a trailing
//! FNV-1a 64 checksum over everything before it. Loading verifies the
//! checksum before touching the payload, so flipped bits and truncation are
//! reported as corruption rather than as garbage models.

use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix3, Point3, Vector3};

use crate::error::{Error, Result};
use crate::model::{GlobalPcaModel, LocalWaveletModel, ShapeModel};
use crate::wavelet::SubdivisionHierarchy;

const MAGIC: &[u8; 8] = b"SHSPMDL\0";
const VERSION: u32 = 1;
const KIND_GLOBAL: u32 = 1;
const KIND_LOCAL: u32 = 2;

/// A model of either family, as stored on disk.
#[derive(Debug, Clone)]
pub enum TrainedModel {
    Global(GlobalPcaModel),
    Local(LocalWaveletModel),
}

impl TrainedModel {
    pub fn as_global(&self) -> Result<&GlobalPcaModel> {
        match self {
            TrainedModel::Global(m) => Ok(m),
            TrainedModel::Local(_) => Err(Error::InvalidArgument(
                "expected a global model, file holds a local one".into(),
            )),
        }
    }

    pub fn as_local(&self) -> Result<&LocalWaveletModel> {
        match self {
            TrainedModel::Local(m) => Ok(m),
            TrainedModel::Global(_) => Err(Error::InvalidArgument(
                "expected a local model, file holds a global one".into(),
            )),
        }
    }

    pub fn as_shape_model(&self) -> &dyn ShapeModel {
        match self {
            TrainedModel::Global(m) => m,
            TrainedModel::Local(m) => m,
        }
    }
}

impl From<GlobalPcaModel> for TrainedModel {
    fn from(m: GlobalPcaModel) -> Self {
        TrainedModel::Global(m)
    }
}

impl From<LocalWaveletModel> for TrainedModel {
    fn from(m: LocalWaveletModel) -> Self {
        TrainedModel::Local(m)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new(kind: u32) -> Self {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&kind.to_le_bytes());
        Writer { buf }
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64s(&mut self, vs: impl IntoIterator<Item = f64>) {
        for v in vs {
            self.buf.extend_from_slice(&v.to_le_bytes());
        }
    }

    fn finish(mut self) -> Vec<u8> {
        let checksum = fnv1a(&self.buf);
        self.buf.extend_from_slice(&checksum.to_le_bytes());
        self.buf
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn u64(&mut self) -> Result<u64> {
        let end = self.pos + 8;
        if end > self.buf.len() {
            return Err(Error::ModelFormat("payload truncated".into()));
        }
        let v = u64::from_le_bytes(self.buf[self.pos..end].try_into().unwrap());
        self.pos = end;
        Ok(v)
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v)
            .map_err(|_| Error::ModelFormat(format!("{what} count {v} does not fit in usize")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    /// Check that `n` f64 values fit in what remains, before allocating.
    fn expect_f64s(&self, n: usize, what: &str) -> Result<()> {
        let need = n
            .checked_mul(8)
            .ok_or_else(|| Error::ModelFormat(format!("{what} count overflows")))?;
        if self.pos + need > self.buf.len() {
            return Err(Error::ModelFormat(format!(
                "payload too short for {n} {what} values"
            )));
        }
        Ok(())
    }

    fn done(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::ModelFormat(format!(
                "{} trailing payload bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn encode_global(model: &GlobalPcaModel) -> Vec<u8> {
    let mut w = Writer::new(KIND_GLOBAL);
    let n = model.vertex_count();
    let d = model.parameter_count();
    w.u64(n as u64);
    w.u64(d as u64);
    w.u64(model.spectrum().len() as u64);
    w.f64s(model.mean().iter().flat_map(|p| [p.x, p.y, p.z]));
    w.f64s(model.basis().as_slice().iter().cloned());
    w.f64s(model.retained_eigenvalues().iter().cloned());
    w.f64s(model.spectrum().iter().cloned());
    w.finish()
}

fn decode_global(r: &mut Reader) -> Result<GlobalPcaModel> {
    let n = r.count("vertex")?;
    let d = r.count("mode")?;
    let spectrum_len = r.count("spectrum")?;
    let dim = n
        .checked_mul(3)
        .ok_or_else(|| Error::ModelFormat("vertex count overflows".into()))?;

    r.expect_f64s(dim, "mean")?;
    let mut mean = Vec::with_capacity(n);
    for _ in 0..n {
        mean.push(Point3::new(r.f64()?, r.f64()?, r.f64()?));
    }

    let basis_len = dim
        .checked_mul(d)
        .ok_or_else(|| Error::ModelFormat("basis size overflows".into()))?;
    r.expect_f64s(basis_len, "basis")?;
    let mut basis_data = Vec::with_capacity(basis_len);
    for _ in 0..basis_len {
        basis_data.push(r.f64()?);
    }
    let basis = DMatrix::from_vec(dim, d, basis_data);

    r.expect_f64s(d, "eigenvalue")?;
    let mut retained = DVector::zeros(d);
    for i in 0..d {
        retained[i] = r.f64()?;
    }
    r.expect_f64s(spectrum_len, "spectrum")?;
    let mut spectrum = DVector::zeros(spectrum_len);
    for i in 0..spectrum_len {
        spectrum[i] = r.f64()?;
    }
    r.done()?;
    Ok(GlobalPcaModel::from_parts(mean, basis, retained, spectrum))
}

fn encode_local(model: &LocalWaveletModel) -> Vec<u8> {
    let mut w = Writer::new(KIND_LOCAL);
    let h = model.hierarchy();
    let (base_rows, base_cols) = h.base_dims();
    w.u64(base_rows as u64);
    w.u64(base_cols as u64);
    w.u64(h.levels() as u64);
    w.f64s(model.coefficient_means().iter().flat_map(|v| [v.x, v.y, v.z]));
    w.f64s(
        model
            .coefficient_bases()
            .iter()
            .flat_map(|m| m.as_slice().to_vec()),
    );
    w.f64s(
        model
            .coefficient_sigma_vectors()
            .iter()
            .flat_map(|v| [v.x, v.y, v.z]),
    );
    w.finish()
}

fn decode_local(r: &mut Reader) -> Result<LocalWaveletModel> {
    let base_rows = r.count("base row")?;
    let base_cols = r.count("base col")?;
    let levels = r.count("level")?;
    let hierarchy = SubdivisionHierarchy::new(base_rows, base_cols, levels)
        .map_err(|e| Error::ModelFormat(format!("bad hierarchy header: {e}")))?;
    let n = hierarchy.vertex_count();

    r.expect_f64s(15 * n, "coefficient")?;
    let mut means = Vec::with_capacity(n);
    for _ in 0..n {
        means.push(Vector3::new(r.f64()?, r.f64()?, r.f64()?));
    }
    let mut bases = Vec::with_capacity(n);
    for _ in 0..n {
        let mut vals = [0.0f64; 9];
        for v in &mut vals {
            *v = r.f64()?;
        }
        bases.push(Matrix3::from_column_slice(&vals));
    }
    let mut sigmas = Vec::with_capacity(n);
    for _ in 0..n {
        sigmas.push(Vector3::new(r.f64()?, r.f64()?, r.f64()?));
    }
    r.done()?;
    LocalWaveletModel::from_parts(hierarchy, means, bases, sigmas)
}

pub fn save_model(path: impl AsRef<Path>, model: &TrainedModel) -> Result<()> {
    let bytes = match model {
        TrainedModel::Global(m) => encode_global(m),
        TrainedModel::Local(m) => encode_local(m),
    };
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    if bytes.len() < MAGIC.len() + 4 + 4 + 8 {
        return Err(Error::ModelFormat(format!(
            "{}: file too short to be a model",
            path.display()
        )));
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::ModelFormat(format!(
            "{}: bad magic, not a model file",
            path.display()
        )));
    }
    let body = &bytes[..bytes.len() - 8];
    let stored = u64::from_le_bytes(bytes[bytes.len() - 8..].try_into().unwrap());
    let computed = fnv1a(body);
    if stored != computed {
        return Err(Error::ModelFormat(format!(
            "{}: checksum mismatch (stored {stored:#018x}, computed {computed:#018x}); file is corrupted or truncated",
            path.display()
        )));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(Error::ModelFormat(format!(
            "{}: unsupported format version {version} (this build reads {VERSION})",
            path.display()
        )));
    }
    let kind = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
    let mut reader = Reader {
        buf: &body[16..],
        pos: 0,
    };
    match kind {
        KIND_GLOBAL => Ok(TrainedModel::Global(decode_global(&mut reader)?)),
        KIND_LOCAL => Ok(TrainedModel::Local(decode_local(&mut reader)?)),
        other => Err(Error::ModelFormat(format!(
            "{}: unknown model kind {other}",
            path.display()
        ))),
    }
}
