//! Binary tensor container shared with external consumers.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4 | magic `SDSP` |
//! | 2 | format version (u16) |
//! | 1 | dtype tag (1 = f32) |
//! | 1 | rank |
//! | 4 x rank | dims (u32 each) |
//! | 4 x prod(dims) | row-major f32 payload |
//!
//! Each container `x.sdsp` has a sidecar `x.json` with its metadata.

use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayD, IxDyn};
use serde::{Deserialize, Serialize};

use crate::scene::EventClass;
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SDSP";
pub const FORMAT_VERSION: u16 = 1;
pub const DTYPE_F32: u8 = 1;
pub const EXTENSION: &str = "sdsp";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TensorKind {
    Gammatonegram,
    Mask,
    Crossgram,
}

impl TensorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TensorKind::Gammatonegram => "gammatonegram",
            TensorKind::Mask => "mask",
            TensorKind::Crossgram => "crossgram",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub record_id: String,
    pub kind: TensorKind,
    pub shape: Vec<usize>,
    pub config_hash: String,
    /// Microphone channel for per-channel tensors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<usize>,
    /// `dB` for raw gammatonegrams, `linear` for masked ones, `label` for masks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
    /// Class a mask's binary view selects.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_class: Option<EventClass>,
}

/// A dense f32 tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub dims: Vec<usize>,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if n != data.len() {
            return Err(Error::Argument(format!(
                "{} values for shape {:?}",
                data.len(),
                dims
            )));
        }
        if dims.len() > u8::MAX as usize || dims.iter().any(|&d| d > u32::MAX as usize) {
            return Err(Error::Argument(format!("shape {dims:?} not representable")));
        }
        Ok(Self { dims, data })
    }

    pub fn from_array2(a: &Array2<f64>) -> Self {
        let (r, c) = a.dim();
        Self {
            dims: vec![r, c],
            data: a.iter().map(|&v| v as f32).collect(),
        }
    }

    pub fn to_array(&self) -> ArrayD<f32> {
        ArrayD::from_shape_vec(IxDyn(&self.dims), self.data.clone()).expect("validated shape")
    }

    pub fn to_array2(&self) -> Result<Array2<f64>> {
        if self.dims.len() != 2 {
            return Err(Error::Format(format!("expected rank 2, found {}", self.dims.len())));
        }
        Ok(Array2::from_shape_vec(
            (self.dims[0], self.dims[1]),
            self.data.iter().map(|&v| v as f64).collect(),
        )
        .expect("validated shape"))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 4 * self.dims.len() + 4 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(DTYPE_F32);
        out.push(self.dims.len() as u8);
        for &d in &self.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let fail = |msg: &str| Error::Format(format!("tensor container: {msg}"));
        if bytes.len() < 8 || &bytes[..4] != MAGIC {
            return Err(fail("bad magic"));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != FORMAT_VERSION {
            return Err(fail(&format!("unsupported version {version}")));
        }
        if bytes[6] != DTYPE_F32 {
            return Err(fail(&format!("unsupported dtype tag {}", bytes[6])));
        }
        let rank = bytes[7] as usize;
        let header = 8 + 4 * rank;
        if bytes.len() < header {
            return Err(fail("truncated header"));
        }
        let dims: Vec<usize> = bytes[8..header]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize)
            .collect();
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| fail("shape overflows"))?;
        if bytes.len() - header != n.checked_mul(4).ok_or_else(|| fail("shape overflows"))? {
            return Err(fail(&format!(
                "payload of {} bytes does not match shape {:?}",
                bytes.len() - header,
                dims
            )));
        }
        let data = bytes[header..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self { dims, data })
    }
}

/// Sidecar path belonging to a container path.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Write `tensor` to `path` and its metadata next to it. The sidecar shape
/// must agree with the tensor.
pub fn write_tensor(path: &Path, tensor: &Tensor, sidecar: &Sidecar) -> Result<()> {
    if sidecar.shape != tensor.dims {
        return Err(Error::Argument(format!(
            "sidecar shape {:?} differs from tensor shape {:?}",
            sidecar.shape, tensor.dims
        )));
    }
    std::fs::write(path, tensor.to_bytes()).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let mut text = serde_json::to_string_pretty(sidecar).map_err(|e| Error::json(&side, e))?;
    text.push('\n');
    std::fs::write(&side, text).map_err(|e| Error::io(&side, e))
}

pub fn read_tensor(path: &Path) -> Result<(Tensor, Sidecar)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let tensor = Tensor::from_bytes(&bytes).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let sidecar: Sidecar = serde_json::from_str(&text).map_err(|e| Error::json(&side, e))?;
    if sidecar.shape != tensor.dims {
        return Err(Error::Format(format!(
            "{}: sidecar shape {:?} differs from payload {:?}",
            path.display(),
            sidecar.shape,
            tensor.dims
        )));
    }
    Ok((tensor, sidecar))
}

/// Read a container and check it was produced under `config_hash`.
pub fn read_tensor_checked(path: &Path, kind: TensorKind, config_hash: &str) -> Result<(Tensor, Sidecar)> {
    let (t, s) = read_tensor(path)?;
    if s.kind != kind {
        return Err(Error::Format(format!(
            "{}: expected a {} container, found {}",
            path.display(),
            kind.as_str(),
            s.kind.as_str()
        )));
    }
    if s.config_hash != config_hash {
        return Err(Error::Validation(format!(
            "{}: produced under configuration {} but the dataset uses {}",
            path.display(),
            s.config_hash,
            config_hash
        )));
    }
    Ok((t, s))
}

/// File name of a per-record tensor, e.g. `c000001_f0003_ch0.gtg.sdsp`.
pub fn tensor_file_name(record_id: &str, channel: Option<usize>, tag: &str) -> String {
    let ch = channel.map(|c| format!("_ch{c}")).unwrap_or_default();
    format!("{record_id}{ch}.{tag}.{EXTENSION}")
}
