//! Deterministic on-disk formats: basis files, ensembles, sidecar headers.
//!
//! The basis file is binary: an 8-byte magic, a little-endian u32 format
//! version, a length-prefixed JSON header (kernel spec, kind, centers,
//! weights, diagonal), the row-major coefficient matrix as little-endian
//! f64, and a trailing SHA-256 over everything before it. Floating-point
//! values round-trip bit-exactly: the matrix is stored in raw bits and the
//! JSON encoder emits shortest-roundtrip decimals.
//!
//! Ensembles are written either as CSV (one row per path) or as raw
//! row-major little-endian f64, with a JSON sidecar that records the grid,
//! the kernel, the (seed, stream) range, and content hashes of both the
//! ensemble data and the basis file it was sampled from.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{DomainBox, NodeSet};
use crate::expansion::{BasisKind, ExpansionBasis};
use crate::kernels::KernelSpec;
use crate::sampler::{Ensemble, InnovationDist};
use crate::{Error, Result};

const BASIS_MAGIC: &[u8; 8] = b"KPBASIS\0";
const BASIS_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct BasisHeader {
    kind: BasisKind,
    kernel: KernelSpec,
    size: usize,
    dim: usize,
    domain: DomainBox,
    centers: Vec<f64>,
    weights: Option<Vec<f64>>,
    diag: Option<Vec<f64>>,
}

/// Hex-encoded SHA-256 of a byte slice.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Hex-encoded SHA-256 of a file's contents.
pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(sha256_hex(&bytes))
}

/// Serializes a basis to its binary file format.
pub fn write_basis(basis: &ExpansionBasis, path: &Path) -> Result<()> {
    let header = BasisHeader {
        kind: basis.kind(),
        kernel: basis.spec().clone(),
        size: basis.size(),
        dim: basis.centers().dim(),
        domain: basis.centers().domain().clone(),
        centers: basis.centers().flat().to_vec(),
        weights: basis.weights().map(|w| w.to_vec()),
        diag: basis.diag().map(|d| d.to_vec()),
    };
    let header_json = serde_json::to_vec(&header)
        .map_err(|e| Error::Format(format!("header encoding failed: {e}")))?;

    let mut buf = Vec::with_capacity(
        8 + 4 + 8 + header_json.len() + basis.coeffs().len() * 8 + 32,
    );
    buf.extend_from_slice(BASIS_MAGIC);
    buf.extend_from_slice(&BASIS_VERSION.to_le_bytes());
    buf.extend_from_slice(&(header_json.len() as u64).to_le_bytes());
    buf.extend_from_slice(&header_json);
    for v in basis.coeffs() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);

    let mut file = fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

/// Reads a basis file, verifying magic, version, and content hash.
pub fn read_basis(path: &Path) -> Result<ExpansionBasis> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 8 + 4 + 8 + 32 {
        return Err(Error::Format("basis file truncated".into()));
    }
    let (body, stored_hash) = bytes.split_at(bytes.len() - 32);
    let digest = Sha256::digest(body);
    if digest.as_slice() != stored_hash {
        return Err(Error::Format(
            "basis file checksum mismatch: content corrupted".into(),
        ));
    }
    if &body[..8] != BASIS_MAGIC {
        return Err(Error::Format("not a basis file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(body[8..12].try_into().unwrap());
    if version != BASIS_VERSION {
        return Err(Error::Format(format!(
            "unsupported basis format version {version}, expected {BASIS_VERSION}"
        )));
    }
    let header_len = u64::from_le_bytes(body[12..20].try_into().unwrap()) as usize;
    if body.len() < 20 + header_len {
        return Err(Error::Format("basis file truncated in header".into()));
    }
    let header: BasisHeader = serde_json::from_slice(&body[20..20 + header_len])
        .map_err(|e| Error::Format(format!("header decoding failed: {e}")))?;

    let matrix_bytes = &body[20 + header_len..];
    let expected = header.size * (header.centers.len() / header.dim) * 8;
    if matrix_bytes.len() != expected {
        return Err(Error::Format(format!(
            "coefficient matrix has {} bytes, expected {expected}",
            matrix_bytes.len()
        )));
    }
    let coeffs: Vec<f64> = matrix_bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();

    let centers = NodeSet::new(header.dim, header.centers, header.domain)?;
    ExpansionBasis::from_parts(
        header.kind,
        header.kernel,
        centers,
        header.weights,
        coeffs,
        header.size,
        header.diag,
    )
}

/// Output format of ensemble artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleFormat {
    Csv,
    Bin,
}

/// Sidecar header describing an ensemble artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleSidecar {
    pub schema_version: u32,
    pub kernel: KernelSpec,
    pub domain: DomainBox,
    pub grid_dim: usize,
    pub grid_points: Vec<f64>,
    pub format: EnsembleFormat,
    pub dist: InnovationDist,
    pub seed: u64,
    pub stream_start: u64,
    pub n_paths: usize,
    pub n_trunc: usize,
    pub basis_sha256: String,
    pub data_sha256: String,
}

/// Writes ensemble values as raw row-major little-endian f64.
pub fn write_ensemble_binary(ens: &Ensemble, path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(ens.values().len() * 8);
    for v in ens.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Writes ensemble values as CSV, one row per path. Values use shortest
/// round-trip decimal formatting, so re-parsing reproduces the exact bits.
pub fn write_ensemble_csv(ens: &Ensemble, path: &Path) -> Result<()> {
    let mut out = String::new();
    for i in 0..ens.n_paths() {
        let row = ens.row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a binary ensemble with known shape.
pub fn read_ensemble_binary(path: &Path, n_paths: usize, n_points: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() != n_paths * n_points * 8 {
        return Err(Error::Format(format!(
            "ensemble file has {} bytes, expected {}",
            bytes.len(),
            n_paths * n_points * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Writes the sidecar JSON next to an ensemble artifact.
pub fn write_sidecar(sidecar: &EnsembleSidecar, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(sidecar)
        .map_err(|e| Error::Format(format!("sidecar encoding failed: {e}")))?;
    fs::write(path, json)?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<EnsembleSidecar> {
    let bytes = fs::read(path)?;
    serde_json::from_slice(&bytes)
        .map_err(|e| Error::Format(format!("sidecar decoding failed: {e}")))
}

/// Writes a truncation-variance certificate table: one row per grid point,
/// the point coordinates followed by the residual variance.
pub fn write_certificate(grid: &NodeSet, residuals: &[f64], path: &Path) -> Result<()> {
    if residuals.len() != grid.len() {
        return Err(Error::InvalidSpec(
            "certificate needs one residual per grid point".into(),
        ));
    }
    let mut out = String::new();
    for (x, r) in grid.iter().zip(residuals) {
        for c in x {
            out.push_str(&format!("{c},"));
        }
        out.push_str(&format!("{r}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}
