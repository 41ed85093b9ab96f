//! On-disk subspace checkpoints: `manifest.json` plus little-endian
//! complex blobs `basis.bin`, `d.bin` and `e.bin` (matrices column-major).

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{KrylovSubspace, Provenance};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::pauli::PauliSum;
use crate::state::{complex_from_le_bytes, StateVector};

pub const FORMAT: &str = "qkff-subspace";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub n_qubits: usize,
    pub dimension: usize,
    /// `(axes, re, im)` per term.
    pub hamiltonian: Vec<(String, f64, f64)>,
    pub provenance: Vec<Provenance>,
    #[serde(default)]
    pub parameters: serde_json::Value,
}

fn complex_bytes(values: impl IntoIterator<Item = Complex64>) -> Vec<u8> {
    let mut out = Vec::new();
    for z in values {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn read_matrix(path: &Path, m: usize) -> Result<CMatrix> {
    let values = complex_from_le_bytes(&fs::read(path)?)?;
    if values.len() != m * m {
        return Err(Error::Checkpoint(format!(
            "{} holds {} entries, expected {}",
            path.display(),
            values.len(),
            m * m
        )));
    }
    Ok(CMatrix::from_vec(m, m, values))
}

/// Write `sub` into `dir` (created if missing), with free-form `parameters`
/// recorded in the manifest.
pub fn save(dir: &Path, sub: &KrylovSubspace, parameters: serde_json::Value) -> Result<()> {
    fs::create_dir_all(dir)?;
    let manifest = Manifest {
        format: FORMAT.into(),
        version: VERSION,
        n_qubits: sub.n_qubits(),
        dimension: sub.dim(),
        hamiltonian: sub
            .hamiltonian()
            .terms()
            .iter()
            .map(|t| (t.axes_string(), t.coefficient().re, t.coefficient().im))
            .collect(),
        provenance: sub.provenance().to_vec(),
        parameters,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
    let basis = sub.basis().iter().flat_map(|v| v.amplitudes().iter().copied());
    fs::write(dir.join("basis.bin"), complex_bytes(basis))?;
    fs::write(dir.join("d.bin"), complex_bytes(sub.d_matrix().iter().copied()))?;
    fs::write(dir.join("e.bin"), complex_bytes(sub.e_matrix().iter().copied()))?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let manifest: Manifest = serde_json::from_slice(&fs::read(dir.join("manifest.json"))?)?;
    if manifest.format != FORMAT || manifest.version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint {} v{}",
            manifest.format, manifest.version
        )));
    }
    Ok(manifest)
}

/// Load a checkpoint written by [`save`]; `D` and `E` are taken from disk
/// unchanged.
pub fn load(dir: &Path) -> Result<(KrylovSubspace, Manifest)> {
    let manifest = read_manifest(dir)?;
    let h = if manifest.hamiltonian.is_empty() {
        PauliSum::zero(manifest.n_qubits)?
    } else {
        PauliSum::from_triples(&manifest.hamiltonian)?
    };
    if h.n_qubits() != manifest.n_qubits {
        return Err(Error::Checkpoint("Hamiltonian width disagrees with n_qubits".into()));
    }
    let m = manifest.dimension;
    let amps = complex_from_le_bytes(&fs::read(dir.join("basis.bin"))?)?;
    let dim = 1usize << manifest.n_qubits;
    if amps.len() != m * dim {
        return Err(Error::Checkpoint(format!(
            "basis.bin holds {} amplitudes, expected {}",
            amps.len(),
            m * dim
        )));
    }
    let basis = amps
        .chunks(dim)
        .map(|c| StateVector::from_amplitudes(manifest.n_qubits, c.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let d = read_matrix(&dir.join("d.bin"), m)?;
    let e = read_matrix(&dir.join("e.bin"), m)?;
    let sub = KrylovSubspace::from_parts(h, basis, d, e, manifest.provenance.clone())?;
    Ok((sub, manifest))
}
