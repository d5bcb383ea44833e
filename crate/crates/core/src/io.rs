//! JSON documents for potentials, boundary matrices, spectral data and
//! accelerants. Complex numbers are `[re, im]` pairs; floats are written with
//! the shortest decimal that reads back to the same bits (at most 17
//! significant digits).

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::accelerant::Accelerant;
use crate::direct::{Potential, SPotential, SpectralData, SpectralDatum, SpectralWindow};
use crate::error::{Error, Result};
use crate::matcore::ComplexMatrix;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidInput("matrix must be a non-empty rectangular array".into()));
    }
    Ok(ComplexMatrix::from_fn(n, m, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialFile {
    pub r: usize,
    pub grid_n: usize,
    pub domain: [f64; 2],
    pub q: Vec<JsonMatrix>,
}

impl PotentialFile {
    pub fn from_potential(q: &Potential) -> Self {
        Self {
            r: q.r(),
            grid_n: q.intervals(),
            domain: [-1.0, 1.0],
            q: q.samples().iter().map(matrix_to_json).collect(),
        }
    }

    pub fn to_potential(&self) -> Result<Potential> {
        if self.domain != [-1.0, 1.0] {
            return Err(Error::InvalidInput("potential domain must be [-1, 1]".into()));
        }
        if self.q.len() != self.grid_n + 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} samples, found {}",
                self.grid_n + 1,
                self.q.len()
            )));
        }
        let samples = self.q.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        if samples.iter().any(|m| m.shape() != (self.r, self.r)) {
            return Err(Error::InvalidInput(format!("samples must be {0}x{0}", self.r)));
        }
        Potential::new(samples)
    }
}

/// Auxiliary potential `V` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SPotentialFile {
    pub d: usize,
    pub grid_n: usize,
    pub domain: [f64; 2],
    #[serde(rename = "V")]
    pub v: Vec<JsonMatrix>,
}

impl SPotentialFile {
    pub fn from_potential(v: &SPotential) -> Self {
        Self {
            d: v.d(),
            grid_n: v.intervals(),
            domain: [0.0, 1.0],
            v: v.samples().iter().map(matrix_to_json).collect(),
        }
    }

    pub fn to_potential(&self) -> Result<SPotential> {
        let samples = self.v.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        if samples.len() != self.grid_n + 1 || samples.iter().any(|m| m.shape() != (self.d, self.d)) {
            return Err(Error::InvalidInput("auxiliary potential has inconsistent shape".into()));
        }
        SPotential::new(samples)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryFile {
    pub n: usize,
    #[serde(rename = "U")]
    pub u: JsonMatrix,
}

impl UnitaryFile {
    pub fn from_matrix(u: &ComplexMatrix) -> Self {
        Self {
            n: u.nrows(),
            u: matrix_to_json(u),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let u = matrix_from_json(&self.u)?;
        if u.shape() != (self.n, self.n) {
            return Err(Error::InvalidInput(format!("U must be {0}x{0}", self.n)));
        }
        Ok(u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatumEntry {
    pub lambda: f64,
    pub mult: usize,
    #[serde(rename = "A")]
    pub a: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEntry {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDataFile {
    pub r: usize,
    pub data: Vec<DatumEntry>,
    pub window: WindowEntry,
    /// Boundary matrix the data were generated from; informational only.
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    pub u: Option<JsonMatrix>,
}

impl SpectralDataFile {
    pub fn from_data(a: &SpectralData) -> Self {
        Self {
            r: a.r,
            data: a
                .data
                .iter()
                .map(|d| DatumEntry {
                    lambda: d.lambda,
                    mult: d.mult,
                    a: matrix_to_json(&d.a),
                })
                .collect(),
            window: WindowEntry {
                lo: a.window.lo,
                hi: a.window.hi,
            },
            u: a.u.as_ref().map(matrix_to_json),
        }
    }

    pub fn to_data(&self) -> Result<SpectralData> {
        let data = self
            .data
            .iter()
            .map(|d| {
                Ok(SpectralDatum {
                    lambda: d.lambda,
                    mult: d.mult,
                    a: matrix_from_json(&d.a)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if !(self.window.lo < self.window.hi) {
            return Err(Error::InvalidInput("window must satisfy lo < hi".into()));
        }
        let u = self.u.as_ref().map(matrix_from_json).transpose()?;
        SpectralData::new(
            self.r,
            u,
            data,
            SpectralWindow {
                lo: self.window.lo,
                hi: self.window.hi,
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccelerantFile {
    pub d: usize,
    pub grid_n: usize,
    /// Samples at `t_k = k / grid_n`, `k = -grid_n..=grid_n`.
    #[serde(rename = "H")]
    pub h: Vec<JsonMatrix>,
    /// `H(0+)` when it differs from the sample at the origin.
    #[serde(rename = "H0_right", default, skip_serializing_if = "Option::is_none")]
    pub right_limit: Option<JsonMatrix>,
}

impl AccelerantFile {
    pub fn from_accelerant(h: &Accelerant) -> Self {
        Self {
            d: h.d,
            grid_n: h.n,
            h: h.samples.iter().map(matrix_to_json).collect(),
            right_limit: h.right_limit.as_ref().map(matrix_to_json),
        }
    }

    pub fn to_accelerant(&self) -> Result<Accelerant> {
        let samples = self.h.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        if samples.iter().any(|m| m.shape() != (self.d, self.d)) {
            return Err(Error::InvalidInput(format!("accelerant samples must be {0}x{0}", self.d)));
        }
        let mut h = Accelerant::new(self.grid_n, samples)?;
        if let Some(r) = &self.right_limit {
            h.right_limit = Some(matrix_from_json(r)?);
        }
        Ok(h)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

pub fn read_potential(path: &Path) -> Result<Potential> {
    read_json::<PotentialFile>(path)?.to_potential()
}

pub fn write_potential(path: &Path, q: &Potential) -> Result<()> {
    write_json(path, &PotentialFile::from_potential(q))
}

pub fn read_unitary(path: &Path) -> Result<ComplexMatrix> {
    read_json::<UnitaryFile>(path)?.to_matrix()
}

pub fn write_unitary(path: &Path, u: &ComplexMatrix) -> Result<()> {
    write_json(path, &UnitaryFile::from_matrix(u))
}

pub fn read_spectral_data(path: &Path) -> Result<SpectralData> {
    read_json::<SpectralDataFile>(path)?.to_data()
}

pub fn write_spectral_data(path: &Path, a: &SpectralData) -> Result<()> {
    write_json(path, &SpectralDataFile::from_data(a))
}

pub fn read_accelerant(path: &Path) -> Result<Accelerant> {
    read_json::<AccelerantFile>(path)?.to_accelerant()
}

pub fn write_accelerant(path: &Path, h: &Accelerant) -> Result<()> {
    write_json(path, &AccelerantFile::from_accelerant(h))
}

pub fn write_s_potential(path: &Path, v: &SPotential) -> Result<()> {
    write_json(path, &SPotentialFile::from_potential(v))
}

pub fn read_s_potential(path: &Path) -> Result<SPotential> {
    read_json::<SPotentialFile>(path)?.to_potential()
}
