//! JSON and CSV formats. Complex numbers are `[re, im]`, dense matrices are
//! lists of rows, pointed spaces are `{ "dim": k, "xi": [[re, im], ...] }`.

use crate::cpmaps::{ExtensionCase, Subalgebra, UCPMap};
use crate::error::{Error, Result};
use crate::freeprod::ExactnessScenario;
use crate::hilbert::{FreeProductSpace, PointedSpace};
use crate::linalg::{CMat, CVec, SpMat, C64};
use crate::ncpoly::Symbol;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;

pub type JsonComplex = [f64; 2];
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn complex_to_json(z: C64) -> JsonComplex {
    [z.re, z.im]
}

pub fn complex_from_json(z: &JsonComplex) -> C64 {
    C64::new(z[0], z[1])
}

pub fn vector_to_json(v: &CVec) -> Vec<JsonComplex> {
    v.iter().map(|z| complex_to_json(*z)).collect()
}

pub fn vector_from_json(v: &[JsonComplex]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(complex_from_json))
}

pub fn matrix_to_json(m: &CMat) -> JsonMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| complex_to_json(m[(i, j)])).collect()).collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<CMat> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::DimensionMismatch("matrix rows have different lengths".into()));
    }
    Ok(CMat::from_fn(r, c, |i, j| complex_from_json(&rows[i][j])))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointedSpaceJson {
    pub dim: usize,
    pub xi: Vec<JsonComplex>,
}

impl PointedSpaceJson {
    pub fn from_space(s: &PointedSpace) -> Self {
        PointedSpaceJson { dim: s.dim(), xi: vector_to_json(s.xi()) }
    }

    pub fn to_space(&self) -> Result<PointedSpace> {
        if self.xi.len() != self.dim {
            return Err(Error::DimensionMismatch(format!("xi has {} entries for dim {}", self.xi.len(), self.dim)));
        }
        PointedSpace::new(vector_from_json(&self.xi))
    }
}

/// `{ "value": [re, im] }`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueJson {
    pub value: JsonComplex,
}

/// Sparse dump: shape plus `[row, col, re, im]` entries in column order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SparseJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64, f64)>,
}

impl SparseJson {
    pub fn from_sparse(m: &SpMat) -> Self {
        let mut entries = Vec::with_capacity(m.nnz());
        for (j, col) in m.outer_iterator().enumerate() {
            for (i, v) in col.iter() {
                entries.push((i, j, v.re, v.im));
            }
        }
        SparseJson { rows: m.rows(), cols: m.cols(), entries }
    }
}

/// A free-product model: factor spaces, truncation depth and matrices for
/// the polynomial symbols (symbol tag = factor index).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub factors: Vec<PointedSpaceJson>,
    pub depth: usize,
    #[serde(default)]
    pub assignment: BTreeMap<String, JsonMatrix>,
}

impl ModelJson {
    pub fn factors(&self) -> Result<Vec<PointedSpace>> {
        self.factors.iter().map(|f| f.to_space()).collect()
    }

    pub fn space(&self) -> Result<FreeProductSpace> {
        FreeProductSpace::new(self.factors()?, self.depth)
    }

    pub fn assignment(&self) -> Result<BTreeMap<Symbol, CMat>> {
        self.assignment.iter().map(|(k, m)| Ok((k.parse::<Symbol>()?, matrix_from_json(m)?))).collect()
    }
}

/// `ℂᵃ ⊕ ℂᵇ` with ξ₁ in the first block, and `ℂᶜ` with ξ₂.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioJson {
    pub b: usize,
    pub xi1: Vec<JsonComplex>,
    pub xi2: Vec<JsonComplex>,
}

impl ScenarioJson {
    pub fn to_scenario(&self) -> Result<ExactnessScenario> {
        ExactnessScenario::new(self.b, vector_from_json(&self.xi1), vector_from_json(&self.xi2))
    }

    pub fn from_scenario(s: &ExactnessScenario) -> Self {
        ScenarioJson { b: s.b, xi1: vector_to_json(s.h10.xi()), xi2: vector_to_json(s.h2.xi()) }
    }
}

/// Input of the extension command: a subalgebra basis, the images of the
/// basis matrices and the two unit vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionCaseJson {
    pub basis: Vec<JsonMatrix>,
    pub images: Vec<JsonMatrix>,
    pub xi: Vec<JsonComplex>,
    pub eta: Vec<JsonComplex>,
}

impl ExtensionCaseJson {
    pub fn to_case(&self) -> Result<ExtensionCase> {
        let basis = self.basis.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        let images = self.images.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        let sub = Subalgebra::new(basis)?;
        let phi = UCPMap::on_subalgebra(sub, &images)?;
        Ok(ExtensionCase { phi, xi: vector_from_json(&self.xi), eta: vector_from_json(&self.eta) })
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Io(e.to_string()))
}

/// Writes flat records with a header row.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn pointed_space_round_trip() {
        let text = r#"{ "dim": 2, "xi": [[0.6, 0.0], [0.0, 0.8]] }"#;
        let p: PointedSpaceJson = from_json(text).unwrap();
        let s = p.to_space().unwrap();
        assert_eq!(s.xi()[1], c(0.0, 0.8));
        let back = to_json(&PointedSpaceJson::from_space(&s)).unwrap();
        let again: PointedSpaceJson = from_json(&back).unwrap();
        assert_eq!(again.xi, p.xi);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let p = PointedSpaceJson { dim: 3, xi: vec![[1.0, 0.0]] };
        assert!(p.to_space().is_err());
        assert!(matrix_from_json(&vec![vec![[1.0, 0.0]], vec![]]).is_err());
        assert!(from_json::<ModelJson>(r#"{"factors": [], "depth": 2, "extra": 1}"#).is_err());
    }

    #[test]
    fn matrix_and_sparse_dumps() {
        let m = CMat::from_fn(2, 3, |i, j| c(i as f64, j as f64));
        assert_eq!(matrix_from_json(&matrix_to_json(&m)).unwrap(), m);
        let s = SparseJson::from_sparse(&crate::linalg::sp_from_dense(&m));
        assert_eq!((s.rows, s.cols), (2, 3));
        assert!(s.entries.contains(&(1, 2, 1.0, 2.0)));
    }

    #[test]
    fn csv_has_header_and_rows() {
        #[derive(Serialize)]
        struct Row {
            k: usize,
            gap: f64,
        }
        let text = to_csv(&[Row { k: 1, gap: 0.5 }, Row { k: 2, gap: 0.25 }]).unwrap();
        assert_eq!(text, "k,gap\n1,0.5\n2,0.25\n");
    }
}
