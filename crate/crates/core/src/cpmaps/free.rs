use super::{matrix_unit, UCPMap};
use crate::error::{Error, Result};
use crate::freeprod::{lift_left_operator, FreeOperator, OperatorSource};
use crate::hilbert::{FreeProductSpace, PointedSpace};
use crate::linalg::{self, vector_expectation, CMat};
use crate::ncpoly::{center_decompose, NCPoly, StateFunctional, Symbol};
use std::collections::BTreeMap;
use std::sync::Arc;

pub const COMPAT_TOL: f64 = 1e-10;

/// max over matrix units T of |⟨φ(T)ξ, ξ⟩ − ⟨Tξ′, ξ′⟩|.
pub fn check_state_compatibility(phi: &UCPMap, source: &PointedSpace, target: &PointedSpace) -> Result<f64> {
    let n = source.dim();
    if phi.n() != n || phi.m() != target.dim() {
        return Err(Error::DimensionMismatch(format!(
            "map is {}→{}, spaces are {}→{}",
            phi.n(),
            phi.m(),
            n,
            target.dim()
        )));
    }
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let t = matrix_unit(n, a, b);
            let lhs = vector_expectation(&phi.apply(&t), target.xi());
            let rhs = vector_expectation(&t, source.xi());
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

/// Φ(p) on the target free product. Symbols of tag i are assigned matrices
/// on the i-th source factor; p is centered against the source states and
/// every centered factor A° is sent to the lift of φᵢ(A°).
pub fn free_product_ucp(
    maps: &[UCPMap],
    p: &NCPoly,
    source: &[PointedSpace],
    assignment: &BTreeMap<Symbol, CMat>,
    target: &Arc<FreeProductSpace>,
) -> Result<FreeOperator> {
    if maps.len() != source.len() || maps.len() != target.num_factors() {
        return Err(Error::IncompatibleFactors(format!(
            "{} maps, {} source factors, {} target factors",
            maps.len(),
            source.len(),
            target.num_factors()
        )));
    }
    for (i, phi) in maps.iter().enumerate() {
        let residual = check_state_compatibility(phi, &source[i], &target.factors()[i])?;
        if residual > COMPAT_TOL {
            return Err(Error::StateIncompatible { factor: i, residual });
        }
    }
    let states: BTreeMap<usize, StateFunctional> =
        source.iter().enumerate().map(|(i, s)| (i, StateFunctional::Vector(s.xi().clone()))).collect();
    let dec = center_decompose(p, assignment, &states)?;
    let matrix = dec.recombine(&linalg::sp_identity(target.dim()), |f| {
        Ok(lift_left_operator(&maps[f.tag].apply(&f.matrix), f.tag, target)?.matrix)
    })?;
    Ok(FreeOperator { space: target.clone(), matrix, source: OperatorSource::Composite, depth_guard: p.degree() })
}
