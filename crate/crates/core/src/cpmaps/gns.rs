use super::{Subalgebra, RANK_CUTOFF};
use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eigen, CMat, CVec, C64};

/// A state T ↦ tr(ρT) restricted to a subalgebra of Mₙ.
#[derive(Debug, Clone)]
pub struct FiniteState {
    pub algebra: Subalgebra,
    pub density: CMat,
}

impl FiniteState {
    pub fn new(algebra: Subalgebra, density: CMat) -> Result<Self> {
        let n = algebra.n();
        if density.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("density must be {n}x{n}")));
        }
        let herm = linalg::max_abs(&(&density - density.adjoint()));
        let min = linalg::min_hermitian_eigenvalue(&density);
        let tr = density.trace();
        if herm > 1e-12 || min < -1e-12 || (tr - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::Invalid(format!("density is not a state (min eigenvalue {min:.3e}, trace {tr})")));
        }
        Ok(FiniteState { algebra, density })
    }

    /// A ↦ ⟨Av, v⟩
    pub fn vector(algebra: Subalgebra, v: &CVec) -> Result<Self> {
        let nrm = v.norm();
        if (nrm - 1.0).abs() > 1e-12 {
            return Err(Error::NonUnitVector(nrm));
        }
        FiniteState::new(algebra, v * v.adjoint())
    }

    pub fn tracial(algebra: Subalgebra) -> Result<Self> {
        let n = algebra.n();
        FiniteState::new(algebra, CMat::identity(n, n) / C64::new(n as f64, 0.0))
    }

    pub fn value(&self, a: &CMat) -> C64 {
        (&self.density * a).trace()
    }
}

/// Left-regular representation on B/N with ⟨[a], [b]⟩ = τ(b*a).
#[derive(Debug, Clone)]
pub struct GnsRep {
    pub dim: usize,
    pub cyclic: CVec,
    algebra: Subalgebra,
    /// Orthonormal (trace inner product) basis of the algebra.
    basis: Vec<CMat>,
    /// Coefficients against `basis` ↦ GNS coordinates.
    to_gns: CMat,
    /// GNS coordinates ↦ coefficients (a right inverse of `to_gns`).
    from_gns: CMat,
}

impl GnsRep {
    fn coefficients(&self, a: &CMat) -> CVec {
        CVec::from_iterator(self.basis.len(), self.basis.iter().map(|f| (f.adjoint() * a).trace()))
    }

    /// π(a) for a in the algebra.
    pub fn represent(&self, a: &CMat) -> Result<CMat> {
        let r = self.algebra.membership_residual(a);
        if r > super::MEMBER_TOL {
            return Err(Error::Precondition { what: "operator is not in the algebra".into(), residual: r });
        }
        let k = self.basis.len();
        let mut mult = CMat::zeros(k, k);
        for (j, f) in self.basis.iter().enumerate() {
            mult.set_column(j, &self.coefficients(&(a * f)));
        }
        Ok(&self.to_gns * mult * &self.from_gns)
    }

    /// The class [a] ∈ B/N.
    pub fn vector_of(&self, a: &CMat) -> CVec {
        &self.to_gns * self.coefficients(a)
    }
}

pub fn gns(state: &FiniteState) -> Result<GnsRep> {
    let basis = state.algebra.orthonormal();
    let k = basis.len();
    let gram = CMat::from_fn(k, k, |j, l| state.value(&(basis[j].adjoint() * &basis[l])));
    let (vals, vecs) = hermitian_eigen(&gram);
    let top = vals.last().copied().unwrap_or(0.0);
    if vals[0] < -1e-10 * top.max(1.0) {
        return Err(Error::NonPsdGram(vals[0]));
    }
    let keep: Vec<usize> = (0..k).filter(|&i| vals[i] > RANK_CUTOFF * top && vals[i] > 0.0).collect();
    let dim = keep.len();
    let mut to_gns = CMat::zeros(dim, k);
    let mut from_gns = CMat::zeros(k, dim);
    for (r, &i) in keep.iter().enumerate() {
        let s = vals[i].sqrt();
        for j in 0..k {
            to_gns[(r, j)] = vecs[(j, i)].conj() * s;
            from_gns[(j, r)] = vecs[(j, i)] / s;
        }
    }
    let mut rep = GnsRep { dim, cyclic: CVec::zeros(dim), algebra: state.algebra.clone(), basis, to_gns, from_gns };
    rep.cyclic = rep.vector_of(state.algebra.unit());
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpmaps::matrix_unit;
    use crate::linalg::{basis_vector, random_complex_matrix, random_unit_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cyclic_rank(rep: &GnsRep, algebra: &Subalgebra) -> usize {
        let cols: Vec<CVec> = algebra.orthonormal().iter().map(|a| rep.represent(a).unwrap() * &rep.cyclic).collect();
        linalg::column_space(&CMat::from_columns(&cols), 1e-10).ncols()
    }

    fn check_reproduces(state: &FiniteState, rep: &GnsRep, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = state.algebra.n();
        for _ in 0..5 {
            let a = state.algebra.project(&random_complex_matrix(&mut rng, n, n));
            let pa = rep.represent(&a).unwrap();
            let lhs = rep.cyclic.dotc(&(pa * &rep.cyclic));
            assert!((lhs - state.value(&a)).norm() <= 1e-12, "{lhs} vs {}", state.value(&a));
        }
    }

    #[test]
    fn scalars_give_one_dimension() {
        let s = FiniteState::tracial(Subalgebra::scalars(1).unwrap()).unwrap();
        assert_eq!(gns(&s).unwrap().dim, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = FiniteState::vector(Subalgebra::scalars(3).unwrap(), &random_unit_vector(&mut rng, 3)).unwrap();
        assert_eq!(gns(&s).unwrap().dim, 1);
    }

    #[test]
    fn matrix_algebra_dimensions() {
        let trace = FiniteState::tracial(Subalgebra::full(2).unwrap()).unwrap();
        let rep = gns(&trace).unwrap();
        assert_eq!(rep.dim, 4);
        assert_eq!(cyclic_rank(&rep, &trace.algebra), 4);
        check_reproduces(&trace, &rep, 2);
        let vs = FiniteState::vector(Subalgebra::full(2).unwrap(), &basis_vector(2, 0)).unwrap();
        let rep = gns(&vs).unwrap();
        assert_eq!(rep.dim, 2);
        assert_eq!(cyclic_rank(&rep, &vs.algebra), 2);
        check_reproduces(&vs, &rep, 3);
    }

    #[test]
    fn representation_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = FiniteState::vector(Subalgebra::full(3).unwrap(), &random_unit_vector(&mut rng, 3)).unwrap();
        let rep = gns(&s).unwrap();
        assert_eq!(rep.dim, 3);
        let a = random_complex_matrix(&mut rng, 3, 3);
        let b = random_complex_matrix(&mut rng, 3, 3);
        let lhs = rep.represent(&(&a * &b)).unwrap();
        let rhs = rep.represent(&a).unwrap() * rep.represent(&b).unwrap();
        assert!(linalg::max_abs(&(lhs - rhs)) < 1e-10);
        assert!(rep.represent(&matrix_unit(3, 0, 1)).is_ok());
    }

    #[test]
    fn rejects_bad_density() {
        let d = CMat::identity(2, 2);
        assert!(FiniteState::new(Subalgebra::full(2).unwrap(), d).is_err());
    }
}
