//! Completely positive maps between matrix algebras: Choi and Kraus forms,
//! GNS and Stinespring constructions, state-preserving extensions from a
//! subalgebra, and free products of unital completely positive maps.

mod extend;
mod free;
mod gns;

pub use extend::{extend_state_preserving, random_cases, random_compatible_case, Extension, ExtensionCase, ExtensionReport};
pub use free::{check_state_compatibility, free_product_ucp, COMPAT_TOL};
pub use gns::{gns, FiniteState, GnsRep};

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eigen, CMat, CVec, ONE, ZERO};

/// Negative Choi eigenvalues above this are treated as rounding.
pub const CP_TOL: f64 = 1e-10;
/// Relative eigenvalue cutoff for rank decisions.
pub const RANK_CUTOFF: f64 = 1e-12;
/// Least-squares residual accepted for subalgebra membership.
pub const MEMBER_TOL: f64 = 1e-10;

pub fn matrix_unit(n: usize, a: usize, b: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(a, b)] = ONE;
    m
}

fn vec_of(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

fn unvec(v: &CVec, n: usize) -> CMat {
    CMat::from_column_slice(n, n, v.as_slice())
}

/// A *-subalgebra of Mₙ spanned by an explicit list of matrices.
#[derive(Debug, Clone)]
pub struct Subalgebra {
    n: usize,
    basis: Vec<CMat>,
    /// Orthonormal columns spanning vec(B) in the trace inner product.
    onb: CMat,
    unit: CMat,
}

impl Subalgebra {
    pub fn new(basis: Vec<CMat>) -> Result<Self> {
        let n = match basis.first() {
            Some(b) => b.nrows(),
            None => return Err(Error::Invalid("empty subalgebra basis".into())),
        };
        if n == 0 || basis.iter().any(|b| b.shape() != (n, n)) {
            return Err(Error::DimensionMismatch(format!("subalgebra basis must be {n}x{n} matrices")));
        }
        let cols: Vec<CVec> = basis.iter().map(vec_of).collect();
        let onb = linalg::column_space(&CMat::from_columns(&cols), RANK_CUTOFF);
        if onb.ncols() == 0 {
            return Err(Error::Invalid("subalgebra basis spans zero".into()));
        }
        let mut sub = Subalgebra { n, basis, onb, unit: CMat::zeros(n, n) };
        let mut worst: f64 = 0.0;
        for (j, x) in sub.basis.iter().enumerate() {
            worst = worst.max(sub.membership_residual(&x.adjoint()));
            for y in &sub.basis[j..] {
                worst = worst.max(sub.membership_residual(&(x * y)));
                worst = worst.max(sub.membership_residual(&(y * x)));
            }
        }
        if worst > MEMBER_TOL {
            return Err(Error::NotSubalgebra(worst));
        }
        sub.unit = sub.project(&CMat::identity(n, n));
        Ok(sub)
    }

    /// All of Mₙ, spanned by the matrix units.
    pub fn full(n: usize) -> Result<Self> {
        let mut basis = Vec::with_capacity(n * n);
        for b in 0..n {
            for a in 0..n {
                basis.push(matrix_unit(n, a, b));
            }
        }
        Subalgebra::new(basis)
    }

    pub fn scalars(n: usize) -> Result<Self> {
        Subalgebra::new(vec![CMat::identity(n, n)])
    }

    pub fn diagonal(n: usize) -> Result<Self> {
        Subalgebra::new((0..n).map(|k| matrix_unit(n, k, k)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Linear dimension of the subalgebra.
    pub fn dim(&self) -> usize {
        self.onb.ncols()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    /// The unit of the subalgebra, a projection in Mₙ.
    pub fn unit(&self) -> &CMat {
        &self.unit
    }

    pub fn is_unital(&self) -> bool {
        linalg::max_abs(&(&self.unit - CMat::identity(self.n, self.n))) <= MEMBER_TOL
    }

    /// Orthonormal basis in the trace inner product.
    pub fn orthonormal(&self) -> Vec<CMat> {
        (0..self.dim()).map(|k| unvec(&self.onb.column(k).into_owned(), self.n)).collect()
    }

    /// Orthogonal projection of Mₙ onto the subalgebra in the trace inner product.
    pub fn project(&self, t: &CMat) -> CMat {
        let v = vec_of(t);
        let coeff = self.onb.adjoint() * &v;
        unvec(&(&self.onb * coeff), self.n)
    }

    /// ‖T − E(T)‖_F / max(1, ‖T‖_F)
    pub fn membership_residual(&self, t: &CMat) -> f64 {
        linalg::frobenius(&(t - self.project(t))) / linalg::frobenius(t).max(1.0)
    }

    /// Least-squares coefficients of T against the given basis.
    pub fn coordinates(&self, t: &CMat) -> CVec {
        let cols: Vec<CVec> = self.basis.iter().map(vec_of).collect();
        let m = CMat::from_columns(&cols);
        linalg::pinv(&m, RANK_CUTOFF) * vec_of(t)
    }
}

/// C[(a,c),(b,d)] = f(E_ab)_cd with row index a·m + c.
pub fn choi_of(n: usize, m: usize, f: impl Fn(&CMat) -> CMat) -> Result<CMat> {
    let mut out = CMat::zeros(n * m, n * m);
    for a in 0..n {
        for b in 0..n {
            let img = f(&matrix_unit(n, a, b));
            if img.shape() != (m, m) {
                return Err(Error::DimensionMismatch(format!("map image is {:?}, expected {m}x{m}", img.shape())));
            }
            for cc in 0..m {
                for d in 0..m {
                    out[(a * m + cc, b * m + d)] = img[(cc, d)];
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub enum Domain {
    Full(usize),
    Sub(Subalgebra),
}

impl Domain {
    pub fn n(&self) -> usize {
        match self {
            Domain::Full(n) => *n,
            Domain::Sub(s) => s.n(),
        }
    }
}

/// A unital completely positive map φ: Mₙ → Mₘ, φ(T) = Σ Kᵢ T Kᵢ*. A map
/// on a subalgebra B is stored as φ∘E with E the trace-preserving
/// projection onto B, so it acts on all of Mₙ.
#[derive(Debug, Clone)]
pub struct UCPMap {
    domain: Domain,
    m: usize,
    choi: CMat,
    kraus: Vec<CMat>,
}

impl UCPMap {
    pub fn from_choi(domain: Domain, m: usize, choi: CMat) -> Result<Self> {
        let n = domain.n();
        if choi.shape() != (n * m, n * m) {
            return Err(Error::DimensionMismatch(format!("Choi matrix must be {0}x{0}", n * m)));
        }
        let herm = linalg::max_abs(&(&choi - choi.adjoint()));
        if herm > CP_TOL {
            return Err(Error::NotCompletelyPositive(-herm));
        }
        let (vals, vecs) = hermitian_eigen(&choi);
        let top = vals.last().copied().unwrap_or(0.0).max(0.0);
        if vals[0] < -CP_TOL {
            return Err(Error::NotCompletelyPositive(vals[0]));
        }
        let mut kraus = Vec::new();
        for (k, &lam) in vals.iter().enumerate().rev() {
            if lam <= RANK_CUTOFF * top || lam <= 0.0 {
                continue;
            }
            let s = lam.sqrt();
            kraus.push(CMat::from_fn(m, n, |cc, a| vecs[(a * m + cc, k)] * s));
        }
        let map = UCPMap { domain, m, choi, kraus };
        let unital = map.unital_residual();
        if unital > CP_TOL {
            return Err(Error::Precondition { what: "map is not unital".into(), residual: unital });
        }
        Ok(map)
    }

    pub fn from_fn(n: usize, m: usize, f: impl Fn(&CMat) -> CMat) -> Result<Self> {
        UCPMap::from_choi(Domain::Full(n), m, choi_of(n, m, f)?)
    }

    /// Kraus matrices are m×n with φ(T) = Σ Kᵢ T Kᵢ*.
    pub fn from_kraus(n: usize, kraus: &[CMat]) -> Result<Self> {
        let m = kraus.first().map(|k| k.nrows()).ok_or_else(|| Error::Invalid("no Kraus matrices".into()))?;
        if kraus.iter().any(|k| k.shape() != (m, n)) {
            return Err(Error::DimensionMismatch(format!("Kraus matrices must be {m}x{n}")));
        }
        UCPMap::from_fn(n, m, |t| kraus.iter().fold(CMat::zeros(m, m), |acc, k| acc + k * t * k.adjoint()))
    }

    /// The map with φ(bₖ) = images[k] on the subalgebra basis, extended by
    /// φ∘E to Mₙ.
    pub fn on_subalgebra(sub: Subalgebra, images: &[CMat]) -> Result<Self> {
        if images.len() != sub.basis().len() {
            return Err(Error::DimensionMismatch(format!(
                "{} images for {} basis matrices",
                images.len(),
                sub.basis().len()
            )));
        }
        let m = images.first().map(|x| x.nrows()).unwrap_or(0);
        if images.iter().any(|x| x.shape() != (m, m)) {
            return Err(Error::DimensionMismatch(format!("images must be {m}x{m}")));
        }
        let lin = |t: &CMat| {
            let coeff = sub.coordinates(&sub.project(t));
            images.iter().zip(coeff.iter()).fold(CMat::zeros(m, m), |acc, (x, &w)| acc + x * w)
        };
        let mut worst: f64 = 0.0;
        for (b, img) in sub.basis().iter().zip(images) {
            worst = worst.max(linalg::frobenius(&(lin(b) - img)));
        }
        if worst > MEMBER_TOL {
            return Err(Error::Invalid(format!("images are not linear in the basis (residual {worst:.3e})")));
        }
        let choi = choi_of(sub.n(), m, lin)?;
        UCPMap::from_choi(Domain::Sub(sub), m, choi)
    }

    pub fn identity(n: usize) -> Result<Self> {
        UCPMap::from_fn(n, n, |t| t.clone())
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn n(&self) -> usize {
        self.domain.n()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn choi(&self) -> &CMat {
        &self.choi
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn apply(&self, t: &CMat) -> CMat {
        self.kraus.iter().fold(CMat::zeros(self.m, self.m), |acc, k| acc + k * t * k.adjoint())
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        linalg::min_hermitian_eigenvalue(&self.choi)
    }

    /// ‖Σ KᵢKᵢ* − I‖_max
    pub fn unital_residual(&self) -> f64 {
        let s = self.kraus.iter().fold(CMat::zeros(self.m, self.m), |acc, k| acc + k * k.adjoint());
        linalg::max_abs(&(s - CMat::identity(self.m, self.m)))
    }

    /// Choi matrix rebuilt from the Kraus factors against the stored one.
    pub fn roundtrip_residual(&self) -> f64 {
        match choi_of(self.n(), self.m, |t| self.apply(t)) {
            Ok(c) => linalg::max_abs(&(c - &self.choi)),
            Err(_) => f64::INFINITY,
        }
    }

    /// Largest entry of φ(b) − other(b) over the orthonormal basis of `sub`.
    pub fn restriction_residual(&self, other: &UCPMap, sub: &Subalgebra) -> f64 {
        sub.orthonormal()
            .iter()
            .map(|b| linalg::max_abs(&(self.apply(b) - other.apply(b))))
            .fold(0.0, f64::max)
    }
}

/// A minimal Stinespring dilation φ(T) = V*(T ⊗ I_r)V.
#[derive(Debug, Clone)]
pub struct Stinespring {
    /// (n·r) × m isometry, row index a·r + i.
    pub v: CMat,
    pub r: usize,
}

impl Stinespring {
    pub fn represent(&self, t: &CMat) -> CMat {
        linalg::kron(t, &CMat::identity(self.r, self.r))
    }

    pub fn compress(&self, big: &CMat) -> CMat {
        self.v.adjoint() * big * &self.v
    }

    pub fn isometry_residual(&self) -> f64 {
        let m = self.v.ncols();
        linalg::max_abs(&(self.v.adjoint() * &self.v - CMat::identity(m, m)))
    }
}

/// V = Σ Kᵢ* ⊗ eᵢ from the Choi eigendecomposition.
pub fn stinespring(phi: &UCPMap) -> Stinespring {
    let (n, m, r) = (phi.n(), phi.m(), phi.kraus.len());
    let mut v = CMat::from_element(n * r, m, ZERO);
    for (i, k) in phi.kraus.iter().enumerate() {
        for a in 0..n {
            for cc in 0..m {
                v[(a * r + i, cc)] = k[(cc, a)].conj();
            }
        }
    }
    Stinespring { v, r }
}

/// Trace-preserving conditional expectation onto a unital subalgebra.
pub fn trace_conditional_expectation(sub: &Subalgebra) -> Result<UCPMap> {
    if !sub.is_unital() {
        let r = linalg::max_abs(&(sub.unit() - CMat::identity(sub.n(), sub.n())));
        return Err(Error::Precondition { what: "subalgebra does not contain the identity".into(), residual: r });
    }
    UCPMap::from_fn(sub.n(), sub.n(), |t| sub.project(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, random_complex_matrix, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn subalgebra_checks() {
        assert_eq!(Subalgebra::full(3).unwrap().dim(), 9);
        assert!(Subalgebra::diagonal(3).unwrap().is_unital());
        let e01 = matrix_unit(2, 0, 1);
        assert!(matches!(Subalgebra::new(vec![e01]), Err(Error::NotSubalgebra(_))));
        let corner = Subalgebra::new(vec![matrix_unit(2, 0, 0)]).unwrap();
        assert!(!corner.is_unital());
        assert_eq!(corner.unit(), &matrix_unit(2, 0, 0));
    }

    #[test]
    fn conditional_expectation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_complex_matrix(&mut rng, 3, 3);
        let full = trace_conditional_expectation(&Subalgebra::full(3).unwrap()).unwrap();
        assert!(linalg::max_abs(&(full.apply(&t) - &t)) < 1e-12);
        let sc = trace_conditional_expectation(&Subalgebra::scalars(3).unwrap()).unwrap();
        let expect = CMat::identity(3, 3) * (t.trace() / c(3.0, 0.0));
        assert!(linalg::max_abs(&(sc.apply(&t) - expect)) < 1e-12);
        let dg = trace_conditional_expectation(&Subalgebra::diagonal(2).unwrap()).unwrap();
        let t2 = random_complex_matrix(&mut rng, 2, 2);
        let mut d = CMat::zeros(2, 2);
        d[(0, 0)] = t2[(0, 0)];
        d[(1, 1)] = t2[(1, 1)];
        assert!(linalg::max_abs(&(dg.apply(&t2) - d)) < 1e-12);
    }

    #[test]
    fn conditional_expectation_is_idempotent_and_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_unitary(&mut rng, 3);
        let basis = vec![
            &u * matrix_unit(3, 0, 0) * u.adjoint(),
            &u * matrix_unit(3, 1, 1) * u.adjoint(),
            &u * matrix_unit(3, 1, 2) * u.adjoint(),
            &u * matrix_unit(3, 2, 1) * u.adjoint(),
            &u * matrix_unit(3, 2, 2) * u.adjoint(),
        ];
        let e = trace_conditional_expectation(&Subalgebra::new(basis).unwrap()).unwrap();
        assert!(e.min_choi_eigenvalue() > -1e-12);
        let x = random_complex_matrix(&mut rng, 3, 3);
        let y = random_complex_matrix(&mut rng, 3, 3);
        let ex = e.apply(&x);
        assert!(linalg::max_abs(&(e.apply(&ex) - &ex)) < 1e-12);
        let lhs = (ex.adjoint() * &y).trace();
        let rhs = (x.adjoint() * e.apply(&y)).trace();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn choi_kraus_roundtrip_and_rejections() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(&mut rng, 4);
        let w = u.columns(0, 2).into_owned();
        let phi = UCPMap::from_kraus(4, &[w.adjoint()]).unwrap();
        assert_eq!(phi.kraus().len(), 1);
        assert!(phi.roundtrip_residual() < 1e-12);
        assert!(phi.unital_residual() < 1e-12);
        let transpose = UCPMap::from_fn(2, 2, |t| t.transpose());
        assert!(matches!(transpose, Err(Error::NotCompletelyPositive(v)) if v < -0.5));
        let doubled = UCPMap::from_fn(2, 2, |t| t * c(2.0, 0.0));
        assert!(matches!(doubled, Err(Error::Precondition { .. })));
    }

    #[test]
    fn stinespring_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let id = UCPMap::identity(3).unwrap();
        let st = stinespring(&id);
        assert_eq!(st.r, 1);
        assert!(linalg::max_abs(&(st.v.adjoint() * &st.v - CMat::identity(3, 3))) < 1e-12);
        let n = 3;
        let tr = UCPMap::from_fn(n, n, |t| CMat::identity(n, n) * (t.trace() / c(n as f64, 0.0))).unwrap();
        let st = stinespring(&tr);
        assert_eq!(st.r, n * n);
        assert_eq!(st.v.nrows(), n * n * n);
        assert!(st.isometry_residual() < 1e-12);
        for _ in 0..5 {
            let t = random_complex_matrix(&mut rng, n, n);
            assert!(linalg::max_abs(&(st.compress(&st.represent(&t)) - tr.apply(&t))) < 1e-10);
        }
        let u = random_unitary(&mut rng, 4);
        let w = u.columns(0, 2).into_owned();
        let st = stinespring(&UCPMap::from_kraus(4, &[w.adjoint()]).unwrap());
        assert_eq!(st.r, 1);
        // minimal dilation is W up to a phase
        let overlap = (st.v.adjoint() * &w).map(|z| z.norm());
        assert!(linalg::max_abs(&(overlap.map(|x| c(x, 0.0)) - CMat::identity(2, 2))) < 1e-10);
    }

    #[test]
    fn map_on_subalgebra_acts_through_expectation() {
        let sub = Subalgebra::diagonal(2).unwrap();
        let a = CMat::from_fn(3, 3, |i, j| if i == j { c(0.2 + 0.3 * i as f64, 0.0) } else { ZERO });
        let phi = UCPMap::on_subalgebra(sub, &[a.clone(), CMat::identity(3, 3) - &a]).unwrap();
        let t = CMat::from_fn(2, 2, |i, j| c((i + 2 * j) as f64, 1.0));
        let diag = CMat::from_fn(2, 2, |i, j| if i == j { t[(i, j)] } else { ZERO });
        assert!(linalg::max_abs(&(phi.apply(&t) - phi.apply(&diag))) < 1e-12);
        assert!(linalg::max_abs(&(phi.apply(&matrix_unit(2, 0, 0)) - a)) < 1e-12);
    }
}
