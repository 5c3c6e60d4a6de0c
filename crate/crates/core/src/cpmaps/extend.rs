use super::{stinespring, Domain, Subalgebra, UCPMap, MEMBER_TOL, RANK_CUTOFF};
use crate::error::{Error, Result};
use crate::linalg::{self, random_complex_matrix, random_unit_vector, vector_expectation, CMat, CVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Seed for the random operators used in the state-identity report.
const STATE_CHECK_SEED: u64 = 0xe7e9d;
const STATE_CHECK_SAMPLES: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionReport {
    pub dilation_rank: usize,
    pub choi_min_eigenvalue: f64,
    pub unital_residual: f64,
    pub restriction_residual: f64,
    /// max |⟨ψ(T)η, η⟩ − ⟨Tξ, ξ⟩| over seeded random T.
    pub state_residual: f64,
}

impl ExtensionReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.choi_min_eigenvalue >= -tol
            && self.unital_residual <= tol
            && self.restriction_residual <= tol
            && self.state_residual <= tol
    }
}

#[derive(Debug, Clone)]
pub struct Extension {
    pub map: UCPMap,
    pub report: ExtensionReport,
}

fn check_unit(v: &CVec) -> Result<()> {
    let nrm = v.norm();
    if (nrm - 1.0).abs() > 1e-9 {
        return Err(Error::NonUnitVector(nrm));
    }
    Ok(())
}

/// Extends φ: B → Mₘ to ψ: Mₙ → Mₘ with ⟨ψ(T)η, η⟩ = ⟨Tξ, ξ⟩.
///
/// With φ = V*(· ⊗ I_r)V, the partial isometry W sends bξ to (b ⊗ I)Vη and
/// ψ(T) = V*[W T W* + Q⊥(E(T) ⊗ I_r)Q⊥]V, Q = WW*.
pub fn extend_state_preserving(phi: &UCPMap, xi: &CVec, eta: &CVec) -> Result<Extension> {
    let (n, m) = (phi.n(), phi.m());
    if xi.len() != n || eta.len() != m {
        return Err(Error::DimensionMismatch(format!("expected ξ ∈ ℂ^{n} and η ∈ ℂ^{m}")));
    }
    check_unit(xi)?;
    check_unit(eta)?;
    let sub = match phi.domain() {
        Domain::Full(n) => Subalgebra::full(*n)?,
        Domain::Sub(s) => s.clone(),
    };
    let support = (xi - sub.unit() * xi).norm();
    if support > 1e-9 {
        return Err(Error::Precondition { what: "ξ is not in the essential space of the subalgebra".into(), residual: support });
    }
    let basis = sub.orthonormal();
    let compat = basis
        .iter()
        .map(|b| (vector_expectation(&phi.apply(b), eta) - vector_expectation(b, xi)).norm())
        .fold(0.0, f64::max);
    if compat > MEMBER_TOL {
        return Err(Error::Precondition { what: "⟨φ(A)η, η⟩ ≠ ⟨Aξ, ξ⟩ on the subalgebra".into(), residual: compat });
    }

    let st = stinespring(phi);
    let veta = &st.v * eta;
    let x = CMat::from_columns(&basis.iter().map(|b| b * xi).collect::<Vec<_>>());
    let y = CMat::from_columns(&basis.iter().map(|b| st.represent(b) * &veta).collect::<Vec<_>>());
    let w = y * linalg::pinv(&x, RANK_CUTOFF);
    let big = n * st.r;
    let q_perp = CMat::identity(big, big) - &w * w.adjoint();
    let psi = |t: &CMat| {
        let inner = &w * t * w.adjoint() + &q_perp * st.represent(&sub.project(t)) * &q_perp;
        st.compress(&inner)
    };
    let map = UCPMap::from_fn(n, m, psi)?;

    let mut rng = ChaCha8Rng::seed_from_u64(STATE_CHECK_SEED);
    let state_residual = (0..STATE_CHECK_SAMPLES)
        .map(|_| {
            let t = random_complex_matrix(&mut rng, n, n);
            (vector_expectation(&map.apply(&t), eta) - vector_expectation(&t, xi)).norm()
        })
        .fold(0.0, f64::max);
    let report = ExtensionReport {
        dilation_rank: st.r,
        choi_min_eigenvalue: map.min_choi_eigenvalue(),
        unital_residual: map.unital_residual(),
        restriction_residual: map.restriction_residual(phi, &sub),
        state_residual,
    };
    Ok(Extension { map, report })
}

/// A compatible triple (φ, ξ, η) on a random subalgebra of Mₙ.
#[derive(Debug, Clone)]
pub struct ExtensionCase {
    pub phi: UCPMap,
    pub xi: CVec,
    pub eta: CVec,
}

/// The subalgebra is U(M_{k₁} ⊕ … ⊕ M_{k_j} ⊕ 0)U* for a random unitary U
/// and random block sizes. φ(a) = V*(a ⊗ I₂)V for an isometry V with
/// Vη = ξ ⊗ e₀ and range inside range(e) ⊗ ℂ², which makes the triple
/// compatible.
pub fn random_compatible_case<R: Rng>(rng: &mut R, n: usize) -> Result<ExtensionCase> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be positive".into()));
    }
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let k = rng.random_range(1..=left);
        sizes.push(k);
        left -= k;
    }
    let kept = if sizes.len() > 1 && rng.random_bool(0.5) { sizes.len() - 1 } else { sizes.len() };
    let u = linalg::random_unitary(rng, n);
    let mut basis = Vec::new();
    let mut coords = Vec::new();
    let mut start = 0;
    for (bi, &k) in sizes.iter().enumerate() {
        if bi < kept {
            for i in start..start + k {
                coords.push(i);
                for j in start..start + k {
                    basis.push(&u * super::matrix_unit(n, i, j) * u.adjoint());
                }
            }
        }
        start += k;
    }
    let sub = Subalgebra::new(basis)?;

    let local = random_unit_vector(rng, coords.len());
    let mut xi = CVec::zeros(n);
    for (c, &i) in coords.iter().enumerate() {
        xi += u.column(i) * local[c];
    }
    let s = 2;
    let ambient = coords.len() * s;
    let m = rng.random_range(1..=ambient.min(4));
    let eta = random_unit_vector(rng, m);
    // orthonormal basis of range(e) ⊗ ℂ², first vector ξ ⊗ e₀
    let mut frame = CMat::zeros(n * s, ambient);
    for (c, &i) in coords.iter().enumerate() {
        for a in 0..s {
            let mut e = CVec::zeros(s);
            e[a] = linalg::ONE;
            frame.set_column(c * s + a, &u.column(i).kronecker(&e));
        }
    }
    let mut e0 = CVec::zeros(s);
    e0[0] = linalg::ONE;
    let first = frame.adjoint() * xi.kronecker(&e0);
    let rot = linalg::complete_orthonormal(rng, &CMat::from_columns(&[first]));
    let f = &frame * rot.columns(0, m);
    let g = linalg::complete_orthonormal(rng, &CMat::from_columns(std::slice::from_ref(&eta)));
    let v = f * g.adjoint();
    let images: Vec<CMat> = sub
        .basis()
        .iter()
        .map(|b| v.adjoint() * linalg::kron(b, &CMat::identity(s, s)) * &v)
        .collect();
    let phi = UCPMap::on_subalgebra(sub, &images)?;
    Ok(ExtensionCase { phi, xi, eta })
}

/// Seeded batch of random compatible cases on M₂ … M₄.
pub fn random_cases(seed: u64, count: usize) -> Result<Vec<ExtensionCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=4);
            random_compatible_case(&mut rng, n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpmaps::matrix_unit;
    use crate::linalg::{c, random_unitary};

    #[test]
    fn full_domain_returns_phi() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(&mut rng, 3);
        let phi = UCPMap::from_kraus(3, std::slice::from_ref(&u)).unwrap();
        let xi = random_unit_vector(&mut rng, 3);
        let eta = &u * &xi;
        let ext = extend_state_preserving(&phi, &xi, &eta).unwrap();
        assert!(linalg::max_abs(&(ext.map.choi() - phi.choi())) < 1e-10);
        assert!(ext.report.passes(1e-10), "{:?}", ext.report);
    }

    #[test]
    fn scalar_domain_forces_vector_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let phi = UCPMap::on_subalgebra(Subalgebra::scalars(3).unwrap(), &[CMat::identity(2, 2)]).unwrap();
        let xi = random_unit_vector(&mut rng, 3);
        let eta = random_unit_vector(&mut rng, 2);
        let ext = extend_state_preserving(&phi, &xi, &eta).unwrap();
        assert!(ext.report.passes(1e-10), "{:?}", ext.report);
        let t = random_complex_matrix(&mut rng, 3, 3);
        let img = ext.map.apply(&t);
        assert!((vector_expectation(&img, &eta) - vector_expectation(&t, &xi)).norm() < 1e-10);
    }

    #[test]
    fn diagonal_domain_random_compatible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xi = random_unit_vector(&mut rng, 2);
        let eta = random_unit_vector(&mut rng, 2);
        let p0 = xi[0].norm_sqr();
        let pe = &eta * eta.adjoint();
        let rest = CMat::identity(2, 2) - &pe;
        let a = &pe * c(p0, 0.0) + &rest * c(0.3, 0.0);
        let b = CMat::identity(2, 2) - &a;
        let phi = UCPMap::on_subalgebra(Subalgebra::diagonal(2).unwrap(), &[a, b]).unwrap();
        let ext = extend_state_preserving(&phi, &xi, &eta).unwrap();
        assert!(ext.report.passes(1e-10), "{:?}", ext.report);
    }

    #[test]
    fn random_cases_pass() {
        for (k, case) in random_cases(17, 25).unwrap().into_iter().enumerate() {
            let ext = extend_state_preserving(&case.phi, &case.xi, &case.eta).unwrap();
            assert!(ext.report.passes(1e-9), "case {k}: {:?}", ext.report);
        }
    }

    #[test]
    fn precondition_violations() {
        let corner = Subalgebra::new(vec![matrix_unit(2, 0, 0)]).unwrap();
        let phi = UCPMap::on_subalgebra(corner, &[CMat::identity(1, 1)]).unwrap();
        let xi = linalg::basis_vector(2, 1);
        let eta = linalg::basis_vector(1, 0);
        assert!(matches!(extend_state_preserving(&phi, &xi, &eta), Err(Error::Precondition { .. })));
        let phi = UCPMap::on_subalgebra(Subalgebra::diagonal(2).unwrap(), &[matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)]).unwrap();
        let xi = linalg::basis_vector(2, 0);
        let eta = linalg::basis_vector(2, 1);
        assert!(matches!(extend_state_preserving(&phi, &xi, &eta), Err(Error::Precondition { .. })));
    }
}
