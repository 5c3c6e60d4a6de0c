use super::{FreeOperator, OperatorSource};
use crate::error::{Error, Result};
use crate::hilbert::{embed_subspace, leading_coords, FreeProductSpace, PointedSpace};
use crate::linalg::{self, block_diag, c, max_abs, random_complex_matrix, random_unit_vector, CMat, CVec, SpMat};
use rand::Rng;
use std::sync::Arc;

/// Block model for the quotient by an ideal: 𝔄₁ = M_a ⊕ M_b acting on
/// ℂᵃ ⊕ ℂᵇ, ideal 𝔍 = 0 ⊕ M_b, quotient map q(X ⊕ Y) = X. The first
/// factor of the full free product is ℋ₁ = ℂᵃ ⊕ ℂᵇ with ξ₁ in ℂᵃ; the
/// sub free product uses ℋ_{1,0} = ℂᵃ. 𝔄₂ = M_c on ℋ₂ = ℂᶜ.
#[derive(Debug, Clone)]
pub struct ExactnessScenario {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub h1: PointedSpace,
    pub h10: PointedSpace,
    pub h2: PointedSpace,
}

/// Full and sub free-product spaces at one depth, with the embedding V.
#[derive(Debug, Clone)]
pub struct ScenarioSpaces {
    pub full: Arc<FreeProductSpace>,
    pub sub: Arc<FreeProductSpace>,
    pub v: SpMat,
    pub v_adj: SpMat,
}

impl ExactnessScenario {
    pub fn new(b: usize, xi1: CVec, xi2: CVec) -> Result<Self> {
        let a = xi1.len();
        let c = xi2.len();
        if a == 0 || c == 0 {
            return Err(Error::InvalidDimension("scenario blocks must be nonempty".into()));
        }
        let mut full_xi = CVec::zeros(a + b);
        full_xi.rows_mut(0, a).copy_from(&xi1);
        Ok(ExactnessScenario {
            a,
            b,
            c,
            h1: PointedSpace::new(full_xi)?,
            h10: PointedSpace::new(xi1)?,
            h2: PointedSpace::new(xi2)?,
        })
    }

    /// M₂ ⊕ M₁ with 𝔍 = 0 ⊕ M₁ and 𝔄₂ = M₂, with fixed generic vectors.
    pub fn default_scenario() -> Self {
        ExactnessScenario::with_dims(2, 1, 2)
    }

    /// Deterministic generic unit vectors for the given block sizes.
    pub fn with_dims(a: usize, b: usize, c_dim: usize) -> Self {
        let v = |n: usize, s: f64| {
            let raw = CVec::from_fn(n, |k, _| c(1.0 + s * k as f64, 0.5 * (k as f64) - 0.25 * s));
            let nrm = raw.norm();
            raw.unscale(nrm)
        };
        ExactnessScenario::new(b, v(a, 0.7), v(c_dim, 1.3)).expect("valid scenario")
    }

    pub fn random<R: Rng>(rng: &mut R, a: usize, b: usize, c_dim: usize) -> Result<Self> {
        ExactnessScenario::new(b, random_unit_vector(rng, a), random_unit_vector(rng, c_dim))
    }

    pub fn a1_element(&self, x: &CMat, y: &CMat) -> Result<CMat> {
        if x.shape() != (self.a, self.a) || y.shape() != (self.b, self.b) {
            return Err(Error::DimensionMismatch("block sizes do not match the scenario".into()));
        }
        Ok(block_diag(x, y))
    }

    pub fn j_element(&self, y: &CMat) -> Result<CMat> {
        self.a1_element(&CMat::zeros(self.a, self.a), y)
    }

    /// q(X ⊕ Y) = X; rejects matrices that are not block diagonal.
    pub fn q(&self, m: &CMat) -> Result<CMat> {
        let n = self.a + self.b;
        if m.shape() != (n, n) {
            return Err(Error::ScenarioMismatch(format!("expected a {n}x{n} element of the first algebra")));
        }
        let off1 = max_abs(&m.view((0, self.a), (self.a, self.b)).into_owned());
        let off2 = max_abs(&m.view((self.a, 0), (self.b, self.a)).into_owned());
        if off1.max(off2) > 1e-12 {
            return Err(Error::ScenarioMismatch("element is not block diagonal".into()));
        }
        Ok(m.view((0, 0), (self.a, self.a)).into_owned())
    }

    pub fn random_a1<R: Rng>(&self, rng: &mut R) -> CMat {
        let x = random_complex_matrix(rng, self.a, self.a);
        let y = random_complex_matrix(rng, self.b, self.b);
        block_diag(&x, &y)
    }

    pub fn random_a2<R: Rng>(&self, rng: &mut R) -> CMat {
        random_complex_matrix(rng, self.c, self.c)
    }

    pub fn random_j<R: Rng>(&self, rng: &mut R) -> CMat {
        let y = random_complex_matrix(rng, self.b, self.b);
        self.j_element(&y).unwrap()
    }

    /// A − τ(A)·1 for the factor's vector state.
    pub fn centered(&self, tag: usize, m: &CMat) -> CMat {
        let f = if tag == 0 { &self.h1 } else { &self.h2 };
        let t = f.state(m);
        m - CMat::identity(m.nrows(), m.ncols()) * t
    }

    pub fn full_factors(&self) -> Vec<PointedSpace> {
        vec![self.h1.clone(), self.h2.clone()]
    }

    pub fn sub_factors(&self) -> Vec<PointedSpace> {
        vec![self.h10.clone(), self.h2.clone()]
    }

    pub fn spaces(&self, depth: usize) -> Result<ScenarioSpaces> {
        let full = Arc::new(FreeProductSpace::new(self.full_factors(), depth)?);
        let sub = Arc::new(FreeProductSpace::new(self.sub_factors(), depth)?);
        let v = embed_subspace(&sub, &full, &leading_coords(&sub))?;
        let v_adj = linalg::sp_adjoint(&v);
        Ok(ScenarioSpaces { full, sub, v, v_adj })
    }
}

/// π(T) = V* T V on the sub free product.
pub fn compression_pi(t: &FreeOperator, spaces: &ScenarioSpaces) -> Result<FreeOperator> {
    if !Arc::ptr_eq(&t.space, &spaces.full) && t.space.dim() != spaces.full.dim() {
        return Err(Error::ScenarioMismatch("operator does not live on the scenario's full space".into()));
    }
    let m = linalg::sp_mul(&spaces.v_adj, &linalg::sp_mul(&t.matrix, &spaces.v));
    Ok(FreeOperator {
        space: spaces.sub.clone(),
        matrix: m,
        source: OperatorSource::Composite,
        depth_guard: t.depth_guard,
    })
}

/// ‖(I − VV*) T V‖ restricted to sub words of length ≤ D − depth_guard.
pub fn invariance_residual(t: &FreeOperator, spaces: &ScenarioSpaces) -> f64 {
    let tv = linalg::sp_mul(&t.matrix, &spaces.v);
    let proj = linalg::sp_mul(&spaces.v, &linalg::sp_mul(&spaces.v_adj, &tv));
    let mask = spaces.sub.interior_mask(t.depth_guard);
    linalg::sp_residual_on_columns(&tv, &proj, &mask)
}
