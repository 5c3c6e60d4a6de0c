use crate::error::{Error, Result};
use crate::hilbert::PointedSpace;
use crate::linalg::{self, block_diag, random_complex_matrix, random_unit_vector, CMat, CVec, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// X⁽ᵏ⁾ = X
    Constant,
    /// X⁽ᵏ⁾ = X ⊕ εₖZ on ℂᵈ ⊕ ℂᵈ with the state vector in the first block
    Block,
    /// X⁽ᵏ⁾ = X + εₖZ on ℂᵈ
    Leaky,
}

/// Operators on a pointed space.
#[derive(Debug, Clone)]
pub struct Tuple {
    pub xi: CVec,
    pub ops: Vec<CMat>,
}

impl Tuple {
    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn pointed(&self) -> Result<PointedSpace> {
        PointedSpace::new(self.xi.clone())
    }
}

/// Per-k tuples converging to a limit tuple. The limit X on ℂᵈ is
/// supported on the first d − 1 coordinates, so the last basis vector is a
/// common null vector of every Xᵢ and Xᵢ*; ξ is generic and therefore cyclic.
#[derive(Debug, Clone)]
pub struct GeneratorFamily {
    pub kind: FamilyKind,
    limit: Tuple,
    perturb: Vec<CMat>,
}

impl GeneratorFamily {
    pub fn new(kind: FamilyKind, d: usize, n: usize, seed: u64) -> Result<Self> {
        if d < 2 || n == 0 {
            return Err(Error::InvalidDimension(format!("family needs d >= 2 and n >= 1 (got d = {d}, n = {n})")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi = random_unit_vector(&mut rng, d);
        let mut ops = Vec::with_capacity(n);
        let mut perturb = Vec::with_capacity(n);
        for _ in 0..n {
            let core = random_complex_matrix(&mut rng, d - 1, d - 1);
            let x = block_diag(&core, &CMat::zeros(1, 1));
            let z = random_complex_matrix(&mut rng, d, d);
            let scale = crate::norms::op_norm_dense(&x).value / crate::norms::op_norm_dense(&z).value;
            perturb.push(z * C64::new(scale, 0.0));
            ops.push(x);
        }
        Ok(GeneratorFamily { kind, limit: Tuple { xi, ops }, perturb })
    }

    pub fn epsilon(k: usize) -> f64 {
        1.0 / k.max(1) as f64
    }

    pub fn limit(&self) -> &Tuple {
        &self.limit
    }

    pub fn at(&self, k: usize) -> Tuple {
        let eps = C64::new(Self::epsilon(k), 0.0);
        match self.kind {
            FamilyKind::Constant => self.limit.clone(),
            FamilyKind::Leaky => Tuple {
                xi: self.limit.xi.clone(),
                ops: self.limit.ops.iter().zip(&self.perturb).map(|(x, z)| x + z * eps).collect(),
            },
            FamilyKind::Block => {
                let d = self.limit.dim();
                let mut xi = CVec::zeros(2 * d);
                xi.rows_mut(0, d).copy_from(&self.limit.xi);
                Tuple {
                    xi,
                    ops: self.limit.ops.iter().zip(&self.perturb).map(|(x, z)| block_diag(x, &(z * eps))).collect(),
                }
            }
        }
    }
}

/// Monomials in X₁, X₁*, …, Xₙ, Xₙ* of degree 1..=deg, as index lists
/// (2i for Xᵢ, 2i+1 for Xᵢ*).
pub fn monomials(n: usize, deg: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..deg {
        let mut next = Vec::with_capacity(layer.len() * 2 * n);
        for w in &layer {
            for l in 0..2 * n {
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

pub fn eval_monomial(ops: &[CMat], word: &[usize]) -> CMat {
    let d = ops[0].nrows();
    word.iter().fold(CMat::identity(d, d), |acc, &l| {
        let x = &ops[l / 2];
        if l % 2 == 0 {
            acc * x
        } else {
            acc * x.adjoint()
        }
    })
}

/// max over monomials of |τₖ(q(X⁽ᵏ⁾)) − τ(q(X))| and of ‖q(X⁽ᵏ⁾)‖ − ‖q(X)‖.
pub fn hypothesis_gaps(member: &Tuple, limit: &Tuple, deg: usize) -> (f64, f64) {
    let mut moment: f64 = 0.0;
    let mut norm: f64 = 0.0;
    for w in monomials(limit.ops.len(), deg) {
        let qk = eval_monomial(&member.ops, &w);
        let q = eval_monomial(&limit.ops, &w);
        let gap = linalg::vector_expectation(&qk, &member.xi) - linalg::vector_expectation(&q, &limit.xi);
        moment = moment.max(gap.norm());
        let excess = crate::norms::op_norm_dense(&qk).value - crate::norms::op_norm_dense(&q).value;
        norm = norm.max(excess);
    }
    (moment, norm)
}
