//! Truncated full Fock space over ℂⁿ and free creation operators.

use crate::error::{Error, Result};
use crate::freeprod::lift_left_operator;
use crate::hilbert::{FreeProductSpace, PointedSpace};
use crate::linalg::{self, catalan, CMat, CVec, SpMat, C64, ONE, ZERO};
use std::sync::Arc;

/// Words over {1..n} of length ≤ D, ordered by length then lexicographically.
/// Position 0 is the vacuum Ω.
#[derive(Debug, Clone)]
pub struct FockSpace {
    n: usize,
    depth: usize,
    level_offsets: Vec<usize>,
}

impl FockSpace {
    pub fn new(n: usize, depth: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("Fock space needs at least one letter".into()));
        }
        let mut level_offsets = vec![0usize];
        let mut size = 1usize;
        for _ in 0..=depth {
            let last = *level_offsets.last().unwrap();
            level_offsets.push(last.checked_add(size).ok_or(Error::DimensionCap { dim: usize::MAX, cap: usize::MAX })?);
            size = size.saturating_mul(n);
        }
        Ok(FockSpace { n, depth, level_offsets })
    }

    pub fn letters(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Σ_{k=0..D} nᵏ
    pub fn dim(&self) -> usize {
        self.level_offsets[self.depth + 1]
    }

    pub fn word_len(&self, pos: usize) -> usize {
        self.level_offsets.partition_point(|&o| o <= pos) - 1
    }

    /// Letters of the word at `pos`, 1-based.
    pub fn word(&self, pos: usize) -> Vec<usize> {
        let len = self.word_len(pos);
        let mut local = pos - self.level_offsets[len];
        let mut out = vec![0; len];
        for k in (0..len).rev() {
            out[k] = local % self.n + 1;
            local /= self.n;
        }
        out
    }

    pub fn position(&self, word: &[usize]) -> Option<usize> {
        if word.len() > self.depth {
            return None;
        }
        let mut local = 0usize;
        for &l in word {
            if l == 0 || l > self.n {
                return None;
            }
            local = local * self.n + (l - 1);
        }
        Some(self.level_offsets[word.len()] + local)
    }

    pub fn vacuum(&self) -> CVec {
        linalg::basis_vector(self.dim(), 0)
    }

    /// Projection onto words of length ≤ k.
    pub fn length_projection(&self, k: usize) -> SpMat {
        let vals: Vec<C64> = (0..self.dim()).map(|p| if self.word_len(p) <= k { ONE } else { ZERO }).collect();
        linalg::sp_diag(&vals)
    }

    /// The Fock space as a pointed factor with ξ = Ω.
    pub fn as_pointed(&self) -> Result<PointedSpace> {
        PointedSpace::standard(self.dim())
    }
}

/// ℓᵢ(w) = i·w for |w| < D, 0 on the top level.
pub fn creation(space: &FockSpace, i: usize) -> Result<SpMat> {
    if i == 0 || i > space.n {
        return Err(Error::IndexOutOfRange { index: i, max: space.n });
    }
    let n = space.n;
    let cols = (0..space.dim())
        .map(|p| {
            let len = space.word_len(p);
            if len >= space.depth {
                return vec![];
            }
            let local = p - space.level_offsets[len];
            let pow = n.pow(len as u32);
            vec![(space.level_offsets[len + 1] + (i - 1) * pow + local, ONE)]
        })
        .collect();
    Ok(linalg::sp_from_columns(space.dim(), cols))
}

/// ⟨TΩ, Ω⟩
pub fn vacuum_state(t: &SpMat) -> C64 {
    t.get(0, 0).copied().unwrap_or(ZERO)
}

/// ⟨Tᵐ Ω, Ω⟩ for m = 0..=max_order, by repeated application to Ω.
pub fn vacuum_moments(t: &SpMat, max_order: usize) -> Vec<C64> {
    let mut v = linalg::basis_vector(t.rows(), 0);
    let mut out = vec![ONE];
    for _ in 0..max_order {
        v = linalg::sp_matvec(t, &v);
        out.push(v[0]);
    }
    out
}

/// Moments of ℓ₁ + ℓ₁* against the Catalan numbers.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MomentRow {
    pub order: usize,
    pub moment: f64,
    pub reference: f64,
    pub error: f64,
}

pub fn semicircle_moments(max_order: usize, depth: usize) -> Result<Vec<MomentRow>> {
    let fs = FockSpace::new(1, depth)?;
    let l = creation(&fs, 1)?;
    let x = linalg::sp_add(&l, &linalg::sp_adjoint(&l));
    let m = vacuum_moments(&x, max_order);
    Ok(m.iter()
        .enumerate()
        .map(|(order, v)| {
            let reference = if order % 2 == 0 { catalan(order / 2) as f64 } else { 0.0 };
            MomentRow { order, moment: v.re, reference, error: (v - C64::new(reference, 0.0)).norm() }
        })
        .collect())
}

/// Free product of a matrix factor (tag 0) with a Fock factor (tag 1) and
/// the lifted creation operators ℓ̂₁, …, ℓ̂ₙ.
#[derive(Debug, Clone)]
pub struct FockFreeProduct {
    pub fock: FockSpace,
    pub space: Arc<FreeProductSpace>,
    pub creations: Vec<SpMat>,
}

impl FockFreeProduct {
    pub fn new(xi: CVec, n: usize, fock_depth: usize, depth: usize) -> Result<Self> {
        let fock = FockSpace::new(n, fock_depth)?;
        let factors = vec![PointedSpace::new(xi)?, fock.as_pointed()?];
        let space = Arc::new(FreeProductSpace::new(factors, depth)?);
        let mut creations = Vec::with_capacity(n);
        for i in 1..=n {
            let l = linalg::sp_to_dense(&creation(&fock, i)?);
            creations.push(lift_left_operator(&l, 1, &space)?.matrix);
        }
        Ok(FockFreeProduct { fock, space, creations })
    }

    /// Columns where ℓ̂ⱼ neither leaves the truncation nor hits the Fock top level.
    pub fn interior_mask(&self) -> Vec<bool> {
        (0..self.space.dim())
            .map(|p| {
                let w = self.space.word(p);
                if w.len() + 1 > self.space.depth() {
                    return false;
                }
                match w.tags.first() {
                    // rotated Fock index k is Fock basis position k + 1
                    Some(&1) => self.fock.word_len(w.idx[0] + 1) < self.fock.depth(),
                    _ => true,
                }
            })
            .collect()
    }

    /// max over i, j, samples of ‖ℓ̂ᵢ* Â ℓ̂ⱼ − δᵢⱼ τ(A)·1‖ on interior columns.
    pub fn compression_residual(&self, samples: &[CMat]) -> Result<f64> {
        let mask = self.interior_mask();
        let f0 = &self.space.factors()[0];
        let id = linalg::sp_identity(self.space.dim());
        let mut worst: f64 = 0.0;
        for a in samples {
            let la = lift_left_operator(a, 0, &self.space)?.matrix;
            let tau = f0.state(a);
            for (i, li) in self.creations.iter().enumerate() {
                let lhs_left = linalg::sp_mul(&linalg::sp_adjoint(li), &la);
                for (j, lj) in self.creations.iter().enumerate() {
                    let lhs = linalg::sp_mul(&lhs_left, lj);
                    let rhs = if i == j { linalg::sp_scale(&id, tau) } else { linalg::sp_zeros(id.rows(), id.cols()) };
                    worst = worst.max(linalg::sp_residual_on_columns(&lhs, &rhs, &mask));
                }
            }
        }
        Ok(worst)
    }
}

/// Builds (ℂᵈ, ξ) ∗ (ℱ(ℂⁿ), Ω) and checks the compression relations on the
/// given samples. The free-product depth is `depth`; the Fock factor is
/// truncated at the same depth.
pub fn verify_compression_relation(xi: CVec, samples: &[CMat], n: usize, depth: usize) -> Result<f64> {
    let fp = FockFreeProduct::new(xi, n, depth, depth)?;
    fp.compression_residual(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_complex_matrix, random_unit_vector, sp_equal, sp_frobenius};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dimension_and_index_maps() {
        let fs = FockSpace::new(2, 3).unwrap();
        assert_eq!(fs.dim(), 1 + 2 + 4 + 8);
        for p in 0..fs.dim() {
            assert_eq!(fs.position(&fs.word(p)), Some(p));
        }
        assert_eq!(fs.word(3), vec![1, 1]);
    }

    #[test]
    fn creation_on_vacuum() {
        let fs = FockSpace::new(2, 3).unwrap();
        let l1 = creation(&fs, 1).unwrap();
        let v = linalg::sp_matvec(&l1, &fs.vacuum());
        assert_eq!(v, linalg::basis_vector(fs.dim(), fs.position(&[1]).unwrap()));
        assert!(creation(&fs, 3).is_err());
    }

    #[test]
    fn cuntz_toeplitz_relations_with_truncation() {
        let fs = FockSpace::new(3, 3).unwrap();
        let p = fs.length_projection(2);
        for i in 1..=3 {
            let li = creation(&fs, i).unwrap();
            for j in 1..=3 {
                let lj = creation(&fs, j).unwrap();
                let prod = linalg::sp_mul(&linalg::sp_adjoint(&li), &lj);
                if i == j {
                    assert!(sp_equal(&prod, &p));
                } else {
                    assert_eq!(prod.nnz(), 0);
                }
            }
        }
    }

    #[test]
    fn vacuum_state_examples() {
        let fs = FockSpace::new(2, 4).unwrap();
        let l1 = creation(&fs, 1).unwrap();
        let l2 = creation(&fs, 2).unwrap();
        assert_eq!(vacuum_state(&linalg::sp_identity(fs.dim())), ONE);
        assert_eq!(vacuum_state(&l1), ZERO);
        assert_eq!(vacuum_state(&linalg::sp_mul(&l1, &linalg::sp_adjoint(&l2))), ZERO);
    }

    #[test]
    fn semicircle_moments_are_catalan() {
        let rows = semicircle_moments(10, 8).unwrap();
        let even: Vec<f64> = rows.iter().filter(|r| r.order % 2 == 0).map(|r| r.moment).collect();
        assert_eq!(even, vec![1.0, 1.0, 2.0, 5.0, 14.0, 42.0]);
        assert!(rows.iter().all(|r| r.error <= 1e-10));
    }

    #[test]
    fn compression_relation_identity_and_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xi = random_unit_vector(&mut rng, 2);
        let samples = vec![CMat::identity(2, 2), random_complex_matrix(&mut rng, 2, 2), random_complex_matrix(&mut rng, 2, 2)];
        let r = verify_compression_relation(xi, &samples, 2, 4).unwrap();
        assert!(r <= 1e-10, "{r}");
    }

    #[test]
    fn off_diagonal_compressions_vanish_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let fp = FockFreeProduct::new(random_unit_vector(&mut rng, 2), 2, 3, 3).unwrap();
        let a = random_complex_matrix(&mut rng, 2, 2);
        let la = lift_left_operator(&a, 0, &fp.space).unwrap().matrix;
        let prod = linalg::sp_mul(&linalg::sp_mul(&linalg::sp_adjoint(&fp.creations[0]), &la), &fp.creations[1]);
        let masked = linalg::sp_mask_columns(&prod, &fp.interior_mask());
        assert_eq!(sp_frobenius(&masked), 0.0);
    }
}
