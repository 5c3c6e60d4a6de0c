//! Dense and sparse complex matrix helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use sprs::CsMat;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
/// Sparse complex matrix, always kept in compressed-column storage.
pub type SpMat = CsMat<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn sp_identity(n: usize) -> SpMat {
    CsMat::new_csc((n, n), (0..=n).collect(), (0..n).collect(), vec![ONE; n])
}

pub fn sp_zeros(rows: usize, cols: usize) -> SpMat {
    CsMat::new_csc((rows, cols), vec![0; cols + 1], vec![], vec![])
}

/// Diagonal matrix; exact zeros are left out of the pattern.
pub fn sp_diag(vals: &[C64]) -> SpMat {
    let cols = vals
        .iter()
        .enumerate()
        .map(|(j, &v)| if v == ZERO { vec![] } else { vec![(j, v)] })
        .collect();
    sp_from_columns(vals.len(), cols)
}

/// Assemble a CSC matrix from per-column entry lists. Rows within a column
/// are sorted; duplicate rows are summed; exact zeros are dropped.
pub fn sp_from_columns(nrows: usize, cols: Vec<Vec<(usize, C64)>>) -> SpMat {
    let ncols = cols.len();
    let mut indptr = Vec::with_capacity(ncols + 1);
    let mut indices = Vec::new();
    let mut data = Vec::new();
    indptr.push(0);
    for mut col in cols {
        col.sort_by_key(|e| e.0);
        let mut last: Option<usize> = None;
        for (r, v) in col {
            if last == Some(r) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(r);
                data.push(v);
                last = Some(r);
            }
        }
        indptr.push(indices.len());
    }
    let m = CsMat::new_csc((nrows, ncols), indptr, indices, data);
    sp_prune(&m)
}

/// Drop stored entries that are exactly zero.
pub fn sp_prune(m: &SpMat) -> SpMat {
    if m.data().iter().all(|v| *v != ZERO) {
        return m.clone();
    }
    let mut indptr = vec![0];
    let mut indices = Vec::new();
    let mut data = Vec::new();
    for col in m.outer_iterator() {
        for (r, &v) in col.iter() {
            if v != ZERO {
                indices.push(r);
                data.push(v);
            }
        }
        indptr.push(indices.len());
    }
    CsMat::new_csc(m.shape(), indptr, indices, data)
}

fn ensure_csc(m: SpMat) -> SpMat {
    if m.is_csc() {
        m
    } else {
        m.to_csc()
    }
}

pub fn sp_adjoint(m: &SpMat) -> SpMat {
    ensure_csc(m.transpose_view().map(|v| v.conj()))
}

pub fn sp_mul(a: &SpMat, b: &SpMat) -> SpMat {
    assert_eq!(a.cols(), b.rows(), "sparse product shape mismatch");
    sp_prune(&ensure_csc(a * b))
}

pub fn sp_add(a: &SpMat, b: &SpMat) -> SpMat {
    assert_eq!(a.shape(), b.shape(), "sparse sum shape mismatch");
    sp_prune(&ensure_csc(a + b))
}

pub fn sp_sub(a: &SpMat, b: &SpMat) -> SpMat {
    assert_eq!(a.shape(), b.shape(), "sparse difference shape mismatch");
    sp_prune(&ensure_csc(a - b))
}

pub fn sp_scale(a: &SpMat, s: C64) -> SpMat {
    if s == ZERO {
        return sp_zeros(a.rows(), a.cols());
    }
    a.map(|v| v * s)
}

pub fn sp_matvec(a: &SpMat, v: &CVec) -> CVec {
    assert_eq!(a.cols(), v.len());
    let mut out = CVec::zeros(a.rows());
    for (j, col) in a.outer_iterator().enumerate() {
        let x = v[j];
        if x == ZERO {
            continue;
        }
        for (i, &val) in col.iter() {
            out[i] += val * x;
        }
    }
    out
}

/// Column `j` of a sparse matrix as a dense vector.
pub fn sp_column(a: &SpMat, j: usize) -> CVec {
    let mut out = CVec::zeros(a.rows());
    if let Some(col) = a.outer_view(j) {
        for (i, &v) in col.iter() {
            out[i] = v;
        }
    }
    out
}

pub fn sp_to_dense(a: &SpMat) -> CMat {
    let mut out = CMat::zeros(a.rows(), a.cols());
    for (j, col) in a.outer_iterator().enumerate() {
        for (i, &v) in col.iter() {
            out[(i, j)] = v;
        }
    }
    out
}

pub fn sp_from_dense(m: &CMat) -> SpMat {
    let cols = (0..m.ncols())
        .map(|j| {
            (0..m.nrows())
                .filter(|&i| m[(i, j)] != ZERO)
                .map(|i| (i, m[(i, j)]))
                .collect()
        })
        .collect();
    sp_from_columns(m.nrows(), cols)
}

/// Restrict to the columns flagged in `mask` (other columns zeroed).
pub fn sp_mask_columns(a: &SpMat, mask: &[bool]) -> SpMat {
    assert_eq!(a.cols(), mask.len());
    let cols = a
        .outer_iterator()
        .enumerate()
        .map(|(j, col)| {
            if mask[j] {
                col.iter().map(|(i, &v)| (i, v)).collect()
            } else {
                vec![]
            }
        })
        .collect();
    sp_from_columns(a.rows(), cols)
}

pub fn sp_frobenius(a: &SpMat) -> f64 {
    a.data().iter().fold(0.0, |acc, v| acc + v.norm_sqr()).sqrt()
}

pub fn sp_max_abs(a: &SpMat) -> f64 {
    a.data().iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Frobenius norm of `a - b` on the columns flagged in `mask` (all rows).
/// Bounds the operator norm of the column-restricted difference from above.
pub fn sp_residual_on_columns(a: &SpMat, b: &SpMat, mask: &[bool]) -> f64 {
    sp_frobenius(&sp_mask_columns(&sp_sub(a, b), mask))
}

/// Exact structural equality (same shape, pattern and values).
pub fn sp_equal(a: &SpMat, b: &SpMat) -> bool {
    a.shape() == b.shape()
        && a.indptr().raw_storage() == b.indptr().raw_storage()
        && a.indices() == b.indices()
        && a.data() == b.data()
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, v| acc + v.norm_sqr()).sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn to_faer(m: &CMat) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular values (descending) with left and right singular vectors.
fn svd_parts(m: &CMat) -> (Vec<f64>, CMat, CMat) {
    let svd = to_faer(m).thin_svd().expect("svd did not converge");
    let s = svd.S().column_vector().iter().map(|v| v.re).collect();
    (s, from_faer(svd.U()), from_faer(svd.V()))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    if m.is_empty() {
        return (vec![], CMat::zeros(0, 0));
    }
    let h = (m + m.adjoint()).scale(0.5);
    let eig = to_faer(&h).self_adjoint_eigen(faer::Side::Lower).expect("eigensolver did not converge");
    let vals = eig.S().column_vector().iter().map(|v| v.re).collect();
    (vals, from_faer(eig.U()))
}

pub fn min_hermitian_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// Moore-Penrose pseudo-inverse with a relative singular-value cutoff.
pub fn pinv(m: &CMat, rcond: f64) -> CMat {
    let mut out = CMat::zeros(m.ncols(), m.nrows());
    if m.is_empty() {
        return out;
    }
    let (s, u, v) = svd_parts(m);
    let smax = s.first().copied().unwrap_or(0.0);
    for (k, &sk) in s.iter().enumerate() {
        if sk > rcond * smax && sk > 0.0 {
            out += (v.column(k) * u.column(k).adjoint()).scale(1.0 / sk);
        }
    }
    out
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let n = a.nrows() + b.nrows();
    let m = a.ncols() + b.ncols();
    let mut out = CMat::zeros(n, m);
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn basis_vector(n: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[k] = ONE;
    v
}

/// ⟨A v, v⟩ with the inner product linear in the first slot.
pub fn vector_expectation(a: &CMat, v: &CVec) -> C64 {
    v.dotc(&(a * v))
}

pub fn random_complex_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let a = random_complex_matrix(rng, n, n);
    (&a + a.adjoint()).scale(0.5)
}

pub fn random_unit_vector<R: Rng>(rng: &mut R, n: usize) -> CVec {
    let m = random_complex_matrix(rng, n, 1);
    let v = CVec::from_column_slice(m.as_slice());
    let nrm = v.norm();
    v.unscale(nrm)
}

/// Haar-like random unitary from the QR factor of a Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let g = random_complex_matrix(rng, n, n);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = q.clone();
    for k in 0..n {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            out[(i, k)] = q[(i, k)] * ph;
        }
    }
    out
}

/// Orthonormal basis (columns) of the column span, via SVD with relative cutoff.
pub fn column_space(m: &CMat, rcond: f64) -> CMat {
    if m.ncols() == 0 || m.nrows() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let (s, u, _) = svd_parts(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let keep = s.iter().take_while(|&&x| smax > 0.0 && x > rcond * smax).count();
    u.columns(0, keep).into_owned()
}

/// Completes the orthonormal columns of `q` to a unitary.
pub fn complete_orthonormal<R: Rng>(rng: &mut R, q: &CMat) -> CMat {
    let n = q.nrows();
    let mut cols: Vec<CVec> = (0..q.ncols()).map(|k| q.column(k).into_owned()).collect();
    while cols.len() < n {
        let mut v = random_unit_vector(rng, n);
        for _ in 0..2 {
            for u in &cols {
                let p = u.dotc(&v);
                v -= u * p;
            }
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            cols.push(v.unscale(nrm));
        }
    }
    CMat::from_columns(&cols)
}

pub fn catalan(k: usize) -> u64 {
    let mut c: u64 = 1;
    for i in 0..k as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sparse_roundtrip_and_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_complex_matrix(&mut rng, 4, 3);
        let s = sp_from_dense(&a);
        assert_eq!(sp_to_dense(&s), a);
        assert_eq!(sp_to_dense(&sp_adjoint(&s)), a.adjoint());
        let b = random_complex_matrix(&mut rng, 3, 5);
        let p = sp_mul(&s, &sp_from_dense(&b));
        assert!(max_abs(&(sp_to_dense(&p) - &a * &b)) < 1e-12);
    }

    #[test]
    fn pinv_of_rank_deficient() {
        let m = CMat::from_row_slice(2, 2, &[ONE, ONE, ONE, ONE]);
        let p = pinv(&m, 1e-12);
        assert!(max_abs(&(&m * &p * &m - &m)) < 1e-12);
    }

    #[test]
    fn catalan_numbers() {
        let v: Vec<u64> = (0..6).map(catalan).collect();
        assert_eq!(v, vec![1, 1, 2, 5, 14, 42]);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(&mut rng, 4);
        assert!(max_abs(&(u.adjoint() * &u - CMat::identity(4, 4))) < 1e-12);
    }
}
