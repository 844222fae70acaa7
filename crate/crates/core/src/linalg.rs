//! Dense complex linear algebra helpers shared by every module.
//!
//! All matrices are `DMatrix<Complex64>`. Eigenvalues of Hermitian matrices are
//! always returned in non-increasing order (stable with respect to the
//! eigensolver's output order) and eigenvectors carry a fixed phase: the first
//! component of magnitude above `PHASE_EPS` is real and positive.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

const PHASE_EPS: f64 = 1e-12;

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Promotes a real matrix to a complex one.
pub fn from_real(a: &DMatrix<f64>) -> CMatrix {
    a.map(c)
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(nrows, ncols, |i, j| c(rows[i][j]))
}

pub fn real_diagonal(values: &[f64]) -> CMatrix {
    let mut out = CMatrix::zeros(values.len(), values.len());
    for (i, &v) in values.iter().enumerate() {
        out[(i, i)] = c(v);
    }
    out
}

/// `(A + A*) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace_re(a: &CMatrix) -> f64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)].re).sum()
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Non-increasing eigenvalues.
    pub values: Vec<f64>,
    /// Unit eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

/// Hermitian eigendecomposition of `(A + A*)/2`.
pub fn eigh(a: &CMatrix) -> HermitianEigen {
    let n = a.nrows();
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        fix_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    HermitianEigen { values, vectors }
}

fn fix_phase(col: &mut CVector) {
    if let Some(z) = col.iter().find(|z| z.norm() > PHASE_EPS).copied() {
        let ph = z.conj() / z.norm();
        col.iter_mut().for_each(|x| *x *= ph);
    }
}

/// Non-increasing eigenvalues of the Hermitian part of `a`.
pub fn eigenvalues(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut vals: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    vals
}

/// Singular value decomposition with singular values sorted non-increasingly.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    /// Right singular vectors as columns.
    pub v: CMatrix,
}

/// Thin SVD. The LAPACK-free bidiagonal solver occasionally returns a wrong
/// factorization for rank-deficient complex input, so its result is checked
/// and replaced by one-sided Jacobi when the check fails.
pub fn svd(a: &CMatrix) -> Svd {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Svd {
            u: CMatrix::zeros(m, 0),
            singular_values: Vec::new(),
            v: CMatrix::zeros(n, 0),
        };
    }
    let raw = a.clone().svd(true, true);
    let u = raw.u.expect("requested U");
    let v = raw.v_t.expect("requested V^*").adjoint();
    let sorted = sort_svd(u, raw.singular_values.iter().copied().collect(), v);
    if svd_residual(a, &sorted) <= SVD_CHECK * (1.0 + frobenius_norm(a)) {
        sorted
    } else if m >= n {
        jacobi_svd(a)
    } else {
        let t = jacobi_svd(&a.adjoint());
        Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        }
    }
}

const SVD_CHECK: f64 = 1e-12;

fn sort_svd(u: CMatrix, sv: Vec<f64>, v: CMatrix) -> Svd {
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let mut su = CMatrix::zeros(u.nrows(), sv.len());
    let mut sw = CMatrix::zeros(v.nrows(), sv.len());
    for (dst, &src) in order.iter().enumerate() {
        su.set_column(dst, &u.column(src));
        sw.set_column(dst, &v.column(src));
    }
    Svd {
        u: su,
        singular_values: order.iter().map(|&i| sv[i]).collect(),
        v: sw,
    }
}

/// Reconstruction error plus loss of orthonormality in `U` and `V`.
fn svd_residual(a: &CMatrix, s: &Svd) -> f64 {
    let k = s.singular_values.len();
    let rec = &s.u * real_diagonal(&s.singular_values) * s.v.adjoint();
    frobenius_norm(&(rec - a))
        + frobenius_norm(&(s.u.adjoint() * &s.u - identity(k)))
        + frobenius_norm(&(s.v.adjoint() * &s.v - identity(k)))
}

/// One-sided (Hestenes) Jacobi SVD for `m ≥ n`.
fn jacobi_svd(a: &CMatrix) -> Svd {
    let (m, n) = a.shape();
    let mut g = a.clone();
    let mut v = identity(n);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = g.column(p).norm_squared();
                let beta = g.column(q).norm_squared();
                let gamma = g.column(p).dotc(&g.column(q));
                let mag = gamma.norm();
                if mag <= f64::EPSILON * (alpha * beta).sqrt() || mag == 0.0 {
                    continue;
                }
                rotated = true;
                let e = gamma / mag;
                let zeta = (beta - alpha) / (2.0 * mag);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for mat in [&mut g, &mut v] {
                    for r in 0..mat.nrows() {
                        let (x, y) = (mat[(r, p)], mat[(r, q)]);
                        mat[(r, p)] = x * cs - y * e.conj() * sn;
                        mat[(r, q)] = x * e * sn + y * cs;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sv: Vec<f64> = (0..n).map(|j| g.column(j).norm()).collect();
    let smax = sv.iter().fold(0.0f64, |x, &y| x.max(y));
    let mut u = CMatrix::zeros(m, n);
    let mut missing = Vec::new();
    for j in 0..n {
        if sv[j] > 1e-300 && sv[j] > f64::EPSILON * smax * 1e-4 {
            u.set_column(j, &g.column(j).unscale(sv[j]));
        } else {
            missing.push(j);
        }
    }
    // complete U on null directions by Gram–Schmidt against the unit vectors
    let mut e = 0;
    for j in missing {
        while e < m {
            let mut x = CVector::zeros(m);
            x[e] = c(1.0);
            e += 1;
            for i in 0..n {
                let col = u.column(i).into_owned();
                let proj = col.dotc(&x);
                x -= col * proj;
            }
            let nx = x.norm();
            if nx > 1e-6 {
                u.set_column(j, &x.unscale(nx));
                break;
            }
        }
    }
    sort_svd(u, sv, v)
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    svd(a).singular_values
}

pub fn spectral_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Smallest singular value of a square matrix.
pub fn sigma_min(a: &CMatrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// Outcome of the relative singular-value invertibility rule.
#[derive(Debug, Clone, Copy)]
pub struct InvertibilityCheck {
    pub invertible: bool,
    pub sigma_min: f64,
    pub threshold: f64,
}

/// `σ_min > rel_tol · σ_max`.
pub fn check_invertible(a: &CMatrix, rel_tol: f64) -> InvertibilityCheck {
    let s = singular_values(a);
    let smax = s.first().copied().unwrap_or(0.0);
    let smin = s.last().copied().unwrap_or(0.0);
    let threshold = rel_tol * smax;
    InvertibilityCheck {
        invertible: a.nrows() == a.ncols() && smax > 0.0 && smin > threshold,
        sigma_min: smin,
        threshold,
    }
}

pub fn inverse(a: &CMatrix) -> Option<CMatrix> {
    a.clone().try_inverse()
}

/// Inverse of a positive definite Hermitian matrix through its eigen-decomposition.
pub fn hpd_inverse(a: &CMatrix) -> CMatrix {
    hpd_function(a, |x| 1.0 / x)
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hpd_function(a: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let e = eigh(a);
    let fv: Vec<f64> = e.values.iter().map(|&x| f(x)).collect();
    &e.vectors * real_diagonal(&fv) * e.vectors.adjoint()
}

/// Unitary factor of the polar decomposition `A = U |A|`, with `σ_min(A)`.
pub fn polar_unitary(a: &CMatrix) -> (CMatrix, f64) {
    let s = svd(a);
    let smin = s.singular_values.last().copied().unwrap_or(0.0);
    (&s.u * s.v.adjoint(), smin)
}

/// Orthonormal basis (as columns) of the orthogonal complement of the column
/// span of an isometry `b` (`n × d`, `b* b = I`).
pub fn orthonormal_complement(b: &CMatrix) -> CMatrix {
    let n = b.nrows();
    let d = b.ncols();
    if d >= n {
        return CMatrix::zeros(n, 0);
    }
    let proj = identity(n) - b * b.adjoint();
    let e = eigh(&proj);
    e.vectors.columns(0, n - d).into_owned()
}

/// Orthonormal basis of the column space of `a`, using singular values above
/// `rel_tol · σ_max`.
pub fn range_basis(a: &CMatrix, rel_tol: f64) -> CMatrix {
    if a.is_empty() {
        return CMatrix::zeros(a.nrows(), 0);
    }
    let s = svd(a);
    let smax = s.singular_values.first().copied().unwrap_or(0.0);
    let rank = s
        .singular_values
        .iter()
        .filter(|&&x| smax > 0.0 && x > rel_tol * smax)
        .count();
    s.u.columns(0, rank).into_owned()
}

/// Moore–Penrose pseudo-inverse via SVD with relative cutoff.
pub fn pinv(a: &CMatrix, rel_tol: f64) -> CMatrix {
    let s = svd(a);
    let smax = s.singular_values.first().copied().unwrap_or(0.0);
    let mut out = CMatrix::zeros(a.ncols(), a.nrows());
    for (j, &sigma) in s.singular_values.iter().enumerate() {
        if smax > 0.0 && sigma > rel_tol * smax {
            let uj = s.u.column(j);
            let vj = s.v.column(j);
            out += (vj * uj.adjoint()).scale(1.0 / sigma);
        }
    }
    out
}

/// Residual `‖P² − P‖ + ‖P − P*‖` measuring how far `p` is from an orthogonal projection.
pub fn projection_residual(p: &CMatrix) -> f64 {
    spectral_norm(&(p * p - p)) + spectral_norm(&(p - p.adjoint()))
}

/// Spectral projection onto the span of the given eigenvector columns.
pub fn projector_from_columns(vectors: &CMatrix, cols: &[usize]) -> CMatrix {
    let n = vectors.nrows();
    let mut p = CMatrix::zeros(n, n);
    for &j in cols {
        let v = vectors.column(j);
        p += v.clone() * v.adjoint();
    }
    p
}

/// Groups sorted (non-increasing) values into clusters whose consecutive
/// gaps are at most `tol`. Returns index ranges.
pub fn cluster_sorted(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i - 1] - values[i] > tol {
            if start < i {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// Max-abs difference between two equal-length slices.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_sorts_and_fixes_phase() {
        let a = from_real_rows(&[&[1.0, 0.0], &[0.0, 3.0]]);
        let e = eigh(&a);
        assert_eq!(e.values.len(), 2);
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        for j in 0..2 {
            let first = e.vectors.column(j).iter().find(|z| z.norm() > 1e-12).copied().unwrap();
            assert!(first.im.abs() < 1e-14 && first.re > 0.0);
        }
    }

    #[test]
    fn polar_factor_is_unitary() {
        let a = from_real_rows(&[&[2.0, 1.0], &[0.0, 1.0]]);
        let (u, smin) = polar_unitary(&a);
        assert!(smin > 0.0);
        assert!(spectral_norm(&(u.adjoint() * &u - identity(2))) < 1e-13);
    }

    #[test]
    fn complement_spans_the_rest() {
        let b = from_real_rows(&[&[1.0], &[0.0], &[0.0]]);
        let q = orthonormal_complement(&b);
        assert_eq!(q.ncols(), 2);
        assert!(spectral_norm(&(q.adjoint() * &b)) < 1e-14);
        assert!(spectral_norm(&(q.adjoint() * &q - identity(2))) < 1e-13);
    }

    #[test]
    fn clusters() {
        let r = cluster_sorted(&[2.0, 2.0, 1.5, 1.5 - 1e-12, 1.0], 1e-9);
        assert_eq!(r, vec![0..2, 2..4, 4..5]);
    }

    // nalgebra's bidiagonal SVD gets this rank-one block wrong (σ₁ ≈ 1.0012)
    #[test]
    fn svd_of_bad_rank_one_block() {
        let a = CMatrix::from_column_slice(
            2,
            2,
            &[
                C64::new(2.8125291706997985e-2, -2.6116163541007364e-1),
                C64::new(-3.8407411466099733e-1, -2.2057926900086094e-1),
                C64::new(-2.0293677250545428e-1, -3.8732742795543595e-1),
                C64::new(-7.355793338022616e-1, 5.0523284654386255e-2),
            ],
        );
        let s = svd(&a);
        assert!((s.singular_values[0] - 1.0).abs() < 1e-12, "{:?}", s.singular_values);
        assert!(svd_residual(&a, &s) < 1e-12);
    }

    #[test]
    fn jacobi_matches_on_random_shapes() {
        let mut g = crate::rng::stream(11, 0);
        for (m, n) in [(5, 3), (4, 4), (6, 1), (3, 2)] {
            let mut a = crate::rng::complex_gaussian(&mut g, m, n);
            // force a rank drop
            let col = a.column(0).into_owned();
            a.set_column(n - 1, &col);
            let s = jacobi_svd(&a);
            assert!(svd_residual(&a, &s) < 1e-12, "{m}x{n}");
            assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
