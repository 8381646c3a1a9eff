//! Dense complex/real matrix helpers shared by every module.

use faer::complex_native::c64;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type RMatrix = DMatrix<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn from_real(m: &RMatrix) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

pub fn real_part(m: &CMatrix) -> RMatrix {
    m.map(|z| z.re)
}

pub fn imag_part(m: &CMatrix) -> RMatrix {
    m.map(|z| z.im)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `||M − M†||_F / max(1, ||M||_F)`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let diff = m - m.adjoint();
    frobenius(&diff) / frobenius(m).max(1.0)
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized first so that rounding-level anti-Hermitian noise
/// does not leak into the eigenvectors. nalgebra's `SymmetricEigen` returns
/// inaccurate eigenvectors for a small fraction of complex inputs, so this
/// goes through faer.
pub fn eigh(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let h = hermitize(m);
    let n = h.nrows();
    let fm = faer::Mat::<c64>::from_fn(n, n, |i, j| c64::new(h[(i, j)].re, h[(i, j)].im));
    let evd = fm.selfadjoint_eigendecomposition(faer::Side::Lower);
    let s = evd.s().column_vector();
    let values = DVector::from_fn(n, |i, _| s.read(i).re);
    let u = evd.u();
    let vectors = CMatrix::from_fn(n, n, |i, j| {
        let z = u.read(i, j);
        C64::new(z.re, z.im)
    });
    sort_eigen(values, vectors)
}

/// Real symmetric eigendecomposition, eigenvalues ascending.
pub fn eigh_real(m: &RMatrix) -> (DVector<f64>, RMatrix) {
    let n = m.nrows();
    let fm = faer::Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let evd = fm.selfadjoint_eigendecomposition(faer::Side::Lower);
    let s = evd.s().column_vector();
    let values = DVector::from_fn(n, |i, _| s.read(i));
    let u = evd.u();
    let vectors = RMatrix::from_fn(n, n, |i, j| u.read(i, j));
    sort_eigen(values, vectors)
}

fn sort_eigen<T: nalgebra::Scalar + Copy>(
    values: DVector<f64>,
    vectors: DMatrix<T>,
) -> (DVector<f64>, DMatrix<T>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted = DVector::from_iterator(values.len(), order.iter().map(|&i| values[i]));
    let cols: Vec<_> = order.iter().map(|&i| vectors.column(i).into_owned()).collect();
    (sorted, DMatrix::from_columns(&cols))
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigh(m).0.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Inverse of a real symmetric positive-definite matrix via eigendecomposition.
/// Fails when the condition number exceeds `max_condition`.
pub fn inverse_spd(m: &RMatrix, max_condition: f64) -> Option<RMatrix> {
    let (vals, vecs) = eigh_real(m);
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) || hi / lo > max_condition {
        return None;
    }
    let inv = DMatrix::from_diagonal(&vals.map(|v| 1.0 / v));
    let out = &vecs * inv * vecs.transpose();
    Some((&out + out.transpose()).scale(0.5))
}

/// Sum of singular values of a real matrix.
pub fn trace_norm_real(m: &RMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// Sum of singular values of a complex matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// Row-major flattening of the real and imaginary parts, `2·d²` reals.
pub fn vectorize(m: &CMatrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
    out
}

/// Smallest-over-largest singular value of the matrix whose rows are `rows`.
pub fn row_independence_ratio(rows: &[Vec<f64>]) -> f64 {
    if rows.is_empty() {
        return 1.0;
    }
    let cols = rows[0].len();
    let stacked = RMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    let sv = stacked.svd(false, false).singular_values;
    let hi = sv.iter().copied().fold(0.0, f64::max);
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}

/// Orthonormal basis of the null space of `a` (columns). Row-space directions
/// are the right singular vectors with `σ > tol·σ_max`; the null space is the
/// unit-eigenvalue eigenspace of the complementary projector.
pub fn null_space(a: &RMatrix, tol: f64) -> RMatrix {
    let p = a.ncols();
    let mut projector = RMatrix::identity(p, p);
    if a.nrows() > 0 {
        let svd = a.clone().svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let hi = svd.singular_values.iter().copied().fold(0.0, f64::max);
        for (k, &sv) in svd.singular_values.iter().enumerate() {
            if sv > tol * hi {
                let row = v_t.row(k).transpose();
                projector -= &row * row.transpose();
            }
        }
    }
    let (vals, vecs) = eigh_real(&projector);
    let cols: Vec<_> = (0..p)
        .filter(|&i| vals[i] > 0.5)
        .map(|i| vecs.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        RMatrix::zeros(p, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Minimum-norm solution of `a x = c` via the pseudo-inverse, with the residual norm.
pub fn min_norm_solve(a: &RMatrix, c: &DVector<f64>, tol: f64) -> (DVector<f64>, f64) {
    let svd = a.clone().svd(true, true);
    let hi = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let x = svd
        .solve(c, tol * hi.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| DVector::zeros(a.ncols()));
    let resid = (a * &x - c).norm();
    (x, resid)
}
