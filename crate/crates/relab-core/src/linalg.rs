//! Dense helpers over complex matrices: Hermitian splits, functional
//! calculus, spectral norms, and rank-aware least squares.
//!
//! Everything here tolerates empty (0×0, n×0) operands; nalgebra's
//! decompositions do not, so the guards live in one place.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn cplx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Absolute noise floor for spectral data of unit-scale objects. Gram and
/// form matrices here are built from orthonormal bases, so an eigenvalue
/// below this floor carries no information even when it happens to be the
/// largest one in an all-noise matrix.
pub(crate) const NOISE_ABS: f64 = 1e-12;

/// Largest singular value, as the root of the top eigenvalue of the smaller
/// Gram matrix; 0 for empty matrices. Squaring is harmless at the top of the
/// spectrum and the symmetric eigensolver is far more dependable than the
/// iterative SVD.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let gram = if m.nrows() <= m.ncols() {
        m * m.adjoint()
    } else {
        m.adjoint() * m
    };
    let sym = (&gram + gram.adjoint()).scale(0.5);
    sym.symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, &l| acc.max(l))
        .max(0.0)
        .sqrt()
}

/// Largest |eigenvalue| of a Hermitian matrix (its operator norm).
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.symmetric_eigenvalues()
        .iter()
        .fold(0.0, |acc, &l| acc.max(l.abs()))
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).norm() <= tol * (1.0 + m.norm())
}

/// Hermitian and skew parts: M = M_r + i·M_i with both returns Hermitian.
pub fn hermitian_split(m: &CMatrix) -> (CMatrix, CMatrix) {
    let mh = m.adjoint();
    let m_r = (m + &mh).scale(0.5);
    let m_i = (m - &mh).scale(0.5) * cplx(0.0, -1.0);
    (m_r, m_i)
}

/// Eigen-decomposition of a Hermitian matrix with the Hermitian part taken
/// first, so roundoff in the input cannot leak complex eigenvalues.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    (eig.eigenvalues.iter().cloned().collect(), eig.eigenvectors)
}

/// f applied to a Hermitian matrix through its spectrum: V·diag(f(λ))·Vᴴ.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = m.nrows();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let (vals, vecs) = hermitian_eigen(m);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(n, vals.iter().map(|&l| re(f(l)))));
    &vecs * d * vecs.adjoint()
}

/// Principal square root of a Hermitian PSD matrix. Eigenvalues within
/// roundoff of zero (λ ≤ 1e-14·λ_max or λ ≤ the absolute noise floor,
/// including negatives) are flattened to exact zero first: the square root
/// turns an O(ε) perturbation of a zero eigenvalue into O(√ε), which would
/// otherwise smear measurable junk over the kernel. The absolute floor
/// matters when the whole matrix is noise: λ_max itself is then meaningless
/// and a relative cutoff would keep it.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let (vals, vecs) = hermitian_eigen(m);
    let lmax = vals.iter().fold(0.0_f64, |a, &l| a.max(l));
    let cut = (1e-14 * lmax).max(NOISE_ABS);
    let rooted = CVector::from_iterator(
        n,
        vals.iter()
            .map(|&l| re(if l <= cut { 0.0 } else { l.sqrt() })),
    );
    &vecs * CMatrix::from_diagonal(&rooted) * vecs.adjoint()
}

/// A least-squares solution of A·x = b via column-pivoted QR, together with
/// the residual ‖A·x − b‖. Pivots below `rank_rel`·|r₀₀| count as rank
/// deficiency; the free coordinates of the pivoted system are set to zero,
/// so the solution is basic rather than minimal-norm. Callers that need a
/// canonical representative must quotient by the kernel themselves.
pub fn lstsq(a: &CMatrix, b: &CVector, rank_rel: f64) -> (CVector, f64) {
    let (nr, nc) = a.shape();
    if nc == 0 {
        return (CVector::zeros(0), b.norm());
    }
    if nr == 0 {
        return (CVector::zeros(nc), 0.0);
    }
    let qr = a.clone().col_piv_qr();
    let r = qr.r();
    let cut = rank_rel * r[(0, 0)].norm();
    let mut rank = 0;
    while rank < r.nrows().min(r.ncols()) && r[(rank, rank)].norm() > cut {
        rank += 1;
    }
    let mut qtb = b.clone();
    qr.q_tr_mul(&mut qtb);
    // Back-substitute through the rank×rank corner of R, zero the rest, then
    // undo the column pivoting.
    let mut x = CVector::zeros(nc);
    for i in (0..rank).rev() {
        let mut acc = qtb[i];
        for j in i + 1..rank {
            acc -= r[(i, j)] * x[j];
        }
        x[i] = acc / r[(i, i)];
    }
    qr.p().inv_permute_rows(&mut x);
    let resid = (a * &x - b).norm();
    (x, resid)
}

/// Stacks blocks [top; bottom] with equal column counts.
pub fn vstack(top: &CMatrix, bottom: &CMatrix) -> CMatrix {
    assert_eq!(top.ncols(), bottom.ncols(), "vstack column mismatch");
    let mut out = CMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.view_mut((0, 0), top.shape()).copy_from(top);
    out.view_mut((top.nrows(), 0), bottom.shape())
        .copy_from(bottom);
    out
}

/// Concatenates blocks [left | right] with equal row counts.
pub fn hstack(left: &CMatrix, right: &CMatrix) -> CMatrix {
    assert_eq!(left.nrows(), right.nrows(), "hstack row mismatch");
    let mut out = CMatrix::zeros(left.nrows(), left.ncols() + right.ncols());
    out.view_mut((0, 0), left.shape()).copy_from(left);
    out.view_mut((0, left.ncols()), right.shape())
        .copy_from(right);
    out
}

/// Block diagonal of two square matrices.
pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (na, nb) = (a.nrows(), b.nrows());
    assert!(a.is_square() && b.is_square(), "block_diag wants squares");
    let mut out = CMatrix::zeros(na + nb, na + nb);
    out.view_mut((0, 0), (na, na)).copy_from(a);
    out.view_mut((na, na), (nb, nb)).copy_from(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn split_recombines_and_parts_are_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[cplx(1.0, 2.0), cplx(0.5, -1.0), re(3.0), cplx(0.0, 4.0)]);
        let (mr, mi) = hermitian_split(&m);
        assert!(is_hermitian(&mr, 1e-14));
        assert!(is_hermitian(&mi, 1e-14));
        let back = &mr + &mi * cplx(0.0, 1.0);
        assert_abs_diff_eq!((back - &m).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let m = CMatrix::from_row_slice(2, 2, &[re(4.0), re(0.0), re(0.0), re(9.0)]);
        let r = psd_sqrt(&m);
        assert_abs_diff_eq!((&r * &r - &m).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[(0, 0)].re, 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r[(1, 1)].re, 3.0, epsilon = 1e-13);
    }

    #[test]
    fn lstsq_solves_underdetermined_systems_exactly() {
        // A = [1 1] has a one-parameter solution family for b = (2); any
        // member must reproduce b exactly.
        let a = CMatrix::from_row_slice(1, 2, &[re(1.0), re(1.0)]);
        let b = CVector::from_element(1, re(2.0));
        let (x, resid) = lstsq(&a, &b, 1e-12);
        assert_abs_diff_eq!(resid, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!((&a * &x - &b).norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn lstsq_reports_the_residual_of_inconsistent_systems() {
        // A = [1; 1] against b = (0, 2): the best fit is x = 1 with residual
        // √2, and a rank-deficient wide system still picks a consistent x.
        let a = CMatrix::from_row_slice(2, 1, &[re(1.0), re(1.0)]);
        let b = CVector::from_column_slice(&[re(0.0), re(2.0)]);
        let (x, resid) = lstsq(&a, &b, 1e-12);
        assert_abs_diff_eq!(x[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(resid, std::f64::consts::SQRT_2, epsilon = 1e-12);

        let a2 = CMatrix::from_row_slice(2, 3, &[
            re(1.0), re(2.0), re(3.0),
            re(2.0), re(4.0), re(6.0),
        ]);
        let b2 = CVector::from_column_slice(&[re(1.0), re(2.0)]);
        let (x2, resid2) = lstsq(&a2, &b2, 1e-12);
        assert_abs_diff_eq!(resid2, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((&a2 * &x2 - &b2).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_operands_are_tolerated() {
        let e = CMatrix::zeros(0, 0);
        assert_eq!(spectral_norm(&e), 0.0);
        assert_eq!(hermitian_norm(&e), 0.0);
        assert_eq!(hermitian_fn(&e, |l| l + 1.0).nrows(), 0);
    }
}
