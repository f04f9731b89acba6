//! Subspace arithmetic over ℂⁿ.
//!
//! A subspace is held as a column-orthonormal basis (n×d, with d = 0 for the
//! zero subspace). Rank decisions go through singular values against a single
//! relative cutoff, and equality of subspaces is the gap metric
//! ‖P_A − P_B‖ — never basis comparison, since bases are non-unique.

use nalgebra::SymmetricEigen;

use crate::error::{RelabError, Result};
use crate::linalg::{hstack, CMatrix, CVector};

pub use crate::linalg::C64;

/// Numerical policy shared by every rank and equality decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Relative singular-value cutoff: σ counts as nonzero iff σ > rank_rel·σ_max.
    pub rank_rel: f64,
    /// Two subspaces are equal iff their gap is ≤ gap_eq.
    pub gap_eq: f64,
}

impl Default for Tolerance {
    // rank_rel sits far above machine noise accumulated by composition
    // chains (each meet/join costs a few eigendecompositions) and far below
    // any angle the ensembles produce.
    fn default() -> Self {
        Tolerance {
            rank_rel: 1e-10,
            gap_eq: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, gap_eq: f64) -> Self {
        assert!(rank_rel > 0.0 && gap_eq > 0.0, "tolerances must be positive");
        Tolerance { rank_rel, gap_eq }
    }
}

#[derive(Debug, Clone)]
pub struct Subspace {
    ambient: usize,
    basis: CMatrix, // n × d, columns orthonormal
}

impl Subspace {
    /// The zero subspace {0} ⊂ ℂⁿ (d = 0, never zero columns).
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: CMatrix::zeros(ambient, 0),
        }
    }

    /// The full space ℂⁿ.
    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: CMatrix::identity(ambient, ambient),
        }
    }

    /// Wraps a matrix whose columns are already orthonormal.
    pub fn from_orthonormal(basis: CMatrix) -> Self {
        let gram_err = (basis.adjoint() * &basis - CMatrix::identity(basis.ncols(), basis.ncols()))
            .norm();
        assert!(
            gram_err <= 1e-10 * (1.0 + basis.ncols() as f64),
            "basis is not orthonormal (Gram residual {gram_err:.3e})"
        );
        Subspace {
            ambient: basis.nrows(),
            basis,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Orthogonal projector P = QQᴴ as a dense matrix.
    pub fn projector(&self) -> CMatrix {
        if self.dim() == 0 {
            return CMatrix::zeros(self.ambient, self.ambient);
        }
        &self.basis * self.basis.adjoint()
    }

    /// Orthogonal complement, computed from the eigenvectors of I − QQᴴ
    /// (eigenvalues split cleanly at 0 and 1, so no rank decision is needed).
    pub fn complement(&self) -> Subspace {
        let n = self.ambient;
        if self.dim() == 0 {
            return Subspace::full(n);
        }
        if self.dim() == n {
            return Subspace::zero(n);
        }
        let p = CMatrix::identity(n, n) - self.projector();
        let eig = SymmetricEigen::new(p);
        let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
        assert_eq!(
            keep.len(),
            n - self.dim(),
            "projector spectrum did not split at 0/1"
        );
        let cols: Vec<CVector> = keep
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect();
        Subspace::from_orthonormal(CMatrix::from_columns(&cols))
    }

    /// Orthogonal projection of a vector onto the subspace.
    pub fn project(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.ambient {
            return Err(RelabError::DimensionMismatch(format!(
                "project: vector has length {}, ambient is {}",
                v.len(),
                self.ambient
            )));
        }
        if self.dim() == 0 {
            return Ok(CVector::zeros(self.ambient));
        }
        Ok(&self.basis * (self.basis.adjoint() * v))
    }

    /// Membership test: the component of v orthogonal to the subspace is
    /// negligible relative to ‖v‖ (or absolutely, for tiny v).
    pub fn contains_vector(&self, v: &CVector, tol: &Tolerance) -> bool {
        if v.len() != self.ambient {
            return false;
        }
        let p = self.project(v).expect("dimension checked");
        (v - p).norm() <= tol.gap_eq * v.norm().max(1.0)
    }

    /// A ⊆ B, tested column by column on A's orthonormal basis.
    pub fn is_subspace_of(&self, other: &Subspace, tol: &Tolerance) -> bool {
        if self.ambient != other.ambient {
            return false;
        }
        (0..self.dim()).all(|j| {
            let col = self.basis.column(j).into_owned();
            other.contains_vector(&col, tol)
        })
    }
}

/// Orthonormalized span of a list of generators, all of length `ambient`.
/// The rank is decided by pivoted QR magnitudes against tol.rank_rel.
pub fn span(ambient: usize, generators: &[CVector], tol: &Tolerance) -> Result<Subspace> {
    for (i, g) in generators.iter().enumerate() {
        if g.len() != ambient {
            return Err(RelabError::DimensionMismatch(format!(
                "span: generator {i} has length {}, ambient is {ambient}",
                g.len()
            )));
        }
    }
    if generators.is_empty() {
        return Ok(Subspace::zero(ambient));
    }
    Ok(span_cols(&CMatrix::from_columns(generators), tol))
}

/// Span of the columns of a matrix (ambient = row count). The cutoff is
/// purely relative to the leading pivot, which is right for user-supplied
/// generators of arbitrary scale.
pub fn span_cols(m: &CMatrix, tol: &Tolerance) -> Subspace {
    span_cols_scaled(m, tol, 0.0)
}

/// Span with a reference scale: a pivot counts as nonzero iff
/// |r_kk| > rank_rel·max(|r_00|, scale). Internal callers whose columns
/// derive from orthonormal bases pass scale = 1 so that a matrix made
/// entirely of roundoff junk is recognized as zero (a purely relative cutoff
/// would keep its largest noise direction).
///
/// Rank detection runs on a column-pivoted Householder QR rather than the
/// SVD: the reflections are applied in a fixed finite pass, so the basis is
/// orthonormal and spans the kept pivot columns to machine precision even
/// when near-zero columns sit between unit-norm ones (a layout that can
/// derail iterative bidiagonal SVDs).
pub(crate) fn span_cols_scaled(m: &CMatrix, tol: &Tolerance, scale: f64) -> Subspace {
    let n = m.nrows();
    if n == 0 || m.ncols() == 0 {
        return Subspace::zero(n);
    }
    let qr = m.clone().col_piv_qr();
    let r = qr.r();
    let lead = r[(0, 0)].norm();
    if lead.max(scale) <= 0.0 {
        return Subspace::zero(n);
    }
    let cut = tol.rank_rel * lead.max(scale);
    // Pivoting moves the dominant remaining column to the front at every
    // step, so the first sub-cutoff diagonal entry bounds all later ones up
    // to a factor √n already absorbed by the rank tolerance.
    let mut rank = 0;
    while rank < r.nrows().min(r.ncols()) && r[(rank, rank)].norm() > cut {
        rank += 1;
    }
    if rank == 0 {
        return Subspace::zero(n);
    }
    Subspace::from_orthonormal(qr.q().columns(0, rank).into_owned())
}

/// Intersection and sum in one call: join = span of concatenated bases,
/// meet = (A^⊥ + B^⊥)^⊥. Generically dim meet + dim join = dim A + dim B.
pub fn meet_join(a: &Subspace, b: &Subspace, tol: &Tolerance) -> Result<(Subspace, Subspace)> {
    check_same_ambient(a, b, "meet_join")?;
    let sum = join(a, b, tol);
    let (ca, cb) = (a.complement(), b.complement());
    let intersection = join(&ca, &cb, tol).complement();
    Ok((intersection, sum))
}

pub fn join(a: &Subspace, b: &Subspace, tol: &Tolerance) -> Subspace {
    assert_eq!(a.ambient, b.ambient, "join: ambient mismatch");
    if a.dim() == 0 {
        return b.clone();
    }
    if b.dim() == 0 {
        return a.clone();
    }
    span_cols_scaled(&hstack(a.basis(), b.basis()), tol, 1.0)
}

pub fn meet(a: &Subspace, b: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    Ok(meet_join(a, b, tol)?.0)
}

/// Gap metric ‖P_A − P_B‖ (spectral norm of the projector difference).
/// Zero iff the subspaces agree; subspaces of different dimension are at
/// gap exactly 1, which is returned without touching floating point.
pub fn gap(a: &Subspace, b: &Subspace) -> Result<f64> {
    check_same_ambient(a, b, "gap")?;
    if a.dim() != b.dim() {
        return Ok(1.0);
    }
    if a.dim() == 0 {
        return Ok(0.0);
    }
    let diff = a.projector() - b.projector();
    let eig = SymmetricEigen::new(diff);
    let g = eig.eigenvalues.iter().fold(0.0_f64, |acc, &l| acc.max(l.abs()));
    Ok(g.min(1.0))
}

/// The repo-wide equality predicate: gap ≤ tol.gap_eq.
pub fn subspaces_equal(a: &Subspace, b: &Subspace, tol: &Tolerance) -> Result<bool> {
    Ok(gap(a, b)? <= tol.gap_eq)
}

fn check_same_ambient(a: &Subspace, b: &Subspace, op: &str) -> Result<()> {
    if a.ambient != b.ambient {
        return Err(RelabError::DimensionMismatch(format!(
            "{op}: ambient dimensions differ ({} vs {})",
            a.ambient, b.ambient
        )));
    }
    Ok(())
}

/// Embeds a subspace of ℂᵏ into ℂ^(before+k+after) by zero-padding rows;
/// orthonormality is preserved exactly.
pub fn embed(s: &Subspace, before: usize, after: usize) -> Subspace {
    let n = before + s.ambient + after;
    let mut basis = CMatrix::zeros(n, s.dim());
    basis
        .view_mut((before, 0), (s.ambient, s.dim()))
        .copy_from(s.basis());
    Subspace {
        ambient: n,
        basis,
    }
}

/// Direct sum of subspaces living in consecutive coordinate blocks; the
/// resulting basis is orthonormal because the blocks do not overlap.
pub fn block_direct_sum(parts: &[&Subspace]) -> Subspace {
    let total: usize = parts.iter().map(|s| s.ambient).sum();
    let mut cols: Vec<CVector> = Vec::new();
    let mut offset = 0;
    for s in parts {
        for j in 0..s.dim() {
            let mut v = CVector::zeros(total);
            v.rows_mut(offset, s.ambient).copy_from(&s.basis().column(j));
            cols.push(v);
        }
        offset += s.ambient;
    }
    if cols.is_empty() {
        return Subspace::zero(total);
    }
    Subspace::from_orthonormal(CMatrix::from_columns(&cols))
}
