//! Definitional oracles, computed through deliberately different numerics
//! than the construction modules.
//!
//! The Friedrichs extension is the relation of the (here automatically
//! closed) form t_S: its graph is obtained as the nullspace of the defining
//! linear constraints rather than as a span, and the form coefficients come
//! from Gram-matrix pseudoinverse solves rather than from an SVD least
//! squares. The Kreĭn extension is S_K = ((S⁻¹)_F)⁻¹. Extremality of an
//! extension H ⊇ S is the statement that t_H is a restriction of t_{S_K}.
//! Agreement between these paths and the factorized/form-sum constructions
//! is the evidence the rest of the crate rests on.

use crate::error::{ensure_internal, RelabError, Result};
use crate::linalg::{hermitian_eigen, re, vstack, CMatrix};
use crate::relation::Relation;
use crate::sectorial::{form_of, relation_of_form, sectoriality, SesquiForm};
use crate::subspace::{span_cols_scaled, Subspace, Tolerance};

/// Eigenvalue cutoff (relative to the largest eigenvalue) under which a
/// direction of AᴴA counts as nullspace. Exact-zero directions compute to
/// about 1e-16 relative, genuine directions stay far above 1e-12.
const NULL_REL: f64 = 1e-12;

/// Verdict of `extremal_oracle`: is H a maximal sectorial extension of S
/// whose closed form restricts the form of the Kreĭn extension?
#[derive(Debug, Clone, Copy)]
pub struct ExtensionVerdict {
    pub extends: bool,
    pub maximal: bool,
    pub extremal: bool,
    /// Largest defect among the failed checks; 0 when all pass.
    pub witness_gap: f64,
}

/// Orthonormal basis of ker A via the eigendecomposition of AᴴA.
fn nullspace(a: &CMatrix) -> CMatrix {
    let cols = a.ncols();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return CMatrix::identity(cols, cols);
    }
    let gram = a.adjoint() * a;
    let (vals, vecs) = hermitian_eigen(&gram);
    let lmax = vals.iter().cloned().fold(0.0_f64, f64::max).max(0.0);
    let keep: Vec<usize> = (0..cols)
        .filter(|&i| vals[i] <= NULL_REL * lmax.max(1.0))
        .collect();
    if keep.is_empty() {
        return CMatrix::zeros(cols, 0);
    }
    CMatrix::from_columns(&keep.iter().map(|&i| vecs.column(i).into_owned()).collect::<Vec<_>>())
}

/// Intersection of two subspaces as the nullspace of the stacked complement
/// projectors [[I−P_A], [I−P_B]]; the cross-check partner of `subspace::meet`.
pub fn meet_by_nullspace(a: &Subspace, b: &Subspace) -> Result<Subspace> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(RelabError::DimensionMismatch(format!(
            "meet_by_nullspace: ambient dimensions {} and {}",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    let n = a.ambient_dim();
    let eye = CMatrix::identity(n, n);
    let stacked = vstack(&(&eye - a.projector()), &(&eye - b.projector()));
    Ok(Subspace::from_orthonormal(nullspace(&stacked)))
}

/// Coefficients solving X c = rhs column-wise through the Gram pseudoinverse
/// (XᴴX)⁺ Xᴴ rhs; the cross-check partner of the SVD least-squares path.
fn gram_pinv_solve(x: &CMatrix, rhs: &CMatrix) -> CMatrix {
    let g = x.ncols();
    if g == 0 {
        return CMatrix::zeros(0, rhs.ncols());
    }
    let gram = x.adjoint() * x;
    let (vals, vecs) = hermitian_eigen(&gram);
    let lmax = vals.iter().cloned().fold(0.0_f64, f64::max).max(0.0);
    let inv = CMatrix::from_diagonal(&crate::linalg::CVector::from_iterator(
        g,
        (0..g).map(|i| {
            if vals[i] > NULL_REL * lmax.max(1.0) {
                re(1.0 / vals[i])
            } else {
                re(0.0)
            }
        }),
    ));
    &vecs * inv * vecs.adjoint() * x.adjoint() * rhs
}

/// Friedrichs extension from the definition: the unique maximal sectorial
/// relation of the form t_S[φ, ψ] = (φ′, ψ). The graph is cut out by the
/// constraints h ∈ dom S and P_dom h′ = (form image of h), and computed as a
/// nullspace.
pub fn friedrichs_oracle(s: &Relation, tol: &Tolerance) -> Result<Relation> {
    let report = sectoriality(s, tol)?;
    if !report.is_sectorial {
        return Err(RelabError::NotSectorial(
            "friedrichs_oracle: input is not sectorial".into(),
        ));
    }
    let n = s.dim_from();
    let basis = s.graph().basis();
    let x = basis.rows(0, n).into_owned();
    let y = basis.rows(n, n).into_owned();
    let dom = span_cols_scaled(&x, tol, 1.0);
    let g = dom.basis();
    let d = dom.dim();
    let perp = dom.complement();

    // Form matrix by Gram solves: M = Gᴴ Y (XᴴX)⁺ Xᴴ G.
    let coeff = gram_pinv_solve(&x, &g.clone_owned());
    let m = g.adjoint() * &y * coeff;

    // Constraint rows on (h, h′) ∈ ℂ²ⁿ: D_perpᴴ h = 0 and Gᴴ h′ = M Gᴴ h.
    let top = crate::linalg::hstack(
        &perp.basis().adjoint().into_owned(),
        &CMatrix::zeros(n - d, n),
    );
    let bottom = crate::linalg::hstack(&(-(&m * g.adjoint())), &g.adjoint().into_owned());
    let constraints = vstack(&top, &bottom);
    let graph_basis = nullspace(&constraints);
    ensure_internal(
        "friedrichs_oracle: graph dimension must equal the ambient dimension",
        (graph_basis.ncols() as f64 - n as f64).abs(),
        0.0,
    )?;
    let result = Relation::from_graph(n, n, Subspace::from_orthonormal(graph_basis))?;

    ensure_internal(
        "friedrichs_oracle: result must extend the input",
        containment_defect(s, &result),
        tol.gap_eq,
    )?;
    let out_report = sectoriality(&result, tol)?;
    if !out_report.is_maximal {
        return Err(RelabError::internal(
            "friedrichs_oracle: result must be maximal sectorial",
            1.0,
            0.0,
        ));
    }
    Ok(result)
}

/// Kreĭn extension from the inverse formula S_K = ((S⁻¹)_F)⁻¹.
pub fn krein_oracle(s: &Relation, tol: &Tolerance) -> Result<Relation> {
    let report = sectoriality(s, tol)?;
    if !report.is_sectorial {
        return Err(RelabError::NotSectorial(
            "krein_oracle: input is not sectorial".into(),
        ));
    }
    let result = friedrichs_oracle(&s.inverse(), tol)?.inverse();
    ensure_internal(
        "krein_oracle: result must extend the input",
        containment_defect(s, &result),
        tol.gap_eq,
    )?;
    Ok(result)
}

/// ‖(I − P_larger) Q_smaller‖: zero exactly when graph(smaller) ⊆ graph(larger).
pub(crate) fn containment_defect(smaller: &Relation, larger: &Relation) -> f64 {
    if smaller.graph_dim() == 0 {
        return 0.0;
    }
    let p = larger.graph().projector();
    let q = smaller.graph().basis();
    let eye = CMatrix::identity(p.nrows(), p.ncols());
    ((eye - p) * q).norm()
}

/// Extremality test from the definition: H is an extremal maximal sectorial
/// extension of S exactly when H ⊇ S, H is maximal sectorial, and t_H is a
/// restriction of t_{S_K}. Form domains are stored with non-unique bases, so
/// the comparison aligns them: C = WᴴG_H expresses the basis of dom t_H in
/// the basis W of dom t_{S_K}; the alignment residual must vanish and
/// Cᴴ M_K C must reproduce M_H.
pub fn extremal_oracle(h: &Relation, s: &Relation, tol: &Tolerance) -> Result<ExtensionVerdict> {
    let mut witness: f64 = 0.0;

    let ext_defect = containment_defect(s, h);
    let extends = ext_defect <= tol.gap_eq;
    if !extends {
        witness = witness.max(ext_defect);
    }

    let report = sectoriality(h, tol)?;
    let maximal = report.is_maximal;
    if !maximal {
        witness = witness.max(1.0);
    }

    let mut extremal = extends && maximal;
    if extremal {
        let sk = krein_oracle(s, tol)?;
        let t_h = form_of(h, tol)?;
        let t_k = form_of(&sk, tol)?;
        let g_h = t_h.domain().basis();
        let w = t_k.domain().basis();
        let c = w.adjoint() * g_h;
        let align = (w * &c - g_h).norm();
        if align > 1e-9 {
            extremal = false;
            witness = witness.max(align);
        } else {
            let transported = c.adjoint() * t_k.matrix() * &c;
            let scale = 1.0 + t_h.matrix().norm().max(t_k.matrix().norm());
            let resid = (transported - t_h.matrix()).norm();
            if resid > 1e-8 * scale {
                extremal = false;
                witness = witness.max(resid);
            }
        }
    }

    Ok(ExtensionVerdict {
        extends,
        maximal,
        extremal,
        witness_gap: if extends && maximal && extremal {
            0.0
        } else {
            witness
        },
    })
}

/// The extremal extension of S with form domain L: the relation of
/// t_{S_K} ↾ L, for any L between dom S and dom t_{S_K}. The endpoints give
/// back the Friedrichs (L = dom S) and Kreĭn (L = dom t_{S_K}) extensions.
pub fn extension_family_general(s: &Relation, l: &Subspace, tol: &Tolerance) -> Result<Relation> {
    let report = sectoriality(s, tol)?;
    if !report.is_sectorial {
        return Err(RelabError::NotSectorial(
            "extension_family_general: input is not sectorial".into(),
        ));
    }
    let sk = krein_oracle(s, tol)?;
    let t_k = form_of(&sk, tol)?;
    let n = s.dim_from();
    let basis = s.graph().basis();
    let dom_s = span_cols_scaled(&basis.rows(0, n).into_owned(), tol, 1.0);
    if !dom_s.is_subspace_of(l, tol) || !l.is_subspace_of(t_k.domain(), tol) {
        return Err(RelabError::Precondition(format!(
            "extension_family_general: need dom S ⊆ L ⊆ dom t_K, got dims {} / {} / {}",
            dom_s.dim(),
            l.dim(),
            t_k.domain().dim()
        )));
    }
    let restricted = t_k.restrict_to(l, tol)?;
    let result = relation_of_form(&restricted, tol)?;
    let verdict = extremal_oracle(&result, s, tol)?;
    if !verdict.extremal {
        return Err(RelabError::internal(
            "extension_family_general: result must be an extremal extension",
            verdict.witness_gap,
            tol.gap_eq,
        ));
    }
    Ok(result)
}

/// Restriction test between closed sectorial forms, exposed for the §3
/// extremality characterizations: does t_small agree with t_big on
/// dom t_small ⊆ dom t_big?
pub fn form_restricts(small: &SesquiForm, big: &SesquiForm, _tol: &Tolerance) -> (bool, f64) {
    let g = small.domain().basis();
    let w = big.domain().basis();
    let c = w.adjoint() * g;
    let align = (w * &c - g).norm();
    if align > 1e-9 {
        return (false, align);
    }
    let transported = c.adjoint() * big.matrix() * &c;
    let scale = 1.0 + small.matrix().norm().max(big.matrix().norm());
    let resid = (transported - small.matrix()).norm();
    (resid <= 1e-8 * scale, resid)
}
