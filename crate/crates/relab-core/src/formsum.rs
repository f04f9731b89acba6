//! Sums of two maximal sectorial relations through their factorizations.
//!
//! Given maximal sectorial H₁ and H₂ on ℂⁿ with H_j = A_j^{1/2}(I+iB_j)A_j^{1/2},
//! the sum H₁+H₂ is described through auxiliary relations between ℂⁿ and the
//! doubled space ℂ²ⁿ:
//!
//!   Φ: ℂ²ⁿ → ℂⁿ,  ({f₁,f₂}, f₁′+f₂′) with (f_j, f_j′) ∈ A_j^{1/2},
//!   Ψ: ℂⁿ → ℂ²ⁿ,  h ↦ {A_{1s}^{1/2}h, A_{2s}^{1/2}h} on dom H₁ ∩ dom H₂,
//!   K: ℂ²ⁿ → ℂⁿ,  the restriction of Φ to 𝔇₀ = (I+iB_⊕)𝔈₀,
//!
//! where B_⊕ = diag(B₁, B₂) and 𝔈₀ = ran Ψ. These satisfy the inclusion
//! chains K ⊆ Φ ⊆ Ψ* and Ψ ⊆ Φ* ⊆ K*. Three extensions of H₁+H₂ arise as
//! twisted products: the Friedrichs extension Ψ*(I+iB_⊕)Ψ**, the Kreĭn
//! extension K**(I+iB_⊕)K*, and the form sum Φ**(I+iB_⊕)Φ* whose form is
//! t₁+t₂ on dom t₁ ∩ dom t₂. When 𝔈 = 𝔇 the extremal extensions are exactly
//! T_𝔏*(I+iB_⊕)T_𝔏** for restrictions T_𝔏 of (K*)_s to dom(H₁+H₂) ⊆ 𝔏 ⊆
//! dom K*, and the form sum is extremal precisely when 𝔈 = 𝔉 = ran (Φ*)_s.
//!
//! At finite dimension the sum H₁+H₂ is itself maximal (mul H_j = (dom H_j)^⊥
//! forces graph dimension n), so the three extensions all coincide with it;
//! likewise dom H_j = dom A_j^{1/2} forces 𝔈 = 𝔉. The constructions still
//! follow the general recipes and certify these collapses instead of
//! assuming them.

use crate::error::{ensure_internal, RelabError, Result};
use crate::linalg::{cplx, lstsq, CMatrix};
use crate::oracles::{extremal_oracle, friedrichs_oracle, krein_oracle};
use crate::relation::{
    compose, direct_sum, operator_sum, pair_outputs, relation_extends, relation_gap, Relation,
};
use crate::sectorial::{
    decompose_maximal, form_of, relation_of_form, sectoriality, MaxSectorialDecomposition,
    SesquiForm,
};
use crate::subspace::{embed, join, meet, subspaces_equal, Subspace, Tolerance};

/// The assembled data of a pair of maximal sectorial relations: their
/// decompositions, the auxiliary relations Φ, Ψ, K on the doubled space,
/// the combined twist B_⊕, and the subspaces 𝔈 = ran Ψ, 𝔉 = ran (Φ*)_s,
/// 𝔇 = dom K of ℂ²ⁿ.
#[derive(Debug, Clone)]
pub struct SumAssembly {
    pub h1: Relation,
    pub h2: Relation,
    pub d1: MaxSectorialDecomposition,
    pub d2: MaxSectorialDecomposition,
    pub b_oplus: CMatrix,
    pub phi: Relation,
    pub psi: Relation,
    pub ksum: Relation,
    pub e: Subspace,
    pub f: Subspace,
    pub d: Subspace,
}

/// Extremality bookkeeping for the form sum: whether 𝔈 = 𝔉 (automatic at
/// finite dimension, recorded rather than assumed), whether the standing
/// assumption 𝔈 = 𝔇 holds, whether the form sum is an extremal extension,
/// and whether the predicted equivalence (extremal ⟺ 𝔈 = 𝔉) holds whenever
/// 𝔈 = 𝔇 does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtremalityReport {
    pub e_eq_f: bool,
    pub e_eq_d: bool,
    pub formsum_extremal: bool,
    pub equivalence_holds: bool,
}

/// diag(B₁, B₂) on ℂ²ⁿ.
fn block_diag(b1: &CMatrix, b2: &CMatrix) -> CMatrix {
    let n = b1.nrows();
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(b1);
    out.view_mut((n, n), (n, n)).copy_from(b2);
    out
}

/// I + iB_⊕ as an everywhere-defined operator relation on ℂ²ⁿ.
fn twist_relation(b_oplus: &CMatrix) -> Relation {
    let k = b_oplus.nrows();
    Relation::from_matrix(&(CMatrix::identity(k, k) + b_oplus * cplx(0.0, 1.0)))
}

/// A × B ⊆ ℂⁿ × ℂⁿ as a subspace of ℂ²ⁿ (first block A, second block B).
fn block_product(a: &Subspace, b: &Subspace, tol: &Tolerance) -> Subspace {
    let n = a.ambient_dim();
    join(&embed(a, 0, n), &embed(b, n, 0), tol)
}

/// Applies a single-valued relation to the columns of `vectors`, which must
/// lie in its domain.
fn apply_columns(
    op: &Relation,
    vectors: &CMatrix,
    context: &str,
    tol: &Tolerance,
) -> Result<CMatrix> {
    let basis = op.graph().basis();
    let x = basis.rows(0, op.dim_from()).into_owned();
    let y = basis.rows(op.dim_from(), op.dim_to()).into_owned();
    let mut out = CMatrix::zeros(op.dim_to(), vectors.ncols());
    for j in 0..vectors.ncols() {
        let v = vectors.column(j).into_owned();
        let (c, resid) = lstsq(&x, &v, tol.rank_rel);
        ensure_internal(context, resid, 1e-8)?;
        out.set_column(j, &(&y * c));
    }
    Ok(out)
}

fn ensure_flag(context: &'static str, ok: bool) -> Result<()> {
    ensure_internal(context, if ok { 0.0 } else { 1.0 }, 0.0)
}

/// Builds the auxiliary relations and subspaces for a pair of maximal
/// sectorial relations on the same space, certifying the domain and
/// multivalued-part formulas, the adjoint identity for Φ, the inclusion
/// chains, and the finite-dimensional equality 𝔈 = 𝔉 along the way.
pub fn assemble(h1: &Relation, h2: &Relation, tol: &Tolerance) -> Result<SumAssembly> {
    if h1.dim_from() != h1.dim_to() || h2.dim_from() != h2.dim_to() {
        return Err(RelabError::DimensionMismatch(
            "assemble: both relations must be endorelations".into(),
        ));
    }
    if h1.dim_from() != h2.dim_from() {
        return Err(RelabError::DimensionMismatch(format!(
            "assemble: ambient dimensions differ ({} vs {})",
            h1.dim_from(),
            h2.dim_from()
        )));
    }
    let n = h1.dim_from();
    let d1 = decompose_maximal(h1, tol)?;
    let d2 = decompose_maximal(h2, tol)?;
    let b_oplus = block_diag(&d1.b, &d2.b);

    let sqrt1 = &d1.sqrt_real;
    let sqrt2 = &d2.sqrt_real;
    let op1 = sqrt1.operator_part(tol);
    let op2 = sqrt2.operator_part(tol);

    // Φ({f₁,f₂}) = f₁′ + f₂′: the block direct sum of the square roots
    // followed by the exact addition map (I I): ℂ²ⁿ → ℂⁿ.
    let add = {
        let mut m = CMatrix::zeros(n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&CMatrix::identity(n, n));
        m.view_mut((0, n), (n, n)).copy_from(&CMatrix::identity(n, n));
        Relation::from_matrix(&m)
    };
    let phi = compose(&add, &direct_sum(sqrt1, sqrt2), tol)?;

    let phi_parts = phi.parts(tol);
    let p1 = sqrt1.parts(tol);
    let p2 = sqrt2.parts(tol);
    ensure_flag(
        "assemble: dom Φ must be the product of the square-root domains",
        subspaces_equal(&phi_parts.dom, &block_product(&p1.dom, &p2.dom, tol), tol)?,
    )?;
    ensure_flag(
        "assemble: mul Φ must be the sum of the multivalued parts",
        subspaces_equal(
            &phi_parts.mul,
            &join(&h1.parts(tol).mul, &h2.parts(tol).mul, tol),
            tol,
        )?,
    )?;

    // The adjoint pairs the outputs of the individual square roots.
    let phi_star = phi.adjoint();
    ensure_internal(
        "assemble: Φ* must pair the square-root outputs",
        relation_gap(&phi_star, &pair_outputs(sqrt1, sqrt2, tol)?)?,
        tol.gap_eq,
    )?;
    let star_parts = phi_star.parts(tol);
    ensure_flag(
        "assemble: dom Φ* must be the intersection of the square-root domains",
        subspaces_equal(&star_parts.dom, &meet(&p1.dom, &p2.dom, tol)?, tol)?,
    )?;
    ensure_flag(
        "assemble: mul Φ* must be the product of the multivalued parts",
        subspaces_equal(
            &star_parts.mul,
            &block_product(&h1.parts(tol).mul, &h2.parts(tol).mul, tol),
            tol,
        )?,
    )?;

    // (Φ*)_s sends h to {A_{1s}^{1/2}h, A_{2s}^{1/2}h}; Ψ is its restriction
    // to dom H₁ ∩ dom H₂ and 𝔉, 𝔈 are the respective ranges.
    let phi_star_op = phi_star.operator_part(tol);
    ensure_internal(
        "assemble: (Φ*)_s must pair the square-root operator parts",
        relation_gap(&phi_star_op, &pair_outputs(&op1, &op2, tol)?)?,
        tol.gap_eq,
    )?;
    let dom_cap = meet(&h1.parts(tol).dom, &h2.parts(tol).dom, tol)?;
    let psi = phi_star_op.restrict(&dom_cap, tol)?;
    let psi_parts = psi.parts(tol);
    ensure_flag("assemble: Ψ must be an operator", psi_parts.mul.dim() == 0)?;
    ensure_flag(
        "assemble: dom Ψ must be dom H₁ ∩ dom H₂",
        subspaces_equal(&psi_parts.dom, &dom_cap, tol)?,
    )?;

    let e = psi_parts.ran;
    let f = phi_star_op.parts(tol).ran;
    // dom H_j = dom A_j^{1/2} at finite dimension (both equal (mul H_j)^⊥),
    // hence the defining parameters of 𝔈 and 𝔉 coincide.
    ensure_flag(
        "assemble: ran Ψ must equal ran (Φ*)_s at finite dimension",
        subspaces_equal(&e, &f, tol)?,
    )?;

    // 𝔇 = (I+iB_⊕)𝔈 and K is the restriction of Φ to it.
    let twisted_e = crate::subspace::span_cols(
        &((CMatrix::identity(2 * n, 2 * n) + &b_oplus * cplx(0.0, 1.0)) * e.basis()),
        tol,
    );
    let ksum = phi.restrict(&twisted_e, tol)?;
    let k_parts = ksum.parts(tol);
    ensure_flag(
        "assemble: dom K must be the twisted image of ran Ψ",
        subspaces_equal(&k_parts.dom, &twisted_e, tol)?,
    )?;
    let sum = operator_sum(h1, h2, tol)?;
    ensure_flag(
        "assemble: mul K must be the multivalued part of the sum",
        subspaces_equal(&k_parts.mul, &sum.parts(tol).mul, tol)?,
    )?;
    ensure_flag(
        "assemble: the sum of maximal relations must have full graph dimension",
        sum.graph_dim() == n,
    )?;

    // The inclusion chains K ⊆ Φ ⊆ Ψ* and Ψ ⊆ Φ* ⊆ K*.
    ensure_flag("assemble: K ⊆ Φ", relation_extends(&ksum, &phi, tol)?)?;
    ensure_flag("assemble: Φ ⊆ Ψ*", relation_extends(&phi, &psi.adjoint(), tol)?)?;
    ensure_flag("assemble: Ψ ⊆ Φ*", relation_extends(&psi, &phi_star, tol)?)?;
    ensure_flag(
        "assemble: Φ* ⊆ K*",
        relation_extends(&phi_star, &ksum.adjoint(), tol)?,
    )?;

    Ok(SumAssembly {
        h1: h1.clone(),
        h2: h2.clone(),
        d1,
        d2,
        b_oplus,
        phi,
        psi,
        ksum,
        e,
        f,
        d: twisted_e,
    })
}

/// Shared tail for the three twisted products through the doubled space:
/// composes down ∘ (I+iB_⊕) ∘ up and certifies the result extends H₁+H₂ and
/// is maximal sectorial.
fn extension_product(
    down: &Relation,
    up: &Relation,
    sa: &SumAssembly,
    context: &'static str,
    tol: &Tolerance,
) -> Result<Relation> {
    let inner = compose(&twist_relation(&sa.b_oplus), up, tol)?;
    let result = compose(down, &inner, tol)?;
    let sum = operator_sum(&sa.h1, &sa.h2, tol)?;
    ensure_flag(context, relation_extends(&sum, &result, tol)?)?;
    ensure_flag(context, sectoriality(&result, tol)?.is_maximal)?;
    Ok(result)
}

/// The Friedrichs extension of H₁+H₂ as the product Ψ*(I+iB_⊕)Ψ**, certified
/// against the form-closure oracle; its multivalued part is
/// (dom H₁ ∩ dom H₂)^⊥.
pub fn friedrichs_sum(sa: &SumAssembly, tol: &Tolerance) -> Result<Relation> {
    let result = extension_product(
        &sa.psi.adjoint(),
        &sa.psi.closure(),
        sa,
        "friedrichs_sum: the product must be a maximal sectorial extension",
        tol,
    )?;
    let sum = operator_sum(&sa.h1, &sa.h2, tol)?;
    ensure_internal(
        "friedrichs_sum: the product must match the form-closure oracle",
        relation_gap(&result, &friedrichs_oracle(&sum, tol)?)?,
        tol.gap_eq,
    )?;
    let dom_cap = meet(&sa.h1.parts(tol).dom, &sa.h2.parts(tol).dom, tol)?;
    ensure_flag(
        "friedrichs_sum: mul must be the orthogonal complement of the common domain",
        subspaces_equal(&result.parts(tol).mul, &dom_cap.complement(), tol)?,
    )?;
    Ok(result)
}

/// The Kreĭn extension of H₁+H₂ as the product K**(I+iB_⊕)K*, certified
/// against the inverse-construction oracle. When 𝔈 = 𝔇 the associated closed
/// form ((I+iB_⊕)(K*)_s f, (K*)_s g) on dom K* is attached; otherwise the
/// relation is returned alone, the form description not being available in
/// this generality.
pub fn krein_sum(sa: &SumAssembly, tol: &Tolerance) -> Result<(Relation, Option<SesquiForm>)> {
    let kstar = sa.ksum.adjoint();
    let result = extension_product(
        &sa.ksum.closure(),
        &kstar,
        sa,
        "krein_sum: the product must be a maximal sectorial extension",
        tol,
    )?;
    let sum = operator_sum(&sa.h1, &sa.h2, tol)?;
    ensure_internal(
        "krein_sum: the product must match the inverse-construction oracle",
        relation_gap(&result, &krein_oracle(&sum, tol)?)?,
        tol.gap_eq,
    )?;
    ensure_flag(
        "krein_sum: mul must be inherited from the closure of K",
        subspaces_equal(
            &result.parts(tol).mul,
            &sa.ksum.closure().parts(tol).mul,
            tol,
        )?,
    )?;
    // The extension is an operator exactly when K* is densely defined.
    let kstar_parts = kstar.parts(tol);
    ensure_flag(
        "krein_sum: operator extension must match dense definition of K*",
        (result.parts(tol).mul.dim() == 0) == (kstar_parts.dom.dim() == sa.h1.dim_from()),
    )?;

    if !subspaces_equal(&sa.e, &sa.d, tol)? {
        return Ok((result, None));
    }
    // 𝔈 = 𝔇 makes dom K* invariant under B_⊕, and the form of the extension
    // is carried by the operator part of K*.
    let kstar_op = kstar.operator_part(tol);
    let dom = kstar_op.parts(tol).dom;
    let w = apply_columns(
        &kstar_op,
        &dom.basis().clone_owned(),
        "krein_sum: form domain vector reachable in the graph of (K*)_s",
        tol,
    )?;
    let k = 2 * sa.h1.dim_from();
    let matrix =
        w.adjoint() * (CMatrix::identity(k, k) + &sa.b_oplus * cplx(0.0, 1.0)) * &w;
    let form = SesquiForm::new(dom, matrix)?;
    ensure_internal(
        "krein_sum: the attached form must represent the extension",
        relation_gap(&relation_of_form(&form, tol)?, &result)?,
        tol.gap_eq,
    )?;
    Ok((result, Some(form)))
}

/// The form sum extension Φ**(I+iB_⊕)Φ*, certified against the independent
/// oracle relation_of_form(t₁+t₂) on dom t₁ ∩ dom t₂; its multivalued part is
/// (dom A₁^{1/2} ∩ dom A₂^{1/2})^⊥.
pub fn formsum_extension(sa: &SumAssembly, tol: &Tolerance) -> Result<Relation> {
    let result = extension_product(
        &sa.phi.closure(),
        &sa.phi.adjoint(),
        sa,
        "formsum_extension: the product must be a maximal sectorial extension",
        tol,
    )?;

    // Independent oracle: compress the two forms onto the common domain and
    // take the relation of their sum.
    let t1 = form_of(&sa.h1, tol)?;
    let t2 = form_of(&sa.h2, tol)?;
    let dom = meet(t1.domain(), t2.domain(), tol)?;
    let c1 = t1.domain().basis().adjoint() * dom.basis();
    let c2 = t2.domain().basis().adjoint() * dom.basis();
    let matrix = c1.adjoint() * t1.matrix() * &c1 + c2.adjoint() * t2.matrix() * &c2;
    let oracle = relation_of_form(&SesquiForm::new(dom, matrix)?, tol)?;
    ensure_internal(
        "formsum_extension: the product must match the summed-form oracle",
        relation_gap(&result, &oracle)?,
        tol.gap_eq,
    )?;

    let dom_star = sa.phi.adjoint().parts(tol).dom;
    ensure_flag(
        "formsum_extension: mul must be the complement of dom Φ*",
        subspaces_equal(&result.parts(tol).mul, &dom_star.complement(), tol)?,
    )?;
    Ok(result)
}

/// The extremal extension attached to a subspace 𝔏 with
/// dom(H₁+H₂) ⊆ 𝔏 ⊆ dom K*: the product T_𝔏*(I+iB_⊕)T_𝔏** for the
/// restriction T_𝔏 of (K*)_s to 𝔏. Requires the standing assumption 𝔈 = 𝔇.
pub fn extremal_sum_family(sa: &SumAssembly, l: &Subspace, tol: &Tolerance) -> Result<Relation> {
    if !subspaces_equal(&sa.e, &sa.d, tol)? {
        return Err(RelabError::AssumptionNotMet(format!(
            "extremal_sum_family: ran Ψ and dom K differ (dimensions {} and {}); \
             the family is only parametrized when they agree",
            sa.e.dim(),
            sa.d.dim()
        )));
    }
    let sum = operator_sum(&sa.h1, &sa.h2, tol)?;
    let dom_sum = sum.parts(tol).dom;
    let kstar_op = sa.ksum.adjoint().operator_part(tol);
    let dom_kstar = kstar_op.parts(tol).dom;
    if meet(&dom_sum, l, tol)?.dim() != dom_sum.dim() {
        return Err(RelabError::Precondition(format!(
            "extremal_sum_family: the subspace (dim {}) does not contain dom(H₁+H₂) (dim {})",
            l.dim(),
            dom_sum.dim()
        )));
    }
    if meet(l, &dom_kstar, tol)?.dim() != l.dim() {
        return Err(RelabError::Precondition(format!(
            "extremal_sum_family: the subspace (dim {}) is not contained in dom K* (dim {})",
            l.dim(),
            dom_kstar.dim()
        )));
    }
    let t_l = kstar_op.restrict(l, tol)?;
    let result = extension_product(
        &t_l.adjoint(),
        &t_l.closure(),
        sa,
        "extremal_sum_family: the product must be a maximal sectorial extension",
        tol,
    )?;
    let verdict = extremal_oracle(&result, &sum, tol)?;
    ensure_flag(
        "extremal_sum_family: the product must be an extremal extension",
        verdict.extends && verdict.maximal && verdict.extremal,
    )?;
    Ok(result)
}

/// Evaluates the extremality test for the form sum: 𝔈 = 𝔉 (recorded, and
/// automatic at finite dimension), the standing assumption 𝔈 = 𝔇, the
/// extremality of the form sum itself, and the predicted equivalence
/// (extremal ⟺ 𝔈 = 𝔉) whenever 𝔈 = 𝔇 holds.
pub fn extremality_report(sa: &SumAssembly, tol: &Tolerance) -> Result<ExtremalityReport> {
    let e_eq_f = subspaces_equal(&sa.e, &sa.f, tol)?;
    let e_eq_d = subspaces_equal(&sa.e, &sa.d, tol)?;
    let formsum = formsum_extension(sa, tol)?;
    let sum = operator_sum(&sa.h1, &sa.h2, tol)?;
    let verdict = extremal_oracle(&formsum, &sum, tol)?;
    let formsum_extremal = verdict.extends && verdict.maximal && verdict.extremal;
    let equivalence_holds = !e_eq_d || (formsum_extremal == e_eq_f);
    Ok(ExtremalityReport {
        e_eq_f,
        e_eq_d,
        formsum_extremal,
        equivalence_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_hermitian, re, spectral_norm, CVector};
    use crate::relation::relations_equal;
    use crate::subspace::{gap, span_cols};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn e(n: usize, j: usize) -> CVector {
        let mut v = CVector::zeros(n);
        v[j] = re(1.0);
        v
    }

    fn diag(entries: &[crate::linalg::C64]) -> Relation {
        let n = entries.len();
        let mut m = CMatrix::zeros(n, n);
        for (j, &d) in entries.iter().enumerate() {
            m[(j, j)] = d;
        }
        Relation::from_matrix(&m)
    }

    /// H₁ = diag(1,2), H₂ = diag(1+i,0): the twist of H₂ moves 𝔇 off 𝔈.
    fn skewed_pair() -> (Relation, Relation) {
        (
            diag(&[re(1.0), re(2.0)]),
            diag(&[cplx(1.0, 1.0), re(0.0)]),
        )
    }

    #[test]
    fn skewed_pair_assembles_with_twisted_domain() {
        let (h1, h2) = skewed_pair();
        let sa = assemble(&h1, &h2, &tol()).unwrap();

        let mut expected_b = CMatrix::zeros(4, 4);
        expected_b[(2, 2)] = re(1.0);
        assert!((&sa.b_oplus - expected_b).norm() <= 1e-12);

        // 𝔈 = span{(1,0,1,0), (0,1,0,0)}; 𝔇 twists the first vector.
        let mut e_cols = CMatrix::zeros(4, 2);
        e_cols[(0, 0)] = re(1.0);
        e_cols[(2, 0)] = re(1.0);
        e_cols[(1, 1)] = re(1.0);
        let expected_e = span_cols(&e_cols, &tol());
        let mut d_cols = e_cols.clone();
        d_cols[(2, 0)] = cplx(1.0, 1.0);
        let expected_d = span_cols(&d_cols, &tol());
        assert!(subspaces_equal(&sa.e, &expected_e, &tol()).unwrap());
        assert!(subspaces_equal(&sa.d, &expected_d, &tol()).unwrap());
        assert!(subspaces_equal(&sa.e, &sa.f, &tol()).unwrap());
        assert!(gap(&sa.e, &sa.d).unwrap() > 0.1);
    }

    #[test]
    fn skewed_pair_extensions_all_equal_the_sum() {
        let (h1, h2) = skewed_pair();
        let sa = assemble(&h1, &h2, &tol()).unwrap();
        let expected = diag(&[cplx(2.0, 1.0), re(2.0)]);

        let s_f = friedrichs_sum(&sa, &tol()).unwrap();
        let (s_k, form) = krein_sum(&sa, &tol()).unwrap();
        let fsum = formsum_extension(&sa, &tol()).unwrap();
        assert!(relations_equal(&s_f, &expected, &tol()).unwrap());
        assert!(relations_equal(&s_k, &expected, &tol()).unwrap());
        assert!(relations_equal(&fsum, &expected, &tol()).unwrap());
        // 𝔈 ≠ 𝔇 withholds the Kreĭn form description.
        assert!(form.is_none());
    }

    #[test]
    fn skewed_pair_report_records_the_collapse() {
        let (h1, h2) = skewed_pair();
        let sa = assemble(&h1, &h2, &tol()).unwrap();
        let report = extremality_report(&sa, &tol()).unwrap();
        assert_eq!(
            report,
            ExtremalityReport {
                e_eq_f: true,
                e_eq_d: false,
                formsum_extremal: true,
                equivalence_holds: true,
            }
        );
    }

    #[test]
    fn skewed_pair_rejects_the_extremal_family() {
        let (h1, h2) = skewed_pair();
        let sa = assemble(&h1, &h2, &tol()).unwrap();
        let err = extremal_sum_family(&sa, &Subspace::full(2), &tol()).unwrap_err();
        assert!(matches!(err, RelabError::AssumptionNotMet(_)));
    }

    #[test]
    fn identity_pair_is_fully_diagonal() {
        let h = Relation::from_matrix(&CMatrix::identity(2, 2));
        let sa = assemble(&h, &h, &tol()).unwrap();

        assert_eq!(sa.phi.parts(&tol()).dom.dim(), 4);
        assert_eq!(sa.psi.parts(&tol()).dom.dim(), 2);
        let mut diag_cols = CMatrix::zeros(4, 2);
        diag_cols[(0, 0)] = re(1.0);
        diag_cols[(2, 0)] = re(1.0);
        diag_cols[(1, 1)] = re(1.0);
        diag_cols[(3, 1)] = re(1.0);
        let diagonal = span_cols(&diag_cols, &tol());
        assert!(subspaces_equal(&sa.e, &diagonal, &tol()).unwrap());
        assert!(subspaces_equal(&sa.f, &diagonal, &tol()).unwrap());
        assert!(subspaces_equal(&sa.d, &diagonal, &tol()).unwrap());

        let expected = diag(&[re(2.0), re(2.0)]);
        assert!(relations_equal(&friedrichs_sum(&sa, &tol()).unwrap(), &expected, &tol()).unwrap());
        let (s_k, form) = krein_sum(&sa, &tol()).unwrap();
        assert!(relations_equal(&s_k, &expected, &tol()).unwrap());
        let form = form.expect("𝔈 = 𝔇 must attach the form");
        assert_eq!(form.domain().dim(), 2);
        assert!(
            relations_equal(&relation_of_form(&form, &tol()).unwrap(), &expected, &tol()).unwrap()
        );
        assert!(
            relations_equal(&formsum_extension(&sa, &tol()).unwrap(), &expected, &tol()).unwrap()
        );
    }

    #[test]
    fn identity_pair_extremal_family_is_a_point() {
        let h = Relation::from_matrix(&CMatrix::identity(2, 2));
        let sa = assemble(&h, &h, &tol()).unwrap();
        let expected = diag(&[re(2.0), re(2.0)]);
        let at_full = extremal_sum_family(&sa, &Subspace::full(2), &tol()).unwrap();
        assert!(relations_equal(&at_full, &expected, &tol()).unwrap());

        let line = span_cols(&CMatrix::from_columns(&[e(2, 0)]), &tol());
        let err = extremal_sum_family(&sa, &line, &tol()).unwrap_err();
        assert!(matches!(err, RelabError::Precondition(_)));
    }

    #[test]
    fn real_projection_pair_emits_the_form() {
        let h1 = diag(&[re(1.0), re(0.0)]);
        let h2 = diag(&[re(0.0), re(1.0)]);
        let sa = assemble(&h1, &h2, &tol()).unwrap();
        assert!(subspaces_equal(&sa.e, &sa.d, &tol()).unwrap());
        let (s_k, form) = krein_sum(&sa, &tol()).unwrap();
        let expected = Relation::from_matrix(&CMatrix::identity(2, 2));
        assert!(relations_equal(&s_k, &expected, &tol()).unwrap());
        assert!(form.is_some());
    }

    #[test]
    fn zero_operators_sum_to_zero() {
        let z = Relation::from_matrix(&CMatrix::zeros(2, 2));
        let sa = assemble(&z, &z, &tol()).unwrap();
        assert!(relations_equal(&friedrichs_sum(&sa, &tol()).unwrap(), &z, &tol()).unwrap());
    }

    #[test]
    fn multivalued_summand_shrinks_the_form_domain() {
        let h2 = Relation::make(
            2,
            2,
            &[(e(2, 0), e(2, 0) + e(2, 1).scale(0.7)), (CVector::zeros(2), e(2, 1))],
            &tol(),
        )
        .unwrap();
        let h1 = Relation::from_matrix(&CMatrix::identity(2, 2));
        let sa = assemble(&h1, &h2, &tol()).unwrap();

        let line = span_cols(&CMatrix::from_columns(&[e(2, 0)]), &tol());
        assert!(subspaces_equal(&sa.phi.adjoint().parts(&tol()).dom, &line, &tol()).unwrap());

        // (H₁+H₂)c·e₁ = 2c·e₁ + span e₂.
        let expected = Relation::make(
            2,
            2,
            &[(e(2, 0), e(2, 0).scale(2.0)), (CVector::zeros(2), e(2, 1))],
            &tol(),
        )
        .unwrap();
        assert!(relations_equal(&friedrichs_sum(&sa, &tol()).unwrap(), &expected, &tol()).unwrap());
    }

    #[test]
    fn purely_multivalued_pair_collapses_to_the_zero_domain() {
        // dom H_j = span e_j, so the common domain is trivial and every
        // extension is purely multivalued.
        let h1 = Relation::make(
            2,
            2,
            &[(e(2, 0), e(2, 0)), (CVector::zeros(2), e(2, 1))],
            &tol(),
        )
        .unwrap();
        let h2 = Relation::make(
            2,
            2,
            &[(e(2, 1), e(2, 1)), (CVector::zeros(2), e(2, 0))],
            &tol(),
        )
        .unwrap();
        let sa = assemble(&h1, &h2, &tol()).unwrap();
        let everything = Relation::make(
            2,
            2,
            &[(CVector::zeros(2), e(2, 0)), (CVector::zeros(2), e(2, 1))],
            &tol(),
        )
        .unwrap();
        assert!(relations_equal(&friedrichs_sum(&sa, &tol()).unwrap(), &everything, &tol()).unwrap());
        let (s_k, _) = krein_sum(&sa, &tol()).unwrap();
        assert!(relations_equal(&s_k, &everything, &tol()).unwrap());
    }

    #[test]
    fn formsum_of_zero_forms_is_the_zero_form_relation() {
        let h = Relation::make(
            2,
            2,
            &[(e(2, 0), CVector::zeros(2)), (CVector::zeros(2), e(2, 1))],
            &tol(),
        )
        .unwrap();
        let sa = assemble(&h, &h, &tol()).unwrap();
        let fsum = formsum_extension(&sa, &tol()).unwrap();
        assert!(relations_equal(&fsum, &h, &tol()).unwrap());
    }

    #[test]
    fn assemble_guards_inputs() {
        let h2 = Relation::from_matrix(&CMatrix::identity(3, 3));
        let h1 = Relation::from_matrix(&CMatrix::identity(2, 2));
        assert!(matches!(
            assemble(&h1, &h2, &tol()),
            Err(RelabError::DimensionMismatch(_))
        ));

        let not_maximal = Relation::make(2, 2, &[(e(2, 0), e(2, 0))], &tol()).unwrap();
        assert!(matches!(
            assemble(&not_maximal, &h1, &tol()),
            Err(RelabError::NotMaximalSectorial(_))
        ));
    }

    #[test]
    fn b_oplus_is_hermitian_on_random_blocks() {
        let (h1, h2) = skewed_pair();
        let sa = assemble(&h1, &h2, &tol()).unwrap();
        assert!(is_hermitian(&sa.b_oplus, 1e-12));
        assert!(spectral_norm(&sa.b_oplus) <= 1.0 + 1e-12);
    }
}
