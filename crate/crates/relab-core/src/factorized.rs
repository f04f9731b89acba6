//! Factorized sectorial relations S = T\*(I+iB)T and S′ = T(I+iB)T\*.
//!
//! A closed relation T together with a Hermitian twist B on the middle space
//! determines a maximal sectorial product S whose kernel and multivalued part
//! are read off from T alone: mul S = mul T\*, ker S = ker T. The middle-space
//! construction distills the part of the middle space that actually carries
//! the product: 𝔐₀ = {α ∈ ran T : (I+iB)α ∈ dom T\*}, the compression B_m of
//! B to 𝔐₀, the restriction Q of T to the pairs landing in 𝔐₀, and the
//! return map J with J(I+iB_m)Q = S. Composing adjoints of Q and J around the
//! compressed twist yields the Friedrichs and Kreĭn extensions,
//! S_F = Q\*(I+iB_m)Q\*\* and S_K = J\*\*(I+iB_m)J\*, and every operator K
//! between Q and J\* yields an extremal extension K\*(I+iB_m)K\*\*. At finite
//! dimension T is closed, so S is already maximal and the three coincide;
//! the constructions are still carried out literally and checked against the
//! definitional oracles. The converse direction recovers (T, B) from a
//! relation with mul S = mul S\* (or, dually through the inverse, with
//! ker S = ker S\*). A quotient model of ran S with the inner product
//! ⟨φ′, ψ′⟩_S = ((φ′,ψ)+(φ,ψ′))/2 carries a Hermitian B_S that is unitarily
//! equivalent to B_m through an isometry ι, which cross-checks the middle
//! data against intrinsic data of S itself.

use crate::error::{ensure_internal, RelabError, Result};
use crate::linalg::{
    cplx, hermitian_fn, hermitian_norm, hstack, is_hermitian, lstsq, re, vstack, CMatrix, CVector,
};
use crate::oracles::{containment_defect, extremal_oracle, friedrichs_oracle, krein_oracle};
use crate::relation::{compose, relation_gap, Relation};
use crate::sectorial::{curvature_cutoff, decompose_maximal, sectoriality};
use crate::subspace::{meet, span_cols_scaled, subspaces_equal, Subspace, Tolerance};

/// Which side of T carries the adjoint in the product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// S = T\*(I+iB)T with T from the base space into the middle space.
    Left,
    /// S′ = T(I+iB)T\* with T from the middle space into the base space.
    Right,
}

/// Recovery target of `recover_factorization`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecoveryMode {
    /// Requires mul S = mul S\*; produces a left factorization.
    Friedrichs,
    /// Requires ker S = ker S\*; produces a right factorization through the
    /// inverse.
    Krein,
}

/// A sectorial relation together with the factorization that produced it.
///
/// For `Side::Left` the factor maps the base space ℂⁿ into the middle space
/// ℂᵏ and S = T\*(I+iB)T; for `Side::Right` the factor maps ℂᵏ into ℂⁿ and
/// S = T(I+iB)T\*. B is Hermitian on the middle space in both cases.
#[derive(Debug, Clone)]
pub struct FactorizedSectorial {
    pub t: Relation,
    pub b: CMatrix,
    pub side: Side,
    pub s: Relation,
}

/// Middle-space data of a left factorization.
///
/// `b_m` is the compression of B to `m`, stored as an ambient matrix on the
/// middle space that vanishes on the orthogonal complement of `m`. `q` keeps
/// the ambient shape of T and `j` the reverse shape; their graphs only
/// involve middle vectors inside `m`.
#[derive(Debug, Clone)]
pub struct QJData {
    pub m: Subspace,
    pub b_m: CMatrix,
    pub q: Relation,
    pub j: Relation,
}

/// Quotient model of ran S carrying the inner product
/// ⟨φ′, ψ′⟩_S = ((φ′,ψ)+(φ,ψ′))/2.
///
/// `gram_s` is that inner product on the orthonormal basis `ran_basis` of
/// ran S; its kernel coordinates span the isotropic part `r0` = ran S ∩
/// mul S\*. `quotient_map` sends ran-S coordinates to orthonormal coordinates
/// of the quotient ran S/ℛ₀, `b_s` is the Hermitian matrix representing the
/// twist form on the quotient, and `iota` maps the middle subspace 𝔐
/// isometrically into the quotient with ιᴴB_Sι = B_m.
#[derive(Debug, Clone)]
pub struct AbstractModel {
    pub ran_basis: CMatrix,
    pub gram_s: CMatrix,
    pub r0: Subspace,
    pub quotient_map: CMatrix,
    pub b_s: CMatrix,
    pub iota: CMatrix,
}

fn check_hermitian_twist(b: &CMatrix, middle: usize) -> Result<()> {
    if b.nrows() != middle || b.ncols() != middle {
        return Err(RelabError::DimensionMismatch(format!(
            "twist matrix is {}×{}, middle space is ℂ^{middle}",
            b.nrows(),
            b.ncols()
        )));
    }
    if !is_hermitian(b, 1e-12 * (1.0 + b.norm())) {
        return Err(RelabError::Precondition(
            "twist matrix must be Hermitian".into(),
        ));
    }
    Ok(())
}

/// I ± iB as an everywhere-defined operator relation.
fn twist_relation(b: &CMatrix, sign: f64) -> Relation {
    let k = b.nrows();
    Relation::from_matrix(&(CMatrix::identity(k, k) + b * cplx(0.0, sign)))
}

/// The composition U\*(I+iB·sign)U; both sides of the product reduce to this
/// single path, with U = T for the left side and U = T\* for the right.
fn sandwich(u: &Relation, b: &CMatrix, sign: f64, tol: &Tolerance) -> Result<Relation> {
    compose(&u.adjoint(), &compose(&twist_relation(b, sign), u, tol)?, tol)
}

/// Composes S = T\*(I+iB)T (left) or S = T(I+iB)T\* (right) and certifies the
/// product: S maximal sectorial with tan_min ≤ ‖B‖, the kernel and
/// multivalued part inherited from T, and the adjoint formula obtained by
/// flipping the sign of B.
pub fn factorize_product(t: &Relation, b: &CMatrix, side: Side, tol: &Tolerance) -> Result<FactorizedSectorial> {
    let middle = match side {
        Side::Left => t.dim_to(),
        Side::Right => t.dim_from(),
    };
    check_hermitian_twist(b, middle)?;

    // One audited composition path: the right side is the left side of T*.
    let u = match side {
        Side::Left => t.clone(),
        Side::Right => t.adjoint(),
    };
    let s = sandwich(&u, b, 1.0, tol)?;

    let s_parts = s.parts(tol);
    let u_parts = u.parts(tol);
    let ustar_parts = u.adjoint().parts(tol);
    ensure_internal(
        "factorize_product: mul S must equal the adjoint factor's multivalued part",
        if subspaces_equal(&s_parts.mul, &ustar_parts.mul, tol)? { 0.0 } else { 1.0 },
        0.0,
    )?;
    ensure_internal(
        "factorize_product: ker S must equal the factor's kernel",
        if subspaces_equal(&s_parts.ker, &u_parts.ker, tol)? { 0.0 } else { 1.0 },
        0.0,
    )?;

    let report = sectoriality(&s, tol)?;
    ensure_internal(
        "factorize_product: the product must be maximal sectorial",
        if report.is_maximal { 0.0 } else { 1.0 },
        0.0,
    )?;
    let bnorm = hermitian_norm(b);
    ensure_internal(
        "factorize_product: tan_min must stay below the twist norm",
        (report.tan_min - bnorm).max(0.0),
        1e-8 * (1.0 + bnorm),
    )?;
    let adj_formula = sandwich(&u, b, -1.0, tol)?;
    ensure_internal(
        "factorize_product: the adjoint must flip the twist sign",
        relation_gap(&s.adjoint(), &adj_formula)?,
        tol.gap_eq,
    )?;

    Ok(FactorizedSectorial {
        t: t.clone(),
        b: b.clone(),
        side,
        s,
    })
}

fn require_left(f: &FactorizedSectorial, op: &str) -> Result<()> {
    if f.side != Side::Left {
        return Err(RelabError::UnsupportedSide(format!(
            "{op} expects a left factorization; convert through the inverse"
        )));
    }
    Ok(())
}

/// Middle-space construction for a left factorization.
///
/// 𝔐₀ is computed as the preimage meet ran T ∩ (I+iB)^{-1}(dom T\*); the
/// exact inverse exists because I+iB has real part I. Q restricts T to the
/// pairs whose middle vector lies in 𝔐₀, and J collects the pairs
/// ((I+iB_m)α, φ′) with α ∈ 𝔐₀ and ((I+iB)α, φ′) ∈ T\*. The certified facts:
/// Q is an operator with dense range in 𝔐, Q ⊆ J\*, mul J = mul T\*, and
/// J(I+iB_m)Q reproduces S.
pub fn qj_construction(f: &FactorizedSectorial, tol: &Tolerance) -> Result<QJData> {
    require_left(f, "qj_construction")?;
    let k = f.t.dim_to();
    let t_parts = f.t.parts(tol);
    let tstar = f.t.adjoint();
    let tstar_parts = tstar.parts(tol);

    let c_mat = CMatrix::identity(k, k) + &f.b * cplx(0.0, 1.0);
    let c_inv = c_mat
        .clone()
        .try_inverse()
        .expect("I+iB is invertible for Hermitian B");
    // ‖(I+iB)^{-1}‖ ≤ 1, so the preimage columns keep unit scale.
    let preimage = span_cols_scaled(&(&c_inv * tstar_parts.dom.basis()), tol, 1.0);
    let m0 = meet(&t_parts.ran, &preimage, tol)?;

    let p = m0.projector();
    let compressed = &p * &f.b * &p;
    let b_m = (&compressed + compressed.adjoint()).scale(0.5);

    let q = f.t.inverse().restrict(&m0, tol)?.inverse();

    // J = {((I+iB_m)α, φ′)} through the chain α ↦ Cα ↦ φ′, re-indexed by the
    // invertible compressed twist.
    let chain = compose(&tstar, &twist_relation(&f.b, 1.0), tol)?.restrict(&m0, tol)?;
    let cm_inv = Relation::from_matrix(
        &(CMatrix::identity(k, k) + &b_m * cplx(0.0, 1.0))
            .try_inverse()
            .expect("I+iB_m is invertible for Hermitian B_m"),
    );
    let j = compose(&chain, &cm_inv, tol)?;

    let q_parts = q.parts(tol);
    ensure_internal(
        "qj_construction: Q must be an operator",
        q_parts.mul.dim() as f64,
        0.0,
    )?;
    ensure_internal(
        "qj_construction: Q must have dense range in the middle subspace",
        if subspaces_equal(&q_parts.ran, &m0, tol)? { 0.0 } else { 1.0 },
        0.0,
    )?;
    ensure_internal(
        "qj_construction: Q must be contained in J*",
        containment_defect(&q, &j.adjoint()),
        tol.gap_eq,
    )?;
    ensure_internal(
        "qj_construction: mul J must equal mul T*",
        if subspaces_equal(&j.parts(tol).mul, &tstar_parts.mul, tol)? { 0.0 } else { 1.0 },
        0.0,
    )?;
    let recomposed = compose(&j, &compose(&twist_relation(&b_m, 1.0), &q, tol)?, tol)?;
    ensure_internal(
        "qj_construction: J(I+iB_m)Q must reproduce S",
        relation_gap(&recomposed, &f.s)?,
        tol.gap_eq,
    )?;

    Ok(QJData { m: m0, b_m, q, j })
}

/// Shared tail of the extension builders: composes K\*(I+iB_m)K\*\* for an
/// operator K between Q and J\* and certifies the result against S.
fn extension_through(
    k_rel: &Relation,
    b_m: &CMatrix,
    s: &Relation,
    context: &str,
    tol: &Tolerance,
) -> Result<Relation> {
    let result = compose(
        &k_rel.adjoint(),
        &compose(&twist_relation(b_m, 1.0), &k_rel.closure(), tol)?,
        tol,
    )?;
    ensure_internal(
        context,
        containment_defect(s, &result).max(
            if sectoriality(&result, tol)?.is_maximal { 0.0 } else { 1.0 },
        ),
        tol.gap_eq,
    )?;
    Ok(result)
}

/// Friedrichs extension through the middle construction:
/// S_F = Q\*(I+iB_m)Q\*\*. Certified against the definitional oracle.
pub fn friedrichs_factorized(f: &FactorizedSectorial, tol: &Tolerance) -> Result<Relation> {
    require_left(f, "friedrichs_factorized")?;
    let qj = qj_construction(f, tol)?;
    let s_f = extension_through(
        &qj.q,
        &qj.b_m,
        &f.s,
        "friedrichs_factorized: the composition must be a maximal sectorial extension",
        tol,
    )?;
    ensure_internal(
        "friedrichs_factorized: agreement with the definitional oracle",
        relation_gap(&s_f, &friedrichs_oracle(&f.s, tol)?)?,
        tol.gap_eq,
    )?;
    Ok(s_f)
}

/// Kreĭn extension through the middle construction: S_K = J\*\*(I+iB_m)J\*.
/// Also certifies the operator criterion: S_K is an operator exactly when
/// the factor T is densely defined.
pub fn krein_factorized(f: &FactorizedSectorial, tol: &Tolerance) -> Result<Relation> {
    require_left(f, "krein_factorized")?;
    let qj = qj_construction(f, tol)?;
    let s_k = extension_through(
        &qj.j.adjoint(),
        &qj.b_m,
        &f.s,
        "krein_factorized: the composition must be a maximal sectorial extension",
        tol,
    )?;
    ensure_internal(
        "krein_factorized: agreement with the definitional oracle",
        relation_gap(&s_k, &krein_oracle(&f.s, tol)?)?,
        tol.gap_eq,
    )?;
    let is_operator = s_k.parts(tol).mul.dim() == 0;
    let densely_defined = f.t.parts(tol).dom.dim() == f.t.dim_from();
    ensure_internal(
        "krein_factorized: operator exactly when the factor is densely defined",
        if is_operator == densely_defined { 0.0 } else { 1.0 },
        0.0,
    )?;
    Ok(s_k)
}

/// Extremal extension selected by a subspace L with dom Q ⊆ L ⊆ dom J\*:
/// K = J\* ↾ L and the result is K\*(I+iB_m)K\*\*. The endpoints reproduce the
/// Friedrichs (L = dom Q) and Kreĭn (L = dom J\*) extensions. At finite
/// dimension dom Q = dom J\*, so the interval degenerates to a single
/// admissible choice; the construction is still carried out literally.
pub fn extremal_factorized(f: &FactorizedSectorial, l: &Subspace, tol: &Tolerance) -> Result<Relation> {
    require_left(f, "extremal_factorized")?;
    let qj = qj_construction(f, tol)?;
    let j_star = qj.j.adjoint();
    let dom_q = qj.q.parts(tol).dom;
    let dom_jstar = j_star.parts(tol).dom;
    if !dom_q.is_subspace_of(l, tol) {
        return Err(RelabError::Precondition(format!(
            "extremal_factorized: dom Q ⊆ L fails (dim dom Q = {}, dim L = {})",
            dom_q.dim(),
            l.dim()
        )));
    }
    if !l.is_subspace_of(&dom_jstar, tol) {
        return Err(RelabError::Precondition(format!(
            "extremal_factorized: L ⊆ dom J* fails (dim L = {}, dim dom J* = {})",
            l.dim(),
            dom_jstar.dim()
        )));
    }
    let k_rel = j_star.restrict(l, tol)?;
    let result = extension_through(
        &k_rel,
        &qj.b_m,
        &f.s,
        "extremal_factorized: the composition must be a maximal sectorial extension",
        tol,
    )?;
    let verdict = extremal_oracle(&result, &f.s, tol)?;
    ensure_internal(
        "extremal_factorized: the result must pass the extremality oracle",
        if verdict.extremal { 0.0 } else { verdict.witness_gap.max(1.0) },
        tol.gap_eq,
    )?;
    Ok(result)
}

/// Recovers a factorization from a relation.
///
/// Mode `Friedrichs` requires mul S = mul S\* and returns the left
/// factorization built from the square root of the real part of S_F,
/// restricted to dom S, with B taken from the twist decomposition of S_F.
/// Mode `Krein` requires ker S = ker S\* and dualizes through the inverse:
/// the Friedrichs recovery of S⁻¹ yields (T̃, B̃), and
/// T = T̃⁻¹(I+B̃²)^{-1/2}, B = −B̃ gives S = T(I+iB)T\*.
pub fn recover_factorization(s: &Relation, mode: RecoveryMode, tol: &Tolerance) -> Result<FactorizedSectorial> {
    if s.dim_from() != s.dim_to() {
        return Err(RelabError::DimensionMismatch(
            "recover_factorization: relation must be an endorelation".into(),
        ));
    }
    match mode {
        RecoveryMode::Friedrichs => {
            let mul_s = s.parts(tol).mul;
            let mul_sstar = s.adjoint().parts(tol).mul;
            if !subspaces_equal(&mul_s, &mul_sstar, tol)? {
                return Err(RelabError::NotFactorizable {
                    mode: "friedrichs",
                    violated: format!(
                        "mul S = mul S* fails: dimensions {} and {}",
                        mul_s.dim(),
                        mul_sstar.dim()
                    ),
                });
            }
            let s_f = friedrichs_oracle(s, tol)?;
            let decomp = decompose_maximal(&s_f, tol)?;
            let dom_s = s.parts(tol).dom;
            let t = decomp.sqrt_real.operator_part(tol).restrict(&dom_s, tol)?;
            let f = factorize_product(&t, &decomp.b, Side::Left, tol)?;
            ensure_internal(
                "recover_factorization: the left product must reproduce the relation",
                relation_gap(&f.s, s)?,
                tol.gap_eq,
            )?;
            ensure_internal(
                "recover_factorization: the left product must reproduce the Friedrichs extension",
                relation_gap(&f.s, &s_f)?,
                tol.gap_eq,
            )?;
            Ok(f)
        }
        RecoveryMode::Krein => {
            let ker_s = s.parts(tol).ker;
            let ker_sstar = s.adjoint().parts(tol).ker;
            if !subspaces_equal(&ker_s, &ker_sstar, tol)? {
                return Err(RelabError::NotFactorizable {
                    mode: "krein",
                    violated: format!(
                        "ker S = ker S* fails: dimensions {} and {}",
                        ker_s.dim(),
                        ker_sstar.dim()
                    ),
                });
            }
            let dual = recover_factorization(&s.inverse(), RecoveryMode::Friedrichs, tol)?;
            let damp = hermitian_fn(
                &(CMatrix::identity(dual.b.nrows(), dual.b.ncols()) + &dual.b * &dual.b),
                |l| 1.0 / l.sqrt(),
            );
            let t = compose(&dual.t.inverse(), &Relation::from_matrix(&damp), tol)?;
            let f = factorize_product(&t, &(-&dual.b), Side::Right, tol)?;
            ensure_internal(
                "recover_factorization: the right product must reproduce the relation",
                relation_gap(&f.s, s)?,
                tol.gap_eq,
            )?;
            ensure_internal(
                "recover_factorization: the right product must reproduce the Kreĭn extension",
                relation_gap(&f.s, &krein_oracle(s, tol)?)?,
                tol.gap_eq,
            )?;
            Ok(f)
        }
    }
}

/// A graph pair of S through the factorization: for (φ, φ′) ∈ S the unique
/// middle vector α with (φ, α) ∈ T and ((I+iB)α, φ′) ∈ T\*. The pairing
/// identity (φ′, φ) = ((I+iB)α, α) follows and is the caller's cross-check.
pub fn middle_coordinate(
    f: &FactorizedSectorial,
    phi: &CVector,
    phi_prime: &CVector,
    tol: &Tolerance,
) -> Result<CVector> {
    require_left(f, "middle_coordinate")?;
    let n = f.t.dim_from();
    let k = f.t.dim_to();
    if phi.len() != n || phi_prime.len() != n {
        return Err(RelabError::DimensionMismatch(format!(
            "middle_coordinate: pair has lengths ({}, {}), base space is ℂ^{n}",
            phi.len(),
            phi_prime.len()
        )));
    }
    let (a, rhs, g1) = middle_system(f, Some((phi, phi_prime)));
    let scale = 1.0 + phi.norm().max(phi_prime.norm());
    let (z, resid) = lstsq(&a, &rhs, tol.rank_rel);
    if resid > 1e-8 * scale {
        return Err(RelabError::Precondition(format!(
            "middle_coordinate: the pair is not in the product (residual {resid:.3e})"
        )));
    }
    let yt = f.t.graph().basis().rows(n, k).into_owned();
    Ok(&yt * z.rows(0, g1).into_owned())
}

/// Dimension of the space of middle vectors compatible with the zero pair;
/// 0 certifies that `middle_coordinate` is unique for every pair.
pub fn middle_coordinate_nullity(f: &FactorizedSectorial, tol: &Tolerance) -> Result<usize> {
    require_left(f, "middle_coordinate_nullity")?;
    let n = f.t.dim_from();
    let k = f.t.dim_to();
    let (a, _, g1) = middle_system(f, None);
    let null = nullspace_cols(&a);
    if null.ncols() == 0 {
        return Ok(0);
    }
    let yt = f.t.graph().basis().rows(n, k).into_owned();
    let alphas = &yt * null.rows(0, g1).into_owned();
    Ok(span_cols_scaled(&alphas, tol, 1.0).dim())
}

/// Stacked linear system for the middle vector: unknowns are graph
/// coefficients (c₁, c₂) of T and T\*; rows encode φ = X_t c₁ (only when a
/// pair is prescribed), (I+iB)Y_t c₁ = X_s c₂, and Y_s c₂ = φ′.
fn middle_system(
    f: &FactorizedSectorial,
    pair: Option<(&CVector, &CVector)>,
) -> (CMatrix, CVector, usize) {
    let n = f.t.dim_from();
    let k = f.t.dim_to();
    let t_basis = f.t.graph().basis();
    let xt = t_basis.rows(0, n).into_owned();
    let yt = t_basis.rows(n, k).into_owned();
    let tstar = f.t.adjoint();
    let s_basis = tstar.graph().basis();
    let xs = s_basis.rows(0, k).into_owned();
    let ys = s_basis.rows(k, n).into_owned();
    let g1 = xt.ncols();
    let g2 = xs.ncols();
    let c = CMatrix::identity(k, k) + &f.b * cplx(0.0, 1.0);

    let link = hstack(&(&c * &yt), &(-&xs));
    let out = hstack(&CMatrix::zeros(n, g1), &ys);
    match pair {
        Some((phi, phi_prime)) => {
            let top = hstack(&xt, &CMatrix::zeros(n, g2));
            let a = vstack(&vstack(&top, &link), &out);
            let mut rhs = CVector::zeros(2 * n + k);
            rhs.rows_mut(0, n).copy_from(phi);
            rhs.rows_mut(n + k, n).copy_from(phi_prime);
            (a, rhs, g1)
        }
        None => {
            let a = vstack(&link, &out);
            (a, CVector::zeros(n + k), g1)
        }
    }
}

/// Orthonormal kernel basis of a rectangular matrix through the
/// eigendecomposition of its Gram matrix.
fn nullspace_cols(a: &CMatrix) -> CMatrix {
    let cols = a.ncols();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    let gram = a.adjoint() * a;
    let (vals, vecs) = crate::linalg::hermitian_eigen(&gram);
    let lmax = vals.iter().cloned().fold(0.0_f64, f64::max).max(0.0);
    let keep: Vec<usize> = (0..cols)
        .filter(|&i| vals[i] <= 1e-12 * lmax.max(1.0))
        .collect();
    if keep.is_empty() {
        return CMatrix::zeros(cols, 0);
    }
    CMatrix::from_columns(&keep.iter().map(|&i| vecs.column(i).into_owned()).collect::<Vec<_>>())
}

/// Quotient model of ran S for a left factorization.
///
/// The inner product matrix is assembled on an orthonormal basis of ran S by
/// solving for partners φ of each basis vector φ′; its kernel is the
/// isotropic part ℛ₀ = ran S ∩ mul S\*. The twist form
/// ((φ, ψ′) − (φ′, ψ))·i/2 descends to the quotient as a Hermitian matrix
/// B_S, and the correspondence α ↦ [φ′] embeds 𝔐 isometrically with
/// ιᴴB_Sι = B_m; both certificates are re-verified here.
pub fn abstract_model(f: &FactorizedSectorial, tol: &Tolerance) -> Result<AbstractModel> {
    require_left(f, "abstract_model")?;
    let n = f.t.dim_from();
    let s_parts = f.s.parts(tol);
    let ran_basis = s_parts.ran.basis().clone_owned();
    let r = ran_basis.ncols();

    // Partners: φ_j with (φ_j, φ′_j) ∈ S for each ran-basis column φ′_j. The
    // partner is unique modulo ker S, which is S-orthogonal to ran S, so the
    // Gram matrix below does not depend on the choice.
    let graph = f.s.graph().basis();
    let x = graph.rows(0, n).into_owned();
    let y = graph.rows(n, n).into_owned();
    let mut partners = CMatrix::zeros(n, r);
    for jj in 0..r {
        let target = ran_basis.column(jj).into_owned();
        let (c, resid) = lstsq(&y, &target, tol.rank_rel);
        ensure_internal("abstract_model: ran-basis vector attained in the graph", resid, 1e-8)?;
        partners.set_column(jj, &(&x * c));
    }

    let fh_r = partners.adjoint() * &ran_basis;
    let rh_f = ran_basis.adjoint() * &partners;
    let gram_s = (&fh_r + &rh_f).scale(0.5);
    let gram_s = (&gram_s + gram_s.adjoint()).scale(0.5);
    let twist_form = (&rh_f - &fh_r) * cplx(0.0, 0.5);
    let twist_form = (&twist_form + twist_form.adjoint()).scale(0.5);

    let r0 = meet(&s_parts.ran, &f.s.adjoint().parts(tol).mul, tol)?;
    if r0.dim() > 0 && r > 0 {
        let coords = ran_basis.adjoint() * r0.basis();
        ensure_internal(
            "abstract_model: isotropic vectors must lie in the Gram kernel",
            (&gram_s * &coords).norm(),
            1e-9 * (1.0 + gram_s.norm()),
        )?;
    }

    // Quotient coordinates z = Λ₊^{1/2}V₊ᴴc make ⟨·,·⟩_S the standard inner
    // product; the twist form must vanish on the kernel coordinates to
    // descend.
    let (vals, vecs) = crate::linalg::hermitian_eigen(&gram_s);
    let lmax = vals.iter().cloned().fold(0.0_f64, f64::max).max(0.0);
    let cut = curvature_cutoff(lmax, tol);
    let pos: Vec<usize> = (0..r).filter(|&i| vals[i] > cut).collect();
    let qdim = pos.len();
    ensure_internal(
        "abstract_model: quotient dimension must complement the isotropic part",
        (qdim + r0.dim()) as f64 - r as f64,
        0.0,
    )?;
    for i in 0..r {
        if !pos.contains(&i) {
            ensure_internal(
                "abstract_model: the twist form must vanish on the Gram kernel",
                (&twist_form * vecs.column(i).into_owned()).norm(),
                1e-8 * (1.0 + twist_form.norm()),
            )?;
        }
    }
    let vp = if qdim == 0 {
        CMatrix::zeros(r, 0)
    } else {
        CMatrix::from_columns(&pos.iter().map(|&i| vecs.column(i).into_owned()).collect::<Vec<_>>())
    };
    let lam_sqrt = CMatrix::from_diagonal(&CVector::from_iterator(
        qdim,
        pos.iter().map(|&i| re(vals[i].sqrt())),
    ));
    let lam_inv_sqrt = CMatrix::from_diagonal(&CVector::from_iterator(
        qdim,
        pos.iter().map(|&i| re(1.0 / vals[i].sqrt())),
    ));
    let quotient_map = &lam_sqrt * vp.adjoint();
    let b_s = &lam_inv_sqrt * vp.adjoint() * &twist_form * &vp * &lam_inv_sqrt;
    let b_s = (&b_s + b_s.adjoint()).scale(0.5);

    // ι sends each orthonormal basis vector α of 𝔐 to the class of its
    // return vector φ′, expressed in quotient coordinates.
    let qj = qj_construction(f, tol)?;
    let mdim = qj.m.dim();
    let k = f.t.dim_to();
    let c_mat = CMatrix::identity(k, k) + &f.b * cplx(0.0, 1.0);
    let tstar = f.t.adjoint();
    let s_basis = tstar.graph().basis();
    let xs = s_basis.rows(0, k).into_owned();
    let ys = s_basis.rows(k, n).into_owned();
    let mut iota = CMatrix::zeros(qdim, mdim);
    for jj in 0..mdim {
        let alpha = qj.m.basis().column(jj).into_owned();
        let lifted = &c_mat * alpha;
        let (c, resid) = lstsq(&xs, &lifted, tol.rank_rel);
        ensure_internal(
            "abstract_model: twisted middle vectors must lie in the adjoint's domain",
            resid,
            1e-8,
        )?;
        let phi_prime = &ys * c;
        let coords = ran_basis.adjoint() * &phi_prime;
        ensure_internal(
            "abstract_model: return vectors must lie in ran S",
            (&ran_basis * &coords - &phi_prime).norm(),
            1e-8 * (1.0 + phi_prime.norm()),
        )?;
        iota.set_column(jj, &(&quotient_map * coords));
    }

    if mdim > 0 {
        ensure_internal(
            "abstract_model: the middle embedding must be isometric",
            (iota.adjoint() * &iota - CMatrix::identity(mdim, mdim)).norm(),
            1e-10,
        )?;
    }
    let gm = qj.m.basis();
    let b_m_coords = gm.adjoint() * &qj.b_m * gm;
    ensure_internal(
        "abstract_model: the quotient twist must compress to B_m",
        (iota.adjoint() * &b_s * &iota - b_m_coords).norm(),
        1e-9 * (1.0 + hermitian_norm(&qj.b_m)),
    )?;

    Ok(AbstractModel {
        ran_basis,
        gram_s,
        r0,
        quotient_map,
        b_s,
        iota,
    })
}
