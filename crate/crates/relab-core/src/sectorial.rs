//! Sectoriality analysis: verdicts, maximality, form ↔ relation conversion,
//! square roots of nonnegative selfadjoint relations, and the decomposition
//! H = (H_r)^{1/2}(I+iB)(H_r)^{1/2} of a maximal sectorial relation.
//!
//! Conventions. The inner product (·,·) is linear in the first argument, so
//! in coordinates (a, b) = bᴴa. A relation is sectorial (vertex 0,
//! semi-angle α) when every graph pair satisfies
//! |Im (h′,h)| ≤ tan α · Re (h′,h). With an orthonormal graph basis [X; Y]
//! and M = XᴴY this becomes: M_r := (M+Mᴴ)/2 ⪰ 0 and, writing
//! M_i := (M−Mᴴ)/(2i), the range of M_i stays inside the range of M_r
//! (|Im| ≤ c·0 forces Im = 0 on ker M_r). The minimal tangent is the largest
//! generalized eigenvalue of (M_i, M_r) on ran M_r.

use crate::error::{ensure_internal, RelabError, Result};
use crate::linalg::{
    cplx, hermitian_eigen, hermitian_norm, hermitian_split, hstack, lstsq, psd_sqrt, re,
    vstack, CMatrix, CVector, NOISE_ABS,
};
use crate::relation::{compose, relation_gap, Relation};
use crate::subspace::{span_cols_scaled, subspaces_equal, Subspace, Tolerance};

/// Slack for deciding that a Hermitian matrix is PSD and that the skew part
/// vanishes on the kernel of the real part, relative to the data scale.
/// Roundoff sits near 1e-15·scale, genuine violations near 1e-1·scale.
const SECTOR_SLACK: f64 = 1e-8;

/// Eigenvalues of the real part at or below this level are kernel directions.
pub(crate) fn curvature_cutoff(lmax: f64, tol: &Tolerance) -> f64 {
    (tol.rank_rel * lmax).max(NOISE_ABS)
}

/// Sectoriality verdict for a relation in ℂⁿ.
#[derive(Debug, Clone, Copy)]
pub struct SectorReport {
    pub is_sectorial: bool,
    /// Minimal tan α with vertex 0; +∞ when the relation is not sectorial.
    pub tan_min: f64,
    /// Sectorial with graph dimension n (no sectorial enlargement exists).
    pub is_maximal: bool,
}

/// A sesquilinear form on a subspace of ℂⁿ: t[h,k] = ⟨M c_h, c_k⟩ = c_kᴴ M c_h,
/// where c_v holds the coordinates of v in the stored domain basis.
#[derive(Debug, Clone)]
pub struct SesquiForm {
    domain: Subspace,
    matrix: CMatrix,
}

/// H = (H_r)^{1/2}(I+iB)(H_r)^{1/2} with H_r the nonnegative selfadjoint
/// relation of the real part of the form of H, and B the unique Hermitian
/// matrix vanishing on ker H_r ⊕ mul H_r with ‖B‖ = tan α.
#[derive(Debug, Clone)]
pub struct MaxSectorialDecomposition {
    pub real_part: Relation,
    pub sqrt_real: Relation,
    pub b: CMatrix,
}

/// Shared numerical-range analysis of a coordinate matrix.
struct SectorNumbers {
    psd_ok: bool,
    range_ok: bool,
    tan_min: f64,
}

fn analyze_matrix(m: &CMatrix, tol: &Tolerance) -> SectorNumbers {
    let d = m.nrows();
    if d == 0 {
        return SectorNumbers {
            psd_ok: true,
            range_ok: true,
            tan_min: 0.0,
        };
    }
    let (m_r, m_i) = hermitian_split(m);
    let (vals, vecs) = hermitian_eigen(&m_r);
    let lmax = vals.iter().cloned().fold(0.0_f64, f64::max).max(0.0);
    let scale = lmax.max(hermitian_norm(&m_i));
    if scale <= NOISE_ABS {
        // The zero form up to roundoff: sectorial with tan 0.
        return SectorNumbers {
            psd_ok: true,
            range_ok: true,
            tan_min: 0.0,
        };
    }
    let slack = (SECTOR_SLACK * scale).max(NOISE_ABS);
    let psd_ok = vals.iter().all(|&l| l >= -slack);
    let cutoff = curvature_cutoff(lmax, tol);
    let pos: Vec<usize> = (0..d).filter(|&i| vals[i] > cutoff).collect();

    // Range condition: M_i must vanish on ker M_r.
    let mut kernel_resid = 0.0_f64;
    for i in 0..d {
        if !pos.contains(&i) {
            kernel_resid = kernel_resid.max((&m_i * vecs.column(i).into_owned()).norm());
        }
    }
    let range_ok = kernel_resid <= slack;

    if !(psd_ok && range_ok) {
        return SectorNumbers {
            psd_ok,
            range_ok,
            tan_min: f64::INFINITY,
        };
    }
    if pos.is_empty() {
        return SectorNumbers {
            psd_ok,
            range_ok,
            tan_min: 0.0,
        };
    }
    // tan_min = ‖Λ₊^{-1/2} V₊ᴴ M_i V₊ Λ₊^{-1/2}‖ on ran M_r.
    let r = pos.len();
    let vp = CMatrix::from_columns(&pos.iter().map(|&i| vecs.column(i).into_owned()).collect::<Vec<_>>());
    let lam_inv_sqrt = CMatrix::from_diagonal(&CVector::from_iterator(
        r,
        pos.iter().map(|&i| re(1.0 / vals[i].sqrt())),
    ));
    let w = &lam_inv_sqrt * vp.adjoint() * &m_i * &vp * &lam_inv_sqrt;
    SectorNumbers {
        psd_ok,
        range_ok,
        tan_min: hermitian_norm(&w),
    }
}

/// Sectoriality verdict for an endorelation.
pub fn sectoriality(r: &Relation, tol: &Tolerance) -> Result<SectorReport> {
    if r.dim_from() != r.dim_to() {
        return Err(RelabError::DimensionMismatch(format!(
            "sectoriality: relation must be an endorelation, got ℂ^{} → ℂ^{}",
            r.dim_from(),
            r.dim_to()
        )));
    }
    let n = r.dim_from();
    let basis = r.graph().basis();
    let x = basis.rows(0, n);
    let y = basis.rows(n, n);
    let m = x.adjoint() * y;
    let nums = analyze_matrix(&m, tol);
    let is_sectorial = nums.psd_ok && nums.range_ok;
    Ok(SectorReport {
        is_sectorial,
        tan_min: if is_sectorial { nums.tan_min } else { f64::INFINITY },
        is_maximal: is_sectorial && r.graph_dim() == n,
    })
}

impl SesquiForm {
    pub fn new(domain: Subspace, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != domain.dim() || matrix.ncols() != domain.dim() {
            return Err(RelabError::DimensionMismatch(format!(
                "form matrix is {}×{}, domain dimension is {}",
                matrix.nrows(),
                matrix.ncols(),
                domain.dim()
            )));
        }
        Ok(SesquiForm { domain, matrix })
    }

    pub fn zero_on(domain: Subspace) -> Self {
        let d = domain.dim();
        SesquiForm {
            domain,
            matrix: CMatrix::zeros(d, d),
        }
    }

    pub fn domain(&self) -> &Subspace {
        &self.domain
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// t evaluated on ambient vectors, which must lie in the domain.
    pub fn value(&self, h: &CVector, k: &CVector, tol: &Tolerance) -> Result<crate::linalg::C64> {
        if !(self.domain.contains_vector(h, tol) && self.domain.contains_vector(k, tol)) {
            return Err(RelabError::Precondition(
                "form arguments must lie in the form domain".into(),
            ));
        }
        let g = self.domain.basis();
        let ch = g.adjoint() * h;
        let ck = g.adjoint() * k;
        Ok((ck.adjoint() * &self.matrix * ch)[(0, 0)])
    }

    /// Real part: the form with matrix (M+Mᴴ)/2 on the same domain.
    pub fn real_part(&self) -> SesquiForm {
        SesquiForm {
            domain: self.domain.clone(),
            matrix: hermitian_split(&self.matrix).0,
        }
    }

    /// Ambient lift G·M·Gᴴ (n×n): kᴴ·L·h = t[h,k] for h, k in the domain.
    pub fn ambient_lift(&self) -> CMatrix {
        let g = self.domain.basis();
        g * &self.matrix * g.adjoint()
    }

    /// Restriction to a subspace of the domain.
    pub fn restrict_to(&self, l: &Subspace, tol: &Tolerance) -> Result<SesquiForm> {
        if !l.is_subspace_of(&self.domain, tol) {
            return Err(RelabError::Precondition(
                "form restriction: L is not contained in the form domain".into(),
            ));
        }
        let w = l.basis();
        let matrix = w.adjoint() * self.ambient_lift() * w;
        Ok(SesquiForm {
            domain: l.clone(),
            matrix,
        })
    }

    /// Form sum t₁ + t₂ on dom t₁ ∩ dom t₂.
    pub fn add(&self, other: &SesquiForm, tol: &Tolerance) -> Result<SesquiForm> {
        let dom = crate::subspace::meet(&self.domain, &other.domain, tol)?;
        let w = dom.basis();
        let matrix = w.adjoint() * (self.ambient_lift() + other.ambient_lift()) * w;
        Ok(SesquiForm {
            domain: dom,
            matrix,
        })
    }

    pub fn is_sectorial(&self, tol: &Tolerance) -> bool {
        let nums = analyze_matrix(&self.matrix, tol);
        nums.psd_ok && nums.range_ok
    }

    pub fn tan_min(&self, tol: &Tolerance) -> f64 {
        analyze_matrix(&self.matrix, tol).tan_min
    }
}

/// Forms are equal when their domains agree (gap) and the matrices agree
/// after the change of basis between the stored bases.
pub fn forms_equal(a: &SesquiForm, b: &SesquiForm, tol: &Tolerance) -> Result<bool> {
    if !subspaces_equal(&a.domain, &b.domain, tol)? {
        return Ok(false);
    }
    if a.domain.dim() == 0 {
        return Ok(true);
    }
    // u maps a-coordinates to b-coordinates; unitary up to gap_eq.
    let u = b.domain.basis().adjoint() * a.domain.basis();
    let transported = &u * &a.matrix * u.adjoint();
    let scale = 1.0 + a.matrix.norm().max(b.matrix.norm());
    Ok((transported - &b.matrix).norm() <= 1e-8 * scale)
}

/// The closable form t[φ, ψ] = (φ′, ψ) of a relation, on dom R. Any choice
/// of φ′ with (φ, φ′) ∈ R gives the same values exactly when mul R ⊥ dom R;
/// this is verified and reported, never assumed.
pub fn form_of(r: &Relation, tol: &Tolerance) -> Result<SesquiForm> {
    if r.dim_from() != r.dim_to() {
        return Err(RelabError::DimensionMismatch(
            "form_of: relation must be an endorelation".into(),
        ));
    }
    let n = r.dim_from();
    let parts = r.parts(tol);
    if parts.mul.dim() > 0 && parts.dom.dim() > 0 {
        let overlap = (parts.dom.basis().adjoint() * parts.mul.basis()).norm();
        if overlap > tol.gap_eq {
            return Err(RelabError::IllDefinedForm(format!(
                "mul is not orthogonal to dom (overlap {overlap:.3e}); \
                 the value (φ′, ψ) depends on the choice of φ′"
            )));
        }
    }
    let basis = r.graph().basis();
    let x = basis.rows(0, n).into_owned();
    let y = basis.rows(n, n).into_owned();
    let g = parts.dom.basis();
    let d = parts.dom.dim();
    let mut images = CMatrix::zeros(n, d);
    for j in 0..d {
        let phi = g.column(j).into_owned();
        let (c, resid) = lstsq(&x, &phi, tol.rank_rel);
        ensure_internal("form_of: domain vector reachable in graph", resid, 1e-8)?;
        images.set_column(j, &(&y * c));
    }
    let matrix = g.adjoint() * images;
    SesquiForm::new(parts.dom, matrix)
}

/// The maximal sectorial relation of a (closed) sectorial form:
/// graph = {(h, G·M·c_h + m) : h ∈ dom t, m ⊥ dom t}, with dom = dom t and
/// mul = (dom t)^⊥. Round trips with `form_of`.
pub fn relation_of_form(t: &SesquiForm, tol: &Tolerance) -> Result<Relation> {
    if !t.is_sectorial(tol) {
        return Err(RelabError::NotSectorial(
            "relation_of_form: the form is not sectorial".into(),
        ));
    }
    let n = t.domain.ambient_dim();
    let g = t.domain.basis();
    let perp = t.domain.complement();
    let operator_cols = vstack(&g.clone_owned(), &(g * &t.matrix));
    let pure_cols = vstack(&CMatrix::zeros(n, perp.dim()), perp.basis());
    let graph = span_cols_scaled(&hstack(&operator_cols, &pure_cols), tol, 1.0);
    ensure_internal(
        "relation_of_form: graph dimension must equal the ambient dimension",
        (graph.dim() as f64 - n as f64).abs(),
        0.0,
    )?;
    Relation::from_graph(n, n, graph)
}

/// Square root of a nonnegative selfadjoint relation: principal square root
/// of the operator part on (mul A)^⊥, with the purely multivalued piece
/// {0} × mul A reattached.
pub fn sqrt_nonneg(a: &Relation, tol: &Tolerance) -> Result<Relation> {
    let report = sectoriality(a, tol)?;
    let selfadjoint = relation_gap(a, &a.adjoint())? <= tol.gap_eq;
    if !(selfadjoint && report.is_sectorial && report.tan_min <= SECTOR_SLACK) {
        return Err(RelabError::NotNonnegSelfadjoint(format!(
            "selfadjoint: {selfadjoint}, sectorial: {}, tan_min: {:.3e}",
            report.is_sectorial, report.tan_min
        )));
    }
    let n = a.dim_from();
    let t = form_of(a, tol)?;
    let g = t.domain().basis();
    let root = psd_sqrt(&hermitian_split(t.matrix()).0);
    let perp = t.domain().complement();
    let operator_cols = vstack(&g.clone_owned(), &(g * &root));
    let pure_cols = vstack(&CMatrix::zeros(n, perp.dim()), perp.basis());
    let graph = span_cols_scaled(&hstack(&operator_cols, &pure_cols), tol, 1.0);
    let result = Relation::from_graph(n, n, graph)?;

    let squared = compose(&result, &result, tol)?;
    ensure_internal(
        "sqrt_nonneg: square must reproduce the relation",
        relation_gap(&squared, a)?,
        tol.gap_eq,
    )?;
    ensure_internal(
        "sqrt_nonneg: root must be selfadjoint",
        relation_gap(&result, &result.adjoint())?,
        tol.gap_eq,
    )?;
    Ok(result)
}

/// Decomposition of a maximal sectorial relation as
/// (H_r)^{1/2}(I+iB)(H_r)^{1/2}. B is the minimal-norm Hermitian solution of
/// M_r^{1/2}·B_D·M_r^{1/2} = M_i in domain coordinates, extended by zero on
/// ker H_r ⊕ mul H_r; the stated identities are re-verified before returning.
pub fn decompose_maximal(h: &Relation, tol: &Tolerance) -> Result<MaxSectorialDecomposition> {
    let report = sectoriality(h, tol)?;
    if !report.is_maximal {
        return Err(RelabError::NotMaximalSectorial(format!(
            "sectorial: {}, graph dimension {} in ℂ^{}",
            report.is_sectorial,
            h.graph_dim(),
            h.dim_from()
        )));
    }
    let n = h.dim_from();
    let t = form_of(h, tol)?;
    let (m_r, m_i) = hermitian_split(t.matrix());
    let g = t.domain().basis();

    let real_part = relation_of_form(&SesquiForm::new(t.domain().clone(), m_r.clone())?, tol)?;
    let sqrt_real = sqrt_nonneg(&real_part, tol)?;

    // B in domain coordinates, supported on ran M_r.
    let d = t.domain().dim();
    let (vals, vecs) = hermitian_eigen(&m_r);
    let lmax = vals.iter().cloned().fold(0.0_f64, f64::max).max(0.0);
    let cutoff = curvature_cutoff(lmax, tol);
    let pos: Vec<usize> = (0..d).filter(|&i| vals[i] > cutoff).collect();
    let b = if pos.is_empty() {
        CMatrix::zeros(n, n)
    } else {
        let vp = CMatrix::from_columns(
            &pos.iter().map(|&i| vecs.column(i).into_owned()).collect::<Vec<_>>(),
        );
        let lam_inv_sqrt = CMatrix::from_diagonal(&CVector::from_iterator(
            pos.len(),
            pos.iter().map(|&i| re(1.0 / vals[i].sqrt())),
        ));
        let w_mid = &lam_inv_sqrt * vp.adjoint() * &m_i * &vp * &lam_inv_sqrt;
        let b_dom = &vp * w_mid * vp.adjoint();
        let ambient = g * b_dom * g.adjoint();
        // Exact Hermitian symmetrization; the construction is Hermitian up
        // to roundoff already.
        (&ambient + ambient.adjoint()).scale(0.5)
    };

    // ‖B‖ = tan α.
    ensure_internal(
        "decomposition: ‖B‖ must equal the minimal tangent",
        (hermitian_norm(&b) - report.tan_min).abs(),
        1e-8 * (1.0 + report.tan_min),
    )?;
    // B vanishes on ker H_r ⊕ mul H_r = (ran (H_r)_s^{1/2})^⊥.
    let ran_root = if pos.is_empty() {
        Subspace::zero(n)
    } else {
        let vp = CMatrix::from_columns(
            &pos.iter().map(|&i| vecs.column(i).into_owned()).collect::<Vec<_>>(),
        );
        Subspace::from_orthonormal(g * vp)
    };
    let p_out = CMatrix::identity(n, n) - ran_root.projector();
    ensure_internal(
        "decomposition: B must vanish on ker H_r ⊕ mul H_r",
        (&b * p_out).norm(),
        1e-10 * (1.0 + hermitian_norm(&b)),
    )?;
    // Recomposition (H_r)^{1/2}(I+iB)(H_r)^{1/2} = H.
    let twist = Relation::from_matrix(&(CMatrix::identity(n, n) + &b * cplx(0.0, 1.0)));
    let recomposed = compose(&sqrt_real, &compose(&twist, &sqrt_real, tol)?, tol)?;
    ensure_internal(
        "decomposition: recomposition must reproduce the relation",
        relation_gap(&recomposed, h)?,
        tol.gap_eq,
    )?;

    Ok(MaxSectorialDecomposition {
        real_part,
        sqrt_real,
        b,
    })
}
