//! Seeded random instances for the property ensembles.
//!
//! All generators are deterministic functions of a ChaCha8 stream. Spectra
//! are drawn from [0.25, 2] ∪ {0}: eigenvalues are either exactly zero or
//! bounded well away from the rank cutoffs, so kernel decisions stay
//! decisive and Λ^{-1/2} factors never amplify roundoff. Twist matrices are
//! likewise bounded away from zero (or exactly zero), keeping strictness
//! classifications unambiguous.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{cplx, psd_sqrt, re, CMatrix, CVector};
use crate::oracles::{friedrichs_oracle, krein_oracle};
use crate::relation::{relation_gap, Relation};
use crate::sectorial::{relation_of_form, SesquiForm};
use crate::subspace::{span_cols_scaled, Subspace, Tolerance};

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex Gaussian matrix with unit-variance entries.
pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        cplx(a, b) * re(std::f64::consts::FRAC_1_SQRT_2)
    })
}

/// Haar-distributed unitary (up to column phases) as the Q factor of a
/// Gaussian matrix. Phases are irrelevant for every consumer here, which
/// only uses column spans and conjugations.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    gaussian(rng, n, n).qr().q()
}

/// Uniformly random subspace of the stated dimension.
pub fn random_subspace(rng: &mut ChaCha8Rng, ambient: usize, dim: usize) -> Subspace {
    assert!(dim <= ambient, "subspace dimension exceeds ambient");
    let u = random_unitary(rng, ambient);
    Subspace::from_orthonormal(u.columns(0, dim).into_owned())
}

/// Random Hermitian matrix with spectral norm drawn from [lo, hi].
pub fn random_hermitian_bounded(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let g = gaussian(rng, n, n);
    let h = (&g + g.adjoint()).scale(0.5);
    let norm = crate::linalg::hermitian_norm(&h);
    if norm == 0.0 {
        return h;
    }
    let target = lo + (hi - lo) * rng.random::<f64>();
    h.scale(target / norm)
}

/// Random PSD matrix with `rank` eigenvalues in [0.25, 2] and exact zeros.
pub fn random_psd_matrix(rng: &mut ChaCha8Rng, d: usize, rank: usize) -> CMatrix {
    assert!(rank <= d);
    if d == 0 {
        return CMatrix::zeros(0, 0);
    }
    let u = random_unitary(rng, d);
    let vals = CVector::from_fn(d, |i, _| {
        if i < rank {
            re(0.25 + 1.75 * rng.random::<f64>())
        } else {
            re(0.0)
        }
    });
    let lam = CMatrix::from_diagonal(&vals);
    &u * lam * u.adjoint()
}

/// Random sectorial form matrix M = M_r + i·M_r^{1/2} W M_r^{1/2}: the skew
/// part lives exactly inside the range of the real part, with tan α = ‖W‖.
pub fn random_sectorial_matrix(rng: &mut ChaCha8Rng, d: usize, rank: usize) -> CMatrix {
    let m_r = random_psd_matrix(rng, d, rank);
    let w = random_hermitian_bounded(rng, d, 0.25, 2.0);
    let root = psd_sqrt(&m_r);
    &m_r + (&root * w * &root) * cplx(0.0, 1.0)
}

/// Random maximal sectorial relation in ℂⁿ: the relation of a random
/// sectorial form on a random domain.
pub fn random_maximal_sectorial(rng: &mut ChaCha8Rng, n: usize) -> Relation {
    let tol = Tolerance::default();
    let d = if n > 0 && rng.random_range(0..10) == 0 {
        0
    } else {
        rng.random_range(1..=n)
    };
    let rank = rng.random_range(0..=d);
    let dom = random_subspace(rng, n, d);
    let matrix = random_sectorial_matrix(rng, d, rank);
    let form = SesquiForm::new(dom, matrix).expect("square by construction");
    relation_of_form(&form, &tol).expect("sectorial by construction")
}

/// Random relation ℂⁿ → ℂᵐ with prescribed domain and multivalued
/// dimensions: a Gaussian map on a random domain plus a pure part.
pub fn random_relation(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    dom_dim: usize,
    mul_dim: usize,
) -> Relation {
    let tol = Tolerance::default();
    let dom = random_subspace(rng, n, dom_dim);
    let map = gaussian(rng, m, dom_dim);
    let mul = random_subspace(rng, m, mul_dim);
    let operator_cols = crate::linalg::vstack(&dom.basis().clone_owned(), &map);
    let pure_cols = crate::linalg::vstack(&CMatrix::zeros(n, mul_dim), mul.basis());
    let graph = span_cols_scaled(&crate::linalg::hstack(&operator_cols, &pure_cols), &tol, 1.0);
    Relation::from_graph(n, m, graph).expect("ambient dimensions match")
}

/// Random left factorization data: T: ℂⁿ → ℂᵐ plus a Hermitian twist on the
/// target space with ‖B‖ ≤ 2, occasionally exactly zero.
pub fn random_factorized_left(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (Relation, CMatrix) {
    let dom_dim = rng.random_range(1..=n);
    let mul_dim = rng.random_range(0..=(m.saturating_sub(dom_dim)).min(m));
    let t = random_relation(rng, n, m, dom_dim, mul_dim);
    let b = if rng.random_range(0..8) == 0 {
        CMatrix::zeros(m, m)
    } else {
        random_hermitian_bounded(rng, m, 0.25, 2.0)
    };
    (t, b)
}

/// Two independent maximal sectorial relations on the same space.
pub fn random_maximal_pair(rng: &mut ChaCha8Rng, n: usize) -> (Relation, Relation) {
    let h1 = random_maximal_sectorial(rng, n);
    let h2 = random_maximal_sectorial(rng, n);
    (h1, h2)
}

/// Non-maximal sectorial relation: a maximal one restricted to a random
/// proper subspace.
pub fn random_general_sectorial(rng: &mut ChaCha8Rng, n: usize) -> Relation {
    let tol = Tolerance::default();
    let h = random_maximal_sectorial(rng, n);
    let l_dim = if n > 1 { rng.random_range(1..n) } else { 1 };
    let l = random_subspace(rng, n, l_dim);
    h.restrict(&l, &tol).expect("ambient dimensions match")
}

/// Nonnegative symmetric relation: a maximal nonnegative selfadjoint one
/// restricted to a random subspace.
pub fn random_nonneg_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Relation {
    let tol = Tolerance::default();
    let d = rng.random_range(1..=n);
    let rank = rng.random_range(0..=d);
    let dom = random_subspace(rng, n, d);
    let form = SesquiForm::new(dom, random_psd_matrix(rng, d, rank)).expect("square");
    let h = relation_of_form(&form, &tol).expect("nonnegative forms are sectorial");
    let l_dim = if n > 1 { rng.random_range(1..n) } else { 1 };
    let l = random_subspace(rng, n, l_dim);
    h.restrict(&l, &tol).expect("ambient dimensions match")
}

/// First seed at or after `start_seed` whose general sectorial instance has
/// strictly different Friedrichs and Kreĭn extensions (gap > 0.1), together
/// with the instance. Strictness makes extension-lattice tests decisive.
pub fn strict_general_sectorial(start_seed: u64, n: usize, tol: &Tolerance) -> Result<(u64, Relation)> {
    for offset in 0..256 {
        let seed = start_seed.wrapping_add(offset);
        let mut rng = rng_for(seed);
        let s = random_general_sectorial(&mut rng, n);
        let sf = friedrichs_oracle(&s, tol)?;
        let sk = krein_oracle(&s, tol)?;
        if relation_gap(&sf, &sk)? > 0.1 {
            return Ok((seed, s));
        }
    }
    Err(crate::error::RelabError::AssumptionNotMet(format!(
        "no strict instance within 256 seeds from {start_seed} at dimension {n}"
    )))
}
