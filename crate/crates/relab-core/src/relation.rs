//! Linear relations as graph subspaces.
//!
//! A relation from ℂʰ to ℂᵏ is a subspace of ℂ^(h+k) whose elements are read
//! as pairs (f, f′) stacked vertically. Operators are the relations with
//! trivial multivalued part; everything here works uniformly for the
//! multivalued case. Source and target dimensions are carried explicitly —
//! they cannot be recovered from the graph when a block is degenerate.

use crate::error::{RelabError, Result};
use crate::linalg::{vstack, CMatrix, CVector};
use crate::subspace::{
    block_direct_sum, gap, meet, span_cols, span_cols_scaled, Subspace, Tolerance,
};

#[derive(Debug, Clone)]
pub struct Relation {
    dim_from: usize,
    dim_to: usize,
    graph: Subspace,
}

/// dom/ran/ker/mul of a relation; dom and ker live in the source space,
/// ran and mul in the target.
#[derive(Debug, Clone)]
pub struct RelationParts {
    pub dom: Subspace,
    pub ran: Subspace,
    pub ker: Subspace,
    pub mul: Subspace,
}

impl Relation {
    pub fn from_graph(dim_from: usize, dim_to: usize, graph: Subspace) -> Result<Self> {
        if graph.ambient_dim() != dim_from + dim_to {
            return Err(RelabError::DimensionMismatch(format!(
                "relation graph lives in ℂ^{}, expected ℂ^{}",
                graph.ambient_dim(),
                dim_from + dim_to
            )));
        }
        Ok(Relation {
            dim_from,
            dim_to,
            graph,
        })
    }

    /// Span of explicit (f, f′) pairs.
    pub fn make(
        dim_from: usize,
        dim_to: usize,
        pairs: &[(CVector, CVector)],
        tol: &Tolerance,
    ) -> Result<Self> {
        for (i, (f, fp)) in pairs.iter().enumerate() {
            if f.len() != dim_from || fp.len() != dim_to {
                return Err(RelabError::DimensionMismatch(format!(
                    "pair {i} has shape ({}, {}), expected ({dim_from}, {dim_to})",
                    f.len(),
                    fp.len()
                )));
            }
        }
        let cols: Vec<CVector> = pairs
            .iter()
            .map(|(f, fp)| {
                let mut v = CVector::zeros(dim_from + dim_to);
                v.rows_mut(0, dim_from).copy_from(f);
                v.rows_mut(dim_from, dim_to).copy_from(fp);
                v
            })
            .collect();
        let graph = if cols.is_empty() {
            Subspace::zero(dim_from + dim_to)
        } else {
            span_cols(&CMatrix::from_columns(&cols), tol)
        };
        Ok(Relation {
            dim_from,
            dim_to,
            graph,
        })
    }

    /// Everywhere-defined operator graph {(f, Mf)}.
    pub fn from_matrix(m: &CMatrix) -> Self {
        let (k, h) = m.shape();
        let stacked = vstack(&CMatrix::identity(h, h), m);
        // [I; M] always has full column rank (σ_min ≥ 1), so the default
        // cutoff cannot misjudge it.
        let graph = span_cols(&stacked, &Tolerance::default());
        assert_eq!(graph.dim(), h, "operator graph lost rank");
        Relation {
            dim_from: h,
            dim_to: k,
            graph,
        }
    }

    pub fn identity(n: usize) -> Self {
        Relation::from_matrix(&CMatrix::identity(n, n))
    }

    pub fn dim_from(&self) -> usize {
        self.dim_from
    }

    pub fn dim_to(&self) -> usize {
        self.dim_to
    }

    pub fn graph(&self) -> &Subspace {
        &self.graph
    }

    pub fn graph_dim(&self) -> usize {
        self.graph.dim()
    }

    fn top_rows(&self) -> CMatrix {
        self.graph.basis().rows(0, self.dim_from).into_owned()
    }

    fn bottom_rows(&self) -> CMatrix {
        self.graph
            .basis()
            .rows(self.dim_from, self.dim_to)
            .into_owned()
    }

    pub fn parts(&self, tol: &Tolerance) -> RelationParts {
        let dom = span_cols_scaled(&self.top_rows(), tol, 1.0);
        let ran = span_cols_scaled(&self.bottom_rows(), tol, 1.0);

        // ker: the graph vectors of the form (f, 0); mul: the (0, f′).
        let h_block = block_direct_sum(&[&Subspace::full(self.dim_from), &Subspace::zero(self.dim_to)]);
        let k_block = block_direct_sum(&[&Subspace::zero(self.dim_from), &Subspace::full(self.dim_to)]);
        let ker_graph = meet(&self.graph, &h_block, tol).expect("same ambient");
        let mul_graph = meet(&self.graph, &k_block, tol).expect("same ambient");
        let ker = span_cols_scaled(&ker_graph.basis().rows(0, self.dim_from).into_owned(), tol, 1.0);
        let mul = span_cols_scaled(
            &mul_graph
                .basis()
                .rows(self.dim_from, self.dim_to)
                .into_owned(),
            tol,
            1.0,
        );
        RelationParts { dom, ran, ker, mul }
    }

    /// Adjoint R\* ⊂ K⊕H: the orthogonal complement of the flipped-negated
    /// graph {(f′, −f)}. The flip preserves orthonormality, so no rank
    /// decision is involved and the adjoint is exact up to one
    /// eigendecomposition.
    pub fn adjoint(&self) -> Relation {
        let x = self.top_rows();
        let y = self.bottom_rows();
        let flipped = vstack(&y, &(-&x));
        let adj_graph = Subspace::from_orthonormal(flipped).complement();
        Relation {
            dim_from: self.dim_to,
            dim_to: self.dim_from,
            graph: adj_graph,
        }
    }

    /// Inverse relation: graph blocks swapped (an exact row permutation).
    pub fn inverse(&self) -> Relation {
        let swapped = vstack(&self.bottom_rows(), &self.top_rows());
        Relation {
            dim_from: self.dim_to,
            dim_to: self.dim_from,
            graph: Subspace::from_orthonormal(swapped),
        }
    }

    /// At finite dimension every relation is closed; closure is the identity.
    /// Provided so that double-adjoint formulas can be written verbatim.
    pub fn closure(&self) -> Relation {
        self.clone()
    }

    /// Single-valued part: graph {(f, P f′)} with P the projector onto
    /// (mul R)^⊥. Same domain, trivial multivalued part.
    pub fn operator_part(&self, tol: &Tolerance) -> Relation {
        let mul = self.parts(tol).mul;
        let p_perp = CMatrix::identity(self.dim_to, self.dim_to) - mul.projector();
        let x = self.top_rows();
        let y = p_perp * self.bottom_rows();
        let graph = span_cols_scaled(&vstack(&x, &y), tol, 1.0);
        Relation {
            dim_from: self.dim_from,
            dim_to: self.dim_to,
            graph,
        }
    }

    /// Domain restriction R ↾ L = {(f, f′) ∈ R : f ∈ L}.
    pub fn restrict(&self, l: &Subspace, tol: &Tolerance) -> Result<Relation> {
        if l.ambient_dim() != self.dim_from {
            return Err(RelabError::DimensionMismatch(format!(
                "restrict: L lives in ℂ^{}, source is ℂ^{}",
                l.ambient_dim(),
                self.dim_from
            )));
        }
        let window = block_direct_sum(&[l, &Subspace::full(self.dim_to)]);
        let graph = meet(&self.graph, &window, tol)?;
        Ok(Relation {
            dim_from: self.dim_from,
            dim_to: self.dim_to,
            graph,
        })
    }
}

/// Writes the rows of `m` into the listed row positions of a taller
/// zero matrix; columns keep their norms and mutual inner products.
fn scatter_rows(m: &CMatrix, positions: &[usize], total_rows: usize) -> CMatrix {
    assert_eq!(m.nrows(), positions.len());
    let mut out = CMatrix::zeros(total_rows, m.ncols());
    for (src, &dst) in positions.iter().enumerate() {
        for j in 0..m.ncols() {
            out[(dst, j)] = m[(src, j)];
        }
    }
    out
}

fn contiguous(start: usize, len: usize) -> Vec<usize> {
    (start..start + len).collect()
}

/// Composition R2∘R1 = {(h, k) : ∃m, (h, m) ∈ R1, (m, k) ∈ R2}, computed by
/// intersecting (graph R1 ⊕ K) with (H ⊕ graph R2) in H⊕M⊕K and projecting
/// out the middle block.
pub fn compose(r2: &Relation, r1: &Relation, tol: &Tolerance) -> Result<Relation> {
    if r1.dim_to != r2.dim_from {
        return Err(RelabError::DimensionMismatch(format!(
            "compose: inner dimensions differ ({} vs {})",
            r1.dim_to, r2.dim_from
        )));
    }
    let (h, m, k) = (r1.dim_from, r1.dim_to, r2.dim_to);
    let left = block_direct_sum(&[&r1.graph, &Subspace::full(k)]);
    let right = block_direct_sum(&[&Subspace::full(h), &r2.graph]);
    let inter = meet(&left, &right, tol)?;
    let basis = inter.basis();
    let outer = vstack(
        &basis.rows(0, h).into_owned(),
        &basis.rows(h + m, k).into_owned(),
    );
    Ok(Relation {
        dim_from: h,
        dim_to: k,
        graph: span_cols_scaled(&outer, tol, 1.0),
    })
}

/// The triple meet behind operator-like sums and output pairing:
/// {(f, a, b) : (f, a) ∈ R1, (f, b) ∈ R2} ⊂ ℂ^(h+k+k).
fn shared_input_meet(r1: &Relation, r2: &Relation, tol: &Tolerance) -> Result<Subspace> {
    let (h, k) = (r1.dim_from, r1.dim_to);
    let total = h + 2 * k;
    // (f, a) ∈ R1 with b free.
    let mut pos1 = contiguous(0, h);
    pos1.extend(contiguous(h, k));
    let a1 = scatter_rows(r1.graph.basis(), &pos1, total);
    let free_b = scatter_rows(&CMatrix::identity(k, k), &contiguous(h + k, k), total);
    let left = Subspace::from_orthonormal(crate::linalg::hstack(&a1, &free_b));
    // (f, b) ∈ R2 with a free.
    let mut pos2 = contiguous(0, h);
    pos2.extend(contiguous(h + k, k));
    let a2 = scatter_rows(r2.graph.basis(), &pos2, total);
    let free_a = scatter_rows(&CMatrix::identity(k, k), &contiguous(h, k), total);
    let right = Subspace::from_orthonormal(crate::linalg::hstack(&a2, &free_a));
    meet(&left, &right, tol)
}

/// Operator-like sum {(h, h₁′ + h₂′) : (h, h₁′) ∈ R1, (h, h₂′) ∈ R2};
/// dom = dom R1 ∩ dom R2 and mul = mul R1 + mul R2.
pub fn operator_sum(r1: &Relation, r2: &Relation, tol: &Tolerance) -> Result<Relation> {
    check_parallel(r1, r2, "operator_sum")?;
    let (h, k) = (r1.dim_from, r1.dim_to);
    let inter = shared_input_meet(r1, r2, tol)?;
    let basis = inter.basis();
    let summed = vstack(
        &basis.rows(0, h).into_owned(),
        &(basis.rows(h, k) + basis.rows(h + k, k)),
    );
    Ok(Relation {
        dim_from: h,
        dim_to: k,
        graph: span_cols_scaled(&summed, tol, 1.0),
    })
}

/// Output pairing {(h, (h₁′, h₂′)) : (h, h₁′) ∈ R1, (h, h₂′) ∈ R2} ⊂ ℂʰ→ℂ²ᵏ.
pub fn pair_outputs(r1: &Relation, r2: &Relation, tol: &Tolerance) -> Result<Relation> {
    check_parallel(r1, r2, "pair_outputs")?;
    let inter = shared_input_meet(r1, r2, tol)?;
    Relation::from_graph(r1.dim_from, 2 * r1.dim_to, inter)
}

/// Block direct sum R1 ⊞ R2 = {((f₁, f₂), (g₁, g₂)) : (f_j, g_j) ∈ R_j},
/// assembled by an exact index map (no rank decisions).
pub fn direct_sum(r1: &Relation, r2: &Relation) -> Relation {
    let (h1, k1) = (r1.dim_from, r1.dim_to);
    let (h2, k2) = (r2.dim_from, r2.dim_to);
    let total = h1 + h2 + k1 + k2;
    let mut pos1 = contiguous(0, h1);
    pos1.extend(contiguous(h1 + h2, k1));
    let mut pos2 = contiguous(h1, h2);
    pos2.extend(contiguous(h1 + h2 + k1, k2));
    let b1 = scatter_rows(r1.graph.basis(), &pos1, total);
    let b2 = scatter_rows(r2.graph.basis(), &pos2, total);
    Relation {
        dim_from: h1 + h2,
        dim_to: k1 + k2,
        graph: Subspace::from_orthonormal(crate::linalg::hstack(&b1, &b2)),
    }
}

/// Gap between the graphs; 1.0 whenever the graph dimensions differ.
pub fn relation_gap(a: &Relation, b: &Relation) -> Result<f64> {
    if a.dim_from != b.dim_from || a.dim_to != b.dim_to {
        return Err(RelabError::DimensionMismatch(format!(
            "relation_gap: shapes ({},{}) vs ({},{})",
            a.dim_from, a.dim_to, b.dim_from, b.dim_to
        )));
    }
    gap(&a.graph, &b.graph)
}

pub fn relations_equal(a: &Relation, b: &Relation, tol: &Tolerance) -> Result<bool> {
    Ok(relation_gap(a, b)? <= tol.gap_eq)
}

/// Graph inclusion A ⊆ B tested on A's orthonormal graph basis.
pub fn relation_extends(smaller: &Relation, larger: &Relation, tol: &Tolerance) -> Result<bool> {
    if smaller.dim_from != larger.dim_from || smaller.dim_to != larger.dim_to {
        return Err(RelabError::DimensionMismatch(
            "relation_extends: shape mismatch".into(),
        ));
    }
    Ok(smaller.graph.is_subspace_of(&larger.graph, tol))
}

fn check_parallel(r1: &Relation, r2: &Relation, op: &str) -> Result<()> {
    if r1.dim_from != r2.dim_from || r1.dim_to != r2.dim_to {
        return Err(RelabError::DimensionMismatch(format!(
            "{op}: shapes ({},{}) vs ({},{})",
            r1.dim_from, r1.dim_to, r2.dim_from, r2.dim_to
        )));
    }
    Ok(())
}
