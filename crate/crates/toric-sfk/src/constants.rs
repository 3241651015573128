//! Chart offsets of the harmonic ansatz, solved exactly over Q.
//!
//! The base offsets a'_1..a'_{d-1} solve the triangular system
//!
//!   sum_{i=1}^{j} a'_i * det(nu_{i+1} - nu_i, nu_{j+1}) = lambda_{j+1},
//!   j = 1..d-1,
//!
//! whose diagonal entries det(nu_{j+1} - nu_j, nu_{j+1}) = -det(nu_j, nu_{j+1})
//! equal 1 for a unimodular corner chain, so forward substitution is exact.
//! They are strictly increasing across interior edges (each gap is an edge
//! length over 2*pi*|nu|^2).
//!
//! The cusp chart collapses each cusp gap: a_j = a'_j - sum of the gaps of cusp
//! edges with index <= j, making a_{k-1} = a_k exactly at each cusp edge k. The
//! conical chart shrinks gaps of cone edges by their angle: the gap at a cone
//! edge j becomes theta_j * (a'_j - a'_{j-1}).
//!
//! Arrays here are 0-based: offsets[j] corresponds to the chart shift of the
//! (j+1)-th vertex, i.e. H_j = H + offsets[j - 1] in 1-based edge terms.

use crate::polytope::MomentPolytope;
use crate::rational::{f64_of, rat_of_f64, Rat};
use num::traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConstantsError {
    #[error("corner chain is not in canonical orientation at edges {edge}/{next} (det = {det}); normalize first")]
    ChainNotCanonical { edge: usize, next: usize, det: i64 },
    #[error("edge {edge} has nonpositive length: a' gap = {gap}")]
    DegenerateEdge { edge: usize, gap: String },
}

/// Exact offset families and derived edge data for one polytope.
#[derive(Clone, Debug)]
pub struct PolytopeConstants {
    a_prime: Vec<Rat>,
    a_cusp: Vec<Rat>,
    a_cone: Vec<Rat>,
    cusp_gaps: BTreeMap<usize, Rat>,
    /// L_i/(2*pi) = |nu_i|^2 * (a'_i - a'_{i-1}) per finite edge (0-based).
    edge_lengths_2pi: BTreeMap<usize, Rat>,
}

/// Chart family selector: which offset array and edge coefficients to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// No cusp or cone adjustments (boundary is Guillemin everywhere).
    Smooth,
    /// Poincare-type ends along the marked cusp edges.
    Cusp,
    /// Cone angles along the marked cone edges.
    Conical,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Smooth => write!(f, "smooth"),
            Variant::Cusp => write!(f, "cusp"),
            Variant::Conical => write!(f, "conical"),
        }
    }
}

impl PolytopeConstants {
    /// Solves the offset system for the polytope. Requires the canonical
    /// orientation (corner determinants -1).
    pub fn derive(p: &MomentPolytope) -> Result<Self, ConstantsError> {
        let d = p.d();
        for i in 0..d - 1 {
            let det = p.normal(i).det(p.normal(i + 1));
            if det != -1 {
                return Err(ConstantsError::ChainNotCanonical {
                    edge: i + 1,
                    next: i + 2,
                    det,
                });
            }
        }

        // Forward substitution; all arithmetic exact.
        let mut a_prime: Vec<Rat> = Vec::with_capacity(d - 1);
        for j in 0..d - 1 {
            let mut acc = p.lambda_rat(j + 1);
            for (i, ai) in a_prime.iter().enumerate() {
                let dnu = p.normal(i + 1) - p.normal(i);
                let coef = dnu.det(p.normal(j + 1));
                if coef != 0 {
                    acc -= ai * Rat::from_integer(coef.into());
                }
            }
            // Diagonal coefficient det(nu_{j+1} - nu_j, nu_{j+1}) = 1.
            a_prime.push(acc);
        }

        let mut edge_lengths_2pi = BTreeMap::new();
        for i in 1..d - 1 {
            let gap = &a_prime[i] - &a_prime[i - 1];
            if gap <= Rat::zero() {
                return Err(ConstantsError::DegenerateEdge {
                    edge: i + 1,
                    gap: crate::rational::rat_display(&gap),
                });
            }
            let nsq = Rat::from_integer(p.normal(i).norm_sq().into());
            edge_lengths_2pi.insert(i, gap * nsq);
        }

        let mut cusp_gaps = BTreeMap::new();
        for &k in p.cusp_edges() {
            let gap = &a_prime[k] - &a_prime[k - 1];
            cusp_gaps.insert(k, gap);
        }

        let mut a_cusp = Vec::with_capacity(d - 1);
        let mut drop_acc = Rat::zero();
        for (j, aj) in a_prime.iter().enumerate() {
            if let Some(gap) = cusp_gaps.get(&j) {
                drop_acc += gap;
            }
            a_cusp.push(aj - &drop_acc);
        }

        let mut a_cone = Vec::with_capacity(d - 1);
        let mut cone_acc = Rat::zero();
        for (j, aj) in a_prime.iter().enumerate() {
            if let Some(&theta) = p.cone_angles().get(&j) {
                let th = rat_of_f64(theta).expect("validated theta is finite");
                let gap = &a_prime[j] - &a_prime[j - 1];
                cone_acc += (Rat::from_integer(1.into()) - th) * gap;
            }
            a_cone.push(aj - &cone_acc);
        }

        Ok(PolytopeConstants {
            a_prime,
            a_cusp,
            a_cone,
            cusp_gaps,
            edge_lengths_2pi,
        })
    }

    pub fn a_prime(&self) -> &[Rat] {
        &self.a_prime
    }

    pub fn a_cusp(&self) -> &[Rat] {
        &self.a_cusp
    }

    pub fn a_cone(&self) -> &[Rat] {
        &self.a_cone
    }

    pub fn offsets_for(&self, variant: Variant) -> &[Rat] {
        match variant {
            Variant::Smooth => &self.a_prime,
            Variant::Cusp => &self.a_cusp,
            Variant::Conical => &self.a_cone,
        }
    }

    /// Cusp gaps Lambda_k > 0, keyed by 0-based cusp edge index.
    pub fn cusp_gaps(&self) -> &BTreeMap<usize, Rat> {
        &self.cusp_gaps
    }

    pub fn cusp_gap(&self, k: usize) -> Option<&Rat> {
        self.cusp_gaps.get(&k)
    }

    /// L_i/(2*pi) per finite edge, 0-based.
    pub fn edge_lengths_2pi(&self) -> &BTreeMap<usize, Rat> {
        &self.edge_lengths_2pi
    }

    /// Gap a'_j - a'_{j-1} for an interior edge j (0-based, 1 <= j <= d-2).
    pub fn gap(&self, j: usize) -> Rat {
        &self.a_prime[j] - &self.a_prime[j - 1]
    }

    /// Translates every offset family by -c (chart coordinate H shifts by +c).
    /// Exact; used by the recentering option.
    pub fn recentered(&self, c: &Rat) -> PolytopeConstants {
        let shift = |v: &[Rat]| v.iter().map(|a| a - c).collect::<Vec<_>>();
        PolytopeConstants {
            a_prime: shift(&self.a_prime),
            a_cusp: shift(&self.a_cusp),
            a_cone: shift(&self.a_cone),
            cusp_gaps: self.cusp_gaps.clone(),
            edge_lengths_2pi: self.edge_lengths_2pi.clone(),
        }
    }

    pub fn offsets_f64(&self, variant: Variant) -> Vec<f64> {
        self.offsets_for(variant).iter().map(f64_of).collect()
    }
}

/// The half-width of the offset window, used to scale meshes and grids.
pub fn offset_span(offsets: &[f64]) -> f64 {
    let lo = offsets.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = offsets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ((hi - lo) / 2.0).max(1.0)
}

/// Reach of the offsets: max |a|, floored at 1 so flat C^2 still has scale 1.
pub fn offset_scale(offsets: &[f64]) -> f64 {
    offsets
        .iter()
        .fold(1.0f64, |acc, a| acc.max(a.abs()))
}
