//! Conical-metric specifics: the exact cone-angle identity and the explicit
//! interpolation family joining the cusp potential (theta -> 0) to the smooth
//! one (theta -> 1).
//!
//! The family evaluates, per cusp edge i with angle theta in (0, 1),
//!
//! ```text
//! m_i = (1/(2 theta)) l log l
//!     + (beta_i - 1/(2 theta)) l log(l + M)
//!     + alpha_i log(l + M)
//!     + (beta_i - 1/2) l log(1 - theta)
//!     + alpha_i log(1 - theta)
//!     + (1 - theta)/2,          M = theta / (1 - theta),
//! ```
//!
//! with alpha_i = -Lambda_i/2 and beta_i = det(nu_{i+1}, nu_{i-1})/2, and
//!
//! ```text
//! u_theta = (1/2) sum_{i not in I} l_i log l_i + sum_{i in I} m_i
//!         + prod(1 - theta_i) h + prod theta_i h_AS,
//! ```
//!
//! where h and h_AS are the bounded parts of the cusp and smooth potentials.
//! At theta = 1 the edge contributes (1/2) l log l and at theta = 0 exactly
//! (alpha + beta l) log l, so the family's endpoints are u_AS and u pointwise.
//! Between the endpoints the interpolant is a potential but not a scalar-flat
//! one, which the curvature probe makes visible.

use crate::constants::PolytopeConstants;
use crate::geometry::GeometryError;
use crate::polytope::MomentPolytope;
use crate::rational::{f64_of, rat_of_f64, Rat};
use crate::vec2::Vec2;
use std::collections::BTreeMap;

/// Singular-term coefficients of one cusp edge in the section-4 convention:
/// u = (1/2) sum_{not I} l log l + sum_I (alpha + beta l) log l + h.
#[derive(Clone, Copy, Debug)]
pub struct EdgeTerm {
    pub edge: usize,
    pub alpha: f64,
    pub beta: f64,
}

pub fn edge_terms(polytope: &MomentPolytope, constants: &PolytopeConstants) -> Vec<EdgeTerm> {
    polytope
        .cusp_edges()
        .iter()
        .map(|&k| EdgeTerm {
            edge: k,
            alpha: -0.5 * f64_of(&constants.gap(k)),
            beta: 0.5 * polytope.normal(k + 1).det(polytope.normal(k - 1)) as f64,
        })
        .collect()
}

/// Model part of the cusp potential: (1/2) sum_{j not in I} l log l
/// + sum_{i in I} (alpha_i + beta_i l_i) log l_i.
pub fn cusp_model(polytope: &MomentPolytope, terms: &[EdgeTerm], x: Vec2) -> f64 {
    let mut acc = 0.0;
    for j in 0..polytope.d() {
        let l = polytope.ell(j, x);
        if let Some(t) = terms.iter().find(|t| t.edge == j) {
            acc += (t.alpha + t.beta * l) * l.ln();
        } else {
            acc += 0.5 * l * l.ln();
        }
    }
    acc
}

/// Guillemin model: (1/2) sum over all edges of l log l.
pub fn smooth_model(polytope: &MomentPolytope, x: Vec2) -> f64 {
    (0..polytope.d())
        .map(|j| {
            let l = polytope.ell(j, x);
            0.5 * l * l.ln()
        })
        .sum()
}

#[derive(Debug, thiserror::Error)]
pub enum InterpolationError {
    #[error("cone angle {theta} for edge {edge} outside [0, 1]")]
    AngleOutOfRange { edge: usize, theta: f64 },
    #[error("edge {edge} has an angle but is not a cusp edge of the family")]
    NotACuspEdge { edge: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// The interpolation family over a fixed polytope. The bounded parts h and
/// h_AS are supplied as callbacks (potential minus model); they are consulted
/// only when their product weight is nonzero.
pub struct InterpolationFamily<'f, 'p> {
    polytope: &'p MomentPolytope,
    terms: Vec<EdgeTerm>,
    h: &'f dyn Fn(Vec2) -> Result<f64, GeometryError>,
    h_as: &'f dyn Fn(Vec2) -> Result<f64, GeometryError>,
}

impl<'f, 'p> InterpolationFamily<'f, 'p> {
    pub fn new(
        polytope: &'p MomentPolytope,
        terms: Vec<EdgeTerm>,
        h: &'f dyn Fn(Vec2) -> Result<f64, GeometryError>,
        h_as: &'f dyn Fn(Vec2) -> Result<f64, GeometryError>,
    ) -> Self {
        InterpolationFamily {
            polytope,
            terms,
            h,
            h_as,
        }
    }

    pub fn terms(&self) -> &[EdgeTerm] {
        &self.terms
    }

    /// u_theta(x). `angles` assigns each cusp edge its theta in [0, 1];
    /// missing entries default to 1 (smooth end).
    pub fn value(
        &self,
        angles: &BTreeMap<usize, f64>,
        x: Vec2,
    ) -> Result<f64, InterpolationError> {
        for (&edge, &theta) in angles {
            if !(0.0..=1.0).contains(&theta) {
                return Err(InterpolationError::AngleOutOfRange { edge, theta });
            }
            if !self.terms.iter().any(|t| t.edge == edge) {
                return Err(InterpolationError::NotACuspEdge { edge });
            }
        }

        let mut acc = 0.0;
        let mut weight_h = 1.0;
        let mut weight_as = 1.0;
        for j in 0..self.polytope.d() {
            let l = self.polytope.ell(j, x);
            let Some(t) = self.terms.iter().find(|t| t.edge == j) else {
                acc += 0.5 * l * l.ln();
                continue;
            };
            let theta = angles.get(&j).copied().unwrap_or(1.0);
            weight_h *= 1.0 - theta;
            weight_as *= theta;
            acc += edge_block(t, theta, l);
        }
        if weight_h != 0.0 {
            acc += weight_h * (self.h)(x)?;
        }
        if weight_as != 0.0 {
            acc += weight_as * (self.h_as)(x)?;
        }
        Ok(acc)
    }

    /// max |u_theta - reference| over the mesh, with every cusp edge set to
    /// the same theta. The reference is the smooth potential for
    /// `toward_smooth`, the cusp potential otherwise.
    pub fn endpoint_gap(
        &self,
        theta: f64,
        toward_smooth: bool,
        mesh: &[Vec2],
    ) -> Result<f64, InterpolationError> {
        let angles: BTreeMap<usize, f64> =
            self.terms.iter().map(|t| (t.edge, theta)).collect();
        let mut gap = 0.0f64;
        for &x in mesh {
            let u_theta = self.value(&angles, x)?;
            let reference = if toward_smooth {
                smooth_model(self.polytope, x) + (self.h_as)(x)?
            } else {
                cusp_model(self.polytope, &self.terms, x) + (self.h)(x)?
            };
            gap = gap.max((u_theta - reference).abs());
        }
        Ok(gap)
    }
}

/// Per-edge model-plus-v contribution at angle theta.
fn edge_block(t: &EdgeTerm, theta: f64, l: f64) -> f64 {
    if theta == 1.0 {
        return 0.5 * l * l.ln();
    }
    if theta == 0.0 {
        return (t.alpha + t.beta * l) * l.ln();
    }
    let m = theta / (1.0 - theta);
    let log1t = (1.0 - theta).ln();
    0.5 / theta * l * l.ln()
        + (t.beta - 0.5 / theta) * l * (l + m).ln()
        + t.alpha * (l + m).ln()
        + (t.beta - 0.5) * l * log1t
        + t.alpha * log1t
        + 0.5 * (1.0 - theta)
}

/// Scalar curvature of an arbitrary potential by nested central differences:
/// the Hessian of `potential` on a 3x3 stencil of step h (each entry from a
/// 3x3 sub-stencil, i.e. potential values on the 5x5 lattice), inverted
/// pointwise to U, then s = -(d11 U11 + 2 d12 U12 + d22 U22).
pub fn fd_scalar_curvature<F, E>(potential: F, x: Vec2, h: f64) -> Result<f64, E>
where
    F: Fn(Vec2) -> Result<f64, E>,
{
    let mut u = [[0.0f64; 5]; 5];
    for (i, row) in u.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let xx = x + Vec2::new((i as f64 - 2.0) * h, (j as f64 - 2.0) * h);
            *v = potential(xx)?;
        }
    }
    let h2 = h * h;
    // Inverse Hessian entries on the inner 3x3.
    let mut u11 = [[0.0f64; 3]; 3];
    let mut u12 = [[0.0f64; 3]; 3];
    let mut u22 = [[0.0f64; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let i = a + 1;
            let j = b + 1;
            let hxx = (u[i + 1][j] - 2.0 * u[i][j] + u[i - 1][j]) / h2;
            let hyy = (u[i][j + 1] - 2.0 * u[i][j] + u[i][j - 1]) / h2;
            let hxy =
                (u[i + 1][j + 1] - u[i + 1][j - 1] - u[i - 1][j + 1] + u[i - 1][j - 1])
                    / (4.0 * h2);
            let det = hxx * hyy - hxy * hxy;
            u11[a][b] = hyy / det;
            u12[a][b] = -hxy / det;
            u22[a][b] = hxx / det;
        }
    }
    let d11 = (u11[2][1] - 2.0 * u11[1][1] + u11[0][1]) / h2;
    let d22 = (u22[1][2] - 2.0 * u22[1][1] + u22[1][0]) / h2;
    let d12 = (u12[2][2] - u12[2][0] - u12[0][2] + u12[0][0]) / (4.0 * h2);
    Ok(-(d11 + 2.0 * d12 + d22))
}

/// Exact cone-angle identity: for every conical edge j,
/// 2 pi (a_j - a_{j-1}) |nu_j|^2 / theta_j equals the edge length L_j, as
/// rationals. Returns the per-edge identity values (L_j / (2 pi)) on success.
pub fn cone_angle_identity(
    polytope: &MomentPolytope,
    constants: &PolytopeConstants,
) -> Result<BTreeMap<usize, Rat>, String> {
    let a = constants.a_cone();
    let mut out = BTreeMap::new();
    for (&j, &theta) in polytope.cone_angles() {
        let theta_rat = rat_of_f64(theta).ok_or("cone angle not finite")?;
        let gap = &a[j] - &a[j - 1];
        let n2 = Rat::from_integer(polytope.normal(j).norm_sq().into());
        let lhs = gap * n2 / theta_rat;
        let rhs = constants
            .edge_lengths_2pi()
            .get(&j)
            .ok_or_else(|| format!("edge {} has no finite length", j + 1))?;
        if &lhs != rhs {
            return Err(format!(
                "edge {}: cone-angle identity fails: {} vs {}",
                j + 1,
                f64_of(&lhs),
                f64_of(rhs),
            ));
        }
        out.insert(j, lhs);
    }
    Ok(out)
}
