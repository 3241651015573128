//! The axisymmetric harmonic ansatz and its derived maps.
//!
//! Metrics come from a pair xi = (xi_1, xi_2) of axisymmetric harmonic
//! functions on the half plane {(H, r) : r > 0}:
//!
//! ```text
//! xi = c_1 log r
//!    + 1/2 * sum_{j=1}^{d-1} (c_{j+1} - c_j) log(H_j + rho_j)
//!    - 1/2 * sum_{k cusp} Lambda_k c_k / rho_{k-1}
//!    + nut * (H + a_1),
//! ```
//!
//! where H_j = H + a_j, rho_j = sqrt(H_j^2 + r^2), the c_j are the edge
//! coefficient vectors (lattice normals; scaled by 1/theta on cone edges), the
//! a_j are the chart offsets of the selected variant, and Lambda_k > 0 are the
//! cusp gaps. Each summand is harmonic for the operator
//! f_HH + f_rr + f_r / r.
//!
//! The moment map (x_1, x_2) is the primitive of the closed 1-forms
//! eps_1 = r(dxi_2/dr dH - dxi_2/dH dr), eps_2 = -r(dxi_1/dr dH - dxi_1/dH dr),
//! with integration constants pinned so that the r -> 0 boundary traces land
//! exactly on the polytope edges (this requires lambda_1 = 0, i.e. a normalized
//! polytope). The nut term is anchored at the first offset and the pinning
//! constant is stored explicitly, so translating the chart (H by c, offsets by
//! -c) leaves xi, Dxi, and x pointwise unchanged.

use crate::constants::{offset_scale, PolytopeConstants, Variant};
use crate::polytope::MomentPolytope;
use crate::rational::f64_of;
use crate::vec2::{Mat2, Vec2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnsatzError {
    #[error("polytope is not normalized (lambda_1 = {lambda1}); exact boundary pinning needs lambda_1 = 0")]
    NotNormalized { lambda1: f64 },
    #[error("recenter index {index} out of range 1..={max}")]
    RecenterOutOfRange { index: usize, max: usize },
    #[error("chart point (H, r) = ({h}, {r}) outside the open half plane r > 0")]
    OutOfDomain { h: f64, r: f64 },
}

/// One cusp contribution to the ansatz.
#[derive(Clone, Copy, Debug)]
pub struct CuspTerm {
    /// 0-based index of the cusp edge.
    pub edge: usize,
    /// Index into the offset/rho arrays where the pole sits (edge - 1; the two
    /// offsets around a cusp edge coincide).
    pub pole: usize,
    /// Gap Lambda > 0.
    pub gap: f64,
}

/// Evaluation-ready data for one variant of the construction on one polytope.
#[derive(Clone, Debug)]
pub struct AnsatzData {
    coeffs: Vec<Vec2>,
    offsets: Vec<f64>,
    cusps: Vec<CuspTerm>,
    nut: Vec2,
    /// Moment-map pinning constant (coefficients times the canonical first
    /// offset); kept separate from `offsets` so chart translation does not move
    /// the momentum image.
    x_pin: Vec2,
    variant: Variant,
}

/// Chart point with cached shifted coordinates and radii.
#[derive(Clone, Debug)]
pub struct ChartPoint {
    pub h: f64,
    pub r: f64,
    pub hi: Vec<f64>,
    pub rho: Vec<f64>,
}

impl ChartPoint {
    /// h_m / rho_m with sentinels -1 below and +1 above the offset range.
    fn slope(&self, m: isize) -> f64 {
        if m < 0 {
            -1.0
        } else if m as usize >= self.hi.len() {
            1.0
        } else {
            self.hi[m as usize] / self.rho[m as usize]
        }
    }
}

/// Jacobian of xi: columns d(xi)/dH and d(xi)/dr, each a coefficient pair.
#[derive(Clone, Copy, Debug)]
pub struct XiJacobian {
    pub dh: Vec2,
    pub dr: Vec2,
}

impl XiJacobian {
    /// det Dxi = dxi1/dH * dxi2/dr - dxi1/dr * dxi2/dH.
    pub fn det(&self) -> f64 {
        self.dh.det(self.dr)
    }
}

/// log(h + rho) evaluated without cancellation for h < 0
/// (h + rho = r^2 / (rho - h)).
fn log_h_plus_rho(h: f64, rho: f64, r: f64) -> f64 {
    if h >= 0.0 {
        (h + rho).ln()
    } else {
        2.0 * r.ln() - (rho - h).ln()
    }
}

/// d/dr log(h + rho) = (rho - h) / (rho r), computed stably on both signs.
fn dlog_h_plus_rho_dr(h: f64, rho: f64, r: f64) -> f64 {
    if h >= 0.0 {
        r / (rho * (rho + h))
    } else {
        (rho - h) / (rho * r)
    }
}

/// h - rho without cancellation for h > 0 (h - rho = -r^2 / (h + rho)).
fn h_minus_rho(h: f64, rho: f64, r: f64) -> f64 {
    if h >= 0.0 {
        -(r * r) / (h + rho)
    } else {
        h - rho
    }
}

/// 1 - h/rho without cancellation for h > 0.
fn one_minus_slope(h: f64, rho: f64, r: f64) -> f64 {
    if h >= 0.0 {
        (r * r) / (rho * (rho + h))
    } else {
        1.0 - h / rho
    }
}

impl AnsatzData {
    /// Assembles evaluation data for `variant` from exact constants.
    /// `recenter` translates the chart so the selected offset (0-based index
    /// into the offset array) becomes 0; the translation is exact in Q and does
    /// not move the momentum image.
    pub fn build(
        polytope: &MomentPolytope,
        constants: &PolytopeConstants,
        variant: Variant,
        nut: Vec2,
        recenter: Option<usize>,
    ) -> Result<Self, AnsatzError> {
        let lambda1 = polytope.edge(0).lambda;
        if lambda1 != 0.0 {
            return Err(AnsatzError::NotNormalized { lambda1 });
        }
        let d = polytope.d();

        let mut coeffs: Vec<Vec2> = (0..d).map(|i| polytope.normal_v(i)).collect();
        if variant == Variant::Conical {
            for (&j, &theta) in polytope.cone_angles() {
                coeffs[j] = coeffs[j] * (1.0 / theta);
            }
        }

        // Pinning constant from the canonical (unshifted) offsets.
        let canonical = constants.offsets_for(variant);
        let x_pin = coeffs[0] * f64_of(&canonical[0]);

        let shifted_store;
        let offsets_rat = match recenter {
            None => canonical,
            Some(k) => {
                if k >= canonical.len() {
                    return Err(AnsatzError::RecenterOutOfRange {
                        index: k + 1,
                        max: canonical.len(),
                    });
                }
                let c = canonical[k].clone();
                shifted_store = constants.recentered(&c);
                shifted_store.offsets_for(variant)
            }
        };
        let offsets: Vec<f64> = offsets_rat.iter().map(f64_of).collect();

        let cusps = if variant == Variant::Cusp {
            polytope
                .cusp_edges()
                .iter()
                .map(|&k| CuspTerm {
                    edge: k,
                    pole: k - 1,
                    gap: f64_of(constants.cusp_gap(k).expect("cusp edge has a gap")),
                })
                .collect()
        } else {
            Vec::new()
        };

        Ok(AnsatzData {
            coeffs,
            offsets,
            cusps,
            nut,
            x_pin,
            variant,
        })
    }

    pub fn d(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Vec2] {
        &self.coeffs
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn cusps(&self) -> &[CuspTerm] {
        &self.cusps
    }

    pub fn nut(&self) -> Vec2 {
        self.nut
    }

    /// Moment-map pinning constant (see the struct field).
    pub fn x_pin(&self) -> Vec2 {
        self.x_pin
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// max |offset|, floored at 1; the natural chart length scale.
    pub fn scale(&self) -> f64 {
        offset_scale(&self.offsets)
    }

    /// Chart translated by c: H values shift by +c, offsets by -c. Evaluations
    /// at corresponding points agree pointwise.
    pub fn translated(&self, c: f64) -> AnsatzData {
        let mut out = self.clone();
        for a in &mut out.offsets {
            *a -= c;
        }
        out
    }

    pub fn chart_point(&self, h: f64, r: f64) -> Result<ChartPoint, AnsatzError> {
        if !(r > 0.0) || !h.is_finite() || !r.is_finite() {
            return Err(AnsatzError::OutOfDomain { h, r });
        }
        let hi: Vec<f64> = self.offsets.iter().map(|a| h + a).collect();
        let rho: Vec<f64> = hi.iter().map(|&x| x.hypot(r)).collect();
        Ok(ChartPoint { h, r, hi, rho })
    }

    /// The harmonic pair at a chart point.
    pub fn xi(&self, p: &ChartPoint) -> Vec2 {
        let mut acc = self.coeffs[0] * p.r.ln();
        for j in 0..self.offsets.len() {
            let dc = self.coeffs[j + 1] - self.coeffs[j];
            acc += dc * (0.5 * log_h_plus_rho(p.hi[j], p.rho[j], p.r));
        }
        for cusp in &self.cusps {
            acc += self.coeffs[cusp.edge] * (-0.5 * cusp.gap / p.rho[cusp.pole]);
        }
        acc += self.nut * (p.h + self.offsets[0]);
        acc
    }

    /// Analytic Jacobian of xi.
    pub fn dxi(&self, p: &ChartPoint) -> XiJacobian {
        let mut dh = self.nut;
        let mut dr = self.coeffs[0] * (1.0 / p.r);
        for j in 0..self.offsets.len() {
            let dc = self.coeffs[j + 1] - self.coeffs[j];
            dh += dc * (0.5 / p.rho[j]);
            dr += dc * (0.5 * dlog_h_plus_rho_dr(p.hi[j], p.rho[j], p.r));
        }
        for cusp in &self.cusps {
            let c = self.coeffs[cusp.edge];
            let rho = p.rho[cusp.pole];
            let rho3 = rho * rho * rho;
            dh += c * (0.5 * cusp.gap * p.hi[cusp.pole] / rho3);
            dr += c * (0.5 * cusp.gap * p.r / rho3);
        }
        XiJacobian { dh, dr }
    }

    /// Moment map, pinned so boundary traces are exact.
    pub fn moment(&self, p: &ChartPoint) -> Vec2 {
        let mut s = self.coeffs[0] * p.hi[0];
        for j in 0..self.offsets.len() {
            let dc = self.coeffs[j + 1] - self.coeffs[j];
            s += dc * (0.5 * h_minus_rho(p.hi[j], p.rho[j], p.r));
        }
        for cusp in &self.cusps {
            let w = one_minus_slope(p.hi[cusp.pole], p.rho[cusp.pole], p.r);
            s += self.coeffs[cusp.edge] * (-0.5 * cusp.gap * w);
        }
        s -= self.x_pin;
        s.perp() - self.nut.perp() * (0.5 * p.r * p.r)
    }

    /// Jacobian of the moment map in chart coordinates,
    /// rows (dx_1/dH, dx_1/dr; dx_2/dH, dx_2/dr). det Dx = r^2 det Dxi.
    pub fn dx(&self, p: &ChartPoint) -> Mat2 {
        let j = self.dxi(p);
        Mat2::new(
            p.r * j.dr.y,
            -p.r * j.dh.y,
            -p.r * j.dr.x,
            p.r * j.dh.x,
        )
    }

    /// Splits det Dxi into the cusp/nut-free core plus the signed interaction
    /// components. The components sum to det Dxi exactly in algebra; each is
    /// nonnegative for admissible data, which `positivity_scan` asserts.
    pub fn det_breakdown(&self, p: &ChartPoint) -> DetBreakdown {
        let n = self.offsets.len();

        // Cusp/nut-free Jacobian.
        let mut dh_s = Vec2::ZERO;
        let mut dr_s = self.coeffs[0] * (1.0 / p.r);
        for j in 0..n {
            let dc = self.coeffs[j + 1] - self.coeffs[j];
            dh_s += dc * (0.5 / p.rho[j]);
            dr_s += dc * (0.5 * dlog_h_plus_rho_dr(p.hi[j], p.rho[j], p.r));
        }
        let core = dh_s.det(dr_s);

        let inv_2r = 0.5 / p.r;
        let mut nut_edge = Vec::new();
        if self.nut != Vec2::ZERO {
            nut_edge.reserve(self.d());
            for e in 0..self.d() {
                let m = e as isize;
                let db = p.slope(m) - p.slope(m - 1);
                nut_edge.push(self.nut.det(self.coeffs[e]) * db * inv_2r);
            }
        }

        let mut nut_cusp = Vec::with_capacity(self.cusps.len());
        let mut edge_cusp = Vec::new();
        let mut cusp_pair = Vec::new();
        for (ci, cusp) in self.cusps.iter().enumerate() {
            let rho_p = p.rho[cusp.pole];
            let h_p = p.hi[cusp.pole];
            let rho3 = rho_p * rho_p * rho_p;
            if self.nut != Vec2::ZERO {
                nut_cusp.push(0.5 * cusp.gap * self.nut.det(self.coeffs[cusp.edge]) * p.r / rho3);
            }

            // Per-edge interaction: bracket S(e) - S(e-1) with
            // S(m) = (r^2 + h_pole * h_m)/rho_m, S(-1) = -h_pole, S(top) = +h_pole.
            let s_val = |m: isize| -> f64 {
                if m < 0 {
                    -h_p
                } else if m as usize >= n {
                    h_p
                } else {
                    (p.r * p.r + h_p * p.hi[m as usize]) / p.rho[m as usize]
                }
            };
            let f = cusp.gap / (4.0 * p.r * rho3);
            for e in 0..self.d() {
                let det_ce = self.coeffs[cusp.edge].det(self.coeffs[e]);
                if det_ce == 0.0 {
                    continue;
                }
                let m = e as isize;
                edge_cusp.push(f * det_ce * (s_val(m) - s_val(m - 1)));
            }

            for other in &self.cusps[ci + 1..] {
                let rho_q = p.rho[other.pole];
                let det_kk = self.coeffs[cusp.edge].det(self.coeffs[other.edge]);
                let term = 0.25 * cusp.gap * other.gap * det_kk * (p.hi[cusp.pole] - p.hi[other.pole])
                    * p.r
                    / (rho3 * rho_q * rho_q * rho_q);
                cusp_pair.push(term);
            }
        }

        DetBreakdown {
            core,
            nut_edge,
            nut_cusp,
            edge_cusp,
            cusp_pair,
        }
    }
}

/// Signed decomposition of det Dxi. `core` is the cusp/nut-free determinant;
/// the remaining groups are the interaction components.
#[derive(Clone, Debug, Default)]
pub struct DetBreakdown {
    pub core: f64,
    pub nut_edge: Vec<f64>,
    pub nut_cusp: Vec<f64>,
    pub edge_cusp: Vec<f64>,
    pub cusp_pair: Vec<f64>,
}

impl DetBreakdown {
    pub fn components(&self) -> impl Iterator<Item = f64> + '_ {
        self.nut_edge
            .iter()
            .chain(&self.nut_cusp)
            .chain(&self.edge_cusp)
            .chain(&self.cusp_pair)
            .copied()
    }

    pub fn total(&self) -> f64 {
        self.core + self.components().sum::<f64>()
    }

    /// Scale for relative comparisons: sum of magnitudes of all parts.
    pub fn magnitude(&self) -> f64 {
        self.core.abs() + self.components().map(f64::abs).sum::<f64>()
    }

    pub fn min_component(&self) -> f64 {
        self.components().fold(f64::INFINITY, f64::min)
    }
}

/// Rectangular evaluation grid: log-spaced radii, sinh-graded H clustering
/// around the offset window.
#[derive(Clone, Debug)]
pub struct GridSpec {
    pub hs: Vec<f64>,
    pub rs: Vec<f64>,
}

impl GridSpec {
    /// n x n grid adapted to the data: r spans [1e-3, 1e2] * scale
    /// log-spaced; H spans the offset window widened by the largest radius,
    /// graded toward the window center.
    pub fn log_graded(data: &AnsatzData, n: usize) -> GridSpec {
        assert!(n >= 2);
        let scale = data.scale();
        let r_lo = 1e-3 * scale;
        let r_hi = 1e2 * scale;
        let rs: Vec<f64> = (0..n)
            .map(|j| r_lo * (r_hi / r_lo).powf(j as f64 / (n - 1) as f64))
            .collect();

        let a_lo = data.offsets().iter().cloned().fold(f64::INFINITY, f64::min);
        let a_hi = data
            .offsets()
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let center = -0.5 * (a_lo + a_hi);
        let half_width = 0.5 * (a_hi - a_lo) + r_hi;
        let kappa = 4.0f64;
        let hs: Vec<f64> = (0..n)
            .map(|i| {
                let t = 2.0 * (i as f64 / (n - 1) as f64) - 1.0;
                center + half_width * (kappa * t).sinh() / kappa.sinh()
            })
            .collect();
        GridSpec { hs, rs }
    }

    pub fn node_count(&self) -> usize {
        self.hs.len() * self.rs.len()
    }
}

/// Outcome of a positivity scan over a grid.
#[derive(Clone, Debug, serde::Serialize)]
pub struct PositivityReport {
    pub nodes: usize,
    pub min_det: f64,
    pub min_det_at: (f64, f64),
    pub min_core: f64,
    /// Most negative decomposition component relative to the local magnitude.
    pub worst_component_rel: f64,
    /// Largest |sum of parts - det| relative to the local magnitude.
    pub max_identity_err: f64,
    pub pass: bool,
}

/// Evaluates det Dxi and its decomposition at every grid node; requires a
/// positive determinant, a positive core, componentwise nonnegativity (up to
/// `rel_tol` relative to local magnitude), and the exact-sum identity (up to
/// `rel_tol`).
pub fn positivity_scan(data: &AnsatzData, grid: &GridSpec, rel_tol: f64) -> PositivityReport {
    use rayon::prelude::*;

    struct RowAcc {
        min_det: f64,
        min_det_at: (f64, f64),
        min_core: f64,
        worst_component_rel: f64,
        max_identity_err: f64,
    }

    let rows: Vec<RowAcc> = grid
        .hs
        .par_iter()
        .map(|&h| {
            let mut acc = RowAcc {
                min_det: f64::INFINITY,
                min_det_at: (f64::NAN, f64::NAN),
                min_core: f64::INFINITY,
                worst_component_rel: f64::INFINITY,
                max_identity_err: 0.0,
            };
            for &r in &grid.rs {
                let p = data.chart_point(h, r).expect("grid points have r > 0");
                let det = data.dxi(&p).det();
                if det < acc.min_det {
                    acc.min_det = det;
                    acc.min_det_at = (h, r);
                }
                let bd = data.det_breakdown(&p);
                let mag = bd.magnitude().max(f64::MIN_POSITIVE);
                acc.min_core = acc.min_core.min(bd.core);
                let worst = bd.min_component();
                if worst.is_finite() {
                    acc.worst_component_rel = acc.worst_component_rel.min(worst / mag);
                }
                acc.max_identity_err = acc.max_identity_err.max((bd.total() - det).abs() / mag);
            }
            acc
        })
        .collect();

    let mut out = PositivityReport {
        nodes: grid.node_count(),
        min_det: f64::INFINITY,
        min_det_at: (f64::NAN, f64::NAN),
        min_core: f64::INFINITY,
        worst_component_rel: f64::INFINITY,
        max_identity_err: 0.0,
        pass: false,
    };
    for row in rows {
        if row.min_det < out.min_det {
            out.min_det = row.min_det;
            out.min_det_at = row.min_det_at;
        }
        out.min_core = out.min_core.min(row.min_core);
        out.worst_component_rel = out.worst_component_rel.min(row.worst_component_rel);
        out.max_identity_err = out.max_identity_err.max(row.max_identity_err);
    }
    if out.worst_component_rel == f64::INFINITY {
        // No interaction components anywhere (smooth variant, nut = 0).
        out.worst_component_rel = 0.0;
    }
    out.pass = out.min_det > 0.0
        && out.min_core > 0.0
        && out.worst_component_rel >= -rel_tol
        && out.max_identity_err <= rel_tol;
    out
}

/// Finite-difference residual of the axisymmetric Laplacian
/// f_HH + f_rr + f_r/r applied to both xi components.
pub fn laplacian_residual(data: &AnsatzData, h: f64, r: f64, step: f64) -> Vec2 {
    let step = step.min(0.5 * r);
    let at = |hh: f64, rr: f64| -> Vec2 {
        data.xi(&data.chart_point(hh, rr).expect("interior stencil"))
    };
    let c = at(h, r);
    let hp = at(h + step, r);
    let hm = at(h - step, r);
    let rp = at(h, r + step);
    let rm = at(h, r - step);
    let dhh = (hp - c * 2.0 + hm) * (1.0 / (step * step));
    let drr = (rp - c * 2.0 + rm) * (1.0 / (step * step));
    let dr = (rp - rm) * (1.0 / (2.0 * step));
    dhh + drr + dr * (1.0 / r)
}

/// Finite-difference cross-check of the analytic Jacobians: max abs deviation
/// of central differences of xi from dxi, and of the moment map from dx.
#[derive(Clone, Copy, Debug)]
pub struct ClosureResidual {
    pub dxi_err: f64,
    pub dx_err: f64,
}

pub fn closure_residual(data: &AnsatzData, h: f64, r: f64, step: f64) -> ClosureResidual {
    let step = step.min(0.5 * r);
    let chart = |hh: f64, rr: f64| data.chart_point(hh, rr).expect("interior stencil");

    let p = chart(h, r);
    let jac = data.dxi(&p);
    let dh_fd = (data.xi(&chart(h + step, r)) - data.xi(&chart(h - step, r))) * (1.0 / (2.0 * step));
    let dr_fd = (data.xi(&chart(h, r + step)) - data.xi(&chart(h, r - step))) * (1.0 / (2.0 * step));
    let dxi_err = (dh_fd - jac.dh)
        .x
        .abs()
        .max((dh_fd - jac.dh).y.abs())
        .max((dr_fd - jac.dr).x.abs())
        .max((dr_fd - jac.dr).y.abs());

    let dx = data.dx(&p);
    let xh_fd =
        (data.moment(&chart(h + step, r)) - data.moment(&chart(h - step, r))) * (1.0 / (2.0 * step));
    let xr_fd =
        (data.moment(&chart(h, r + step)) - data.moment(&chart(h, r - step))) * (1.0 / (2.0 * step));
    let dx_err = (xh_fd.x - dx.m[0][0])
        .abs()
        .max((xh_fd.y - dx.m[1][0]).abs())
        .max((xr_fd.x - dx.m[0][1]).abs())
        .max((xr_fd.y - dx.m[1][1]).abs());

    ClosureResidual { dxi_err, dx_err }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::polytope::{Edge, MomentPolytope, PolytopeMode};
    use crate::vec2::IVec2;
    use std::collections::BTreeMap;

    pub(crate) fn flat_c2() -> (MomentPolytope, PolytopeConstants) {
        let p = MomentPolytope::new(
            vec![
                Edge::new(IVec2::new(0, 1), 0.0),
                Edge::new(IVec2::new(1, 0), 0.0),
            ],
            PolytopeMode::Strict,
            vec![],
            BTreeMap::new(),
        )
        .unwrap();
        let c = PolytopeConstants::derive(&p).unwrap();
        (p, c)
    }

    pub(crate) fn hs() -> (MomentPolytope, PolytopeConstants) {
        let p = MomentPolytope::new(
            vec![
                Edge::new(IVec2::new(0, 1), 0.0),
                Edge::new(IVec2::new(1, 1), -1.0),
                Edge::new(IVec2::new(1, 0), 0.0),
            ],
            PolytopeMode::Strict,
            vec![1],
            BTreeMap::new(),
        )
        .unwrap();
        let c = PolytopeConstants::derive(&p).unwrap();
        (p, c)
    }

    pub(crate) fn five_edge() -> (MomentPolytope, PolytopeConstants) {
        let p = MomentPolytope::new(
            vec![
                Edge::new(IVec2::new(0, 1), 0.0),
                Edge::new(IVec2::new(1, 2), 0.0),
                Edge::new(IVec2::new(1, 1), 1.0),
                Edge::new(IVec2::new(2, 1), 4.0),
                Edge::new(IVec2::new(1, 0), 4.0),
            ],
            PolytopeMode::Strict,
            vec![1, 3],
            BTreeMap::new(),
        )
        .unwrap();
        let c = PolytopeConstants::derive(&p).unwrap();
        (p, c)
    }

    pub(crate) fn half_strip() -> (MomentPolytope, PolytopeConstants) {
        let p = MomentPolytope::new(
            vec![
                Edge::new(IVec2::new(0, 1), 0.0),
                Edge::new(IVec2::new(1, 0), 0.0),
                Edge::new(IVec2::new(0, -1), 1.0),
            ],
            PolytopeMode::Parallel,
            vec![1],
            BTreeMap::new(),
        )
        .unwrap();
        let c = PolytopeConstants::derive(&p).unwrap();
        (p, c)
    }

    fn assert_vec2_close(a: Vec2, b: Vec2, tol: f64) {
        assert!(
            (a - b).norm() <= tol,
            "expected {b:?}, got {a:?} (tol {tol})"
        );
    }

    #[test]
    fn flat_c2_closed_forms() {
        let (p, c) = flat_c2();
        let data = AnsatzData::build(&p, &c, Variant::Smooth, Vec2::ZERO, None).unwrap();
        let pt = data.chart_point(0.0, 1.0).unwrap();
        assert_vec2_close(data.xi(&pt), Vec2::ZERO, 1e-15);
        assert_vec2_close(data.moment(&pt), Vec2::new(0.5, 0.5), 1e-15);
        assert!((data.dxi(&pt).det() - 0.5).abs() < 1e-15);

        // det Dxi = 1/(2 rho r) everywhere; r det Dxi = 1/(2 rho).
        for &(h, r) in &[(3.0, 2.0), (-1.5, 0.25), (40.0, 7.0), (-300.0, 1e-3)] {
            let pt = data.chart_point(h, r).unwrap();
            let rho = h.hypot(r);
            let det = data.dxi(&pt).det();
            assert!(
                (det - 1.0 / (2.0 * rho * r)).abs() <= 1e-12 * det.abs(),
                "flat det mismatch at ({h}, {r})"
            );
            let x = data.moment(&pt);
            assert_vec2_close(x, Vec2::new(0.5 * (h + rho), 0.5 * (rho - h)), 1e-10 * rho);
        }
    }

    #[test]
    fn hs_recentered_frozen_values() {
        let (p, c) = hs();
        let data = AnsatzData::build(&p, &c, Variant::Cusp, Vec2::ZERO, Some(1)).unwrap();
        assert_eq!(data.offsets(), &[0.0, 0.0]);
        let pt = data.chart_point(0.0, 1.0).unwrap();
        assert_vec2_close(data.xi(&pt), Vec2::new(-0.5, -0.5), 1e-15);
        // Pinned frame: the momentum image does not move under recentering.
        assert_vec2_close(data.moment(&pt), Vec2::new(1.0, 1.0), 1e-15);

        let canonical = AnsatzData::build(&p, &c, Variant::Cusp, Vec2::ZERO, None).unwrap();
        let pt_can = canonical.chart_point(1.0, 1.0).unwrap();
        assert_vec2_close(canonical.xi(&pt_can), Vec2::new(-0.5, -0.5), 1e-15);
        assert_vec2_close(canonical.moment(&pt_can), Vec2::new(1.0, 1.0), 1e-15);
    }

    #[test]
    fn hs_cusp_edge_function_equals_pole_radius() {
        let (p, c) = hs();
        let data = AnsatzData::build(&p, &c, Variant::Cusp, Vec2::ZERO, None).unwrap();
        for &(h, r) in &[(1.0, 1.0), (0.3, 2.0), (5.0, 0.01), (-4.0, 3.0), (1.0, 40.0)] {
            let pt = data.chart_point(h, r).unwrap();
            let x = data.moment(&pt);
            let l2 = p.ell(1, x);
            assert!(
                (l2 - pt.rho[0]).abs() <= 1e-12 * (1.0 + pt.rho[0]),
                "l_2(x) = {l2} vs rho = {}",
                pt.rho[0]
            );
        }
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let cases: Vec<(AnsatzData, Vec<(f64, f64)>)> = vec![
            {
                let (p, c) = hs();
                (
                    AnsatzData::build(&p, &c, Variant::Cusp, Vec2::new(0.4, -0.3), None).unwrap(),
                    vec![(0.7, 0.9), (-2.0, 0.4), (3.0, 5.0)],
                )
            },
            {
                let (p, c) = five_edge();
                (
                    AnsatzData::build(&p, &c, Variant::Cusp, Vec2::new(0.5, -0.5), None).unwrap(),
                    vec![(-1.3, 1.1), (2.0, 0.2), (-5.0, 8.0)],
                )
            },
            {
                let (p, c) = half_strip();
                (
                    AnsatzData::build(&p, &c, Variant::Cusp, Vec2::new(0.0, -0.4), None).unwrap(),
                    vec![(0.4, 0.8), (-1.0, 2.5)],
                )
            },
        ];
        for (data, pts) in cases {
            for (h, r) in pts {
                let e1 = closure_residual(&data, h, r, 1e-3);
                let e2 = closure_residual(&data, h, r, 5e-4);
                // O(step^2) central differences: quartering, or already at the
                // cancellation floor.
                for (a, b) in [(e1.dxi_err, e2.dxi_err), (e1.dx_err, e2.dx_err)] {
                    assert!(
                        b <= a / 3.0 + 1e-10,
                        "no quadratic decay: {a} -> {b} at ({h}, {r})"
                    );
                }
            }
        }
    }

    #[test]
    fn xi_components_are_harmonic() {
        let (p, c) = five_edge();
        let data = AnsatzData::build(&p, &c, Variant::Cusp, Vec2::new(0.5, -0.5), None).unwrap();
        for &(h, r) in &[(0.9, 0.7), (-2.4, 1.6), (4.0, 0.5)] {
            let r1 = laplacian_residual(&data, h, r, 1e-2);
            let r2 = laplacian_residual(&data, h, r, 5e-3);
            for (a, b) in [(r1.x, r2.x), (r1.y, r2.y)] {
                assert!(
                    b.abs() <= a.abs() / 3.0 + 1e-8,
                    "laplacian residual not O(step^2): {a} -> {b} at ({h}, {r})"
                );
            }
        }
    }

    #[test]
    fn breakdown_sums_to_determinant() {
        let (p, c) = five_edge();
        let data = AnsatzData::build(&p, &c, Variant::Cusp, Vec2::new(0.5, -0.5), None).unwrap();
        let grid = GridSpec::log_graded(&data, 40);
        for &h in &grid.hs {
            for &r in &grid.rs {
                let pt = data.chart_point(h, r).unwrap();
                let det = data.dxi(&pt).det();
                let bd = data.det_breakdown(&pt);
                let mag = bd.magnitude();
                assert!(
                    (bd.total() - det).abs() <= 1e-11 * mag,
                    "identity fails at ({h}, {r}): {} vs {det}",
                    bd.total()
                );
                assert!(
                    bd.min_component() >= -1e-11 * mag,
                    "negative component at ({h}, {r})"
                );
                assert!(bd.core > 0.0);
            }
        }
    }

    #[test]
    fn positivity_scan_passes_on_battery() {
        let configs: Vec<AnsatzData> = vec![
            {
                let (p, c) = flat_c2();
                AnsatzData::build(&p, &c, Variant::Smooth, Vec2::new(0.3, -0.3), None).unwrap()
            },
            {
                let (p, c) = hs();
                AnsatzData::build(&p, &c, Variant::Cusp, Vec2::new(0.0, -0.5), None).unwrap()
            },
            {
                let (p, c) = five_edge();
                AnsatzData::build(&p, &c, Variant::Cusp, Vec2::new(0.5, -0.5), None).unwrap()
            },
        ];
        for data in configs {
            let grid = GridSpec::log_graded(&data, 64);
            let rep = positivity_scan(&data, &grid, 1e-9);
            assert!(rep.pass, "scan failed: {rep:?}");
        }
    }

    #[test]
    fn chart_translation_leaves_maps_invariant() {
        let (p, c) = five_edge();
        let data = AnsatzData::build(&p, &c, Variant::Cusp, Vec2::new(0.5, -0.5), None).unwrap();
        let shift = 0.37;
        let moved = data.translated(shift);
        for &(h, r) in &[(0.9, 0.7), (-2.4, 1.6), (4.0, 0.5)] {
            let p0 = data.chart_point(h, r).unwrap();
            let p1 = moved.chart_point(h + shift, r).unwrap();
            assert_vec2_close(moved.xi(&p1), data.xi(&p0), 1e-12);
            assert_vec2_close(moved.moment(&p1), data.moment(&p0), 1e-12);
            let d0 = data.dxi(&p0);
            let d1 = moved.dxi(&p1);
            assert_vec2_close(d1.dh, d0.dh, 1e-12);
            assert_vec2_close(d1.dr, d0.dr, 1e-12);
        }
    }

    #[test]
    fn conical_theta_one_equals_smooth() {
        let mut angles = BTreeMap::new();
        angles.insert(1usize, 1.0);
        let p = MomentPolytope::new(
            vec![
                Edge::new(IVec2::new(0, 1), 0.0),
                Edge::new(IVec2::new(1, 1), -1.0),
                Edge::new(IVec2::new(1, 0), 0.0),
            ],
            PolytopeMode::Strict,
            vec![],
            angles,
        )
        .unwrap();
        let c = PolytopeConstants::derive(&p).unwrap();
        let smooth = AnsatzData::build(&p, &c, Variant::Smooth, Vec2::ZERO, None).unwrap();
        let conical = AnsatzData::build(&p, &c, Variant::Conical, Vec2::ZERO, None).unwrap();
        for &(h, r) in &[(0.5, 0.5), (-2.0, 1.0), (3.0, 0.1)] {
            let ps = smooth.chart_point(h, r).unwrap();
            let pc = conical.chart_point(h, r).unwrap();
            assert_eq!(smooth.xi(&ps), conical.xi(&pc));
            assert_eq!(smooth.moment(&ps), conical.moment(&pc));
        }
    }

    #[test]
    fn unimodular_covariance() {
        use crate::vec2::IMat2;
        let a = IMat2::new(1, 1, 0, 1);
        let (p, c) = hs();
        // Twisted polytope: normals A nu, same lambdas. Then xi' = A xi at equal
        // chart points and x' = A^{-T} x.
        let twisted_poly = MomentPolytope::new(
            p.edges()
                .iter()
                .map(|e| Edge::new(a.mul_ivec(e.normal), e.lambda))
                .collect(),
            PolytopeMode::Strict,
            p.cusp_edges().to_vec(),
            BTreeMap::new(),
        )
        .unwrap();
        let ct = PolytopeConstants::derive(&twisted_poly).unwrap();
        let nut = Vec2::new(0.4, -0.3);
        let nut_t = a.mul_vec(nut);
        let d0 = AnsatzData::build(&p, &c, Variant::Cusp, nut, None).unwrap();
        let d1 = AnsatzData::build(&twisted_poly, &ct, Variant::Cusp, nut_t, None).unwrap();
        let a_inv_t = a.inv_transpose().unwrap();
        for &(h, r) in &[(1.0, 1.0), (-0.5, 2.0), (3.0, 0.4)] {
            let p0 = d0.chart_point(h, r).unwrap();
            let p1 = d1.chart_point(h, r).unwrap();
            assert_vec2_close(d1.xi(&p1), a.mul_vec(d0.xi(&p0)), 1e-12);
            assert_vec2_close(d1.moment(&p1), a_inv_t.mul_vec(d0.moment(&p0)), 1e-12);
            let det0 = d0.dxi(&p0).det();
            let det1 = d1.dxi(&p1).det();
            assert!((det0 - det1).abs() <= 1e-12 * det0.abs().max(1.0));
        }
    }

    #[test]
    fn cusp_with_no_cusp_edges_is_smooth() {
        let (p, c) = flat_c2();
        let a = AnsatzData::build(&p, &c, Variant::Cusp, Vec2::ZERO, None).unwrap();
        let b = AnsatzData::build(&p, &c, Variant::Smooth, Vec2::ZERO, None).unwrap();
        let pt_a = a.chart_point(0.7, 0.3).unwrap();
        let pt_b = b.chart_point(0.7, 0.3).unwrap();
        assert_eq!(a.xi(&pt_a), b.xi(&pt_b));
        assert_eq!(a.moment(&pt_a), b.moment(&pt_b));
    }

    #[test]
    fn unnormalized_lambda_rejected() {
        let p = MomentPolytope::new(
            vec![
                Edge::new(IVec2::new(0, 1), 1.0),
                Edge::new(IVec2::new(1, 0), 0.0),
            ],
            PolytopeMode::Strict,
            vec![],
            BTreeMap::new(),
        )
        .unwrap();
        let c = PolytopeConstants::derive(&p).unwrap();
        assert!(matches!(
            AnsatzData::build(&p, &c, Variant::Smooth, Vec2::ZERO, None),
            Err(AnsatzError::NotNormalized { .. })
        ));
    }
}
