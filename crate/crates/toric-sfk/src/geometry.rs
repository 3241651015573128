//! Metric-level quantities in momentum coordinates: moment-map inversion, the
//! symplectic potential and its Hessian, scalar curvature, and momentum
//! profiles.
//!
//! The symplectic potential u on the polytope interior is the primitive of
//! xi_1 dx_1 + xi_2 dx_2. Writing G for the chart Jacobian of xi and D for its
//! determinant, the Hessian of u in momentum coordinates is
//!
//! ```text
//! Hess u = (1/(r D)) * G G^T,
//! ```
//!
//! manifestly symmetric positive definite when D > 0, with
//! det Hess u = 1/r^2 identically. The scalar curvature of the metric is
//! s = -(d11 U^11 + 2 d12 U^12 + d22 U^22) for U = (Hess u)^{-1}; the
//! constructed metrics satisfy s = 0, which is verified here by central
//! second differences of the analytically evaluated U field.

use crate::ansatz::{AnsatzData, AnsatzError, ChartPoint, GridSpec};
use crate::polytope::MomentPolytope;
use crate::vec2::{Mat2, Vec2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("point ({x}, {y}) is outside the polytope: edge {edge} value {ell:e}")]
    OutsidePolytope { x: f64, y: f64, edge: usize, ell: f64 },
    #[error("moment inversion stalled for target ({x}, {y}); residual {residual:e}")]
    NoConvergence { x: f64, y: f64, residual: f64 },
    #[error("curvature stencil at ({x}, {y}) with step {h:e} leaves the interior")]
    StencilExitsPolytope { x: f64, y: f64, h: f64 },
    #[error("integration segment leaves the polytope interior near ({x}, {y})")]
    PathExitsPolytope { x: f64, y: f64 },
    #[error("edge {edge} is not a cusp edge of this configuration")]
    NotACuspEdge { edge: usize },
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
}

/// 10-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_14,
];

/// Moment-map inversion and metric evaluation for one configuration.
pub struct MetricGeometry<'a> {
    data: &'a AnsatzData,
    polytope: &'a MomentPolytope,
    newton_tol: f64,
    /// Precomputed (H, r, x) triples used to seed Newton.
    seeds: Vec<(f64, f64, Vec2)>,
}

/// Scalar curvature sample; `h_used` is the stencil step after the
/// near-boundary clamp.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct ScalarSample {
    pub s: f64,
    pub h_used: f64,
}

/// Residuals of r^2 det Hess u = 1 along two routes: the analytic Jacobian
/// composition, and finite differences of xi with respect to x (which also
/// exercises inversion and the closure of xi_1 dx_1 + xi_2 dx_2).
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct RConsistency {
    pub analytic: f64,
    pub fd: f64,
    pub fd_asymmetry: f64,
}

/// One momentum profile entry for a cusp edge.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct ProfilePoint {
    pub tau: f64,
    pub x_norm_sq: f64,
}

impl<'a> MetricGeometry<'a> {
    pub fn new(data: &'a AnsatzData, polytope: &'a MomentPolytope) -> Self {
        let grid = GridSpec::log_graded(data, 24);
        let mut seeds = Vec::with_capacity(grid.node_count());
        for &h in &grid.hs {
            for &r in &grid.rs {
                if let Ok(p) = data.chart_point(h, r) {
                    seeds.push((h, r, data.moment(&p)));
                }
            }
        }
        MetricGeometry {
            data,
            polytope,
            newton_tol: 1e-12,
            seeds,
        }
    }

    pub fn with_newton_tol(mut self, tol: f64) -> Self {
        assert!(tol > 0.0);
        self.newton_tol = tol;
        self
    }

    pub fn data(&self) -> &AnsatzData {
        self.data
    }

    pub fn polytope(&self) -> &MomentPolytope {
        self.polytope
    }

    pub fn require_interior(&self, x: Vec2) -> Result<(), GeometryError> {
        for i in 0..self.polytope.d() {
            let ell = self.polytope.ell(i, x);
            if !(ell > 0.0) {
                return Err(GeometryError::OutsidePolytope {
                    x: x.x,
                    y: x.y,
                    edge: i,
                    ell,
                });
            }
        }
        Ok(())
    }

    /// Euclidean distance to the nearest edge line (min over i of
    /// ell_i(x)/|nu_i|).
    pub fn interior_distance(&self, x: Vec2) -> Result<f64, GeometryError> {
        self.require_interior(x)?;
        let mut dist = f64::INFINITY;
        for i in 0..self.polytope.d() {
            let nu = self.polytope.normal_v(i);
            dist = dist.min(self.polytope.ell(i, x) / nu.norm());
        }
        Ok(dist)
    }

    /// Finds the chart point mapping to `x` under the moment map. Newton with
    /// the analytic Jacobian, seeded from the nearest precomputed grid image,
    /// with step halving to keep r > 0 and the residual decreasing.
    pub fn invert_moment(&self, x: Vec2) -> Result<ChartPoint, GeometryError> {
        self.require_interior(x)?;
        let mut seed = (1.0, 1.0);
        let mut best = f64::INFINITY;
        for &(h, r, xs) in &self.seeds {
            let d = (xs - x).norm_sq();
            if d < best {
                best = d;
                seed = (h, r);
            }
        }
        self.newton(seed, x)
    }

    /// Newton iteration from an explicit seed; used directly by warm-started
    /// sweeps (integration walks a segment, reusing the previous solution).
    pub fn invert_moment_seeded(
        &self,
        seed: (f64, f64),
        x: Vec2,
    ) -> Result<ChartPoint, GeometryError> {
        self.require_interior(x)?;
        self.newton(seed, x)
    }

    fn newton(&self, seed: (f64, f64), x: Vec2) -> Result<ChartPoint, GeometryError> {
        let scale = 1.0 + x.norm();
        let stall = GeometryError::NoConvergence {
            x: x.x,
            y: x.y,
            residual: f64::NAN,
        };
        let (mut h, mut r) = seed;
        if !(r > 0.0) {
            r = 1e-6 * self.data.scale();
        }
        let mut res = f64::INFINITY;
        for _ in 0..100 {
            let p = self.data.chart_point(h, r)?;
            let f = self.data.moment(&p) - x;
            res = f.norm();
            if res <= self.newton_tol * scale {
                return Ok(self.polish(p, x));
            }
            let jac = self.data.dx(&p);
            let Some(step) = jac.solve(f) else {
                return Err(stall);
            };
            let mut t = 1.0;
            let mut advanced = false;
            while t >= 1e-14 {
                let hn = h - t * step.x;
                let rn = r - t * step.y;
                if rn > 0.0 {
                    let pn = self.data.chart_point(hn, rn)?;
                    let rn_res = (self.data.moment(&pn) - x).norm();
                    if rn_res < res {
                        h = hn;
                        r = rn;
                        advanced = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !advanced {
                return Err(GeometryError::NoConvergence {
                    x: x.x,
                    y: x.y,
                    residual: res,
                });
            }
        }
        Err(GeometryError::NoConvergence {
            x: x.x,
            y: x.y,
            residual: res,
        })
    }

    /// Two undamped Newton steps: quadratic convergence takes an already
    /// accepted iterate to the rounding floor.
    fn polish(&self, mut p: ChartPoint, x: Vec2) -> ChartPoint {
        let mut best = p.clone();
        let mut best_res = (self.data.moment(&p) - x).norm();
        for _ in 0..2 {
            let f = self.data.moment(&p) - x;
            let Some(step) = self.data.dx(&p).solve(f) else {
                break;
            };
            let hn = p.h - step.x;
            let rn = p.r - step.y;
            if !(rn > 0.0) {
                break;
            }
            let Ok(pn) = self.data.chart_point(hn, rn) else {
                break;
            };
            let res = (self.data.moment(&pn) - x).norm();
            p = pn;
            if res < best_res {
                best_res = res;
                best = p.clone();
            }
        }
        best
    }

    /// Hess u at a chart point: (1/(r D)) G G^T.
    pub fn hessian_at(&self, p: &ChartPoint) -> Mat2 {
        let g = self.data.dxi(p);
        let d = g.det();
        let f = 1.0 / (p.r * d);
        Mat2::new(
            f * (g.dh.x * g.dh.x + g.dr.x * g.dr.x),
            f * (g.dh.x * g.dh.y + g.dr.x * g.dr.y),
            f * (g.dh.x * g.dh.y + g.dr.x * g.dr.y),
            f * (g.dh.y * g.dh.y + g.dr.y * g.dr.y),
        )
    }

    /// U = (Hess u)^{-1} at a chart point: (r/D) adj(G G^T).
    pub fn inverse_hessian_at(&self, p: &ChartPoint) -> Mat2 {
        let g = self.data.dxi(p);
        let d = g.det();
        let f = p.r / d;
        Mat2::new(
            f * (g.dh.y * g.dh.y + g.dr.y * g.dr.y),
            -f * (g.dh.x * g.dh.y + g.dr.x * g.dr.y),
            -f * (g.dh.x * g.dh.y + g.dr.x * g.dr.y),
            f * (g.dh.x * g.dh.x + g.dr.x * g.dr.x),
        )
    }

    pub fn hessian_u(&self, x: Vec2) -> Result<(Mat2, ChartPoint), GeometryError> {
        let p = self.invert_moment(x)?;
        Ok((self.hessian_at(&p), p))
    }

    /// Residuals of r^2 det Hess u = 1. The finite-difference route inverts
    /// the moment map at a 4-point stencil around x, differences xi in x, and
    /// Richardson-extrapolates (h, h/2); its asymmetry |F12 - F21| measures
    /// how exactly xi_1 dx_1 + xi_2 dx_2 closes.
    pub fn r_consistency(&self, x: Vec2, h: f64) -> Result<RConsistency, GeometryError> {
        let p = self.invert_moment(x)?;
        let analytic = (p.r * p.r * self.hessian_at(&p).det() - 1.0).abs();

        let dist = self.interior_distance(x)?;
        let h_eff = h.min(dist / 10.0);
        if !(h_eff > 0.0) {
            return Err(GeometryError::StencilExitsPolytope {
                x: x.x,
                y: x.y,
                h,
            });
        }
        let xi_at = |xx: Vec2| -> Result<Vec2, GeometryError> {
            let seed = (p.h, p.r);
            let q = self.invert_moment_seeded(seed, xx)?;
            Ok(self.data.xi(&q))
        };
        let fd_hess = |step: f64| -> Result<Mat2, GeometryError> {
            let e1 = Vec2::new(step, 0.0);
            let e2 = Vec2::new(0.0, step);
            let c1 = (xi_at(x + e1)? - xi_at(x - e1)?) * (0.5 / step);
            let c2 = (xi_at(x + e2)? - xi_at(x - e2)?) * (0.5 / step);
            // Columns are d(xi)/dx_1 and d(xi)/dx_2.
            Ok(Mat2::new(c1.x, c2.x, c1.y, c2.y))
        };
        let f1 = fd_hess(h_eff)?;
        let f2 = fd_hess(0.5 * h_eff)?;
        let rich = Mat2::new(
            (4.0 * f2.m[0][0] - f1.m[0][0]) / 3.0,
            (4.0 * f2.m[0][1] - f1.m[0][1]) / 3.0,
            (4.0 * f2.m[1][0] - f1.m[1][0]) / 3.0,
            (4.0 * f2.m[1][1] - f1.m[1][1]) / 3.0,
        );
        let fd = (p.r * p.r * rich.det() - 1.0).abs();
        let fd_asymmetry = (rich.m[0][1] - rich.m[1][0]).abs() / (1.0 + rich.max_abs());
        Ok(RConsistency {
            analytic,
            fd,
            fd_asymmetry,
        })
    }

    /// Scalar curvature by central second differences of the U field on a
    /// 3x3 momentum-space stencil. The step is clamped to a tenth of the
    /// distance to the boundary so the stencil stays interior.
    pub fn scalar_curvature(&self, x: Vec2, h: f64) -> Result<ScalarSample, GeometryError> {
        let dist = self.interior_distance(x)?;
        let h_eff = h.min(dist / 10.0);
        if !(h_eff > 0.0) {
            return Err(GeometryError::StencilExitsPolytope {
                x: x.x,
                y: x.y,
                h,
            });
        }
        let u = |i: i32, j: i32| -> Result<Mat2, GeometryError> {
            let xx = x + Vec2::new(i as f64 * h_eff, j as f64 * h_eff);
            let p = self.invert_moment(xx)?;
            Ok(self.inverse_hessian_at(&p))
        };
        let c = u(0, 0)?;
        let h2 = h_eff * h_eff;
        let d11 = (u(1, 0)?.m[0][0] - 2.0 * c.m[0][0] + u(-1, 0)?.m[0][0]) / h2;
        let d22 = (u(0, 1)?.m[1][1] - 2.0 * c.m[1][1] + u(0, -1)?.m[1][1]) / h2;
        let d12 = (u(1, 1)?.m[0][1] - u(1, -1)?.m[0][1] - u(-1, 1)?.m[0][1]
            + u(-1, -1)?.m[0][1])
            / (4.0 * h2);
        Ok(ScalarSample {
            s: -(d11 + 2.0 * d12 + d22),
            h_used: h_eff,
        })
    }

    /// Canonical interior reference point: the image of the chart point at the
    /// center of the offset window, one length scale off the axis.
    pub fn anchor(&self) -> Vec2 {
        let offs = self.data.offsets();
        let lo = offs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = offs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let h = -0.5 * (lo + hi);
        let r = self.data.scale();
        let p = self.data.chart_point(h, r).expect("r > 0");
        self.data.moment(&p)
    }

    /// Momentum profile along the axis ray over a cusp edge: tau = 2 ell_k(x)
    /// and the squared norm of the torus field that degenerates there,
    /// |X|^2 = |r (tau_H^2 + tau_r^2) / (tau_H x1_r - tau_r x1_H)|.
    /// On the ray H = -a_{k-1} the identity ell_k(x(H, r)) = rho_{k-1} makes
    /// tau = 2r exact.
    pub fn momentum_profile(
        &self,
        cusp_edge: usize,
        taus: &[f64],
    ) -> Result<Vec<ProfilePoint>, GeometryError> {
        let cusp = self
            .data
            .cusps()
            .iter()
            .find(|c| c.edge == cusp_edge)
            .ok_or(GeometryError::NotACuspEdge { edge: cusp_edge })?;
        let h_star = -self.data.offsets()[cusp.pole];
        let nu = self.polytope.normal_v(cusp_edge);
        // At the pole's H value, 2 ell_k(x(h*, r)) = 2r when all chart
        // offsets coincide and 2r + O(r^2) otherwise; a secant refinement
        // pins 2 ell_k = tau in either case.
        let ell2 = |r: f64| -> Result<f64, GeometryError> {
            let p = self.data.chart_point(h_star, r)?;
            Ok(2.0 * self.polytope.ell(cusp_edge, self.data.moment(&p)))
        };
        let mut out = Vec::with_capacity(taus.len());
        for &tau in taus {
            assert!(tau > 0.0, "tau must be positive");
            let mut r = 0.5 * tau;
            let mut f = ell2(r)? - tau;
            if f.abs() > 1e-13 * (1.0 + tau) {
                let mut r_prev = r * (1.0 - 1e-4);
                let mut f_prev = ell2(r_prev)? - tau;
                for _ in 0..60 {
                    let dr = f * (r - r_prev) / (f - f_prev);
                    r_prev = r;
                    f_prev = f;
                    r -= dr;
                    f = ell2(r)? - tau;
                    if f.abs() <= 1e-13 * (1.0 + tau) {
                        break;
                    }
                }
            }
            let p = self.data.chart_point(h_star, r)?;
            let jac = self.data.dx(&p);
            let tau_h = 2.0 * (nu.x * jac.m[0][0] + nu.y * jac.m[1][0]);
            let tau_r = 2.0 * (nu.x * jac.m[0][1] + nu.y * jac.m[1][1]);
            let denom = tau_h * jac.m[0][1] - tau_r * jac.m[0][0];
            let x_norm_sq = (p.r * (tau_h * tau_h + tau_r * tau_r) / denom).abs();
            out.push(ProfilePoint { tau, x_norm_sq });
        }
        Ok(out)
    }

    /// Deterministic interior sample points: forward images of a Halton sweep
    /// over the chart window, guaranteed interior at a range of depths.
    pub fn interior_samples(&self, n: usize) -> Vec<Vec2> {
        let offs = self.data.offsets();
        let lo = offs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = offs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let scale = self.data.scale();
        // Chart H values of interest sit around the negated offsets.
        let h_lo = -hi - 2.5 * scale;
        let h_hi = -lo + 2.5 * scale;
        crate::sample::unit_square(n)
            .map(|(a, b)| {
                let h = h_lo + (h_hi - h_lo) * a;
                // r spans two decades below the length scale and half above.
                let r = scale * 10f64.powf(-2.0 + 2.5 * b);
                let p = self.data.chart_point(h, r).expect("r > 0");
                self.data.moment(&p)
            })
            .collect()
    }
}

/// Potential values u(x) by integrating xi . dx from a fixed interior base
/// point along the straight segment (the polytope is convex, so the segment
/// stays interior). Composite 10-point Gauss-Legendre with panel doubling;
/// each integrand evaluation warm-starts the moment inversion from its
/// predecessor along the segment.
pub struct PotentialEvaluator<'a, 'g> {
    geom: &'g MetricGeometry<'a>,
    base: Vec2,
    tol: f64,
}

impl<'a, 'g> PotentialEvaluator<'a, 'g> {
    pub fn new(geom: &'g MetricGeometry<'a>, base: Vec2) -> Result<Self, GeometryError> {
        geom.require_interior(base)?;
        Ok(PotentialEvaluator {
            geom,
            base,
            tol: 1e-12,
        })
    }

    pub fn base(&self) -> Vec2 {
        self.base
    }

    /// u(x) with u(base) = 0.
    pub fn value(&self, x: Vec2) -> Result<f64, GeometryError> {
        self.geom.require_interior(x)?;
        let dir = x - self.base;
        if dir.norm() == 0.0 {
            return Ok(0.0);
        }

        // Rule nodes in increasing order so the warm start stays close.
        let mut rule = [(0.0f64, 0.0f64); 10];
        for i in 0..5 {
            rule[i] = (-GL_NODES[4 - i], GL_WEIGHTS[4 - i]);
            rule[5 + i] = (GL_NODES[i], GL_WEIGHTS[i]);
        }

        let integrate = |panels: usize| -> Result<f64, GeometryError> {
            let mut total = 0.0;
            let mut seed: Option<(f64, f64)> = None;
            for k in 0..panels {
                let t0 = k as f64 / panels as f64;
                let t1 = (k + 1) as f64 / panels as f64;
                let mid = 0.5 * (t0 + t1);
                let half = 0.5 * (t1 - t0);
                let mut panel = 0.0;
                for &(z, w) in &rule {
                    let xx = self.base + dir * (mid + half * z);
                    let p = match seed {
                        Some(s) => self.geom.invert_moment_seeded(s, xx)?,
                        None => self.geom.invert_moment(xx)?,
                    };
                    seed = Some((p.h, p.r));
                    panel += w * self.geom.data.xi(&p).dot(dir);
                }
                total += panel * half;
            }
            Ok(total)
        };

        let mut panels = 8;
        let mut prev = integrate(panels)?;
        while panels < 512 {
            panels *= 2;
            let next = integrate(panels)?;
            if (next - prev).abs() <= self.tol * (1.0 + next.abs()) {
                return Ok(next);
            }
            prev = next;
        }
        Ok(prev)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::tests::{five_edge, flat_c2, hs};
    use crate::ansatz::AnsatzData;
    use crate::constants::Variant;

    #[test]
    fn flat_inversion_and_hessian() {
        let (p, c) = flat_c2();
        let data = AnsatzData::build(&p, &c, Variant::Smooth, Vec2::ZERO, None).unwrap();
        let geom = MetricGeometry::new(&data, &p);
        let pt = geom.invert_moment(Vec2::new(2.0, 2.0)).unwrap();
        assert!(pt.h.abs() < 1e-11 && (pt.r - 4.0).abs() < 1e-11, "{pt:?}");
        let (hess, chart) = geom.hessian_u(Vec2::new(2.0, 2.0)).unwrap();
        assert!((hess.m[0][0] - 0.25).abs() < 1e-12);
        assert!((hess.m[1][1] - 0.25).abs() < 1e-12);
        assert!(hess.m[0][1].abs() < 1e-12);
        assert!((chart.r * chart.r * hess.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inversion_round_trip() {
        let (p, c) = hs();
        let data = AnsatzData::build(&p, &c, Variant::Cusp, Vec2::new(0.4, -0.3), None).unwrap();
        let geom = MetricGeometry::new(&data, &p);
        for x in geom.interior_samples(200) {
            let pt = geom.invert_moment(x).unwrap();
            let back = data.moment(&pt);
            assert!(
                (back - x).norm() <= 1e-10 * (1.0 + x.norm()),
                "round trip failed at {x:?}"
            );
        }
    }

    #[test]
    fn r_consistency_both_routes() {
        let (p, c) = five_edge();
        let data = AnsatzData::build(&p, &c, Variant::Cusp, Vec2::new(0.5, -0.5), None).unwrap();
        let geom = MetricGeometry::new(&data, &p);
        // The finite-difference route needs boundary clearance: its
        // truncation floor scales with (step / distance)^4.
        let mut checked = 0;
        for x in geom.interior_samples(60) {
            if geom.interior_distance(x).unwrap() < 0.3 {
                continue;
            }
            let rc = geom.r_consistency(x, 1e-3 * data.scale()).unwrap();
            assert!(rc.analytic <= 1e-12, "analytic {rc:?} at {x:?}");
            assert!(rc.fd <= 1e-8, "fd {rc:?} at {x:?}");
            assert!(rc.fd_asymmetry <= 1e-9, "asymmetry {rc:?} at {x:?}");
            checked += 1;
        }
        assert!(checked >= 12, "only {checked} samples had clearance");
    }

    #[test]
    fn flat_scalar_curvature_vanishes() {
        let (p, c) = flat_c2();
        let data = AnsatzData::build(&p, &c, Variant::Smooth, Vec2::ZERO, None).unwrap();
        let geom = MetricGeometry::new(&data, &p);
        for &(x1, x2) in &[(0.5, 0.5), (2.0, 1.0), (0.2, 3.0)] {
            let s = geom
                .scalar_curvature(Vec2::new(x1, x2), 1e-3)
                .unwrap();
            assert!(s.s.abs() <= 1e-6, "flat |s| = {} at ({x1}, {x2})", s.s);
        }
    }

    #[test]
    fn hs_scalar_curvature_quarters_with_step() {
        let (p, c) = hs();
        let data = AnsatzData::build(&p, &c, Variant::Cusp, Vec2::ZERO, None).unwrap();
        let geom = MetricGeometry::new(&data, &p);
        let x = Vec2::new(0.8, 1.1);
        let s1 = geom.scalar_curvature(x, 1e-2).unwrap();
        let s2 = geom.scalar_curvature(x, 5e-3).unwrap();
        assert!(s1.s.abs() < 1e-2, "coarse |s| = {}", s1.s);
        assert!(
            s2.s.abs() <= s1.s.abs() / 3.0 + 1e-11,
            "no O(h^2) decay: {} -> {}",
            s1.s,
            s2.s
        );
    }

    #[test]
    fn hs_momentum_profile_matches_closed_form() {
        let (p, c) = hs();
        let data = AnsatzData::build(&p, &c, Variant::Cusp, Vec2::ZERO, None).unwrap();
        let geom = MetricGeometry::new(&data, &p);
        let taus = [0.01, 0.1, 1.0, 2.0, 4.0, 10.0, 100.0];
        let prof = geom.momentum_profile(1, &taus).unwrap();
        for pt in prof {
            let want = 2.0 * pt.tau * pt.tau / (2.0 + pt.tau);
            assert!(
                (pt.x_norm_sq - want).abs() <= 1e-9 * want,
                "tau {}: {} vs {}",
                pt.tau,
                pt.x_norm_sq,
                want
            );
        }
    }

    #[test]
    fn potential_gradient_matches_xi() {
        let (p, c) = hs();
        let data = AnsatzData::build(&p, &c, Variant::Cusp, Vec2::ZERO, None).unwrap();
        let geom = MetricGeometry::new(&data, &p);
        let pot = PotentialEvaluator::new(&geom, geom.anchor()).unwrap();
        let x = Vec2::new(0.9, 1.3);
        let chart = geom.invert_moment(x).unwrap();
        let xi = data.xi(&chart);
        for step in [1e-4, 5e-5] {
            let gx = (pot.value(x + Vec2::new(step, 0.0)).unwrap()
                - pot.value(x - Vec2::new(step, 0.0)).unwrap())
                / (2.0 * step);
            let gy = (pot.value(x + Vec2::new(0.0, step)).unwrap()
                - pot.value(x - Vec2::new(0.0, step)).unwrap())
                / (2.0 * step);
            assert!(
                (gx - xi.x).abs() + (gy - xi.y).abs() <= 1e-7,
                "grad ({gx}, {gy}) vs xi {xi:?} at step {step}"
            );
        }
    }

    #[test]
    fn potential_is_path_additive() {
        let (p, c) = hs();
        let data = AnsatzData::build(&p, &c, Variant::Cusp, Vec2::ZERO, None).unwrap();
        let geom = MetricGeometry::new(&data, &p);
        let base = geom.anchor();
        let pot = PotentialEvaluator::new(&geom, base).unwrap();
        let mid = Vec2::new(0.6, 0.9);
        let end = Vec2::new(1.7, 0.4);
        let via_mid = pot.value(mid).unwrap() + {
            let pot_mid = PotentialEvaluator::new(&geom, mid).unwrap();
            pot_mid.value(end).unwrap()
        };
        let direct = pot.value(end).unwrap();
        assert!(
            (via_mid - direct).abs() <= 1e-10 * (1.0 + direct.abs()),
            "{via_mid} vs {direct}"
        );
    }
}
