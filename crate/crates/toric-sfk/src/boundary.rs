//! Boundary behavior of the constructed metrics: the piecewise-affine traces
//! of the moment map on r = 0, the boundary class of the symplectic potential
//! at each edge (Guillemin, cusp, or conical), and the determinant product
//! bound.
//!
//! On the axis the chart splits into intervals between consecutive -a_j. On
//! the interval for edge j the moment map restricts to an affine map whose
//! image lies on the line ell_j = 0; consecutive traces meet at the polytope
//! vertices. A cusp edge's interval is empty (its two offsets coincide) and
//! the two neighboring traces end at the edge's two distinct endpoints: the
//! edge itself sits at infinite distance and its interior is never attained.

use crate::ansatz::AnsatzData;
use crate::constants::{PolytopeConstants, Variant};
use crate::geometry::{GeometryError, MetricGeometry, PotentialEvaluator};
use crate::polytope::MomentPolytope;
use crate::rational::{f64_of, rat_is_zero, rat_of_f64, Rat};
use crate::vec2::Vec2;
use num_traits::Zero;

/// Affine trace x(H, 0) = origin + H * direction on one axis interval.
#[derive(Clone, Debug)]
pub struct BoundaryTrace {
    pub edge: usize,
    /// (lo, hi); infinite at the unbounded ends. Empty exactly for cusp
    /// edges, whose vertex images are excised.
    pub interval: (f64, f64),
    pub origin: Vec2,
    pub direction: Vec2,
}

impl BoundaryTrace {
    pub fn at(&self, h: f64) -> Vec2 {
        self.origin + self.direction * h
    }

    pub fn is_excised(&self) -> bool {
        self.interval.0 >= self.interval.1
    }
}

/// Closed-form boundary traces for every edge, derived from the ansatz data
/// at r = 0: on interval j the stable forms collapse to S = c_j H + K_j with
/// K_j accumulating the passed blocks and cusp jumps.
pub fn boundary_traces(data: &AnsatzData) -> Vec<BoundaryTrace> {
    let d = data.d();
    let offs = data.offsets();
    let coeffs = data.coeffs();
    let mut traces = Vec::with_capacity(d);
    for j in 0..d {
        // K_j = c_0 a_0 + sum_{i<j} (c_{i+1} - c_i) a_i - sum_{k <= j cusp} Lambda_k c_k.
        let mut k_j = coeffs[0] * offs[0];
        for i in 0..j {
            k_j += (coeffs[i + 1] - coeffs[i]) * offs[i];
        }
        for cusp in data.cusps() {
            if cusp.edge <= j {
                k_j -= coeffs[cusp.edge] * cusp.gap;
            }
        }
        let origin = (k_j - data.x_pin()).perp();
        let direction = coeffs[j].perp();
        let lo = if j < offs.len() {
            -offs[j]
        } else {
            f64::NEG_INFINITY
        };
        let hi = if j == 0 { f64::INFINITY } else { -offs[j - 1] };
        traces.push(BoundaryTrace {
            edge: j,
            interval: (lo, hi),
            origin,
            direction,
        });
    }
    traces
}

/// Exact rational form of the trace identity: for every edge j the affine
/// trace satisfies ell_j(x(H, 0)) = 0 identically, i.e.
/// sum_{i<j} a_i det(c_{i+1} - c_i, nu_j) - sum_{k<=j cusp} Lambda_k det(c_k, nu_j)
/// equals lambda_j over Q (the H-coefficient det(c_j, nu_j) vanishes by
/// construction). Uses the exact offsets for the given variant.
pub fn exact_trace_identity(
    polytope: &MomentPolytope,
    constants: &PolytopeConstants,
    variant: Variant,
) -> Result<(), String> {
    let d = polytope.d();
    let offsets = constants.offsets_for(variant);

    // Rational edge coefficients: nu / theta on conical edges.
    let coeff = |i: usize| -> [Rat; 2] {
        let nu = polytope.normal(i);
        let mut c = [Rat::from_integer(nu.x.into()), Rat::from_integer(nu.y.into())];
        if variant == Variant::Conical {
            if let Some(&theta) = polytope.cone_angles().get(&i) {
                let t = rat_of_f64(theta).expect("validated angle is finite");
                c[0] /= &t;
                c[1] /= &t;
            }
        }
        c
    };
    let det = |a: &[Rat; 2], bx: &Rat, by: &Rat| -> Rat { &a[0] * by - &a[1] * bx };

    for j in 0..d {
        let nu_j = polytope.normal(j);
        let njx = Rat::from_integer(nu_j.x.into());
        let njy = Rat::from_integer(nu_j.y.into());

        let cj = coeff(j);
        let parallel = det(&cj, &njx, &njy);
        if !rat_is_zero(&parallel) {
            return Err(format!("edge {}: trace direction leaves the edge line", j + 1));
        }

        let mut acc = Rat::zero();
        for i in 0..j.min(offsets.len()) {
            let ci = coeff(i);
            let ci1 = coeff(i + 1);
            let dc = [&ci1[0] - &ci[0], &ci1[1] - &ci[1]];
            acc += &offsets[i] * det(&dc, &njx, &njy);
        }
        if variant == Variant::Cusp {
            for &k in polytope.cusp_edges() {
                if k <= j {
                    let gap = constants.cusp_gap(k).expect("cusp edge has a gap");
                    let ck = coeff(k);
                    acc -= gap * det(&ck, &njx, &njy);
                }
            }
        }
        // ell_j(perp(v)) = -det(v, nu_j) + lambda_j, so the requirement is
        // acc = lambda_j.
        let lambda = polytope.lambda_rat(j);
        if acc != lambda {
            return Err(format!(
                "edge {}: trace constant {} differs from lambda {}",
                j + 1,
                f64_of(&acc),
                f64_of(&lambda),
            ));
        }
    }
    Ok(())
}

/// Numeric verification of the trace structure.
#[derive(Clone, Debug, serde::Serialize)]
pub struct TraceVerification {
    /// max |ell_j(x(H,0))| over sampled H in each edge's interval.
    pub max_ell_residual: f64,
    /// max distance between trace endpoints and the exact polytope vertices.
    pub max_vertex_err: f64,
    /// max |moment(H, r) - trace(H)| / r^2 over small-r probes (limit
    /// consistency of the closed-form trace).
    pub max_limit_ratio: f64,
    /// Cusp edges whose neighboring traces end at the edge's two endpoints.
    pub cusp_endpoints_ok: bool,
    pub pass: bool,
}

/// Samples each nonempty interval, checks ell residuals, vertex matching,
/// cusp excision, and the r -> 0 limit consistency of the affine traces.
pub fn verify_traces(
    polytope: &MomentPolytope,
    data: &AnsatzData,
    samples_per_interval: usize,
    tol: f64,
) -> TraceVerification {
    let traces = boundary_traces(data);
    let scale = data.scale();
    let mut max_ell = 0.0f64;
    let mut max_vertex = 0.0f64;
    let mut max_limit = 0.0f64;
    let mut cusp_ok = true;

    let clamp_lo = |t: &BoundaryTrace| {
        if t.interval.0.is_finite() {
            t.interval.0
        } else {
            t.interval.1 - 3.0 * scale
        }
    };
    let clamp_hi = |t: &BoundaryTrace| {
        if t.interval.1.is_finite() {
            t.interval.1
        } else {
            t.interval.0 + 3.0 * scale
        }
    };

    for t in &traces {
        if t.is_excised() {
            continue;
        }
        let lo = clamp_lo(t);
        let hi = clamp_hi(t);
        for s in 0..samples_per_interval {
            let f = (s as f64 + 0.5) / samples_per_interval as f64;
            let h = lo + (hi - lo) * f;
            let x = t.at(h);
            let ell = polytope.ell(t.edge, x).abs() / (1.0 + x.norm());
            max_ell = max_ell.max(ell);

            // Interior-of-interval points admit an O(r^2) limit check.
            if s == samples_per_interval / 2 {
                for r in [1e-4 * scale, 5e-5 * scale] {
                    if let Ok(p) = data.chart_point(h, r) {
                        let err = (data.moment(&p) - x).norm();
                        max_limit = max_limit.max(err / (r * r));
                    }
                }
            }
        }
    }

    // Vertex continuity: for each finite boundary between intervals j, j+1
    // the two traces meet at the exact vertex; at a cusp edge the two
    // neighboring traces end at its two distinct endpoints.
    for j in 0..polytope.d() - 1 {
        let vertex = polytope.vertex_f64(j);
        if data
            .cusps()
            .iter()
            .any(|c| c.edge == j + 1 || c.edge == j)
        {
            continue;
        }
        let h = -data.offsets()[j];
        let a = traces[j].at(h);
        let b = traces[j + 1].at(h);
        max_vertex = max_vertex
            .max((a - vertex).norm())
            .max((b - vertex).norm());
    }
    for cusp in data.cusps() {
        let k = cusp.edge;
        let h = -data.offsets()[cusp.pole];
        let end_before = traces[k - 1].at(h);
        let start_after = traces[k + 1].at(h);
        let v_in = polytope.vertex_f64(k - 1);
        let v_out = polytope.vertex_f64(k);
        let err = (end_before - v_in).norm().max((start_after - v_out).norm());
        max_vertex = max_vertex.max(err);
        if (v_in - v_out).norm() <= tol {
            cusp_ok = false;
        }
    }

    let pass = max_ell <= tol && max_vertex <= tol * scale && cusp_ok && max_limit.is_finite();
    TraceVerification {
        max_ell_residual: max_ell,
        max_vertex_err: max_vertex,
        max_limit_ratio: max_limit,
        cusp_endpoints_ok: cusp_ok,
        pass,
    }
}

/// The boundary class certified for one edge.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub enum BoundaryClass {
    /// u - coeff * ell log ell bounded through second derivatives
    /// (coeff = 1/2, or 1/(2 theta) on a conical edge).
    Guillemin { coeff: f64 },
    /// u + (alpha + beta ell) log ell - (1/2) sum_{j != k} ell_j log ell_j
    /// bounded with bounded gradient.
    Cusp { alpha: f64, beta: f64 },
}

/// Residual report for one edge's boundary class.
#[derive(Clone, Debug, serde::Serialize)]
pub struct EdgeClassReport {
    pub edge: usize,
    pub class: BoundaryClass,
    /// Probe depths (values of ell on the approach sequence).
    pub ells: Vec<f64>,
    pub w_values: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub hess_norms: Vec<f64>,
    /// Fitted log-slopes: q = A + B log ell over the sequence; |B| small
    /// certifies boundedness, |B| of order the singular coefficient flags a
    /// surviving log term.
    pub w_log_slope: f64,
    pub grad_log_slope: f64,
    pub pass: bool,
}

fn log_fit_slope(ells: &[f64], q: &[f64]) -> f64 {
    let n = ells.len() as f64;
    let mean_l = ells.iter().map(|e| e.ln()).sum::<f64>() / n;
    let mean_q = q.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (e, v) in ells.iter().zip(q) {
        let dl = e.ln() - mean_l;
        num += dl * (v - mean_q);
        den += dl * dl;
    }
    num / den
}

/// Interior point on the open edge j from which approach sequences start:
/// the midpoint of the finite edge segment, or one length scale along an
/// unbounded edge from its single vertex.
fn edge_base_point(polytope: &MomentPolytope, data: &AnsatzData, edge: usize) -> Vec2 {
    let traces = boundary_traces(data);
    let t = &traces[edge];
    let scale = data.scale();
    let (lo, hi) = t.interval;
    let h = if t.is_excised() {
        // Cusp edge: its segment joins the two vertex images; take the
        // midpoint via the exact vertices instead of the trace.
        let v0 = polytope.vertex_f64(edge - 1);
        let v1 = polytope.vertex_f64(edge);
        return (v0 + v1) * 0.5;
    } else if lo.is_finite() && hi.is_finite() {
        0.5 * (lo + hi)
    } else if lo.is_finite() {
        lo + scale
    } else {
        hi - scale
    };
    t.at(h)
}

/// Approach sequence to edge j with prescribed ell values.
fn approach_points(
    polytope: &MomentPolytope,
    data: &AnsatzData,
    edge: usize,
    ells: &[f64],
) -> Vec<Vec2> {
    let base = edge_base_point(polytope, data, edge);
    let nu = polytope.normal_v(edge);
    let n2 = nu.norm_sq();
    ells.iter().map(|&e| base + nu * (e / n2)).collect()
}

/// Certifies the Guillemin (or conical Guillemin) class on a non-cusp edge:
/// w = u - coeff * ell_j log ell_j has bounded value, gradient, and Hessian
/// along an approach sequence. Gradient and Hessian come from the analytic
/// xi and Hess u; only w itself needs quadrature.
pub fn guillemin_residual(
    geom: &MetricGeometry,
    pot: &PotentialEvaluator,
    edge: usize,
    ells: &[f64],
    tol: f64,
) -> Result<EdgeClassReport, GeometryError> {
    let polytope = geom.polytope();
    let data = geom.data();
    assert!(
        !data.cusps().iter().any(|c| c.edge == edge),
        "edge {edge} is a cusp edge; use cusp_residual"
    );
    let coeff = if data.variant() == Variant::Conical {
        1.0 / (2.0 * polytope.theta(edge))
    } else {
        0.5
    };
    let nu = polytope.normal_v(edge);
    let points = approach_points(polytope, data, edge, ells);

    let mut w_values = Vec::new();
    let mut grad_norms = Vec::new();
    let mut hess_norms = Vec::new();
    for (&ell, &x) in ells.iter().zip(&points) {
        let u = pot.value(x)?;
        let w = u - coeff * ell * ell.ln();
        w_values.push(w);

        let p = geom.invert_moment(x)?;
        let grad = data.xi(&p) - nu * (coeff * (ell.ln() + 1.0));
        grad_norms.push(grad.norm());

        let hess = geom.hessian_at(&p);
        let f = coeff / ell;
        let resid = [
            hess.m[0][0] - f * nu.x * nu.x,
            hess.m[0][1] - f * nu.x * nu.y,
            hess.m[1][1] - f * nu.y * nu.y,
        ];
        hess_norms.push(resid.iter().fold(0.0f64, |a, b| a.max(b.abs())));
    }

    let w_log_slope = log_fit_slope(ells, &w_values);
    let grad_log_slope = log_fit_slope(ells, &grad_norms);
    let scale_w = 1.0 + w_values.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let scale_h = 1.0 + hess_norms.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let pass = w_log_slope.abs() <= tol * scale_w
        && grad_log_slope.abs() <= tol * (1.0 + grad_norms.iter().cloned().fold(0.0, f64::max))
        && hess_norms.iter().all(|h| h.is_finite())
        && scale_h.is_finite();
    Ok(EdgeClassReport {
        edge,
        class: BoundaryClass::Guillemin { coeff },
        ells: ells.to_vec(),
        w_values,
        grad_norms,
        hess_norms,
        w_log_slope,
        grad_log_slope,
        pass,
    })
}

/// Certifies the Poincare-type class on a cusp edge k:
/// w = u + (alpha + beta ell_k) log ell_k - (1/2) sum_{j != k} ell_j log ell_j
/// bounded with bounded gradient, alpha = Lambda_k / 2 and beta of magnitude
/// |det(nu_{k+1}, nu_{k-1})| / 2. Both beta signs are attempted; the report
/// carries the sign that bounds the contracted gradient
/// nu_k . xi + |nu_k|^2 (alpha/ell + beta (log ell + 1)).
pub fn cusp_residual(
    geom: &MetricGeometry,
    pot: &PotentialEvaluator,
    edge: usize,
    ells: &[f64],
    tol: f64,
) -> Result<EdgeClassReport, GeometryError> {
    let polytope = geom.polytope();
    let data = geom.data();
    let cusp = data
        .cusps()
        .iter()
        .find(|c| c.edge == edge)
        .ok_or(GeometryError::NotACuspEdge { edge })?;
    let alpha = 0.5 * cusp.gap;
    let beta_mag = 0.5
        * (polytope.normal(edge + 1).det(polytope.normal(edge - 1)) as f64).abs();
    let nu = polytope.normal_v(edge);
    let n2 = nu.norm_sq();
    let points = approach_points(polytope, data, edge, ells);

    let eval = |beta: f64| -> Result<(Vec<f64>, Vec<f64>, f64, f64), GeometryError> {
        let mut w_values = Vec::new();
        let mut grads = Vec::new();
        for (&ell, &x) in ells.iter().zip(&points) {
            let u = pot.value(x)?;
            let mut w = u + (alpha + beta * ell) * ell.ln();
            for j in 0..polytope.d() {
                if j != edge {
                    let lj = polytope.ell(j, x);
                    w -= 0.5 * lj * lj.ln();
                }
            }
            w_values.push(w);

            let p = geom.invert_moment(x)?;
            let g = nu.dot(data.xi(&p)) + n2 * (alpha / ell + beta * (ell.ln() + 1.0));
            grads.push(g);
        }
        let ws = log_fit_slope(ells, &w_values);
        let gs = log_fit_slope(ells, &grads);
        Ok((w_values, grads, ws, gs))
    };

    let plus = eval(beta_mag)?;
    let minus = eval(-beta_mag)?;
    // The wrong sign leaves a 2 beta ell log ell term in w (vanishing) but a
    // log-divergent contracted gradient; select by the gradient slope.
    let (beta, (w_values, grad_norms, w_log_slope, grad_log_slope)) =
        if plus.3.abs() <= minus.3.abs() {
            (beta_mag, plus)
        } else {
            (-beta_mag, minus)
        };

    let scale_w = 1.0 + w_values.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let scale_g = 1.0 + grad_norms.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let pass = w_log_slope.abs() <= tol * scale_w && grad_log_slope.abs() <= tol * scale_g;
    Ok(EdgeClassReport {
        edge,
        class: BoundaryClass::Cusp { alpha, beta },
        ells: ells.to_vec(),
        w_values,
        grad_norms,
        hess_norms: Vec::new(),
        w_log_slope,
        grad_log_slope,
        pass,
    })
}

/// Residual of the cusp edge function identity ell_k(x) = rho_{k-1} over
/// chart probes around each pole: returns the max relative residual. When
/// every chart offset coincides (one pole serves all log terms, as in the
/// 3-edge single-cusp polytopes) the identity is exact; otherwise the other
/// poles' terms leave an O(r^2) remainder near the cusp, which
/// [`cusp_pole_residuals`] rate-checks.
pub fn cusp_edge_identity(geom: &MetricGeometry, probes: usize) -> f64 {
    let data = geom.data();
    let polytope = geom.polytope();
    let mut worst = 0.0f64;
    let scale = data.scale();
    for cusp in data.cusps() {
        for (a, b) in crate::sample::unit_square(probes) {
            let h = -data.offsets()[cusp.pole] + (a - 0.5) * 4.0 * scale;
            let r = scale * 10f64.powf(-2.0 + 3.0 * b);
            let p = data.chart_point(h, r).expect("r > 0");
            let x = data.moment(&p);
            let ell = polytope.ell(cusp.edge, x);
            let rho = p.rho[cusp.pole];
            worst = worst.max((ell - rho).abs() / (1.0 + rho));
        }
    }
    worst
}

/// |ell_k(x(-a_pole, r)) - r| maximized over cusp edges, one entry per probe
/// radius. At the pole's H value, rho_pole = r exactly, so these residuals
/// measure the O(r^2) remainder directly; successive entries at decade-spaced
/// radii should shrink quadratically.
pub fn cusp_pole_residuals(geom: &MetricGeometry, rs: &[f64]) -> Vec<f64> {
    let data = geom.data();
    let polytope = geom.polytope();
    rs.iter()
        .map(|&r| {
            let mut worst = 0.0f64;
            for cusp in data.cusps() {
                let h = -data.offsets()[cusp.pole];
                let p = data.chart_point(h, r).expect("r > 0");
                let ell = polytope.ell(cusp.edge, data.moment(&p));
                worst = worst.max((ell - r).abs());
            }
            worst
        })
        .collect()
}

/// Determinant product bound: delta = r^2 / (prod_i ell_i * prod_{k in I} ell_k)
/// stays within positive bounds on approach sequences to every edge.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DeltaReport {
    pub min: f64,
    pub max: f64,
    /// Per-edge tail ratio |delta(last) / delta(prev)| of the approach
    /// sequence; near 1 certifies stabilization.
    pub tail_ratios: Vec<f64>,
    pub pass: bool,
}

pub fn det_product_check(
    geom: &MetricGeometry,
    ells: &[f64],
    tail_tol: f64,
) -> Result<DeltaReport, GeometryError> {
    let polytope = geom.polytope();
    let data = geom.data();
    let cusp_weighted = data.variant() == Variant::Cusp;
    let delta_at = |x: Vec2| -> Result<f64, GeometryError> {
        let p = geom.invert_moment(x)?;
        let mut prod = 1.0;
        for j in 0..polytope.d() {
            prod *= polytope.ell(j, x);
        }
        if cusp_weighted {
            for cusp in data.cusps() {
                prod *= polytope.ell(cusp.edge, x);
            }
        }
        Ok(p.r * p.r / prod)
    };

    let mut min = f64::INFINITY;
    let mut max = 0.0f64;
    let mut tails = Vec::new();
    for edge in 0..polytope.d() {
        let mut seq = Vec::new();
        for x in approach_points(polytope, data, edge, ells) {
            let d = delta_at(x)?;
            min = min.min(d);
            max = max.max(d);
            seq.push(d);
        }
        let n = seq.len();
        tails.push(seq[n - 1] / seq[n - 2]);
    }
    // Interior sweep keeps the bounds honest away from the edges too.
    for x in geom.interior_samples(64) {
        let d = delta_at(x)?;
        min = min.min(d);
        max = max.max(d);
    }
    let pass = min > 0.0
        && max.is_finite()
        && tails
            .iter()
            .all(|t| t.is_finite() && (t - 1.0).abs() <= tail_tol);
    Ok(DeltaReport {
        min,
        max,
        tail_ratios: tails,
        pass,
    })
}
