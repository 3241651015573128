//! Moment polytopes of unbounded toric symplectic 4-manifolds.
//!
//! A polytope is the intersection of half-planes l_i(x) = <x, nu_i> + lambda_i >= 0
//! for i = 1..d, with primitive lattice normals ordered along the boundary so
//! that consecutive pairs form unimodular corners: det(nu_i, nu_{i+1}) = -1.
//! Edges 1 and d are the unbounded ones. A "strict" polytope opens into a
//! proper convex cone (det(nu_d, nu_1) > 0); a "parallel" one opens into a
//! strip (nu_d = -nu_1).
//!
//! Interior edges may be marked as cusp edges (the metric acquires a complete
//! Poincare-type end there and the edge is excised from the boundary image) or
//! given a cone angle 2*pi*theta, theta in (0,1]. The two sets are disjoint and
//! cusp edges are pairwise non-adjacent.
//!
//! All indices in this API are 0-based; display formatting is 1-based to match
//! the usual edge numbering.

use crate::rational::{f64_of, rat_of_f64, solve2_rat, Rat};
use crate::vec2::{egcd_i64, IMat2, IVec2, Vec2};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolytopeMode {
    /// The two unbounded edges span a proper cone.
    Strict,
    /// The two unbounded edges are antiparallel (strip-like end).
    Parallel,
}

impl fmt::Display for PolytopeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolytopeMode::Strict => write!(f, "strict"),
            PolytopeMode::Parallel => write!(f, "parallel"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub normal: IVec2,
    pub lambda: f64,
}

impl Edge {
    pub fn new(normal: IVec2, lambda: f64) -> Self {
        Edge { normal, lambda }
    }
}

/// One defect found by validation. Indices are reported 1-based.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum ValidationIssue {
    #[error("need at least 2 edges, got {0}")]
    TooFewEdges(usize),
    #[error("edge {edge}: normal {nx},{ny} is not a primitive lattice vector")]
    NonPrimitiveNormal { edge: usize, nx: i64, ny: i64 },
    #[error("edge {edge}: lambda is not finite")]
    NonFiniteLambda { edge: usize },
    #[error("edges {edge} and {next}: corner determinant {det} (must be -1, or +1 uniformly for a reversed listing)")]
    CornerNotUnimodular { edge: usize, next: usize, det: i64 },
    #[error("edge orientation is inconsistent: corner determinants mix +1 and -1")]
    InconsistentOrientation,
    #[error("mode is parallel but nu_d != -nu_1")]
    ParallelModeMismatch,
    #[error("mode is strict but the unbounded normals are parallel")]
    StrictModeParallelNormals,
    #[error("unbounded directions do not span a proper cone: det(nu_d, nu_1) = {det} <= 0")]
    ConeDegenerate { det: i64 },
    #[error("cusp index {index} out of range (interior edges are 2..{max})")]
    CuspIndexOutOfRange { index: usize, max: usize },
    #[error("cusp index {index} listed twice")]
    DuplicateCuspIndex { index: usize },
    #[error("cusp edges {a} and {b} are adjacent")]
    CuspEdgesAdjacent { a: usize, b: usize },
    #[error("edge {edge}: cone angle theta = {theta} outside (0, 1]")]
    ConeAngleOutOfRange { edge: usize, theta: f64 },
    #[error("edge {edge}: cone angle on an unbounded edge")]
    ConeAngleOnUnboundedEdge { edge: usize },
    #[error("edge {edge}: cone angle on a cusp edge")]
    ConeAngleOnCuspEdge { edge: usize },
}

/// Validation outcome: hard errors plus informational notes (an input listed in
/// reversed orientation or in a non-normalized frame is usable after
/// [`MomentPolytope::normalize`]).
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub errors: Vec<ValidationIssue>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pass() {
            writeln!(f, "valid")?;
        } else {
            for e in &self.errors {
                writeln!(f, "error: {e}")?;
            }
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Error)]
pub enum PolytopeError {
    #[error("invalid polytope data:\n{0}")]
    Invalid(ValidationReport),
    #[error("nut vector outside the admissible cone: {0}")]
    InadmissibleNut(String),
}

/// Half-plane description of the polytope together with its end mode, cusp
/// edges, and cone angles.
#[derive(Clone, Debug)]
pub struct MomentPolytope {
    edges: Vec<Edge>,
    mode: PolytopeMode,
    cusp_edges: Vec<usize>,
    cone_angles: BTreeMap<usize, f64>,
}

/// Checks raw polytope data and reports every defect found.
pub fn validate(
    edges: &[Edge],
    mode: PolytopeMode,
    cusp_edges: &[usize],
    cone_angles: &BTreeMap<usize, f64>,
) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let d = edges.len();
    if d < 2 {
        rep.errors.push(ValidationIssue::TooFewEdges(d));
        return rep;
    }
    for (i, e) in edges.iter().enumerate() {
        if !e.normal.is_primitive() {
            rep.errors.push(ValidationIssue::NonPrimitiveNormal {
                edge: i + 1,
                nx: e.normal.x,
                ny: e.normal.y,
            });
        }
        if !e.lambda.is_finite() {
            rep.errors.push(ValidationIssue::NonFiniteLambda { edge: i + 1 });
        }
    }
    if !rep.errors.is_empty() {
        return rep;
    }

    let dets: Vec<i64> = (0..d - 1)
        .map(|i| edges[i].normal.det(edges[i + 1].normal))
        .collect();
    let mut oriented: Option<Vec<IVec2>> = None;
    if dets.iter().all(|&v| v == -1) {
        oriented = Some(edges.iter().map(|e| e.normal).collect());
    } else if dets.iter().all(|&v| v == 1) {
        rep.notes
            .push("edges listed in reversed orientation; normalize() will reverse them".into());
        oriented = Some(edges.iter().rev().map(|e| e.normal).collect());
    } else if dets.iter().all(|&v| v.abs() == 1) {
        rep.errors.push(ValidationIssue::InconsistentOrientation);
    } else {
        for (i, &v) in dets.iter().enumerate() {
            if v.abs() != 1 {
                rep.errors.push(ValidationIssue::CornerNotUnimodular {
                    edge: i + 1,
                    next: i + 2,
                    det: v,
                });
            }
        }
    }

    if let Some(normals) = &oriented {
        let first = normals[0];
        let last = normals[d - 1];
        match mode {
            PolytopeMode::Parallel => {
                if last != -first {
                    rep.errors.push(ValidationIssue::ParallelModeMismatch);
                }
            }
            PolytopeMode::Strict => {
                let det = last.det(first);
                if det == 0 {
                    rep.errors.push(ValidationIssue::StrictModeParallelNormals);
                } else if det < 0 {
                    rep.errors.push(ValidationIssue::ConeDegenerate { det });
                }
            }
        }
        if first != IVec2::new(0, 1) || edges[0].lambda != 0.0 {
            rep.notes.push(
                "not in the normalized frame (nu_1 = (0,1), lambda_1 = 0); normalize() fixes this"
                    .into(),
            );
        }
    }

    let mut seen = Vec::new();
    for &k in cusp_edges {
        if k == 0 || k + 1 >= d {
            rep.errors.push(ValidationIssue::CuspIndexOutOfRange {
                index: k + 1,
                max: d.saturating_sub(1),
            });
            continue;
        }
        if seen.contains(&k) {
            rep.errors.push(ValidationIssue::DuplicateCuspIndex { index: k + 1 });
            continue;
        }
        seen.push(k);
    }
    seen.sort_unstable();
    for w in seen.windows(2) {
        if w[1] - w[0] < 2 {
            rep.errors.push(ValidationIssue::CuspEdgesAdjacent {
                a: w[0] + 1,
                b: w[1] + 1,
            });
        }
    }

    for (&j, &theta) in cone_angles {
        if !(theta > 0.0 && theta <= 1.0) || !theta.is_finite() {
            rep.errors.push(ValidationIssue::ConeAngleOutOfRange {
                edge: j + 1,
                theta,
            });
        }
        if j == 0 || j + 1 >= d {
            rep.errors
                .push(ValidationIssue::ConeAngleOnUnboundedEdge { edge: j + 1 });
        } else if seen.contains(&j) {
            rep.errors
                .push(ValidationIssue::ConeAngleOnCuspEdge { edge: j + 1 });
        }
    }

    rep
}

impl MomentPolytope {
    /// Builds a polytope, rejecting invalid data with the full defect list.
    pub fn new(
        edges: Vec<Edge>,
        mode: PolytopeMode,
        mut cusp_edges: Vec<usize>,
        cone_angles: BTreeMap<usize, f64>,
    ) -> Result<Self, PolytopeError> {
        let rep = validate(&edges, mode, &cusp_edges, &cone_angles);
        if !rep.pass() {
            return Err(PolytopeError::Invalid(rep));
        }
        cusp_edges.sort_unstable();
        Ok(MomentPolytope {
            edges,
            mode,
            cusp_edges,
            cone_angles,
        })
    }

    pub fn d(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    pub fn normal(&self, i: usize) -> IVec2 {
        self.edges[i].normal
    }

    pub fn normal_v(&self, i: usize) -> Vec2 {
        self.edges[i].normal.as_vec2()
    }

    pub fn mode(&self) -> PolytopeMode {
        self.mode
    }

    pub fn cusp_edges(&self) -> &[usize] {
        &self.cusp_edges
    }

    pub fn is_cusp(&self, i: usize) -> bool {
        self.cusp_edges.contains(&i)
    }

    pub fn cone_angles(&self) -> &BTreeMap<usize, f64> {
        &self.cone_angles
    }

    /// Cone angle of edge i (1 when unmarked).
    pub fn theta(&self, i: usize) -> f64 {
        self.cone_angles.get(&i).copied().unwrap_or(1.0)
    }

    pub fn lambda_rat(&self, i: usize) -> Rat {
        rat_of_f64(self.edges[i].lambda).expect("validated lambda is finite")
    }

    /// Affine edge function l_i(x) = <x, nu_i> + lambda_i.
    pub fn ell(&self, i: usize, x: Vec2) -> f64 {
        self.normal_v(i).dot(x) + self.edges[i].lambda
    }

    /// Smallest edge function value; positive iff x is interior.
    pub fn min_ell(&self, x: Vec2) -> f64 {
        (0..self.d())
            .map(|i| self.ell(i, x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains_interior(&self, x: Vec2) -> bool {
        self.min_ell(x) > 0.0
    }

    /// Exact vertex between consecutive edges i and i+1.
    pub fn vertex_rat(&self, i: usize) -> [Rat; 2] {
        let a = self.normal(i);
        let b = self.normal(i + 1);
        let m = [
            [
                Rat::from_integer(a.x.into()),
                Rat::from_integer(a.y.into()),
            ],
            [
                Rat::from_integer(b.x.into()),
                Rat::from_integer(b.y.into()),
            ],
        ];
        let rhs = [-self.lambda_rat(i), -self.lambda_rat(i + 1)];
        solve2_rat(&m, &rhs).expect("consecutive normals are unimodular")
    }

    pub fn vertex_f64(&self, i: usize) -> Vec2 {
        let v = self.vertex_rat(i);
        Vec2::new(f64_of(&v[0]), f64_of(&v[1]))
    }

    /// All finite vertices (between edges i and i+1 for i = 0..d-2).
    pub fn vertices_f64(&self) -> Vec<Vec2> {
        (0..self.d() - 1).map(|i| self.vertex_f64(i)).collect()
    }

    pub fn is_normalized(&self) -> bool {
        self.normal(0) == IVec2::new(0, 1) && self.edges[0].lambda == 0.0
    }

    /// Admissibility of the axisymmetric parameter: in strict mode the vector
    /// must pair nonnegatively with both unbounded normals; in parallel mode it
    /// must be parallel to nu_1 and pair nonnegatively with every cusp normal.
    pub fn validate_nut(&self, nut: Vec2) -> Result<(), PolytopeError> {
        if !nut.is_finite() {
            return Err(PolytopeError::InadmissibleNut("nut is not finite".into()));
        }
        let nu1 = self.normal_v(0);
        let nud = self.normal_v(self.d() - 1);
        match self.mode {
            PolytopeMode::Strict => {
                let d1 = nut.det(nu1);
                let dd = nut.det(nud);
                if d1 < 0.0 || dd < 0.0 {
                    return Err(PolytopeError::InadmissibleNut(format!(
                        "det(nut, nu_1) = {d1}, det(nut, nu_d) = {dd}; both must be >= 0"
                    )));
                }
            }
            PolytopeMode::Parallel => {
                let d1 = nut.det(nu1);
                if d1 != 0.0 {
                    return Err(PolytopeError::InadmissibleNut(format!(
                        "det(nut, nu_1) = {d1}; parallel mode needs nut parallel to nu_1"
                    )));
                }
                for &k in &self.cusp_edges {
                    let dk = nut.det(self.normal_v(k));
                    if dk < 0.0 {
                        return Err(PolytopeError::InadmissibleNut(format!(
                            "det(nut, nu_{}) = {dk} < 0",
                            k + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Brings the data to the normalized frame: edges oriented so corner
    /// determinants are -1, nu_1 = (0,1) via a unimodular map, lambda_1 = 0 via
    /// a translation. Returns the normalized polytope, the transformed nut, and
    /// the transform applied.
    pub fn normalize(&self, nut: Vec2) -> Result<(MomentPolytope, Vec2, NormalizingTransform), PolytopeError> {
        let d = self.d();
        let dets: Vec<i64> = (0..d - 1)
            .map(|i| self.normal(i).det(self.normal(i + 1)))
            .collect();
        let reversed = if dets.iter().all(|&v| v == -1) {
            false
        } else if dets.iter().all(|&v| v == 1) {
            true
        } else {
            let rep = validate(&self.edges, self.mode, &self.cusp_edges, &self.cone_angles);
            return Err(PolytopeError::Invalid(rep));
        };

        let mut edges = self.edges.clone();
        let mut cusps = self.cusp_edges.clone();
        let mut angles = self.cone_angles.clone();
        if reversed {
            edges.reverse();
            cusps = cusps.iter().map(|&k| d - 1 - k).collect();
            angles = angles.iter().map(|(&k, &t)| (d - 1 - k, t)).collect();
        }

        // Unimodular map A with A nu_1 = (0, 1): rows (q, -p) and a Bezout pair.
        let p = edges[0].normal.x;
        let q = edges[0].normal.y;
        let (g, s, t) = egcd_i64(p, q);
        debug_assert_eq!(g, 1, "validated normals are primitive");
        let linear = IMat2::new(q, -p, s, t);
        debug_assert_eq!(linear.det(), 1);

        for e in &mut edges {
            e.normal = linear.mul_ivec(e.normal);
        }
        let new_nut = linear.mul_vec(nut);

        // Translation t_x = (0, lambda_1) sends lambda_1 to 0; offsets adjust by
        // lambda_i -> lambda_i - <t_x, nu_i>, computed exactly.
        let lambda1 = rat_of_f64(edges[0].lambda).expect("finite lambda");
        let translation = Vec2::new(0.0, edges[0].lambda);
        for e in &mut edges {
            let li = rat_of_f64(e.lambda).expect("finite lambda");
            let adj = &li - &lambda1 * Rat::from_integer(e.normal.y.into());
            e.lambda = f64_of(&adj);
        }

        let normalized = MomentPolytope::new(edges, self.mode, cusps, angles)?;
        Ok((
            normalized,
            new_nut,
            NormalizingTransform {
                reversed,
                linear,
                translation,
            },
        ))
    }
}

/// Record of the frame change applied by [`MomentPolytope::normalize`]:
/// normals map by `linear`, points by x -> linear^{-T} x + translation.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct NormalizingTransform {
    pub reversed: bool,
    pub linear: IMat2,
    pub translation: Vec2,
}

impl NormalizingTransform {
    pub fn is_identity(&self) -> bool {
        !self.reversed && self.linear == IMat2::identity() && self.translation == Vec2::ZERO
    }

    pub fn apply_point(&self, x: Vec2) -> Vec2 {
        self.linear
            .inv_transpose()
            .expect("unimodular")
            .mul_vec(x)
            + self.translation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec2::IVec2;

    pub(crate) fn hs_edges() -> Vec<Edge> {
        vec![
            Edge::new(IVec2::new(0, 1), 0.0),
            Edge::new(IVec2::new(1, 1), -1.0),
            Edge::new(IVec2::new(1, 0), 0.0),
        ]
    }

    #[test]
    fn hs_polytope_validates() {
        let p = MomentPolytope::new(hs_edges(), PolytopeMode::Strict, vec![1], BTreeMap::new())
            .unwrap();
        assert!(p.is_normalized());
        assert_eq!(p.d(), 3);
        assert!(p.is_cusp(1));
        // vertices: edges (1,2) meet at (1,0)... l_1 = x2, l_2 = x1 + x2 - 1, l_3 = x1.
        let v01 = p.vertex_f64(0);
        assert_eq!(v01, Vec2::new(1.0, 0.0));
        let v12 = p.vertex_f64(1);
        assert_eq!(v12, Vec2::new(0.0, 1.0));
    }

    #[test]
    fn adjacency_and_range_rejected() {
        let edges = vec![
            Edge::new(IVec2::new(0, 1), 0.0),
            Edge::new(IVec2::new(1, 2), 0.0),
            Edge::new(IVec2::new(1, 1), 1.0),
            Edge::new(IVec2::new(2, 1), 4.0),
            Edge::new(IVec2::new(1, 0), 4.0),
        ];
        let err = MomentPolytope::new(
            edges.clone(),
            PolytopeMode::Strict,
            vec![1, 2],
            BTreeMap::new(),
        )
        .unwrap_err();
        match err {
            PolytopeError::Invalid(rep) => {
                assert!(rep
                    .errors
                    .iter()
                    .any(|e| matches!(e, ValidationIssue::CuspEdgesAdjacent { .. })));
            }
            other => panic!("unexpected: {other}"),
        }
        let err = MomentPolytope::new(edges, PolytopeMode::Strict, vec![0], BTreeMap::new())
            .unwrap_err();
        match err {
            PolytopeError::Invalid(rep) => {
                assert!(rep
                    .errors
                    .iter()
                    .any(|e| matches!(e, ValidationIssue::CuspIndexOutOfRange { .. })));
            }
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn cone_angle_checks() {
        let mut angles = BTreeMap::new();
        angles.insert(1usize, 0.5);
        let p = MomentPolytope::new(hs_edges(), PolytopeMode::Strict, vec![], angles).unwrap();
        assert_eq!(p.theta(1), 0.5);
        assert_eq!(p.theta(0), 1.0);

        let mut bad = BTreeMap::new();
        bad.insert(1usize, 1.5);
        assert!(MomentPolytope::new(hs_edges(), PolytopeMode::Strict, vec![], bad).is_err());

        let mut on_cusp = BTreeMap::new();
        on_cusp.insert(1usize, 0.5);
        assert!(
            MomentPolytope::new(hs_edges(), PolytopeMode::Strict, vec![1], on_cusp).is_err()
        );
    }

    #[test]
    fn mixed_orientation_rejected() {
        let edges = vec![
            Edge::new(IVec2::new(0, 1), 0.0),
            Edge::new(IVec2::new(-1, 1), 0.0),
            Edge::new(IVec2::new(-1, 0), 0.0),
        ];
        // dets: det((0,1),(-1,1)) = 1, det((-1,1),(-1,0)) = 1 -> uniformly reversed, fine.
        let rep = validate(&edges, PolytopeMode::Strict, &[], &BTreeMap::new());
        assert!(rep.pass());
        let edges_bad = vec![
            Edge::new(IVec2::new(0, 1), 0.0),
            Edge::new(IVec2::new(1, 1), 0.0),
            Edge::new(IVec2::new(1, 2), 0.0),
        ];
        let rep = validate(&edges_bad, PolytopeMode::Strict, &[], &BTreeMap::new());
        assert!(!rep.pass());
    }

    #[test]
    fn normalize_reverses_and_maps_first_normal() {
        // HS listed in reverse orientation with a frame twist.
        let twist = IMat2::new(1, 0, 1, 1); // det 1
        let mut edges = hs_edges();
        for e in &mut edges {
            e.normal = twist.mul_ivec(e.normal);
        }
        edges.reverse();
        let p = MomentPolytope::new(edges, PolytopeMode::Strict, vec![1], BTreeMap::new()).unwrap();
        let (n, _nut, tr) = p.normalize(Vec2::ZERO).unwrap();
        assert!(tr.reversed);
        assert!(n.is_normalized());
        assert_eq!(n.cusp_edges(), &[1]);
        // The normalized chain must be HS up to the common frame.
        let dets: Vec<i64> = (0..n.d() - 1)
            .map(|i| n.normal(i).det(n.normal(i + 1)))
            .collect();
        assert!(dets.iter().all(|&v| v == -1));
    }

    #[test]
    fn normalize_translates_lambda1_to_zero() {
        let edges = vec![
            Edge::new(IVec2::new(0, 1), 2.5),
            Edge::new(IVec2::new(1, 1), -1.0),
            Edge::new(IVec2::new(1, 0), 0.0),
        ];
        let p = MomentPolytope::new(edges, PolytopeMode::Strict, vec![1], BTreeMap::new()).unwrap();
        let (n, _, tr) = p.normalize(Vec2::ZERO).unwrap();
        assert_eq!(n.edge(0).lambda, 0.0);
        assert_eq!(n.edge(1).lambda, -3.5);
        assert_eq!(n.edge(2).lambda, 0.0);
        // Points move by the translation; the edge functions are preserved.
        let x = Vec2::new(0.3, 0.4);
        let xn = tr.apply_point(x);
        for i in 0..3 {
            assert!((p.ell(i, x) - n.ell(i, xn)).abs() < 1e-12);
        }
    }

    #[test]
    fn nut_admissibility() {
        let p = MomentPolytope::new(hs_edges(), PolytopeMode::Strict, vec![1], BTreeMap::new())
            .unwrap();
        // Cone between nu_d = (1,0) and nu_1 = (0,1): det(nut, (0,1)) = nut.x >= 0,
        // det(nut, (1,0)) = -nut.y >= 0.
        assert!(p.validate_nut(Vec2::ZERO).is_ok());
        assert!(p.validate_nut(Vec2::new(0.4, -0.3)).is_ok());
        assert!(p.validate_nut(Vec2::new(0.0, -0.5)).is_ok());
        assert!(p.validate_nut(Vec2::new(-1.0, 0.0)).is_err());
        assert!(p.validate_nut(Vec2::new(0.0, 0.5)).is_err());
    }

    #[test]
    fn parallel_mode_nut() {
        let edges = vec![
            Edge::new(IVec2::new(0, 1), 0.0),
            Edge::new(IVec2::new(1, 0), 0.0),
            Edge::new(IVec2::new(0, -1), 1.0),
        ];
        let p = MomentPolytope::new(edges, PolytopeMode::Parallel, vec![1], BTreeMap::new())
            .unwrap();
        assert!(p.validate_nut(Vec2::new(0.0, -0.4)).is_ok());
        assert!(p.validate_nut(Vec2::new(0.0, 0.0)).is_ok());
        // det((0,c),(1,0)) = -c must be >= 0 at the cusp normal.
        assert!(p.validate_nut(Vec2::new(0.0, 0.4)).is_err());
        assert!(p.validate_nut(Vec2::new(0.3, 0.0)).is_err());
    }
}
