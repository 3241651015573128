//! Polytope description files and their translation onto the library types.
//!
//! Edge indices are 1-based in every file and message, matching the usual
//! labeling of the edges as l_1 ... l_d; the library is 0-based and the shift
//! happens here and nowhere else.

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;
use toric_sfk::polytope::{Edge, MomentPolytope, NormalizingTransform, PolytopeMode};
use toric_sfk::vec2::{IVec2, Vec2};

/// On-disk polytope description.
///
/// ```json
/// {
///   "normals": [[0, 1], [1, 1], [1, 0]],
///   "lambdas": [0, -1, 0],
///   "cusp_edges": [2],
///   "cone_angles": {"2": 0.5},
///   "nut": [0.0, 0.0]
/// }
/// ```
///
/// `mode` may be given as "strict" or "parallel"; when absent it is inferred
/// from the unbounded normals (parallel iff nu_d = -nu_1).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeFile {
    pub normals: Vec<[i64; 2]>,
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub cusp_edges: Vec<usize>,
    #[serde(default)]
    pub cone_angles: BTreeMap<String, f64>,
    #[serde(default)]
    pub nut: Option<[f64; 2]>,
}

/// A loaded, validated, normalized configuration.
pub struct LoadedPolytope {
    pub polytope: MomentPolytope,
    pub nut: Vec2,
    pub transform: NormalizingTransform,
}

/// Reads and parses the file. Parse failures (unreadable file, bad JSON,
/// malformed indices) map to exit code 2; the caller converts the error kind.
pub fn parse_file(path: &Path) -> Result<PolytopeFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let file: PolytopeFile =
        serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))?;
    if file.normals.len() != file.lambdas.len() {
        bail!(
            "{} normals but {} lambdas",
            file.normals.len(),
            file.lambdas.len()
        );
    }
    if file.normals.len() < 2 {
        bail!("need at least two edges");
    }
    Ok(file)
}

/// Builds the validated polytope, translating 1-based indices and inferring
/// the end mode if absent, then normalizes the presentation (first normal
/// (0, 1), first support constant 0).
pub fn build(file: &PolytopeFile) -> Result<LoadedPolytope> {
    let d = file.normals.len();
    let edges: Vec<Edge> = file
        .normals
        .iter()
        .zip(&file.lambdas)
        .map(|(&[a, b], &l)| Edge::new(IVec2::new(a, b), l))
        .collect();

    let mode = match file.mode.as_deref() {
        Some("strict") => PolytopeMode::Strict,
        Some("parallel") => PolytopeMode::Parallel,
        Some(other) => bail!("unknown mode {other:?}; expected \"strict\" or \"parallel\""),
        None => {
            let first = edges[0].normal;
            let last = edges[d - 1].normal;
            if last == IVec2::new(-first.x, -first.y) {
                PolytopeMode::Parallel
            } else {
                PolytopeMode::Strict
            }
        }
    };

    let to_zero_based = |k: usize, what: &str| -> Result<usize> {
        if k == 0 || k > d {
            bail!("{what} index {k} out of range 1..={d}");
        }
        Ok(k - 1)
    };
    let cusp_edges: Vec<usize> = file
        .cusp_edges
        .iter()
        .map(|&k| to_zero_based(k, "cusp edge"))
        .collect::<Result<_>>()?;
    let mut cone_angles = BTreeMap::new();
    for (key, &theta) in &file.cone_angles {
        let k: usize = key
            .parse()
            .map_err(|_| anyhow!("cone angle key {key:?} is not an edge index"))?;
        cone_angles.insert(to_zero_based(k, "cone edge")?, theta);
    }

    let polytope = MomentPolytope::new(edges, mode, cusp_edges, cone_angles)
        .map_err(|e| anyhow!("invalid polytope: {e}"))?;
    let nut = file
        .nut
        .map(|[a, b]| Vec2::new(a, b))
        .unwrap_or(Vec2::ZERO);
    let (polytope, nut, transform) = polytope
        .normalize(nut)
        .map_err(|e| anyhow!("cannot normalize polytope: {e}"))?;
    polytope
        .validate_nut(nut)
        .map_err(|e| anyhow!("invalid nut vector: {e}"))?;
    Ok(LoadedPolytope {
        polytope,
        nut,
        transform,
    })
}
