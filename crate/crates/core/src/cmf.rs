//! Combinatorial multivector fields built from sampled vector clouds.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;
use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{make_grid_points, triangulate, GridSpec, Point, SimplexId, SimplicialComplex};
use crate::homology::relative_betti;

const POINT_TOLERANCE: f64 = 1e-9;

/// Grid points with one vector attached to each.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorCloud {
    pub points: Vec<Point>,
    pub vectors: Vec<[f64; 2]>,
    pub grid: GridSpec,
}

impl VectorCloud {
    /// Attaches `vectors` (row-major) to the points of `grid`.
    pub fn on_grid(grid: GridSpec, vectors: Vec<[f64; 2]>) -> Result<Self> {
        let points = make_grid_points(&grid)?;
        let cloud = VectorCloud { points, vectors, grid };
        cloud.validate()?;
        Ok(cloud)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() != self.vectors.len() {
            return Err(Error::validation(format!(
                "cloud has {} points but {} vectors",
                self.points.len(),
                self.vectors.len()
            )));
        }
        let expected = make_grid_points(&self.grid)?;
        check_points(&self.points, &expected)?;
        if let Some(i) = self.vectors.iter().position(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::validation(format!("vector {i} is not finite: {:?}", self.vectors[i])));
        }
        Ok(())
    }

    /// Writes the `x,y,vx,vy` CSV form.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "vx", "vy"])?;
        for (p, v) in self.points.iter().zip(&self.vectors) {
            w.write_record([p[0], p[1], v[0], v[1]].iter().map(|x| format_float(*x)))?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Reads the `x,y,vx,vy` CSV form. The grid is recovered from the
    /// bounding box and the number of distinct coordinates per axis.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["x", "y", "vx", "vy"] {
            return Err(Error::validation(format!("expected header x,y,vx,vy, got {}", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut points = Vec::new();
        let mut vectors = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { path: "<field csv>".into(), line: line + 2, msg: e.to_string() })?;
            if vals.len() != 4 {
                return Err(Error::Parse { path: "<field csv>".into(), line: line + 2, msg: "expected 4 columns".into() });
            }
            points.push([vals[0], vals[1]]);
            vectors.push([vals[2], vals[3]]);
        }
        if points.len() < 4 {
            return Err(Error::validation("field CSV needs at least a 2x2 grid"));
        }
        let px = points.iter().take_while(|p| p[1] == points[0][1]).count();
        if px < 2 || points.len() % px != 0 {
            return Err(Error::validation("field CSV rows do not form a row-major grid"));
        }
        let py = points.len() / px;
        let last = points[points.len() - 1];
        let grid = GridSpec::new((points[0][0], last[0]), (points[0][1], last[1]), px, py)?;
        let cloud = VectorCloud { points, vectors, grid };
        cloud.validate()?;
        Ok(cloud)
    }
}

/// Shortest decimal rendering that round-trips.
pub(crate) fn format_float(x: f64) -> String {
    format!("{x:?}")
}

fn check_points(actual: &[Point], expected: &[Point]) -> Result<()> {
    if actual.len() != expected.len() {
        return Err(Error::validation(format!(
            "cloud has {} points, complex has {}",
            actual.len(),
            expected.len()
        )));
    }
    for (i, (a, e)) in actual.iter().zip(expected).enumerate() {
        if (a[0] - e[0]).abs() > POINT_TOLERANCE || (a[1] - e[1]).abs() > POINT_TOLERANCE {
            return Err(Error::validation(format!(
                "cloud point {i} at ({}, {}) does not match grid point ({}, {})",
                a[0], a[1], e[0], e[1]
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multivector {
    pub id: usize,
    /// Ascending simplex ids.
    pub simplices: Vec<SimplexId>,
    pub critical: bool,
}

impl Multivector {
    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn as_set(&self) -> BTreeSet<SimplexId> {
        self.simplices.iter().copied().collect()
    }
}

/// A partition of a complex into orderly convex multivectors.
#[derive(Clone, Debug)]
pub struct Cmf {
    complex: Arc<SimplicialComplex>,
    multivectors: Vec<Multivector>,
    owner: Vec<usize>,
}

impl Cmf {
    /// Builds a field from an arbitrary group labelling of the simplices.
    /// Multivector ids are renumbered densely in order of their minimal
    /// simplex. Fails unless every group is orderly convex.
    pub fn from_groups(complex: Arc<SimplicialComplex>, groups: &[usize]) -> Result<Self> {
        if groups.len() != complex.len() {
            return Err(Error::validation(format!(
                "partition labels {} simplices, complex has {}",
                groups.len(),
                complex.len()
            )));
        }
        let mut members: BTreeMap<usize, Vec<SimplexId>> = BTreeMap::new();
        for (sid, &g) in groups.iter().enumerate() {
            members.entry(g).or_default().push(sid);
        }
        let mut sets: Vec<Vec<SimplexId>> = members.into_values().collect();
        sets.sort_by_key(|s| s[0]);

        let mut owner = vec![0; complex.len()];
        for (id, set) in sets.iter().enumerate() {
            for &s in set {
                owner[s] = id;
            }
        }
        let critical: Vec<bool> = sets
            .par_iter()
            .map(|set| is_critical(&complex, &set.iter().copied().collect()))
            .collect::<Result<_>>()?;
        let multivectors = sets
            .into_iter()
            .zip(critical)
            .enumerate()
            .map(|(id, (simplices, critical))| Multivector { id, simplices, critical })
            .collect();
        Ok(Cmf { complex, multivectors, owner })
    }

    /// Builds a field from explicit multivectors given as simplex id sets.
    pub fn from_multivectors(complex: Arc<SimplicialComplex>, sets: &[Vec<SimplexId>]) -> Result<Self> {
        let mut groups = vec![usize::MAX; complex.len()];
        for (g, set) in sets.iter().enumerate() {
            for &s in set {
                if s >= complex.len() {
                    return Err(Error::UnknownSimplex(s));
                }
                if groups[s] != usize::MAX {
                    return Err(Error::validation(format!("simplex {s} appears in two multivectors")));
                }
                groups[s] = g;
            }
        }
        if let Some(s) = groups.iter().position(|&g| g == usize::MAX) {
            return Err(Error::validation(format!("simplex {s} is not covered by any multivector")));
        }
        Self::from_groups(complex, &groups)
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn complex_arc(&self) -> &Arc<SimplicialComplex> {
        &self.complex
    }

    pub fn multivectors(&self) -> &[Multivector] {
        &self.multivectors
    }

    pub fn multivector(&self, id: usize) -> &Multivector {
        &self.multivectors[id]
    }

    pub fn len(&self) -> usize {
        self.multivectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multivectors.is_empty()
    }

    /// Id of the multivector containing simplex `sid`.
    pub fn owner(&self, sid: SimplexId) -> usize {
        self.owner[sid]
    }

    pub fn owners(&self) -> &[usize] {
        &self.owner
    }

    pub fn to_json(&self) -> Result<CmfJson> {
        let grid = *self
            .complex
            .grid()
            .ok_or_else(|| Error::validation("only grid complexes can be serialized"))?;
        Ok(CmfJson {
            grid,
            multivectors: self
                .multivectors
                .iter()
                .map(|mv| MultivectorJson {
                    id: mv.id,
                    simplices: mv.simplices.iter().map(|&s| self.complex.simplex(s).vertices().to_vec()).collect(),
                    critical: mv.critical,
                })
                .collect(),
        })
    }

    /// Rebuilds a field from its JSON form, triangulating the stored grid.
    pub fn from_json(json: &CmfJson) -> Result<Self> {
        let complex = Arc::new(triangulate(&json.grid)?);
        Self::from_json_with_complex(json, complex)
    }

    /// As [`Cmf::from_json`], reusing an already built complex for the grid.
    pub fn from_json_with_complex(json: &CmfJson, complex: Arc<SimplicialComplex>) -> Result<Self> {
        if complex.grid() != Some(&json.grid) {
            return Err(Error::validation("complex does not match the CMF grid"));
        }
        let sets = json
            .multivectors
            .iter()
            .map(|mv| {
                mv.simplices
                    .iter()
                    .map(|verts| complex.find(verts).ok_or_else(|| Error::validation(format!("no simplex {verts:?} in grid"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_multivectors(complex, &sets)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultivectorJson {
    pub id: usize,
    pub simplices: Vec<Vec<usize>>,
    pub critical: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmfJson {
    pub grid: GridSpec,
    pub multivectors: Vec<MultivectorJson>,
}

fn angle_between(a: [f64; 2], b: [f64; 2]) -> f64 {
    let cross = a[0] * b[1] - a[1] * b[0];
    let dot = a[0] * b[0] + a[1] * b[1];
    cross.abs().atan2(dot)
}

/// Initial group of every simplex: the vertex id it is attached to, or its
/// own id when no vertex qualifies.
///
/// A vertex `p` of a simplex `σ` qualifies when its vector is nonzero and
/// makes an angle of at most `π/2 − alpha` with the ray from `p` to the
/// barycenter of `σ`; the best aligned one wins, ties to the lower index.
pub fn attach_simplices(complex: &SimplicialComplex, vectors: &[[f64; 2]], alpha: f64) -> Vec<usize> {
    let threshold = FRAC_PI_2 - alpha;
    let points = complex.points();
    complex
        .simplices()
        .iter()
        .map(|s| {
            if s.dim() == 0 {
                return s.id();
            }
            let center = complex.barycenter(s.id());
            let mut best: Option<(f64, usize)> = None;
            for &p in s.vertices() {
                let v = vectors[p];
                if v[0] == 0.0 && v[1] == 0.0 {
                    continue;
                }
                let theta = angle_between(v, [center[0] - points[p][0], center[1] - points[p][1]]);
                if theta <= threshold && best.map_or(true, |(t, _)| theta < t) {
                    best = Some((theta, p));
                }
            }
            match best {
                Some((_, p)) => complex.find(&[p]).expect("every point is a vertex"),
                None => s.id(),
            }
        })
        .collect()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    /// Merges the set of `from` into the set of `into`; the smaller
    /// representative survives.
    fn union(&mut self, from: usize, into: usize) {
        let (a, b) = (self.find(from), self.find(into));
        if a != b {
            let (lo, hi) = (a.min(b), a.max(b));
            self.0[hi] = lo;
        }
    }
}

/// Coarsens a partition until every group is orderly convex.
///
/// Whenever `σ1 ⪯ τ ⪯ σ2` with `σ1, σ2` in one group and `τ` in another, the
/// group of `τ` is merged into that of `σ1`. Groups are only ever merged.
/// The result labels each simplex with the minimal simplex id of its group.
pub fn repair_convexity(complex: &SimplicialComplex, groups: &[usize]) -> Vec<usize> {
    let n = complex.len();
    // Canonical representative per input group: its minimal simplex.
    let mut first: BTreeMap<usize, usize> = BTreeMap::new();
    for (sid, &g) in groups.iter().enumerate() {
        first.entry(g).or_insert(sid);
    }
    let mut uf = UnionFind((0..n).collect());
    for (sid, g) in groups.iter().enumerate() {
        uf.union(sid, first[g]);
    }

    let closures: Vec<Vec<SimplexId>> = (0..n).map(|s| complex.closure_of(s)).collect();
    let stars: Vec<Vec<SimplexId>> = (0..n).map(|s| complex.star_of(s)).collect();
    loop {
        let mut changed = false;
        for tau in 0..n {
            if closures[tau].len() == 1 || stars[tau].len() == 1 {
                continue;
            }
            let below: BTreeSet<usize> =
                closures[tau].iter().filter(|&&s| s != tau).map(|&s| uf.find(s)).collect();
            let own = uf.find(tau);
            let hit = stars[tau]
                .iter()
                .filter(|&&s| s != tau)
                .map(|&s| uf.find(s))
                .find(|g| *g != own && below.contains(g));
            if let Some(g) = hit {
                uf.union(tau, g);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).map(|s| uf.find(s)).collect()
}

/// Whether the relative homology of `(cl V, cl V \ V)` over Z/2 is nonzero.
pub fn is_critical(complex: &SimplicialComplex, set: &BTreeSet<SimplexId>) -> Result<bool> {
    if set.is_empty() || !complex.is_orderly_convex(set) {
        return Err(Error::NotConvex(set.len()));
    }
    Ok(relative_betti(complex, set).iter().any(|&b| b != 0))
}

/// `Σ (−1)^dim σ` over the set.
pub fn euler_characteristic(complex: &SimplicialComplex, set: &BTreeSet<SimplexId>) -> i64 {
    set.iter().map(|&s| if complex.dim(s) % 2 == 0 { 1 } else { -1 }).sum()
}

/// Builds a multivector field from a vector cloud sampled at the vertices
/// of `complex`. `alpha` is the angular slack in radians, in `[0, π/2]`.
pub fn build_cmf(complex: Arc<SimplicialComplex>, cloud: &VectorCloud, alpha: f64) -> Result<Cmf> {
    if !(0.0..=FRAC_PI_2).contains(&alpha) {
        return Err(Error::validation(format!("alpha must lie in [0, pi/2], got {alpha}")));
    }
    if cloud.vectors.len() != cloud.points.len() {
        return Err(Error::validation("cloud point and vector counts differ"));
    }
    check_points(&cloud.points, complex.points())?;
    let groups = attach_simplices(&complex, &cloud.vectors, alpha);
    let groups = repair_convexity(&complex, &groups);
    Cmf::from_groups(complex, &groups)
}
