//! Regular-grid simplicial complexes in the plane.
//!
//! Simplices are stored with strictly increasing vertex lists and dense ids
//! assigned in order of dimension, then lexicographically by vertices. The
//! face relation is kept both ways (`faces` / `cofaces`) so closures and
//! stars are cheap graph walks.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type SimplexId = usize;
pub type Point = [f64; 2];

/// Axis-aligned rectangle sampled by `px * py` equally spaced points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub px: usize,
    pub py: usize,
}

impl GridSpec {
    pub fn new(x: (f64, f64), y: (f64, f64), px: usize, py: usize) -> Result<Self> {
        let spec = GridSpec { x_min: x.0, x_max: x.1, y_min: y.0, y_max: y.1, px, py };
        spec.validate()?;
        Ok(spec)
    }

    /// Square grid `[lo, hi]^2` with `n` points per axis.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new((lo, hi), (lo, hi), n, n)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::validation("grid bounds must be finite"));
        }
        if !(self.x_min < self.x_max) {
            return Err(Error::validation(format!(
                "grid requires x_min < x_max, got {} >= {}",
                self.x_min, self.x_max
            )));
        }
        if !(self.y_min < self.y_max) {
            return Err(Error::validation(format!(
                "grid requires y_min < y_max, got {} >= {}",
                self.y_min, self.y_max
            )));
        }
        if self.px < 2 {
            return Err(Error::validation(format!("grid requires px >= 2, got {}", self.px)));
        }
        if self.py < 2 {
            return Err(Error::validation(format!("grid requires py >= 2, got {}", self.py)));
        }
        Ok(())
    }

    /// Distance between neighbouring points along each axis.
    pub fn spacing(&self) -> (f64, f64) {
        (
            (self.x_max - self.x_min) / (self.px - 1) as f64,
            (self.y_max - self.y_min) / (self.py - 1) as f64,
        )
    }

    pub fn num_points(&self) -> usize {
        self.px * self.py
    }

    /// Row-major index of the grid point in column `i`, row `j`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.px + i
    }

    fn coord(lo: f64, hi: f64, j: usize, n: usize) -> f64 {
        // Pin the last sample to `hi` exactly.
        if j + 1 == n {
            hi
        } else {
            lo + (hi - lo) * j as f64 / (n - 1) as f64
        }
    }
}

/// Grid sample points, row-major by y then x.
pub fn make_grid_points(spec: &GridSpec) -> Result<Vec<Point>> {
    spec.validate()?;
    let mut points = Vec::with_capacity(spec.num_points());
    for j in 0..spec.py {
        let y = GridSpec::coord(spec.y_min, spec.y_max, j, spec.py);
        for i in 0..spec.px {
            points.push([GridSpec::coord(spec.x_min, spec.x_max, i, spec.px), y]);
        }
    }
    Ok(points)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex {
    vertices: Vec<usize>,
    id: SimplexId,
}

impl Simplex {
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn id(&self) -> SimplexId {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// A 2-dimensional simplicial complex together with its face poset.
#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    points: Vec<Point>,
    simplices: Vec<Simplex>,
    faces: Vec<Vec<SimplexId>>,
    cofaces: Vec<Vec<SimplexId>>,
    index: HashMap<Vec<usize>, SimplexId>,
    dim_start: [usize; 4],
    grid: Option<GridSpec>,
}

impl SimplicialComplex {
    /// Builds the face-closed complex spanned by `maximal` simplices over
    /// `points`. Every point becomes a vertex even if no simplex uses it.
    pub fn from_simplices(points: Vec<Point>, maximal: &[Vec<usize>]) -> Result<Self> {
        let n = points.len();
        let mut all: BTreeSet<(usize, Vec<usize>)> = (0..n).map(|v| (0, vec![v])).collect();
        for s in maximal {
            let mut verts = s.clone();
            verts.sort_unstable();
            verts.dedup();
            if verts.len() != s.len() || verts.is_empty() || verts.len() > 3 {
                return Err(Error::validation(format!("invalid simplex {s:?}")));
            }
            if let Some(&v) = verts.iter().find(|&&v| v >= n) {
                return Err(Error::validation(format!("simplex {s:?} references missing vertex {v}")));
            }
            for mask in 1u32..(1 << verts.len()) {
                let face: Vec<usize> =
                    verts.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, &v)| v).collect();
                all.insert((face.len() - 1, face));
            }
        }

        let mut simplices = Vec::with_capacity(all.len());
        let mut index = HashMap::with_capacity(all.len());
        let mut dim_start = [0usize; 4];
        for (dim, verts) in all {
            let id = simplices.len();
            for d in dim + 1..4 {
                dim_start[d] = id + 1;
            }
            index.insert(verts.clone(), id);
            simplices.push(Simplex { vertices: verts, id });
        }

        let mut faces = vec![Vec::new(); simplices.len()];
        let mut cofaces = vec![Vec::new(); simplices.len()];
        for s in &simplices {
            if s.vertices.len() < 2 {
                continue;
            }
            for skip in 0..s.vertices.len() {
                let face: Vec<usize> =
                    s.vertices.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v).collect();
                let fid = index[&face];
                faces[s.id].push(fid);
                cofaces[fid].push(s.id);
            }
        }
        for list in faces.iter_mut().chain(cofaces.iter_mut()) {
            list.sort_unstable();
        }

        Ok(SimplicialComplex { points, simplices, faces, cofaces, index, dim_start, grid: None })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn simplex(&self, id: SimplexId) -> &Simplex {
        &self.simplices[id]
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn grid(&self) -> Option<&GridSpec> {
        self.grid.as_ref()
    }

    pub fn dim(&self, id: SimplexId) -> usize {
        self.simplices[id].dim()
    }

    /// Ids of all simplices of dimension `dim`.
    pub fn ids_of_dim(&self, dim: usize) -> std::ops::Range<SimplexId> {
        if dim > 2 {
            return self.len()..self.len();
        }
        let end = if dim == 2 { self.len() } else { self.dim_start[dim + 1] };
        self.dim_start[dim].min(end)..end
    }

    pub fn count_of_dim(&self, dim: usize) -> usize {
        self.ids_of_dim(dim).len()
    }

    /// Codimension-one faces.
    pub fn faces(&self, id: SimplexId) -> &[SimplexId] {
        &self.faces[id]
    }

    /// Codimension-one cofaces.
    pub fn cofaces(&self, id: SimplexId) -> &[SimplexId] {
        &self.cofaces[id]
    }

    pub fn find(&self, vertices: &[usize]) -> Option<SimplexId> {
        let mut key = vertices.to_vec();
        key.sort_unstable();
        self.index.get(&key).copied()
    }

    /// `a ⪯ b`: `a` is a (not necessarily proper) face of `b`.
    pub fn is_face(&self, a: SimplexId, b: SimplexId) -> bool {
        let (va, vb) = (&self.simplices[a].vertices, &self.simplices[b].vertices);
        va.len() <= vb.len() && va.iter().all(|v| vb.binary_search(v).is_ok())
    }

    pub fn barycenter(&self, id: SimplexId) -> Point {
        let verts = &self.simplices[id].vertices;
        let k = verts.len() as f64;
        let (sx, sy) = verts.iter().fold((0.0, 0.0), |(sx, sy), &v| (sx + self.points[v][0], sy + self.points[v][1]));
        [sx / k, sy / k]
    }

    /// Euler characteristic of the whole complex.
    pub fn euler_characteristic(&self) -> i64 {
        self.count_of_dim(0) as i64 - self.count_of_dim(1) as i64 + self.count_of_dim(2) as i64
    }

    fn check_ids<'a>(&self, ids: impl IntoIterator<Item = &'a SimplexId>) -> Result<()> {
        for &id in ids {
            if id >= self.len() {
                return Err(Error::UnknownSimplex(id));
            }
        }
        Ok(())
    }

    /// All faces of `id`, itself included, in ascending id order.
    pub fn closure_of(&self, id: SimplexId) -> Vec<SimplexId> {
        let verts = &self.simplices[id].vertices;
        let mut out: Vec<SimplexId> = (1u32..(1 << verts.len()))
            .map(|mask| {
                let face: Vec<usize> =
                    verts.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, &v)| v).collect();
                self.index[&face]
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// All cofaces of `id`, itself included, in ascending id order.
    pub fn star_of(&self, id: SimplexId) -> Vec<SimplexId> {
        let mut out = vec![id];
        let mut i = 0;
        while i < out.len() {
            for &c in &self.cofaces[out[i]] {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
            i += 1;
        }
        out.sort_unstable();
        out
    }

    /// Smallest face-closed superset of `set`.
    pub fn closure(&self, set: &BTreeSet<SimplexId>) -> Result<BTreeSet<SimplexId>> {
        self.check_ids(set)?;
        Ok(set.iter().flat_map(|&id| self.closure_of(id)).collect())
    }

    /// True iff `σ1 ⪯ τ ⪯ σ2` with `σ1, σ2 ∈ set` forces `τ ∈ set`.
    pub fn is_orderly_convex(&self, set: &BTreeSet<SimplexId>) -> bool {
        if set.iter().any(|&id| id >= self.len()) {
            return false;
        }
        // Any violating τ lies in the closure of some σ2 outside the set and
        // has some face σ1 inside it.
        set.iter().all(|&top| {
            self.closure_of(top)
                .into_iter()
                .filter(|tau| !set.contains(tau))
                .all(|tau| self.closure_of(tau).iter().all(|f| !set.contains(f)))
        })
    }

    /// Debug export: `{"points": [[x,y],..], "simplices": [[v..],..]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "points": self.points,
            "simplices": self.simplices.iter().map(|s| &s.vertices).collect::<Vec<_>>(),
        })
    }
}

/// Triangulates the grid, splitting each cell along its lower-left to
/// upper-right diagonal.
pub fn triangulate(spec: &GridSpec) -> Result<SimplicialComplex> {
    let points = make_grid_points(spec)?;
    let mut triangles = Vec::with_capacity(2 * (spec.px - 1) * (spec.py - 1));
    for j in 0..spec.py - 1 {
        for i in 0..spec.px - 1 {
            let ll = spec.index(i, j);
            let lr = spec.index(i + 1, j);
            let ul = spec.index(i, j + 1);
            let ur = spec.index(i + 1, j + 1);
            triangles.push(vec![ll, lr, ur]);
            triangles.push(vec![ll, ul, ur]);
        }
    }
    let mut complex = SimplicialComplex::from_simplices(points, &triangles)?;
    complex.grid = Some(*spec);
    Ok(complex)
}
