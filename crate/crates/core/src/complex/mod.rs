//! Oriented simplicial complexes, integer coboundaries and the metric data
//! (lumped Hodge star weights and the Newtonian potential) that live on them.
//!
//! Simplices are stored as strictly increasing vertex tuples. The orientation
//! of a simplex is the one induced by that vertex order, and the face obtained
//! by dropping the vertex at position `i` enters the boundary with sign
//! `(-1)^i`.

mod generate;
mod io;
mod metric;

pub use generate::{MeshSpec, WeightProfile};
pub use io::MeshFile;
pub use metric::{mass_matrix, twist_weights, MetricData};

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialComplex {
    dimension: usize,
    simplices: Vec<Vec<Vec<usize>>>,
    lookup: Vec<HashMap<Vec<usize>, usize>>,
}

impl SimplicialComplex {
    /// Builds the closure of a list of top-dimensional simplices. Every degree
    /// is sorted lexicographically, so the result only depends on the set of
    /// top simplices.
    pub fn from_top_simplices(
        dimension: usize,
        num_vertices: usize,
        tops: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<Self> {
        let mut levels: Vec<Vec<Vec<usize>>> = vec![Vec::new(); dimension + 1];
        levels[0] = (0..num_vertices).map(|v| vec![v]).collect();
        for mut top in tops {
            if top.len() != dimension + 1 {
                return Err(Error::Complex(format!("top simplex {top:?} does not have {} vertices", dimension + 1)));
            }
            top.sort_unstable();
            if top.windows(2).any(|w| w[0] == w[1]) || top.iter().any(|&v| v >= num_vertices) {
                return Err(Error::Complex(format!("degenerate top simplex {top:?}")));
            }
            for k in 1..=dimension {
                for face in subsets(&top, k + 1) {
                    levels[k].push(face);
                }
            }
        }
        for level in levels.iter_mut().skip(1) {
            level.sort();
            level.dedup();
        }
        Self::from_simplices(dimension, levels)
    }

    /// Builds a complex from explicit per-degree simplex lists, keeping their
    /// order. Fails unless the lists form a valid complex.
    pub fn from_simplices(dimension: usize, simplices: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if simplices.len() != dimension + 1 {
            return Err(Error::Complex(format!(
                "expected {} simplex levels, found {}",
                dimension + 1,
                simplices.len()
            )));
        }
        let mut lookup = Vec::with_capacity(dimension + 1);
        for (k, level) in simplices.iter().enumerate() {
            let mut map = HashMap::with_capacity(level.len());
            for (i, s) in level.iter().enumerate() {
                if s.len() != k + 1 {
                    return Err(Error::Complex(format!("{k}-simplex {s:?} has wrong arity")));
                }
                if s.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Complex(format!("simplex {s:?} is not strictly increasing")));
                }
                if map.insert(s.clone(), i).is_some() {
                    return Err(Error::Complex(format!("duplicate simplex {s:?}")));
                }
            }
            lookup.push(map);
        }
        let num_vertices = simplices[0].len();
        for (i, s) in simplices[0].iter().enumerate() {
            if s[0] != i {
                return Err(Error::Complex(format!(
                    "vertex list must be 0..{num_vertices} in order, found {s:?} at {i}"
                )));
            }
        }
        for k in 1..=dimension {
            for s in &simplices[k] {
                for face in faces(s) {
                    if !lookup[k - 1].contains_key(&face) {
                        return Err(Error::Complex(format!("face {face:?} of {s:?} is missing")));
                    }
                }
            }
        }
        Ok(SimplicialComplex { dimension, simplices, lookup })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn num_vertices(&self) -> usize {
        self.simplices[0].len()
    }

    /// Number of `k`-simplices; zero outside `0..=dimension`.
    pub fn count(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, Vec::len)
    }

    pub fn simplices(&self, k: usize) -> &[Vec<usize>] {
        self.simplices.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn levels(&self) -> &[Vec<Vec<usize>>] {
        &self.simplices
    }

    pub fn index_of(&self, simplex: &[usize]) -> Option<usize> {
        self.lookup.get(simplex.len().checked_sub(1)?)?.get(simplex).copied()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .enumerate()
            .map(|(k, l)| if k % 2 == 0 { l.len() as i64 } else { -(l.len() as i64) })
            .sum()
    }

    /// The coboundary `d_k` from `k`-cochains to `(k+1)`-cochains.
    pub fn coboundary(&self, k: usize) -> Result<Incidence> {
        if k >= self.dimension {
            return Err(Error::degree(k as isize, 0, self.dimension as isize - 1));
        }
        let rows = self.simplices[k + 1]
            .iter()
            .map(|s| {
                let mut row: Vec<(usize, i8)> = faces(s)
                    .enumerate()
                    .map(|(i, f)| {
                        let sign = if i % 2 == 0 { 1 } else { -1 };
                        (self.lookup[k][&f], sign)
                    })
                    .collect();
                row.sort_unstable();
                row
            })
            .collect();
        Ok(Incidence { cols: self.count(k), rows })
    }

    /// Breadth-first hop distance of every vertex from `source`; unreachable
    /// vertices get `usize::MAX`.
    pub fn hop_distance(&self, source: usize) -> Vec<usize> {
        let nv = self.num_vertices();
        let mut adjacency = vec![Vec::new(); nv];
        for e in self.simplices(1) {
            adjacency[e[0]].push(e[1]);
            adjacency[e[1]].push(e[0]);
        }
        let mut dist = vec![usize::MAX; nv];
        let mut queue = std::collections::VecDeque::new();
        if source < nv {
            dist[source] = 0;
            queue.push_back(source);
        }
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Faces of a simplex in the order of the omitted vertex position.
fn faces(s: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0..s.len()).map(move |i| {
        let mut f = s.to_vec();
        f.remove(i);
        f
    })
}

fn subsets(set: &[usize], size: usize) -> Vec<Vec<usize>> {
    fn go(set: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..set.len() {
            cur.push(set[i]);
            go(set, size, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(set, size, 0, &mut Vec::with_capacity(size), &mut out);
    out
}

/// Sparse signed incidence matrix with entries in {-1, 0, +1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Incidence {
    cols: usize,
    rows: Vec<Vec<(usize, i8)>>,
}

impl Incidence {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        Incidence { cols: ncols, rows: vec![Vec::new(); nrows] }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[(usize, i8)] {
        &self.rows[i]
    }

    /// Exact integer product `self · rhs`, as a dense row-major table.
    pub fn compose(&self, rhs: &Incidence) -> Result<Vec<Vec<i64>>> {
        if self.cols != rhs.nrows() {
            return Err(Error::Assembly(format!(
                "cannot compose {}x{} with {}x{}",
                self.nrows(),
                self.cols,
                rhs.nrows(),
                rhs.cols
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                let mut out = vec![0i64; rhs.cols];
                for &(j, a) in row {
                    for &(l, b) in &rhs.rows[j] {
                        out[l] += i64::from(a) * i64::from(b);
                    }
                }
                out
            })
            .collect())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows(), self.cols);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, s) in row {
                m[(i, j)] = f64::from(s);
            }
        }
        m
    }

    pub fn to_integer_rows(&self) -> Vec<Vec<i64>> {
        self.rows
            .iter()
            .map(|row| {
                let mut out = vec![0i64; self.cols];
                for &(j, s) in row {
                    out[j] = i64::from(s);
                }
                out
            })
            .collect()
    }

    /// Applies the transpose (the boundary map) to an integer vector.
    pub fn transpose_apply(&self, x: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; self.cols];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, s) in row {
                out[j] += i64::from(s) * x[i];
            }
        }
        out
    }
}
