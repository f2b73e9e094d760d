//! Vietoris-Rips filtrations over a dissimilarity matrix.

use std::cmp::Ordering;
use std::fmt::Write as _;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::slack::DissimilarityMatrix;

pub const DEFAULT_MAX_DIM: usize = 2;
pub const DEFAULT_SIMPLEX_BUDGET: usize = 50_000_000;
/// Headroom applied to the largest MST edge by [`default_r_max`].
pub const R_MAX_HEADROOM: f64 = 1.5;

pub type Vertices = SmallVec<[u32; 4]>;

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSimplex {
    /// Strictly increasing vertex indices.
    pub vertices: Vertices,
    pub value: f64,
}

impl FilteredSimplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Filtration order: value, then dimension, then vertices.
    pub fn filtration_cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.vertices.len().cmp(&other.vertices.len()))
            .then_with(|| self.vertices.cmp(&other.vertices))
    }
}

/// Simplices in filtration order, faces before cofaces.
#[derive(Debug, Clone)]
pub struct Filtration {
    simplices: Vec<FilteredSimplex>,
    n_vertices: usize,
    /// Highest homology dimension the filtration supports; simplices go up
    /// to `max_dim + 1`.
    max_dim: usize,
    r_max: f64,
}

impl Filtration {
    /// Builds a filtration from arbitrary simplices, sorting them. Every
    /// face of every simplex must be present with a value no larger.
    pub fn from_simplices(
        mut simplices: Vec<FilteredSimplex>,
        n_vertices: usize,
        max_dim: usize,
        r_max: f64,
    ) -> Result<Self> {
        for s in &simplices {
            if s.vertices.is_empty() || s.vertices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Input(format!("bad vertex list {:?}", s.vertices)));
            }
            if s.vertices.iter().any(|&v| v as usize >= n_vertices) {
                return Err(Error::Input(format!("vertex out of range in {:?}", s.vertices)));
            }
            if s.dim() > max_dim + 1 {
                return Err(Error::Input(format!(
                    "simplex {:?} exceeds dimension {}",
                    s.vertices,
                    max_dim + 1
                )));
            }
            if !s.value.is_finite() {
                return Err(Error::Input(format!(
                    "simplex {:?} has non-finite value",
                    s.vertices
                )));
            }
        }
        simplices.sort_unstable_by(FilteredSimplex::filtration_cmp);
        if simplices.windows(2).any(|w| w[0].vertices == w[1].vertices) {
            return Err(Error::Input("duplicate simplex".into()));
        }
        let filt = Filtration {
            simplices,
            n_vertices,
            max_dim,
            r_max,
        };
        filt.check_faces()?;
        Ok(filt)
    }

    fn check_faces(&self) -> Result<()> {
        let index = crate::persistence::SimplexIndex::new(self);
        for (k, s) in self.simplices.iter().enumerate() {
            if s.dim() == 0 {
                continue;
            }
            for face in faces(&s.vertices) {
                match index.position(&face) {
                    Some(f) if f < k => {}
                    _ => {
                        return Err(Error::Input(format!(
                            "face {face:?} of {:?} missing or out of order",
                            s.vertices
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    pub fn simplices(&self) -> &[FilteredSimplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Number of simplices per dimension.
    pub fn counts_by_dim(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_dim + 2];
        for s in &self.simplices {
            counts[s.dim()] += 1;
        }
        counts
    }

    /// One simplex per line: `value dim v0 v1 …`, in filtration order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in &self.simplices {
            let _ = write!(out, "{} {}", s.value, s.dim());
            for v in &s.vertices {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Codimension-one faces, each obtained by dropping one vertex.
pub fn faces(vertices: &[u32]) -> impl Iterator<Item = Vertices> + '_ {
    (0..vertices.len()).map(move |skip| {
        vertices
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != skip)
            .map(|(_, &v)| v)
            .collect()
    })
}

fn intersect_sorted(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

struct Expander<'a> {
    d: &'a DissimilarityMatrix,
    upper: Vec<Vec<u32>>,
    top_dim: usize,
    budget: usize,
    r_max: f64,
    out: Vec<FilteredSimplex>,
}

impl Expander<'_> {
    fn push(&mut self, vertices: Vertices, value: f64) -> Result<()> {
        if self.out.len() >= self.budget {
            return Err(Error::SimplexBudget {
                budget: self.budget,
                r_max: self.r_max,
            });
        }
        self.out.push(FilteredSimplex { vertices, value });
        Ok(())
    }

    // `candidates` are vertices above the last one, adjacent to every vertex of `simplex`
    fn expand(&mut self, simplex: &mut Vertices, value: f64, candidates: &[u32]) -> Result<()> {
        let mut next = Vec::new();
        for (k, &u) in candidates.iter().enumerate() {
            let reach = simplex
                .iter()
                .map(|&w| self.d.get(w as usize, u as usize))
                .fold(value, f64::max);
            simplex.push(u);
            self.push(simplex.clone(), reach)?;
            if simplex.len() <= self.top_dim {
                let upper_u = std::mem::take(&mut self.upper[u as usize]);
                intersect_sorted(&candidates[k + 1..], &upper_u, &mut next);
                self.upper[u as usize] = upper_u;
                if !next.is_empty() {
                    let cand = std::mem::take(&mut next);
                    self.expand(simplex, reach, &cand)?;
                    next = cand;
                }
            }
            simplex.pop();
        }
        Ok(())
    }
}

/// Vietoris-Rips filtration with every clique of dimension up to
/// `max_dim + 1` whose pairwise dissimilarities are all `≤ r_max`. A simplex
/// enters at its largest edge value.
pub fn build_vr_filtration(d: &DissimilarityMatrix, max_dim: usize, r_max: f64) -> Result<Filtration> {
    build_vr_filtration_with_budget(d, max_dim, r_max, DEFAULT_SIMPLEX_BUDGET)
}

pub fn build_vr_filtration_with_budget(
    d: &DissimilarityMatrix,
    max_dim: usize,
    r_max: f64,
    budget: usize,
) -> Result<Filtration> {
    if !(r_max > 0.0) {
        return Err(Error::Config(format!("r_max must be positive, got {r_max}")));
    }
    let n = d.size();
    let upper: Vec<Vec<u32>> = (0..n)
        .map(|a| {
            (a + 1..n)
                .filter(|&b| d.get(a, b) <= r_max)
                .map(|b| b as u32)
                .collect()
        })
        .collect();
    let mut ex = Expander {
        d,
        upper,
        top_dim: max_dim + 1,
        budget,
        r_max,
        out: Vec::new(),
    };
    for v in 0..n as u32 {
        let mut simplex: Vertices = SmallVec::new();
        simplex.push(v);
        ex.push(simplex.clone(), 0.0)?;
        if ex.top_dim > 0 {
            let cand = std::mem::take(&mut ex.upper[v as usize]);
            ex.expand(&mut simplex, 0.0, &cand)?;
            ex.upper[v as usize] = cand;
        }
    }
    let mut simplices = ex.out;
    simplices.sort_unstable_by(FilteredSimplex::filtration_cmp);
    Ok(Filtration {
        simplices,
        n_vertices: n,
        max_dim,
        r_max,
    })
}

/// Largest edge of a minimum spanning tree (Prim, dense `O(N²)`).
pub fn mst_max_edge(d: &DissimilarityMatrix) -> f64 {
    let n = d.size();
    if n < 2 {
        return 0.0;
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut longest: f64 = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (u == usize::MAX || best[v] < best[u]) {
                u = v;
            }
        }
        in_tree[u] = true;
        longest = longest.max(best[u]);
        for v in 0..n {
            if !in_tree[v] {
                best[v] = best[v].min(d.get(u, v));
            }
        }
    }
    longest
}

/// [`R_MAX_HEADROOM`] times the largest MST edge.
pub fn default_r_max(d: &DissimilarityMatrix) -> Result<f64> {
    if d.size() < 2 {
        return Err(Error::Input("need at least two points to choose r_max".into()));
    }
    Ok(R_MAX_HEADROOM * mst_max_edge(d))
}

/// Smallest radius at which some vertex is adjacent to every other one.
/// From there on the complex is a cone, so every finite bar has died.
pub fn enclosing_radius(d: &DissimilarityMatrix) -> Result<f64> {
    if d.size() < 2 {
        return Err(Error::Input("need at least two points to choose r_max".into()));
    }
    Ok((0..d.size())
        .map(|a| d.row(a).iter().copied().fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(n: usize, entries: &[(usize, usize, f64)]) -> DissimilarityMatrix {
        let mut data = vec![0.0; n * n];
        for &(a, b, v) in entries {
            data[a * n + b] = v;
            data[b * n + a] = v;
        }
        DissimilarityMatrix::from_dense(n, data, 0, 0).unwrap()
    }

    #[test]
    fn equilateral() {
        let d = matrix(3, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]);
        let f = build_vr_filtration(&d, 2, 2.0).unwrap();
        assert_eq!(f.counts_by_dim(), vec![3, 3, 1, 0]);
        let tri = f.simplices().last().unwrap();
        assert_eq!(tri.dim(), 2);
        assert_eq!(tri.value, 1.0);
        assert!(f.simplices()[..3].iter().all(|s| s.value == 0.0));
    }

    #[test]
    fn threshold_drops_edge_and_cofaces() {
        let d = matrix(3, &[(0, 1, 1.0), (0, 2, 3.0), (1, 2, 1.0)]);
        let f = build_vr_filtration(&d, 2, 2.0).unwrap();
        assert_eq!(f.counts_by_dim(), vec![3, 2, 0, 0]);
        assert!(f.simplices().iter().all(|s| s.vertices.as_slice() != [0, 2]));
    }

    #[test]
    fn budget_exceeded() {
        let d = matrix(
            4,
            &[
                (0, 1, 1.0),
                (0, 2, 1.0),
                (1, 2, 1.0),
                (0, 3, 1.0),
                (1, 3, 1.0),
                (2, 3, 1.0),
            ],
        );
        assert!(matches!(
            build_vr_filtration_with_budget(&d, 2, 2.0, 10),
            Err(Error::SimplexBudget { .. })
        ));
        assert_eq!(build_vr_filtration_with_budget(&d, 2, 2.0, 15).unwrap().len(), 15);
    }

    #[test]
    fn r_max_from_mst() {
        assert_eq!(default_r_max(&matrix(2, &[(0, 1, 2.0)])).unwrap(), 3.0);
        let d = matrix(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0)]);
        assert_eq!(default_r_max(&d).unwrap(), 1.5);
        assert!(default_r_max(&matrix(1, &[])).is_err());
    }

    #[test]
    fn enclosing() {
        let d = matrix(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0)]);
        assert_eq!(enclosing_radius(&d).unwrap(), 1.0);
        assert!(enclosing_radius(&matrix(1, &[])).is_err());
    }

    #[test]
    fn dump_format() {
        let d = matrix(2, &[(0, 1, 0.5)]);
        let f = build_vr_filtration(&d, 1, 1.0).unwrap();
        assert_eq!(f.dump(), "0 0 0\n0 0 1\n0.5 1 0 1\n");
    }

    #[test]
    fn from_simplices_checks_faces() {
        let s = |v: &[u32], value| FilteredSimplex {
            vertices: v.iter().copied().collect(),
            value,
        };
        assert!(Filtration::from_simplices(vec![s(&[0], 0.0), s(&[0, 1], 1.0)], 2, 1, 1.0).is_err());
        assert!(
            Filtration::from_simplices(vec![s(&[0], 0.0), s(&[1], 2.0), s(&[0, 1], 1.0)], 2, 1, 1.0).is_err()
        );
        assert!(
            Filtration::from_simplices(vec![s(&[0], 0.0), s(&[1], 0.0), s(&[0, 1], 1.0)], 2, 1, 1.0).is_ok()
        );
    }
}
