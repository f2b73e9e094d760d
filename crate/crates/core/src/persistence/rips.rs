//! Vietoris-Rips persistence read straight off a dissimilarity matrix.
//!
//! Reduces coboundary columns dimension by dimension with clearing.
//! Simplices are addressed by their combinatorial-number-system index and
//! never stored above the top homology degree; their cofacets are
//! enumerated on the fly. Within one dimension the filtration order is
//! diameter ascending, then index descending.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rustc_hash::{FxHashMap, FxHashSet};

use super::{DiagramMeta, PersistenceDiagram, PersistencePair};
use crate::error::{Error, Result};
use crate::slack::DissimilarityMatrix;

/// Diagram plus the number of simplices of each reduced dimension that
/// lie under the cutoff.
#[derive(Debug, Clone)]
pub struct RipsOutput {
    pub diagram: PersistenceDiagram,
    pub simplices_by_dim: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    diam: f64,
    index: u64,
}

// Max-heap order puts the earliest simplex in filtration order on top.
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .diam
            .total_cmp(&self.diam)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

struct Binomial {
    table: Vec<Vec<u64>>,
}

impl Binomial {
    fn new(n: usize, k_max: usize) -> Result<Self> {
        let mut table = vec![vec![0u64; k_max + 1]; n + 1];
        for i in 0..=n {
            table[i][0] = 1;
            for k in 1..=k_max.min(i) {
                let above = if k <= i - 1 { table[i - 1][k] } else { 0 };
                table[i][k] = table[i - 1][k - 1].checked_add(above).ok_or_else(|| {
                    Error::Input(format!("{n} points are too many for dimension {}", k_max - 1))
                })?;
            }
        }
        Ok(Binomial { table })
    }

    #[inline]
    fn get(&self, n: usize, k: usize) -> u64 {
        if k > n {
            0
        } else {
            self.table[n][k]
        }
    }
}

struct Complex<'a> {
    d: &'a DissimilarityMatrix,
    n: usize,
    r_max: f64,
    binom: Binomial,
}

impl Complex<'_> {
    /// Ascending vertex list of the `dim`-simplex with index `index`.
    fn vertices(&self, mut index: u64, dim: usize, out: &mut Vec<usize>) {
        out.clear();
        let mut top = self.n;
        for k in (1..=dim + 1).rev() {
            // largest v < top with C(v, k) <= index
            let (mut lo, mut hi) = (k - 1, top - 1);
            while lo < hi {
                let mid = (lo + hi).div_ceil(2);
                if self.binom.get(mid, k) <= index {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            out.push(lo);
            index -= self.binom.get(lo, k);
            top = lo;
        }
        out.reverse();
    }

    fn index_of(&self, vertices: &[usize]) -> u64 {
        vertices
            .iter()
            .enumerate()
            .map(|(i, &v)| self.binom.get(v, i + 1))
            .sum()
    }

    /// Calls `f` for every cofacet under the cutoff, in order of decreasing
    /// index. With `upper_only`, only cofacets whose new vertex exceeds
    /// every old one are produced.
    fn for_each_cofacet(
        &self,
        simplex: Entry,
        dim: usize,
        upper_only: bool,
        verts: &mut Vec<usize>,
        mut f: impl FnMut(Entry) -> bool,
    ) {
        self.vertices(simplex.index, dim, verts);
        let k = verts.len();
        // contribution of vertices above the new one, shifted up a slot
        let mut above = 0u64;
        let mut below = simplex.index;
        let mut pos = k;
        let lowest = if upper_only { verts[k - 1] + 1 } else { 0 };
        for w in (lowest..self.n).rev() {
            while pos > 0 && verts[pos - 1] > w {
                let v = verts[pos - 1];
                below -= self.binom.get(v, pos);
                above += self.binom.get(v, pos + 1);
                pos -= 1;
            }
            if pos > 0 && verts[pos - 1] == w {
                continue;
            }
            let row = self.d.row(w);
            let mut diam = simplex.diam;
            for &v in verts.iter() {
                diam = diam.max(row[v]);
            }
            if diam > self.r_max {
                continue;
            }
            let index = below + self.binom.get(w, pos + 1) + above;
            if !f(Entry { diam, index }) {
                return;
            }
        }
    }
}

fn pop_pivot(heap: &mut BinaryHeap<Entry>) -> Option<Entry> {
    while let Some(top) = heap.pop() {
        let mut odd = true;
        while heap.peek().is_some_and(|e| e.index == top.index) {
            heap.pop();
            odd = !odd;
        }
        if odd {
            return Some(top);
        }
    }
    None
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Persistence of the Vietoris-Rips filtration of `d` up to `r_max`, in
/// homology degrees `0..=max_dim`. Zero-length bars are dropped.
pub fn rips_persistence(d: &DissimilarityMatrix, max_dim: usize, r_max: f64) -> Result<RipsOutput> {
    let n = d.size();
    if n == 0 {
        return Err(Error::Input("empty dissimilarity matrix".into()));
    }
    if r_max.is_nan() || r_max < 0.0 {
        return Err(Error::Config(format!("r_max must be non-negative, got {r_max}")));
    }
    let cx = Complex {
        d,
        n,
        r_max,
        binom: Binomial::new(n, max_dim + 2)?,
    };
    let mut pairs = Vec::new();
    let mut counts = vec![n];

    let mut edges: Vec<Entry> = Vec::new();
    for j in 1..n {
        let row = d.row(j);
        for (i, &diam) in row[..j].iter().enumerate() {
            if diam <= r_max {
                edges.push(Entry {
                    diam,
                    index: cx.index_of(&[i, j]),
                });
            }
        }
    }
    // Reversed sort: filtration order.
    edges.sort_unstable_by(|a, b| b.cmp(a));
    counts.push(edges.len());

    let mut parent: Vec<usize> = (0..n).collect();
    let mut cleared: FxHashSet<u64> = FxHashSet::default();
    let mut verts = Vec::with_capacity(max_dim + 3);
    for e in &edges {
        cx.vertices(e.index, 1, &mut verts);
        let (a, b) = (find(&mut parent, verts[0]), find(&mut parent, verts[1]));
        if a != b {
            parent[a.max(b)] = a.min(b);
            cleared.insert(e.index);
            if e.diam > 0.0 {
                pairs.push(PersistencePair {
                    dim: 0,
                    birth: 0.0,
                    death: e.diam,
                });
            }
        }
    }
    for v in 0..n {
        if find(&mut parent, v) == v {
            pairs.push(PersistencePair {
                dim: 0,
                birth: 0.0,
                death: f64::INFINITY,
            });
        }
    }

    let mut simplices = edges;
    for dim in 1..=max_dim {
        let mut columns: Vec<Entry> = simplices
            .iter()
            .copied()
            .filter(|s| !cleared.contains(&s.index))
            .collect();
        if dim < max_dim {
            let mut next = Vec::new();
            for &s in &simplices {
                cx.for_each_cofacet(s, dim, true, &mut verts, |c| {
                    next.push(c);
                    true
                });
            }
            counts.push(next.len());
            simplices = next;
        } else {
            simplices = Vec::new();
        }
        // Reverse filtration order.
        columns.sort_unstable();

        let mut pivots: FxHashMap<u64, u32> = FxHashMap::default();
        let mut reductions: Vec<Vec<Entry>> = Vec::with_capacity(columns.len());
        let mut heap = BinaryHeap::new();
        for (slot, &sigma) in columns.iter().enumerate() {
            heap.clear();
            let mut reduction = vec![sigma];
            let mut emergent = None;
            let mut first = true;
            cx.for_each_cofacet(sigma, dim, false, &mut verts, |c| {
                if first && c.diam == sigma.diam {
                    first = false;
                    if !pivots.contains_key(&c.index) {
                        emergent = Some(c);
                        return false;
                    }
                }
                heap.push(c);
                true
            });
            if let Some(tau) = emergent {
                pivots.insert(tau.index, slot as u32);
                reductions.push(reduction);
                continue;
            }
            loop {
                match pop_pivot(&mut heap) {
                    None => {
                        pairs.push(PersistencePair {
                            dim,
                            birth: sigma.diam,
                            death: f64::INFINITY,
                        });
                        reductions.push(Vec::new());
                        break;
                    }
                    Some(pivot) => match pivots.get(&pivot.index) {
                        Some(&other) => {
                            heap.push(pivot);
                            for &s in &reductions[other as usize] {
                                reduction.push(s);
                                cx.for_each_cofacet(s, dim, false, &mut verts, |c| {
                                    heap.push(c);
                                    true
                                });
                            }
                        }
                        None => {
                            pivots.insert(pivot.index, slot as u32);
                            if pivot.diam > sigma.diam {
                                pairs.push(PersistencePair {
                                    dim,
                                    birth: sigma.diam,
                                    death: pivot.diam,
                                });
                            }
                            reductions.push(cancel(reduction));
                            break;
                        }
                    },
                }
            }
        }
        cleared = pivots.into_keys().collect();
    }

    pairs.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.birth.total_cmp(&b.birth))
            .then(a.death.total_cmp(&b.death))
    });
    counts.truncate(max_dim + 1);
    Ok(RipsOutput {
        diagram: PersistenceDiagram {
            pairs,
            meta: DiagramMeta {
                n_points: n,
                max_dim,
                r_max,
                t: None,
                experiment: None,
            },
        },
        simplices_by_dim: counts,
    })
}

fn cancel(mut column: Vec<Entry>) -> Vec<Entry> {
    column.sort_unstable_by_key(|e| e.index);
    let mut out: Vec<Entry> = Vec::with_capacity(column.len());
    for e in column {
        if out.last().is_some_and(|l| l.index == e.index) {
            out.pop();
        } else {
            out.push(e);
        }
    }
    out
}
