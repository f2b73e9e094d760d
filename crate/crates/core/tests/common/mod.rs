#![allow(dead_code)]

use rand::Rng;
use slacktopo::persistence::PersistenceDiagram;
use slacktopo::slack::DissimilarityMatrix;

/// Random symmetric matrix with entries drawn from `draw`.
pub fn random_matrix(
    rng: &mut impl Rng,
    n: usize,
    mut draw: impl FnMut(&mut dyn rand::RngCore) -> f64,
) -> DissimilarityMatrix {
    let mut data = vec![0.0; n * n];
    for a in 0..n {
        for b in a + 1..n {
            let v = draw(rng);
            data[a * n + b] = v;
            data[b * n + a] = v;
        }
    }
    DissimilarityMatrix::from_dense(n, data, 0, 0).unwrap()
}

pub fn uniform_matrix(rng: &mut impl Rng, n: usize) -> DissimilarityMatrix {
    random_matrix(rng, n, |r| r.random::<f64>())
}

/// Entries on a coarse grid, so that many simplices share a value.
pub fn grid_matrix(rng: &mut impl Rng, n: usize, levels: u32) -> DissimilarityMatrix {
    random_matrix(rng, n, |r| f64::from(r.random_range(1..=levels)))
}

pub fn relabel(d: &DissimilarityMatrix, perm: &[usize]) -> DissimilarityMatrix {
    let n = d.size();
    let mut data = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            data[perm[a] * n + perm[b]] = d.get(a, b);
        }
    }
    DissimilarityMatrix::from_dense(n, data, 0, 0).unwrap()
}

pub fn circle_matrix(n: usize) -> DissimilarityMatrix {
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            (a.cos(), a.sin())
        })
        .collect();
    let mut data = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            data[a * n + b] = ((pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2)).sqrt();
        }
    }
    DissimilarityMatrix::from_dense(n, data, 0, 0).unwrap()
}

/// Bars as sortable bit patterns, for exact multiset comparison.
pub fn bars(d: &PersistenceDiagram) -> Vec<(usize, u64, u64)> {
    let mut v: Vec<_> = d
        .pairs
        .iter()
        .map(|p| (p.dim, p.birth.to_bits(), p.death.to_bits()))
        .collect();
    v.sort_unstable();
    v
}

fn cost(a: (f64, f64), b: (f64, f64)) -> f64 {
    let death = if a.1.is_infinite() && b.1.is_infinite() {
        0.0
    } else {
        (a.1 - b.1).abs()
    };
    (a.0 - b.0).abs().max(death)
}

fn to_diagonal(a: (f64, f64)) -> f64 {
    (a.1 - a.0) / 2.0
}

fn has_perfect_matching(adj: &[Vec<usize>], n_right: usize) -> bool {
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [usize]) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v] == usize::MAX || augment(owner[v], adj, seen, owner) {
                owner[v] = u;
                return true;
            }
        }
        false
    }
    let mut owner = vec![usize::MAX; n_right];
    (0..adj.len()).all(|u| {
        let mut seen = vec![false; n_right];
        augment(u, adj, &mut seen, &mut owner)
    })
}

/// Exact bottleneck distance between two bar lists of one dimension.
pub fn bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    // left: a then diagonal copies of b; right: b then diagonal copies of a
    let (na, nb) = (a.len(), b.len());
    let size = na + nb;
    if size == 0 {
        return 0.0;
    }
    let weight = |i: usize, j: usize| -> f64 {
        match (i < na, j < nb) {
            (true, true) => cost(a[i], b[j]),
            (true, false) => {
                if j - nb == i {
                    to_diagonal(a[i])
                } else {
                    f64::INFINITY
                }
            }
            (false, true) => {
                if i - na == j {
                    to_diagonal(b[j])
                } else {
                    f64::INFINITY
                }
            }
            (false, false) => 0.0,
        }
    };
    let mut candidates: Vec<f64> = (0..size)
        .flat_map(|i| (0..size).map(move |j| (i, j)))
        .map(|(i, j)| weight(i, j))
        .filter(|w| w.is_finite())
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    for c in candidates {
        let adj: Vec<Vec<usize>> = (0..size)
            .map(|i| (0..size).filter(|&j| weight(i, j) <= c).collect())
            .collect();
        if has_perfect_matching(&adj, size) {
            return c;
        }
    }
    f64::INFINITY
}

pub fn dim_bars(d: &PersistenceDiagram, dim: usize) -> Vec<(f64, f64)> {
    d.dim(dim).map(|p| (p.birth, p.death)).collect()
}
