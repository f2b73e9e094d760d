//! Persistent homology over the two-element field by boundary-matrix
//! column reduction, and Betti-number extraction from the diagram.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtration::{faces, Filtration};

mod rips;

pub use rips::{rips_persistence, RipsOutput};

pub const DEFAULT_RHO: f64 = 0.3;

/// Looks up a simplex's position in a filtration by its vertex set.
pub struct SimplexIndex {
    binom: Vec<Vec<u128>>,
    by_dim: Vec<HashMap<u128, u32>>,
}

impl SimplexIndex {
    pub fn new(filt: &Filtration) -> Self {
        let top = filt.max_dim() + 2;
        let n = filt.n_vertices() + 1;
        // binom[k][v] = C(v, k)
        let mut binom = vec![vec![0u128; n]; top + 1];
        for v in 0..n {
            binom[0][v] = 1;
        }
        for k in 1..=top {
            for v in 1..n {
                binom[k][v] = binom[k - 1][v - 1] + binom[k][v - 1];
            }
        }
        let mut by_dim = vec![HashMap::new(); top];
        let mut idx = SimplexIndex {
            binom,
            by_dim: Vec::new(),
        };
        for (pos, s) in filt.simplices().iter().enumerate() {
            by_dim[s.dim()].insert(idx.key(&s.vertices), pos as u32);
        }
        idx.by_dim = by_dim;
        idx
    }

    // combinatorial number system: Σ C(v_k, k+1)
    fn key(&self, vertices: &[u32]) -> u128 {
        vertices
            .iter()
            .enumerate()
            .map(|(k, &v)| self.binom[k + 1][v as usize])
            .sum()
    }

    pub fn position(&self, vertices: &[u32]) -> Option<usize> {
        let dim = vertices.len().checked_sub(1)?;
        if vertices.iter().any(|&v| v as usize + 1 >= self.binom[0].len()) {
            return None;
        }
        self.by_dim
            .get(dim)?
            .get(&self.key(vertices))
            .map(|&p| p as usize)
    }
}

/// Sparse F₂ boundary matrix; column `j` lists the filtration positions of
/// the faces of simplex `j`, ascending.
#[derive(Debug, Clone)]
pub struct BoundaryMatrix {
    dims: Vec<u8>,
    cols: Vec<Vec<u32>>,
}

impl BoundaryMatrix {
    pub fn from_filtration(filt: &Filtration) -> Self {
        let index = SimplexIndex::new(filt);
        let mut dims = Vec::with_capacity(filt.len());
        let mut cols = Vec::with_capacity(filt.len());
        for s in filt.simplices() {
            dims.push(s.dim() as u8);
            let mut col: Vec<u32> = if s.dim() == 0 {
                Vec::new()
            } else {
                faces(&s.vertices)
                    .map(|f| index.position(&f).expect("filtration is closed under faces") as u32)
                    .collect()
            };
            col.sort_unstable();
            cols.push(col);
        }
        BoundaryMatrix { dims, cols }
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }
}

/// Result of a reduction: birth/death position pairs and unpaired
/// (essential) positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    pub pairs: Vec<(u32, u32)>,
    pub essential: Vec<u32>,
}

/// `target ^= other` for sorted columns.
fn add_column(target: &mut Vec<u32>, other: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < other.len() {
        let (a, b) = (target[i], other[j]);
        if a < b {
            scratch.push(a);
            i += 1;
        } else if b < a {
            scratch.push(b);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    scratch.extend_from_slice(&target[i..]);
    scratch.extend_from_slice(&other[j..]);
    std::mem::swap(target, scratch);
}

struct Reducer {
    cols: Vec<Vec<u32>>,
    pivot_owner: Vec<u32>,
    scratch: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl Reducer {
    fn new(m: &BoundaryMatrix) -> Self {
        Reducer {
            cols: m.cols.clone(),
            pivot_owner: vec![NONE; m.len()],
            scratch: Vec::new(),
        }
    }

    fn reduce(&mut self, j: usize) {
        let mut col = std::mem::take(&mut self.cols[j]);
        while let Some(&low) = col.last() {
            let owner = self.pivot_owner[low as usize];
            if owner == NONE {
                self.pivot_owner[low as usize] = j as u32;
                break;
            }
            add_column(&mut col, &self.cols[owner as usize], &mut self.scratch);
        }
        self.cols[j] = col;
    }

    fn pairing(&self) -> Pairing {
        let n = self.cols.len();
        let mut paired = vec![false; n];
        let mut pairs = Vec::new();
        for (j, col) in self.cols.iter().enumerate() {
            if let Some(&low) = col.last() {
                pairs.push((low, j as u32));
                paired[low as usize] = true;
                paired[j] = true;
            }
        }
        pairs.sort_unstable();
        let essential = (0..n as u32).filter(|&j| !paired[j as usize]).collect();
        Pairing { pairs, essential }
    }
}

/// Plain left-to-right column reduction.
pub fn reduce_standard(m: &BoundaryMatrix) -> Pairing {
    let mut r = Reducer::new(m);
    for j in 0..m.len() {
        r.reduce(j);
    }
    r.pairing()
}

/// Column reduction with clearing: dimensions are processed from the top
/// down, and a column whose simplex is already known to be a pivot (hence a
/// creator) is zeroed without being reduced.
pub fn reduce_twist(m: &BoundaryMatrix) -> Pairing {
    let mut r = Reducer::new(m);
    let top = m.dims.iter().copied().max().unwrap_or(0);
    let mut cleared = vec![false; m.len()];
    for dim in (1..=top).rev() {
        for j in 0..m.len() {
            if m.dims[j] != dim || cleared[j] {
                continue;
            }
            r.reduce(j);
            if let Some(&low) = r.cols[j].last() {
                r.cols[low as usize].clear();
                cleared[low as usize] = true;
            }
        }
    }
    r.pairing()
}

/// One bar of the diagram; `death` is `f64::INFINITY` for essential classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiagramMeta {
    #[serde(rename = "N")]
    pub n_points: usize,
    pub max_dim: usize,
    pub r_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub pairs: Vec<PersistencePair>,
    pub meta: DiagramMeta,
}

#[derive(Serialize, Deserialize)]
struct PairRecord {
    dim: usize,
    birth: f64,
    death: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct DiagramDocument {
    meta: DiagramMeta,
    pairs: Vec<PairRecord>,
}

impl PersistenceDiagram {
    /// Bars of dimension `dim`.
    pub fn dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    pub fn max_finite_death(&self) -> Option<f64> {
        self.pairs
            .iter()
            .filter(|p| !p.is_infinite())
            .map(|p| p.death)
            .reduce(f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = DiagramDocument {
            meta: self.meta.clone(),
            pairs: self
                .pairs
                .iter()
                .map(|p| PairRecord {
                    dim: p.dim,
                    birth: p.birth,
                    death: (!p.is_infinite()).then_some(p.death),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DiagramDocument = serde_json::from_str(text)?;
        Ok(PersistenceDiagram {
            meta: doc.meta,
            pairs: doc
                .pairs
                .into_iter()
                .map(|p| PersistencePair {
                    dim: p.dim,
                    birth: p.birth,
                    death: p.death.unwrap_or(f64::INFINITY),
                })
                .collect(),
        })
    }

    /// `dim,birth,death` with a header line; infinite deaths written `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,birth,death\n");
        for p in &self.pairs {
            if p.is_infinite() {
                let _ = writeln!(out, "{},{},inf", p.dim, p.birth);
            } else {
                let _ = writeln!(out, "{},{},{}", p.dim, p.birth, p.death);
            }
        }
        out
    }
}

/// Converts a pairing to a diagram over the filtration values. Pairs of
/// zero persistence are dropped, as are classes above `max_dim`.
pub fn diagram_from_pairing(filt: &Filtration, pairing: &Pairing) -> PersistenceDiagram {
    let s = filt.simplices();
    let mut pairs: Vec<PersistencePair> = pairing
        .pairs
        .iter()
        .map(|&(b, d)| PersistencePair {
            dim: s[b as usize].dim(),
            birth: s[b as usize].value,
            death: s[d as usize].value,
        })
        .filter(|p| p.death > p.birth)
        .chain(pairing.essential.iter().map(|&b| PersistencePair {
            dim: s[b as usize].dim(),
            birth: s[b as usize].value,
            death: f64::INFINITY,
        }))
        .filter(|p| p.dim <= filt.max_dim())
        .collect();
    pairs.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.birth.total_cmp(&b.birth))
            .then(a.death.total_cmp(&b.death))
    });
    PersistenceDiagram {
        pairs,
        meta: DiagramMeta {
            n_points: filt.n_vertices(),
            max_dim: filt.max_dim(),
            r_max: filt.r_max(),
            t: None,
            experiment: None,
        },
    }
}

/// Persistence diagram of `filt` via the clearing reduction.
pub fn compute_persistence(filt: &Filtration) -> PersistenceDiagram {
    let m = BoundaryMatrix::from_filtration(filt);
    diagram_from_pairing(filt, &reduce_twist(&m))
}

/// Persistence diagram via plain reduction (no clearing).
pub fn compute_persistence_standard(filt: &Filtration) -> PersistenceDiagram {
    let m = BoundaryMatrix::from_filtration(filt);
    diagram_from_pairing(filt, &reduce_standard(&m))
}

/// Counts of significant bars per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BettiSummary {
    pub betti: Vec<usize>,
    /// Relative significance threshold ρ.
    pub rho: f64,
    /// Scale the threshold is relative to (max finite death).
    pub scale: f64,
}

/// A bar is significant when it never dies, or when its persistence is at
/// least `rho` times the largest finite death in the diagram.
pub fn betti_summary(diag: &PersistenceDiagram, rho: f64) -> Result<BettiSummary> {
    if diag.pairs.is_empty() {
        return Err(Error::Input("diagram is empty".into()));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Config(format!("rho must lie in (0, 1), got {rho}")));
    }
    let scale = diag.max_finite_death().unwrap_or(0.0);
    let top = diag
        .pairs
        .iter()
        .map(|p| p.dim)
        .max()
        .unwrap_or(0)
        .max(diag.meta.max_dim);
    let mut betti = vec![0; top + 1];
    for p in &diag.pairs {
        if p.is_infinite() || p.persistence() >= rho * scale {
            betti[p.dim] += 1;
        }
    }
    Ok(BettiSummary { betti, rho, scale })
}
