//! Matching-substring ("slack") distance between observation series.
//!
//! For two series of length `n`, the match profile records, for every run
//! length `L`, the smallest `ε` such that some aligned pair of contiguous
//! runs `y₁[i..i+L]`, `y₂[j..j+L]` stays within `ε` step by step. The slack
//! distance at slack `t` is the profile value at run length `n − t`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observation::ObservationSeries;

/// Largest series length the brute-force oracle accepts.
pub const BRUTEFORCE_MAX_LEN: usize = 200;

const INACTIVE: u32 = u32::MAX;

/// Euclidean distance between two observed vectors.
#[inline]
pub fn step_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `eps[L - 1]` is the minimal sup-distance over common runs of length `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchProfile {
    eps: Vec<f64>,
}

impl MatchProfile {
    /// Series length `n` the profile was computed for.
    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    /// Profile value for run length `run_len ∈ 1..=n`.
    pub fn eps(&self, run_len: usize) -> f64 {
        self.eps[run_len - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.eps
    }
}

fn check_pair(y1: &ObservationSeries, y2: &ObservationSeries) -> Result<usize> {
    if y1.len() != y2.len() {
        return Err(Error::Input(format!(
            "series lengths differ: {} vs {}",
            y1.len(),
            y2.len()
        )));
    }
    if y1.dim() != y2.dim() {
        return Err(Error::Input(format!(
            "series dimensions differ: {} vs {}",
            y1.dim(),
            y2.dim()
        )));
    }
    if y1.is_empty() {
        return Err(Error::Input("series are empty".into()));
    }
    if y1.len() > (INACTIVE as usize).isqrt() {
        return Err(Error::Input(format!("series length {} is too long", y1.len())));
    }
    Ok(y1.len())
}

/// Computes the match profile by activating the cells of the pairwise
/// distance matrix in ascending order and merging runs along diagonals.
///
/// Runs are tracked by their endpoints: for an active run from cell `a` to
/// cell `b` on one diagonal, `other_end[a] = b` and `other_end[b] = a`.
/// Each activation joins at most one run from the upper-left and one from
/// the lower-right, so the whole sweep is dominated by the `O(n² log n)`
/// sort.
pub fn match_profile(y1: &ObservationSeries, y2: &ObservationSeries) -> Result<MatchProfile> {
    let n = check_pair(y1, y2)?;
    let cells = n * n;

    // Distances are non-negative, so their bit patterns sort like the values;
    // ties go by (i, j).
    let mut order: Vec<(u64, u32)> = Vec::with_capacity(cells);
    for i in 0..n {
        let a = y1.row(i);
        for j in 0..n {
            order.push((step_distance(a, y2.row(j)).to_bits(), (i * n + j) as u32));
        }
    }
    order.sort_unstable();

    let mut other_end = vec![INACTIVE; cells];
    let mut raw = vec![f64::INFINITY; n];
    let mut longest = 0;
    for &(bits, c) in &order {
        let c = c as usize;
        let (i, j) = (c / n, c % n);
        let v = f64::from_bits(bits);

        let start = if i > 0 && j > 0 && other_end[c - n - 1] != INACTIVE {
            other_end[c - n - 1] as usize
        } else {
            c
        };
        let end = if i + 1 < n && j + 1 < n && other_end[c + n + 1] != INACTIVE {
            other_end[c + n + 1] as usize
        } else {
            c
        };
        other_end[c] = c as u32;
        other_end[start] = end as u32;
        other_end[end] = start as u32;

        let len = end / n - start / n + 1;
        if v < raw[len - 1] {
            raw[len - 1] = v;
        }
        if len > longest {
            longest = len;
            if longest == n {
                break;
            }
        }
    }

    // A run of length L' contains runs of every shorter length.
    let mut eps = raw;
    for l in (0..n - 1).rev() {
        if eps[l + 1] < eps[l] {
            eps[l] = eps[l + 1];
        }
    }
    Ok(MatchProfile { eps })
}

/// Evaluates the defining min-max directly over every offset pair and run
/// length. `O(n³)`; refuses series longer than [`BRUTEFORCE_MAX_LEN`].
pub fn match_profile_bruteforce(y1: &ObservationSeries, y2: &ObservationSeries) -> Result<MatchProfile> {
    let n = check_pair(y1, y2)?;
    if n > BRUTEFORCE_MAX_LEN {
        return Err(Error::OracleGuard {
            n,
            limit: BRUTEFORCE_MAX_LEN,
        });
    }
    let mut eps = vec![f64::INFINITY; n];
    for i in 0..n {
        for j in 0..n {
            let mut worst: f64 = 0.0;
            for m in 0..n - i.max(j) {
                worst = worst.max(step_distance(y1.row(i + m), y2.row(j + m)));
                if worst < eps[m] {
                    eps[m] = worst;
                }
            }
        }
    }
    Ok(MatchProfile { eps })
}

/// Slack distance at slack `t`: the profile value at run length `n − t`.
pub fn slack_distance(profile: &MatchProfile, t: usize) -> Result<f64> {
    let n = profile.len();
    if t >= n {
        return Err(Error::Input(format!(
            "slack {t} out of range for series length {n} (need t <= {})",
            n.saturating_sub(1)
        )));
    }
    Ok(profile.eps(n - t))
}

/// Symmetric N×N matrix of slack distances at a fixed slack.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    size: usize,
    series_len: usize,
    slack: usize,
    data: Vec<f64>,
}

impl DissimilarityMatrix {
    /// Wraps an explicit dense matrix. Checks shape, symmetry, zero
    /// diagonal and non-negativity.
    pub fn from_dense(size: usize, data: Vec<f64>, series_len: usize, slack: usize) -> Result<Self> {
        if data.len() != size * size {
            return Err(Error::Input(format!(
                "expected {} entries for a {size}x{size} matrix, got {}",
                size * size,
                data.len()
            )));
        }
        for a in 0..size {
            if data[a * size + a] != 0.0 {
                return Err(Error::Input(format!("diagonal entry {a} is not zero")));
            }
            for b in 0..a {
                let v = data[a * size + b];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Input(format!(
                        "entry ({a}, {b}) = {v} is not a finite non-negative value"
                    )));
                }
                if v != data[b * size + a] {
                    return Err(Error::Input(format!("matrix is not symmetric at ({a}, {b})")));
                }
            }
        }
        Ok(DissimilarityMatrix {
            size,
            series_len,
            slack,
            data,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Length `n` of the underlying series (0 when unknown).
    pub fn series_len(&self) -> usize {
        self.series_len
    }

    pub fn slack(&self) -> usize {
        self.slack
    }

    /// Run length `n − t` the entries were taken at.
    pub fn run_len(&self) -> usize {
        self.series_len.saturating_sub(self.slack)
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.size + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.data[a * self.size..(a + 1) * self.size]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// CSV: one row per line, comma-separated, no header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for a in 0..self.size {
            let row: Vec<String> = self.row(a).iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut data = Vec::new();
        let mut rows = 0;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            for field in line.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Input(format!(
                        "line {}: cannot parse `{}` as a number",
                        ln + 1,
                        field.trim()
                    ))
                })?;
                data.push(v);
            }
            rows += 1;
        }
        Self::from_dense(rows, data, 0, 0)
    }

    pub fn to_json(&self, system: &str, seed: u64) -> Result<String> {
        let doc = MatrixDocument {
            n_series: self.size,
            series_len: self.series_len,
            slack: self.slack,
            system: system.to_owned(),
            seed,
            matrix: (0..self.size).map(|a| self.row(a).to_vec()).collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

/// JSON wrapper for an exported matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixDocument {
    #[serde(rename = "N")]
    pub n_series: usize,
    #[serde(rename = "n")]
    pub series_len: usize,
    #[serde(rename = "t")]
    pub slack: usize,
    pub system: String,
    pub seed: u64,
    pub matrix: Vec<Vec<f64>>,
}

impl MatrixDocument {
    pub fn into_matrix(self) -> Result<DissimilarityMatrix> {
        let size = self.matrix.len();
        let data = self.matrix.into_iter().flatten().collect();
        DissimilarityMatrix::from_dense(size, data, self.series_len, self.slack)
    }
}

fn check_sample(series: &[ObservationSeries]) -> Result<(usize, usize)> {
    let first = series
        .first()
        .ok_or_else(|| Error::Input("no series given".into()))?;
    let (n, d) = (first.len(), first.dim());
    if n == 0 {
        return Err(Error::Input("series are empty".into()));
    }
    for (k, s) in series.iter().enumerate() {
        if s.len() != n || s.dim() != d {
            return Err(Error::Input(format!(
                "series {k} has shape {}x{}, expected {n}x{d}",
                s.len(),
                s.dim()
            )));
        }
    }
    Ok((n, d))
}

/// Match profiles for every unordered pair of a sample; slack-independent,
/// so a sweep over `t` computes them once.
#[derive(Debug, Clone)]
pub struct ProfileTable {
    size: usize,
    series_len: usize,
    // upper triangle, row-major, a < b
    profiles: Vec<MatchProfile>,
}

impl ProfileTable {
    pub fn compute(series: &[ObservationSeries]) -> Result<Self> {
        let (n, _) = check_sample(series)?;
        let size = series.len();
        let pairs: Vec<(usize, usize)> = (0..size)
            .flat_map(|a| (a + 1..size).map(move |b| (a, b)))
            .collect();
        let profiles = pairs
            .par_iter()
            .map(|&(a, b)| match_profile(&series[a], &series[b]))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProfileTable {
            size,
            series_len: n,
            profiles,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn series_len(&self) -> usize {
        self.series_len
    }

    pub fn profile(&self, a: usize, b: usize) -> Option<&MatchProfile> {
        if a == b || a >= self.size || b >= self.size {
            return None;
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        // offset of row a in the packed upper triangle
        let row = a * self.size - a * (a + 1) / 2;
        Some(&self.profiles[row + (b - a - 1)])
    }

    pub fn matrix(&self, t: usize) -> Result<DissimilarityMatrix> {
        if t >= self.series_len {
            return Err(Error::Input(format!(
                "slack {t} out of range for series length {} (need t <= {})",
                self.series_len,
                self.series_len - 1
            )));
        }
        let size = self.size;
        let mut data = vec![0.0; size * size];
        let mut k = 0;
        for a in 0..size {
            for b in a + 1..size {
                let v = slack_distance(&self.profiles[k], t)?;
                data[a * size + b] = v;
                data[b * size + a] = v;
                k += 1;
            }
        }
        Ok(DissimilarityMatrix {
            size,
            series_len: self.series_len,
            slack: t,
            data,
        })
    }
}

/// Pairwise slack distances at slack `t`, each pair computed once.
pub fn dissimilarity_matrix(series: &[ObservationSeries], t: usize) -> Result<DissimilarityMatrix> {
    let (n, _) = check_sample(series)?;
    if t >= n {
        return Err(Error::Input(format!(
            "slack {t} out of range for series length {n} (need t <= {})",
            n - 1
        )));
    }
    ProfileTable::compute(series)?.matrix(t)
}
