//! Output functions `g: M → V` applied pointwise along state trajectories.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::StateTrajectory;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservationKind {
    /// The ambient coordinates themselves.
    Identity,
    /// Scalar `b₀x + b₁y + b₂z`.
    RandomLinear,
    /// Scalar random polynomial of total degree ≤ 3 in the standardized
    /// coordinates.
    RandomPoly3,
}

impl ObservationKind {
    pub fn name(self) -> &'static str {
        match self {
            ObservationKind::Identity => "identity",
            ObservationKind::RandomLinear => "random-linear",
            ObservationKind::RandomPoly3 => "random-poly3",
        }
    }

    pub fn output_dim(self) -> usize {
        match self {
            ObservationKind::Identity => 3,
            ObservationKind::RandomLinear | ObservationKind::RandomPoly3 => 1,
        }
    }

    fn coefficient_count(self) -> usize {
        match self {
            ObservationKind::Identity => 0,
            ObservationKind::RandomLinear => 3,
            ObservationKind::RandomPoly3 => POLY3_EXPONENTS.len(),
        }
    }
}

impl fmt::Display for ObservationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObservationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(ObservationKind::Identity),
            "random-linear" => Ok(ObservationKind::RandomLinear),
            "random-poly3" => Ok(ObservationKind::RandomPoly3),
            other => Err(Error::Config(format!("unknown observation kind `{other}`"))),
        }
    }
}

/// Exponents `(a, b, c)` of the monomials `x^a y^b z^c` with `a+b+c ≤ 3`,
/// ordered by total degree, then lexicographically descending in `a`, `b`.
pub const POLY3_EXPONENTS: [(u8, u8, u8); 20] = [
    (0, 0, 0),
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (2, 0, 0),
    (1, 1, 0),
    (1, 0, 1),
    (0, 2, 0),
    (0, 1, 1),
    (0, 0, 2),
    (3, 0, 0),
    (2, 1, 0),
    (2, 0, 1),
    (1, 2, 0),
    (1, 1, 1),
    (1, 0, 2),
    (0, 3, 0),
    (0, 2, 1),
    (0, 1, 2),
    (0, 0, 3),
];

/// Affine per-axis map sending a bounding box onto `[-1, 1]³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxNormalization {
    pub center: [f64; 3],
    pub half_width: [f64; 3],
}

impl BoxNormalization {
    /// Bounding box of every state in `trajs`. Degenerate axes get unit width.
    pub fn from_trajectories(trajs: &[StateTrajectory]) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for s in trajs.iter().flat_map(|t| t.states.iter()) {
            for a in 0..3 {
                lo[a] = lo[a].min(s[a]);
                hi[a] = hi[a].max(s[a]);
            }
        }
        let mut center = [0.0; 3];
        let mut half_width = [1.0; 3];
        for a in 0..3 {
            if lo[a].is_finite() && hi[a].is_finite() {
                center[a] = 0.5 * (lo[a] + hi[a]);
                let w = 0.5 * (hi[a] - lo[a]);
                if w > 0.0 {
                    half_width[a] = w;
                }
            }
        }
        BoxNormalization { center, half_width }
    }

    pub fn apply(&self, p: &[f64; 3]) -> [f64; 3] {
        [
            (p[0] - self.center[0]) / self.half_width[0],
            (p[1] - self.center[1]) / self.half_width[1],
            (p[2] - self.center[2]) / self.half_width[2],
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSpec {
    pub kind: ObservationKind,
    #[serde(default)]
    pub seed: u64,
    /// Forces the coefficients instead of drawing them from `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    /// Standardization applied before polynomial observation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<BoxNormalization>,
}

impl ObservationSpec {
    pub fn new(kind: ObservationKind, seed: u64) -> Self {
        ObservationSpec {
            kind,
            seed,
            coefficients: None,
            normalization: None,
        }
    }

    pub fn identity() -> Self {
        Self::new(ObservationKind::Identity, 0)
    }

    pub fn output_dim(&self) -> usize {
        self.kind.output_dim()
    }

    /// The coefficient vector in use: forced, or `N(0, 1)` draws from `seed`.
    pub fn resolved_coefficients(&self) -> Result<Vec<f64>> {
        let m = self.kind.coefficient_count();
        match &self.coefficients {
            Some(c) if c.len() != m => Err(Error::Config(format!(
                "{} needs {m} coefficients, got {}",
                self.kind,
                c.len()
            ))),
            Some(c) => Ok(c.clone()),
            None => {
                let mut rng = seed::rng(self.seed);
                Ok((0..m).map(|_| rng.sample(StandardNormal)).collect())
            }
        }
    }
}

/// Observed values along one trajectory, stored row-major (`n × dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSeries {
    values: Vec<f64>,
    dim: usize,
    /// Index of the source trajectory in its sample, if known.
    pub source: Option<usize>,
}

impl ObservationSeries {
    pub fn new(values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("observation dimension must be positive".into()));
        }
        if values.len() % dim != 0 {
            return Err(Error::Input(format!(
                "{} values do not split into rows of dimension {dim}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite observation at row {}", i / dim)));
        }
        Ok(ObservationSeries {
            values,
            dim,
            source: None,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(1, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.as_ref().len() != dim {
                return Err(Error::Input(format!(
                    "row {i} has {} columns, expected {dim}",
                    r.as_ref().len()
                )));
            }
            values.extend_from_slice(r.as_ref());
        }
        Self::new(values, dim)
    }

    /// A scalar series.
    pub fn scalar(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 1)
    }

    pub fn with_source(mut self, source: usize) -> Self {
        self.source = Some(source);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A resolved observation function.
#[derive(Debug, Clone)]
pub struct Observer {
    kind: ObservationKind,
    coefficients: Vec<f64>,
    normalization: Option<BoxNormalization>,
}

impl Observer {
    pub fn new(spec: &ObservationSpec) -> Result<Self> {
        Ok(Observer {
            kind: spec.kind,
            coefficients: spec.resolved_coefficients()?,
            normalization: spec.normalization,
        })
    }

    pub fn output_dim(&self) -> usize {
        self.kind.output_dim()
    }

    pub fn apply(&self, p: &[f64; 3]) -> Vec<f64> {
        match self.kind {
            ObservationKind::Identity => p.to_vec(),
            ObservationKind::RandomLinear => {
                let b = &self.coefficients;
                vec![b[0] * p[0] + b[1] * p[1] + b[2] * p[2]]
            }
            ObservationKind::RandomPoly3 => {
                let q = match &self.normalization {
                    Some(n) => n.apply(p),
                    None => *p,
                };
                let v = POLY3_EXPONENTS
                    .iter()
                    .zip(&self.coefficients)
                    .map(|(&(a, b, c), k)| {
                        k * q[0].powi(a.into()) * q[1].powi(b.into()) * q[2].powi(c.into())
                    })
                    .sum();
                vec![v]
            }
        }
    }

    pub fn observe(&self, traj: &StateTrajectory) -> Result<ObservationSeries> {
        let d = self.output_dim();
        let mut values = Vec::with_capacity(traj.len() * d);
        for p in &traj.states {
            values.extend(self.apply(p));
        }
        ObservationSeries::new(values, d)
    }
}

pub fn observe(traj: &StateTrajectory, spec: &ObservationSpec) -> Result<ObservationSeries> {
    Observer::new(spec)?.observe(traj)
}

/// Adds i.i.d. `N(0, sigma²)` noise to every observed component.
pub fn add_noise(series: &mut [ObservationSeries], sigma: f64, seed: u64) -> Result<()> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!(
            "noise sigma must be non-negative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(());
    }
    let mut rng = seed::rng(seed);
    for s in series {
        for v in &mut s.values {
            *v += sigma * rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok(())
}
