//! The three dynamical systems and a fixed-step RK4 sampler.
//!
//! Sphere and torus flows are integrated in intrinsic angular coordinates
//! and mapped to their standard embeddings in R³ on output, so trajectories
//! never drift off the manifold. Lorenz is integrated directly in R³.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Major radius of the embedded torus.
pub const TORUS_MAJOR: f64 = 2.0;
/// Minor radius of the embedded torus.
pub const TORUS_MINOR: f64 = 1.0;

pub const DEFAULT_SUBSTEPS: usize = 10;

/// Lorenz long-run parameters used by [`sample_initial_conditions`].
pub const LORENZ_SEED_POINT: [f64; 3] = [1.0, 1.0, 1.0];
pub const LORENZ_TRANSIENT: f64 = 10.0;
const LORENZ_LONG_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    SphereHeightGradient,
    TorusFourierGradient,
    Lorenz,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::SphereHeightGradient => "sphere-height-gradient",
            SystemKind::TorusFourierGradient => "torus-fourier-gradient",
            SystemKind::Lorenz => "lorenz",
        }
    }

    /// Dimension of the coordinate chart the vector field acts on.
    pub fn chart_dim(self) -> usize {
        match self {
            SystemKind::SphereHeightGradient | SystemKind::TorusFourierGradient => 2,
            SystemKind::Lorenz => 3,
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere-height-gradient" | "sphere" => Ok(SystemKind::SphereHeightGradient),
            "torus-fourier-gradient" | "torus" => Ok(SystemKind::TorusFourierGradient),
            "lorenz" => Ok(SystemKind::Lorenz),
            other => Err(Error::Config(format!("unknown system kind `{other}`"))),
        }
    }
}

/// A system kind plus its named real parameters.
///
/// Recognised parameters:
/// * Lorenz: `sigma` (10), `rho` (28), `beta` (8/3), `segment_time` (0.5,
///   spacing of segment starts along the long run).
/// * Torus: `degree` (2), `coefficient_seed` (0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub kind: SystemKind,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl SystemSpec {
    pub fn new(kind: SystemKind) -> Self {
        SystemSpec {
            kind,
            params: BTreeMap::new(),
        }
    }

    pub fn sphere() -> Self {
        Self::new(SystemKind::SphereHeightGradient)
    }

    pub fn torus(degree: usize, coefficient_seed: u64) -> Self {
        Self::new(SystemKind::TorusFourierGradient)
            .with_param("degree", degree as f64)
            .with_param("coefficient_seed", coefficient_seed as f64)
    }

    pub fn lorenz() -> Self {
        Self::new(SystemKind::Lorenz)
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_owned(), value);
        self
    }

    pub fn param(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }
}

/// Uniform sampling of a trajectory window `[-T, T]` with `n` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub n: usize,
    /// Half-length `T` of the time window.
    pub half_window: f64,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
}

fn default_substeps() -> usize {
    DEFAULT_SUBSTEPS
}

impl SamplingSpec {
    pub fn new(n: usize, half_window: f64) -> Result<Self> {
        let s = SamplingSpec {
            n,
            half_window,
            substeps: DEFAULT_SUBSTEPS,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("need n >= 2 samples, got {}", self.n)));
        }
        if !(self.half_window.is_finite() && self.half_window > 0.0) {
            return Err(Error::Config(format!(
                "half window T must be positive and finite, got {}",
                self.half_window
            )));
        }
        if self.substeps == 0 {
            return Err(Error::Config("substeps must be positive".into()));
        }
        Ok(())
    }

    /// Sampling interval δ = 2T/(n−1); equals T/k when n = 2k+1.
    pub fn step(&self) -> f64 {
        2.0 * self.half_window / (self.n - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let d = self.step();
        (0..self.n).map(|i| -self.half_window + i as f64 * d).collect()
    }
}

/// Sampled states in ambient R³ at uniformly spaced times.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTrajectory {
    pub states: Vec<[f64; 3]>,
    pub times: Vec<f64>,
}

impl StateTrajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Random Fourier polynomial on the torus,
/// `f(θ, φ) = Σ a_ij cos((i+1)θ + θ_ij) cos((j+1)φ + φ_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierLandscape {
    degree: usize,
    amp: Vec<f64>,
    theta_phase: Vec<f64>,
    phi_phase: Vec<f64>,
}

impl FourierLandscape {
    pub fn random(degree: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let m = (degree + 1) * (degree + 1);
        let mut amp = Vec::with_capacity(m);
        let mut theta_phase = Vec::with_capacity(m);
        let mut phi_phase = Vec::with_capacity(m);
        for _ in 0..m {
            amp.push(rng.sample::<f64, _>(StandardNormal));
            theta_phase.push(rng.random::<f64>() * TAU);
            phi_phase.push(rng.random::<f64>() * TAU);
        }
        FourierLandscape {
            degree,
            amp,
            theta_phase,
            phi_phase,
        }
    }

    pub fn value(&self, theta: f64, phi: f64) -> f64 {
        let k = self.degree + 1;
        let mut f = 0.0;
        for i in 0..k {
            for j in 0..k {
                let c = i * k + j;
                f += self.amp[c]
                    * ((i + 1) as f64 * theta + self.theta_phase[c]).cos()
                    * ((j + 1) as f64 * phi + self.phi_phase[c]).cos();
            }
        }
        f
    }

    /// Coordinate partials `(∂f/∂θ, ∂f/∂φ)`.
    pub fn partials(&self, theta: f64, phi: f64) -> (f64, f64) {
        let k = self.degree + 1;
        let (mut dt, mut dp) = (0.0, 0.0);
        for i in 0..k {
            let wi = (i + 1) as f64;
            for j in 0..k {
                let wj = (j + 1) as f64;
                let c = i * k + j;
                let at = wi * theta + self.theta_phase[c];
                let ap = wj * phi + self.phi_phase[c];
                dt -= self.amp[c] * wi * at.sin() * ap.cos();
                dp -= self.amp[c] * wj * at.cos() * ap.sin();
            }
        }
        (dt, dp)
    }
}

/// A [`SystemSpec`] resolved into something that can be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum System {
    /// Gradient ascent of the height `z` on S², chart (polar angle, azimuth).
    SphereHeight,
    /// Gradient ascent of a Fourier landscape on T², chart (θ, φ).
    TorusFourier(FourierLandscape),
    Lorenz {
        sigma: f64,
        rho: f64,
        beta: f64,
    },
}

impl System {
    pub fn from_spec(spec: &SystemSpec) -> Result<Self> {
        for (k, v) in &spec.params {
            if !v.is_finite() {
                return Err(Error::Config(format!("parameter `{k}` is not finite")));
            }
        }
        Ok(match spec.kind {
            SystemKind::SphereHeightGradient => System::SphereHeight,
            SystemKind::TorusFourierGradient => {
                let degree = spec.param("degree", 2.0);
                if degree < 0.0 || degree.fract() != 0.0 {
                    return Err(Error::Config(format!(
                        "torus Fourier degree must be a non-negative integer, got {degree}"
                    )));
                }
                let seed = spec.param("coefficient_seed", 0.0);
                if seed < 0.0 {
                    return Err(Error::Config("coefficient_seed must be non-negative".into()));
                }
                System::TorusFourier(FourierLandscape::random(degree as usize, seed as u64))
            }
            SystemKind::Lorenz => System::Lorenz {
                sigma: spec.param("sigma", 10.0),
                rho: spec.param("rho", 28.0),
                beta: spec.param("beta", 8.0 / 3.0),
            },
        })
    }

    pub fn kind(&self) -> SystemKind {
        match self {
            System::SphereHeight => SystemKind::SphereHeightGradient,
            System::TorusFourier(_) => SystemKind::TorusFourierGradient,
            System::Lorenz { .. } => SystemKind::Lorenz,
        }
    }

    fn rhs(&self, s: &[f64; 3]) -> [f64; 3] {
        match self {
            // h = cos(polar); |∂_polar|² = 1, so grad h = (-sin polar, 0)
            System::SphereHeight => [-s[0].sin(), 0.0, 0.0],
            System::TorusFourier(f) => {
                let (ft, fp) = f.partials(s[0], s[1]);
                let rho = TORUS_MAJOR + TORUS_MINOR * s[1].cos();
                [ft / (rho * rho), fp / (TORUS_MINOR * TORUS_MINOR), 0.0]
            }
            System::Lorenz { sigma, rho, beta } => [
                sigma * (s[1] - s[0]),
                s[0] * (rho - s[2]) - s[1],
                s[0] * s[1] - beta * s[2],
            ],
        }
    }

    pub fn vector_field(&self, state: &[f64]) -> Result<Vec<f64>> {
        let s = self.chart_point(state)?;
        let d = self.kind().chart_dim();
        Ok(self.rhs(&s)[..d].to_vec())
    }

    fn chart_point(&self, state: &[f64]) -> Result<[f64; 3]> {
        let d = self.kind().chart_dim();
        if state.len() != d {
            return Err(Error::Config(format!(
                "{} expects a {d}-dimensional chart point, got {}",
                self.kind(),
                state.len()
            )));
        }
        let mut s = [0.0; 3];
        s[..d].copy_from_slice(state);
        Ok(s)
    }

    /// Maps a chart point to ambient R³.
    pub fn to_ambient(&self, s: &[f64; 3]) -> [f64; 3] {
        match self {
            System::SphereHeight => {
                let (sp, cp) = s[0].sin_cos();
                let (sa, ca) = s[1].sin_cos();
                [sp * ca, sp * sa, cp]
            }
            System::TorusFourier(_) => {
                let (st, ct) = s[0].sin_cos();
                let (sf, cf) = s[1].sin_cos();
                let rho = TORUS_MAJOR + TORUS_MINOR * cf;
                [rho * ct, rho * st, TORUS_MINOR * sf]
            }
            System::Lorenz { .. } => *s,
        }
    }

    fn rk4_step(&self, s: &[f64; 3], h: f64) -> [f64; 3] {
        let add = |a: &[f64; 3], b: &[f64; 3], c: f64| [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]];
        let k1 = self.rhs(s);
        let k2 = self.rhs(&add(s, &k1, 0.5 * h));
        let k3 = self.rhs(&add(s, &k2, 0.5 * h));
        let k4 = self.rhs(&add(s, &k3, h));
        let mut out = *s;
        for i in 0..3 {
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out
    }

    /// Advances `s` by `steps` RK4 steps of size `h` (negative `h` runs
    /// backwards), checking for blow-up after every step.
    fn advance(&self, mut s: [f64; 3], t0: f64, h: f64, steps: usize) -> Result<[f64; 3]> {
        for m in 0..steps {
            s = self.rk4_step(&s, h);
            if !s.iter().all(|v| v.is_finite()) {
                return Err(Error::IntegrationBlowup {
                    time: t0 + (m + 1) as f64 * h,
                });
            }
        }
        Ok(s)
    }

    /// Samples the flow line through `x0` (the state at time 0) at the
    /// uniform times of `sampling`.
    pub fn integrate(&self, x0: &[f64], sampling: &SamplingSpec) -> Result<StateTrajectory> {
        sampling.validate()?;
        let s0 = self.chart_point(x0)?;
        if !s0.iter().all(|v| v.is_finite()) {
            return Err(Error::Config("initial state is not finite".into()));
        }
        let delta = sampling.step();
        let h = delta / sampling.substeps as f64;
        let times = sampling.times();

        // Back to -T with the same nominal step, then forward sample by sample.
        let back_steps = ((sampling.half_window / h) - 1e-9).ceil().max(1.0) as usize;
        let back_h = -sampling.half_window / back_steps as f64;
        let mut s = self.advance(s0, 0.0, back_h, back_steps)?;

        let mut states = Vec::with_capacity(sampling.n);
        states.push(self.to_ambient(&s));
        for t in &times[..sampling.n - 1] {
            s = self.advance(s, *t, h, sampling.substeps)?;
            states.push(self.to_ambient(&s));
        }
        Ok(StateTrajectory { states, times })
    }
}

pub fn vector_field(spec: &SystemSpec, state: &[f64]) -> Result<Vec<f64>> {
    System::from_spec(spec)?.vector_field(state)
}

pub fn integrate(spec: &SystemSpec, x0: &[f64], sampling: &SamplingSpec) -> Result<StateTrajectory> {
    System::from_spec(spec)?.integrate(x0, sampling)
}

/// Draws `count` chart points.
///
/// Sphere: area-uniform (cosine of the polar angle uniform). Torus: uniform
/// in (θ, φ). Lorenz: one long run from a seed point near
/// [`LORENZ_SEED_POINT`] (jittered by `seed`), a transient of
/// [`LORENZ_TRANSIENT`] discarded, then the starts of `count` consecutive
/// segments of length `segment_time`.
pub fn sample_initial_conditions(spec: &SystemSpec, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(Error::Config("count must be at least 1".into()));
    }
    let system = System::from_spec(spec)?;
    let mut rng = seed::rng(seed);
    match system {
        System::SphereHeight => Ok((0..count)
            .map(|_| {
                let c: f64 = rng.random_range(-1.0..=1.0);
                let az: f64 = rng.random::<f64>() * TAU;
                vec![c.acos(), az]
            })
            .collect()),
        System::TorusFourier(_) => Ok((0..count)
            .map(|_| vec![rng.random::<f64>() * TAU, rng.random::<f64>() * TAU])
            .collect()),
        System::Lorenz { .. } => {
            let segment = spec.param("segment_time", 0.5);
            if !(segment > 0.0) {
                return Err(Error::Config("segment_time must be positive".into()));
            }
            let mut s = LORENZ_SEED_POINT;
            for v in s.iter_mut() {
                *v += rng.random_range(-0.5..0.5);
            }
            let transient_steps = (LORENZ_TRANSIENT / LORENZ_LONG_STEP).round() as usize;
            s = system.advance(s, 0.0, LORENZ_LONG_STEP, transient_steps)?;
            let seg_steps = (segment / LORENZ_LONG_STEP).round().max(1.0) as usize;
            let mut starts = Vec::with_capacity(count);
            let mut t = LORENZ_TRANSIENT;
            for i in 0..count {
                if i > 0 {
                    s = system.advance(s, t, LORENZ_LONG_STEP, seg_steps)?;
                    t += seg_steps as f64 * LORENZ_LONG_STEP;
                }
                starts.push(s.to_vec());
            }
            Ok(starts)
        }
    }
}
