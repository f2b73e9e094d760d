//! End-to-end experiment runs, presets and artifact output.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, SamplingSpec, StateTrajectory, System, SystemKind, SystemSpec};
use crate::error::{Error, Result};
use crate::filtration::{self, DEFAULT_MAX_DIM};
use crate::observation::{
    self, BoxNormalization, ObservationKind, ObservationSeries, ObservationSpec, Observer,
};
use crate::persistence::{self, BettiSummary, PersistenceDiagram, DEFAULT_RHO};
use crate::plot;
use crate::seed;
use crate::slack::{DissimilarityMatrix, ProfileTable};

/// Expected Betti numbers; `None` entries are unconstrained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BettiSignature(pub Vec<Option<usize>>);

impl BettiSignature {
    pub fn exact(betti: &[usize]) -> Self {
        BettiSignature(betti.iter().map(|&b| Some(b)).collect())
    }

    pub fn matches(&self, betti: &[usize]) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(k, e)| e.is_none_or(|e| betti.get(k).copied().unwrap_or(0) == e))
    }
}

impl std::fmt::Display for BettiSignature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|e| e.map_or_else(|| "*".to_owned(), |v| v.to_string()))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// How the persistence diagram is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Coboundary reduction straight off the matrix; top-dimensional
    /// simplices are never stored.
    #[default]
    Implicit,
    /// Materialized filtration followed by boundary reduction with clearing.
    Explicit,
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "implicit" => Ok(Engine::Implicit),
            "explicit" => Ok(Engine::Explicit),
            other => Err(Error::Config(format!(
                "unknown engine `{other}` (implicit|explicit)"
            ))),
        }
    }
}

fn default_rho() -> f64 {
    DEFAULT_RHO
}

fn default_max_dim() -> usize {
    DEFAULT_MAX_DIM
}

/// Everything needed to reproduce a run. Serialized as one flat JSON
/// document; see the README for the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub system: SystemSpec,
    pub sampling: SamplingSpec,
    pub observation: ObservationKind,
    pub n_trajectories: usize,
    pub slack: usize,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<BettiSignature>,
    /// Where artifacts go; not part of the reproducible record.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.sampling.validate()?;
        if self.n_trajectories < 2 {
            return Err(Error::Config(format!(
                "need at least 2 trajectories, got {}",
                self.n_trajectories
            )));
        }
        if self.slack >= self.sampling.n {
            return Err(Error::Config(format!(
                "slack {} out of range for n = {} (need t <= {})",
                self.slack,
                self.sampling.n,
                self.sampling.n - 1
            )));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::Config(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        if let Some(r) = self.r_max {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Config(format!("r_max must be positive, got {r}")));
            }
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config("noise_sigma must be non-negative".into()));
        }
        if self.observation == ObservationKind::Identity && self.system.kind.chart_dim() > 3 {
            return Err(Error::Config(
                "identity observation needs 3-dimensional states".into(),
            ));
        }
        System::from_spec(&self.resolved_system())?;
        Ok(())
    }

    /// The system spec with seed-derived parameters filled in.
    pub fn resolved_system(&self) -> SystemSpec {
        let mut spec = self.system.clone();
        match spec.kind {
            SystemKind::TorusFourierGradient => {
                if !spec.params.contains_key("coefficient_seed") {
                    // keep it exactly representable as f64
                    let s = seed::derive(self.seed, seed::LANDSCAPE) >> 11;
                    spec.params.insert("coefficient_seed".into(), s as f64);
                }
            }
            SystemKind::Lorenz => {
                if !spec.params.contains_key("segment_time") {
                    spec.params
                        .insert("segment_time".into(), 2.0 * self.sampling.half_window);
                }
            }
            SystemKind::SphereHeightGradient => {}
        }
        spec
    }

    pub fn observation_spec(&self) -> ObservationSpec {
        ObservationSpec::new(self.observation, seed::derive(self.seed, seed::OBSERVATION))
    }

    pub fn experiment_id(&self) -> String {
        format!(
            "{}-seed{}-t{}",
            self.name.as_deref().unwrap_or(self.system.kind.name()),
            self.seed,
            self.slack
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// A named configuration reproducing one of the reference experiments.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    /// Configuration at the reference sample size.
    pub config: ExperimentConfig,
    /// Smaller trajectory count used by the acceptance suite.
    pub desk_n: usize,
}

impl Preset {
    pub fn desk_config(&self) -> ExperimentConfig {
        let mut cfg = self.config.clone();
        cfg.n_trajectories = self.desk_n;
        cfg
    }
}

#[allow(clippy::too_many_arguments)]
fn preset(
    name: &'static str,
    description: &'static str,
    system: SystemSpec,
    observation: ObservationKind,
    n_traj: usize,
    n: usize,
    t: usize,
    half_window: f64,
    expected: BettiSignature,
    desk_n: usize,
) -> Preset {
    Preset {
        name,
        description,
        config: ExperimentConfig {
            name: Some(name.to_owned()),
            system,
            sampling: SamplingSpec::new(n, half_window).expect("preset sampling is valid"),
            observation,
            n_trajectories: n_traj,
            slack: t,
            rho: DEFAULT_RHO,
            seed: 0,
            r_max: None,
            max_dim: DEFAULT_MAX_DIM,
            engine: Engine::Implicit,
            noise_sigma: 0.0,
            expected: Some(expected),
            output_dir: None,
        },
        desk_n,
    }
}

pub fn presets() -> Vec<Preset> {
    use ObservationKind::*;
    let lorenz = |e: &[Option<usize>]| BettiSignature(e.to_vec());
    vec![
        preset(
            "sphere-height",
            "gradient flow of the height function on S², identity observation",
            SystemSpec::sphere(),
            Identity,
            400,
            15,
            10,
            1.5,
            BettiSignature::exact(&[1, 0, 1]),
            200,
        ),
        preset(
            "torus-fourier",
            "gradient flow of a random Fourier polynomial on T², embedding observation",
            SystemSpec::new(SystemKind::TorusFourierGradient).with_param("degree", 2.0),
            Identity,
            400,
            25,
            3,
            2.5,
            BettiSignature::exact(&[1, 2, 1]),
            250,
        ),
        preset(
            "torus-scalar",
            "torus gradient flow seen through a random linear functional",
            SystemSpec::new(SystemKind::TorusFourierGradient).with_param("degree", 2.0),
            RandomLinear,
            650,
            25,
            1,
            2.5,
            BettiSignature::exact(&[1, 2, 1]),
            300,
        ),
        preset(
            "lorenz-short",
            "Lorenz segments of length 0.5, identity observation",
            SystemSpec::lorenz(),
            Identity,
            100,
            25,
            20,
            0.25,
            lorenz(&[Some(1), Some(2)]),
            100,
        ),
        preset(
            "lorenz-poly",
            "Lorenz segments through a random cubic polynomial",
            SystemSpec::lorenz(),
            RandomPoly3,
            150,
            25,
            10,
            0.25,
            lorenz(&[None, Some(2)]),
            150,
        ),
        preset(
            "lorenz-long",
            "Lorenz segments of length 1.0, identity observation",
            SystemSpec::lorenz(),
            Identity,
            100,
            25,
            20,
            0.5,
            lorenz(&[None, Some(4)]),
            100,
        ),
    ]
}

pub fn find_preset(name: &str) -> Result<Preset> {
    presets().into_iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<_> = presets().iter().map(|p| p.name).collect();
        Error::Config(format!(
            "unknown preset `{name}` (available: {})",
            names.join(", ")
        ))
    })
}

/// Integrates one trajectory per sampled initial condition.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Vec<StateTrajectory>> {
    let spec = cfg.resolved_system();
    let system = System::from_spec(&spec)?;
    let starts = dynamics::sample_initial_conditions(
        &spec,
        cfg.n_trajectories,
        seed::derive(cfg.seed, seed::INITIAL_CONDITIONS),
    )?;
    starts
        .par_iter()
        .map(|x0| system.integrate(x0, &cfg.sampling))
        .collect()
}

/// Applies the configured observation (and noise) to every trajectory.
pub fn observe_all(cfg: &ExperimentConfig, trajs: &[StateTrajectory]) -> Result<Vec<ObservationSeries>> {
    let mut spec = cfg.observation_spec();
    if spec.kind == ObservationKind::RandomPoly3 {
        spec.normalization = Some(BoxNormalization::from_trajectories(trajs));
    }
    let observer = Observer::new(&spec)?;
    let mut series = trajs
        .iter()
        .enumerate()
        .map(|(k, tr)| observer.observe(tr).map(|s| s.with_source(k)))
        .collect::<Result<Vec<_>>>()?;
    observation::add_noise(&mut series, cfg.noise_sigma, seed::derive(cfg.seed, seed::NOISE))?;
    Ok(series)
}

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub simulate_ms: f64,
    pub observe_ms: f64,
    pub distances_ms: f64,
    pub filtration_ms: f64,
    pub persistence_ms: f64,
}

impl StageTimings {
    pub fn total_ms(&self) -> f64 {
        self.simulate_ms + self.observe_ms + self.distances_ms + self.filtration_ms + self.persistence_ms
    }
}

/// Summary of one run. The serialized form is deterministic given the
/// config; timings and the in-memory diagram are kept out of it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub r_max: f64,
    pub filtration_size: usize,
    pub simplices_by_dim: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagram_path: Option<String>,
    pub betti: BettiSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matches_expected: Option<bool>,
    #[serde(skip)]
    pub timings: StageTimings,
    #[serde(skip)]
    pub diagram: Option<PersistenceDiagram>,
}

/// Result of the matrix → diagram → Betti stages.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub r_max: f64,
    pub simplices_by_dim: Vec<usize>,
    pub diagram: PersistenceDiagram,
    pub betti: BettiSummary,
    pub filtration_ms: f64,
    pub persistence_ms: f64,
}

/// Computes persistence of the matrix and summarizes it. Without an
/// explicit `r_max` the cutoff is the enclosing radius, so the diagram is
/// complete.
pub fn analyze_matrix(
    matrix: &DissimilarityMatrix,
    max_dim: usize,
    r_max: Option<f64>,
    rho: f64,
    engine: Engine,
) -> Result<Analysis> {
    let clock = Instant::now();
    let r_max = match r_max {
        Some(r) => r,
        None => filtration::enclosing_radius(matrix).map_err(|e| e.in_stage("filtration"))?,
    };
    // an all-zero matrix has nothing to resolve
    let r_max = if r_max > 0.0 { r_max } else { f64::MIN_POSITIVE };
    let (simplices_by_dim, mut diagram, filtration_ms, persistence_ms) = match engine {
        Engine::Explicit => {
            let filt = filtration::build_vr_filtration(matrix, max_dim, r_max)
                .map_err(|e| e.in_stage("filtration"))?;
            let filtration_ms = ms(clock);
            let clock = Instant::now();
            let diagram = persistence::compute_persistence(&filt);
            let mut counts = filt.counts_by_dim();
            counts.truncate(max_dim + 1);
            (counts, diagram, filtration_ms, ms(clock))
        }
        Engine::Implicit => {
            let filtration_ms = ms(clock);
            let clock = Instant::now();
            let out = persistence::rips_persistence(matrix, max_dim, r_max)
                .map_err(|e| e.in_stage("persistence"))?;
            (out.simplices_by_dim, out.diagram, filtration_ms, ms(clock))
        }
    };
    diagram.meta.t = Some(matrix.slack());
    let betti = persistence::betti_summary(&diagram, rho).map_err(|e| e.in_stage("persistence"))?;
    Ok(Analysis {
        r_max,
        simplices_by_dim,
        diagram,
        betti,
        filtration_ms,
        persistence_ms,
    })
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Which artifacts to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    Json,
    Csv,
    Svg,
    #[default]
    All,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            "all" => Ok(OutputFormat::All),
            other => Err(Error::Config(format!(
                "unknown format `{other}` (json|csv|svg|all)"
            ))),
        }
    }
}

impl OutputFormat {
    fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::All)
    }
    fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::All)
    }
    fn svg(self) -> bool {
        matches!(self, OutputFormat::Svg | OutputFormat::All)
    }
}

/// Writes a set of files, deleting everything written so far if any write
/// fails.
pub struct ArtifactWriter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(ArtifactWriter {
            dir: dir.to_owned(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        match fs::write(&path, contents) {
            Ok(()) => {
                self.written.push(path);
                Ok(())
            }
            Err(e) => {
                self.rollback();
                Err(Error::io(path, e))
            }
        }
    }

    pub fn rollback(&mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(p);
        }
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

fn write_run_artifacts(
    dir: &Path,
    format: OutputFormat,
    cfg: &ExperimentConfig,
    matrix: &DissimilarityMatrix,
    report: &RunReport,
) -> Result<()> {
    let mut w = ArtifactWriter::new(dir)?;
    let system = cfg.system.kind.name();
    let diag = report.diagram.as_ref().expect("report carries its diagram");
    let result = (|| {
        w.write("distances.csv", &matrix.to_csv())?;
        w.write("distances.json", &matrix.to_json(system, cfg.seed)?)?;
        if format.json() {
            w.write("diagram.json", &diag.to_json()?)?;
        }
        if format.csv() {
            w.write("diagram.csv", &diag.to_csv())?;
        }
        if format.svg() {
            w.write("diagram.svg", &plot::diagram_svg(diag, &report.experiment))?;
        }
        w.write("report.json", &serde_json::to_string_pretty(report)?)?;
        let t = &report.timings;
        w.write(
            "timings.txt",
            &format!(
                "simulate_ms {:.3}\nobserve_ms {:.3}\ndistances_ms {:.3}\nfiltration_ms {:.3}\npersistence_ms {:.3}\n",
                t.simulate_ms, t.observe_ms, t.distances_ms, t.filtration_ms, t.persistence_ms
            ),
        )?;
        Ok(())
    })();
    if result.is_err() {
        w.rollback();
    }
    result
}

/// Simulated, observed and profiled sample shared by every slack value.
pub struct PreparedSample {
    pub series: Vec<ObservationSeries>,
    pub profiles: ProfileTable,
    pub timings: StageTimings,
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<PreparedSample> {
    cfg.validate()?;
    let mut timings = StageTimings::default();

    let clock = Instant::now();
    let trajs = simulate(cfg).map_err(|e| e.in_stage("simulate"))?;
    timings.simulate_ms = ms(clock);

    let clock = Instant::now();
    let series = observe_all(cfg, &trajs).map_err(|e| e.in_stage("observe"))?;
    timings.observe_ms = ms(clock);

    let clock = Instant::now();
    let profiles = ProfileTable::compute(&series).map_err(|e| e.in_stage("distances"))?;
    timings.distances_ms = ms(clock);

    Ok(PreparedSample {
        series,
        profiles,
        timings,
    })
}

fn report_for_slack(
    cfg: &ExperimentConfig,
    sample: &PreparedSample,
    t: usize,
    out: Option<(&Path, OutputFormat)>,
) -> Result<RunReport> {
    let mut cfg = cfg.clone();
    cfg.slack = t;
    cfg.validate()?;
    let clock = Instant::now();
    let matrix = sample.profiles.matrix(t).map_err(|e| e.in_stage("distances"))?;
    let mut timings = sample.timings.clone();
    timings.distances_ms += ms(clock);

    let analysis = analyze_matrix(&matrix, cfg.max_dim, cfg.r_max, cfg.rho, cfg.engine)?;
    timings.filtration_ms = analysis.filtration_ms;
    timings.persistence_ms = analysis.persistence_ms;

    let experiment = cfg.experiment_id();
    let mut diagram = analysis.diagram;
    diagram.meta.experiment = Some(experiment.clone());
    let matches_expected = cfg.expected.as_ref().map(|e| e.matches(&analysis.betti.betti));
    let mut report = RunReport {
        experiment,
        r_max: analysis.r_max,
        filtration_size: analysis.simplices_by_dim.iter().sum(),
        simplices_by_dim: analysis.simplices_by_dim,
        diagram_path: None,
        betti: analysis.betti,
        matches_expected,
        timings,
        diagram: Some(diagram),
        config: cfg.clone(),
    };
    if let Some((dir, format)) = out {
        if format.json() {
            report.diagram_path = Some("diagram.json".into());
        } else if format.csv() {
            report.diagram_path = Some("diagram.csv".into());
        }
        write_run_artifacts(dir, format, &cfg, &matrix, &report)?;
    }
    Ok(report)
}

/// Full pipeline: simulate → observe → distances → filtration →
/// persistence → Betti summary. Artifacts go to `cfg.output_dir` if set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    run_experiment_with_format(cfg, OutputFormat::All)
}

pub fn run_experiment_with_format(cfg: &ExperimentConfig, format: OutputFormat) -> Result<RunReport> {
    let sample = prepare(cfg)?;
    let out = cfg.output_dir.as_deref().map(|d| (d, format));
    report_for_slack(cfg, &sample, cfg.slack, out)
}

/// One run per slack value, reusing trajectories and match profiles.
/// With an output directory, each slack gets a `t<t>/` subdirectory.
pub fn sweep(cfg: &ExperimentConfig, t_values: &[usize]) -> Result<Vec<RunReport>> {
    sweep_with_format(cfg, t_values, OutputFormat::All)
}

pub fn sweep_with_format(
    cfg: &ExperimentConfig,
    t_values: &[usize],
    format: OutputFormat,
) -> Result<Vec<RunReport>> {
    if t_values.is_empty() {
        return Err(Error::Input("no slack values to sweep".into()));
    }
    if let Some(&t) = t_values.iter().find(|&&t| t >= cfg.sampling.n) {
        return Err(Error::Config(format!(
            "slack {t} out of range for n = {}",
            cfg.sampling.n
        )));
    }
    let sample = prepare(cfg)?;
    t_values
        .iter()
        .map(|&t| {
            let dir = cfg.output_dir.as_ref().map(|d| d.join(format!("t{t}")));
            report_for_slack(cfg, &sample, t, dir.as_deref().map(|d| (d, format)))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub betti: Vec<usize>,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicateReport {
    pub experiment: String,
    pub expected: BettiSignature,
    pub outcomes: Vec<SeedOutcome>,
    pub success_fraction: f64,
}

impl ReplicateReport {
    pub fn successes(&self) -> usize {
        self.outcomes.iter().filter(|o| o.matches).count()
    }
}

/// Runs the configuration once per seed and reports how often the Betti
/// summary matches the expected signature.
pub fn replicate(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<ReplicateReport> {
    if seeds.is_empty() {
        return Err(Error::Input("no seeds given".into()));
    }
    let expected = cfg
        .expected
        .clone()
        .ok_or_else(|| Error::Config("replicate needs an expected Betti signature".into()))?;
    let mut outcomes = Vec::with_capacity(seeds.len());
    for &s in seeds {
        let mut c = cfg.clone();
        c.seed = s;
        c.output_dir = cfg.output_dir.as_ref().map(|d| d.join(format!("seed{s}")));
        let report = run_experiment(&c)?;
        outcomes.push(SeedOutcome {
            seed: s,
            matches: expected.matches(&report.betti.betti),
            betti: report.betti.betti,
        });
    }
    let success_fraction = outcomes.iter().filter(|o| o.matches).count() as f64 / outcomes.len() as f64;
    Ok(ReplicateReport {
        experiment: cfg
            .name
            .clone()
            .unwrap_or_else(|| cfg.system.kind.name().to_owned()),
        expected,
        outcomes,
        success_fraction,
    })
}

/// Runs `f` on a pool of at most `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}"))),
    }
}

/// Trajectory CSV: one row per time step, one column per coordinate, no header.
pub fn rows_to_csv<R: AsRef<[f64]>>(rows: impl IntoIterator<Item = R>) -> String {
    let mut out = String::new();
    for r in rows {
        let fields: Vec<String> = r.as_ref().iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Parses the trajectory CSV format back into an observation series.
pub fn series_from_csv(text: &str) -> Result<ObservationSeries> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Input(format!("line {}: cannot parse `{}`", ln + 1, f.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Input("empty trajectory file".into()));
    }
    ObservationSeries::from_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_matching() {
        let sig = BettiSignature(vec![None, Some(2)]);
        assert!(sig.matches(&[3, 2, 0]));
        assert!(!sig.matches(&[1, 1]));
        assert!(BettiSignature::exact(&[1, 0, 1]).matches(&[1, 0, 1]));
        assert!(!BettiSignature::exact(&[1, 0, 1]).matches(&[1, 0]));
        assert_eq!(sig.to_string(), "[*, 2]");
    }

    #[test]
    fn presets_are_valid() {
        let names: Vec<_> = presets().iter().map(|p| p.name).collect();
        assert_eq!(names.len(), 6);
        for p in presets() {
            p.config.validate().unwrap();
            p.desk_config().validate().unwrap();
        }
        let s = find_preset("sphere-height").unwrap().config;
        assert_eq!(
            (s.n_trajectories, s.sampling.n, s.slack, s.sampling.half_window),
            (400, 15, 10, 1.5)
        );
        assert!(find_preset("nope").is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = find_preset("lorenz-short").unwrap().config;
        c.slack = 25;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c.slack = 24;
        c.n_trajectories = 1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let c = find_preset("torus-scalar").unwrap().config;
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::from_json(
            r#"{"system": {"kind": "lorenz"}, "sampling": {"n": 25, "half_window": 0.25},
                "observation": "identity", "n_trajectories": 10, "slack": 20}"#,
        )
        .unwrap();
        assert_eq!(c.rho, DEFAULT_RHO);
        assert_eq!(c.max_dim, 2);
        assert_eq!(c.sampling.substeps, 10);
        assert_eq!(c.resolved_system().param("segment_time", 0.0), 0.5);
    }

    #[test]
    fn empty_seed_list() {
        let c = find_preset("lorenz-short").unwrap().config;
        assert!(matches!(replicate(&c, &[]), Err(Error::Input(_))));
    }

    #[test]
    fn csv_series() {
        let s = series_from_csv("1,2\n3,4\n\n").unwrap();
        assert_eq!((s.len(), s.dim()), (2, 2));
        assert_eq!(rows_to_csv(s.rows()), "1,2\n3,4\n");
        assert!(series_from_csv("1,x\n").is_err());
        assert!(series_from_csv("1,2\n3\n").is_err());
    }
}
