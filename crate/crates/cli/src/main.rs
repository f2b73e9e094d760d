use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use slacktopo::pipeline::{self, BettiSignature, Engine, ExperimentConfig, OutputFormat, RunReport};
use slacktopo::slack::{self, DissimilarityMatrix, MatrixDocument};
use slacktopo::{persistence, plot, Error};

/// Topology of a dynamical system's state space from sampled observation
/// trajectories.
#[derive(Parser)]
#[command(name = "slacktopo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate trajectories and write one state CSV per trajectory.
    Simulate(Common),
    /// Simulate and observe; write one observation CSV per trajectory.
    Observe(Common),
    /// Slack-distance matrix from a preset/config or a directory of series CSVs.
    Distances {
        #[command(flatten)]
        common: Common,
        /// Directory of observation CSVs (one series per file) instead of simulating.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Persistence diagram of a distance matrix (CSV or JSON).
    Persist {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Full pipeline.
    Run(Common),
    /// Full pipeline for several slack values, reusing the distance profiles.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated slack values.
        #[arg(long, value_delimiter = ',', required = true)]
        t_values: Vec<usize>,
    },
    /// Repeat a run over several seeds and report the Betti-signature hit rate.
    Replicate {
        #[command(flatten)]
        common: Common,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',', conflicts_with = "n_seeds")]
        seeds: Vec<u64>,
        /// Use seeds 0..N.
        #[arg(long)]
        n_seeds: Option<u64>,
        /// Expected Betti numbers, e.g. `1,2,1` or `*,4`; overrides the preset's.
        #[arg(long)]
        expect: Option<String>,
        /// Minimum success fraction before exiting with status 3.
        #[arg(long, default_value_t = 1.0)]
        min_fraction: f64,
    },
    /// Preset experiments.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// List the built-in presets.
    List,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    slack: Option<usize>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    max_dim: Option<usize>,
    /// Persistence engine: implicit or explicit.
    #[arg(long)]
    engine: Option<String>,
    /// Override the number of trajectories N.
    #[arg(long)]
    n_trajectories: Option<usize>,
    /// Use the preset's reduced (desk-scale) trajectory count.
    #[arg(long)]
    desk: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = "all")]
    format: String,
}

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

enum Failure {
    Lib(Error),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CmdResult = Result<(), Failure>;

impl Common {
    fn format(&self) -> Result<OutputFormat, Error> {
        self.format.parse()
    }

    fn engine(&self) -> Result<Option<Engine>, Error> {
        self.engine.as_deref().map(str::parse).transpose()
    }

    fn experiment(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => {
                let p = pipeline::find_preset(name)?;
                if self.desk {
                    p.desk_config()
                } else {
                    p.config
                }
            }
            (None, None) => return Err(Error::Config("give --config or --preset".into())),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.slack {
            cfg.slack = t;
        }
        if let Some(r) = self.r_max {
            cfg.r_max = Some(r);
        }
        if let Some(r) = self.rho {
            cfg.rho = r;
        }
        if let Some(d) = self.max_dim {
            cfg.max_dim = d;
        }
        if let Some(e) = self.engine()? {
            cfg.engine = e;
        }
        if let Some(n) = self.n_trajectories {
            cfg.n_trajectories = n;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn out_dir(common: &Common) -> Result<&Path, Error> {
    common
        .out
        .as_deref()
        .ok_or_else(|| Error::Config("--out DIR is required for this command".into()))
}

fn write(path: &Path, contents: &str) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.into(),
            source: e,
        })?;
    }
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })
}

fn print_report(r: &RunReport) {
    let expected = match (r.config.expected.as_ref(), r.matches_expected) {
        (Some(e), Some(ok)) => format!("  expected {e}: {}", if ok { "match" } else { "MISMATCH" }),
        _ => String::new(),
    };
    println!(
        "{}  t={}  r_max={:.6}  simplices={}  betti={:?}{}  ({:.0} ms)",
        r.experiment,
        r.config.slack,
        r.r_max,
        r.filtration_size,
        r.betti.betti,
        expected,
        r.timings.total_ms()
    );
}

fn simulate(common: &Common, observe: bool) -> CmdResult {
    let cfg = common.experiment()?;
    let dir = out_dir(common)?;
    let trajs = pipeline::simulate(&cfg)?;
    if observe {
        let series = pipeline::observe_all(&cfg, &trajs)?;
        for (k, s) in series.iter().enumerate() {
            write(
                &dir.join(format!("obs_{k:04}.csv")),
                &pipeline::rows_to_csv(s.rows()),
            )?;
        }
        println!("wrote {} observation series to {}", series.len(), dir.display());
    } else {
        for (k, t) in trajs.iter().enumerate() {
            write(
                &dir.join(format!("traj_{k:04}.csv")),
                &pipeline::rows_to_csv(&t.states),
            )?;
        }
        println!("wrote {} trajectories to {}", trajs.len(), dir.display());
    }
    Ok(())
}

fn read_series_dir(dir: &Path) -> Result<Vec<slacktopo::observation::ObservationSeries>, Error> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::Io {
            path: dir.into(),
            source: e,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Input(format!("no .csv files in {}", dir.display())));
    }
    files
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.clone(),
                source: e,
            })?;
            pipeline::series_from_csv(&text).map_err(|e| Error::Input(format!("{}: {e}", p.display())))
        })
        .collect()
}

fn distances(common: &Common, input: Option<&Path>) -> CmdResult {
    let (matrix, system, seed) = match input {
        Some(dir) => {
            let series = read_series_dir(dir)?;
            let t = common
                .slack
                .ok_or_else(|| Error::Config("--slack is required with --input".into()))?;
            (slack::dissimilarity_matrix(&series, t)?, "external".to_owned(), 0)
        }
        None => {
            let cfg = common.experiment()?;
            let trajs = pipeline::simulate(&cfg)?;
            let series = pipeline::observe_all(&cfg, &trajs)?;
            (
                slack::dissimilarity_matrix(&series, cfg.slack)?,
                cfg.system.kind.name().to_owned(),
                cfg.seed,
            )
        }
    };
    match &common.out {
        Some(dir) => {
            write(&dir.join("distances.csv"), &matrix.to_csv())?;
            write(&dir.join("distances.json"), &matrix.to_json(&system, seed)?)?;
            println!(
                "wrote {}x{} matrix to {}",
                matrix.size(),
                matrix.size(),
                dir.display()
            );
        }
        None => print!("{}", matrix.to_csv()),
    }
    Ok(())
}

fn load_matrix(path: &Path) -> Result<DissimilarityMatrix, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })?;
    if path.extension().is_some_and(|x| x == "json") {
        let doc: MatrixDocument = serde_json::from_str(&text)?;
        doc.into_matrix()
    } else {
        DissimilarityMatrix::from_csv(&text)
    }
}

fn persist(common: &Common, matrix_path: &Path) -> CmdResult {
    let matrix = load_matrix(matrix_path)?;
    let format = common.format()?;
    let rho = common.rho.unwrap_or(persistence::DEFAULT_RHO);
    let max_dim = common.max_dim.unwrap_or(slacktopo::filtration::DEFAULT_MAX_DIM);
    let engine = common.engine()?.unwrap_or_default();
    let analysis = pipeline::analyze_matrix(&matrix, max_dim, common.r_max, rho, engine)?;
    let diag = &analysis.diagram;
    if let Some(dir) = &common.out {
        let mut w = pipeline::ArtifactWriter::new(dir)?;
        let res = (|| {
            if matches!(format, OutputFormat::Json | OutputFormat::All) {
                w.write("diagram.json", &diag.to_json()?)?;
            }
            if matches!(format, OutputFormat::Csv | OutputFormat::All) {
                w.write("diagram.csv", &diag.to_csv())?;
            }
            if matches!(format, OutputFormat::Svg | OutputFormat::All) {
                w.write(
                    "diagram.svg",
                    &plot::diagram_svg(diag, &matrix_path.display().to_string()),
                )?;
            }
            Ok::<_, Error>(())
        })();
        if res.is_err() {
            w.rollback();
        }
        res?;
    } else {
        print!("{}", diag.to_csv());
    }
    println!(
        "N={}  r_max={:.6}  simplices={}  betti={:?}",
        matrix.size(),
        analysis.r_max,
        analysis.simplices_by_dim.iter().sum::<usize>(),
        analysis.betti.betti
    );
    Ok(())
}

fn parse_signature(s: &str) -> Result<BettiSignature, Error> {
    s.split(',')
        .map(|f| match f.trim() {
            "*" | "_" => Ok(None),
            v => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("bad Betti signature entry `{v}`"))),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(BettiSignature)
}

fn replicate(
    common: &Common,
    seeds: &[u64],
    n_seeds: Option<u64>,
    expect: Option<&str>,
    min_fraction: f64,
) -> CmdResult {
    let mut cfg = common.experiment()?;
    if let Some(e) = expect {
        cfg.expected = Some(parse_signature(e)?);
    }
    let seeds: Vec<u64> = match n_seeds {
        Some(n) => (0..n).collect(),
        None => seeds.to_vec(),
    };
    let report = pipeline::replicate(&cfg, &seeds)?;
    for o in &report.outcomes {
        println!(
            "seed {:>4}  betti={:?}  {}",
            o.seed,
            o.betti,
            if o.matches { "match" } else { "MISMATCH" }
        );
    }
    println!(
        "{}: {}/{} seeds match {} (fraction {:.2})",
        report.experiment,
        report.successes(),
        report.outcomes.len(),
        report.expected,
        report.success_fraction
    );
    if let Some(dir) = &common.out {
        write(
            &dir.join("replicate.json"),
            &serde_json::to_string_pretty(&report).map_err(Error::from)?,
        )?;
    }
    if expect.is_some() && report.success_fraction < min_fraction {
        return Err(Failure::Mismatch(format!(
            "success fraction {:.2} below required {:.2}",
            report.success_fraction, min_fraction
        )));
    }
    Ok(())
}

fn list_presets() {
    for p in pipeline::presets() {
        let c = &p.config;
        println!(
            "{:<14} N={:<4} (desk {:<3}) n={:<3} t={:<3} T={:<5} obs={:<13} expect {}  {}",
            p.name,
            c.n_trajectories,
            p.desk_n,
            c.sampling.n,
            c.slack,
            c.sampling.half_window,
            c.observation.name(),
            c.expected.as_ref().map(|e| e.to_string()).unwrap_or_default(),
            p.description
        );
    }
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::Simulate(c) => simulate(&c, false),
        Command::Observe(c) => simulate(&c, true),
        Command::Distances { common, input } => distances(&common, input.as_deref()),
        Command::Persist { common, matrix } => persist(&common, &matrix),
        Command::Run(c) => {
            let cfg = c.experiment()?;
            let report = pipeline::run_experiment_with_format(&cfg, c.format()?)?;
            print_report(&report);
            Ok(())
        }
        Command::Sweep { common, t_values } => {
            let cfg = common.experiment()?;
            for r in pipeline::sweep_with_format(&cfg, &t_values, common.format()?)? {
                print_report(&r);
            }
            Ok(())
        }
        Command::Replicate {
            common,
            seeds,
            n_seeds,
            expect,
            min_fraction,
        } => {
            if seeds.is_empty() && n_seeds.is_none() {
                return Err(Error::Input("give --seeds or --n-seeds".into()).into());
            }
            replicate(&common, &seeds, n_seeds, expect.as_deref(), min_fraction)
        }
        Command::Presets {
            action: PresetAction::List,
        } => {
            list_presets();
            Ok(())
        }
    }
}

fn threads_of(cmd: &Command) -> Option<usize> {
    match cmd {
        Command::Simulate(c) | Command::Observe(c) | Command::Run(c) => c.threads,
        Command::Distances { common, .. }
        | Command::Persist { common, .. }
        | Command::Sweep { common, .. }
        | Command::Replicate { common, .. } => common.threads,
        Command::Presets { .. } => None,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let threads = threads_of(&cli.command);
    let result = match pipeline::with_threads(threads, move || dispatch(cli.command)) {
        Ok(r) => r,
        Err(e) => Err(Failure::Lib(e)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_MISMATCH)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { EXIT_USAGE } else { EXIT_RUNTIME })
        }
    }
}
