use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fvdp::config::{ModelKind, RunConfig, PRESETS};
use fvdp::experiment::{self, Outcome, Problem};
use fvdp::flux::{FluxKind, FluxScheme};
use fvdp::output;
use fvdp::Error;

/// Finite volume solvers for nonlinear degenerate parabolic equations.
#[derive(Debug, Parser)]
#[command(name = "fvdp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration; writes diagnostics and snapshot CSVs.
    Run(Common),
    /// Grid refinement study; writes convergence.csv.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Cells per axis, successive doublings.
        #[arg(long, value_delimiter = ',', default_value = "100,200,400,800,1600")]
        levels: Vec<usize>,
    },
    /// Build the configured equilibrium; writes equilibrium.csv.
    Equilibrium(Common),
    /// Run one configuration with several flux schemes; writes one
    /// diagnostics CSV per scheme. `--flux` takes a comma separated list.
    Compare(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Built-in configuration (example1 ... example8).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Flux scheme: fu1, fu2, cu or sgext.
    #[arg(long, value_delimiter = ',')]
    flux: Vec<FluxKind>,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Full-size variant of presets that have a scaled default.
    #[arg(long)]
    full: bool,
    /// Time step override.
    #[arg(long)]
    dt: Option<f64>,
    /// Final time override.
    #[arg(long)]
    tfinal: Option<f64>,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::StepFailure { .. }
            | Error::NotConverged { .. }
            | Error::Singular(_)
            | Error::Divergent { .. }
            | Error::InvalidSeries(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Config(format!("cannot write {}: {e}", path.display()))
}

type Done = Result<(), Failure>;

impl Common {
    fn single_flux(&self) -> Result<Option<FluxKind>, Failure> {
        match self.flux.as_slice() {
            [] => Ok(None),
            [kind] => Ok(Some(*kind)),
            _ => Err(Failure::Config("--flux: this command takes one scheme".into())),
        }
    }

    /// Loads and validates the configuration with every override applied.
    fn load(&self, flux: Option<FluxKind>) -> Result<RunConfig, Failure> {
        let mut cfg = match (&self.preset, &self.config) {
            (Some(name), None) => RunConfig::preset(name, self.full)?,
            (None, Some(path)) => RunConfig::from_file(path)?,
            (None, None) => {
                return Err(Failure::Config(format!(
                    "give --config FILE or --preset NAME ({})",
                    PRESETS.join(", ")
                )))
            }
            (Some(_), Some(_)) => unreachable!("clap rejects --preset with --config"),
        };
        if let Some(kind) = flux {
            cfg.solver.flux = kind;
        }
        if let Some(dt) = self.dt {
            cfg.solver.dt = dt;
        }
        if let Some(t) = self.tfinal {
            cfg.set_t_final(t);
        }
        if let Some(dir) = &self.out {
            cfg.output.dir = dir.to_string_lossy().into_owned();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| io_failure(path, e))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Done {
    let mut out = create(path)?;
    f(&mut out).and_then(|()| out.flush()).map_err(|e| io_failure(path, e))
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = PathBuf::from(&cfg.output.dir);
    fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
    Ok(dir)
}

fn snapshot_name(suffix: &str, time: f64) -> String {
    format!("snapshot{suffix}_t{time}.csv")
}

fn run(common: &Common) -> Done {
    let cfg = common.load(common.single_flux()?)?;
    let problems = experiment::build(&cfg)?;
    let dir = out_dir(&cfg)?;
    for (suffix, problem) in problems {
        match experiment::run_problem(problem)? {
            Outcome::Scalar { mesh, output } => {
                write_with(&dir.join(format!("diagnostics{suffix}.csv")), |w| {
                    output::write_diagnostics(w, &output.records)
                })?;
                for snap in &output.snapshots {
                    write_with(&dir.join(snapshot_name(&suffix, snap.time)), |w| {
                        output::write_snapshot(w, &mesh, &snap.values)
                    })?;
                }
            }
            Outcome::Device { mesh, output } => {
                write_with(&dir.join(format!("diagnostics{suffix}.csv")), |w| {
                    output::write_diagnostics(w, &output.records)
                })?;
                for snap in &output.snapshots {
                    write_with(&dir.join(snapshot_name(&suffix, snap.time)), |w| {
                        output::write_dd_snapshot(w, &mesh, &snap.n, &snap.p, &snap.v)
                    })?;
                }
            }
        }
    }
    Ok(())
}

fn converge(common: &Common, levels: &[usize]) -> Done {
    let cfg = common.load(common.single_flux()?)?;
    if levels.len() < 2 {
        return Err(Failure::Config("--levels: at least two levels are needed".into()));
    }
    if let Some(w) = levels.windows(2).find(|w| w[1] != 2 * w[0]) {
        return Err(Failure::Config(format!(
            "--levels: successive levels must double, got {} then {}",
            w[0], w[1]
        )));
    }
    if cfg.model.kind == ModelKind::DriftDiffusion {
        return Err(Failure::Config("model.kind: refinement studies cover the scalar models".into()));
    }
    let dir = out_dir(&cfg)?;
    let table = experiment::convergence(&cfg, levels, common.dt)?;
    write_with(&dir.join("convergence.csv"), |w| output::write_convergence(w, &table))
}

fn equilibrium(common: &Common) -> Done {
    let cfg = common.load(common.single_flux()?)?;
    let problems = experiment::build(&cfg)?;
    let missing = || Failure::Config("equilibrium.kind: the configuration defines no equilibrium".into());
    let mut files = Vec::new();
    for (suffix, problem) in problems {
        match problem {
            Problem::Scalar(p) => {
                let values = p.equilibrium.ok_or_else(missing)?;
                files.push((suffix, p.disc.mesh().clone(), Profile::Scalar(values)));
            }
            Problem::Device(p) => {
                let eq = p.equilibrium.ok_or_else(missing)?;
                files.push((suffix, p.system.mesh().clone(), Profile::Device(eq.n, eq.p, eq.v)));
            }
        }
    }
    let dir = out_dir(&cfg)?;
    for (suffix, mesh, profile) in files {
        write_with(&dir.join(format!("equilibrium{suffix}.csv")), |w| match &profile {
            Profile::Scalar(u) => output::write_snapshot(w, &mesh, u),
            Profile::Device(n, p, v) => output::write_dd_snapshot(w, &mesh, n, p, v),
        })?;
    }
    Ok(())
}

enum Profile {
    Scalar(Vec<f64>),
    Device(Vec<f64>, Vec<f64>, Vec<f64>),
}

fn compare(common: &Common) -> Done {
    let base = common.load(None)?;
    let model = experiment::build_model(&base, None)?;
    let schemes: Vec<FluxKind> = if common.flux.is_empty() {
        FluxKind::ALL
            .into_iter()
            .filter(|&k| FluxScheme::for_kind(k).check_model(&model).is_ok())
            .collect()
    } else {
        common.flux.clone()
    };
    let mut configs = Vec::new();
    for kind in schemes {
        let cfg = common.load(Some(kind))?;
        configs.push((kind, experiment::build(&cfg)?));
    }
    let dir = out_dir(&base)?;
    for (kind, problems) in configs {
        for (suffix, problem) in problems {
            let records = match experiment::run_problem(problem)? {
                Outcome::Scalar { output, .. } => output.records,
                Outcome::Device { output, .. } => output.records,
            };
            write_with(&dir.join(format!("diagnostics_{kind}{suffix}.csv")), |w| {
                output::write_diagnostics(w, &records)
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => run(c),
        Command::Converge { common, levels } => converge(common, levels),
        Command::Equilibrium(c) => equilibrium(c),
        Command::Compare(c) => compare(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}
