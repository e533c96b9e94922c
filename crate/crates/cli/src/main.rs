mod error;
mod manifest;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toposz::pipeline::PipelineConfig;
use toposz::QuantizationConfig;

use error::CliError;
use manifest::{Command, RunConfig, RunManifest};

/// Topology-preserving error-bounded compression of 2D/3D scalar fields.
///
/// Raw fields are headerless little-endian f32 in row-major order.
#[derive(Debug, Parser)]
#[command(name = "toposz", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Compress a raw field; writes the stream, its trace CSV and a manifest.
    Compress(CompressArgs),
    /// Decode a stream back to a raw field on the original value range.
    Decompress(DecompressArgs),
    /// Metrics and false cases for one run, or a CSV sweep over ξ and ε.
    Eval(EvalArgs),
    /// Write a random Gaussian-mixture field.
    Synth(SynthArgs),
    /// Repeat a run from the manifest it wrote.
    Rerun {
        manifest: PathBuf,
    },
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Grid extents, fastest axis last, e.g. 64,64 or 32,32,32.
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    /// Optional check on the number of extents.
    #[arg(long)]
    rank: Option<usize>,
}

#[derive(Debug, Args)]
struct TuningArgs {
    /// Code width in bits.
    #[arg(long, default_value_t = QuantizationConfig::DEFAULT_M)]
    m: u8,
    #[arg(long, default_value_t = PipelineConfig::DEFAULT_MAX_ITERATIONS)]
    max_iterations: usize,
}

#[derive(Debug, Args)]
struct CompressArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Pointwise error bound on the normalized scale.
    #[arg(long)]
    xi: f64,
    /// Persistence threshold.
    #[arg(long)]
    eps: f64,
    #[command(flatten)]
    tuning: TuningArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DecompressArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Evaluate this stream instead of compressing the input.
    #[arg(long, conflicts_with_all = ["xi", "eps", "sweep_xi", "sweep_eps"])]
    stream: Option<PathBuf>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[command(flatten)]
    tuning: TuningArgs,
    #[arg(long, value_delimiter = ',')]
    sweep_xi: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    sweep_eps: Vec<f64>,
    /// JSON line or sweep CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

impl GridArgs {
    fn apply(&self, m: &mut RunManifest) {
        m.dims = self.dims.clone();
        m.rank = self.rank.unwrap_or(self.dims.len());
    }
}

fn missing(flag: &str, why: &str) -> CliError {
    CliError::Usage(format!("--{flag} is required {why}"))
}

impl EvalArgs {
    fn manifest(&self) -> Result<RunManifest, CliError> {
        let mut m = RunManifest::new(Command::Eval);
        m.input = Some(self.input.clone());
        self.grid.apply(&mut m);
        m.out = self.out.clone();
        if let Some(stream) = &self.stream {
            m.stream = Some(stream.clone());
            return Ok(m);
        }
        let sweeping = !(self.sweep_xi.is_empty() && self.sweep_eps.is_empty());
        m.sweep_xi = match (self.sweep_xi.is_empty(), self.xi) {
            (false, _) => self.sweep_xi.clone(),
            (true, Some(xi)) => vec![xi],
            (true, None) => return Err(missing("xi", "unless --sweep-xi or --stream is given")),
        };
        m.sweep_eps = match (self.sweep_eps.is_empty(), self.eps) {
            (false, _) => self.sweep_eps.clone(),
            (true, Some(eps)) => vec![eps],
            (true, None) => return Err(missing("eps", "unless --sweep-eps or --stream is given")),
        };
        m.cfg = Some(RunConfig {
            xi: m.sweep_xi[0],
            eps: m.sweep_eps[0],
            m: self.tuning.m,
            max_iterations: self.tuning.max_iterations,
        });
        if !sweeping {
            m.sweep_xi.clear();
            m.sweep_eps.clear();
        }
        Ok(m)
    }
}

fn manifest_for(cmd: Cmd) -> Result<RunManifest, CliError> {
    let m = match cmd {
        Cmd::Compress(a) => {
            let mut m = RunManifest::new(Command::Compress);
            m.input = Some(a.input);
            a.grid.apply(&mut m);
            m.cfg = Some(RunConfig {
                xi: a.xi,
                eps: a.eps,
                m: a.tuning.m,
                max_iterations: a.tuning.max_iterations,
            });
            m.out = Some(a.out);
            m
        }
        Cmd::Decompress(a) => {
            let mut m = RunManifest::new(Command::Decompress);
            m.input = Some(a.input);
            m.out = Some(a.out);
            m
        }
        Cmd::Eval(a) => a.manifest()?,
        Cmd::Synth(a) => {
            let mut m = RunManifest::new(Command::Synth);
            a.grid.apply(&mut m);
            m.seed = Some(a.seed);
            m.out = Some(a.out);
            m
        }
        Cmd::Rerun { manifest } => RunManifest::load(&manifest)?,
    };
    Ok(m)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match manifest_for(cli.command).and_then(|m| run::execute(&m)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("toposz: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
