//! Command execution. Every command works from a [`RunManifest`] so that a
//! rerun takes exactly the same path as the original invocation.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use toposz::codec::{decode_field, CompressedStream};
use toposz::field::{synthetic_field, Dims, FieldError, ScalarField};
use toposz::metrics::{compression_ratio, MetricsReport};
use toposz::pipeline::{self, IterationTrace, PipelineError};
use toposz::topology::{build_contour_tree, persistence_diagram_0d};
use toposz::validate::{detect_false_cases, FalseCaseReport};

use crate::error::CliError;
use crate::manifest::{manifest_path, sibling, Command, RunConfig, RunManifest};

pub const THREADS_VAR: &str = "TOPOSZ_THREADS";

pub fn execute(m: &RunManifest) -> Result<(), CliError> {
    match m.command {
        Command::Compress => compress(m),
        Command::Decompress => decompress(m),
        Command::Eval => eval(m),
        Command::Synth => synth(m),
    }
}

fn require<'a, T>(value: &'a Option<T>, what: &str) -> Result<&'a T, CliError> {
    value
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("manifest has no {what}")))
}

fn dims_of(m: &RunManifest) -> Result<Dims, CliError> {
    if m.dims.is_empty() {
        return Err(CliError::Usage("--dims is required".into()));
    }
    if m.rank != m.dims.len() {
        return Err(CliError::Usage(format!("--rank {} does not match dims {:?}", m.rank, m.dims)));
    }
    Ok(Dims::new(&m.dims)?)
}

fn load_field(path: &Path, dims: Dims) -> Result<ScalarField, CliError> {
    ScalarField::load_raw(path, dims).map_err(|e| match e {
        FieldError::Io(source) => CliError::io(path, source),
        e => e.into(),
    })
}

fn load_stream(path: &Path) -> Result<CompressedStream, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    CompressedStream::from_bytes(&bytes).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Saves the manifest beside `out`, listing `outputs` plus itself.
fn finish(m: &RunManifest, out: &Path, mut outputs: Vec<PathBuf>) -> Result<(), CliError> {
    let path = manifest_path(out);
    outputs.push(path.clone());
    let mut m = m.clone();
    m.outputs = outputs;
    m.save(&path)
}

fn compress(m: &RunManifest) -> Result<(), CliError> {
    let (input, out, cfg) = (require(&m.input, "input")?, require(&m.out, "output")?, require(&m.cfg, "config")?);
    let f = load_field(input, dims_of(m)?)?;
    let trace_path = sibling(out, "trace.csv");
    match pipeline::compress(&f, &cfg.pipeline()) {
        Ok((stream, trace)) => {
            write(out, stream.to_bytes())?;
            write(&trace_path, trace.to_csv())?;
            log::info!(
                "{}: {} bytes after {} refinement rounds",
                out.display(),
                stream.byte_len(),
                trace.iterations()
            );
            finish(m, out, vec![out.clone(), trace_path])
        }
        Err(PipelineError::IterationCap {
            iterations,
            trace,
            report,
        }) => {
            let report_path = sibling(out, "report.txt");
            write(&trace_path, trace.to_csv())?;
            write(&report_path, report.to_text())?;
            finish(m, out, vec![trace_path, report_path.clone()])?;
            Err(CliError::Cap {
                iterations,
                cases: report.len(),
                report: report_path,
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn decompress(m: &RunManifest) -> Result<(), CliError> {
    let (input, out) = (require(&m.input, "input")?, require(&m.out, "output")?);
    let stream = load_stream(input)?;
    let g = pipeline::decompress(&stream)?;
    write(out, g.to_raw_bytes())?;
    let mut m = m.clone();
    m.dims = stream.dims.extents().to_vec();
    m.rank = stream.dims.rank();
    finish(&m, out, vec![out.clone()])
}

fn synth(m: &RunManifest) -> Result<(), CliError> {
    let (out, seed) = (require(&m.out, "output")?, require(&m.seed, "seed")?);
    let f = synthetic_field(dims_of(m)?, *seed);
    write(out, f.to_raw_bytes())?;
    finish(m, out, vec![out.clone()])
}

/// Metrics of a decoded stream against the normalized original.
fn evaluate(f: &ScalarField, stream: &CompressedStream) -> Result<(MetricsReport, FalseCaseReport), CliError> {
    let g = decode_field(stream)?;
    f.check_same_grid(&g)?;
    let eps = stream.eps;
    let report = detect_false_cases(&build_contour_tree(f).simplify(eps), &build_contour_tree(&g).simplify(eps))?;
    let ratio = compression_ratio(4 * f.len() as u64, stream.byte_len() as u64)?;
    let metrics = MetricsReport::new(f, &g, ratio, &persistence_diagram_0d(f), &persistence_diagram_0d(&g), &report)?;
    Ok((metrics, report))
}

#[derive(Debug, Serialize)]
struct EvalLine {
    xi: f64,
    eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(flatten)]
    metrics: MetricsReport,
    cases: Vec<String>,
}

/// One point of a sweep. Distances are empty when the run hit the cap.
#[derive(Debug, Serialize)]
struct SweepRow {
    xi: f64,
    eps: f64,
    converged: bool,
    iterations: usize,
    ratio: f64,
    psnr: f64,
    bottleneck: Option<f64>,
    wasserstein2: Option<f64>,
    fp: usize,
    #[serde(rename = "fn")]
    fn_: usize,
    ft: usize,
    max_eb_percent: f64,
}

fn max_eb(trace: &IterationTrace) -> f64 {
    trace.records.iter().map(|r| r.eb_percent).fold(0.0, f64::max)
}

fn sweep_point(f: &ScalarField, cfg: RunConfig) -> Result<SweepRow, CliError> {
    match pipeline::compress(f, &cfg.pipeline()) {
        Ok((stream, trace)) => {
            let (metrics, _) = evaluate(f, &stream)?;
            Ok(SweepRow {
                xi: cfg.xi,
                eps: cfg.eps,
                converged: true,
                iterations: trace.iterations(),
                ratio: metrics.compression_ratio,
                psnr: metrics.psnr,
                bottleneck: Some(metrics.bottleneck),
                wasserstein2: Some(metrics.wasserstein2),
                fp: metrics.false_positives,
                fn_: metrics.false_negatives,
                ft: metrics.false_types,
                max_eb_percent: max_eb(&trace),
            })
        }
        Err(PipelineError::IterationCap { iterations, trace, .. }) => {
            let last = trace.last().expect("capped runs record at least one encode");
            Ok(SweepRow {
                xi: cfg.xi,
                eps: cfg.eps,
                converged: false,
                iterations,
                ratio: last.ratio,
                psnr: last.psnr,
                bottleneck: None,
                wasserstein2: None,
                fp: last.fp,
                fn_: last.fn_,
                ft: last.ft,
                max_eb_percent: max_eb(&trace),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = match std::env::var(THREADS_VAR) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("{THREADS_VAR} must be a thread count, got {s:?}")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn sweep(m: &RunManifest, f: &ScalarField, base: RunConfig) -> Result<(), CliError> {
    let points: Vec<RunConfig> = m
        .sweep_xi
        .iter()
        .flat_map(|&xi| m.sweep_eps.iter().map(move |&eps| RunConfig { xi, eps, ..base }))
        .collect();
    let rows = thread_pool()?.install(|| {
        points
            .par_iter()
            .map(|&cfg| sweep_point(f, cfg))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut csv = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        csv.serialize(row).map_err(|e| CliError::Format(e.to_string()))?;
    }
    let bytes = csv.into_inner().map_err(|e| CliError::Format(e.to_string()))?;
    match &m.out {
        Some(out) => {
            write(out, &bytes)?;
            finish(m, out, vec![out.clone()])
        }
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn eval(m: &RunManifest) -> Result<(), CliError> {
    let input = require(&m.input, "input")?;
    let f = load_field(input, dims_of(m)?)?.normalize();

    let (stream, iterations) = match (&m.stream, &m.cfg) {
        (Some(path), _) => (load_stream(path)?, None),
        (None, Some(cfg)) if !m.sweep_xi.is_empty() => return sweep(m, &f, *cfg),
        (None, Some(cfg)) => match pipeline::compress(&f, &cfg.pipeline()) {
            Ok((stream, trace)) => (stream, Some(trace.iterations())),
            Err(PipelineError::IterationCap {
                iterations, report, ..
            }) => {
                let report_path = sibling(m.out.as_ref().unwrap_or(input), "report.txt");
                write(&report_path, report.to_text())?;
                return Err(CliError::Cap {
                    iterations,
                    cases: report.len(),
                    report: report_path,
                });
            }
            Err(e) => return Err(e.into()),
        },
        (None, None) => return Err(CliError::Usage("eval needs --stream or --xi/--eps".into())),
    };

    let (metrics, report) = evaluate(&f, &stream)?;
    let line = EvalLine {
        xi: stream.xi,
        eps: stream.eps,
        iterations,
        metrics,
        cases: report.to_text().lines().map(str::to_owned).collect(),
    };
    let mut text = serde_json::to_string(&line).expect("eval line serializes");
    text.push('\n');
    print!("{text}");
    match &m.out {
        Some(out) => {
            write(out, &text)?;
            finish(m, out, vec![out.clone()])
        }
        None => Ok(()),
    }
}
