//! The compress / check / refine loop.

use std::fmt::Write as _;

use thiserror::Error;

use crate::bounds::{initialize_bounds, refine_for_false_negative_or_type, refine_for_false_positive, BoundsError};
use crate::codec::{decode_field, encode_field, CodecError, CompressedStream, QuantizationConfig};
use crate::field::ScalarField;
use crate::metrics::{compression_ratio, psnr};
use crate::topology::build_contour_tree;
use crate::validate::{detect_false_cases, FalseCaseKind, FalseCaseReport, ValidateError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    /// Pointwise error bound on the normalized scale.
    pub xi: f64,
    /// Persistence threshold for contour tree simplification.
    pub eps: f64,
    pub m: u8,
    /// Refinement rounds allowed before giving up.
    pub max_iterations: usize,
}

impl PipelineConfig {
    pub const DEFAULT_MAX_ITERATIONS: usize = 100;

    pub fn new(xi: f64, eps: f64) -> Self {
        Self {
            xi,
            eps,
            m: QuantizationConfig::DEFAULT_M,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
        }
    }

    pub fn quantization(&self) -> QuantizationConfig {
        QuantizationConfig { xi: self.xi, m: self.m }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        self.quantization().validate()?;
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return Err(PipelineError::Config(format!("persistence threshold must be >= 0, got {}", self.eps)));
        }
        Ok(())
    }
}

/// One encode of the loop.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub step: usize,
    pub fp: usize,
    pub fn_: usize,
    pub ft: usize,
    /// Percentage of vertices whose bounds changed in the refinement that
    /// preceded this encode (0 for the first).
    pub eb_percent: f64,
    pub ratio: f64,
    pub psnr: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub const CSV_HEADER: &'static str = "step,fp,fn,ft,eb_percent,ratio,psnr";

    /// Refinement rounds performed.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.records {
            writeln!(out, "{},{},{},{},{},{},{}", r.step, r.fp, r.fn_, r.ft, r.eb_percent, r.ratio, r.psnr).unwrap();
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Validate(#[from] ValidateError),
    #[error("{} false cases remain after {iterations} refinement rounds", report.len())]
    IterationCap {
        iterations: usize,
        trace: Box<IterationTrace>,
        report: Box<FalseCaseReport>,
    },
}

/// Compresses `field` so that the decoded field stays within `xi` of the
/// normalized input and its `eps`-simplified contour tree has the same
/// branches as the input's.
pub fn compress(field: &ScalarField, cfg: &PipelineConfig) -> Result<(CompressedStream, IterationTrace), PipelineError> {
    cfg.validate()?;
    let f = field.normalize();
    let n = f.len();
    let original_bytes = (n * std::mem::size_of::<f32>()) as u64;
    let tree = build_contour_tree(&f).simplify(cfg.eps);
    let mut bounds = initialize_bounds(&f, &tree)?;
    let mut trace = IterationTrace::default();
    let mut eb_percent = 0.0;

    for step in 0.. {
        let mut stream = encode_field(&f, &bounds, cfg.quantization())?;
        stream.eps = cfg.eps;
        let g = decode_field(&stream)?;
        let report = detect_false_cases(&tree, &build_contour_tree(&g).simplify(cfg.eps))?;
        let (fp, fn_, ft) = report.counts();
        trace.records.push(IterationRecord {
            step,
            fp,
            fn_,
            ft,
            eb_percent,
            ratio: compression_ratio(original_bytes, stream.byte_len() as u64).expect("sizes are positive"),
            psnr: psnr(&f, &g).expect("same grid"),
        });
        log::debug!("step {step}: {fp} FP, {fn_} FN, {ft} FT");
        if report.is_empty() {
            return Ok((stream, trace));
        }
        if step == cfg.max_iterations {
            return Err(PipelineError::IterationCap {
                iterations: step,
                trace: Box::new(trace),
                report: Box::new(report),
            });
        }

        let k = step + 1;
        let before = bounds.clone();
        for case in &report.cases {
            match case.kind {
                FalseCaseKind::FalsePositive => refine_for_false_positive(&mut bounds, &f, &tree, case, k),
                _ => refine_for_false_negative_or_type(&mut bounds, &f, &tree, case, k),
            };
        }
        eb_percent = 100.0 * bounds.count_changed(&before) as f64 / n as f64;
    }
    unreachable!()
}

/// Decodes a stream and maps it back to the original value range.
pub fn decompress(stream: &CompressedStream) -> Result<ScalarField, PipelineError> {
    let g = decode_field(stream)?;
    Ok(g.denormalize(stream.original_range))
}
