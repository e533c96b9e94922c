//! Branch-level comparison of the simplified contour trees of an original and
//! a decoded field.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::field::{Dims, VertexId};
use crate::topology::{Branch, ContourTree, NodeKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValidateError {
    #[error("trees are built over different grids ({0:?} vs {1:?})")]
    GridMismatch(Vec<usize>, Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FalseCaseKind {
    /// A branch of the decoded tree with no counterpart in the original.
    #[serde(rename = "FP")]
    FalsePositive,
    /// A branch of the original tree missing from the decoded one.
    #[serde(rename = "FN")]
    FalseNegative,
    /// Matched extremum whose type flipped.
    #[serde(rename = "FT")]
    FalseType,
}

impl FalseCaseKind {
    pub fn tag(self) -> &'static str {
        match self {
            FalseCaseKind::FalsePositive => "FP",
            FalseCaseKind::FalseNegative => "FN",
            FalseCaseKind::FalseType => "FT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalseCase {
    pub kind: FalseCaseKind,
    pub extremum: VertexId,
    pub kind_orig: Option<NodeKind>,
    pub kind_dec: Option<NodeKind>,
    /// Saddle of the offending branch: in the decoded tree for FP, in the
    /// original tree otherwise.
    pub saddle: VertexId,
    pub persistence: f64,
    /// Grid vertices of the branch pre-image in the tree the branch lives in.
    pub region: Vec<VertexId>,
}

impl FalseCase {
    fn from_branch(kind: FalseCaseKind, b: &Branch, kind_orig: Option<NodeKind>, kind_dec: Option<NodeKind>) -> Self {
        Self {
            kind,
            extremum: b.extremum,
            kind_orig,
            kind_dec,
            saddle: b.saddle,
            persistence: b.persistence,
            region: b.region.clone(),
        }
    }
}

impl fmt::Display for FalseCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = |k: Option<NodeKind>| k.map_or_else(|| "-".to_string(), |k| k.to_string());
        write!(
            f,
            "{} {} {} {} {}",
            self.kind.tag(),
            self.extremum,
            kind(self.kind_orig),
            kind(self.kind_dec),
            self.persistence
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FalseCaseReport {
    pub cases: Vec<FalseCase>,
}

impl FalseCaseReport {
    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn count(&self, kind: FalseCaseKind) -> usize {
        self.cases.iter().filter(|c| c.kind == kind).count()
    }

    /// (FP, FN, FT)
    pub fn counts(&self) -> (usize, usize, usize) {
        (
            self.count(FalseCaseKind::FalsePositive),
            self.count(FalseCaseKind::FalseNegative),
            self.count(FalseCaseKind::FalseType),
        )
    }

    pub fn to_text(&self) -> String {
        self.cases.iter().map(|c| format!("{c}\n")).collect()
    }
}

fn by_extremum(tree: &ContourTree) -> BTreeMap<VertexId, Branch> {
    tree.branch_decomposition().into_iter().map(|b| (b.extremum, b)).collect()
}

fn check_grid(a: Dims, b: Dims) -> Result<(), ValidateError> {
    if a == b {
        Ok(())
    } else {
        Err(ValidateError::GridMismatch(a.extents().to_vec(), b.extents().to_vec()))
    }
}

/// Matches branches of the two trees by extremum vertex and classifies every
/// disagreement. Cases are sorted by extremum vertex, then kind.
pub fn detect_false_cases(orig: &ContourTree, dec: &ContourTree) -> Result<FalseCaseReport, ValidateError> {
    use FalseCaseKind::*;
    check_grid(orig.dims(), dec.dims())?;
    let a = by_extremum(orig);
    let b = by_extremum(dec);
    let mut cases = Vec::new();
    for (v, bo) in &a {
        let ko = Some(bo.extremum_kind);
        match b.get(v) {
            None => cases.push(FalseCase::from_branch(FalseNegative, bo, ko, None)),
            Some(bd) if bd.extremum_kind != bo.extremum_kind => {
                cases.push(FalseCase::from_branch(FalseType, bo, ko, Some(bd.extremum_kind)))
            }
            Some(bd) if bd.saddle != bo.saddle => {
                let kd = Some(bd.extremum_kind);
                cases.push(FalseCase::from_branch(FalsePositive, bd, ko, kd));
                cases.push(FalseCase::from_branch(FalseNegative, bo, ko, kd));
            }
            Some(_) => {}
        }
    }
    for (v, bd) in &b {
        if !a.contains_key(v) {
            cases.push(FalseCase::from_branch(FalsePositive, bd, None, Some(bd.extremum_kind)));
        }
    }
    cases.sort_by_key(|c| (c.extremum, c.kind));
    Ok(FalseCaseReport { cases })
}
