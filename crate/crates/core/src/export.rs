//! JSON documents written by the CLI.
//!
//! Matrices are arrays of rows, each entry `{"re": .., "im": ..}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{center_generators, conjugate_linkers_with, LinkerFamily, RepContext};
use crate::design::{build_design, group_partition, GroupPartition, LinearDesign, GROUPS};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ExactMatrix};
use crate::relays::{build_relay_matrices_with, initial_state};
use crate::signal_sets::{build_codebook, Codebook, GroupSignalSet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

pub type MatrixJson = Vec<Vec<ComplexJson>>;

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

pub fn exact_matrix_json(m: &ExactMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| ComplexJson {
                    re: m[(r, c)].re as f64,
                    im: m[(r, c)].im as f64,
                })
                .collect()
        })
        .collect()
}

pub fn matrix_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)].into()).collect())
        .collect()
}

/// Provenance attached to every output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub version: String,
    pub seed: Option<u64>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: serde_json::Value,
        seed: Option<u64>,
        started_unix: u64,
    ) -> Self {
        Self {
            command: command.to_string(),
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            started_unix,
            finished_unix: unix_now(),
        }
    }
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelayJson {
    /// 1-based.
    pub index: usize,
    pub conjugating: bool,
    /// The algebra element whose representation gives the matrix.
    pub element: String,
    pub matrix: MatrixJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstructionExport {
    pub relays: usize,
    pub lambda: u32,
    pub split: usize,
    pub linker_family: LinkerFamily,
    pub basis: Vec<String>,
    pub pattern: Vec<Vec<String>>,
    pub weights: Vec<MatrixJson>,
    pub partition: GroupPartition,
    pub relay_matrices: Vec<RelayJson>,
    pub s0: Vec<ComplexJson>,
    pub x0: MatrixJson,
    pub manifest: Option<RunManifest>,
}

pub fn construction_export(relays: usize, family: LinkerFamily) -> Result<ConstructionExport> {
    let ctx = RepContext::for_relays(relays)?;
    let design = build_design(relays)?;
    let rs = build_relay_matrices_with(&ctx, family);
    let init = initial_state(&rs)?;
    let elements = center_generators(&ctx)
        .into_iter()
        .chain(conjugate_linkers_with(&ctx, family));
    let relay_matrices = elements
        .zip(rs.matrices())
        .enumerate()
        .map(|(j, (e, m))| RelayJson {
            index: j + 1,
            conjugating: rs.is_conjugating(j),
            element: e.to_string(),
            matrix: exact_matrix_json(m),
        })
        .collect();
    Ok(ConstructionExport {
        relays,
        lambda: ctx.lambda(),
        split: ctx.split(),
        linker_family: family,
        basis: ctx.basis().iter().map(|b| b.to_string()).collect(),
        pattern: design.pattern(),
        weights: design.weights().iter().map(exact_matrix_json).collect(),
        partition: group_partition(relays)?,
        relay_matrices,
        s0: init.s0_float().into_iter().map(ComplexJson::from).collect(),
        x0: exact_matrix_json(&init.x0),
        manifest: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodebookEntryJson {
    pub x: Vec<f64>,
    pub scale: f64,
}

/// Symbol vectors and scales only; matrices are rebuilt from the design on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodebookExport {
    pub relays: usize,
    pub partition: GroupPartition,
    /// Raw (unnormalized) group sets.
    pub group_sets: Vec<GroupSignalSet>,
    pub normalization: f64,
    pub entries: Vec<CodebookEntryJson>,
}

impl CodebookExport {
    pub fn from_codebook(cb: &Codebook) -> Self {
        let k = cb.normalization();
        let raw = cb
            .group_sets()
            .iter()
            .map(|s| {
                GroupSignalSet::from_points(
                    s.dim(),
                    s.points()
                        .iter()
                        .map(|p| p.iter().map(|v| v / k).collect())
                        .collect(),
                )
                .expect("scaling preserves validity")
            })
            .collect();
        Self {
            relays: cb.relays(),
            partition: cb.partition().clone(),
            group_sets: raw,
            normalization: k,
            entries: cb
                .entries()
                .iter()
                .map(|e| CodebookEntryJson {
                    x: e.x.clone(),
                    scale: e.scale,
                })
                .collect(),
        }
    }

    /// Rebuilds the codebook and checks it against the stored entries.
    pub fn into_codebook(self) -> Result<Codebook> {
        let design: LinearDesign = build_design(self.relays)?;
        let sets: [GroupSignalSet; GROUPS] =
            self.group_sets
                .try_into()
                .map_err(|v: Vec<_>| Error::DimensionMismatch {
                    expected: GROUPS,
                    found: v.len(),
                })?;
        let cb = build_codebook(&design, &self.partition, &sets)?;
        if cb.len() != self.entries.len() {
            return Err(Error::DimensionMismatch {
                expected: self.entries.len(),
                found: cb.len(),
            });
        }
        for (i, (e, stored)) in cb.entries().iter().zip(&self.entries).enumerate() {
            let dx =
                e.x.iter()
                    .zip(&stored.x)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
            if dx > 1e-12 || (e.scale - stored.scale).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "stored codebook entry {i} does not match its rebuild"
                )));
            }
        }
        Ok(cb)
    }
}
