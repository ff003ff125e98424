//! Group signal sets, the codebooks they generate, and codebook metrics.
//!
//! An axis signal set places each point on a single coordinate axis of its
//! group. Combined with the canonical partition this removes every cross term
//! of S^H S, so each codeword is scaled unitary and the four groups can be
//! chosen independently.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use crate::design::{GroupPartition, LinearDesign, GROUPS};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, CMatrix};
use crate::parallel::{map_reduce, Execution};

/// Tolerance for floating-point unitarity checks.
pub const UNITARITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GroupSignalSet {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl GroupSignalSet {
    /// Arbitrary distinct points of length `dim`.
    pub fn from_points(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 || points.is_empty() {
            return Err(Error::InvalidSignalSet(
                "need dim ≥ 1 and at least one point".into(),
            ));
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::InvalidSignalSet(format!(
                "point {p:?} does not have length {dim}"
            )));
        }
        for i in 0..points.len() {
            if points[i].iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSignalSet(format!("point {i} is not finite")));
            }
            if points[..i].contains(&points[i]) {
                return Err(Error::InvalidSignalSet(format!("point {i} is repeated")));
            }
        }
        Ok(Self { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when every point has at most one nonzero coordinate.
    pub fn is_axis(&self) -> bool {
        self.points
            .iter()
            .all(|p| p.iter().filter(|v| **v != 0.0).count() <= 1)
    }

    fn scaled(&self, k: f64) -> Self {
        Self {
            dim: self.dim,
            points: self
                .points
                .iter()
                .map(|p| p.iter().map(|v| v * k).collect())
                .collect(),
        }
    }
}

/// Points ±amp·e_c. Ordered by amplitude, then axis, then sign (+ before −).
pub fn build_axis_signal_set(
    dim: usize,
    amplitudes: &[f64],
    include_negative: bool,
) -> Result<GroupSignalSet> {
    if amplitudes.is_empty() {
        return Err(Error::InvalidSignalSet("amplitude list is empty".into()));
    }
    for (i, &a) in amplitudes.iter().enumerate() {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidSignalSet(format!(
                "amplitude {a} is not positive"
            )));
        }
        if amplitudes[..i].contains(&a) {
            return Err(Error::InvalidSignalSet(format!("duplicate amplitude {a}")));
        }
    }
    let signs: &[f64] = if include_negative {
        &[1.0, -1.0]
    } else {
        &[1.0]
    };
    let mut points = Vec::new();
    for &amp in amplitudes {
        for c in 0..dim {
            for &sign in signs {
                let mut p = vec![0.0; dim];
                p[c] = sign * amp;
                points.push(p);
            }
        }
    }
    GroupSignalSet::from_points(dim, points)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodebookEntry {
    /// Normalized real symbol vector.
    pub x: Vec<f64>,
    /// Index of the chosen point in each group set.
    pub points: [usize; GROUPS],
    /// a with U^H U = a² I.
    pub scale: f64,
}

#[derive(Clone, Debug)]
pub struct Codebook {
    design: LinearDesign,
    partition: GroupPartition,
    group_sets: [GroupSignalSet; GROUPS],
    normalization: f64,
    entries: Vec<CodebookEntry>,
    radix: [usize; GROUPS],
    lookup: Vec<Option<usize>>,
}

impl Codebook {
    pub fn design(&self) -> &LinearDesign {
        &self.design
    }

    pub fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    /// Group sets after power normalization.
    pub fn group_sets(&self) -> &[GroupSignalSet; GROUPS] {
        &self.group_sets
    }

    /// Factor applied to the raw group points so that mean a² = 1.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn entries(&self) -> &[CodebookEntry] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &CodebookEntry {
        &self.entries[i]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn relays(&self) -> usize {
        self.design.relays()
    }

    /// The codeword matrix U of entry `i`.
    pub fn matrix(&self, i: usize) -> CMatrix {
        self.design
            .evaluate(&self.entries[i].x)
            .expect("entries match the design length")
    }

    /// Entry index for a tuple of group-point indices, if it is in the codebook.
    pub fn index_of(&self, points: [usize; GROUPS]) -> Option<usize> {
        if points.iter().zip(&self.radix).any(|(p, r)| p >= r) {
            return None;
        }
        let flat = points
            .iter()
            .zip(&self.radix)
            .fold(0, |acc, (p, r)| acc * r + p);
        self.lookup[flat]
    }

    /// Mean of a² over all entries.
    pub fn mean_energy(&self) -> f64 {
        self.entries.iter().map(|e| e.scale * e.scale).sum::<f64>() / self.len() as f64
    }

    /// Bits carried per codeword.
    pub fn bits(&self) -> f64 {
        (self.len() as f64).log2()
    }
}

/// a such that U^H U = a² I, with a² read from the first diagonal entry.
pub fn verify_scaled_unitary(u: &CMatrix) -> Result<f64> {
    if !u.is_square() {
        return Err(Error::NotScaledUnitary {
            deviation: f64::INFINITY,
        });
    }
    let gram = u.adjoint() * u;
    let a2 = gram[(0, 0)].re;
    let n = u.nrows();
    let mut deviation: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let target = if r == c { a2 } else { 0.0 };
            deviation = deviation.max((gram[(r, c)] - target).norm());
        }
    }
    if a2 <= UNITARITY_TOL && deviation <= UNITARITY_TOL {
        return Err(Error::ZeroMatrix);
    }
    if deviation > UNITARITY_TOL {
        return Err(Error::NotScaledUnitary { deviation });
    }
    Ok(a2.sqrt())
}

fn fingerprint(m: &CMatrix) -> u64 {
    let mut h = DefaultHasher::new();
    for z in m.iter() {
        ((z.re * 1e9).round() as i64).hash(&mut h);
        ((z.im * 1e9).round() as i64).hash(&mut h);
    }
    h.finish()
}

/// Enumerates the Cartesian product of the group sets (lexicographic, group 1
/// most significant), drops the all-zero vector, normalizes to mean a² = 1 and
/// checks every codeword.
pub fn build_codebook(
    design: &LinearDesign,
    partition: &GroupPartition,
    group_sets: &[GroupSignalSet; GROUPS],
) -> Result<Codebook> {
    if partition.variables() != design.variables() {
        return Err(Error::DimensionMismatch {
            expected: design.variables(),
            found: partition.variables(),
        });
    }
    for (k, set) in group_sets.iter().enumerate() {
        if set.dim() != partition.group(k).len() {
            return Err(Error::DimensionMismatch {
                expected: partition.group(k).len(),
                found: set.dim(),
            });
        }
    }
    let radix: [usize; GROUPS] = std::array::from_fn(|k| group_sets[k].len());
    let total: usize = radix.iter().product();

    let mut raw = Vec::with_capacity(total);
    let mut lookup = vec![None; total];
    for (flat, slot) in lookup.iter_mut().enumerate() {
        let mut rem = flat;
        let mut points = [0; GROUPS];
        for k in (0..GROUPS).rev() {
            points[k] = rem % radix[k];
            rem /= radix[k];
        }
        let mut x = vec![0.0; design.variables()];
        for k in 0..GROUPS {
            for (var, v) in partition
                .group(k)
                .iter()
                .zip(&group_sets[k].points()[points[k]])
            {
                x[*var] = *v;
            }
        }
        if x.iter().all(|v| *v == 0.0) {
            continue;
        }
        *slot = Some(raw.len());
        raw.push((x, points));
    }
    if raw.is_empty() {
        return Err(Error::EmptyCodebook);
    }

    let mean_raw = raw
        .iter()
        .map(|(x, _)| x.iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        / raw.len() as f64;
    let normalization = 1.0 / mean_raw.sqrt();

    let mut entries = Vec::with_capacity(raw.len());
    let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
    for (index, (x, points)) in raw.into_iter().enumerate() {
        let x: Vec<f64> = x.into_iter().map(|v| v * normalization).collect();
        let u = design.evaluate(&x)?;
        let scale = verify_scaled_unitary(&u).map_err(|e| match e {
            Error::NotScaledUnitary { deviation } => {
                Error::CodewordNotScaledUnitary { index, deviation }
            }
            other => other,
        })?;
        let energy: f64 = x.iter().map(|v| v * v).sum();
        if (scale * scale - energy).abs() > UNITARITY_TOL {
            return Err(Error::CodewordNotScaledUnitary {
                index,
                deviation: (scale * scale - energy).abs(),
            });
        }
        let bucket = seen.entry(fingerprint(&u)).or_default();
        for &other in bucket.iter() {
            let prev: &CodebookEntry = &entries[other];
            if design.evaluate(&prev.x)? == u {
                return Err(Error::DuplicateCodeword(other, index));
            }
        }
        bucket.push(index);
        entries.push(CodebookEntry { x, points, scale });
    }

    Ok(Codebook {
        design: design.clone(),
        partition: partition.clone(),
        group_sets: std::array::from_fn(|k| group_sets[k].scaled(normalization)),
        normalization,
        entries,
        radix,
        lookup,
    })
}

/// The default codebook: every group uses the signed axis set with the given
/// amplitude levels.
pub fn default_codebook(relays: usize, amplitudes: &[f64]) -> Result<Codebook> {
    let design = crate::design::build_design(relays)?;
    let partition = crate::design::group_partition(relays)?;
    let set = build_axis_signal_set(relays / 2, amplitudes, true)?;
    build_codebook(&design, &partition, &std::array::from_fn(|_| set.clone()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinDistance {
    pub value: f64,
    /// Witness entry indices, i < j.
    pub pair: (usize, usize),
}

/// Minimum Frobenius distance over all codeword pairs (exhaustive). Ties go to
/// the lexicographically smallest pair.
pub fn min_distance(cb: &Codebook) -> Result<MinDistance> {
    min_distance_with(cb, Execution::default())
}

pub fn min_distance_with(cb: &Codebook, exec: Execution) -> Result<MinDistance> {
    if cb.len() < 2 {
        return Err(Error::SingletonCodebook);
    }
    let mats: Vec<CMatrix> = (0..cb.len()).map(|i| cb.matrix(i)).collect();
    let n = mats.len();
    let best = map_reduce(
        exec,
        (n - 1) as u64,
        || (f64::INFINITY, (usize::MAX, usize::MAX)),
        |i| {
            let i = i as usize;
            let mut best = (f64::INFINITY, (usize::MAX, usize::MAX));
            for j in i + 1..n {
                let d = frobenius_sq(&(&mats[i] - &mats[j]));
                if d < best.0 {
                    best = (d, (i, j));
                }
            }
            best
        },
        |a, b| {
            if a.0 < b.0 || (a.0 == b.0 && a.1 < b.1) {
                a
            } else {
                b
            }
        },
    );
    Ok(MinDistance {
        value: best.0.sqrt(),
        pair: best.1,
    })
}
