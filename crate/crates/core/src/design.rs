//! Linear designs S(x) = Σ x_i B_i for R = 2^λ relays.
//!
//! Real variables interleave the complex symbols: x_{2m} = Re s_m and
//! x_{2m+1} = Im s_m (0-based). The design has the block form
//!
//! ```text
//!     S = [ A  -B* ]
//!         [ B   A* ]
//! ```
//!
//! where A and B are (R/2)×(R/2) XOR-indexed blocks over s_0..s_{R/2-1} and
//! s_{R/2}..s_{R-1} respectively: A[r][c] = s_{r⊕c}.

use num_complex::{Complex, Complex64};

use crate::algebra::{lambda_for_relays, RepContext};
use crate::error::{Error, Result};
use crate::linalg::{
    adjoint_exact, exact_identity, exact_zeros, is_zero_exact, to_float, CMatrix, ExactMatrix,
};
use crate::relays::build_relay_matrices;
use crate::signal_sets::GroupSignalSet;

/// Number of groups the designs decode in.
pub const GROUPS: usize = 4;

#[derive(Clone, Debug)]
pub struct LinearDesign {
    relays: usize,
    weights: Vec<ExactMatrix>,
    weights_f: Vec<CMatrix>,
}

impl PartialEq for LinearDesign {
    fn eq(&self, other: &Self) -> bool {
        self.relays == other.relays && self.weights == other.weights
    }
}

impl LinearDesign {
    pub fn from_weights(weights: Vec<ExactMatrix>) -> Result<Self> {
        let relays = weights.len() / 2;
        if weights.len() != 2 * relays || relays == 0 {
            return Err(Error::DimensionMismatch {
                expected: 2 * relays.max(1),
                found: weights.len(),
            });
        }
        for w in &weights {
            if w.nrows() != relays || w.ncols() != relays {
                return Err(Error::DimensionMismatch {
                    expected: relays,
                    found: w.nrows(),
                });
            }
        }
        let weights_f = weights.iter().map(to_float).collect();
        Ok(Self {
            relays,
            weights,
            weights_f,
        })
    }

    /// Matrix size, equal to the number of relays.
    pub fn relays(&self) -> usize {
        self.relays
    }

    /// K = 2R real variables.
    pub fn variables(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[ExactMatrix] {
        &self.weights
    }

    pub fn float_weights(&self) -> &[CMatrix] {
        &self.weights_f
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.variables() {
            return Err(Error::DimensionMismatch {
                expected: self.variables(),
                found: len,
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<CMatrix> {
        self.check_len(x.len())?;
        let mut out = CMatrix::zeros(self.relays, self.relays);
        for (xi, b) in x.iter().zip(&self.weights_f) {
            if *xi != 0.0 {
                out += b * Complex64::new(*xi, 0.0);
            }
        }
        Ok(out)
    }

    pub fn evaluate_exact(&self, x: &[i64]) -> Result<ExactMatrix> {
        self.check_len(x.len())?;
        let mut out = exact_zeros(self.relays);
        for (xi, b) in x.iter().zip(&self.weights) {
            out += b * Complex::new(*xi, 0);
        }
        Ok(out)
    }

    /// Evaluates at complex symbols s_0..s_{R-1}.
    pub fn evaluate_symbols(&self, s: &[Complex64]) -> Result<CMatrix> {
        self.evaluate(&symbols_to_reals(s))
    }

    /// B_i^H B_j + B_j^H B_i, the coefficient of x_i x_j in S^H S.
    pub fn cross_gram(&self, i: usize, j: usize) -> ExactMatrix {
        let (bi, bj) = (&self.weights[i], &self.weights[j]);
        adjoint_exact(bi) * bj + adjoint_exact(bj) * bi
    }

    /// Symbolic entry pattern such as `s1`, `-s5*`, `0` (1-based symbols).
    pub fn pattern(&self) -> Vec<Vec<String>> {
        let n = self.relays;
        (0..n)
            .map(|r| (0..n).map(|c| self.entry_pattern(r, c)).collect())
            .collect()
    }

    fn entry_pattern(&self, r: usize, c: usize) -> String {
        let one = Complex::new(1, 0);
        let i = Complex::new(0, 1);
        let mut terms = Vec::new();
        for m in 0..self.relays {
            let re = self.weights[2 * m][(r, c)];
            let im = self.weights[2 * m + 1][(r, c)];
            let zero = Complex::new(0, 0);
            if re == zero && im == zero {
                continue;
            }
            let sym = m + 1;
            let term = if re == one && im == i {
                format!("s{sym}")
            } else if re == one && im == -i {
                format!("s{sym}*")
            } else if re == -one && im == -i {
                format!("-s{sym}")
            } else if re == -one && im == i {
                format!("-s{sym}*")
            } else {
                format!("({re})Re(s{sym})+({im})Im(s{sym})")
            };
            terms.push(term);
        }
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }
}

/// Interleaves real and imaginary parts: [Re s_0, Im s_0, Re s_1, ...].
pub fn symbols_to_reals(s: &[Complex64]) -> Vec<f64> {
    s.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// The XOR-block closed form.
pub fn build_design(relays: usize) -> Result<LinearDesign> {
    lambda_for_relays(relays)?;
    let h = relays / 2;
    // (symbol index, conjugated, negated) at each position.
    let cell = |r: usize, c: usize| -> (usize, bool, bool) {
        match (r < h, c < h) {
            (true, true) => (r ^ c, false, false),
            (false, true) => (h + ((r - h) ^ c), false, false),
            (true, false) => (h + (r ^ (c - h)), true, true),
            (false, false) => ((r - h) ^ (c - h), true, false),
        }
    };
    let mut weights = Vec::with_capacity(2 * relays);
    for m in 0..relays {
        for unit in [Complex::new(1, 0), Complex::new(0, 1)] {
            weights.push(ExactMatrix::from_fn(relays, relays, |r, c| {
                let (sym, conj, neg) = cell(r, c);
                if sym != m {
                    return Complex::new(0, 0);
                }
                let v = if conj { unit.conj() } else { unit };
                if neg {
                    -v
                } else {
                    v
                }
            }));
        }
    }
    LinearDesign::from_weights(weights)
}

/// The design produced by the relays themselves: the codeword at s is
/// [A_1 s … A_M s, A_{M+1} s* … A_R s*].
pub fn build_design_algebraic(ctx: &RepContext) -> LinearDesign {
    let rs = build_relay_matrices(ctx);
    let n = rs.relays();
    let mut weights = Vec::with_capacity(2 * n);
    for m in 0..n {
        for unit in [Complex::new(1, 0), Complex::new(0, 1)] {
            let mut s = vec![Complex::new(0, 0); n];
            s[m] = unit;
            weights.push(rs.assemble(&s));
        }
    }
    LinearDesign::from_weights(weights).expect("relay set has consistent dimensions")
}

/// Four disjoint sets of 0-based variable indices.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GroupPartition {
    groups: [Vec<usize>; GROUPS],
}

impl GroupPartition {
    pub fn new(groups: [Vec<usize>; GROUPS]) -> Result<Self> {
        let total: usize = groups.iter().map(Vec::len).sum();
        let size = groups[0].len();
        if groups.iter().any(|g| g.len() != size) {
            return Err(Error::InvalidConfig("groups must have equal size".into()));
        }
        let mut seen = vec![false; total];
        for &i in groups.iter().flatten() {
            if i >= total || seen[i] {
                return Err(Error::InvalidConfig(format!(
                    "groups must partition 0..{total}; index {i} is out of range or repeated"
                )));
            }
            seen[i] = true;
        }
        Ok(Self { groups })
    }

    pub fn groups(&self) -> &[Vec<usize>; GROUPS] {
        &self.groups
    }

    pub fn group(&self, k: usize) -> &[usize] {
        &self.groups[k]
    }

    pub fn variables(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn group_of(&self, var: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&var))
    }
}

/// Re parts of the first half, Im parts of the first half, Re parts of the
/// second half, Im parts of the second half.
pub fn group_partition(relays: usize) -> Result<GroupPartition> {
    lambda_for_relays(relays)?;
    let h = relays / 2;
    let pick =
        |first: usize, part: usize| (first..first + h).map(|m| 2 * m + part).collect::<Vec<_>>();
    GroupPartition::new([pick(0, 0), pick(0, 1), pick(h, 0), pick(h, 1)])
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntraGroupResidual {
    pub group: usize,
    pub point: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroupDecodabilityReport {
    /// Variables whose weight matrix is not unitary.
    pub non_unit_weights: Vec<usize>,
    /// Variable pairs in different groups with a nonzero x_i x_j term in S^H S.
    pub cross_group: Vec<(usize, usize)>,
    /// Group points whose own cross terms leave S^H S non-scalar.
    pub intra_group: Vec<IntraGroupResidual>,
    /// Re(y_t^H S(x) y_{t-1}) is a sum of per-variable terms; true for every linear design.
    pub linear_term_separable: bool,
}

impl GroupDecodabilityReport {
    pub fn passed(&self) -> bool {
        self.non_unit_weights.is_empty()
            && self.cross_group.is_empty()
            && self.intra_group.is_empty()
            && self.linear_term_separable
    }
}

const RESIDUAL_TOL: f64 = 1e-12;

/// Checks that S(x)^H S(x) = (Σ x_i²) I on the signal set, so the decoding
/// metric separates into one term per group.
pub fn verify_group_decodable(
    d: &LinearDesign,
    p: &GroupPartition,
    sets: &[GroupSignalSet; GROUPS],
) -> Result<GroupDecodabilityReport> {
    if p.variables() != d.variables() {
        return Err(Error::DimensionMismatch {
            expected: d.variables(),
            found: p.variables(),
        });
    }
    for (k, set) in sets.iter().enumerate() {
        if set.dim() != p.group(k).len() {
            return Err(Error::DimensionMismatch {
                expected: p.group(k).len(),
                found: set.dim(),
            });
        }
    }
    let mut report = GroupDecodabilityReport {
        linear_term_separable: true,
        ..Default::default()
    };
    let id = exact_identity(d.relays());
    for (i, b) in d.weights().iter().enumerate() {
        if adjoint_exact(b) * b != id {
            report.non_unit_weights.push(i);
        }
    }
    let k = d.variables();
    for i in 0..k {
        for j in i + 1..k {
            if p.group_of(i) != p.group_of(j) && !is_zero_exact(&d.cross_gram(i, j)) {
                report.cross_group.push((i, j));
            }
        }
    }
    for (g, set) in sets.iter().enumerate() {
        let vars = p.group(g);
        let grams: Vec<(usize, usize, CMatrix)> = (0..vars.len())
            .flat_map(|a| (a + 1..vars.len()).map(move |b| (a, b)))
            .filter_map(|(a, b)| {
                let gram = d.cross_gram(vars[a], vars[b]);
                (!is_zero_exact(&gram)).then(|| (a, b, to_float(&gram)))
            })
            .collect();
        for (pi, point) in set.points().iter().enumerate() {
            let mut w = CMatrix::zeros(d.relays(), d.relays());
            for (a, b, gram) in &grams {
                let coeff = point[*a] * point[*b];
                if coeff != 0.0 {
                    w += gram * Complex64::new(coeff, 0.0);
                }
            }
            let residual = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if residual > RESIDUAL_TOL {
                report.intra_group.push(IntraGroupResidual {
                    group: g,
                    point: pi,
                    residual,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_sets::build_axis_signal_set;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn axis_sets(relays: usize) -> [GroupSignalSet; GROUPS] {
        std::array::from_fn(|_| build_axis_signal_set(relays / 2, &[1.0], true).unwrap())
    }

    #[test]
    fn weight_count_and_entries() {
        for r in [4, 8, 16] {
            let d = build_design(r).unwrap();
            assert_eq!(d.variables(), 2 * r);
            for w in d.weights() {
                for z in w.iter() {
                    assert!(z.re.abs() + z.im.abs() <= 1 && z.re * z.im == 0);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_relay_counts() {
        for r in [0, 1, 2, 3, 6, 12] {
            assert!(matches!(build_design(r), Err(Error::InvalidRelayCount(_))));
        }
    }

    #[test]
    fn small_evaluations() {
        let d = build_design(4).unwrap();
        let s = |v: [Complex64; 4]| d.evaluate_symbols(&v).unwrap();
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        assert_eq!(s([one, z, z, z]), CMatrix::identity(4, 4));
        let expected = CMatrix::from_row_slice(
            4,
            4,
            &[z, z, -one, z, z, z, z, -one, one, z, z, z, z, one, z, z],
        );
        assert_eq!(s([z, z, one, z]), expected);
        assert_eq!(d.evaluate(&[0.0; 8]).unwrap(), CMatrix::zeros(4, 4));
        let mut e1 = [0.0; 8];
        e1[0] = 1.0;
        assert_eq!(d.evaluate(&e1).unwrap(), to_float(&d.weights()[0]));
        // s1 = 1 + i: (1+i) on the first diagonal block, (1−i) on the second.
        let m = d
            .evaluate(&[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
            .unwrap();
        let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 1.0),
            c(1.0, 1.0),
            c(1.0, -1.0),
            c(1.0, -1.0),
        ]));
        assert_eq!(m, diag);
        assert!(d.evaluate(&[1.0; 3]).is_err());
    }

    #[test]
    fn pattern_corners() {
        let p8 = build_design(8).unwrap().pattern();
        assert_eq!(
            p8[0],
            ["s1", "s2", "s3", "s4", "-s5*", "-s6*", "-s7*", "-s8*"]
        );
        let p16 = build_design(16).unwrap().pattern();
        assert_eq!(p16[8][0], "s9");
        assert_eq!(p16[0][8], "-s9*");
        assert_eq!(p16[15][15], "s1*");
    }

    #[test]
    fn algebraic_construction_agrees() {
        for lambda in 2..=4 {
            let ctx = RepContext::new(lambda).unwrap();
            assert_eq!(
                build_design_algebraic(&ctx),
                build_design(ctx.relays()).unwrap()
            );
        }
    }

    /// Every codeword is φ of the algebra element whose coordinates are s.
    #[test]
    fn codeword_is_left_regular_image() {
        let ctx = RepContext::new(3).unwrap();
        let d = build_design(8).unwrap();
        let z: Vec<Complex<i64>> = (0..8)
            .map(|k| Complex::new(k as i64 - 3, 2 - (k as i64 % 3)))
            .collect();
        let x: Vec<i64> = z.iter().flat_map(|v| [v.re, v.im]).collect();
        let elem = ctx.from_coordinates(&z).unwrap();
        assert_eq!(
            d.evaluate_exact(&x).unwrap(),
            ctx.left_regular_rep(&elem).unwrap()
        );
    }

    #[test]
    fn partition_shape() {
        let p = group_partition(4).unwrap();
        assert_eq!(
            p.groups(),
            &[vec![0, 2], vec![1, 3], vec![4, 6], vec![5, 7]]
        );
        for r in [8, 16] {
            let p = group_partition(r).unwrap();
            assert!(p.groups().iter().all(|g| g.len() == r / 2));
            let mut all: Vec<_> = p.groups().iter().flatten().copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..2 * r).collect::<Vec<_>>());
        }
        assert!(GroupPartition::new([vec![0], vec![0], vec![1], vec![2]]).is_err());
    }

    #[test]
    fn axis_sets_are_group_decodable() {
        for r in [4, 8, 16] {
            let d = build_design(r).unwrap();
            let p = group_partition(r).unwrap();
            let report = verify_group_decodable(&d, &p, &axis_sets(r)).unwrap();
            assert!(report.passed(), "R={r}: {report:?}");
        }
    }

    #[test]
    fn unconstrained_qpsk_is_not() {
        let d = build_design(4).unwrap();
        let p = group_partition(4).unwrap();
        let qpsk = GroupSignalSet::from_points(
            2,
            vec![
                vec![1.0, 1.0],
                vec![1.0, -1.0],
                vec![-1.0, 1.0],
                vec![-1.0, -1.0],
            ],
        )
        .unwrap();
        let sets = std::array::from_fn(|_| qpsk.clone());
        let report = verify_group_decodable(&d, &p, &sets).unwrap();
        assert!(!report.passed());
        assert!(report.cross_group.is_empty());
        assert_eq!(report.intra_group.len(), 16);
        // Residual 2Re(s1* s2) P = ±2 for unit coordinates.
        assert!(report
            .intra_group
            .iter()
            .all(|r| (r.residual - 2.0).abs() < 1e-12));
    }

    /// Cross terms of S^H S only pair Re with Re (or Im with Im) of two
    /// distinct symbols from the same half, with Gram ±2 on a fixed-point-free pattern.
    #[test]
    fn gram_cross_terms_stay_within_halves() {
        for r in [4, 8] {
            let d = build_design(r).unwrap();
            let h = r / 2;
            for i in 0..2 * r {
                for j in i + 1..2 * r {
                    let g = d.cross_gram(i, j);
                    if is_zero_exact(&g) {
                        continue;
                    }
                    let (si, sj) = (i / 2, j / 2);
                    assert_ne!(si, sj);
                    assert_eq!(si < h, sj < h, "pair ({i},{j}) crosses halves");
                    assert_eq!(i % 2, j % 2, "pair ({i},{j}) mixes Re and Im");
                    for k in 0..r {
                        assert_eq!(g[(k, k)], Complex::new(0, 0));
                    }
                    assert!(g
                        .iter()
                        .all(|z| z.im == 0 && (z.re == 0 || z.re.abs() == 2)));
                }
            }
        }
    }
}
