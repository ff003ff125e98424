//! Relay matrices A_1..A_R, the initial vector s_0 and matrix X_0, and the
//! exact check of the commutation conditions every codeword must satisfy.
//!
//! The first M = R/2 relays forward their received vector through φ of a
//! central δ-monomial; the remaining M conjugate it first and apply φ of a
//! conjugate linker. Both halves are ordered by δ-mask.

use num_complex::{Complex, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{center_generators, conjugate_linkers_with, LinkerFamily, RepContext};
use crate::design::LinearDesign;
use crate::error::{Error, Result};
use crate::linalg::{adjoint_exact, conj_exact, exact_identity, to_float, CMatrix, ExactMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct RelaySet {
    matrices: Vec<ExactMatrix>,
    split: usize,
    family: LinkerFamily,
}

impl RelaySet {
    /// Assembles a relay set from explicit matrices. Used for negative controls;
    /// [`build_relay_matrices`] is the normal constructor.
    pub fn from_matrices(
        matrices: Vec<ExactMatrix>,
        split: usize,
        family: LinkerFamily,
    ) -> Result<Self> {
        let n = matrices.len();
        if split > n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: split,
            });
        }
        for a in &matrices {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: a.nrows(),
                });
            }
        }
        Ok(Self {
            matrices,
            split,
            family,
        })
    }

    pub fn relays(&self) -> usize {
        self.matrices.len()
    }

    /// M: relays 0..M forward r_j, relays M..R forward conj(r_j).
    pub fn split(&self) -> usize {
        self.split
    }

    pub fn family(&self) -> LinkerFamily {
        self.family
    }

    pub fn matrices(&self) -> &[ExactMatrix] {
        &self.matrices
    }

    /// A_j, 0-based.
    pub fn matrix(&self, j: usize) -> &ExactMatrix {
        &self.matrices[j]
    }

    pub fn is_conjugating(&self, j: usize) -> bool {
        j >= self.split
    }

    pub fn float_matrices(&self) -> Vec<CMatrix> {
        self.matrices.iter().map(to_float).collect()
    }

    /// X = [A_1 s … A_M s, A_{M+1} s* … A_R s*].
    pub fn assemble(&self, s: &[Complex<i64>]) -> ExactMatrix {
        let n = self.relays();
        let mut x = ExactMatrix::from_element(n, n, Complex::new(0, 0));
        for (j, a) in self.matrices.iter().enumerate() {
            for r in 0..n {
                let mut acc = Complex::new(0, 0);
                for (c, sc) in s.iter().enumerate() {
                    let v = if self.is_conjugating(j) {
                        sc.conj()
                    } else {
                        *sc
                    };
                    acc += a[(r, c)] * v;
                }
                x[(r, j)] = acc;
            }
        }
        x
    }

    /// Replaces A_j (0-based) with `replacement`. Debug helper for negative controls.
    pub fn with_replaced(&self, j: usize, replacement: ExactMatrix) -> Self {
        let mut out = self.clone();
        out.matrices[j] = replacement;
        out
    }
}

pub fn build_relay_matrices(ctx: &RepContext) -> RelaySet {
    build_relay_matrices_with(ctx, LinkerFamily::Gamma2)
}

pub fn build_relay_matrices_with(ctx: &RepContext, family: LinkerFamily) -> RelaySet {
    let matrices = center_generators(ctx)
        .into_iter()
        .chain(conjugate_linkers_with(ctx, family))
        .map(|x| {
            ctx.left_regular_rep(&x)
                .expect("generators lie in the algebra")
        })
        .collect();
    RelaySet {
        matrices,
        split: ctx.split(),
        family,
    }
}

/// One failed commutation check.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// 1-based relay index.
    pub relay: usize,
    pub conjugating: bool,
    /// The integer symbol vector that exposed the failure.
    pub witness: Vec<i64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConditionReport {
    pub trials: usize,
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks A_i S(x) = S(x) A_i (i ≤ M) and A_i S(x)* = S(x) A_i (i > M) on
/// `trials` random integer symbol vectors, exactly. Only the first witness per
/// relay is kept.
pub fn verify_conditions(
    rs: &RelaySet,
    d: &LinearDesign,
    trials: usize,
    seed: u64,
) -> Result<ConditionReport> {
    if rs.relays() != d.relays() {
        return Err(Error::DimensionMismatch {
            expected: d.relays(),
            found: rs.relays(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConditionReport {
        trials,
        ..Default::default()
    };
    let mut failed = vec![false; rs.relays()];
    for _ in 0..trials {
        let x: Vec<i64> = (0..d.variables())
            .map(|_| rng.random_range(-9..=9))
            .collect();
        let c = d.evaluate_exact(&x)?;
        let c_conj = conj_exact(&c);
        for (j, a) in rs.matrices().iter().enumerate() {
            report.checks += 1;
            let lhs = if rs.is_conjugating(j) {
                a * &c_conj
            } else {
                a * &c
            };
            if lhs != &c * a && !failed[j] {
                failed[j] = true;
                report.violations.push(Violation {
                    relay: j + 1,
                    conjugating: rs.is_conjugating(j),
                    witness: x.clone(),
                });
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialState {
    pub s0: Vec<Complex<i64>>,
    pub x0: ExactMatrix,
    pub a0: f64,
}

impl InitialState {
    pub fn s0_float(&self) -> Vec<Complex64> {
        self.s0
            .iter()
            .map(|z| Complex64::new(z.re as f64, z.im as f64))
            .collect()
    }
}

/// s_0 = e_1 and the corresponding X_0, which must be unitary.
pub fn initial_state(rs: &RelaySet) -> Result<InitialState> {
    let n = rs.relays();
    let mut s0 = vec![Complex::new(0, 0); n];
    s0[0] = Complex::new(1, 0);
    let x0 = rs.assemble(&s0);
    if adjoint_exact(&x0) * &x0 != exact_identity(n) {
        return Err(Error::InitialMatrixNotUnitary);
    }
    Ok(InitialState { s0, x0, a0: 1.0 })
}
