//! The extended Clifford algebra A_2^L over the reals.
//!
//! Generators are γ1, γ2 (γ² = −1, pairwise anticommuting) and δ1..δa
//! (δ² = +1, central). Elements are kept as sparse integer combinations of
//! canonical monomials, so every identity checked on them is exact.
//!
//! The complex left-regular representation treats the algebra as a vector
//! space over ℂ with γ1 playing the role of the imaginary unit. Scalars act
//! from the right, which is the only side for which left multiplication is
//! ℂ-linear (γ1 does not commute with γ2).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{exact_zeros, ExactMatrix};

/// Largest λ accepted by [`RepContext`] (R = 2^λ relays).
pub const MAX_LAMBDA: u32 = 8;

/// A product of generators in canonical order: γ1 before γ2, δ's by index.
///
/// Bit 0 of the γ mask is γ1, bit 1 is γ2; bit k−1 of the δ mask is δk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisMonomial {
    gamma: u8,
    delta: u32,
}

impl BasisMonomial {
    pub const ONE: Self = Self { gamma: 0, delta: 0 };
    pub const GAMMA1: Self = Self { gamma: 1, delta: 0 };
    pub const GAMMA2: Self = Self { gamma: 2, delta: 0 };

    pub fn new(gamma_mask: u8, delta_mask: u32) -> Self {
        Self {
            gamma: gamma_mask & 0b11,
            delta: delta_mask,
        }
    }

    /// The generator δk, 1-based.
    pub fn delta(k: u32) -> Self {
        assert!((1..=32).contains(&k), "δ index out of range");
        Self::new(0, 1 << (k - 1))
    }

    pub fn gamma_mask(self) -> u8 {
        self.gamma
    }

    pub fn delta_mask(self) -> u32 {
        self.delta
    }

    pub fn has_gamma1(self) -> bool {
        self.gamma & 1 == 1
    }

    /// Smallest `a` such that the monomial lives in A_2^{2^a}.
    pub fn delta_span(self) -> u32 {
        32 - self.delta.leading_zeros()
    }

    /// All 2^(2+a) canonical monomials for `a` δ generators.
    pub fn all(a: u32) -> impl Iterator<Item = BasisMonomial> {
        (0u32..1 << a).flat_map(|d| (0u8..4).map(move |g| BasisMonomial::new(g, d)))
    }
}

impl fmt::Display for BasisMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.gamma & 1 != 0 {
            parts.push("g1".to_string());
        }
        if self.gamma & 2 != 0 {
            parts.push("g2".to_string());
        }
        for k in 0..32 {
            if self.delta >> k & 1 == 1 {
                parts.push(format!("d{}", k + 1));
            }
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

/// Product of two canonical monomials as a sign and a canonical monomial.
pub fn multiply_monomials(m1: BasisMonomial, m2: BasisMonomial) -> (i8, BasisMonomial) {
    let mut negative = false;
    // Each γj of the right factor moves left past every γk (k > j) of the left one.
    for j in 0..2 {
        if m2.gamma >> j & 1 == 1 && (m1.gamma >> (j + 1)).count_ones() % 2 == 1 {
            negative = !negative;
        }
    }
    // γ² = −1; δ² = +1 contributes nothing.
    if (m1.gamma & m2.gamma).count_ones() % 2 == 1 {
        negative = !negative;
    }
    let sign = if negative { -1 } else { 1 };
    (
        sign,
        BasisMonomial::new(m1.gamma ^ m2.gamma, m1.delta ^ m2.delta),
    )
}

/// Integer linear combination of basis monomials. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AlgebraElement {
    coeffs: BTreeMap<BasisMonomial, i64>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(BasisMonomial::ONE)
    }

    pub fn monomial(m: BasisMonomial) -> Self {
        Self::term(1, m)
    }

    pub fn term(coeff: i64, m: BasisMonomial) -> Self {
        let mut x = Self::zero();
        x.add_term(coeff, m);
        x
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, BasisMonomial)>>(terms: I) -> Self {
        let mut x = Self::zero();
        for (c, m) in terms {
            x.add_term(c, m);
        }
        x
    }

    fn add_term(&mut self, coeff: i64, m: BasisMonomial) {
        if coeff == 0 {
            return;
        }
        let entry = self.coeffs.entry(m).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.coeffs.remove(&m);
        }
    }

    pub fn coeff(&self, m: BasisMonomial) -> i64 {
        self.coeffs.get(&m).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (BasisMonomial, i64)> + '_ {
        self.coeffs.iter().map(|(m, c)| (*m, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, k: i64) -> Self {
        Self::from_terms(self.terms().map(|(m, c)| (c * k, m)))
    }

    /// Bilinear extension of [`multiply_monomials`].
    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in self.terms() {
            for (m2, c2) in other.terms() {
                let (sign, m) = multiply_monomials(m1, m2);
                out.add_term(i64::from(sign) * c1 * c2, m);
            }
        }
        out
    }

    /// The map σ: replace γ1 by −γ1.
    pub fn sigma(&self) -> Self {
        Self::from_terms(
            self.terms()
                .map(|(m, c)| if m.has_gamma1() { (-c, m) } else { (c, m) }),
        )
    }

    fn delta_span(&self) -> u32 {
        self.coeffs
            .keys()
            .map(|m| m.delta_span())
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            let sep = match (i, c < 0) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            f.write_str(sep)?;
            match (c.abs(), m == BasisMonomial::ONE) {
                (1, true) => f.write_str("1")?,
                (1, false) => write!(f, "{m}")?,
                (k, true) => write!(f, "{k}")?,
                (k, false) => write!(f, "{k} {m}")?,
            }
        }
        Ok(())
    }
}

impl From<BasisMonomial> for AlgebraElement {
    fn from(m: BasisMonomial) -> Self {
        Self::monomial(m)
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (m, c) in rhs.terms() {
            out.add_term(c, m);
        }
        out
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        self + &(-rhs)
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.scale(-1)
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.multiply(rhs)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr for AlgebraElement {
            type Output = AlgebraElement;
            fn $method(self, rhs: AlgebraElement) -> AlgebraElement {
                (&self).$method(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        -&self
    }
}

/// Which side the complex scalar γ1 acts on when viewing the algebra over ℂ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarSide {
    /// z·b is read as b·(p + qγ1). Makes left multiplication ℂ-linear.
    Right,
    /// z·b is read as (p + qγ1)·b. Kept for comparison only.
    Left,
}

/// Choice of elements used for the conjugating relays.
#[derive(
    Clone,
    Copy,
    Debug,
    Default,
    PartialEq,
    Eq,
    serde::Serialize,
    serde::Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "snake_case")]
pub enum LinkerFamily {
    /// γ2 times each δ-monomial.
    #[default]
    Gamma2,
    /// γ1γ2 times each δ-monomial.
    Gamma1Gamma2,
}

/// Fixed data for the representation of A_2^L with L = 2^(λ−1), R = 2^λ.
#[derive(Clone, Debug)]
pub struct RepContext {
    lambda: u32,
    side: ScalarSide,
    basis: Vec<BasisMonomial>,
    coords: HashMap<BasisMonomial, (usize, Complex<i64>)>,
}

impl RepContext {
    pub fn new(lambda: u32) -> Result<Self> {
        Self::with_scalar_side(lambda, ScalarSide::Right)
    }

    /// Context for `relays` = 2^λ relays.
    pub fn for_relays(relays: usize) -> Result<Self> {
        Self::new(lambda_for_relays(relays)?)
    }

    pub fn with_scalar_side(lambda: u32, side: ScalarSide) -> Result<Self> {
        if lambda < 2 {
            return Err(Error::InvalidRelayCount(1usize << lambda));
        }
        if lambda > MAX_LAMBDA {
            return Err(Error::RelayCountTooLarge(1 << lambda, 1 << MAX_LAMBDA));
        }
        let a = lambda - 1;
        let m = 1u32 << a;
        // δ-mask as a binary counter, the whole 1-block before the γ2-block.
        let basis: Vec<_> = (0..m)
            .map(|d| BasisMonomial::new(0, d))
            .chain((0..m).map(|d| BasisMonomial::new(2, d)))
            .collect();

        let mut coords = HashMap::with_capacity(2 * basis.len());
        for (j, &b) in basis.iter().enumerate() {
            coords.insert(b, (j, Complex::new(1, 0)));
            let (sign, mono) = match side {
                ScalarSide::Right => multiply_monomials(b, BasisMonomial::GAMMA1),
                ScalarSide::Left => multiply_monomials(BasisMonomial::GAMMA1, b),
            };
            coords.insert(mono, (j, Complex::new(0, i64::from(sign))));
        }
        debug_assert_eq!(coords.len(), 1 << (2 + a));

        Ok(Self {
            lambda,
            side,
            basis,
            coords,
        })
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    /// Number of δ generators.
    pub fn a(&self) -> u32 {
        self.lambda - 1
    }

    /// R = 2^λ, also the matrix size.
    pub fn relays(&self) -> usize {
        1 << self.lambda
    }

    /// M = R/2, the number of non-conjugating relays.
    pub fn split(&self) -> usize {
        self.relays() / 2
    }

    pub fn scalar_side(&self) -> ScalarSide {
        self.side
    }

    /// The ordered ℂ-basis.
    pub fn basis(&self) -> &[BasisMonomial] {
        &self.basis
    }

    fn check_span(&self, x: &AlgebraElement) -> Result<()> {
        if x.delta_span() > self.a() {
            let bad = x
                .terms()
                .map(|(m, _)| m)
                .find(|m| m.delta_span() > self.a())
                .expect("span exceeded by some term");
            return Err(Error::MonomialOutOfRange {
                monomial: bad.to_string(),
                a: self.a(),
            });
        }
        Ok(())
    }

    /// ℂ-coordinates of `x` in the ordered basis.
    pub fn coordinates(&self, x: &AlgebraElement) -> Result<Vec<Complex<i64>>> {
        self.check_span(x)?;
        let mut z = vec![Complex::new(0, 0); self.relays()];
        for (m, c) in x.terms() {
            let (j, unit) = self.coords[&m];
            z[j] += unit * c;
        }
        Ok(z)
    }

    /// Inverse of [`coordinates`](Self::coordinates).
    pub fn from_coordinates(&self, z: &[Complex<i64>]) -> Result<AlgebraElement> {
        if z.len() != self.relays() {
            return Err(Error::DimensionMismatch {
                expected: self.relays(),
                found: z.len(),
            });
        }
        let gamma1 = AlgebraElement::monomial(BasisMonomial::GAMMA1);
        let mut x = AlgebraElement::zero();
        for (&b, zj) in self.basis.iter().zip(z) {
            let b = AlgebraElement::monomial(b);
            let scalar = &AlgebraElement::term(zj.re, BasisMonomial::ONE) + &gamma1.scale(zj.im);
            let term = match self.side {
                ScalarSide::Right => &b * &scalar,
                ScalarSide::Left => &scalar * &b,
            };
            x = &x + &term;
        }
        Ok(x)
    }

    /// φ(x): column j holds the coordinates of x·b_j.
    pub fn left_regular_rep(&self, x: &AlgebraElement) -> Result<ExactMatrix> {
        self.check_span(x)?;
        let n = self.relays();
        let mut mat = exact_zeros(n);
        for (j, &b) in self.basis.iter().enumerate() {
            let col = self.coordinates(&x.multiply(&AlgebraElement::monomial(b)))?;
            for (i, v) in col.into_iter().enumerate() {
                mat[(i, j)] = v;
            }
        }
        Ok(mat)
    }
}

/// Free-function form of [`RepContext::left_regular_rep`].
pub fn left_regular_rep(ctx: &RepContext, x: &AlgebraElement) -> Result<ExactMatrix> {
    ctx.left_regular_rep(x)
}

/// λ with R = 2^λ, rejecting anything that is not a power of two ≥ 4.
pub fn lambda_for_relays(relays: usize) -> Result<u32> {
    if relays < 4 || !relays.is_power_of_two() {
        return Err(Error::InvalidRelayCount(relays));
    }
    let lambda = relays.trailing_zeros();
    if lambda > MAX_LAMBDA {
        return Err(Error::RelayCountTooLarge(relays, 1 << MAX_LAMBDA));
    }
    Ok(lambda)
}

/// The δ-monomials in mask order. They span the center of the algebra.
pub fn center_generators(ctx: &RepContext) -> Vec<AlgebraElement> {
    (0..1u32 << ctx.a())
        .map(|d| AlgebraElement::monomial(BasisMonomial::new(0, d)))
        .collect()
}

/// Elements ℓ with ℓ·σ(x) = x·ℓ for every x, from the default γ2 family.
pub fn conjugate_linkers(ctx: &RepContext) -> Vec<AlgebraElement> {
    conjugate_linkers_with(ctx, LinkerFamily::Gamma2)
}

pub fn conjugate_linkers_with(ctx: &RepContext, family: LinkerFamily) -> Vec<AlgebraElement> {
    let gamma = match family {
        LinkerFamily::Gamma2 => 0b10,
        LinkerFamily::Gamma1Gamma2 => 0b11,
    };
    (0..1u32 << ctx.a())
        .map(|d| AlgebraElement::monomial(BasisMonomial::new(gamma, d)))
        .collect()
}
