//! The exact coefficient ring: arbitrary-precision rationals, Gaussian
//! rationals, and sparse multivariate polynomials over a closed set of formal
//! generators.
//!
//! `π` is a formal transcendental generator so that residue results such as
//! `13π/24` stay exact monomials; `√-1` lives in the coefficient field as the
//! imaginary unit of a Gaussian rational because it satisfies `i² = -1`
//! algebraically. Zero is the empty term set and every operation strips zero
//! coefficients eagerly, so canonical forms are unique and equality is plain
//! comparison.

mod text;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Reduced fraction with arbitrary-precision numerator and positive
/// denominator (maintained by `num_rational`).
pub type BigRational = num_rational::BigRational;

/// `re + im·i` with exact rational components; equality is componentwise.
pub type GaussianRational = Complex<BigRational>;

/// Complex double, the target of numeric evaluation.
pub type C64 = Complex<f64>;

/// The closed set of formal generators the engine computes over.
///
/// Indices are 1-based frame/coordinate labels and must stay within the
/// ambient dimension of the computation that uses them.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Generator {
    /// The circle constant, kept formal so results are polynomials in π.
    Pi,
    /// First normal derivative `h'(0)` of the collar profile at the boundary.
    HPrime,
    /// Component `X_j` of the first vector field at the base point.
    X(u8),
    /// Component `Y_l` of the second vector field at the base point.
    Y(u8),
    /// Derivative jet `∂Y_l/∂x_j` at the base point; `DY(j, l)`.
    DY(u8, u8),
    /// Opaque interior quantity `Ric(X, Y)`.
    RicXY,
    /// Opaque interior scalar curvature `s`.
    ScalarS,
    /// Opaque interior metric pairing `g(X, Y)`.
    GXY,
    /// Opaque tangential metric pairing `g(X^T, Y^T)`.
    GXTYT,
}

impl Generator {
    fn token(&self) -> String {
        match self {
            Generator::Pi => "pi".into(),
            Generator::HPrime => "h'".into(),
            Generator::X(j) => format!("X_{j}"),
            Generator::Y(l) => format!("Y_{l}"),
            Generator::DY(j, l) => format!("dY_{j}_{l}"),
            Generator::RicXY => "RicXY".into(),
            Generator::ScalarS => "s".into(),
            Generator::GXY => "gXY".into(),
            Generator::GXTYT => "gXTYT".into(),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.token())
    }
}

/// Exponent vector over [`Generator`]: sorted, strictly positive exponents.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial(Vec<(Generator, u32)>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn generator(g: Generator) -> Self {
        Monomial(vec![(g, 1)])
    }

    pub fn from_powers(mut powers: Vec<(Generator, u32)>) -> Self {
        powers.retain(|&(_, e)| e > 0);
        powers.sort_by_key(|&(g, _)| g);
        let mut merged: Vec<(Generator, u32)> = Vec::with_capacity(powers.len());
        for (g, e) in powers {
            match merged.last_mut() {
                Some((lg, le)) if *lg == g => *le += e,
                _ => merged.push((g, e)),
            }
        }
        Monomial(merged)
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn powers(&self) -> &[(Generator, u32)] {
        &self.0
    }

    pub fn exponent(&self, g: Generator) -> u32 {
        self.0
            .iter()
            .find(|&&(gg, _)| gg == g)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut powers = self.0.clone();
        powers.extend_from_slice(&other.0);
        Monomial::from_powers(powers)
    }

    /// Monomial with generator `g` removed entirely.
    pub fn without(&self, g: Generator) -> Monomial {
        Monomial(self.0.iter().copied().filter(|&(gg, _)| gg != g).collect())
    }
}

/// Sparse polynomial over [`Monomial`] with [`GaussianRational`] coefficients.
///
/// Values are immutable in spirit: every operation builds a new canonical
/// polynomial and no zero coefficient is ever stored.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ExactScalar {
    terms: BTreeMap<Monomial, GaussianRational>,
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn gauss(re: BigRational, im: BigRational) -> GaussianRational {
    Complex::new(re, im)
}

pub fn gauss_int(re: i64, im: i64) -> GaussianRational {
    gauss(rat(re, 1), rat(im, 1))
}

impl ExactScalar {
    pub fn zero() -> Self {
        ExactScalar::default()
    }

    pub fn one() -> Self {
        ExactScalar::from_gaussian(gauss_int(1, 0))
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        ExactScalar::from_gaussian(gauss_int(0, 1))
    }

    /// The formal circle constant.
    pub fn pi() -> Self {
        ExactScalar::generator(Generator::Pi)
    }

    pub fn from_int(v: i64) -> Self {
        ExactScalar::from_gaussian(gauss_int(v, 0))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        ExactScalar::from_gaussian(gauss(rat(num, den), rat(0, 1)))
    }

    pub fn from_gaussian(c: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::unit(), c);
        }
        ExactScalar { terms }
    }

    pub fn generator(g: Generator) -> Self {
        ExactScalar::term(Monomial::generator(g), gauss_int(1, 0))
    }

    pub fn term(m: Monomial, c: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        ExactScalar { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of the constant monomial.
    pub fn constant_part(&self) -> GaussianRational {
        self.terms
            .get(&Monomial::unit())
            .cloned()
            .unwrap_or_else(|| gauss_int(0, 0))
    }

    /// `Some(c)` iff the polynomial is the single constant `c` (or zero).
    pub fn as_constant(&self) -> Option<GaussianRational> {
        if self.is_zero() {
            return Some(gauss_int(0, 0));
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Monomial::unit()) {
                return Some(c.clone());
            }
        }
        None
    }

    fn insert_term(terms: &mut BTreeMap<Monomial, GaussianRational>, m: Monomial, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> ExactScalar {
        if c.is_zero() {
            return ExactScalar::zero();
        }
        ExactScalar {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn scale_rat(&self, c: &BigRational) -> ExactScalar {
        self.scale(&gauss(c.clone(), rat(0, 1)))
    }

    pub fn mul_generator(&self, g: Generator) -> ExactScalar {
        self * &ExactScalar::generator(g)
    }

    pub fn pow(&self, e: u32) -> ExactScalar {
        let mut acc = ExactScalar::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Substitute `g := value` everywhere.
    pub fn substitute(&self, g: Generator, value: &ExactScalar) -> ExactScalar {
        let mut out = ExactScalar::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(g);
            let rest = ExactScalar::term(m.without(g), c.clone());
            out = &out + &(&rest * &value.pow(e));
        }
        out
    }

    /// Direct numeric evaluation; every generator occurring in `self` must be
    /// assigned.
    pub fn eval(&self, assignment: &BTreeMap<Generator, C64>) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut v = gaussian_to_c64(c);
            for &(g, e) in m.powers() {
                let gv = assignment
                    .get(&g)
                    .ok_or_else(|| Error::MissingAssignment(g.token()))?;
                v *= gv.powi(e as i32);
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Every generator that occurs with nonzero exponent.
    pub fn generators(&self) -> Vec<Generator> {
        let mut out: Vec<Generator> = Vec::new();
        for m in self.terms.keys() {
            for &(g, _) in m.powers() {
                if !out.contains(&g) {
                    out.push(g);
                }
            }
        }
        out.sort();
        out
    }

    /// Stable text form; see the module tests for the grammar and
    /// [`ExactScalar::parse`] for the inverse.
    pub fn to_text(&self) -> String {
        text::render(self)
    }

    pub fn parse(input: &str) -> Result<ExactScalar> {
        text::parse(input)
    }
}

pub fn gaussian_to_c64(c: &GaussianRational) -> C64 {
    C64::new(
        c.re.to_f64().unwrap_or(f64::NAN),
        c.im.to_f64().unwrap_or(f64::NAN),
    )
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `i^e` as an exact Gaussian rational.
pub fn i_pow(e: u32) -> GaussianRational {
    match e % 4 {
        0 => gauss_int(1, 0),
        1 => gauss_int(0, 1),
        2 => gauss_int(-1, 0),
        _ => gauss_int(0, -1),
    }
}

/// `(-i)^e` as an exact Gaussian rational.
pub fn neg_i_pow(e: u32) -> GaussianRational {
    match e % 4 {
        0 => gauss_int(1, 0),
        1 => gauss_int(0, -1),
        2 => gauss_int(-1, 0),
        _ => gauss_int(0, 1),
    }
}

pub fn factorial(k: u32) -> BigRational {
    let mut acc = rat(1, 1);
    for t in 1..=k as i64 {
        acc *= rat(t, 1);
    }
    acc
}

impl Add for &ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        let mut terms = self.terms.clone();
        for (m, c) in &rhs.terms {
            ExactScalar::insert_term(&mut terms, m.clone(), c.clone());
        }
        ExactScalar { terms }
    }
}

impl Sub for &ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        self + &(-rhs)
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

impl Mul for &ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        let mut terms = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                ExactScalar::insert_term(&mut terms, ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        ExactScalar { terms }
    }
}

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &ExactScalar) {
        for (m, c) in &rhs.terms {
            ExactScalar::insert_term(&mut self.terms, m.clone(), c.clone());
        }
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        -&self
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

/// `true` iff `c` has a nonpositive rendering sign (used by the printer to
/// fold signs into `-` separators).
pub(crate) fn gaussian_is_negative(c: &GaussianRational) -> bool {
    if c.im.is_zero() {
        c.re.is_negative()
    } else if c.re.is_zero() {
        c.im.is_negative()
    } else {
        false
    }
}

pub(crate) fn gaussian_one() -> GaussianRational {
    gauss(BigRational::one(), BigRational::zero())
}
