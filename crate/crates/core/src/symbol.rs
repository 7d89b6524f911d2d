//! Graded pseudodifferential symbols near a boundary point of a collar
//! metric.
//!
//! A [`FullSymbol`] is a finite sum `Σ_m c_m(x_n) ξ^m · |ξ|^{-2k}` with
//! Clifford-valued numerator coefficients and the single quadratic
//! `|ξ|² = h(x_n)|ξ'|² + ξ_n²` in the denominator. All base-point dependence
//! flows through the collar profile `h` and is carried as a first-order jet
//! `(value at x_n = 0, normal derivative at 0)`; requesting a second normal
//! derivative is a loud error, never a silent truncation, because every
//! boundary term in scope is linear in `h'(0)`. Tangential base-point
//! derivatives vanish at the chosen boundary point (boundary normal
//! coordinates), which is what makes the first boundary case vanish
//! structurally rather than by fiat.
//!
//! Symbol maps use `∂_{x_j} ↦ iξ_j`, so composition reads
//! `σ(A∘B) = Σ_α (1/α!) ∂_ξ^α σ(A) · D_x^α σ(B)` with `D_x = -i∂_x`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use num_traits::Zero;

use crate::clifford::CliffordElement;
use crate::scalar::{gauss_int, C64, ExactScalar, GaussianRational, Generator};
use crate::{Error, Result};

/// Exponent vector over `ξ_1..ξ_n`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct XiMonomial(Vec<u32>);

impl XiMonomial {
    pub fn unit(n: u8) -> Self {
        XiMonomial(vec![0; n as usize])
    }

    /// `ξ_axis`, 1-based.
    pub fn axis(n: u8, axis: u8) -> Self {
        let mut e = vec![0; n as usize];
        e[(axis - 1) as usize] = 1;
        XiMonomial(e)
    }

    pub fn from_exponents(e: Vec<u32>) -> Self {
        XiMonomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn n(&self) -> u8 {
        self.0.len() as u8
    }

    pub fn exponent(&self, axis: u8) -> u32 {
        self.0[(axis - 1) as usize]
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &XiMonomial) -> XiMonomial {
        XiMonomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn raised(&self, axis: u8, by: u32) -> XiMonomial {
        let mut e = self.0.clone();
        e[(axis - 1) as usize] += by;
        XiMonomial(e)
    }

    pub fn lowered(&self, axis: u8) -> Option<XiMonomial> {
        let idx = (axis - 1) as usize;
        if self.0[idx] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[idx] -= 1;
        Some(XiMonomial(e))
    }
}

impl fmt::Display for XiMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 0 {
            return write!(f, "1");
        }
        for (idx, &e) in self.0.iter().enumerate() {
            if e == 1 {
                write!(f, "ξ_{}", idx + 1)?;
            } else if e > 1 {
                write!(f, "ξ_{}^{}", idx + 1, e)?;
            }
        }
        Ok(())
    }
}

/// First-order normal jet of a Clifford-valued coefficient: value at
/// `x_n = 0` and, when representable inside the model, the normal derivative
/// there. `None` means the derivative would involve data outside the model
/// (second jets of the collar profile) and must not be consumed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Jet {
    pub value: CliffordElement,
    pub slope: Option<CliffordElement>,
}

impl Jet {
    pub fn constant(value: CliffordElement) -> Self {
        let n = value.dimension();
        Jet {
            value,
            slope: Some(CliffordElement::zero(n)),
        }
    }

    pub fn with_slope(value: CliffordElement, slope: CliffordElement) -> Self {
        Jet {
            value,
            slope: Some(slope),
        }
    }

    /// A value whose normal derivative the model cannot express.
    pub fn opaque(value: CliffordElement) -> Self {
        Jet { value, slope: None }
    }

    fn is_zero(&self) -> bool {
        self.value.is_zero() && self.slope.as_ref().map_or(true, |s| s.is_zero())
    }

    fn add(&self, other: &Jet) -> Result<Jet> {
        Ok(Jet {
            value: self.value.add(&other.value)?,
            slope: match (&self.slope, &other.slope) {
                (Some(a), Some(b)) => Some(a.add(b)?),
                _ => None,
            },
        })
    }

    fn mul(&self, other: &Jet) -> Result<Jet> {
        let value = self.value.mul(&other.value)?;
        let slope = match (&self.slope, &other.slope) {
            (Some(sa), Some(sb)) => Some(
                self.value
                    .mul(sb)?
                    .add(&sa.mul(&other.value)?)?,
            ),
            _ => None,
        };
        Ok(Jet { value, slope })
    }

    fn neg(&self) -> Jet {
        Jet {
            value: self.value.neg(),
            slope: self.slope.as_ref().map(|s| s.neg()),
        }
    }

    fn scale(&self, c: &ExactScalar) -> Jet {
        Jet {
            value: self.value.scale(c),
            slope: self.slope.as_ref().map(|s| s.scale(c)),
        }
    }

    fn scale_gaussian(&self, c: &GaussianRational) -> Jet {
        Jet {
            value: self.value.scale_gaussian(c),
            slope: self.slope.as_ref().map(|s| s.scale_gaussian(c)),
        }
    }
}

/// The collar profile as a jet: `h(0) = 1`, `h'(0)` formal.
fn h_jet(n: u8) -> Jet {
    Jet::with_slope(
        CliffordElement::one(n),
        CliffordElement::scalar(n, ExactScalar::generator(Generator::HPrime)),
    )
}

/// Rational symbol `Σ_m c_m(x_n) ξ^m · |ξ|^{-2k}`.
#[derive(Clone, Debug)]
pub struct FullSymbol {
    n: u8,
    denom_power: u32,
    terms: BTreeMap<XiMonomial, Jet>,
}

impl FullSymbol {
    pub fn zero(n: u8) -> Self {
        FullSymbol {
            n,
            denom_power: 0,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(n: u8) -> Self {
        FullSymbol::from_term(XiMonomial::unit(n), Jet::constant(CliffordElement::one(n)), 0)
    }

    /// `|ξ|^{-2}`.
    pub fn inverse_norm_sq(n: u8) -> Self {
        FullSymbol::from_term(XiMonomial::unit(n), Jet::constant(CliffordElement::one(n)), 1)
    }

    /// `|ξ|² = h(x_n)|ξ'|² + ξ_n²` as a polynomial symbol.
    pub fn norm_sq(n: u8) -> Self {
        FullSymbol::one(n).mul_norm_sq(1)
    }

    pub fn from_term(mono: XiMonomial, jet: Jet, denom_power: u32) -> Self {
        let n = mono.n();
        let mut s = FullSymbol {
            n,
            denom_power,
            terms: BTreeMap::new(),
        };
        s.add_term(mono, jet);
        s
    }

    pub fn from_terms(n: u8, denom_power: u32, terms: Vec<(XiMonomial, Jet)>) -> Self {
        let mut s = FullSymbol {
            n,
            denom_power,
            terms: BTreeMap::new(),
        };
        for (m, j) in terms {
            s.add_term(m, j);
        }
        s
    }

    pub fn dimension(&self) -> u8 {
        self.n
    }

    pub fn denom_power(&self) -> u32 {
        self.denom_power
    }

    pub fn terms(&self) -> impl Iterator<Item = (&XiMonomial, &Jet)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: XiMonomial, j: Jet) {
        debug_assert_eq!(m.n(), self.n);
        if j.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(j);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&j).expect("dimension already checked");
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Homogeneity degree `deg(ξ^m) - 2k`, provided it is uniform.
    pub fn homogeneity(&self) -> Option<i32> {
        let mut h: Option<i32> = None;
        for m in self.terms.keys() {
            let d = m.degree() as i32 - 2 * self.denom_power as i32;
            match h {
                None => h = Some(d),
                Some(prev) if prev == d => {}
                Some(_) => return None,
            }
        }
        h
    }

    /// Multiply the numerator by `|ξ|^{2·times}` without touching the
    /// denominator power (used for alignment and cross-multiplied equality).
    fn mul_norm_sq(&self, times: u32) -> FullSymbol {
        let mut cur = self.clone();
        let h = h_jet(self.n);
        for _ in 0..times {
            let mut next = FullSymbol {
                n: self.n,
                denom_power: cur.denom_power,
                terms: BTreeMap::new(),
            };
            for (m, j) in &cur.terms {
                for a in 1..self.n {
                    next.add_term(m.raised(a, 2), j.mul(&h).expect("same dim"));
                }
                next.add_term(m.raised(self.n, 2), j.clone());
            }
            cur = next;
        }
        cur
    }

    /// Rewrite with denominator power `k ≥ self.denom_power`.
    fn with_denom_power(&self, k: u32) -> FullSymbol {
        assert!(k >= self.denom_power);
        let mut out = self.mul_norm_sq(k - self.denom_power);
        out.denom_power = k;
        out
    }

    pub fn with_added_denom(&self, extra: u32) -> FullSymbol {
        let mut out = self.clone();
        out.denom_power += extra;
        out
    }

    pub fn add(&self, other: &FullSymbol) -> Result<FullSymbol> {
        self.check_dim(other)?;
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let k = self.denom_power.max(other.denom_power);
        let mut out = self.with_denom_power(k);
        for (m, j) in other.with_denom_power(k).terms {
            out.add_term(m, j);
        }
        Ok(out)
    }

    pub fn neg(&self) -> FullSymbol {
        FullSymbol {
            n: self.n,
            denom_power: self.denom_power,
            terms: self
                .terms
                .iter()
                .map(|(m, j)| (m.clone(), j.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &FullSymbol) -> Result<FullSymbol> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &FullSymbol) -> Result<FullSymbol> {
        self.check_dim(other)?;
        let mut out = FullSymbol {
            n: self.n,
            denom_power: self.denom_power + other.denom_power,
            terms: BTreeMap::new(),
        };
        for (ma, ja) in &self.terms {
            for (mb, jb) in &other.terms {
                out.add_term(ma.mul(mb), ja.mul(jb)?);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &ExactScalar) -> FullSymbol {
        if c.is_zero() {
            return FullSymbol::zero(self.n);
        }
        FullSymbol {
            n: self.n,
            denom_power: self.denom_power,
            terms: self
                .terms
                .iter()
                .map(|(m, j)| (m.clone(), j.scale(c)))
                .collect(),
        }
    }

    pub fn scale_gaussian(&self, c: &GaussianRational) -> FullSymbol {
        if c.is_zero() {
            return FullSymbol::zero(self.n);
        }
        FullSymbol {
            n: self.n,
            denom_power: self.denom_power,
            terms: self
                .terms
                .iter()
                .map(|(m, j)| (m.clone(), j.scale_gaussian(c)))
                .collect(),
        }
    }

    fn check_dim(&self, other: &FullSymbol) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Exact equality as rational symbols (cross-multiplied, jets included).
    pub fn eq_symbol(&self, other: &FullSymbol) -> bool {
        if self.n != other.n {
            return false;
        }
        let k = self.denom_power.max(other.denom_power);
        let a = self.with_denom_power(k);
        let b = other.with_denom_power(k);
        if a.terms.len() != b.terms.len() {
            return false;
        }
        a.terms.iter().zip(b.terms.iter()).all(|((ma, ja), (mb, jb))| {
            ma == mb
                && ja.value == jb.value
                && match (&ja.slope, &jb.slope) {
                    (Some(x), Some(y)) => x == y,
                    (None, None) => true,
                    _ => false,
                }
        })
    }

    /// `∂_{ξ_axis}` by the quotient rule; the denominator power grows by one
    /// unless the symbol is polynomial.
    pub fn xi_derivative(&self, axis: u8) -> FullSymbol {
        assert!(axis >= 1 && axis <= self.n);
        let k = self.denom_power;
        if k == 0 {
            let mut out = FullSymbol::zero(self.n);
            for (m, j) in &self.terms {
                let e = m.exponent(axis);
                if let Some(lowered) = m.lowered(axis) {
                    out.add_term(lowered, j.scale(&ExactScalar::from_int(e as i64)));
                }
            }
            return out;
        }
        // (N/|ξ|^{2k})' = [N'·|ξ|² - 2k·(∂_axis|ξ|²/2)·N] / |ξ|^{2(k+1)}
        // with ∂_axis|ξ|² = 2hξ_axis tangentially and 2ξ_n normally.
        let mut out = FullSymbol {
            n: self.n,
            denom_power: k + 1,
            terms: BTreeMap::new(),
        };
        let h = h_jet(self.n);
        for (m, j) in &self.terms {
            let e = m.exponent(axis);
            if e > 0 {
                let dn = FullSymbol::from_term(
                    m.lowered(axis).unwrap(),
                    j.scale(&ExactScalar::from_int(e as i64)),
                    0,
                )
                .mul_norm_sq(1);
                for (mm, jj) in dn.terms {
                    out.add_term(mm, jj);
                }
            }
            let mut chain = j.scale(&ExactScalar::from_int(-2 * k as i64));
            if axis < self.n {
                chain = chain.mul(&h).expect("same dim");
            }
            out.add_term(m.raised(axis, 1), chain);
        }
        out
    }

    /// `∂_{x_n}` through the jets; errors if any needed slope is
    /// unrepresentable. The result's own slopes are exhausted.
    pub fn normal_derivative(&self) -> Result<FullSymbol> {
        let k = self.denom_power;
        let mut slope_part = FullSymbol {
            n: self.n,
            denom_power: k,
            terms: BTreeMap::new(),
        };
        for (m, j) in &self.terms {
            let s = j.slope.as_ref().ok_or_else(|| {
                Error::JetExhausted(format!(
                    "normal derivative of coefficient at ξ-monomial {m} is outside the first-order model"
                ))
            })?;
            slope_part.add_term(m.clone(), Jet::opaque(s.clone()));
        }
        if k == 0 {
            return Ok(slope_part);
        }
        // chain part: -k · h'(0) |ξ'|² · N / |ξ|^{2(k+1)}
        let mut out = slope_part.with_denom_power(k + 1);
        let hp = ExactScalar::generator(Generator::HPrime);
        let factor = &hp * &ExactScalar::from_int(-(k as i64));
        for (m, j) in &self.terms {
            for a in 1..self.n {
                out.add_term(m.raised(a, 2), Jet::opaque(j.value.scale(&factor)));
            }
        }
        Ok(out)
    }

    /// Tangential base-point derivatives vanish at the chosen boundary point
    /// (boundary normal coordinates; field jets enter as constants).
    pub fn tangential_x_derivative(&self) -> FullSymbol {
        FullSymbol::zero(self.n)
    }

    /// Restriction to `x_n = 0`, `|ξ'| = 1`: the denominator factors as
    /// `(ξ_n - i)^k (ξ_n + i)^k` and tangential monomials are retained for
    /// sphere integration.
    pub fn restrict(&self) -> LineSymbol {
        let k = self.denom_power;
        let mut numer: Vec<TangPoly> = Vec::new();
        for (m, j) in &self.terms {
            let d = m.exponent(self.n) as usize;
            if numer.len() <= d {
                numer.resize(d + 1, TangPoly::zero(self.n));
            }
            let tang = TangMono(m.exponents()[..(self.n - 1) as usize].to_vec());
            numer[d].add_term(tang, j.value.clone());
        }
        LineSymbol::new(self.n, k, k, numer)
    }

    /// Numeric evaluation of a scalar symbol under the linear collar model
    /// `h(x_n) = 1 + h'(0)·x_n` (numerator jets evaluated to first order).
    ///
    /// Panics if a coefficient is not a multiple of the identity word.
    pub fn eval_scalar(
        &self,
        xi: &[C64],
        xn: f64,
        asg: &BTreeMap<Generator, C64>,
    ) -> Result<C64> {
        assert_eq!(xi.len(), self.n as usize);
        let hp = asg.get(&Generator::HPrime).copied().unwrap_or(C64::zero());
        let h = C64::new(1.0, 0.0) + hp * xn;
        let mut norm_sq = xi[(self.n - 1) as usize] * xi[(self.n - 1) as usize];
        for v in &xi[..(self.n - 1) as usize] {
            norm_sq += h * v * v;
        }
        let mut acc = C64::zero();
        for (m, j) in &self.terms {
            assert!(j.value.is_scalar(), "eval_scalar needs scalar coefficients");
            let mut c = j.value.scalar_part().eval(asg)?;
            if let Some(s) = &j.slope {
                assert!(s.is_scalar());
                c += s.scalar_part().eval(asg)? * xn;
            }
            for (idx, &e) in m.exponents().iter().enumerate() {
                c *= xi[idx].powi(e as i32);
            }
            acc += c;
        }
        Ok(acc / norm_sq.powi(self.denom_power as i32))
    }
}

impl fmt::Display for FullSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let body: Vec<String> = self
            .terms
            .iter()
            .map(|(m, j)| format!("[{}]·{}", j.value, m))
            .collect();
        write!(f, "{}", body.join(" + "))?;
        if self.denom_power > 0 {
            write!(f, " · |ξ|^-{}", 2 * self.denom_power)?;
        }
        Ok(())
    }
}

/// Association from homogeneity order to [`FullSymbol`]; every component must
/// be homogeneous of its stated order.
#[derive(Clone, Debug)]
pub struct GradedSymbol {
    n: u8,
    components: BTreeMap<i32, FullSymbol>,
}

impl GradedSymbol {
    pub fn new(n: u8) -> Self {
        GradedSymbol {
            n,
            components: BTreeMap::new(),
        }
    }

    pub fn identity(n: u8) -> Self {
        let mut g = GradedSymbol::new(n);
        g.insert(0, FullSymbol::one(n));
        g
    }

    pub fn dimension(&self) -> u8 {
        self.n
    }

    /// Inserts (accumulating) a component, checking the Euler-degree
    /// invariant monomial by monomial.
    pub fn insert(&mut self, order: i32, sym: FullSymbol) {
        assert_eq!(sym.dimension(), self.n);
        if sym.is_zero() {
            return;
        }
        assert_eq!(
            sym.homogeneity(),
            Some(order),
            "component is not homogeneous of order {order}"
        );
        match self.components.entry(order) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(sym);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&sym).expect("same dimension");
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn component(&self, order: i32) -> FullSymbol {
        self.components
            .get(&order)
            .cloned()
            .unwrap_or_else(|| FullSymbol::zero(self.n))
    }

    pub fn orders(&self) -> Vec<i32> {
        self.components.keys().copied().collect()
    }

    pub fn leading_order(&self) -> Option<i32> {
        self.components.keys().next_back().copied()
    }

    /// Composition `σ(A∘B)` truncated below `cutoff`.
    ///
    /// Only the normal multi-index matters: tangential base-point derivatives
    /// vanish structurally. A second-order normal term that would land at or
    /// above the cutoff is rejected unless it vanishes identically, because
    /// the jets cannot express it.
    pub fn compose(&self, other: &GradedSymbol, cutoff: i32) -> Result<GradedSymbol> {
        let mut out = GradedSymbol::new(self.n);
        let minus_i = gauss_int(0, -1);
        for (&p, ap) in &self.components {
            for (&q, bq) in &other.components {
                if p + q >= cutoff {
                    out.insert(p + q, ap.mul(bq)?);
                }
                if p + q - 1 >= cutoff {
                    let db = bq
                        .normal_derivative()
                        .map_err(|_| Error::CutoffTooDeep {
                            cutoff,
                            order: p + q - 1,
                        })?
                        .scale_gaussian(&minus_i);
                    let term = ap.xi_derivative(self.n).mul(&db)?;
                    out.insert(p + q - 1, term);
                }
                if p + q - 2 >= cutoff {
                    // Needs ∂²_{x_n}: representable only when the first
                    // normal derivative already vanishes identically.
                    let db = bq.normal_derivative().unwrap_or_else(|_| FullSymbol::one(self.n));
                    if !db.is_zero() {
                        return Err(Error::CutoffTooDeep {
                            cutoff,
                            order: p + q - 2,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Leading-order inversion: `q_{-m} = p_m^{-1}` (requires `p_m² = c·|ξ|^{2m}`
    /// with invertible constant `c`), lower orders by the composition
    /// recursion, down to `cutoff`.
    pub fn invert(&self, cutoff: i32) -> Result<GradedSymbol> {
        let m = self
            .leading_order()
            .ok_or_else(|| Error::NotInvertible("zero symbol".into()))?;
        let pm = self.component(m);
        if m < 0 {
            return Err(Error::NotInvertible(format!(
                "leading order {m} is negative"
            )));
        }
        let sq = pm.mul(&pm)?;
        // Candidate constant from the ξ_n^{2m} coefficient of p_m².
        let target_mono = XiMonomial::unit(self.n).raised(self.n, 2 * m as u32);
        let cand = sq
            .terms
            .get(&target_mono)
            .map(|j| j.value.clone())
            .ok_or_else(|| Error::NotInvertible("leading square misses ξ_n^{2m}".into()))?;
        if !cand.is_scalar() {
            return Err(Error::NotInvertible(
                "leading square is not scalar times |ξ|^{2m}".into(),
            ));
        }
        let c = cand
            .scalar_part()
            .as_constant()
            .ok_or_else(|| Error::NotInvertible("leading constant is not numeric".into()))?;
        if c.is_zero() {
            return Err(Error::NotInvertible("leading square vanishes".into()));
        }
        let norm_power = FullSymbol::one(self.n)
            .mul_norm_sq(m as u32)
            .scale_gaussian(&c);
        if !sq.eq_symbol(&norm_power) {
            return Err(Error::NotInvertible(
                "leading square is not proportional to |ξ|^{2m}".into(),
            ));
        }
        let c_inv = GaussianRational::new(
            crate::scalar::rat(1, 1),
            crate::scalar::rat(0, 1),
        ) / c;
        let q_lead = pm.scale_gaussian(&c_inv).with_added_denom(m as u32);

        let mut q = GradedSymbol::new(self.n);
        q.insert(-m, q_lead.clone());
        let minus_i = gauss_int(0, -1);
        let mut t = -m - 1;
        while t >= cutoff {
            // The order-(m+t) component of σ(p∘q) must vanish:
            //   p_m·q_t = -Σ' (1/α!) ∂_ξ^α p_a · D_x^α q_b
            let mut r = FullSymbol::zero(self.n);
            for (&a, pa) in &self.components {
                for (&b, qb) in &q.components {
                    if a + b == m + t && !(a == m && b == t) {
                        r = r.add(&pa.mul(qb)?)?;
                    }
                    if a - 1 + b == m + t {
                        let db = qb
                            .normal_derivative()
                            .map_err(|_| Error::CutoffTooDeep { cutoff, order: t })?
                            .scale_gaussian(&minus_i);
                        r = r.add(&pa.xi_derivative(self.n).mul(&db)?)?;
                    }
                    if a - 2 + b == m + t {
                        let db = qb.normal_derivative().unwrap_or_else(|_| FullSymbol::one(self.n));
                        if !db.is_zero() {
                            return Err(Error::CutoffTooDeep { cutoff, order: t });
                        }
                    }
                }
            }
            let qt = q_lead.mul(&r)?.neg();
            q.insert(t, qt);
            t -= 1;
        }
        Ok(q)
    }
}

impl fmt::Display for GradedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "0");
        }
        for (order, sym) in self.components.iter().rev() {
            writeln!(f, "order {order}: {sym}")?;
        }
        Ok(())
    }
}

/// Tangential exponent vector over `ξ_1..ξ_{n-1}`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TangMono(pub Vec<u32>);

impl TangMono {
    pub fn unit(n: u8) -> Self {
        TangMono(vec![0; (n - 1) as usize])
    }

    pub fn axis(n: u8, axis: u8) -> Self {
        let mut e = vec![0; (n - 1) as usize];
        e[(axis - 1) as usize] = 1;
        TangMono(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &TangMono) -> TangMono {
        TangMono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for TangMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 0 {
            return write!(f, "1");
        }
        for (idx, &e) in self.0.iter().enumerate() {
            if e == 1 {
                write!(f, "ξ_{}", idx + 1)?;
            } else if e > 1 {
                write!(f, "ξ_{}^{}", idx + 1, e)?;
            }
        }
        Ok(())
    }
}

/// Clifford-valued polynomial in the tangential covariables, canonicalized
/// on the unit sphere: `|ξ'|² = 1` is used to keep the exponent of the last
/// covariable below two, so equality of restricted symbols is structural.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TangPoly {
    n: u8,
    terms: BTreeMap<TangMono, CliffordElement>,
}

/// Rewrite a tangential monomial modulo `ξ_{last}² = 1 - Σ_{a<last} ξ_a²`
/// into monomials with last exponent at most one, with integer signs.
fn reduce_tang_mono(m: TangMono) -> Vec<(TangMono, i64)> {
    let vars = m.0.len();
    let last = vars - 1;
    let mut work = vec![(m, 1i64)];
    let mut done = Vec::new();
    while let Some((mono, sign)) = work.pop() {
        if vars < 2 || mono.0[last] < 2 {
            done.push((mono, sign));
            continue;
        }
        let mut base = mono.clone();
        base.0[last] -= 2;
        work.push((base.clone(), sign));
        for a in 0..last {
            let mut other = base.clone();
            other.0[a] += 2;
            work.push((other, -sign));
        }
    }
    done
}

impl TangPoly {
    pub fn zero(n: u8) -> Self {
        TangPoly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(n: u8, c: ExactScalar) -> Self {
        let mut p = TangPoly::zero(n);
        p.add_term(TangMono::unit(n), CliffordElement::scalar(n, c));
        p
    }

    pub fn term(n: u8, m: TangMono, c: CliffordElement) -> Self {
        let mut p = TangPoly::zero(n);
        p.add_term(m, c);
        p
    }

    pub fn dimension(&self) -> u8 {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TangMono, &CliffordElement)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: TangMono, c: CliffordElement) {
        if c.is_zero() {
            return;
        }
        for (mono, sign) in reduce_tang_mono(m) {
            let coeff = if sign == 1 {
                c.clone()
            } else {
                c.scale(&ExactScalar::from_int(sign))
            };
            self.add_reduced(mono, coeff);
        }
    }

    fn add_reduced(&mut self, m: TangMono, c: CliffordElement) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&c).expect("same dimension");
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &TangPoly) -> TangPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> TangPoly {
        TangPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &TangPoly) -> Result<TangPoly> {
        let mut out = TangPoly::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca.mul(cb)?);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &ExactScalar) -> TangPoly {
        if c.is_zero() {
            return TangPoly::zero(self.n);
        }
        TangPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v.scale(c)))
                .collect(),
        }
    }

    pub fn scale_gaussian(&self, c: &GaussianRational) -> TangPoly {
        self.scale(&ExactScalar::from_gaussian(c.clone()))
    }

    /// Clifford trace of every coefficient.
    pub fn trace(&self) -> TangPoly {
        let mut out = TangPoly::zero(self.n);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), CliffordElement::scalar(self.n, c.trace()));
        }
        out
    }

    pub fn is_scalar(&self) -> bool {
        self.terms.values().all(|c| c.is_scalar())
    }
}

impl fmt::Display for TangPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let body: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("[{}]·{}", c, m))
            .collect();
        write!(f, "{}", body.join(" + "))
    }
}

/// Restriction of a symbol to `|ξ'| = 1`: a rational function of `ξ_n` with
/// poles only at `±i`, with Clifford ⊗ tangential-monomial coefficients.
#[derive(Clone, Debug)]
pub struct LineSymbol {
    n: u8,
    pole_plus: u32,
    pole_minus: u32,
    /// Coefficient of `ξ_n^d` at index `d`; trailing zeros trimmed.
    numer: Vec<TangPoly>,
}

impl LineSymbol {
    pub fn new(n: u8, pole_plus: u32, pole_minus: u32, numer: Vec<TangPoly>) -> Self {
        let mut s = Self::new_unreduced(n, pole_plus, pole_minus, numer);
        s.reduce();
        s
    }

    /// Skips the pole cancellation; only for callers that need a
    /// deliberately overestimated pole order.
    pub(crate) fn new_unreduced(
        n: u8,
        pole_plus: u32,
        pole_minus: u32,
        numer: Vec<TangPoly>,
    ) -> Self {
        let mut s = LineSymbol {
            n,
            pole_plus,
            pole_minus,
            numer,
        };
        s.trim();
        s
    }

    pub fn zero(n: u8) -> Self {
        LineSymbol {
            n,
            pole_plus: 0,
            pole_minus: 0,
            numer: Vec::new(),
        }
    }

    pub fn dimension(&self) -> u8 {
        self.n
    }

    pub fn poles(&self) -> (u32, u32) {
        (self.pole_plus, self.pole_minus)
    }

    pub fn numerator(&self) -> &[TangPoly] {
        &self.numer
    }

    pub fn numer_degree(&self) -> Option<usize> {
        if self.numer.is_empty() {
            None
        } else {
            Some(self.numer.len() - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_empty()
    }

    fn trim(&mut self) {
        while self.numer.last().map_or(false, |c| c.is_zero()) {
            self.numer.pop();
        }
        if self.numer.is_empty() {
            self.pole_plus = 0;
            self.pole_minus = 0;
        }
    }

    /// Numerator value at `ξ_n = c`.
    fn numer_at(&self, c: &GaussianRational) -> TangPoly {
        let mut acc = TangPoly::zero(self.n);
        let mut power = gauss_int(1, 0);
        for coeff in &self.numer {
            acc = acc.add(&coeff.scale_gaussian(&power));
            power = power * c.clone();
        }
        acc
    }

    /// Synthetic division of the numerator by `(ξ_n - c)`; remainder must
    /// vanish (checked by the caller via `numer_at`).
    fn numer_divided_by(&self, c: &GaussianRational) -> Vec<TangPoly> {
        let d = self.numer.len();
        if d <= 1 {
            return Vec::new();
        }
        let mut q: Vec<TangPoly> = vec![TangPoly::zero(self.n); d - 1];
        q[d - 2] = self.numer[d - 1].clone();
        for t in (1..d - 1).rev() {
            q[t - 1] = self.numer[t].add(&q[t].scale_gaussian(c));
        }
        q
    }

    /// Cancel common `(ξ_n ∓ i)` factors so the representation is canonical.
    fn reduce(&mut self) {
        let i = gauss_int(0, 1);
        let minus_i = gauss_int(0, -1);
        loop {
            if self.pole_plus > 0 && !self.numer.is_empty() && self.numer_at(&i).is_zero() {
                self.numer = self.numer_divided_by(&i);
                self.pole_plus -= 1;
                self.trim();
                continue;
            }
            if self.pole_minus > 0 && !self.numer.is_empty() && self.numer_at(&minus_i).is_zero() {
                self.numer = self.numer_divided_by(&minus_i);
                self.pole_minus -= 1;
                self.trim();
                continue;
            }
            break;
        }
        self.trim();
    }

    pub fn add(&self, other: &LineSymbol) -> LineSymbol {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let a = self.pole_plus.max(other.pole_plus);
        let b = self.pole_minus.max(other.pole_minus);
        let lhs = self.raise_poles(a, b);
        let rhs = other.raise_poles(a, b);
        let mut numer = lhs.numer.clone();
        if numer.len() < rhs.numer.len() {
            numer.resize(rhs.numer.len(), TangPoly::zero(self.n));
        }
        for (d, c) in rhs.numer.iter().enumerate() {
            numer[d] = numer[d].add(c);
        }
        LineSymbol::new(self.n, a, b, numer)
    }

    pub fn neg(&self) -> LineSymbol {
        LineSymbol {
            n: self.n,
            pole_plus: self.pole_plus,
            pole_minus: self.pole_minus,
            numer: self.numer.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn sub(&self, other: &LineSymbol) -> LineSymbol {
        self.add(&other.neg())
    }

    /// Multiply the numerator by `(ξ_n - root)^times`.
    fn numer_mul_linear(numer: &[TangPoly], n: u8, root: &GaussianRational, times: u32) -> Vec<TangPoly> {
        let mut cur = numer.to_vec();
        for _ in 0..times {
            let mut next = vec![TangPoly::zero(n); cur.len() + 1];
            for (d, c) in cur.iter().enumerate() {
                next[d + 1] = next[d + 1].add(c);
                next[d] = next[d].add(&c.scale_gaussian(&(-root.clone())));
            }
            cur = next;
        }
        cur
    }

    fn raise_poles(&self, a: u32, b: u32) -> LineSymbol {
        let i = gauss_int(0, 1);
        let minus_i = gauss_int(0, -1);
        let mut numer =
            Self::numer_mul_linear(&self.numer, self.n, &i, a - self.pole_plus);
        numer = Self::numer_mul_linear(&numer, self.n, &minus_i, b - self.pole_minus);
        LineSymbol {
            n: self.n,
            pole_plus: a,
            pole_minus: b,
            numer,
        }
    }

    pub fn mul(&self, other: &LineSymbol) -> Result<LineSymbol> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        if self.is_zero() || other.is_zero() {
            return Ok(LineSymbol::zero(self.n));
        }
        let mut numer =
            vec![TangPoly::zero(self.n); self.numer.len() + other.numer.len() - 1];
        for (da, ca) in self.numer.iter().enumerate() {
            for (db, cb) in other.numer.iter().enumerate() {
                numer[da + db] = numer[da + db].add(&ca.mul(cb)?);
            }
        }
        Ok(LineSymbol::new(
            self.n,
            self.pole_plus + other.pole_plus,
            self.pole_minus + other.pole_minus,
            numer,
        ))
    }

    pub fn scale(&self, c: &ExactScalar) -> LineSymbol {
        LineSymbol::new(
            self.n,
            self.pole_plus,
            self.pole_minus,
            self.numer.iter().map(|t| t.scale(c)).collect(),
        )
    }

    pub fn scale_gaussian(&self, c: &GaussianRational) -> LineSymbol {
        LineSymbol::new(
            self.n,
            self.pole_plus,
            self.pole_minus,
            self.numer.iter().map(|t| t.scale_gaussian(c)).collect(),
        )
    }

    /// Clifford trace of every numerator coefficient.
    pub fn trace(&self) -> LineSymbol {
        LineSymbol::new(
            self.n,
            self.pole_plus,
            self.pole_minus,
            self.numer.iter().map(|t| t.trace()).collect(),
        )
    }

    /// `d/dξ_n` by the quotient rule on the factored denominator.
    pub fn xin_derivative(&self) -> LineSymbol {
        if self.is_zero() {
            return LineSymbol::zero(self.n);
        }
        let (a, b) = (self.pole_plus, self.pole_minus);
        let i = gauss_int(0, 1);
        let minus_i = gauss_int(0, -1);
        // N' (ξ-i)(ξ+i) - N [a(ξ+i) + b(ξ-i)]  over  (ξ-i)^{a+1}(ξ+i)^{b+1}
        let mut dn: Vec<TangPoly> = Vec::new();
        for (d, c) in self.numer.iter().enumerate().skip(1) {
            if dn.len() < d {
                dn.resize(d, TangPoly::zero(self.n));
            }
            dn[d - 1] = dn[d - 1].add(&c.scale(&ExactScalar::from_int(d as i64)));
        }
        let part1 = {
            let t = Self::numer_mul_linear(&dn, self.n, &i, 1);
            Self::numer_mul_linear(&t, self.n, &minus_i, 1)
        };
        // a(ξ+i) + b(ξ-i) = (a+b)ξ + (a-b)i
        let lin_c0 = gauss_int(0, a as i64 - b as i64);
        let lin_c1 = gauss_int(a as i64 + b as i64, 0);
        let mut part2 = vec![TangPoly::zero(self.n); self.numer.len() + 1];
        for (d, c) in self.numer.iter().enumerate() {
            part2[d] = part2[d].add(&c.scale_gaussian(&lin_c0));
            part2[d + 1] = part2[d + 1].add(&c.scale_gaussian(&lin_c1));
        }
        let len = part1.len().max(part2.len());
        let mut numer = vec![TangPoly::zero(self.n); len];
        for (d, c) in part1.into_iter().enumerate() {
            numer[d] = numer[d].add(&c);
        }
        for (d, c) in part2.into_iter().enumerate() {
            numer[d] = numer[d].sub_in_place(&c);
        }
        LineSymbol::new(self.n, a + 1, b + 1, numer)
    }

    /// Numeric evaluation of a scalar-coefficient line symbol at complex
    /// `ξ_n` with real tangential covariables.
    pub fn eval_scalar(
        &self,
        xin: C64,
        xi_t: &[f64],
        asg: &BTreeMap<Generator, C64>,
    ) -> Result<C64> {
        let mut num = C64::zero();
        let mut power = C64::new(1.0, 0.0);
        for coeff in &self.numer {
            let mut cval = C64::zero();
            for (m, c) in coeff.terms() {
                assert!(c.is_scalar(), "eval_scalar needs scalar coefficients");
                let mut v = c.scalar_part().eval(asg)?;
                for (idx, &e) in m.exponents().iter().enumerate() {
                    v *= C64::new(xi_t[idx], 0.0).powi(e as i32);
                }
                cval += v;
            }
            num += cval * power;
            power *= xin;
        }
        let i = C64::new(0.0, 1.0);
        let den = (xin - i).powi(self.pole_plus as i32) * (xin + i).powi(self.pole_minus as i32);
        Ok(num / den)
    }

    /// Numerator evaluated as a Gaussian-rational polynomial in `ξ_n` at a
    /// Gaussian point, per tangential monomial and Clifford word.
    pub fn numer_value_at(&self, c: &GaussianRational) -> TangPoly {
        self.numer_at(c)
    }
}

impl TangPoly {
    fn sub_in_place(&self, other: &TangPoly) -> TangPoly {
        self.add(&other.neg())
    }
}

impl fmt::Display for LineSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let body: Vec<String> = self
            .numer
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(d, c)| {
                if d == 0 {
                    format!("({c})")
                } else if d == 1 {
                    format!("({c})·ξ_n")
                } else {
                    format!("({c})·ξ_n^{d}")
                }
            })
            .collect();
        write!(f, "[{}]", body.join(" + "))?;
        if self.pole_plus > 0 || self.pole_minus > 0 {
            write!(
                f,
                " / ((ξ_n-i)^{}(ξ_n+i)^{})",
                self.pole_plus, self.pole_minus
            )?;
        }
        Ok(())
    }
}

/// Complex evaluation helper shared by tests.
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    const N: u8 = 4;

    fn scalar_sym(mono: XiMonomial, k: u32) -> FullSymbol {
        FullSymbol::from_term(mono, Jet::constant(CliffordElement::one(N)), k)
    }

    fn base_assignment() -> BTreeMap<Generator, C64> {
        let mut asg = BTreeMap::new();
        asg.insert(Generator::Pi, c64(std::f64::consts::PI, 0.0));
        asg.insert(Generator::HPrime, c64(0.6, 0.0));
        asg
    }

    #[test]
    fn xin_derivative_of_inverse_norm_restricts_to_reference_profile() {
        // ∂_{ξ_n}|ξ|^{-2} at |ξ'| = 1 is -2ξ_n/(ξ_n²+1)².
        let s = FullSymbol::inverse_norm_sq(N);
        let d = s.xi_derivative(N);
        let line = d.restrict();
        let expect = LineSymbol::new(
            N,
            2,
            2,
            vec![
                TangPoly::zero(N),
                TangPoly::scalar(N, ExactScalar::from_int(-2)),
            ],
        );
        assert_eq!(line.poles(), expect.poles());
        assert!(line.sub(&expect).is_zero());
    }

    #[test]
    fn tangential_quotient_rule() {
        // ∂_{ξ₁}(ξ₁ξ₂|ξ|^{-2}) = ξ₂|ξ|^{-2} - 2ξ₁²ξ₂·h·|ξ|^{-4}; checked
        // numerically at h'(0) = 0.6, x_n = 0 against central differences.
        let m = XiMonomial::unit(N).raised(1, 1).raised(2, 1);
        let s = scalar_sym(m, 1);
        let d = s.xi_derivative(1);
        let asg = base_assignment();
        let xi = [0.7, -0.4, 0.9, 0.3].map(|v| c64(v, 0.0));
        let eps = 1e-5;
        let mut xp = xi;
        xp[0] += eps;
        let mut xm = xi;
        xm[0] -= eps;
        let fd = (s.eval_scalar(&xp, 0.0, &asg).unwrap() - s.eval_scalar(&xm, 0.0, &asg).unwrap())
            / (2.0 * eps);
        let sym = d.eval_scalar(&xi, 0.0, &asg).unwrap();
        assert!((fd - sym).norm() < 1e-6, "fd {fd} vs sym {sym}");
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let s = FullSymbol::one(N);
        assert!(s.xi_derivative(N).is_zero());
        assert!(s.normal_derivative().unwrap().is_zero());
    }

    #[test]
    fn normal_derivative_of_inverse_norm_matches_reference() {
        // ∂_{x_n}|ξ|^{-2} at |ξ'| = 1 is -h'(0)/(1+ξ_n²)².
        let s = FullSymbol::inverse_norm_sq(N);
        let d = s.normal_derivative().unwrap();
        let line = d.restrict();
        // -h'(0)(ξ₁²+ξ₂²+ξ₃²) as the expanded numerator.
        let mut numer0 = TangPoly::zero(N);
        let hp = -&ExactScalar::generator(Generator::HPrime);
        for a in 1..N {
            let mut e = vec![0u32; 3];
            e[(a - 1) as usize] = 2;
            numer0.add_term(TangMono(e), CliffordElement::scalar(N, hp.clone()));
        }
        let expect = LineSymbol::new(N, 2, 2, vec![numer0]);
        assert!(line.sub(&expect).is_zero());
    }

    #[test]
    fn second_normal_derivative_is_rejected() {
        let s = FullSymbol::inverse_norm_sq(N);
        let d = s.normal_derivative().unwrap();
        assert!(matches!(d.normal_derivative(), Err(Error::JetExhausted(_))));
    }

    #[test]
    fn xi_derivatives_commute() {
        let m = XiMonomial::unit(N).raised(1, 2).raised(4, 1);
        let s = scalar_sym(m, 2);
        let d12 = s.xi_derivative(1).xi_derivative(2);
        let d21 = s.xi_derivative(2).xi_derivative(1);
        assert!(d12.eq_symbol(&d21));
    }

    #[test]
    fn euler_homogeneity_of_derivatives() {
        let m = XiMonomial::unit(N).raised(2, 1).raised(4, 1);
        let s = scalar_sym(m, 2); // order 2 - 4 = -2
        assert_eq!(s.homogeneity(), Some(-2));
        assert_eq!(s.xi_derivative(1).homogeneity(), Some(-3));
        assert_eq!(s.xi_derivative(N).homogeneity(), Some(-3));
    }

    #[test]
    fn leibniz_rule_on_products() {
        let a = scalar_sym(XiMonomial::unit(N).raised(1, 1), 1);
        let b = scalar_sym(XiMonomial::unit(N).raised(4, 2), 1);
        let prod = a.mul(&b).unwrap();
        for axis in [1u8, 4] {
            let lhs = prod.xi_derivative(axis);
            let rhs = a
                .xi_derivative(axis)
                .mul(&b)
                .unwrap()
                .add(&a.mul(&b.xi_derivative(axis)).unwrap())
                .unwrap();
            assert!(lhs.eq_symbol(&rhs), "axis {axis}");
        }
    }

    #[test]
    fn restrict_factors_the_denominator() {
        // |ξ|^{-2} restricts to 1/((ξ_n-i)(ξ_n+i)).
        let line = FullSymbol::inverse_norm_sq(N).restrict();
        assert_eq!(line.poles(), (1, 1));
        let expect = LineSymbol::new(N, 1, 1, vec![TangPoly::scalar(N, ExactScalar::one())]);
        assert!(line.sub(&expect).is_zero());
        // A polynomial symbol restricts with poles (0,0).
        let poly = scalar_sym(XiMonomial::unit(N).raised(4, 2), 0).restrict();
        assert_eq!(poly.poles(), (0, 0));
    }

    #[test]
    fn second_xin_derivative_of_inverse_norm_restricts_to_reference() {
        // ∂²_{ξ_n}|ξ|^{-2} at |ξ'| = 1 is (6ξ_n²-2)/(1+ξ_n²)³.
        let d2 = FullSymbol::inverse_norm_sq(N)
            .xi_derivative(N)
            .xi_derivative(N);
        let line = d2.restrict();
        let expect = LineSymbol::new(
            N,
            3,
            3,
            vec![
                TangPoly::scalar(N, ExactScalar::from_int(-2)),
                TangPoly::zero(N),
                TangPoly::scalar(N, ExactScalar::from_int(6)),
            ],
        );
        assert!(line.sub(&expect).is_zero());
    }

    #[test]
    fn compose_with_identity_preserves_symbols() {
        let mut b = GradedSymbol::new(N);
        b.insert(-2, FullSymbol::inverse_norm_sq(N));
        let id = GradedSymbol::identity(N);
        let c = id.compose(&b, -3).unwrap();
        assert!(c.component(-2).eq_symbol(&FullSymbol::inverse_norm_sq(N)));
        assert!(c.component(-3).is_zero());
        // const·id composed with b scales it at every order.
        let mut scaled_id = GradedSymbol::new(N);
        scaled_id.insert(0, FullSymbol::one(N).scale(&ExactScalar::from_int(3)));
        let c2 = scaled_id.compose(&b, -3).unwrap();
        assert!(c2
            .component(-2)
            .eq_symbol(&FullSymbol::inverse_norm_sq(N).scale(&ExactScalar::from_int(3))));
    }

    #[test]
    fn invert_scalar_laplacian_symbol() {
        // |ξ|² inverts to |ξ|^{-2}.
        let mut p = GradedSymbol::new(N);
        p.insert(2, FullSymbol::norm_sq(N));
        let q = p.invert(-2).unwrap();
        assert!(q.component(-2).eq_symbol(&FullSymbol::inverse_norm_sq(N)));
    }

    #[test]
    fn invert_identity() {
        let id = GradedSymbol::identity(N);
        let q = id.invert(0).unwrap();
        assert!(q.component(0).eq_symbol(&FullSymbol::one(N)));
    }

    #[test]
    fn invert_clifford_leading_symbol() {
        // p₁ = Σ c(e_i)ξ_i has p₁² = -|ξ|² at h ≡ 1... here with the collar
        // profile the frame carries √h, so build the flat version at k = 0
        // with explicit h-jets and check q_{-1} = -p₁·|ξ|^{-2}.
        let mut p1 = FullSymbol::zero(N);
        for iax in 1..=N {
            let cl = CliffordElement::generator(N, iax);
            let jet = if iax < N {
                // √h·c_i with (√h)(0) = 1, (√h)'(0) = h'/2
                Jet::with_slope(
                    cl.clone(),
                    cl.scale(&(&ExactScalar::generator(Generator::HPrime)
                        * &ExactScalar::from_ratio(1, 2))),
                )
            } else {
                Jet::constant(cl)
            };
            p1 = p1
                .add(&FullSymbol::from_term(XiMonomial::axis(N, iax), jet, 0))
                .unwrap();
        }
        let mut p = GradedSymbol::new(N);
        p.insert(1, p1.clone());
        let q = p.invert(-2).unwrap();
        let expect = p1.neg().with_added_denom(1);
        assert!(q.component(-1).eq_symbol(&expect));
        // Round trip: identity at order 0, zero at order -1.
        let round = p.compose(&q, -1).unwrap();
        assert!(round.component(0).eq_symbol(&FullSymbol::one(N)));
        assert!(round.component(-1).is_zero());
    }

    #[test]
    fn reduce_cancels_common_pole_factors() {
        // (ξ_n - i)/((ξ_n-i)(ξ_n+i)) reduces to 1/(ξ_n+i).
        let numer = vec![
            TangPoly::scalar(N, ExactScalar::from_gaussian(gauss_int(0, -1))),
            TangPoly::scalar(N, ExactScalar::one()),
        ];
        let s = LineSymbol::new(N, 1, 1, numer);
        assert_eq!(s.poles(), (0, 1));
    }

    #[test]
    fn eval_scalar_of_line_symbols_matches_closed_form() {
        let s = LineSymbol::new(N, 1, 1, vec![TangPoly::scalar(N, ExactScalar::one())]);
        let asg = base_assignment();
        let z = c64(0.3, 0.9);
        let v = s.eval_scalar(z, &[0.0, 0.0, 0.0], &asg).unwrap();
        let expect = 1.0 / (z * z + 1.0);
        assert!((v - expect).norm() < 1e-14);
    }

    #[test]
    fn xin_derivative_of_line_symbol() {
        // d/dξ_n [1/(1+ξ_n²)] = -2ξ_n/(1+ξ_n²)²
        let s = LineSymbol::new(N, 1, 1, vec![TangPoly::scalar(N, ExactScalar::one())]);
        let d = s.xin_derivative();
        let expect = LineSymbol::new(
            N,
            2,
            2,
            vec![
                TangPoly::zero(N),
                TangPoly::scalar(N, ExactScalar::from_int(-2)),
            ],
        );
        assert!(d.sub(&expect).is_zero());
    }

    #[test]
    fn rational_padding_respects_values() {
        let a = scalar_sym(XiMonomial::unit(N), 1);
        let b = a.with_denom_power(3);
        assert!(a.eq_symbol(&b));
        assert_eq!(b.denom_power(), 3);
        let asg = base_assignment();
        let xi = [0.5, 0.2, -0.3, 1.1].map(|v| c64(v, 0.0));
        // Exact at the boundary; away from it the padded numerator is only a
        // first-order jet, so agreement is to second order in x_n.
        let va = a.eval_scalar(&xi, 0.0, &asg).unwrap();
        let vb = b.eval_scalar(&xi, 0.0, &asg).unwrap();
        assert!((va - vb).norm() < 1e-15);
        let xn = 1e-5;
        let va = a.eval_scalar(&xi, xn, &asg).unwrap();
        let vb = b.eval_scalar(&xi, xn, &asg).unwrap();
        assert!((va - vb).norm() < 1e-9);
    }

    #[test]
    fn graded_insert_rejects_inhomogeneous_components() {
        let mut g = GradedSymbol::new(N);
        let bad = FullSymbol::from_terms(
            N,
            0,
            vec![
                (XiMonomial::unit(N), Jet::constant(CliffordElement::one(N))),
                (
                    XiMonomial::axis(N, 1),
                    Jet::constant(CliffordElement::one(N)),
                ),
            ],
        );
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            g.insert(0, bad);
        }));
        assert!(result.is_err());
    }

    #[test]
    fn norm_sq_symbol_squares_cleanly() {
        let p = FullSymbol::norm_sq(N);
        let sq = p.mul(&p).unwrap();
        let quartic = FullSymbol::one(N).mul_norm_sq(2);
        assert!(sq.eq_symbol(&quartic));
        assert_eq!(rat(1, 1), rat(1, 1));
    }
}
