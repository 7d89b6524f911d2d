//! The analytic core of the boundary term: exact partial fractions at
//! `ξ_n = ±i`, the Cauchy plus-projection, `Γ⁺` contour integrals via the
//! residue derivative formula, and exact moments over the unit sphere in the
//! tangential covariables.
//!
//! Conventions: the plus-projection keeps exactly the principal part at the
//! upper half-plane pole `+i`; `Γ⁺` is the positively oriented contour
//! enclosing only `ξ_n = +i`, so `∫_{Γ⁺} = 2πi·Res_{+i}`. Residues are
//! evaluated with the derivative formula
//! `Res = (1/(m-1)!)·d^{m-1}/dξ_n^{m-1}[(ξ_n-i)^m f]|_{ξ_n=i}`,
//! which is stable under overestimating the pole order.

use crate::scalar::{factorial, gauss_int, rat, BigRational, ExactScalar, GaussianRational};
use crate::symbol::{LineSymbol, TangMono, TangPoly};
use crate::{Error, Result};

/// Exact splitting `f = PP_{+i} + PP_{-i} + polynomial`.
#[derive(Clone, Debug)]
pub struct PrincipalPartDecomposition {
    n: u8,
    /// Coefficient of `(ξ_n - i)^{-m}` at index `m-1`.
    pub at_plus_i: Vec<TangPoly>,
    /// Coefficient of `(ξ_n + i)^{-m}` at index `m-1`.
    pub at_minus_i: Vec<TangPoly>,
    /// Coefficient of `ξ_n^d` at index `d`.
    pub polynomial_part: Vec<TangPoly>,
}

impl PrincipalPartDecomposition {
    /// Rebuild the rational function; the decomposition invariant is that
    /// this equals the input exactly.
    pub fn reassemble(&self) -> LineSymbol {
        let mut acc = LineSymbol::zero(self.n);
        acc = acc.add(&principal_to_line(self.n, &self.at_plus_i, true));
        acc = acc.add(&principal_to_line(self.n, &self.at_minus_i, false));
        if !self.polynomial_part.is_empty() {
            acc = acc.add(&LineSymbol::new(
                self.n,
                0,
                0,
                self.polynomial_part.clone(),
            ));
        }
        acc
    }
}

/// `Σ_m c_m (ξ_n ∓ i)^{-m}` as a [`LineSymbol`] over the common denominator.
fn principal_to_line(n: u8, coeffs: &[TangPoly], at_plus: bool) -> LineSymbol {
    let order = coeffs.len() as u32;
    if order == 0 {
        return LineSymbol::zero(n);
    }
    let root = if at_plus {
        gauss_int(0, 1)
    } else {
        gauss_int(0, -1)
    };
    // numerator Σ_m c_m (ξ_n - root)^{order - m}
    let mut numer = vec![TangPoly::zero(n); order as usize];
    for (idx, c) in coeffs.iter().enumerate() {
        let m = (idx + 1) as u32;
        let shifted = poly_mul_linear_power(&[c.clone()], n, &root, order - m);
        for (d, t) in shifted.into_iter().enumerate() {
            if numer.len() <= d {
                numer.resize(d + 1, TangPoly::zero(n));
            }
            numer[d] = numer[d].add(&t);
        }
    }
    if at_plus {
        LineSymbol::new(n, order, 0, numer)
    } else {
        LineSymbol::new(n, 0, order, numer)
    }
}

/// Multiply a coefficient vector (poly in `ξ_n`) by `(ξ_n - root)^times`.
fn poly_mul_linear_power(
    poly: &[TangPoly],
    n: u8,
    root: &GaussianRational,
    times: u32,
) -> Vec<TangPoly> {
    let mut cur = poly.to_vec();
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

/// `t`-th derivative of the numerator polynomial evaluated at a Gaussian
/// point.
fn numer_derivative_at(f: &LineSymbol, t: u32, point: &GaussianRational) -> TangPoly {
    let n = f.dimension();
    let mut acc = TangPoly::zero(n);
    for (d, coeff) in f.numerator().iter().enumerate() {
        let d = d as u32;
        if d < t {
            continue;
        }
        // d!/(d-t)! · point^{d-t}
        let mut falling = rat(1, 1);
        for v in (d - t + 1)..=d {
            falling *= rat(v as i64, 1);
        }
        let mut p = GaussianRational::new(falling, rat(0, 1));
        for _ in 0..(d - t) {
            p = p * point.clone();
        }
        acc = acc.add(&coeff.scale_gaussian(&p));
    }
    acc
}

/// `u`-th derivative of `(ξ_n - root)^{-order}` at `point`:
/// `(-1)^u (order)_u (point - root)^{-(order+u)}`.
fn pole_derivative_at(
    order: u32,
    u: u32,
    point_minus_root: &GaussianRational,
) -> GaussianRational {
    if order == 0 {
        return if u == 0 {
            gauss_int(1, 0)
        } else {
            gauss_int(0, 0)
        };
    }
    let mut rising = rat(1, 1);
    for v in 0..u {
        rising *= rat((order + v) as i64, 1);
    }
    let sign = if u % 2 == 1 { rat(-1, 1) } else { rat(1, 1) };
    let mut denom = gauss_int(1, 0);
    for _ in 0..(order + u) {
        denom = denom * point_minus_root.clone();
    }
    GaussianRational::new(sign * rising, rat(0, 1)) / denom
}

/// `s`-th derivative of `g(ξ) := N(ξ)·(ξ ∓ i)^{-other_order}` at the pole,
/// by the Leibniz rule; shared by the principal-part and residue formulas.
fn regular_factor_derivative(
    f: &LineSymbol,
    s: u32,
    at_plus: bool,
) -> TangPoly {
    let n = f.dimension();
    let (point, other_root, other_order) = if at_plus {
        (gauss_int(0, 1), gauss_int(0, -1), f.poles().1)
    } else {
        (gauss_int(0, -1), gauss_int(0, 1), f.poles().0)
    };
    let gap = point - other_root; // ±2i
    let mut acc = TangPoly::zero(n);
    for t in 0..=s {
        let binom = binomial(s, t);
        let nt = numer_derivative_at(f, t, &if at_plus {
            gauss_int(0, 1)
        } else {
            gauss_int(0, -1)
        });
        let pd = pole_derivative_at(other_order, s - t, &gap);
        acc = acc.add(&nt.scale_gaussian(&(pd * GaussianRational::new(binom, rat(0, 1)))));
    }
    acc
}

fn binomial(s: u32, t: u32) -> BigRational {
    factorial(s) / (factorial(t) * factorial(s - t))
}

/// Exact partial fraction decomposition of a line symbol with poles only at
/// `±i`.
pub fn pf_decompose(f: &LineSymbol) -> PrincipalPartDecomposition {
    let n = f.dimension();
    let (a, b) = f.poles();

    // Principal coefficients from derivatives of the regular factor:
    // c_m = g^{(a-m)}(i)/(a-m)! with g = N·(ξ+i)^{-b}.
    let mut at_plus_i = Vec::with_capacity(a as usize);
    for m in 1..=a {
        let s = a - m;
        let g = regular_factor_derivative(f, s, true);
        at_plus_i.push(g.scale_gaussian(&GaussianRational::new(
            rat(1, 1) / factorial(s),
            rat(0, 1),
        )));
    }
    let mut at_minus_i = Vec::with_capacity(b as usize);
    for m in 1..=b {
        let s = b - m;
        let g = regular_factor_derivative(f, s, false);
        at_minus_i.push(g.scale_gaussian(&GaussianRational::new(
            rat(1, 1) / factorial(s),
            rat(0, 1),
        )));
    }

    // Polynomial part by long division against the monic denominator.
    let den = denominator_coeffs(a, b);
    let polynomial_part = poly_long_division(f.numerator(), &den, n);

    PrincipalPartDecomposition {
        n,
        at_plus_i,
        at_minus_i,
        polynomial_part,
    }
}

/// Coefficients of `(ξ-i)^a (ξ+i)^b` (monic, degree `a+b`).
fn denominator_coeffs(a: u32, b: u32) -> Vec<GaussianRational> {
    let mut coeffs = vec![gauss_int(1, 0)];
    for root in std::iter::repeat(gauss_int(0, 1))
        .take(a as usize)
        .chain(std::iter::repeat(gauss_int(0, -1)).take(b as usize))
    {
        let mut next = vec![gauss_int(0, 0); coeffs.len() + 1];
        for (d, c) in coeffs.iter().enumerate() {
            next[d + 1] = next[d + 1].clone() + c.clone();
            next[d] = next[d].clone() - root.clone() * c.clone();
        }
        coeffs = next;
    }
    coeffs
}

/// Quotient of the numerator by the monic denominator (the remainder is the
/// proper part and is dropped here; principal parts carry it).
fn poly_long_division(
    numer: &[TangPoly],
    den: &[GaussianRational],
    n: u8,
) -> Vec<TangPoly> {
    let dd = den.len() - 1; // degree of denominator
    if numer.len() <= dd || dd == 0 && numer.is_empty() {
        return Vec::new();
    }
    if dd == 0 {
        return numer.to_vec();
    }
    let mut rem: Vec<TangPoly> = numer.to_vec();
    let mut quot = vec![TangPoly::zero(n); numer.len() - dd];
    for d in (dd..numer.len()).rev() {
        let lead = rem[d].clone();
        if lead.is_zero() {
            continue;
        }
        let qd = d - dd;
        quot[qd] = lead.clone();
        for (k, c) in den.iter().enumerate() {
            let sub = lead.scale_gaussian(c);
            rem[qd + k] = rem[qd + k].add(&sub.neg());
        }
    }
    while quot.last().map_or(false, |c| c.is_zero()) {
        quot.pop();
    }
    quot
}

/// The Cauchy plus-projection: exactly the principal part at `ξ_n = +i`;
/// the polynomial part and the `-i` principal part are dropped. Idempotent.
pub fn pi_plus(f: &LineSymbol) -> LineSymbol {
    let d = pf_decompose(f);
    principal_to_line(f.dimension(), &d.at_plus_i, true)
}

/// Residue at `+i` computed with the derivative formula for an assumed pole
/// order `m ≥` the true order; any overestimate yields the same value.
pub fn residue_at_plus_with_order(f: &LineSymbol, m: u32) -> TangPoly {
    let n = f.dimension();
    let (a, _) = f.poles();
    assert!(m >= a, "assumed pole order below the actual order");
    if m == 0 {
        return TangPoly::zero(n);
    }
    // (ξ-i)^m f = [N·(ξ-i)^{m-a}]·(ξ+i)^{-b}
    let padded = pad_numer_at_plus(f, m - a);
    let g = regular_factor_derivative(&padded, m - 1, true);
    g.scale_gaussian(&GaussianRational::new(
        rat(1, 1) / factorial(m - 1),
        rat(0, 1),
    ))
}

/// Same rational function with the numerator multiplied by `(ξ-i)^extra` and
/// the `+i` pole order raised accordingly (bypasses canonical reduction).
fn pad_numer_at_plus(f: &LineSymbol, extra: u32) -> LineSymbol {
    if extra == 0 {
        return f.clone();
    }
    let n = f.dimension();
    let numer = poly_mul_linear_power(f.numerator(), n, &gauss_int(0, 1), extra);
    let (a, b) = f.poles();
    LineSymbol::new_unreduced(n, a + extra, b, numer)
}

/// `∫_{Γ⁺} f dξ_n = 2πi·Res_{+i} f`, exact in the coefficient ring.
///
/// Requires decay at infinity (numerator degree strictly below the total
/// pole order), which is what lets the boundary pipeline trade the real-line
/// integral for the contour.
pub fn contour_gamma_plus(f: &LineSymbol) -> Result<TangPoly> {
    let n = f.dimension();
    if f.is_zero() {
        return Ok(TangPoly::zero(n));
    }
    let (a, b) = f.poles();
    let degree = f.numer_degree().unwrap_or(0);
    if degree >= (a + b) as usize {
        return Err(Error::NonDecaying {
            degree,
            poles: (a + b) as usize,
        });
    }
    let res = residue_at_plus_with_order(f, a);
    // 2πi
    let factor = ExactScalar::pi()
        .scale(&gauss_int(0, 2));
    Ok(res.scale(&factor))
}

/// Exact moment `∫_{S^{m-1}} ξ^{2b} dσ(ξ)` of a monomial over the unit
/// sphere of `ℝ^m` with the unnormalized induced volume:
/// zero for any odd exponent, else
/// `Vol(S^{m-1})·Π(2bᵢ-1)!! / [m(m+2)⋯(m+2B-2)]` with `B = Σbᵢ`.
pub fn sphere_moment(mono: &TangMono, m: usize) -> Result<ExactScalar> {
    if m < 2 {
        return Err(Error::BadDimension(m));
    }
    if mono.exponents().len() != m {
        return Err(Error::BadDimension(mono.exponents().len()));
    }
    if mono.exponents().iter().any(|&e| e % 2 == 1) {
        return Ok(ExactScalar::zero());
    }
    let b: Vec<u32> = mono.exponents().iter().map(|&e| e / 2).collect();
    let big_b: u32 = b.iter().sum();
    let mut num = rat(1, 1);
    for &bi in &b {
        num *= double_factorial_odd(bi);
    }
    let mut den = rat(1, 1);
    for t in 0..big_b {
        den *= rat((m as u32 + 2 * t) as i64, 1);
    }
    Ok(sphere_volume(m).scale_rat(&(num / den)))
}

/// `(2b-1)!! = 1·3·5⋯(2b-1)`, with the empty product for `b = 0`.
fn double_factorial_odd(b: u32) -> BigRational {
    let mut acc = rat(1, 1);
    for t in 1..=b {
        acc *= rat((2 * t - 1) as i64, 1);
    }
    acc
}

/// `Vol(S^{m-1})` as an exact polynomial in π.
pub fn sphere_volume(m: usize) -> ExactScalar {
    // 2 π^{m/2} / Γ(m/2)
    if m % 2 == 0 {
        let half = (m / 2) as u32;
        ExactScalar::pi()
            .pow(half)
            .scale_rat(&(rat(2, 1) / factorial(half - 1)))
    } else {
        // Γ(m/2) = √π (m-2)!!/2^{(m-1)/2}
        let half = ((m - 1) / 2) as u32;
        let mut dfact = rat(1, 1);
        let mut v = m as i64 - 2;
        while v >= 1 {
            dfact *= rat(v, 1);
            v -= 2;
        }
        let two_pow = rat(2i64.pow(half + 1), 1);
        ExactScalar::pi().pow(half).scale_rat(&(two_pow / dfact))
    }
}

/// Integrate a scalar tangential polynomial over the unit sphere in the
/// tangential covariables, exactly.
pub fn sphere_integrate(p: &TangPoly, m: usize) -> Result<ExactScalar> {
    let mut acc = ExactScalar::zero();
    for (mono, c) in p.terms() {
        assert!(c.is_scalar(), "sphere integration expects traced coefficients");
        let moment = sphere_moment(mono, m)?;
        acc = &acc + &(&c.scalar_part() * &moment);
    }
    Ok(acc)
}
