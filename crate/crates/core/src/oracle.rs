//! Independent floating-point recomputation of the exact results: explicit
//! 4×4 gamma matrices, trapezoid contour quadrature, Gauss product quadrature
//! and Monte Carlo on the sphere, and Cauchy-circle numeric derivatives.
//!
//! Nothing below the scalar-evaluation boundary is shared with the exact
//! engine: collar data comes from finite differences of the metric, traces
//! from matrix products, plus-projections from Cauchy integrals, and every
//! integral from quadrature against raw complex arithmetic.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::{C64, Generator};
use crate::{Error, Result};

pub type Mat = [[C64; 4]; 4];

pub fn mat_zero() -> Mat {
    [[C64::new(0.0, 0.0); 4]; 4]
}

pub fn mat_identity() -> Mat {
    let mut m = mat_zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C64::new(1.0, 0.0);
    }
    m
}

pub fn mat_add(a: &Mat, b: &Mat) -> Mat {
    let mut out = mat_zero();
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[i][j] + b[i][j];
        }
    }
    out
}

pub fn mat_scale(a: &Mat, c: C64) -> Mat {
    let mut out = mat_zero();
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[i][j] * c;
        }
    }
    out
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let mut out = mat_zero();
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn mat_trace(a: &Mat) -> C64 {
    a[0][0] + a[1][1] + a[2][2] + a[3][3]
}

/// Explicit gamma matrices with `γ_i γ_j + γ_j γ_i = -2δ_ij·I`, built from
/// Pauli tensor products and verified at construction.
pub struct GammaRep {
    gammas: [Mat; 4],
}

impl GammaRep {
    pub fn standard() -> Self {
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let pauli1 = [[z, one], [one, z]];
        let pauli2 = [[z, -i], [i, z]];
        let pauli3 = [[one, z], [z, -one]];
        let id2 = [[one, z], [z, one]];

        fn kron(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> Mat {
            let mut m = mat_zero();
            for p in 0..2 {
                for q in 0..2 {
                    for r in 0..2 {
                        for s in 0..2 {
                            m[2 * p + r][2 * q + s] = a[p][q] * b[r][s];
                        }
                    }
                }
            }
            m
        }

        // Hermitian anticommuting squares-to-+1 set, then multiply by i so
        // every generator squares to -1.
        let herm = [
            kron(&pauli1, &id2),
            kron(&pauli2, &id2),
            kron(&pauli3, &pauli1),
            kron(&pauli3, &pauli2),
        ];
        let gammas = [
            mat_scale(&herm[0], i),
            mat_scale(&herm[1], i),
            mat_scale(&herm[2], i),
            mat_scale(&herm[3], i),
        ];
        let rep = GammaRep { gammas };
        rep.assert_relations();
        rep
    }

    fn assert_relations(&self) {
        for a in 1..=4u8 {
            for b in 1..=4u8 {
                let sum = mat_add(
                    &mat_mul(self.gamma(a), self.gamma(b)),
                    &mat_mul(self.gamma(b), self.gamma(a)),
                );
                let target = if a == b {
                    mat_scale(&mat_identity(), C64::new(-2.0, 0.0))
                } else {
                    mat_zero()
                };
                for i in 0..4 {
                    for j in 0..4 {
                        assert!(
                            (sum[i][j] - target[i][j]).norm() <= 1e-14,
                            "gamma relation residual too large at ({a},{b})"
                        );
                    }
                }
            }
        }
        assert_eq!(mat_trace(&mat_identity()), C64::new(4.0, 0.0));
    }

    /// 1-based generator.
    pub fn gamma(&self, i: u8) -> &Mat {
        &self.gammas[(i - 1) as usize]
    }

    pub fn identity(&self) -> Mat {
        mat_identity()
    }

    pub fn mul(&self, a: &Mat, b: &Mat) -> Mat {
        mat_mul(a, b)
    }

    pub fn trace(&self, a: &Mat) -> C64 {
        mat_trace(a)
    }

    /// Matrix of a Clifford element with numerically evaluated weights.
    pub fn element_matrix(
        &self,
        e: &crate::clifford::CliffordElement,
        asg: &BTreeMap<Generator, C64>,
    ) -> Result<Mat> {
        let mut out = mat_zero();
        for (w, c) in e.terms() {
            let mut m = mat_identity();
            for &i in w.indices() {
                m = mat_mul(&m, self.gamma(i));
            }
            out = mat_add(&out, &mat_scale(&m, c.eval(asg)?));
        }
        Ok(out)
    }
}

/// Trapezoid quadrature of `∮ f dz` on the circle `|z - i| = 1/2`, with a
/// node-doubling error estimate.
pub fn contour_quadrature(f: impl Fn(C64) -> C64, nodes: usize) -> Result<C64> {
    let coarse = contour_pass(&f, nodes);
    let fine = contour_pass(&f, 2 * nodes);
    let estimate = (coarse - fine).norm();
    if estimate > 1e-8 * (1.0 + fine.norm()) {
        return Err(Error::QuadratureDivergence { estimate });
    }
    Ok(fine)
}

pub const CONTOUR_RADIUS: f64 = 0.5;

fn contour_pass(f: &impl Fn(C64) -> C64, nodes: usize) -> C64 {
    let center = C64::new(0.0, 1.0);
    let mut acc = C64::new(0.0, 0.0);
    for t in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * t as f64 / nodes as f64;
        let dir = C64::new(0.0, 1.0) * C64::from_polar(CONTOUR_RADIUS, theta);
        let z = center + C64::from_polar(CONTOUR_RADIUS, theta);
        acc += f(z) * dir;
    }
    acc * C64::new(2.0 * std::f64::consts::PI / nodes as f64, 0.0)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // Chebyshev initial guess.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by recurrence.
            let mut p0 = 1.0f64;
            let mut p1 = x;
            for m in 2..=n {
                let pm = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = pm;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let mut p0 = 1.0f64;
        let mut p1 = x;
        for m in 2..=n {
            let pm = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
            p0 = p1;
            p1 = pm;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out
}

const SPHERE_POLAR_NODES: usize = 10;
const SPHERE_AZIMUTH_NODES: usize = 20;

/// Product Gauss quadrature of `∫_{S²} f dσ` (unnormalized measure):
/// Gauss-Legendre in the polar cosine (exact for polynomial integrands) and
/// the trapezoid rule in the azimuth.
pub fn sphere_quadrature(f: impl Fn(&[f64; 3]) -> f64) -> f64 {
    let mut acc = 0.0;
    for_each_sphere_node(|xi, w| acc += w * f(xi));
    acc
}

pub fn sphere_quadrature_complex(mut f: impl FnMut(&[f64; 3]) -> C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for_each_sphere_node(|xi, w| acc += f(xi) * w);
    acc
}

fn for_each_sphere_node(mut visit: impl FnMut(&[f64; 3], f64)) {
    let gl = gauss_legendre(SPHERE_POLAR_NODES);
    let dphi = 2.0 * std::f64::consts::PI / SPHERE_AZIMUTH_NODES as f64;
    for &(c, wc) in &gl {
        let s = (1.0 - c * c).sqrt();
        for t in 0..SPHERE_AZIMUTH_NODES {
            let phi = dphi * t as f64;
            let xi = [s * phi.cos(), s * phi.sin(), c];
            visit(&xi, wc * dphi);
        }
    }
}

/// Uniform Monte Carlo estimate of `∫_{S²} f dσ` with a fixed seed,
/// stratified over the area-preserving chart `(cos θ, φ)` so the error decays
/// faster than plain sampling.
pub fn sphere_monte_carlo(f: impl Fn(&[f64; 3]) -> f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = (samples as f64).sqrt().floor() as usize;
    let grid = grid.max(1);
    let mut acc = 0.0;
    let mut count = 0usize;
    for iu in 0..grid {
        for iv in 0..grid {
            let u = (iu as f64 + rng.gen_range(0.0..1.0)) / grid as f64;
            let v = (iv as f64 + rng.gen_range(0.0..1.0)) / grid as f64;
            let c = 1.0 - 2.0 * u;
            let s = (1.0 - c * c).max(0.0).sqrt();
            let phi = 2.0 * std::f64::consts::PI * v;
            acc += f(&[s * phi.cos(), s * phi.sin(), c]);
            count += 1;
        }
    }
    // Top up to the requested sample count with plain draws.
    while count < samples {
        let u: f64 = rng.gen_range(0.0..1.0);
        let v: f64 = rng.gen_range(0.0..1.0);
        let c = 1.0 - 2.0 * u;
        let s = (1.0 - c * c).max(0.0).sqrt();
        let phi = 2.0 * std::f64::consts::PI * v;
        acc += f(&[s * phi.cos(), s * phi.sin(), c]);
        count += 1;
    }
    acc / count as f64 * 4.0 * std::f64::consts::PI
}

/// Seeded numeric values for the formal generators; π gets its float value,
/// the geometric and field generators get reproducible pseudo-random reals
/// bounded away from zero.
#[derive(Clone, Debug)]
pub struct NumericAssignment {
    pub values: BTreeMap<Generator, C64>,
    pub seed: u64,
}

impl NumericAssignment {
    pub fn random(seed: u64, n: u8) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |lo: f64, hi: f64| -> f64 {
            let mag: f64 = rng.gen_range(lo..hi);
            if rng.gen_bool(0.5) {
                mag
            } else {
                -mag
            }
        };
        let mut values = BTreeMap::new();
        values.insert(Generator::Pi, C64::new(std::f64::consts::PI, 0.0));
        values.insert(Generator::HPrime, C64::new(draw(0.3, 1.1), 0.0));
        for j in 1..=n {
            values.insert(Generator::X(j), C64::new(draw(0.2, 1.0), 0.0));
            values.insert(Generator::Y(j), C64::new(draw(0.2, 1.0), 0.0));
            for l in 1..=n {
                values.insert(Generator::DY(j, l), C64::new(draw(0.2, 1.0), 0.0));
            }
        }
        values.insert(Generator::RicXY, C64::new(draw(0.2, 1.0), 0.0));
        values.insert(Generator::ScalarS, C64::new(draw(0.2, 1.0), 0.0));
        values.insert(Generator::GXY, C64::new(draw(0.2, 1.0), 0.0));
        values.insert(Generator::GXTYT, C64::new(draw(0.2, 1.0), 0.0));
        NumericAssignment { values, seed }
    }

    pub fn real(&self, g: Generator) -> f64 {
        self.values.get(&g).map(|v| v.re).unwrap_or(0.0)
    }
}

/// Numeric boundary-case evaluator: the same five trace integrals, computed
/// end to end in floating point with matrices and quadrature.
pub struct NumericBoundary {
    hp: f64,
    x: [f64; 4],
    y: [f64; 4],
    /// `u_l = Σ_j X_j ∂Y_l/∂x_j`.
    u: [f64; 4],
    a_mats: [Mat; 4],
    /// First-order coefficient matrices of the squared operator:
    /// `p₁ = i Σ_k ξ_k (Γ^k·I - 2A_k)`.
    p1_sq: [Mat; 4],
}

const XN_CAUCHY_NODES: usize = 24;
const XN_CAUCHY_RADIUS: f64 = 0.1;
const PP_NODES: usize = 64;
const PP_RADIUS: f64 = 0.2;
const PP_MAX_ORDER: usize = 6;
const XIN_DERIV_NODES: usize = 32;
const XIN_DERIV_RADIUS: f64 = 0.2;
const PHI_CONTOUR_NODES: usize = 192;

impl NumericBoundary {
    pub fn new(asg: &NumericAssignment) -> Self {
        let hp = asg.real(Generator::HPrime);
        let rep = GammaRep::standard();
        let mut x = [0.0; 4];
        let mut y = [0.0; 4];
        let mut u = [0.0; 4];
        for j in 1..=4u8 {
            x[(j - 1) as usize] = asg.real(Generator::X(j));
            y[(j - 1) as usize] = asg.real(Generator::Y(j));
        }
        for l in 1..=4u8 {
            let mut acc = 0.0;
            for j in 1..=4u8 {
                acc += asg.real(Generator::X(j)) * asg.real(Generator::DY(j, l));
            }
            u[(l - 1) as usize] = acc;
        }

        // Collar data by finite differences of the metric g = diag(1/h,1/h,1/h,1),
        // h(x_n) = 1 + h'(0)·x_n.
        let h = |v: f64| 1.0 + hp * v;
        let eps = 1e-5;
        let dg_lower = {
            // ∂_{x_n} g_jj(0) for j<4; tangential derivatives vanish.
            (1.0 / h(eps) - 1.0 / h(-eps)) / (2.0 * eps)
        };
        let dsqrt_h = (h(eps).sqrt() - h(-eps).sqrt()) / (2.0 * eps);

        // Christoffel symbols at the base point from the metric jets.
        let mut christoffel = [[[0.0f64; 4]; 4]; 4]; // [k][i][j]
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    // ½ g^{kk}(∂_i g_{jk} + ∂_j g_{ik} - ∂_k g_{ij}),
                    // with only normal derivatives of tangential entries.
                    let d = |a: usize, b: usize, c: usize| -> f64 {
                        // ∂_a g_{bc}(0)
                        if a == 3 && b == c && b < 3 {
                            dg_lower
                        } else {
                            0.0
                        }
                    };
                    christoffel[k][i][j] = 0.5 * (d(i, j, k) + d(j, i, k) - d(k, i, j));
                }
            }
        }
        let mut big_gamma = [0.0f64; 4];
        for k in 0..4 {
            for i in 0..4 {
                big_gamma[k] += christoffel[k][i][i];
            }
        }

        // Frame connection ω_{s,t}(e_i)(0) with e_j = √h ∂_j (j<4), e_4 = ∂_4.
        let mut omega = [[[0.0f64; 4]; 4]; 4]; // [i][s][t]
        for i in 0..4 {
            for s in 0..4 {
                for t in 0..4 {
                    let mut v = christoffel[t][i][s];
                    if s < 3 && i == 3 && s == t {
                        v += dsqrt_h;
                    }
                    omega[i][s][t] = v;
                }
            }
        }

        let mut a_mats = [mat_zero(); 4];
        for i in 0..4 {
            let mut acc = mat_zero();
            for s in 0..4 {
                for t in 0..4 {
                    if omega[i][s][t] == 0.0 {
                        continue;
                    }
                    let st = mat_mul(rep.gamma(s as u8 + 1), rep.gamma(t as u8 + 1));
                    acc = mat_add(&acc, &mat_scale(&st, C64::new(0.25 * omega[i][s][t], 0.0)));
                }
            }
            a_mats[i] = acc;
        }

        let mut p1_sq = [mat_zero(); 4];
        for k in 0..4 {
            let m = mat_add(
                &mat_scale(&mat_identity(), C64::new(big_gamma[k], 0.0)),
                &mat_scale(&a_mats[k], C64::new(-2.0, 0.0)),
            );
            p1_sq[k] = mat_scale(&m, C64::new(0.0, 1.0));
        }

        NumericBoundary {
            hp,
            x,
            y,
            u,
            a_mats,
            p1_sq,
        }
    }

    fn q2(&self, v: C64, w: C64, xi: &[f64; 3]) -> C64 {
        let tang: f64 = xi.iter().map(|t| t * t).sum();
        let h = C64::new(1.0, 0.0) + C64::new(self.hp, 0.0) * v;
        1.0 / (h * tang + w * w)
    }

    /// `∂_{x_n} q₂(0, w)` by a Cauchy circle in complex `x_n`.
    fn dq2_dxn(&self, w: C64, xi: &[f64; 3], radius: f64) -> C64 {
        cauchy_derivative(|v| self.q2(v, w, xi), radius, XN_CAUCHY_NODES)
    }

    fn xdot(&self, w: C64, xi: &[f64; 3]) -> C64 {
        C64::new(
            self.x[0] * xi[0] + self.x[1] * xi[1] + self.x[2] * xi[2],
            0.0,
        ) + C64::new(self.x[3], 0.0) * w
    }

    fn ydot(&self, w: C64, xi: &[f64; 3]) -> C64 {
        C64::new(
            self.y[0] * xi[0] + self.y[1] * xi[1] + self.y[2] * xi[2],
            0.0,
        ) + C64::new(self.y[3], 0.0) * w
    }

    /// `σ₀(∇∇D^{-2})(v, w) = -(X·ξ)(Y·ξ)·q₂·I`.
    fn sigma0(&self, v: C64, w: C64, xi: &[f64; 3]) -> Mat {
        let s = self.xdot(w, xi) * self.ydot(w, xi);
        mat_scale(&mat_identity(), -s * self.q2(v, w, xi))
    }

    /// `σ_{-3}(D^{-2})(0, w)` by the inversion recursion for the squared
    /// operator.
    fn q3(&self, w: C64, xi: &[f64; 3]) -> Mat {
        let q2 = self.q2(C64::new(0.0, 0.0), w, xi);
        let mut p1 = mat_zero();
        for k in 0..3 {
            p1 = mat_add(&p1, &mat_scale(&self.p1_sq[k], C64::new(xi[k], 0.0)));
        }
        p1 = mat_add(&p1, &mat_scale(&self.p1_sq[3], w));
        // -q₂·[p₁·q₂ + ∂_{ξ_n}p₂·(-i)∂_{x_n}q₂], ∂_{ξ_n}p₂ = 2ξ_n.
        let dxq2 = self.dq2_dxn(w, xi, XN_CAUCHY_RADIUS);
        let chain = C64::new(0.0, -1.0) * 2.0 * w * dxq2;
        let inner = mat_add(&mat_scale(&p1, q2), &mat_scale(&mat_identity(), chain));
        mat_scale(&inner, -q2)
    }

    /// `σ_{-1}(∇∇D^{-2})(0, w)`: first-order part times `q₂`, second-order
    /// part times `σ_{-3}`, and the normal composition correction.
    fn sigma_m1(&self, w: C64, xi: &[f64; 3]) -> Mat {
        let i = C64::new(0.0, 1.0);
        let q2 = self.q2(C64::new(0.0, 0.0), w, xi);
        let xw = self.xdot(w, xi);
        let yw = self.ydot(w, xi);

        let udot = C64::new(
            self.u[0] * xi[0] + self.u[1] * xi[1] + self.u[2] * xi[2],
            0.0,
        ) + C64::new(self.u[3], 0.0) * w;
        let mut ax = mat_zero();
        let mut ay = mat_zero();
        for j in 0..4 {
            ax = mat_add(&ax, &mat_scale(&self.a_mats[j], C64::new(self.x[j], 0.0)));
            ay = mat_add(&ay, &mat_scale(&self.a_mats[j], C64::new(self.y[j], 0.0)));
        }
        let mut p1 = mat_scale(&mat_identity(), udot);
        p1 = mat_add(&p1, &mat_scale(&ay, xw));
        p1 = mat_add(&p1, &mat_scale(&ax, yw));
        let p1 = mat_scale(&p1, i);

        let term1 = mat_scale(&p1, q2);
        let term2 = mat_scale(&self.q3(w, xi), -(xw * yw));
        // ∂_{ξ_n}p₂ = -(X_n(Y·ξ) + Y_n(X·ξ)); D_{x_n}q₂ = -i ∂_{x_n}q₂.
        let dp2 = -(C64::new(self.x[3], 0.0) * yw + C64::new(self.y[3], 0.0) * xw);
        let term3 = mat_scale(
            &mat_identity(),
            dp2 * C64::new(0.0, -1.0) * self.dq2_dxn(w, xi, XN_CAUCHY_RADIUS),
        );
        mat_add(&mat_add(&term1, &term2), &term3)
    }

    /// First factor of a case at `x_n = 0` before projection:
    /// `∂_{x_n}^j σ_r`.
    fn first_factor(&self, r: i32, j: u32, w: C64, xi: &[f64; 3], xn_radius: f64) -> Mat {
        match (r, j) {
            (0, 0) => self.sigma0(C64::new(0.0, 0.0), w, xi),
            (0, 1) => cauchy_derivative_mat(|v| self.sigma0(v, w, xi), xn_radius, XN_CAUCHY_NODES),
            (-1, 0) => self.sigma_m1(w, xi),
            _ => panic!("unsupported first-factor request (r={r}, j={j})"),
        }
    }

    /// Principal-part coefficients of the plus-projection of the first
    /// factor: `a_m = (1/2πi)∮ G(u)(u-i)^{m-1} du` on a small circle.
    fn pp_coefficients(&self, r: i32, j: u32, xi: &[f64; 3]) -> Vec<Mat> {
        let center = C64::new(0.0, 1.0);
        let mut coeffs = vec![mat_zero(); PP_MAX_ORDER];
        for t in 0..PP_NODES {
            let theta = 2.0 * std::f64::consts::PI * t as f64 / PP_NODES as f64;
            let offset = C64::from_polar(PP_RADIUS, theta);
            let u = center + offset;
            // With radius 0.2 around +i the x_n-Cauchy circle must shrink to
            // keep the collar pole of q₂ outside.
            let g = self.first_factor(r, j, u, xi, 0.5 * XN_CAUCHY_RADIUS);
            // dz/(2πi) = offset·dθ/(2π)
            let base = offset * C64::new(1.0 / PP_NODES as f64, 0.0);
            let mut pw = base;
            for c in coeffs.iter_mut() {
                *c = mat_add(c, &mat_scale(&g, pw));
                pw *= offset;
            }
        }
        coeffs
    }

    /// `∂_{ξ_n}^k π⁺σ_r` evaluated at `w` from the principal-part data.
    fn projected_factor(coeffs: &[Mat], k: u32, w: C64) -> Mat {
        let i = C64::new(0.0, 1.0);
        let mut acc = mat_zero();
        for (idx, a) in coeffs.iter().enumerate() {
            let m = (idx + 1) as i32;
            let mut factor = C64::new(1.0, 0.0);
            for t in 0..k {
                factor *= C64::new(-(m as f64) - t as f64, 0.0);
            }
            let pole = (w - i).powi(-(m + k as i32));
            acc = mat_add(&acc, &mat_scale(a, factor * pole));
        }
        acc
    }

    /// Second factor `∂_{ξ_n}^{j+1} ∂_{x_n}^k σ_l` at `w`.
    fn second_factor(&self, l: i32, j: u32, k: u32, w: C64, xi: &[f64; 3]) -> Mat {
        let base = |u: C64| -> Mat {
            match (l, k) {
                (-2, 0) => mat_scale(&mat_identity(), self.q2(C64::new(0.0, 0.0), u, xi)),
                (-2, 1) => mat_scale(&mat_identity(), self.dq2_dxn(u, xi, XN_CAUCHY_RADIUS)),
                (-3, 0) => self.q3(u, xi),
                _ => panic!("unsupported second-factor request (l={l}, k={k})"),
            }
        };
        let order = j + 1;
        cauchy_xin_derivative_mat(base, w, order, XIN_DERIV_RADIUS, XIN_DERIV_NODES)
    }

    /// One boundary case, fully numeric. `alpha_len > 0` contributes nothing:
    /// tangential base-point derivatives vanish in the collar model.
    pub fn phi_case(
        &self,
        r: i32,
        l: i32,
        k: u32,
        j: u32,
        alpha_len: u32,
        prefactor: C64,
    ) -> C64 {
        if alpha_len > 0 {
            return C64::new(0.0, 0.0);
        }
        let integral = sphere_quadrature_complex(|xi| {
            let coeffs = self.pp_coefficients(r, j, xi);
            let center = C64::new(0.0, 1.0);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..PHI_CONTOUR_NODES {
                let theta = 2.0 * std::f64::consts::PI * t as f64 / PHI_CONTOUR_NODES as f64;
                let offset = C64::from_polar(CONTOUR_RADIUS, theta);
                let w = center + offset;
                let g = Self::projected_factor(&coeffs, k, w);
                let h = self.second_factor(l, j, k, w, xi);
                let dw = C64::new(0.0, 1.0) * offset;
                acc += mat_trace(&mat_mul(&g, &h)) * dw;
            }
            acc * C64::new(2.0 * std::f64::consts::PI / PHI_CONTOUR_NODES as f64, 0.0)
        });
        prefactor * integral
    }
}

/// First derivative at 0 of an analytic scalar function by trapezoid on a
/// Cauchy circle.
fn cauchy_derivative(f: impl Fn(C64) -> C64, radius: f64, nodes: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for t in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * t as f64 / nodes as f64;
        let v = C64::from_polar(radius, theta);
        acc += f(v) / v;
    }
    acc / nodes as f64
}

fn cauchy_derivative_mat(f: impl Fn(C64) -> Mat, radius: f64, nodes: usize) -> Mat {
    let mut acc = mat_zero();
    for t in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * t as f64 / nodes as f64;
        let v = C64::from_polar(radius, theta);
        acc = mat_add(&acc, &mat_scale(&f(v), 1.0 / v));
    }
    mat_scale(&acc, C64::new(1.0 / nodes as f64, 0.0))
}

/// `order`-th `ξ_n`-derivative of a matrix-valued analytic function at `w`.
fn cauchy_xin_derivative_mat(
    f: impl Fn(C64) -> Mat,
    w: C64,
    order: u32,
    radius: f64,
    nodes: usize,
) -> Mat {
    if order == 0 {
        return f(w);
    }
    let mut fact = 1.0;
    for t in 1..=order {
        fact *= t as f64;
    }
    let mut acc = mat_zero();
    for t in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * t as f64 / nodes as f64;
        let offset = C64::from_polar(radius, theta);
        // f(w+offset)/offset^order
        acc = mat_add(&acc, &mat_scale(&f(w + offset), offset.powi(-(order as i32))));
    }
    mat_scale(&acc, C64::new(fact / nodes as f64, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_relations_hold() {
        let rep = GammaRep::standard();
        assert_eq!(rep.trace(&rep.identity()), C64::new(4.0, 0.0));
        let g11 = rep.mul(rep.gamma(1), rep.gamma(1));
        assert!((mat_trace(&g11) - C64::new(-4.0, 0.0)).norm() < 1e-14);
        let g12 = rep.mul(rep.gamma(1), rep.gamma(2));
        assert!(mat_trace(&g12).norm() < 1e-14);
    }

    #[test]
    fn contour_quadrature_reference_values() {
        let i = C64::new(0.0, 1.0);
        let two_pi_i = C64::new(0.0, 2.0 * std::f64::consts::PI);
        let v = contour_quadrature(|z| 1.0 / (z - i), 4096).unwrap();
        assert!((v - two_pi_i).norm() < 1e-10);

        let v = contour_quadrature(|z| 1.0 / (z + i), 4096).unwrap();
        assert!(v.norm() < 1e-10);

        let v = contour_quadrature(|z| (z - i).powi(-5) * (z + i).powi(-2), 4096).unwrap();
        let expect = C64::new(0.0, -5.0 * std::f64::consts::PI / 32.0);
        assert!((v - expect).norm() < 1e-10, "got {v}, want {expect}");
    }

    #[test]
    fn sphere_quadrature_reference_values() {
        let four_pi = 4.0 * std::f64::consts::PI;
        assert!((sphere_quadrature(|_| 1.0) - four_pi).abs() < 1e-10);
        assert!((sphere_quadrature(|x| x[0] * x[0]) - four_pi / 3.0).abs() < 1e-10);
        assert!(sphere_quadrature(|x| x[0] * x[1]).abs() < 1e-12);
    }

    #[test]
    fn cauchy_derivative_of_rational() {
        // d/dv [1/(1+v)] at 0 is -1.
        let d = cauchy_derivative(|v| 1.0 / (C64::new(1.0, 0.0) + v), 0.1, 24);
        assert!((d - C64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn assignments_are_deterministic() {
        let a = NumericAssignment::random(9, 4);
        let b = NumericAssignment::random(9, 4);
        assert_eq!(a.values, b.values);
        let c = NumericAssignment::random(10, 4);
        assert_ne!(a.values, c.values);
    }
}
