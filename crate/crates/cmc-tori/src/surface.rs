//! Equivariant frames, immersions into S³, period lattices, meshes and
//! profile curves.
//!
//! Matrices act on ℂ² with `e0 = diag(i, -i)`, `e1 = [[0, 1], [-1, 0]]` and
//! `e2 = [[0, i], [i, 0]]`, so `i = exp(π/2 e0)`, `j = exp(π/2 e1)` and
//! `k = exp(π/2 e2)`. The quaternion `a + b j` is the matrix
//! `[[a, b], [-b̄, ā]]` and the point `(Re a, Im a, Re b, Im b)` of ℝ⁴.
//!
//! `χ0` is the integral `2iν ∫ (J1 - J2)`, which makes `χ0(2K') = -2πω` for
//! the branch of ω in [`crate::spectral`]. Periods are therefore written
//! `γ = xπ - 2ipK'`, with monodromy `exp(π(xν + pω) e0)`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::{dn_and_derivative, elliptic_ke_comp, quad};
use crate::error::{Error, Result};
use crate::flow::FlowState;
use crate::genus0::Triple;
use crate::spectral::{closing_residual_from, gcd, mean_curvature, nu_circle, nu_omega, SymPoints};

const CHI0_TOL: f64 = 1e-13;
/// Largest accepted closure defect of a mesh.
pub const CLOSURE_TOL: f64 = 1e-6;

// ---------------------------------------------------------------------------
// 2×2 complex matrices

/// A 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        Mat2::diag(C::new(1.0, 0.0), C::new(1.0, 0.0))
    }

    pub fn diag(a: C, d: C) -> Self {
        let z = C::new(0.0, 0.0);
        Mat2([[a, z], [z, d]])
    }

    pub fn e0() -> Self {
        Mat2::diag(C::i(), -C::i())
    }

    pub fn e1() -> Self {
        let (o, z) = (C::new(1.0, 0.0), C::new(0.0, 0.0));
        Mat2([[z, o], [-o, z]])
    }

    pub fn e2() -> Self {
        let z = C::new(0.0, 0.0);
        Mat2([[z, C::i()], [C::i(), z]])
    }

    /// `ε1 = [[0, 1], [0, 0]]`.
    pub fn eps1() -> Self {
        let z = C::new(0.0, 0.0);
        Mat2([[z, C::new(1.0, 0.0)], [z, z]])
    }

    /// `ε2 = [[0, 0], [-1, 0]]`.
    pub fn eps2() -> Self {
        let z = C::new(0.0, 0.0);
        Mat2([[z, z], [C::new(-1.0, 0.0), z]])
    }

    pub fn exp_e0(phi: f64) -> Self {
        Mat2::diag(C::from_polar(1.0, phi), C::from_polar(1.0, -phi))
    }

    pub fn exp_e1(phi: f64) -> Self {
        let (c, s) = (C::new(phi.cos(), 0.0), C::new(phi.sin(), 0.0));
        Mat2([[c, s], [-s, c]])
    }

    pub fn exp_e2(phi: f64) -> Self {
        let (c, s) = (C::new(phi.cos(), 0.0), C::new(0.0, phi.sin()));
        Mat2([[c, s], [s, c]])
    }

    pub fn det(&self) -> C {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if d.norm() < 1e-300 {
            return Err(Error::Numerical("singular matrix".into()));
        }
        let m = &self.0;
        Ok(Mat2([
            [m[1][1] / d, -m[0][1] / d],
            [-m[1][0] / d, m[0][0] / d],
        ]))
    }

    /// Conjugate transpose, the inverse on SU(2).
    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn scale(&self, c: C) -> Self {
        Mat2(self.0.map(|r| r.map(|v| v * c)))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// `(Re a, Im a, Re b, Im b)` for `[[a, b], ..]`.
    pub fn to_r4(&self) -> [f64; 4] {
        let (a, b) = (self.0[0][0], self.0[0][1]);
        [a.re, a.im, b.re, b.im]
    }

    pub fn from_r4(p: [f64; 4]) -> Self {
        let a = C::new(p[0], p[1]);
        let b = C::new(p[2], p[3]);
        Mat2([[a, b], [-b.conj(), a.conj()]])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2(std::array::from_fn(|i| {
            std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j])
        }))
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] + o.0[i][j])
        }))
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] - o.0[i][j])
        }))
    }
}

// ---------------------------------------------------------------------------
// frame

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Domain(format!("frames need q in (0, 1], got {q}")));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!(
            "sym point angle {theta} outside (0, π)"
        )));
    }
    Ok(())
}

/// The angle `χ0(y)` at one sym point, with its value over one period of
/// `v` cached.
#[derive(Clone, Copy, Debug)]
pub struct Chi0 {
    q: f64,
    theta: f64,
    nu: f64,
    kp: f64,
    period: f64,
}

impl Chi0 {
    pub fn new(theta: f64, q: f64) -> Result<Self> {
        check_q(q)?;
        check_theta(theta)?;
        let kp = elliptic_ke_comp(q)?.kk;
        let mut c = Chi0 {
            q,
            theta,
            nu: nu_circle(theta, q),
            kp,
            period: 0.0,
        };
        c.period = if q == 1.0 {
            -2.0 * PI * theta.cos()
        } else {
            2.0 * c.raw(kp)?
        };
        Ok(c)
    }

    /// With `w = v - q/v` and `ε = 2√q sin θ` the density
    /// `-4νq sin 2θ / |X1|²` is `-4ν√q cos θ ε / (w² + ε²)`, which for small
    /// `θ` is a spike at `v = √q`. There `w' = -2√q(1 - q)` on `(0, K')`, so
    /// `κ arctan(w/ε)` with `κ = 2ν cos θ/(1 - q)` carries the spike and the
    /// rest is bounded uniformly in `θ`.
    fn kappa_eps(&self) -> (f64, f64) {
        let kappa = 2.0 * self.nu * self.theta.cos() / (1.0 - self.q);
        (kappa, 2.0 * self.q.sqrt() * self.theta.sin())
    }

    fn w(&self, t: f64) -> (f64, f64) {
        let (v, vp) = dn_and_derivative(t, self.q).expect("q checked");
        (v - self.q / v, vp * (1.0 + self.q / (v * v)))
    }

    /// `∫_0^y` for `|y| ≤ K'`; the density is even, so this is odd in `y`.
    fn raw(&self, y: f64) -> Result<f64> {
        let (kappa, eps) = self.kappa_eps();
        let ws = -2.0 * self.q.sqrt() * (1.0 - self.q);
        let rest = |t: f64| {
            let (w, wp) = self.w(t);
            kappa * eps * (ws - wp) / (w * w + eps * eps)
        };
        let a = y.abs();
        let sing = kappa * ((self.w(a).0 / eps).atan() - (self.w(0.0).0 / eps).atan());
        Ok(y.signum() * (sing + quad(rest, 0.0, a, CHI0_TOL)?))
    }

    /// `χ0(y)`, using `χ0(y + 2nK') = χ0(y) + n χ0(2K')`.
    pub fn eval(&self, y: f64) -> Result<f64> {
        if self.q == 1.0 {
            return Ok(-2.0 * y * self.theta.cos());
        }
        let n = (y / (2.0 * self.kp)).round();
        let r = y - 2.0 * n * self.kp;
        Ok(n * self.period + self.raw(r)?)
    }

    /// `χ0(2K')`.
    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn kp(&self) -> f64 {
        self.kp
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// The ingredients of the frame at one sym point and one `y`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FrameSample {
    pub y: f64,
    pub v: f64,
    /// `v'(y)`.
    pub vp: f64,
    pub nu: f64,
    pub chi0: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub x1c: C,
    pub x2c: C,
    pub j1: C,
    pub j2: C,
    lambda: C,
}

impl FrameSample {
    /// Builds the sample from a known `χ0(y)`.
    ///
    /// `sin χ1 = -|X1|/(2ν) < 0` and `χ2 = arg X1`. Since `Im X1 = v sin 2θ`
    /// keeps its sign, both angles are continuous in `y` without tracking.
    pub fn with_chi0(y: f64, theta: f64, q: f64, chi0: f64) -> Result<Self> {
        check_q(q)?;
        check_theta(theta)?;
        let (v, vp) = dn_and_derivative(y, q)?;
        let nu = nu_circle(theta, q);
        let lambda = C::from_polar(1.0, 2.0 * theta);
        let x1c = lambda * v - q / v;
        let x2c = v / lambda - q / v;
        let chi1 = (-x1c.norm() / (2.0 * nu)).atan2(-vp / (2.0 * nu * v));
        Ok(FrameSample {
            y,
            v,
            vp,
            nu,
            chi0,
            chi1,
            chi2: x1c.arg(),
            x1c,
            x2c,
            j1: -q / (v * x1c),
            j2: -q / (v * x2c),
            lambda,
        })
    }

    /// `P(y) = exp(½χ0 e0) exp(½χ1 e1) exp(½χ2 e0)`.
    pub fn p_matrix(&self) -> Mat2 {
        Mat2::exp_e0(0.5 * self.chi0)
            * Mat2::exp_e1(0.5 * self.chi1)
            * Mat2::exp_e0(0.5 * self.chi2)
    }

    /// `F(x, y) = exp(xν e0) P(y)`.
    pub fn frame(&self, x: f64) -> Mat2 {
        Mat2::exp_e0(x * self.nu) * self.p_matrix()
    }

    /// `Ω_x` with `2iΩ_x = -i(v'/v) e0 + X2 ε1 - X1 ε2`.
    pub fn omega_x(&self) -> Mat2 {
        let m = Mat2::e0().scale(C::new(0.0, -self.vp / self.v)) + Mat2::eps1().scale(self.x2c)
            - Mat2::eps2().scale(self.x1c);
        m.scale(C::new(0.0, -0.5))
    }

    /// `Ω_y = ½((v/λ + q/v) ε1 + (λv + q/v) ε2)`.
    pub fn omega_y(&self, q: f64) -> Mat2 {
        let a = self.v / self.lambda + q / self.v;
        let b = self.lambda * self.v + q / self.v;
        (Mat2::eps1().scale(a) + Mat2::eps2().scale(b)).scale(C::new(0.5, 0.0))
    }
}

/// Frame angles at `λ = e^{2iθ}` and height `y`.
///
/// ```
/// use cmc_tori::surface::frame_angles;
/// let s = frame_angles(0.3, 0.6, 0.8).unwrap();
/// // cos χ1 = -v'/(2νv)
/// assert!((s.chi1.cos() + s.vp / (2.0 * s.nu * s.v)).abs() < 1e-12);
/// ```
pub fn frame_angles(y: f64, theta: f64, q: f64) -> Result<FrameSample> {
    let c = Chi0::new(theta, q)?;
    FrameSample::with_chi0(y, theta, q, c.eval(y)?)
}

/// The immersion `f = F_{λ1} F_{λ2}^{-1}` of one equivariant surface.
#[derive(Clone, Copy, Debug)]
pub struct Surface {
    q: f64,
    sp: SymPoints,
    chi: [Chi0; 2],
}

impl Surface {
    pub fn new(q: f64, sp: SymPoints) -> Result<Self> {
        if sp.theta1 == sp.theta2 {
            return Err(Error::Domain("sym points coincide".into()));
        }
        Ok(Surface {
            q,
            sp,
            chi: [Chi0::new(sp.theta1, q)?, Chi0::new(sp.theta2, q)?],
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn sym_points(&self) -> SymPoints {
        self.sp
    }

    pub fn chi0(&self, k: usize) -> &Chi0 {
        &self.chi[k]
    }

    /// Frame samples at both sym points.
    pub fn samples(&self, y: f64) -> Result<[FrameSample; 2]> {
        let s1 = FrameSample::with_chi0(y, self.sp.theta1, self.q, self.chi[0].eval(y)?)?;
        let s2 = FrameSample::with_chi0(y, self.sp.theta2, self.q, self.chi[1].eval(y)?)?;
        Ok([s1, s2])
    }

    /// Frame at sym point `k ∈ {0, 1}`.
    pub fn frame(&self, k: usize, x: f64, y: f64) -> Result<Mat2> {
        let th = [self.sp.theta1, self.sp.theta2][k];
        Ok(FrameSample::with_chi0(y, th, self.q, self.chi[k].eval(y)?)?.frame(x))
    }

    /// `f(x, y)` from the quaternion product formula.
    pub fn point(&self, x: f64, y: f64) -> Result<[f64; 4]> {
        let [s1, s2] = self.samples(y)?;
        Ok(immersion_from_samples(x, &s1, &s2))
    }

    /// `f(x, y)` as the matrix product `F1 F2^{-1}`.
    pub fn point_matrix(&self, x: f64, y: f64) -> Result<[f64; 4]> {
        let [s1, s2] = self.samples(y)?;
        Ok((s1.frame(x) * s2.frame(x).adjoint()).to_r4())
    }
}

/// The closed quaternion form of `F1 F2^{-1}` with
/// `α = e^{ixν}`, `β = e^{iχ0/2}`, `γ = e^{iχ2/2}`, `c = cos ½χ1`, `s = sin ½χ1`.
pub fn immersion_from_samples(x: f64, s1: &FrameSample, s2: &FrameSample) -> [f64; 4] {
    let e = |t: f64| C::from_polar(1.0, t);
    let (a1, a2) = (e(x * s1.nu), e(x * s2.nu));
    let (b1, b2) = (e(0.5 * s1.chi0), e(0.5 * s2.chi0));
    let g = e(0.5 * (s1.chi2 - s2.chi2));
    let (c1, c2) = ((0.5 * s1.chi1).cos(), (0.5 * s2.chi1).cos());
    let (n1, n2) = ((0.5 * s1.chi1).sin(), (0.5 * s2.chi1).sin());
    let f1 = a1 / a2 * b1 / b2 * (g * c1 * c2 + g.conj() * n1 * n2);
    let f2 = a1 * a2 * b1 * b2 * (g.conj() * n1 * c2 - g * c1 * n2);
    [f1.re, f1.im, f2.re, f2.im]
}

/// `f(x, y)` on S³ ⊂ ℝ⁴ for sym points `sp` at modulus `q`.
///
/// ```
/// use cmc_tori::spectral::SymPoints;
/// use cmc_tori::surface::immersion;
/// let p = immersion(0.4, 1.1, 0.7, &SymPoints::new(0.5, 2.2)).unwrap();
/// assert!((p.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14);
/// ```
pub fn immersion(x: f64, y: f64, q: f64, sp: &SymPoints) -> Result<[f64; 4]> {
    Surface::new(q, *sp)?.point(x, y)
}

// ---------------------------------------------------------------------------
// fundamental forms and residuals

/// Closed forms of the first and second fundamental forms.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FundamentalFormSample {
    /// `(1 - h²) v²`.
    pub conformal_factor: f64,
    /// `(i/4) q (λ2⁻¹ - λ1⁻¹)`.
    pub hopf_q: C,
    /// `cot(θ2 - θ1)`, which is `h/sqrt(1 - h²)` when `θ1 < θ2`. Exchanging
    /// the sym points replaces `f` by `f⁻¹` and reverses the orientation.
    pub mean_h: f64,
}

pub fn fundamental_forms(y: f64, q: f64, sp: &SymPoints) -> Result<FundamentalFormSample> {
    check_q(q)?;
    let (v, _) = dn_and_derivative(y, q)?;
    let h = (sp.theta1 - sp.theta2).cos();
    let sign = if sp.theta2 > sp.theta1 { 1.0 } else { -1.0 };
    Ok(FundamentalFormSample {
        conformal_factor: (1.0 - h * h) * v * v,
        hopf_q: C::new(0.0, 0.25) * q * (1.0 / sp.lambda2() - 1.0 / sp.lambda1()),
        mean_h: sign * mean_curvature(h)?,
    })
}

/// Largest deviations found by [`fundamental_form_residuals`].
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct FormResiduals {
    /// `max(|E - G|, |F|) / E`.
    pub conformality: f64,
    /// `|E - (1 - h²)v²| / E`.
    pub metric: f64,
    pub mean_curvature: f64,
    pub hopf: f64,
    pub unit_norm: f64,
}

fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lin4(a: f64, x: &[f64; 4], b: f64, y: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|i| a * x[i] + b * y[i])
}

fn det4(m: [[f64; 4]; 4]) -> f64 {
    let mut a = m;
    let mut det = 1.0;
    for c in 0..4 {
        let p = (c..4)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..4 {
            let f = a[r][c] / a[c][c];
            for k in c..4 {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

/// Unit normal to `f` in `T_f S³`, oriented so that `det(f, f_x, f_y, N) > 0`.
fn normal(p: &[f64; 4], fx: &[f64; 4], fy: &[f64; 4]) -> [f64; 4] {
    let mut basis: Vec<[f64; 4]> = Vec::new();
    for v in [p, fx, fy] {
        let mut w = *v;
        for b in &basis {
            w = lin4(1.0, &w, -dot4(&w, b), b);
        }
        let n = dot4(&w, &w).sqrt();
        basis.push(w.map(|x| x / n));
    }
    let mut best = [0.0; 4];
    for e in 0..4 {
        let mut w = [0.0; 4];
        w[e] = 1.0;
        for b in &basis {
            w = lin4(1.0, &w, -dot4(&w, b), b);
        }
        if dot4(&w, &w) > dot4(&best, &best) {
            best = w;
        }
    }
    let n = dot4(&best, &best).sqrt();
    let nn = best.map(|x| x / n);
    if det4([*p, *fx, *fy, nn]) < 0.0 {
        nn.map(|x| -x)
    } else {
        nn
    }
}

/// Finite-difference fundamental forms at `n × n` points of the domain
/// spanned by `g1, g2`, compared with [`fundamental_forms`].
pub fn fundamental_form_residuals(surf: &Surface, g1: C, g2: C, n: usize) -> Result<FormResiduals> {
    let pts: Vec<C> = (0..n * n)
        .map(|k| {
            let (i, j) = (k % n, k / n);
            g1 * ((i as f64 + 0.37) / n as f64) + g2 * ((j as f64 + 0.21) / n as f64)
        })
        .collect();
    let rs: Vec<FormResiduals> = pts
        .par_iter()
        .map(|z| form_residual_at(surf, z.re, z.im))
        .collect::<Result<_>>()?;
    Ok(rs
        .iter()
        .fold(FormResiduals::default(), |a, r| FormResiduals {
            conformality: a.conformality.max(r.conformality),
            metric: a.metric.max(r.metric),
            mean_curvature: a.mean_curvature.max(r.mean_curvature),
            hopf: a.hopf.max(r.hopf),
            unit_norm: a.unit_norm.max(r.unit_norm),
        }))
}

fn form_residual_at(surf: &Surface, x: f64, y: f64) -> Result<FormResiduals> {
    let (h1, h2) = (1e-4, 1e-3);
    let f = |dx: f64, dy: f64| surf.point(x + dx, y + dy);
    let p = f(0.0, 0.0)?;
    let fx = lin4(0.5 / h1, &f(h1, 0.0)?, -0.5 / h1, &f(-h1, 0.0)?);
    let fy = lin4(0.5 / h1, &f(0.0, h1)?, -0.5 / h1, &f(0.0, -h1)?);
    let second = |a: [f64; 4], b: [f64; 4]| -> [f64; 4] {
        std::array::from_fn(|i| (a[i] - 2.0 * p[i] + b[i]) / (h2 * h2))
    };
    let fxx = second(f(h2, 0.0)?, f(-h2, 0.0)?);
    let fyy = second(f(0.0, h2)?, f(0.0, -h2)?);
    let (pp, pm, mp, mm) = (f(h2, h2)?, f(h2, -h2)?, f(-h2, h2)?, f(-h2, -h2)?);
    let fxy: [f64; 4] = std::array::from_fn(|i| (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h2 * h2));
    let (e, ff, g) = (dot4(&fx, &fx), dot4(&fx, &fy), dot4(&fy, &fy));
    let nrm = normal(&p, &fx, &fy);
    let (l, m, nn) = (dot4(&fxx, &nrm), dot4(&fxy, &nrm), dot4(&fyy, &nrm));
    let closed = fundamental_forms(y, surf.q, &surf.sp)?;
    let h_fd = (l + nn) / (e + g);
    let q_fd = -C::new(l - nn, -2.0 * m) / 4.0;
    Ok(FormResiduals {
        conformality: (e - g).abs().max(ff.abs()) / e,
        metric: (e - closed.conformal_factor).abs() / e,
        mean_curvature: (h_fd - closed.mean_h).abs(),
        hopf: (q_fd - closed.hopf_q).norm(),
        unit_norm: (dot4(&p, &p).sqrt() - 1.0).abs(),
    })
}

/// `max |F⁻¹∂F - Ω|` over both directions, by central differences.
pub fn frame_residual(surf: &Surface, k: usize, x: f64, y: f64) -> Result<f64> {
    let h = 1e-5;
    let th = [surf.sp.theta1, surf.sp.theta2][k];
    let s = FrameSample::with_chi0(y, th, surf.q, surf.chi[k].eval(y)?)?;
    let fi = s.frame(x).adjoint();
    let dx = (surf.frame(k, x + h, y)? - surf.frame(k, x - h, y)?).scale(C::new(0.5 / h, 0.0));
    let dy = (surf.frame(k, x, y + h)? - surf.frame(k, x, y - h)?).scale(C::new(0.5 / h, 0.0));
    let rx = (fi * dx - s.omega_x()).max_abs();
    let ry = (fi * dy - s.omega_y(surf.q)).max_abs();
    Ok(rx.max(ry))
}

// ---------------------------------------------------------------------------
// periods

/// A period lattice of an equivariant torus. Row `j` of `windings` is
/// `(p_j0, p_j1, p_j2)` with `p_jk = x_j ν_k + p_j0 ω_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Periods {
    pub g1: C,
    pub g2: C,
    pub windings: [[i64; 3]; 2],
    pub xs: [f64; 2],
}

pub(crate) fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        return if a < 0 { (-a, -1, 0) } else { (a, 1, 0) };
    }
    let (g, x, y) = ext_gcd(b, a % b);
    (g, y, x - (a / b) * y)
}

/// Periods `γ_j = x_j π - 2i p_j0 K'` generating the lattice of
/// `{P ∈ ℤ³ : s·P = 0, p1 ≡ p2 mod 2}`.
pub fn periods_for_mesh(q: f64, sp: &SymPoints, s: [i64; 3]) -> Result<Periods> {
    check_q(q)?;
    let no = nu_omega(q, sp)?;
    let (r1, r2) = closing_residual_from(s, &no);
    if r1.abs().max(r2.abs()) > 1e-6 {
        return Err(Error::NotClosing(format!(
            "s = {s:?} leaves residuals ({r1:e}, {r2:e})"
        )));
    }
    let kp = elliptic_ke_comp(q)?.kk;
    let (u, w) = (s[1] + s[2], s[1] - s[2]);
    let g = gcd(u, w);
    if g == 0 {
        return Err(Error::Domain(format!("degenerate closing vector {s:?}")));
    }
    let ab = |a: i64, b: i64, p0: i64| [p0, a + b, a - b];
    let pa = ab(w / g, -u / g, 0);
    let d = g / gcd(g, s[0]);
    let (_, al, be) = ext_gcd(u, w);
    let m = -s[0] * d / g;
    let mut pb = ab(al * m, be * m, d);
    let solve = |p: [i64; 3]| -> Result<f64> {
        let x1 = (p[1] as f64 - p[0] as f64 * no.omega1) / no.nu1;
        let x2 = (p[2] as f64 - p[0] as f64 * no.omega2) / no.nu2;
        if (x1 - x2).abs() > 1e-6 * x1.abs().max(1.0) {
            return Err(Error::NotClosing(format!(
                "sym points disagree on x for {p:?}: {x1} vs {x2}"
            )));
        }
        Ok(0.5 * (x1 + x2))
    };
    let xa = solve(pa)?;
    let shift = (solve(pb)? / xa).round() as i64;
    for i in 0..3 {
        pb[i] -= shift * pa[i];
    }
    let xb = solve(pb)?;
    let gamma = |x: f64, p0: i64| C::new(x * PI, -2.0 * p0 as f64 * kp);
    Ok(Periods {
        g1: gamma(xa, 0),
        g2: gamma(xb, pb[0]),
        windings: [pa, pb],
        xs: [xa, xb],
    })
}

/// Periods of a flat torus (`q = 1`) from windings `p_jk`, solving
/// `x sin θ_k - y cos θ_k = π p_jk` for `γ_j = x + iy`.
pub fn flat_periods(sp: &SymPoints, windings: [[i64; 2]; 2]) -> Result<(C, C)> {
    let (a, b) = (sp.theta1, sp.theta2);
    let det = (b - a).sin();
    if det.abs() < 1e-14 {
        return Err(Error::Domain("sym points coincide".into()));
    }
    let solve = |p: [i64; 2]| {
        let (r1, r2) = (PI * p[0] as f64, PI * p[1] as f64);
        // [[sin a, -cos a], [sin b, -cos b]] (x, y) = (r1, r2)
        let x = (-r1 * b.cos() + r2 * a.cos()) / det;
        let y = (-r1 * b.sin() + r2 * a.sin()) / det;
        C::new(x, y)
    };
    Ok((solve(windings[0]), solve(windings[1])))
}

/// `max |F(z + γ) ∓ M F(z)|` with `M = exp(π(xν + p0 ω) e0)`, over both sym
/// points, both periods and a few base points.
pub fn monodromy_residual(surf: &Surface, per: &Periods) -> Result<f64> {
    let no = nu_omega(surf.q, &surf.sp)?;
    let mut worst: f64 = 0.0;
    for (j, g) in [per.g1, per.g2].into_iter().enumerate() {
        let p0 = per.windings[j][0] as f64;
        for (k, (nu, om)) in [(no.nu1, no.omega1), (no.nu2, no.omega2)]
            .into_iter()
            .enumerate()
        {
            let m = Mat2::exp_e0(PI * (per.xs[j] * nu + p0 * om));
            for z in [C::new(0.1, 0.2), C::new(-0.7, 0.9), C::new(1.3, -0.4)] {
                let a = surf.frame(k, z.re + g.re, z.im + g.im)?;
                let b = m * surf.frame(k, z.re, z.im)?;
                worst = worst.max((a - b).max_abs().min((a + b).max_abs()));
            }
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// stereographic projection

fn complement_basis(pole: &[f64; 4]) -> [[f64; 4]; 3] {
    let skip = (0..4)
        .max_by(|&i, &j| pole[i].abs().total_cmp(&pole[j].abs()))
        .unwrap();
    let mut out = Vec::with_capacity(3);
    let mut done: Vec<[f64; 4]> = vec![*pole];
    for e in (0..4).filter(|&e| e != skip) {
        let mut w = [0.0; 4];
        w[e] = 1.0;
        for b in &done {
            w = lin4(1.0, &w, -dot4(&w, b), b);
        }
        let n = dot4(&w, &w).sqrt();
        let w = w.map(|x| x / n);
        done.push(w);
        out.push(w);
    }
    [out[0], out[1], out[2]]
}

fn unit_pole(pole: &[f64; 4]) -> Result<[f64; 4]> {
    let n = dot4(pole, pole).sqrt();
    if !(n > 0.0) || (n - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("pole {pole:?} is not a unit vector")));
    }
    Ok(pole.map(|x| x / n))
}

/// Stereographic projection of S³ from `pole` onto `pole^⊥ ≅ ℝ³`.
///
/// ```
/// use cmc_tori::surface::stereographic;
/// let x = stereographic([1.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]).unwrap();
/// assert_eq!(x, [0.0, 0.0, 0.0]);
/// ```
pub fn stereographic(p: [f64; 4], pole: [f64; 4]) -> Result<[f64; 3]> {
    let pole = unit_pole(&pole)?;
    let d = dot4(&p, &pole);
    if 1.0 - d < 1e-15 {
        return Err(Error::Domain("cannot project the pole".into()));
    }
    let w = lin4(1.0 / (1.0 - d), &p, -d / (1.0 - d), &pole);
    let b = complement_basis(&pole);
    Ok([dot4(&w, &b[0]), dot4(&w, &b[1]), dot4(&w, &b[2])])
}

/// Inverse of [`stereographic`].
pub fn inverse_stereographic(x: [f64; 3], pole: [f64; 4]) -> Result<[f64; 4]> {
    let pole = unit_pole(&pole)?;
    let b = complement_basis(&pole);
    let r2 = x.iter().map(|v| v * v).sum::<f64>();
    let mut p = pole.map(|v| v * (r2 - 1.0));
    for (xi, bi) in x.iter().zip(&b) {
        p = lin4(1.0, &p, 2.0 * xi, bi);
    }
    Ok(p.map(|v| v / (r2 + 1.0)))
}

fn choose_pole(vertices: &[[f64; 4]]) -> [f64; 4] {
    let dist = |pole: &[f64; 4]| {
        vertices
            .iter()
            .map(|v| lin4(1.0, v, -1.0, pole))
            .map(|d| dot4(&d, &d))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    };
    let default = [-1.0, 0.0, 0.0, 0.0];
    if dist(&default) >= 1e-3 {
        return default;
    }
    let mut cands: Vec<[f64; 4]> = Vec::new();
    for i in 0..4 {
        for sgn in [1.0, -1.0] {
            let mut e = [0.0; 4];
            e[i] = sgn;
            cands.push(e);
        }
    }
    for m in 0..16 {
        cands.push(std::array::from_fn(|i| {
            if m >> i & 1 == 1 {
                -0.5
            } else {
                0.5
            }
        }));
    }
    cands
        .into_iter()
        .max_by(|a, b| dist(a).total_cmp(&dist(b)))
        .unwrap()
}

// ---------------------------------------------------------------------------
// meshes

/// A periodic quad mesh of a torus in S³.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceMesh {
    pub nx: usize,
    pub ny: usize,
    pub q: f64,
    pub sp: SymPoints,
    pub triple: Option<Triple>,
    pub g1: C,
    pub g2: C,
    /// Row-major: vertex `(i, j)` at `z = (i/nx) γ1 + (j/ny) γ2` has index `j nx + i`.
    pub vertices: Vec<[f64; 4]>,
    pub faces: Vec<[usize; 4]>,
    pub projected: Vec<[f64; 3]>,
    pub pole: [f64; 4],
    pub closure_defect: f64,
}

fn grid_faces(nx: usize, ny: usize) -> Vec<[usize; 4]> {
    let id = |i: usize, j: usize| (j % ny) * nx + (i % nx);
    (0..ny)
        .flat_map(|j| {
            (0..nx).map(move |i| [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)])
        })
        .collect()
}

fn project_all(vertices: &[[f64; 4]], pole: [f64; 4]) -> Result<Vec<[f64; 3]>> {
    vertices.iter().map(|v| stereographic(*v, pole)).collect()
}

/// Samples `f` on an `nx × ny` grid of the domain spanned by `g1, g2` and
/// checks closure along both periods.
pub fn build_mesh(surf: &Surface, g1: C, g2: C, nx: usize, ny: usize) -> Result<SurfaceMesh> {
    if nx < 2 || ny < 2 {
        return Err(Error::Domain(format!(
            "mesh resolution {nx}×{ny} too small"
        )));
    }
    let rows: Vec<Vec<[f64; 4]>> = (0..ny)
        .into_par_iter()
        .map(|j| -> Result<Vec<[f64; 4]>> {
            let base = g2 * (j as f64 / ny as f64);
            if g1.im == 0.0 {
                let [s1, s2] = surf.samples(base.im)?;
                Ok((0..nx)
                    .map(|i| {
                        immersion_from_samples(base.re + g1.re * i as f64 / nx as f64, &s1, &s2)
                    })
                    .collect())
            } else {
                (0..nx)
                    .map(|i| {
                        let z = base + g1 * (i as f64 / nx as f64);
                        surf.point(z.re, z.im)
                    })
                    .collect()
            }
        })
        .collect::<Result<_>>()?;
    let vertices: Vec<[f64; 4]> = rows.into_iter().flatten().collect();
    let closure_defect = closure_defect(surf, g1, g2, nx, ny)?;
    if !(closure_defect < CLOSURE_TOL) {
        return Err(Error::NotClosing(format!(
            "mesh does not close, max defect {closure_defect:e}"
        )));
    }
    let pole = choose_pole(&vertices);
    Ok(SurfaceMesh {
        nx,
        ny,
        q: surf.q,
        sp: surf.sp,
        triple: None,
        g1,
        g2,
        projected: project_all(&vertices, pole)?,
        faces: grid_faces(nx, ny),
        vertices,
        pole,
        closure_defect,
    })
}

/// `max |f(z + γ) - f(z)|` over the boundary samples of the grid.
pub fn closure_defect(surf: &Surface, g1: C, g2: C, nx: usize, ny: usize) -> Result<f64> {
    let mut zs: Vec<(C, C)> = (0..nx).map(|i| (g1 * (i as f64 / nx as f64), g2)).collect();
    zs.extend((0..ny).map(|j| (g2 * (j as f64 / ny as f64), g1)));
    let d: Vec<f64> = zs
        .par_iter()
        .map(|(z, g)| -> Result<f64> {
            let a = surf.point(z.re, z.im)?;
            let b = surf.point(z.re + g.re, z.im + g.im)?;
            Ok(dot4(&lin4(1.0, &a, -1.0, &b), &lin4(1.0, &a, -1.0, &b)).sqrt())
        })
        .collect::<Result<_>>()?;
    Ok(d.into_iter().fold(0.0, f64::max))
}

/// Mesh of the torus at a flow state closing with `s`.
pub fn mesh_for_state(state: &FlowState, s: [i64; 3], nx: usize, ny: usize) -> Result<SurfaceMesh> {
    let q = state.point.q.min(1.0);
    let per = periods_for_mesh(q, &state.sp, s)?;
    build_mesh(&Surface::new(q, state.sp)?, per.g1, per.g2, nx, ny)
}

/// Mesh of a flat torus with the given windings (see [`flat_periods`]).
pub fn mesh_for_flat(
    sp: &SymPoints,
    windings: [[i64; 2]; 2],
    nx: usize,
    ny: usize,
) -> Result<SurfaceMesh> {
    let (g1, g2) = flat_periods(sp, windings)?;
    build_mesh(&Surface::new(1.0, *sp)?, g1, g2, nx, ny)
}

// ---------------------------------------------------------------------------
// export

/// Mesh file formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Obj,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(ExportFormat::Obj),
            "json" => Ok(ExportFormat::Json),
            _ => Err(Error::Domain(format!("unknown mesh format {s:?}"))),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::Obj => "obj",
            ExportFormat::Json => "json",
        })
    }
}

#[derive(Serialize, Deserialize)]
struct MeshMeta {
    q: f64,
    theta1: f64,
    theta2: f64,
    sheet: i32,
    triple: Option<Triple>,
    nx: usize,
    ny: usize,
    g1: C,
    g2: C,
    pole: [f64; 4],
    closure_defect: f64,
}

#[derive(Serialize, Deserialize)]
struct MeshJson {
    meta: MeshMeta,
    vertices4: Vec<[f64; 4]>,
    faces: Vec<[usize; 4]>,
}

/// OBJ text with projected vertices and 1-based quad faces.
pub fn to_obj(mesh: &SurfaceMesh) -> String {
    let mut s = String::with_capacity(mesh.projected.len() * 60);
    for p in &mesh.projected {
        s.push_str(&format!("v {:?} {:?} {:?}\n", p[0], p[1], p[2]));
    }
    for f in &mesh.faces {
        s.push_str(&format!(
            "f {} {} {} {}\n",
            f[0] + 1,
            f[1] + 1,
            f[2] + 1,
            f[3] + 1
        ));
    }
    s
}

pub fn to_json(mesh: &SurfaceMesh) -> Result<String> {
    let j = MeshJson {
        meta: MeshMeta {
            q: mesh.q,
            theta1: mesh.sp.theta1,
            theta2: mesh.sp.theta2,
            sheet: mesh.sp.sheet,
            triple: mesh.triple,
            nx: mesh.nx,
            ny: mesh.ny,
            g1: mesh.g1,
            g2: mesh.g2,
            pole: mesh.pole,
            closure_defect: mesh.closure_defect,
        },
        vertices4: mesh.vertices.clone(),
        faces: mesh.faces.clone(),
    };
    crate::cli::to_json(&j)
}

pub fn from_json(s: &str) -> Result<SurfaceMesh> {
    let j: MeshJson =
        serde_json::from_str(s).map_err(|e| Error::Domain(format!("bad mesh json: {e}")))?;
    let m = j.meta;
    if j.vertices4.len() != m.nx * m.ny || j.faces.iter().flatten().any(|&i| i >= j.vertices4.len())
    {
        return Err(Error::Domain("mesh json is inconsistent".into()));
    }
    let mut sp = SymPoints::new(m.theta1, m.theta2);
    sp.sheet = m.sheet;
    Ok(SurfaceMesh {
        nx: m.nx,
        ny: m.ny,
        q: m.q,
        sp,
        triple: m.triple,
        g1: m.g1,
        g2: m.g2,
        projected: project_all(&j.vertices4, m.pole)?,
        vertices: j.vertices4,
        faces: j.faces,
        pole: m.pole,
        closure_defect: m.closure_defect,
    })
}

pub fn export(mesh: &SurfaceMesh, format: ExportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ExportFormat::Obj => to_obj(mesh),
        ExportFormat::Json => to_json(mesh)?,
    };
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// profile curves

/// A closed planar curve with its turning number.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileCurve {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
    pub turning: i64,
    /// Sign of the coordinate that is constant in sign along the curve.
    pub hemisphere: i8,
}

impl ProfileCurve {
    pub fn new(points: Vec<[f64; 2]>, hemisphere: i8) -> Result<Self> {
        let turning = turning_number(&points)?;
        Ok(ProfileCurve {
            points,
            closed: true,
            turning,
            hemisphere,
        })
    }
}

/// Degree of the tangent map of a closed polyline (the last point joins the
/// first), unsigned. Repeated points are skipped.
///
/// ```
/// use cmc_tori::surface::turning_number;
/// let c: Vec<[f64; 2]> = (0..50).map(|k| {
///     let t = k as f64 * std::f64::consts::TAU / 50.0;
///     [t.cos(), t.sin()]
/// }).collect();
/// assert_eq!(turning_number(&c).unwrap(), 1);
/// ```
pub fn turning_number(points: &[[f64; 2]]) -> Result<i64> {
    let mut pts: Vec<[f64; 2]> = Vec::with_capacity(points.len());
    for p in points {
        if pts
            .last()
            .is_none_or(|l: &[f64; 2]| (l[0] - p[0]).hypot(l[1] - p[1]) > 1e-14)
        {
            pts.push(*p);
        }
    }
    while pts.len() > 1 && {
        let (a, b) = (pts[0], pts[pts.len() - 1]);
        (a[0] - b[0]).hypot(a[1] - b[1]) <= 1e-14
    } {
        pts.pop();
    }
    if pts.len() < 3 {
        return Err(Error::Domain(
            "curve is not immersed: fewer than three distinct points".into(),
        ));
    }
    let n = pts.len();
    let ang: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            (b[1] - a[1]).atan2(b[0] - a[0])
        })
        .collect();
    let mut total = 0.0;
    for i in 0..n {
        let mut d = ang[(i + 1) % n] - ang[i];
        d -= TAU * (d / TAU).round();
        if (d.abs() - PI).abs() < 1e-12 {
            return Err(Error::Domain(
                "curve is not immersed: the tangent reverses".into(),
            ));
        }
        total += d;
    }
    Ok((total / TAU).round().abs() as i64)
}

/// Which profile curve set: `Re f1 = 0` or `Re f2 = 0` for `f = f1 + f2 j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileSet {
    First,
    Second,
}

impl ProfileSet {
    fn field(self, p: &[f64; 4]) -> f64 {
        match self {
            ProfileSet::First => p[0],
            ProfileSet::Second => p[2],
        }
    }

    /// Coordinates on the 2-sphere `Re f_k = 0`, with the hemisphere
    /// coordinate last: `(Re f2, Im f2, Im f1)` or `(Re f1, Im f1, Im f2)`.
    fn sphere(self, p: &[f64; 4]) -> [f64; 3] {
        let v = match self {
            ProfileSet::First => [p[2], p[3], p[1]],
            ProfileSet::Second => [p[0], p[1], p[3]],
        };
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.map(|x| x / n)
    }
}

fn plane(v: &[f64; 3]) -> [f64; 2] {
    let d = 1.0 + v[2].abs();
    [v[0] / d, v[1] / d]
}

/// Zero level sets of `Re f_k` on the periodic mesh grid, mapped to the
/// 2-sphere `Re f_k = 0` and projected stereographically from the pole
/// opposite each curve's hemisphere.
pub fn extract_profiles(mesh: &SurfaceMesh, set: ProfileSet) -> Result<Vec<ProfileCurve>> {
    let (nx, ny) = (mesh.nx, mesh.ny);
    let val = |i: usize, j: usize| set.field(&mesh.vertices[(j % ny) * nx + (i % nx)]);
    let neg = |i: usize, j: usize| val(i, j) < 0.0;
    // edge 2(j nx + i) joins (i, j)-(i+1, j); edge 2(j nx + i) + 1 joins (i, j)-(i, j+1)
    let h = |i: usize, j: usize| 2 * ((j % ny) * nx + (i % nx));
    let v = |i: usize, j: usize| 2 * ((j % ny) * nx + (i % nx)) + 1;
    let crosses = |e: usize| {
        let (i, j) = ((e / 2) % nx, (e / 2) / nx);
        if e.is_multiple_of(2) {
            neg(i, j) != neg(i + 1, j)
        } else {
            neg(i, j) != neg(i, j + 1)
        }
    };
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); 2 * nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let es = [h(i, j), v(i + 1, j), h(i, j + 1), v(i, j)];
            let cr: Vec<usize> = es.iter().copied().filter(|&e| crosses(e)).collect();
            let pairs: Vec<(usize, usize)> = match cr.len() {
                2 => vec![(cr[0], cr[1])],
                4 => {
                    let c = val(i, j) + val(i + 1, j) + val(i, j + 1) + val(i + 1, j + 1);
                    if (c < 0.0) == neg(i, j) {
                        vec![(es[0], es[1]), (es[2], es[3])]
                    } else {
                        vec![(es[0], es[3]), (es[1], es[2])]
                    }
                }
                _ => vec![],
            };
            for (a, b) in pairs {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    let point = |e: usize| -> [f64; 3] {
        let (i, j) = ((e / 2) % nx, (e / 2) / nx);
        let (i2, j2) = if e.is_multiple_of(2) {
            (i + 1, j)
        } else {
            (i, j + 1)
        };
        let (pa, pb) = (
            mesh.vertices[j * nx + i],
            mesh.vertices[(j2 % ny) * nx + i2 % nx],
        );
        let (a, b) = (set.field(&pa), set.field(&pb));
        let s = a / (a - b);
        set.sphere(&lin4(1.0 - s, &pa, s, &pb))
    };
    let mut seen = vec![false; adj.len()];
    let mut curves = Vec::new();
    for start in 0..adj.len() {
        if adj[start].is_empty() || seen[start] {
            continue;
        }
        let mut cyc = vec![start];
        seen[start] = true;
        let (mut prev, mut cur) = (usize::MAX, start);
        loop {
            if adj[cur].len() != 2 {
                return Err(Error::Numerical(
                    "open profile contour; refine the grid".into(),
                ));
            }
            let next = if adj[cur][0] != prev {
                adj[cur][0]
            } else {
                adj[cur][1]
            };
            if next == start {
                break;
            }
            if seen[next] {
                return Err(Error::Numerical(
                    "profile contours touch; refine the grid".into(),
                ));
            }
            seen[next] = true;
            cyc.push(next);
            (prev, cur) = (cur, next);
        }
        let pts: Vec<[f64; 3]> = cyc.into_iter().map(point).collect();
        let mean = pts.iter().map(|p| p[2]).sum::<f64>();
        let hemi = if mean >= 0.0 { 1 } else { -1 };
        curves.push(ProfileCurve::new(pts.iter().map(plane).collect(), hemi)?);
    }
    Ok(curves)
}

/// Sum of turning numbers of the curves in one hemisphere.
pub fn total_turning(curves: &[ProfileCurve], hemisphere: i8) -> i64 {
    curves
        .iter()
        .filter(|c| c.hemisphere == hemisphere)
        .map(|c| c.turning)
        .sum()
}

/// One point of the profile curve of a torus of revolution.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RotationalProfileSample {
    /// `e^{-iχ0}(g1 + i g2) + g0 k` in ℝ⁴.
    pub point: [f64; 4],
    pub psi_prime: f64,
    pub kappa: f64,
}

/// Profile curve of the torus of revolution with `λ2 = λ1⁻¹`.
///
/// With `χ0` as in this module the curve `e^{-iχ0}(g1 + i g2) + g0 k` is
/// the mirror image `a ↦ ā` of the line `x = 0` of the immersion; in this
/// orientation the argument `ψ` of its `1, i` part satisfies
/// `ψ' = 2ν sin 2θ (v² cos 2θ - q) / (v² sin² 2θ - 4ν²)` and the orthographic
/// curvature is `κ = 8 ν² q / (v c³) > 0`.
pub fn profile_rotational(y: f64, q: f64, theta1: f64) -> Result<RotationalProfileSample> {
    let chi = Chi0::new(theta1, q)?;
    profile_rotational_with(&chi, y)
}

fn profile_rotational_with(chi: &Chi0, y: f64) -> Result<RotationalProfileSample> {
    let (q, th, nu) = (chi.q, chi.theta, chi.nu);
    let (v, vp) = dn_and_derivative(y, q)?;
    let (s2, c2) = (2.0 * th).sin_cos();
    let cc = v * v - 2.0 * q * c2 + q * q / (v * v);
    assert!(cc > 0.0, "c² > 0 for valid parameters");
    let c = cc.sqrt();
    let g0 = 0.5 * v * s2 / nu;
    let g1 = (v * c2 - q / v) / c;
    let g2 = 0.5 * vp * s2 / (c * nu);
    let a = C::from_polar(1.0, -chi.eval(y)?) * C::new(g1, g2);
    Ok(RotationalProfileSample {
        point: [a.re, a.im, 0.0, g0],
        psi_prime: 2.0 * nu * s2 * (v * v * c2 - q) / (v * v * s2 * s2 - 4.0 * nu * nu),
        kappa: 8.0 * nu * nu * q / (v * cc * c),
    })
}

/// The closed profile curve of a torus of revolution over `periods` periods
/// of `v`, sampled `n` times per period and projected stereographically from
/// the pole opposite the hemisphere `g0 > 0`.
pub fn rotational_profile_curve(
    q: f64,
    theta1: f64,
    periods: usize,
    n: usize,
) -> Result<ProfileCurve> {
    let chi = Chi0::new(theta1, q)?;
    let total = periods * n;
    let span = 2.0 * chi.kp * periods as f64;
    let pts: Vec<[f64; 2]> = (0..total)
        .into_par_iter()
        .map(|k| {
            let p = profile_rotational_with(&chi, span * k as f64 / total as f64)?.point;
            Ok(plane(&[p[0], p[1], p[3]]))
        })
        .collect::<Result<_>>()?;
    ProfileCurve::new(pts, 1)
}
