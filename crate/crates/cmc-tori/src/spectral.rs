//! Spectral data of genus zero and one curves restricted to the unit circle.
//!
//! On `λ = e^{2iθ}` the curve `4ν² = (λ - q)(λ⁻¹ - q)` gives the real function
//! [`nu_circle`]; the second basic function `ω` is obtained by integrating
//! `dω/dθ = -(E' - q K' cos 2θ)/(π ν)` from the point `λ = -sign(q)` where it
//! vanishes. It jumps by 2 across the cut at `λ = sign(q)`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::{elliptic_ke_comp, quad};
use crate::error::{Error, Result};

const OMEGA_TOL: f64 = 1e-13;

/// Sym point angles `λ_j = e^{2iθ_j}`, with an ω-sheet counter for `θ2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymPoints {
    pub theta1: f64,
    pub theta2: f64,
    /// Number of cut crossings of `λ2` since the start of a family; the
    /// continuous value of `ω(λ2)` is the branch value plus `2 * sheet`.
    pub sheet: i32,
}

impl SymPoints {
    pub fn new(theta1: f64, theta2: f64) -> Self {
        SymPoints {
            theta1,
            theta2,
            sheet: 0,
        }
    }

    pub fn lambda1(&self) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * self.theta1)
    }

    pub fn lambda2(&self) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * self.theta2)
    }
}

/// Flow coordinates `(q, k, h)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuliPoint {
    pub q: f64,
    pub k: f64,
    pub h: f64,
}

impl ModuliPoint {
    /// True inside the open cuboid `(-1,1)^3` with `q != 0`.
    pub fn is_interior(&self) -> bool {
        self.q != 0.0 && [self.q, self.k, self.h].iter().all(|x| x.abs() < 1.0)
    }
}

/// `ν` and `ω` at both sym points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuOmega {
    pub nu1: f64,
    pub nu2: f64,
    pub omega1: f64,
    pub omega2: f64,
}

/// Torus knot type `(m, n)` of an orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnotType {
    pub m: i64,
    pub n: i64,
}

/// `ν(e^{2iθ}) = ½ sqrt(1 - 2q cos 2θ + q²)`.
///
/// ```
/// use cmc_tori::spectral::nu_circle;
/// assert!((nu_circle(std::f64::consts::FRAC_PI_2, 0.5) - 0.75).abs() < 1e-15);
/// assert!((nu_circle(0.0, 0.5) - 0.25).abs() < 1e-15);
/// ```
pub fn nu_circle(theta: f64, q: f64) -> f64 {
    0.5 * (1.0 - 2.0 * q * (2.0 * theta).cos() + q * q)
        .max(0.0)
        .sqrt()
}

/// Evaluator for ω at a fixed modulus; caches `K'` and `E'`.
#[derive(Clone, Copy, Debug)]
pub struct Omega {
    q: f64,
    kp: f64,
    ep: f64,
}

impl Omega {
    pub fn new(q: f64) -> Result<Self> {
        if q == 0.0 || !(q.abs() <= 1.0) {
            return Err(Error::Domain(format!(
                "ω needs q in [-1,1]\\{{0}}, got {q}"
            )));
        }
        let p = elliptic_ke_comp(q)?;
        Ok(Omega {
            q,
            kp: p.kk,
            ep: p.ee,
        })
    }

    /// `-dω/dθ`, smooth away from the zeros of ν.
    pub fn density(&self, t: f64) -> f64 {
        let nu = nu_circle(t, self.q);
        if nu == 0.0 {
            // only at |q| = 1 on the cut, where the limit is |sin t|
            return 0.0;
        }
        (self.ep - self.q * self.kp * (2.0 * t).cos()) / (PI * nu)
    }

    /// Branch value of ω at `θ ∈ (0, π)`. For `q > 0` the cut point `θ = 0`
    /// is also accepted and gives the limit from `θ > 0`.
    pub fn branch(&self, theta: f64) -> Result<f64> {
        let lo_ok = theta > 0.0 || (theta == 0.0 && self.q > 0.0 && self.q < 1.0);
        if !(lo_ok && theta < PI) {
            return Err(Error::Branch(format!("θ = {theta} outside (0,π)")));
        }
        let f = |t: f64| self.density(t);
        if self.q > 0.0 {
            quad(f, theta, FRAC_PI_2, OMEGA_TOL)
        } else if theta > FRAC_PI_2 {
            quad(f, theta, PI, OMEGA_TOL)
        } else if theta < FRAC_PI_2 {
            quad(f, 0.0, theta, OMEGA_TOL).map(|v| -v)
        } else {
            Err(Error::Branch("θ = π/2 is the cut for q < 0".into()))
        }
    }

    /// Branch value plus `2 * sheet`.
    pub fn value(&self, theta: f64, sheet: i32) -> Result<f64> {
        Ok(self.branch(theta)? + 2.0 * sheet as f64)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn kp(&self) -> f64 {
        self.kp
    }

    pub fn ep(&self) -> f64 {
        self.ep
    }
}

/// ω on the unit circle: the branch vanishing at `λ = -sign(q)` plus
/// `2 * sheet`.
///
/// ```
/// use cmc_tori::spectral::omega_circle;
/// use std::f64::consts::FRAC_PI_4;
/// let w = omega_circle(FRAC_PI_4, 1e-6, 0).unwrap();
/// assert!((w - 0.5).abs() < 1e-4);
/// ```
pub fn omega_circle(theta: f64, q: f64, sheet: i32) -> Result<f64> {
    Omega::new(q)?.value(theta, sheet)
}

/// `ν_j` and `ω_j` at the sym points, with the sheet applied to `ω2`.
pub fn nu_omega(q: f64, sp: &SymPoints) -> Result<NuOmega> {
    let om = Omega::new(q)?;
    Ok(NuOmega {
        nu1: nu_circle(sp.theta1, q),
        nu2: nu_circle(sp.theta2, q),
        omega1: om.branch(sp.theta1)?,
        omega2: om.value(sp.theta2, sp.sheet)?,
    })
}

/// The real roots `(λ₋, 1/λ₋)` of `2E' - qK'(λ + λ⁻¹)`, the zeros of dω on
/// the real axis, for `0 < q < 1`.
pub fn domega_real_roots(q: f64) -> Result<(f64, f64)> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("q = {q} outside (0,1)")));
    }
    let p = elliptic_ke_comp(q)?;
    let c = p.ee / (q * p.kk);
    let lo = c - (c * c - 1.0).sqrt();
    Ok((lo, 1.0 / lo))
}

/// `(k, h, H)` from sym points: `k = cos(θ1+θ2)`, `h = cos(θ1-θ2)`,
/// `H = h / sqrt(1 - h²)`.
///
/// ```
/// use cmc_tori::spectral::{sym_to_coords, SymPoints};
/// use std::f64::consts::FRAC_PI_4;
/// let (k, h, hh) = sym_to_coords(&SymPoints::new(FRAC_PI_4, 3.0 * FRAC_PI_4)).unwrap();
/// assert!((k + 1.0).abs() < 1e-15 && h.abs() < 1e-15 && hh.abs() < 1e-15);
/// ```
pub fn sym_to_coords(sp: &SymPoints) -> Result<(f64, f64, f64)> {
    let k = (sp.theta1 + sp.theta2).cos();
    let h = (sp.theta1 - sp.theta2).cos();
    Ok((k, h, mean_curvature(h)?))
}

/// `H = h / sqrt(1 - h²)`.
pub fn mean_curvature(h: f64) -> Result<f64> {
    let s = 1.0 - h * h;
    if s <= 0.0 {
        return Err(Error::Range(format!(
            "coincident sym points (h = {h}), H infinite"
        )));
    }
    Ok(h / s.sqrt())
}

/// Inverse of [`sym_to_coords`] on `(k, h)`.
///
/// Returns `θ1 = (arccos k + arccos h)/2` and `θ2 = (arccos k - arccos h)/2`,
/// shifted by `π` into `[0, π)` when negative (the same `λ2`). For `q > 0`
/// this ordering has `ν(θ1) >= ν(θ2)`. `swap` exchanges the two angles.
/// `θ2 = 0` is returned when `k = h`, i.e. `λ2 = 1`.
pub fn coords_to_sym(k: f64, h: f64, swap: bool) -> Result<SymPoints> {
    if !(k.abs() <= 1.0 && h.abs() <= 1.0) {
        return Err(Error::Domain(format!("(k,h) = ({k},{h}) outside [-1,1]²")));
    }
    let a = k.acos();
    let b = h.acos();
    let t1 = 0.5 * (a + b);
    let mut t2 = 0.5 * (a - b);
    if t2 < 0.0 {
        t2 += PI;
    }
    if !(0.0..PI).contains(&t1) || !(0.0..PI).contains(&t2) || t1 == t2 {
        return Err(Error::Branch(format!(
            "no valid sym point branch for (k,h) = ({k},{h})"
        )));
    }
    Ok(if swap {
        SymPoints::new(t2, t1)
    } else {
        SymPoints::new(t1, t2)
    })
}

/// Simplest rational (smallest denominator) in `[lo, hi]`, `0 <= lo <= hi`.
fn simplest_in(lo: f64, hi: f64, max_den: i64, depth: u32) -> Option<(i64, i64)> {
    if depth > 60 {
        return None;
    }
    let fl = lo.floor();
    if fl == lo {
        return Some((fl as i64, 1));
    }
    if fl < hi.floor() {
        return Some((fl as i64 + 1, 1));
    }
    let (p, q) = simplest_in(1.0 / (hi - fl), 1.0 / (lo - fl), max_den, depth + 1)?;
    let num = fl as i64 * p + q;
    if p > max_den {
        return None;
    }
    Some((num, p))
}

/// The rational `m/n` with the smallest denominator `n <= max_den` within
/// `tol` of `x`, found by continued fraction expansion of the interval ends.
///
/// ```
/// use cmc_tori::spectral::rational_approx;
/// assert_eq!(rational_approx(1.0 / 3.0 + 1e-12, 1e-9, 1_000_000), Some((1, 3)));
/// assert_eq!(rational_approx(std::f64::consts::PI, 1e-9, 100), None);
/// ```
pub fn rational_approx(x: f64, tol: f64, max_den: i64) -> Option<(i64, i64)> {
    if !x.is_finite() || !(tol >= 0.0) {
        return None;
    }
    let (lo, hi) = (x - tol, x + tol);
    if lo <= 0.0 && hi >= 0.0 {
        return Some((0, 1));
    }
    if hi < 0.0 {
        return simplest_in(-hi, -lo, max_den, 0).map(|(p, q)| (-p, q));
    }
    simplest_in(lo, hi, max_den, 0)
}

/// Knot type `m/n = (ν1 - ν2)/(ν1 + ν2)` by rational recovery.
pub fn knot_type(nu1: f64, nu2: f64, tol: f64) -> Result<KnotType> {
    if !(nu2 > 0.0 && nu1 >= nu2) {
        return Err(Error::Domain(format!(
            "need ν1 >= ν2 > 0, got ({nu1}, {nu2})"
        )));
    }
    let r = (nu1 - nu2) / (nu1 + nu2);
    rational_approx(r, tol, 1_000_000)
        .map(|(m, n)| KnotType { m, n })
        .ok_or_else(|| Error::NotClosing(format!("ratio {r} is not rational within {tol}")))
}

/// Closing residuals `s·(0, ν1, ν2)` and `s·(1, ω1, ω2)`.
pub fn closing_residual(s: [i64; 3], q: f64, sp: &SymPoints) -> Result<(f64, f64)> {
    let no = nu_omega(q, sp)?;
    Ok(closing_residual_from(s, &no))
}

pub(crate) fn closing_residual_from(s: [i64; 3], no: &NuOmega) -> (f64, f64) {
    let [s0, s1, s2] = s.map(|v| v as f64);
    (
        s1 * no.nu1 + s2 * no.nu2,
        s0 + s1 * no.omega1 + s2 * no.omega2,
    )
}

/// The integer vector orthogonal to `(0, ν1, ν2)` and `(1, ω1, ω2)`,
/// normalized so that `gcd(s0, s1+s2, s1-s2) = 2` and `s2 < 0`.
pub fn closing_vector(no: &NuOmega, tol: f64) -> Result<[i64; 3]> {
    // (0,ν1,ν2) × (1,ω1,ω2) = (ν1ω2 - ν2ω1, ν2, -ν1)
    let c0 = no.nu1 * no.omega2 - no.nu2 * no.omega1;
    let x = c0 / no.nu1;
    let y = no.nu2 / no.nu1;
    let fail = || Error::NotClosing(format!("no rational closing vector within {tol}"));
    let (xn, xd) = rational_approx(x, tol, 1_000_000).ok_or_else(fail)?;
    let (yn, yd) = rational_approx(y, tol, 1_000_000).ok_or_else(fail)?;
    let d = lcm(xd, yd);
    Ok(normalize_s([xn * (d / xd), yn * (d / yd), -d]))
}

/// Scales a nonzero integer vector to the representative with
/// `gcd(s0, s1+s2, s1-s2) = 2`, keeping its direction.
pub fn normalize_s(s: [i64; 3]) -> [i64; 3] {
    let g = gcd(gcd(s[0], s[1]), s[2]);
    let mut s = s.map(|v| v / g.max(1));
    if gcd(gcd(s[0], s[1] + s[2]), s[1] - s[2]) == 1 {
        s = s.map(|v| 2 * v);
    }
    s
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm(a: i64, b: i64) -> i64 {
    if a == 0 || b == 0 {
        0
    } else {
        (a / gcd(a, b) * b).abs()
    }
}

/// Where ν, and ω together with λ, are real.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RealLocus {
    pub nu_real: bool,
    /// ω real at λ: on the unit circle, or λ real in the set listed for the
    /// sign of q.
    pub omega_real: bool,
}

/// Set membership for the real loci of ν and ω, for both signs of `q`.
///
/// For `q ∈ (0,1]`: ν real iff `λ ∈ S¹ ∪ [q, 1/q] ∪ ℝ₋`, and for real `λ`,
/// ω real iff `λ ∈ [0, q] ∪ [1/q, ∞)`. For `q < 0` the sets are mirrored
/// by `λ → -λ`.
pub fn real_locus(lambda: Complex64, q: f64) -> Result<RealLocus> {
    const EPS: f64 = 1e-12;
    if lambda.norm() == 0.0 {
        return Err(Error::Domain("λ = 0".into()));
    }
    if q == 0.0 || !(q.abs() <= 1.0) {
        return Err(Error::Domain(format!("q = {q} outside [-1,1]\\{{0}}")));
    }
    let on_circle = (lambda.norm() - 1.0).abs() <= EPS;
    // mirror q < 0 onto q > 0
    let (lam, a) = if q > 0.0 { (lambda, q) } else { (-lambda, -q) };
    let real = lam.im.abs() <= EPS * lam.norm().max(1.0);
    let x = lam.re;
    let nu_real = on_circle || (real && (x <= 0.0 || (x >= a - EPS && x <= 1.0 / a + EPS)));
    let omega_real = on_circle || (real && x >= 0.0 && (x <= a + EPS || x >= 1.0 / a - EPS));
    Ok(RealLocus {
        nu_real,
        omega_real,
    })
}
