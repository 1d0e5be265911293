//! Flat CMC tori: eigenvalues of the flat frame, period lattices, the
//! Clifford family and integer triples.
//!
//! Pairings: `⟨x, y⟩ = Re(x ȳ)`. Winding integers are `p_jk = 2⟨γ_j, λ_k^{1/2}⟩`
//! (so `ln μ(γ_j, λ_k) = πi p_jk`), and duals of lattices are taken with
//! respect to `2⟨·,·⟩`. With these conventions the embedded Clifford torus
//! has `Γ = Λ* = Λ`, the square lattice generated by `1/√2` and `i/√2`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{gcd, normalize_s, rational_approx};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Rank-two lattice `g1 ℤ + g2 ℤ` in ℂ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub g1: Complex64,
    pub g2: Complex64,
}

impl Lattice {
    pub fn new(g1: Complex64, g2: Complex64) -> Result<Self> {
        let det = (g1.conj() * g2).im;
        if !(det.abs() > 1e-14 * g1.norm() * g2.norm()) {
            return Err(Error::Domain(format!("collinear generators {g1}, {g2}")));
        }
        Ok(Lattice { g1, g2 })
    }

    /// Covolume `|Im(ḡ1 g2)|`.
    pub fn area(&self) -> f64 {
        (self.g1.conj() * self.g2).im.abs()
    }

    /// Dual lattice `{κ : 2⟨κ, γ⟩ ∈ ℤ}`, with `2⟨g*_j, g_k⟩ = δ_jk`.
    pub fn dual(&self) -> Lattice {
        // rows of ½ (Gᵀ)⁻¹ where the rows of G are the generators
        let (a, b, c, d) = (self.g1.re, self.g1.im, self.g2.re, self.g2.im);
        let det = a * d - b * c;
        let s = 0.5 / det;
        Lattice {
            g1: Complex64::new(d * s, -c * s),
            g2: Complex64::new(-b * s, a * s),
        }
    }

    /// Real coordinates of `z` in the basis `(g1, g2)`.
    pub fn coords(&self, z: Complex64) -> (f64, f64) {
        let (a, b, c, d) = (self.g1.re, self.g1.im, self.g2.re, self.g2.im);
        let det = a * d - b * c;
        ((z.re * d - z.im * c) / det, (z.im * a - z.re * b) / det)
    }

    /// Whether `z` lies on the lattice within `tol` in coordinates.
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        let (x, y) = self.coords(z);
        (x - x.round()).abs() <= tol && (y - y.round()).abs() <= tol
    }
}

/// `⟨x, y⟩ = Re(x ȳ)`.
pub fn dot(x: Complex64, y: Complex64) -> f64 {
    (x * y.conj()).re
}

/// Integer invariant `(ℓ0, ℓ1, ℓ2)` of a flat torus with a double point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub l0: i64,
    pub l1: i64,
    pub l2: i64,
}

impl Triple {
    /// Checked constructor: `gcd = 1` and `0 <= ℓ1 < ℓ0 < ℓ2`.
    pub fn new(l0: i64, l1: i64, l2: i64) -> Result<Self> {
        let t = Triple { l0, l1, l2 };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let Triple { l0, l1, l2 } = *self;
        if !(0 <= l1 && l1 < l0 && l0 < l2) {
            return Err(Error::InvalidTriple(format!(
                "{self}: need 0 <= l1 < l0 < l2"
            )));
        }
        if gcd(gcd(l0, l1), l2) != 1 {
            return Err(Error::InvalidTriple(format!("{self}: gcd must be 1")));
        }
        Ok(())
    }

    /// `s = (2ℓ0, ℓ1 + ℓ2, ℓ1 - ℓ2)`.
    pub fn s(&self) -> [i64; 3] {
        [2 * self.l0, self.l1 + self.l2, self.l1 - self.l2]
    }

    /// The four `s` vectors with this triple, related by (C') and (D').
    pub fn s_vectors(&self) -> [[i64; 3]; 4] {
        let Triple { l0, l1, l2 } = *self;
        [
            [2 * l0, l1 + l2, l1 - l2],
            [2 * l0, l1 + l2, l2 - l1],
            [2 * l0, l1 - l2, l1 + l2],
            [2 * l0, l2 - l1, l1 + l2],
        ]
    }

    pub fn is_rotational(&self) -> bool {
        self.l1 == 0
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.l0, self.l1, self.l2)
    }
}

impl FromStr for Triple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s
            .trim()
            .trim_matches(|c| c == '(' || c == ')')
            .split(',')
            .collect();
        if parts.len() != 3 {
            return Err(Error::InvalidTriple(format!(
                "expected l0,l1,l2, got {s:?}"
            )));
        }
        let mut v = [0i64; 3];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p
                .trim()
                .parse()
                .map_err(|_| Error::InvalidTriple(format!("not an integer: {p:?}")))?;
        }
        Triple::new(v[0], v[1], v[2])
    }
}

impl Serialize for Triple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Triple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `τ(s) = -(s0+s1+s2)(-s0+s1+s2)(s0-s1+s2)(s0+s1-s2)`, exactly.
pub fn tau(s: [i64; 3]) -> i128 {
    let [a, b, c] = s.map(|v| v as i128);
    -(a + b + c) * (-a + b + c) * (a - b + c) * (a + b - c)
}

/// Spectral data `(λ0, λ1, λ2)` of a flat torus with a double point `λ0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDataFlat {
    pub lam0: Complex64,
    pub lam1: Complex64,
    pub lam2: Complex64,
}

impl SpectralDataFlat {
    pub fn new(lam0: Complex64, lam1: Complex64, lam2: Complex64) -> Result<Self> {
        let l = [lam0, lam1, lam2];
        if l.iter().any(|z| (z.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::Domain("spectral data must be unimodular".into()));
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if (l[i] - l[j]).norm() < 1e-12 {
                return Err(Error::Domain(
                    "spectral data points must be distinct".into(),
                ));
            }
        }
        Ok(SpectralDataFlat { lam0, lam1, lam2 })
    }
}

/// `ln μ(z, λ) = πi (z λ^{-1/2} + z̄ λ^{1/2}) = 2πi ⟨z, λ^{1/2}⟩`, principal root.
///
/// ```
/// use cmc_tori::genus0::flat_log_mu;
/// use num_complex::Complex64;
/// let z = Complex64::new(0.5f64.sqrt(), 0.0);
/// let l = flat_log_mu(z, Complex64::new(0.0, 1.0));
/// assert!(l.re.abs() < 1e-15 && (l.im - std::f64::consts::PI).abs() < 1e-14);
/// ```
pub fn flat_log_mu(z: Complex64, lambda: Complex64) -> Complex64 {
    let r = lambda.sqrt();
    I * PI * (z / r + z.conj() * r)
}

/// `Λ = κ1 ℤ + κ2 ℤ` with `κ1,2 = ½(λ1^{1/2} ± λ2^{1/2})` and its dual `Λ*`.
pub fn base_lattice(lam1: Complex64, lam2: Complex64) -> Result<(Lattice, Lattice)> {
    if (lam1 - lam2).norm() < 1e-14 {
        return Err(Error::Domain("coincident sym points".into()));
    }
    let (r1, r2) = (lam1.sqrt(), lam2.sqrt());
    let lam = Lattice::new(0.5 * (r1 + r2), 0.5 * (r1 - r2))?;
    Ok((lam, lam.dual()))
}

/// Periods `γ1, γ2` from windings `p_jk = 2⟨γ_j, λ_k^{1/2}⟩` (principal roots).
///
/// ```
/// use cmc_tori::genus0::periods_from_windings;
/// use num_complex::Complex64;
/// let (i, mi) = (Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0));
/// let (g1, g2) = periods_from_windings(i, mi, [[1, 1], [1, -1]]).unwrap();
/// assert!((g1 - Complex64::new(0.5f64.sqrt(), 0.0)).norm() < 1e-15);
/// assert!((g2 - Complex64::new(0.0, 0.5f64.sqrt())).norm() < 1e-15);
/// ```
pub fn periods_from_windings(
    lam1: Complex64,
    lam2: Complex64,
    p: [[i64; 2]; 2],
) -> Result<(Complex64, Complex64)> {
    let den = lam2 - lam1;
    if den.norm() < 1e-14 {
        return Err(Error::Domain("coincident sym points".into()));
    }
    let (r1, r2) = (lam1.sqrt(), lam2.sqrt());
    let g = |pa: i64, pb: i64| (r1 * lam2 * pa as f64 - lam1 * r2 * pb as f64) / den;
    let (g1, g2) = (g(p[0][0], p[0][1]), g(p[1][0], p[1][1]));
    if (g1.conj() * g2).im.abs() <= 1e-14 * (g1.norm() * g2.norm()).max(1e-300) {
        return Err(Error::Domain(
            "degenerate windings: collinear periods".into(),
        ));
    }
    Ok((g1, g2))
}

/// Flat Clifford family `(h, H) = (-tanh t, -sinh t)`, through the Clifford
/// torus at `t = 0`.
pub fn clifford_family(t: f64) -> (f64, f64) {
    (-t.tanh(), -t.sinh())
}

/// `s = i m × m̄` for `m = (λ0^{1/2}, λ1^{1/2}, λ2^{1/2})`, as the integer
/// representative with `gcd(s0, s1+s2, s1-s2) = 2`.
pub fn s_vector(sd: &SpectralDataFlat, tol: f64) -> Result<[i64; 3]> {
    let m = [sd.lam0.sqrt(), sd.lam1.sqrt(), sd.lam2.sqrt()];
    let mb = m.map(|z| z.conj());
    let cross = [
        m[1] * mb[2] - m[2] * mb[1],
        m[2] * mb[0] - m[0] * mb[2],
        m[0] * mb[1] - m[1] * mb[0],
    ];
    let s = cross.map(|z| (I * z).re);
    let (jmax, smax) =
        s.iter().enumerate().fold(
            (0, 0.0),
            |acc, (j, v)| if v.abs() > acc.1 { (j, v.abs()) } else { acc },
        );
    if smax == 0.0 {
        return Err(Error::Domain("spectral data in Δ".into()));
    }
    let mut fr = [(0i64, 1i64); 3];
    let mut den = 1i64;
    for j in 0..3 {
        let r = s[j] / s[jmax];
        fr[j] = rational_approx(r, tol, 1_000_000)
            .ok_or_else(|| Error::NotClosing(format!("s ratio {r} not rational within {tol}")))?;
        den = crate::spectral::lcm(den, fr[j].1);
    }
    let v = fr.map(|(a, b)| a * (den / b));
    // keep the sign of the real cross product
    let v = if s[jmax] < 0.0 { v.map(|x| -x) } else { v };
    Ok(normalize_s(v))
}

/// The triple `½(|s0|, min(|s1+s2|,|s1-s2|), max(…))` of flat spectral data.
pub fn triple_from_s(s: [i64; 3]) -> Result<Triple> {
    let (a, b) = ((s[1] + s[2]).abs(), (s[1] - s[2]).abs());
    let v = [s[0].abs(), a.min(b), a.max(b)];
    if v.iter().any(|x| x % 2 != 0) {
        return Err(Error::InvalidTriple(format!("s = {s:?} not normalized")));
    }
    if tau(s) >= 0 {
        return Err(Error::InvalidTriple(format!(
            "τ(s) >= 0 for s = {s:?}: data in Δ"
        )));
    }
    Triple::new(v[0] / 2, v[1] / 2, v[2] / 2)
}

/// Integer triple of flat spectral data.
pub fn triple_from_spectral(sd: &SpectralDataFlat) -> Result<Triple> {
    triple_from_s(s_vector(sd, 1e-9)?)
}

/// Spectral data with `λ0 = 1` for a triple, using the `+` sign of `√τ` and
/// `s = (2ℓ0, ℓ1+ℓ2, ℓ1-ℓ2)`. The roots returned by [`flat_roots`] lie in the
/// closed upper half plane for valid triples.
pub fn spectral_from_triple(t: &Triple) -> Result<SpectralDataFlat> {
    let (_, r1, r2) = flat_roots(t)?;
    SpectralDataFlat::new(Complex64::new(1.0, 0.0), r1 * r1, r2 * r2)
}

/// `(λ0^{1/2}, λ1^{1/2}, λ2^{1/2})` for a triple.
pub fn flat_roots(t: &Triple) -> Result<(Complex64, Complex64, Complex64)> {
    t.validate()?;
    let s = t.s();
    let ta = tau(s);
    if ta >= 0 {
        return Err(Error::InvalidTriple(format!("τ = {ta} >= 0 for {t}")));
    }
    let [s0, s1, s2] = s.map(|v| v as f64);
    let rt = (-(ta as f64)).sqrt();
    let r1 = Complex64::new(-s0 * s0 - s1 * s1 + s2 * s2, rt) / (2.0 * s0 * s1);
    let r2 = Complex64::new(-s0 * s0 + s1 * s1 - s2 * s2, -rt) / (2.0 * s0 * s2);
    Ok((Complex64::new(1.0, 0.0), r1 / r1.norm(), r2 / r2.norm()))
}

/// Which of the four lattices of a triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SublatticeKind {
    /// `n1 ℓ1 + n2 ℓ2 ∈ ℓ0 ℤ`
    Base,
    /// `C''`: `n1 ℓ1 - n2 ℓ2 ∈ ℓ0 ℤ`
    C,
    /// `D''`: `n2 ℓ1 + n1 ℓ2 ∈ ℓ0 ℤ`
    D,
    /// `D'' C''`: `n2 ℓ1 - n1 ℓ2 ∈ ℓ0 ℤ`
    DC,
}

/// Membership predicates for the four sublattices `Γ ⊂ Λ*` of a triple, in
/// coordinates `n1 γ1* + n2 γ2*`.
#[derive(Clone, Copy, Debug)]
pub struct TripleSublattices {
    pub triple: Triple,
}

impl TripleSublattices {
    pub const ALL: [SublatticeKind; 4] = [
        SublatticeKind::Base,
        SublatticeKind::C,
        SublatticeKind::D,
        SublatticeKind::DC,
    ];

    /// Linear form whose values in `ℓ0 ℤ` define the lattice.
    pub fn form(&self, kind: SublatticeKind) -> (i64, i64) {
        let Triple { l1, l2, .. } = self.triple;
        match kind {
            SublatticeKind::Base => (l1, l2),
            SublatticeKind::C => (l1, -l2),
            SublatticeKind::D => (l2, l1),
            SublatticeKind::DC => (-l2, l1),
        }
    }

    pub fn contains(&self, kind: SublatticeKind, n1: i64, n2: i64) -> bool {
        let (a, b) = self.form(kind);
        (a as i128 * n1 as i128 + b as i128 * n2 as i128).rem_euclid(self.triple.l0 as i128) == 0
    }

    /// Index in `Λ*`, by counting residues in the fundamental box `[0, ℓ0)²`.
    pub fn index(&self, kind: SublatticeKind) -> i64 {
        let l0 = self.triple.l0;
        let mut count = 0;
        for n1 in 0..l0 {
            for n2 in 0..l0 {
                if self.contains(kind, n1, n2) {
                    count += 1;
                }
            }
        }
        l0 * l0 / count
    }
}

/// The four sublattice predicates of a triple.
pub fn triple_sublattices(t: &Triple) -> Result<TripleSublattices> {
    t.validate()?;
    Ok(TripleSublattices { triple: *t })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn log_mu_examples() {
        assert_eq!(flat_log_mu(c(0.0, 0.0), c(0.0, 1.0)), c(0.0, 0.0));
        let l = flat_log_mu(c(0.3, 0.0), c(1.0, 0.0));
        assert!((l - c(0.0, 2.0 * PI * 0.3)).norm() < 1e-15);
    }

    #[test]
    fn clifford_base_lattice_is_square_and_self_dual() {
        let (lam, dual) = base_lattice(c(0.0, 1.0), c(0.0, -1.0)).unwrap();
        let r = 0.5f64.sqrt();
        assert!((lam.g1 - c(r, 0.0)).norm() < 1e-15);
        assert!((lam.g2 - c(0.0, r)).norm() < 1e-15);
        assert!((dual.g1 - lam.g1).norm() < 1e-15 && (dual.g2 - lam.g2).norm() < 1e-15);
    }

    #[test]
    fn kappa_ratio_imaginary_and_double_dual() {
        for (a, b) in [(0.3, 2.0), (1.1, -0.4), (2.9, 0.2)] {
            let (lam, dual) =
                base_lattice(Complex64::from_polar(1.0, a), Complex64::from_polar(1.0, b)).unwrap();
            assert!((lam.g1 / lam.g2).re.abs() < 1e-14);
            let dd = dual.dual();
            assert!((dd.g1 - lam.g1).norm() < 1e-12 && (dd.g2 - lam.g2).norm() < 1e-12);
        }
    }

    #[test]
    fn windings_round_trip() {
        let (l1, l2) = (
            Complex64::from_polar(1.0, 0.9),
            Complex64::from_polar(1.0, -2.1),
        );
        let p = [[3, 1], [-1, 5]];
        let (g1, g2) = periods_from_windings(l1, l2, p).unwrap();
        for (j, g) in [g1, g2].iter().enumerate() {
            for (k, l) in [l1, l2].iter().enumerate() {
                assert!((2.0 * dot(*g, l.sqrt()) - p[j][k] as f64).abs() < 1e-12);
            }
        }
        // swapping sym points with the columns of p
        let (h1, h2) = periods_from_windings(l2, l1, [[1, 3], [5, -1]]).unwrap();
        assert!((h1 - g1).norm() < 1e-14 && (h2 - g2).norm() < 1e-14);
        assert!(periods_from_windings(l1, l2, [[1, 1], [2, 2]]).is_err());
    }

    #[test]
    fn embedded_period_ratio_matches_mean_curvature() {
        for t in [-0.8, 0.0, 0.3, 1.4] {
            let (h, hh) = clifford_family(t);
            // λ1 = e^{2iθ1}, λ2 = conj: h = cos 2θ1
            let th = 0.5 * h.acos();
            let (l1, l2) = (
                Complex64::from_polar(1.0, 2.0 * th),
                Complex64::from_polar(1.0, -2.0 * th),
            );
            let (g1, g2) = periods_from_windings(l1, l2, [[1, 1], [1, -1]]).unwrap();
            let ratio = g1.norm() / g2.norm();
            let cand = [
                ((1.0 + hh * hh).sqrt() + hh).abs(),
                (-(1.0 + hh * hh).sqrt() + hh).abs(),
            ];
            assert!(cand.iter().any(|c| (c - ratio).abs() < 1e-12), "t={t}");
        }
    }

    #[test]
    fn tau_identity() {
        for (l0, l1, l2) in [(2, 1, 3), (3, 1, 4), (5, 2, 7), (1, 0, 2)] {
            let t = Triple::new(l0, l1, l2).unwrap();
            let expect = 16 * (l0 * l0 - l1 * l1) as i128 * (l0 * l0 - l2 * l2) as i128;
            for s in t.s_vectors() {
                assert_eq!(tau(s), expect);
                assert!(tau(s) < 0);
            }
        }
    }

    #[test]
    fn spectral_from_triple_213() {
        let (_, r1, r2) = flat_roots(&Triple::new(2, 1, 3).unwrap()).unwrap();
        let s15 = 15f64.sqrt();
        assert!((r1 - c(-7.0, s15) / 8.0).norm() < 1e-15);
        assert!((r2 - c(1.0, s15) / 4.0).norm() < 1e-15);
    }

    #[test]
    fn rotational_triple_has_reciprocal_sym_points() {
        let sd = spectral_from_triple(&Triple::new(1, 0, 2).unwrap()).unwrap();
        assert!((sd.lam1 * sd.lam2 - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn triple_round_trip() {
        for (l0, l1, l2) in [
            (2, 1, 3),
            (3, 1, 4),
            (5, 2, 7),
            (1, 0, 2),
            (4, 3, 9),
            (3, 0, 5),
        ] {
            let t = Triple::new(l0, l1, l2).unwrap();
            let sd = spectral_from_triple(&t).unwrap();
            let s = s_vector(&sd, 1e-9).unwrap();
            assert!(tau(s) < 0);
            assert_eq!(gcd(gcd(s[0], s[1] + s[2]), s[1] - s[2]), 2);
            assert_eq!(triple_from_spectral(&sd).unwrap(), t);
        }
        assert_eq!(
            triple_from_s([4, 4, -2]).unwrap(),
            Triple::new(2, 1, 3).unwrap()
        );
    }

    #[test]
    fn triple_parsing_and_validation() {
        let t: Triple = "2,1,3".parse().unwrap();
        assert_eq!(
            t,
            Triple {
                l0: 2,
                l1: 1,
                l2: 3
            }
        );
        assert_eq!(t.to_string(), "2,1,3");
        assert!("2,2,3".parse::<Triple>().is_err());
        assert!("2,0,4".parse::<Triple>().is_err());
        assert!("1,2".parse::<Triple>().is_err());
        assert!(serde_json::from_str::<Triple>("\"3,1,4\"").is_ok());
    }

    #[test]
    fn sublattice_predicates() {
        let sl = triple_sublattices(&Triple::new(2, 1, 3).unwrap()).unwrap();
        assert!(sl.contains(SublatticeKind::Base, 1, 1));
        assert!(!sl.contains(SublatticeKind::Base, 1, 0));
        let full = triple_sublattices(&Triple::new(1, 0, 2).unwrap()).unwrap();
        for k in TripleSublattices::ALL {
            assert!(full.contains(k, 3, -7));
        }
    }

    #[test]
    fn sublattice_index_is_l0() {
        for l0 in 1..=6 {
            for l1 in 0..l0 {
                for l2 in l0 + 1..=7 {
                    let Ok(t) = Triple::new(l0, l1, l2) else {
                        continue;
                    };
                    let sl = triple_sublattices(&t).unwrap();
                    for k in TripleSublattices::ALL {
                        assert_eq!(sl.index(k), l0, "{t} {k:?}");
                    }
                }
            }
        }
    }
}
