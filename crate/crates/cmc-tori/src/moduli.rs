//! The moduli graph of equivariant tori: moves between bifurcation
//! vertices, reduction to the rotational base, sublattices of `Λ*` and the
//! classification predicates.
//!
//! Lattices live in coordinates `n1 γ1* + n2 γ2*` of `Λ* = ℤ²`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{endpoint_h, has_minimal};
use crate::genus0::{SublatticeKind, Triple, TripleSublattices};
use crate::spectral::gcd;
use crate::surface::ext_gcd;

/// One edge of the moduli graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Move {
    /// Through spectral genus one: `ℓ0 ↦ ℓ1 + ℓ2 - ℓ0`.
    One,
    /// Along a flat edge, needs `0 < ℓ1` and `ℓ2 < 2ℓ0`.
    Two,
    /// Doubling, needs `ℓ1` odd.
    Three,
    /// `ℓ2 ↦ ℓ2 + k ℓ0`, which leaves the four lattices alone.
    Shift(i64),
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::One => write!(f, "①"),
            Move::Two => write!(f, "②"),
            Move::Three => write!(f, "③"),
            Move::Shift(k) => write!(f, "shift({k})"),
        }
    }
}

pub fn apply_move(t: &Triple, which: Move) -> Result<Triple> {
    t.validate()?;
    let Triple { l0, l1, l2 } = *t;
    let out = match which {
        Move::One => (l1 + l2 - l0, l1, l2),
        Move::Two => {
            if !(0 < l1 && l2 < 2 * l0) {
                return Err(Error::MoveInapplicable(format!(
                    "② at {t}: needs 0 < l1 and l2 < 2 l0"
                )));
            }
            (l0, l2 - l0, l0 + l1)
        }
        Move::Three => {
            if l1 % 2 == 0 {
                return Err(Error::MoveInapplicable(format!("③ at {t}: needs l1 odd")));
            }
            (2 * l0, l1, 2 * l2)
        }
        Move::Shift(k) => return shift_l2(t, k),
    };
    Triple::new(out.0, out.1, out.2).map_err(|e| {
        Error::MoveInapplicable(format!("{which} at {t} leaves the triple range: {e}"))
    })
}

/// `(ℓ0, ℓ1, ℓ2 + k ℓ0)`.
pub fn shift_l2(t: &Triple, k: i64) -> Result<Triple> {
    t.validate()?;
    let l2 = t.l2 + k * t.l0;
    if l2 <= t.l0 {
        return Err(Error::Range(format!(
            "shift {k} at {t} gives l2 = {l2} <= l0"
        )));
    }
    Ok(Triple { l2, ..*t })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveStep {
    pub op: Move,
    pub before: Triple,
    pub after: Triple,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveSequence {
    pub start: Triple,
    pub steps: Vec<MoveStep>,
}

impl MoveSequence {
    pub fn new(start: Triple) -> Self {
        MoveSequence {
            start,
            steps: Vec::new(),
        }
    }

    pub fn end(&self) -> Triple {
        self.steps.last().map_or(self.start, |s| s.after)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Applies `op` to the current end and records it.
    pub fn push(&mut self, op: Move) -> Result<Triple> {
        let before = self.end();
        let after = apply_move(&before, op)?;
        self.steps.push(MoveStep { op, before, after });
        Ok(after)
    }

    /// Replays every step, checking that it chains and that each move was
    /// applicable.
    pub fn verify(&self) -> Result<()> {
        let mut cur = self.start;
        for s in &self.steps {
            if s.before != cur {
                return Err(Error::Numerical(format!(
                    "step {} starts at {} not {cur}",
                    s.op, s.before
                )));
            }
            let after = apply_move(&s.before, s.op)?;
            if after != s.after {
                return Err(Error::Numerical(format!(
                    "{} at {} gives {after}, recorded {}",
                    s.op, s.before, s.after
                )));
            }
            cur = after;
        }
        Ok(())
    }

    /// The moves without their triples, for display.
    pub fn ops(&self) -> Vec<Move> {
        self.steps.iter().map(|s| s.op).collect()
    }
}

/// Whether the reduction stops here: `ℓ1 = 0`, or `ℓ2 = 2ℓ0` where all four
/// lattices are of the form `pℤγ1* + qℤγ2*`.
pub fn is_base(t: &Triple) -> bool {
    t.l1 == 0 || t.l2 == 2 * t.l0
}

/// Moves and shifts from `t` to a base triple.
///
/// Each round first shifts `ℓ2` into `(ℓ0, 2ℓ0]`. Then `①` lowers `ℓ0`
/// while `ℓ1 + ℓ2 < 2ℓ0`, the sandwich `②①②` lowers `ℓ1` while
/// `2ℓ0 < ℓ1 + ℓ2`, and on `2ℓ0 = ℓ1 + ℓ2` one of `③①` (`ℓ1` odd) or
/// `②③①` (`ℓ0 - ℓ1` odd) lands on `ℓ2 = 2ℓ0`.
///
/// ```
/// use cmc_tori::genus0::Triple;
/// use cmc_tori::moduli::reduce_to_base;
///
/// let seq = reduce_to_base(&Triple::new(4, 2, 7).unwrap()).unwrap();
/// // ②①② takes ℓ1 from 2 to 1
/// assert_eq!(seq.steps[2].after, Triple::new(5, 1, 8).unwrap());
/// assert_eq!(seq.end(), Triple::new(4, 1, 8).unwrap());
/// ```
pub fn reduce_to_base(t: &Triple) -> Result<MoveSequence> {
    t.validate()?;
    let mut seq = MoveSequence::new(*t);
    let mut cur = *t;
    loop {
        if cur.l1 == 0 {
            return Ok(seq);
        }
        let k = -((cur.l2 - cur.l0 - 1) / cur.l0);
        if k != 0 {
            cur = seq.push(Move::Shift(k))?;
        }
        let Triple { l0, l1, l2 } = cur;
        if l2 == 2 * l0 {
            return Ok(seq);
        }
        let prev = (l1, l0);
        if l1 + l2 < 2 * l0 {
            cur = seq.push(Move::One)?;
        } else if 2 * l0 < l1 + l2 {
            seq.push(Move::Two)?;
            seq.push(Move::One)?;
            cur = seq.push(Move::Two)?;
        } else {
            if l1 % 2 == 1 {
                seq.push(Move::Three)?;
            } else {
                seq.push(Move::Two)?;
                seq.push(Move::Three)?;
            }
            cur = seq.push(Move::One)?;
            debug_assert!(cur.l2 == 2 * cur.l0);
            return Ok(seq);
        }
        assert!((cur.l1, cur.l0) < prev, "reduction stalled at {cur}");
    }
}

/// Hermite normal form of a sublattice: basis `a γ1*` and `b γ1* + d γ2*`
/// with `0 <= b < a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SublatticeHnf {
    pub a: i64,
    pub b: i64,
    pub d: i64,
}

impl fmt::Display for SublatticeHnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {}; 0 {}]", self.a, self.b, self.d)
    }
}

impl SublatticeHnf {
    pub fn new(a: i64, b: i64, d: i64) -> Result<Self> {
        if a < 1 || d < 1 || !(0..a).contains(&b) {
            return Err(Error::Domain(format!(
                "({a},{b},{d}) is not in Hermite normal form"
            )));
        }
        Ok(SublatticeHnf { a, b, d })
    }

    pub fn full() -> Self {
        SublatticeHnf { a: 1, b: 0, d: 1 }
    }

    pub fn index(&self) -> i64 {
        self.a * self.d
    }

    pub fn generators(&self) -> [(i64, i64); 2] {
        [(self.a, 0), (self.b, self.d)]
    }

    pub fn contains(&self, n1: i64, n2: i64) -> bool {
        n2 % self.d == 0 && (n1 - self.b * (n2 / self.d)) % self.a == 0
    }

    pub fn contains_lattice(&self, other: &SublatticeHnf) -> bool {
        other
            .generators()
            .iter()
            .all(|&(n1, n2)| self.contains(n1, n2))
    }

    /// `pℤγ1* + qℤγ2*`.
    pub fn is_diagonal(&self) -> bool {
        self.b == 0
    }

    /// `Λ*/Γ` is cyclic exactly when the first Smith invariant is 1.
    pub fn is_cyclic(&self) -> bool {
        gcd(gcd(self.a, self.b), self.d) == 1
    }

    /// The lattice spanned by two vectors.
    pub fn from_generators(u: (i64, i64), v: (i64, i64)) -> Result<Self> {
        let (mut d, mut x, mut y) = ext_gcd(u.1, v.1);
        if d < 0 {
            (d, x, y) = (-d, -x, -y);
        }
        if d == 0 {
            return Err(Error::Domain("generators do not span a lattice".into()));
        }
        let w1 = x * u.0 + y * v.0;
        let a = ((v.1 / d) * u.0 - (u.1 / d) * v.0).abs();
        if a == 0 {
            return Err(Error::Domain("generators do not span a lattice".into()));
        }
        Ok(SublatticeHnf {
            a,
            b: w1.rem_euclid(a),
            d,
        })
    }

    /// `{n : f1 n1 + f2 n2 ∈ mℤ}`.
    pub fn from_form(m: i64, f1: i64, f2: i64) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain(format!("modulus {m} must be positive")));
        }
        let inside = |n1: i64, n2: i64| (f1 * n1 + f2 * n2).rem_euclid(m) == 0;
        let a = (1..=m).find(|&a| inside(a, 0)).unwrap_or(m);
        for d in 1..=m {
            if let Some(b) = (0..a).find(|&b| inside(b, d)) {
                return Ok(SublatticeHnf { a, b, d });
            }
        }
        Err(Error::Numerical(format!(
            "no basis for form ({f1},{f2}) mod {m}"
        )))
    }

    /// Coordinates of `v ∈ Γ` in the basis [`generators`](Self::generators).
    pub fn coords(&self, v: (i64, i64)) -> Result<(i64, i64)> {
        if !self.contains(v.0, v.1) {
            return Err(Error::Domain(format!("{v:?} not in {self}")));
        }
        let m = v.1 / self.d;
        Ok(((v.0 - self.b * m) / self.a, m))
    }
}

/// Every sublattice of index at most `max_index`, ordered by index.
pub fn enumerate_sublattices(max_index: i64) -> Result<Vec<SublatticeHnf>> {
    if max_index < 1 {
        return Err(Error::Domain(format!("max index {max_index} must be >= 1")));
    }
    let mut out = Vec::new();
    for n in 1..=max_index {
        for a in (1..=n).filter(|a| n % a == 0) {
            for b in 0..a {
                out.push(SublatticeHnf { a, b, d: n / a });
            }
        }
    }
    Ok(out)
}

/// A bifurcation vertex whose lattice of the given kind contains `Γ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexTriple {
    pub triple: Triple,
    pub kind: SublatticeKind,
    /// The cyclic lattice the construction ran on; `Γ` itself when
    /// `Λ*/Γ` is cyclic.
    pub through: SublatticeHnf,
}

/// For cyclic `Λ*/Γ`: take a primitive `γ1 ∉ Γ` with complement `γ2`, the
/// least `p >= 2` with `pγ1 ∈ Γ` and the least `q >= 0` with
/// `qγ1 + γ2 ∈ Γ`. Then `Γ` is the kernel of `lγ1 + mγ2 ↦ l - qm` mod `p`.
fn cyclic_vertex(s: &SublatticeHnf) -> Option<Triple> {
    let n = s.index();
    let mut cands: Vec<(i64, i64)> = (0..=n)
        .flat_map(|c1| (-n..=n).map(move |c2| (c1, c2)))
        .filter(|&(c1, c2)| gcd(c1, c2) == 1 && !s.contains(c1, c2))
        .collect();
    cands.sort_by_key(|&(c1, c2)| (c1 * c1 + c2 * c2, c1, c2));
    for (c1, c2) in cands {
        let (g, x, y) = ext_gcd(c1, c2);
        let (e1, e2) = (-y * g, x * g);
        let p = (2..=n).find(|&p| s.contains(p * c1, p * c2))?;
        let Some(q) = (0..p).find(|&q| s.contains(q * c1 + e1, q * c2 + e2)) else {
            continue;
        };
        let l1 = (e2 + q * c2).rem_euclid(p);
        let mut l2 = (-e1 - q * c1).rem_euclid(p);
        while l2 <= p {
            l2 += p;
        }
        return Some(Triple { l0: p, l1, l2 });
    }
    None
}

/// A vertex triple `(ℓ0, ℓ1, ℓ2)` with `ℓ0 > 1` one of whose four lattices
/// contains `Γ`.
///
/// Lattices `nℤγ1* + γ2*ℤ` and `γ1*ℤ + nℤγ2*` get the rotational vertex
/// `(n, 0, n + 1)`. When `Λ*/Γ` is not cyclic the construction runs on a
/// cyclic lattice of prime index containing `Γ`.
pub fn find_vertex_triple(s: &SublatticeHnf) -> Result<VertexTriple> {
    let s = SublatticeHnf::new(s.a, s.b, s.d)?;
    let n = s.index();
    if n == 1 {
        return Err(Error::Domain("the full lattice needs no vertex".into()));
    }
    if s.is_diagonal() && (s.a == 1 || s.d == 1) {
        let kind = if s.d == 1 {
            SublatticeKind::D
        } else {
            SublatticeKind::Base
        };
        return Ok(VertexTriple {
            triple: Triple::new(n, 0, n + 1)?,
            kind,
            through: s,
        });
    }
    let through = if s.is_cyclic() {
        s
    } else {
        let p = (2..=n).find(|p| n % p == 0).unwrap_or(n);
        enumerate_sublattices(p)?
            .into_iter()
            .filter(|h| h.index() == p)
            .find(|h| h.contains_lattice(&s))
            .ok_or_else(|| Error::Numerical(format!("no index {p} lattice contains {s}")))?
    };
    let triple = cyclic_vertex(&through)
        .ok_or_else(|| Error::Numerical(format!("no vertex for {through}")))?;
    triple.validate()?;
    let ts = TripleSublattices { triple };
    let kind = TripleSublattices::ALL
        .into_iter()
        .find(|&k| {
            s.generators()
                .iter()
                .all(|&(n1, n2)| ts.contains(k, n1, n2))
        })
        .ok_or_else(|| Error::Numerical(format!("{triple} has no lattice containing {s}")))?;
    Ok(VertexTriple {
        triple,
        kind,
        through,
    })
}

/// The four lattices of a triple in Hermite normal form.
pub fn triple_hnfs(t: &Triple) -> Result<[SublatticeHnf; 4]> {
    t.validate()?;
    let ts = TripleSublattices { triple: *t };
    let mut out = [SublatticeHnf::full(); 4];
    for (slot, k) in out.iter_mut().zip(TripleSublattices::ALL) {
        let (f1, f2) = ts.form(k);
        *slot = SublatticeHnf::from_form(t.l0, f1, f2)?;
    }
    Ok(out)
}

/// The rotational edge pairing: the base lattice of `(ℓ2 - 1, 0, ℓ2)` and
/// its `D` image, `γ1*ℤ + (ℓ2 - 1)γ2*ℤ` and `(ℓ2 - 1)γ1*ℤ + γ2*ℤ`.
pub fn rotational_pairing(l2: i64) -> Result<(SublatticeHnf, SublatticeHnf)> {
    let t = Triple::new(l2 - 1, 0, l2)?;
    let h = triple_hnfs(&t)?;
    Ok((h[0], h[2]))
}

/// One isogeny in a connectivity path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsogenyStep {
    pub from: SublatticeHnf,
    pub vertex: VertexTriple,
    /// The lattice `Γ_T ⊇ Γ` of the vertex.
    pub superlattice: SublatticeHnf,
    pub moves: MoveSequence,
    /// Lattices of the base triple, all of the form `pℤγ1* + qℤγ2*`.
    pub base_lattices: [SublatticeHnf; 4],
    /// `Γ` seen in `Λ*` through `Γ_T ≅ Λ*`.
    pub to: SublatticeHnf,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePath {
    pub hnf: SublatticeHnf,
    pub path: Vec<IsogenyStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConnectivityReport {
    pub max_index: i64,
    pub lattices: Vec<LatticePath>,
    pub max_path_len: usize,
}

fn isogeny_step(g: &SublatticeHnf) -> Result<IsogenyStep> {
    let vertex = find_vertex_triple(g)?;
    let moves = reduce_to_base(&vertex.triple)?;
    let base = moves.end();
    let base_lattices = triple_hnfs(&base)?;
    if !base_lattices.iter().all(SublatticeHnf::is_diagonal) {
        return Err(Error::Numerical(format!(
            "base {base} has a non-diagonal lattice"
        )));
    }
    let superlattice = triple_hnfs(&vertex.triple)?[TripleSublattices::ALL
        .iter()
        .position(|&k| k == vertex.kind)
        .unwrap_or(0)];
    let [u, v] = g.generators();
    let to = SublatticeHnf::from_generators(superlattice.coords(u)?, superlattice.coords(v)?)?;
    Ok(IsogenyStep {
        from: *g,
        vertex,
        superlattice,
        moves,
        base_lattices,
        to,
    })
}

fn lattice_path(g: &SublatticeHnf) -> Result<LatticePath> {
    let mut path = Vec::new();
    let mut cur = *g;
    while cur.index() > 1 {
        let step = isogeny_step(&cur)?;
        if step.to.index() >= cur.index() {
            return Err(Error::Numerical(format!(
                "index did not drop at {cur}: counterexample"
            )));
        }
        cur = step.to;
        path.push(step);
    }
    Ok(LatticePath { hnf: *g, path })
}

/// Connects every sublattice of index at most `max_index` to `Λ*` by
/// isogenies of strictly decreasing index.
pub fn connectivity_check(max_index: i64) -> Result<ConnectivityReport> {
    let lattices = enumerate_sublattices(max_index)?
        .par_iter()
        .map(lattice_path)
        .collect::<Result<Vec<_>>>()?;
    let max_path_len = lattices.iter().map(|l| l.path.len()).max().unwrap_or(0);
    Ok(ConnectivityReport {
        max_index,
        lattices,
        max_path_len,
    })
}

/// Replays a report from its certificates.
pub fn verify_report(r: &ConnectivityReport) -> Result<()> {
    let expected = enumerate_sublattices(r.max_index)?;
    if expected.len() != r.lattices.len()
        || expected.iter().zip(&r.lattices).any(|(e, l)| *e != l.hnf)
    {
        return Err(Error::Numerical(
            "report does not list every sublattice once".into(),
        ));
    }
    for l in &r.lattices {
        let mut cur = l.hnf;
        for s in &l.path {
            let fail = |why: &str| Err(Error::Numerical(format!("{}: {why}", l.hnf)));
            if s.from != cur {
                return fail("path does not chain");
            }
            let ts = TripleSublattices {
                triple: s.vertex.triple,
            };
            if s.vertex.triple.l0 < 2
                || !s
                    .from
                    .generators()
                    .iter()
                    .all(|&(a, b)| ts.contains(s.vertex.kind, a, b))
                || !s.superlattice.contains_lattice(&s.from)
            {
                return fail("containment witness fails");
            }
            s.moves.verify()?;
            if s.moves.start != s.vertex.triple || !is_base(&s.moves.end()) {
                return fail("moves do not reach a base triple");
            }
            if triple_hnfs(&s.moves.end())? != s.base_lattices
                || !s.base_lattices.iter().all(|h| h.is_diagonal())
            {
                return fail("base lattices wrong");
            }
            let [u, v] = s.from.generators();
            let to = SublatticeHnf::from_generators(
                s.superlattice.coords(u)?,
                s.superlattice.coords(v)?,
            )?;
            if to != s.to
                || to.index() * s.superlattice.index() != cur.index()
                || to.index() >= cur.index()
            {
                return fail("isogeny image wrong");
            }
            cur = to;
        }
        if cur.index() != 1 {
            return Err(Error::Numerical(format!(
                "{} never reaches the full lattice",
                l.hnf
            )));
        }
    }
    Ok(())
}

/// Lobe counts of the profile curves: `(ℓ1, ℓ2)`, with no minor count for
/// tori of revolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lobes {
    pub minor: Option<i64>,
    pub major: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassificationRecord {
    pub triple: Triple,
    pub rotational: bool,
    pub embedded: bool,
    pub alexandrov: bool,
    pub lobes: Lobes,
    /// `gcd(ℓ1, ℓ2)`; for tori of revolution this is `ℓ2`.
    pub symmetry_cyclic_order: i64,
    pub minimal_in_family: bool,
    /// `[min, max]` of the mean curvature over the family.
    pub h_range: [f64; 2],
}

/// Classifies the family of `t`. `wrapping` is how many times the torus
/// covers its profile with respect to the rotational period; there is no
/// formula for it in terms of the triple alone.
///
/// ```
/// use cmc_tori::genus0::Triple;
/// use cmc_tori::moduli::classify;
///
/// let r = classify(&Triple::new(1, 0, 3).unwrap(), 1).unwrap();
/// assert!(r.embedded && r.alexandrov && !r.minimal_in_family);
/// ```
pub fn classify(t: &Triple, wrapping: u32) -> Result<ClassificationRecord> {
    t.validate()?;
    if wrapping == 0 {
        return Err(Error::Domain("wrapping number must be positive".into()));
    }
    let rotational = t.is_rotational();
    let (h0, h1) = endpoint_h(t)?;
    Ok(ClassificationRecord {
        triple: *t,
        rotational,
        embedded: rotational && t.l0 == 1,
        alexandrov: rotational && wrapping == 1,
        lobes: Lobes {
            minor: (!rotational).then_some(t.l1),
            major: t.l2,
        },
        symmetry_cyclic_order: gcd(t.l1, t.l2),
        minimal_in_family: has_minimal(t),
        h_range: [h0.min(h1), h0.max(h1)],
    })
}
