//! Elements of `k[[u]]((t))`, the transform `psi1`, the rank-two valuation
//! and the invariants of Schur pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::action::{echelon_basis, stabilizes_by_series, Bounds, SubspaceW};
use crate::error::{format, math, Error, Result};
use crate::growth::check_a_zseries;
use crate::rat::{fmt_rat, parse_rat, Rat};
use crate::verdict::{Check, Report, Verdict};
use crate::zseries::{tail_add, ZSeries, EXACT};

/// `u_prec` of a series known for every power of `u`.
pub const EXACT_U: u32 = u32::MAX;

/// A truncated element of `k[[u]]((t))`; `(a, b)` stands for `u^a t^b`.
///
/// Terms with `b >= tail_prec`, `a >= u_prec` or `a + b >= diag_prec` are
/// unknown. The diagonal bound is what a `z2`-tail becomes under `psi1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "UTSeriesWire", into = "UTSeriesWire")]
pub struct UTSeries {
    // keyed (b, a): the first key carries the valuation
    terms: BTreeMap<(i64, u32), Rat>,
    tail_prec: i64,
    u_prec: u32,
    diag_prec: i64,
}

/// `nu(a) = (u-order of the leading t-coefficient, t-order)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Valuation2 {
    pub nu_u: u32,
    pub nu_t: i64,
}

impl fmt::Display for Valuation2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.nu_u, self.nu_t)
    }
}

impl UTSeries {
    pub fn zero(tail_prec: i64, u_prec: u32) -> Self {
        UTSeries {
            terms: BTreeMap::new(),
            tail_prec,
            u_prec,
            diag_prec: EXACT,
        }
    }

    /// Also forget terms with `a + b >= diag_prec`.
    pub fn with_diag(mut self, diag_prec: i64) -> Self {
        self.diag_prec = self.diag_prec.min(diag_prec);
        let d = self.diag_prec;
        self.terms.retain(|&(b, a), _| a as i64 + b < d);
        self
    }

    fn knows(&self, a: u32, b: i64) -> bool {
        b < self.tail_prec && a < self.u_prec && (a as i64).saturating_add(b) < self.diag_prec
    }

    pub fn exact_zero() -> Self {
        Self::zero(EXACT, EXACT_U)
    }

    pub fn monomial(a: u32, b: i64, c: Rat) -> Self {
        let mut s = Self::exact_zero();
        s.add_term(a, b, c);
        s
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, i64), Rat)>>(it: I, tail_prec: i64, u_prec: u32) -> Self {
        let mut s = Self::zero(tail_prec, u_prec);
        for ((a, b), c) in it {
            s.add_term(a, b, c);
        }
        s
    }

    pub fn add_term(&mut self, a: u32, b: i64, c: Rat) {
        if !self.knows(a, b) || c.is_zero() {
            return;
        }
        let e = self.terms.entry((b, a)).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(b, a));
        }
    }

    pub fn tail_prec(&self) -> i64 {
        self.tail_prec
    }

    pub fn u_prec(&self) -> u32 {
        self.u_prec
    }

    pub fn diag_prec(&self) -> i64 {
        self.diag_prec
    }

    pub fn is_exact(&self) -> bool {
        self.tail_prec == EXACT && self.u_prec == EXACT_U && self.diag_prec == EXACT
    }

    /// Terms as `((a, b), c)` in increasing `b`, then `a`.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, i64), &Rat)> {
        self.terms.iter().map(|(&(b, a), c)| ((a, b), c))
    }

    pub fn coeff(&self, a: u32, b: i64) -> Rat {
        self.terms.get(&(b, a)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn truncate(&self, tail_prec: i64, u_prec: u32) -> UTSeries {
        let mut out = UTSeries::zero(tail_prec.min(self.tail_prec), u_prec.min(self.u_prec)).with_diag(self.diag_prec);
        for (&(b, a), c) in &self.terms {
            if out.knows(a, b) {
                out.terms.insert((b, a), c.clone());
            }
        }
        out
    }

    fn common_region(&self, other: &UTSeries) -> UTSeries {
        self.truncate(other.tail_prec, other.u_prec).with_diag(other.diag_prec)
    }

    pub fn add(&self, other: &UTSeries) -> UTSeries {
        let mut out = self.common_region(other);
        for (&(b, a), c) in &other.terms {
            out.add_term(a, b, c.clone());
        }
        out
    }

    pub fn neg(&self) -> UTSeries {
        UTSeries {
            terms: self.terms.iter().map(|(k, v)| (*k, -v)).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &UTSeries) -> UTSeries {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> UTSeries {
        let mut out = Self::zero(self.tail_prec, self.u_prec).with_diag(self.diag_prec);
        if !c.is_zero() {
            out.terms = self.terms.iter().map(|(k, v)| (*k, v * c)).collect();
        }
        out
    }

    // lowest t-exponent that any term, known or not, can carry
    fn t_floor(&self) -> i64 {
        match self.terms.keys().next() {
            Some(k) => k.0.min(self.tail_prec),
            None => self.tail_prec,
        }
    }

    // lowest `a + b` that any term, known or not, can carry
    fn diag_floor(&self) -> i64 {
        let stored = self.terms.keys().map(|&(b, a)| a as i64 + b).min().unwrap_or(EXACT);
        let u_side = if self.u_prec == EXACT_U { EXACT } else { tail_add(self.t_floor(), self.u_prec as i64) };
        stored.min(self.tail_prec).min(self.diag_prec).min(u_side)
    }

    pub fn mul(&self, other: &UTSeries) -> UTSeries {
        let tail = tail_add(self.tail_prec, other.t_floor()).min(tail_add(other.tail_prec, self.t_floor()));
        let diag = tail_add(self.diag_prec, other.diag_floor()).min(tail_add(other.diag_prec, self.diag_floor()));
        let mut out = Self::zero(tail, self.u_prec.min(other.u_prec)).with_diag(diag);
        for (&(b1, a1), c1) in &self.terms {
            for (&(b2, a2), c2) in &other.terms {
                out.add_term(a1 + a2, b1 + b2, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> UTSeries {
        let mut acc = UTSeries::monomial(0, 0, Rat::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// The `nu`-leading term `(a, b, c)`: least `t`-exponent, then least
    /// `u`-exponent.
    pub fn lead(&self) -> Option<(u32, i64, Rat)> {
        self.terms.iter().next().map(|(&(b, a), c)| (a, b, c.clone()))
    }

    pub fn nu(&self) -> Result<Valuation2> {
        match self.lead() {
            Some((a, b, _)) => Ok(Valuation2 { nu_u: a, nu_t: b }),
            None => math("nu of a series that vanishes to precision"),
        }
    }

    /// Inverse of an element whose leading `t`-coefficient is a unit of
    /// `k[[u]]`, computed for `u^{< u_cap}` and `depth` orders of `t` past the
    /// leading one.
    pub fn inverse(&self, u_cap: u32, depth: i64) -> Result<UTSeries> {
        let (a0, b0, _) = match self.lead() {
            Some(l) => l,
            None => return math("cannot invert a series that vanishes to precision"),
        };
        if a0 != 0 {
            return math(format!("leading t-coefficient has u-order {a0}; not a unit of k[[u]]"));
        }
        let up = self.u_prec.min(u_cap).max(1);
        // L(u)^-1 for the leading t-coefficient
        let lc: Vec<Rat> = (0..up).map(|a| self.coeff(a, b0)).collect();
        let mut linv = vec![lc[0].recip()];
        for n in 1..up as usize {
            let mut s = Rat::zero();
            for k in 1..=n {
                s += &lc[k] * &linv[n - k];
            }
            linv.push(-s * &linv[0]);
        }
        let linv = UTSeries::from_terms(
            linv.into_iter().enumerate().map(|(a, c)| ((a as u32, 0), c)),
            EXACT,
            up,
        );
        let rel_tail = tail_add(self.tail_prec, -b0).min(depth.max(1));
        let shifted = self.shift_t(-b0).mul(&linv).truncate(rel_tail, up);
        let x = shifted.sub(&UTSeries::monomial(0, 0, Rat::one()));
        let mut acc = UTSeries::from_terms([((0, 0), Rat::one())], rel_tail, up);
        let mut term = acc.clone();
        for _ in 1..rel_tail {
            term = term.mul(&x).neg().truncate(rel_tail, up);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        Ok(acc.mul(&linv).shift_t(-b0))
    }

    /// `t^d * self`.
    pub fn shift_t(&self, d: i64) -> UTSeries {
        UTSeries {
            terms: self.terms.iter().map(|(&(b, a), c)| ((b + d, a), c.clone())).collect(),
            tail_prec: tail_add(self.tail_prec, d),
            u_prec: self.u_prec,
            diag_prec: tail_add(self.diag_prec, d),
        }
    }

    /// Equality on the region both sides know.
    pub fn agrees_with(&self, other: &UTSeries) -> bool {
        self.common_region(other).terms == other.common_region(self).terms
    }

    /// Leading coefficient scaled to 1.
    pub fn make_monic(&self) -> Result<UTSeries> {
        match self.lead() {
            Some((_, _, c)) => Ok(self.scale(&c.recip())),
            None => math("cannot normalize a series that vanishes to precision"),
        }
    }
}

impl fmt::Display for UTSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (n, (&(b, a), c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*u^{a}*t^{b}")?;
        }
        if self.tail_prec != EXACT {
            write!(f, " + O(t^{})", self.tail_prec)?;
        }
        if self.u_prec != EXACT_U {
            write!(f, " + O(u^{})", self.u_prec)?;
        }
        if self.diag_prec != EXACT {
            write!(f, " + O(a+b >= {})", self.diag_prec)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UTSeriesWire {
    pub tail_prec: Option<i64>,
    #[serde(default)]
    pub u_prec: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diag_prec: Option<i64>,
    /// `(a, b, c)` for `c u^a t^b`.
    pub terms: Vec<(u32, i64, String)>,
}

impl From<UTSeries> for UTSeriesWire {
    fn from(s: UTSeries) -> Self {
        UTSeriesWire {
            tail_prec: (s.tail_prec != EXACT).then_some(s.tail_prec),
            u_prec: (s.u_prec != EXACT_U).then_some(s.u_prec),
            diag_prec: (s.diag_prec != EXACT).then_some(s.diag_prec),
            terms: s.terms().map(|((a, b), c)| (a, b, fmt_rat(c))).collect(),
        }
    }
}

impl TryFrom<UTSeriesWire> for UTSeries {
    type Error = Error;
    fn try_from(w: UTSeriesWire) -> Result<Self> {
        let mut s = UTSeries::zero(w.tail_prec.unwrap_or(EXACT), w.u_prec.unwrap_or(EXACT_U))
            .with_diag(w.diag_prec.unwrap_or(EXACT));
        for (a, b, c) in &w.terms {
            if !s.knows(*a, *b) {
                return format(format!("term u^{a} t^{b} lies outside the known region"));
            }
            if s.terms.contains_key(&(*b, *a)) {
                return format(format!("duplicate term u^{a} t^{b}"));
            }
            let c = parse_rat(c)?;
            if !c.is_zero() {
                s.terms.insert((*b, *a), c);
            }
        }
        Ok(s)
    }
}

fn check_cone(v: &ZSeries) -> Result<()> {
    let cert = check_a_zseries(v, &Rat::one())?;
    match cert.witness {
        None => Ok(()),
        Some(w) => math(format!(
            "cone violation: z1^-{} z2^{} lies outside the A_1 cone of the lowest term",
            w.i, -w.j
        )),
    }
}

/// `z1^{-i} z2^{j} -> u^i t^{j-i}`.
///
/// A series known below `z2^T` with `i <= I` is known for `a <= I`,
/// `a + b < T`; when the series has no `i`-bound of its own, `u_cap`
/// supplies one.
pub fn psi1(v: &ZSeries, u_cap: u32) -> Result<UTSeries> {
    check_cone(v)?;
    let mut out = if v.tail() == EXACT && v.i_bound().is_none() {
        UTSeries::exact_zero()
    } else {
        let ib = v.i_bound().map_or(u_cap, |b| b.min(u_cap));
        UTSeries::zero(v.tail(), ib + 1).with_diag(v.tail())
    };
    for ((i, j), c) in v.terms() {
        out.add_term(i, j - i as i64, c.clone());
    }
    Ok(out)
}

/// `u^a t^b -> z1^{-a} z2^{a+b}`.
pub fn psi1_inv(v: &UTSeries) -> Result<ZSeries> {
    let ib = (v.u_prec != EXACT_U).then(|| v.u_prec.saturating_sub(1));
    // a >= 0 only raises the z2-exponent, so the t-tail is a safe z2-tail
    let mut out = ZSeries::zero(v.tail_prec.min(v.diag_prec)).with_i_bound(ib);
    for ((a, b), c) in v.terms() {
        out.add_term(a, b + a as i64, c.clone());
    }
    check_cone(&out)?;
    Ok(out)
}

/// Products of the generators up to `cutoff` factors, reduced to a spanning
/// set with distinct `nu`-leading terms.
pub fn ring_closure(gens: &[UTSeries], cutoff: u32) -> Vec<UTSeries> {
    let mut level: Vec<(usize, UTSeries)> = gens.iter().cloned().enumerate().collect();
    let mut words: Vec<UTSeries> = gens.to_vec();
    for _ in 1..cutoff {
        // multisets only: extend a word by generators of index >= its last
        let next: Vec<(usize, UTSeries)> = level
            .iter()
            .flat_map(|(last, w)| (*last..gens.len()).map(move |g| (g, w.mul(&gens[g]))))
            .collect();
        words.extend(next.iter().map(|(_, w)| w.clone()));
        level = next;
    }
    nu_echelon(&words)
}

/// Gaussian elimination on `nu`-leading terms.
pub fn nu_echelon(vs: &[UTSeries]) -> Vec<UTSeries> {
    let mut pivots: BTreeMap<(i64, u32), UTSeries> = BTreeMap::new();
    for v in vs {
        let mut r = v.clone();
        while let Some((a, b, c)) = r.lead() {
            match pivots.get(&(b, a)) {
                Some(p) => r = r.sub(&p.scale(&c)),
                None => break,
            }
        }
        if let Ok(m) = r.make_monic() {
            let (a, b, _) = m.lead().expect("nonzero");
            pivots.insert((b, a), m);
        }
    }
    pivots.into_values().collect()
}

/// `N_A`, `Ñ_A` and the admissibility flags of a truncated closure.
///
/// Gcds run over `|nu_t|`; larger cutoffs can only lower them, so the values
/// are upper bounds at the cutoff used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NaInvariants {
    pub n_a: u64,
    pub tilde_n_a: u64,
    pub admissible: bool,
    pub strongly_admissible: bool,
    /// Some element has `nu = (1, *)`.
    pub u_witness: Option<Valuation2>,
}

pub fn invariants_na(closure: &[UTSeries]) -> Result<NaInvariants> {
    if closure.is_empty() {
        return math("empty closure");
    }
    let mut n_a = 0u64;
    let mut tilde = 0u64;
    let mut u_witness = None;
    for v in closure {
        let nu = match v.nu() {
            Ok(nu) => nu,
            Err(_) => continue,
        };
        let t = nu.nu_t.unsigned_abs();
        tilde = tilde.gcd(&t);
        if nu.nu_u == 0 {
            n_a = n_a.gcd(&t);
        }
        if nu.nu_u == 1 && u_witness.is_none() {
            u_witness = Some(nu);
        }
    }
    let admissible = n_a > 0 && u_witness.is_some();
    Ok(NaInvariants {
        n_a,
        tilde_n_a: tilde,
        admissible,
        strongly_admissible: admissible && tilde == n_a,
        u_witness,
    })
}

/// `dim (W ∩ t^i k((u))[[t]]) / (W ∩ t^j k((u))[[t]])` for the span of
/// `space`.
pub fn filtration_dims(space: &[UTSeries], i: i64, j: i64) -> Result<usize> {
    if i >= j {
        return math("filtration_dims needs i < j");
    }
    let ech = nu_echelon(space);
    if ech.len() < space.iter().filter(|v| !v.is_zero()).count() {
        // a generator reduced to zero inside its known region
        if ech.iter().chain(space).any(|v| !v.is_exact()) {
            return math("inconclusive: a generator vanishes to precision; raise the cutoff");
        }
    }
    if space.iter().any(|v| v.is_zero() && !v.is_exact()) {
        return math("inconclusive: a generator vanishes to precision; raise the cutoff");
    }
    Ok(ech
        .iter()
        .filter(|v| {
            let b = v.lead().expect("echelon elements are nonzero").1;
            i <= b && b < j
        })
        .count())
}

/// Local parameters `t'`, `u'` with `nu(t') = (0, N_A)`, `nu(u') = (1, 0)`.
#[derive(Clone, Debug)]
pub struct Recoordinatization {
    pub t_prime: UTSeries,
    pub u_prime: UTSeries,
    pub n_a: u64,
    t_prime_inv: UTSeries,
}

impl Recoordinatization {
    /// `u'^p t'^l`.
    pub fn monomial(&self, p: u32, l: i64) -> UTSeries {
        let t = if l >= 0 {
            self.t_prime.pow(l as u32)
        } else {
            self.t_prime_inv.pow((-l) as u32)
        };
        self.u_prime.pow(p).mul(&t)
    }

    /// Coefficients `c_{p,l}` with `v = sum c_{p,l} u'^p t'^l` on the known
    /// region of `v`, by subtracting leading terms.
    pub fn rewrite(&self, v: &UTSeries) -> Result<BTreeMap<(u32, i64), Rat>> {
        let n = self.n_a as i64;
        let mut out = BTreeMap::new();
        let mut r = v.clone();
        let budget = 100_000;
        for _ in 0..budget {
            let (p, q, c) = match r.lead() {
                Some(l) => l,
                None => return Ok(out),
            };
            if q % n != 0 {
                return math(format!("t-exponent {q} is not a multiple of N_A = {n}"));
            }
            let m = self.monomial(p, q / n);
            let lc = m.coeff(p, q);
            if lc.is_zero() {
                return math("u'^p t'^l lost its leading term to truncation; raise the cutoff");
            }
            let k = &c / &lc;
            r = r.sub(&m.scale(&k));
            *out.entry((p, q / n)).or_insert_with(Rat::zero) += k;
        }
        math("rewrite did not terminate within its budget")
    }

    /// `sum c_{p,l} u'^p t'^l`.
    pub fn expand(&self, coeffs: &BTreeMap<(u32, i64), Rat>) -> UTSeries {
        let mut acc = UTSeries::exact_zero();
        for (&(p, l), c) in coeffs {
            acc = acc.add(&self.monomial(p, l).scale(c));
        }
        acc
    }
}

/// `(g, x)` with `sum x_i v_i = g = gcd(v)`, `g >= 0`.
fn ext_gcd_vec(v: &[i64]) -> (i64, Vec<i64>) {
    let mut g = 0i64;
    let mut xs: Vec<i64> = Vec::with_capacity(v.len());
    for &b in v {
        let e = g.extended_gcd(&b);
        for x in xs.iter_mut() {
            *x *= e.x;
        }
        xs.push(e.y);
        g = e.gcd;
    }
    if g < 0 {
        g = -g;
        for x in xs.iter_mut() {
            *x = -*x;
        }
    }
    (g, xs)
}

/// Builds `t'` from a gcd combination of the `nu = (0, *)` elements and
/// `u' = c t'^{-nu_t(c)/N_A}` from a `nu = (1, *)` element `c`.
///
/// Inverses are taken for `u^{< u_cap}` and `depth` orders of `t`.
pub fn recoordinatize(closure: &[UTSeries], n_a: u64, u_cap: u32, depth: i64) -> Result<Recoordinatization> {
    let inv = invariants_na(closure)?;
    if !inv.strongly_admissible {
        return math(format!(
            "closure is not strongly admissible (N_A = {}, Ñ_A = {})",
            inv.n_a, inv.tilde_n_a
        ));
    }
    if inv.n_a != n_a {
        return math(format!("N_A of the closure is {}, not {n_a}", inv.n_a));
    }
    let zeros: Vec<&UTSeries> = closure
        .iter()
        .filter(|v| v.nu().is_ok_and(|nu| nu.nu_u == 0 && nu.nu_t != 0))
        .collect();
    let ts: Vec<i64> = zeros.iter().map(|v| v.nu().expect("filtered").nu_t).collect();
    let (g, xs) = ext_gcd_vec(&ts);
    debug_assert_eq!(g as u64, n_a);
    let mut t_prime = UTSeries::monomial(0, 0, Rat::one());
    for (v, &x) in zeros.iter().zip(&xs) {
        let f = match x.cmp(&0) {
            std::cmp::Ordering::Equal => continue,
            std::cmp::Ordering::Greater => v.pow(x as u32),
            std::cmp::Ordering::Less => v.inverse(u_cap, depth)?.pow((-x) as u32),
        };
        t_prime = t_prime.mul(&f);
    }
    let t_prime = t_prime.make_monic()?;
    let t_prime_inv = t_prime.inverse(u_cap, depth)?;
    let c = closure
        .iter()
        .find(|v| v.nu().is_ok_and(|nu| nu.nu_u == 1))
        .expect("admissible closures have a u-witness");
    let e = c.nu()?.nu_t / n_a as i64;
    let shift = if e > 0 { t_prime_inv.pow(e as u32) } else { t_prime.pow((-e) as u32) };
    let u_prime = c.mul(&shift).make_monic()?;
    Ok(Recoordinatization {
        t_prime,
        u_prime,
        n_a,
        t_prime_inv,
    })
}

/// A validated Schur pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchurPairData {
    pub a_gens: Vec<UTSeries>,
    pub w_basis: Vec<UTSeries>,
    pub rank_r: u64,
    pub n_a: u64,
    pub tilde_n_a: u64,
    pub cutoffs: Cutoffs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cutoffs {
    /// Row indices `(i, j)` of `psi1^-1(W)` that are checked.
    pub bounds: Bounds,
    /// Maximal number of generator factors in the closure.
    pub words: u32,
}

#[derive(Clone, Debug)]
pub struct SchurValidation {
    pub data: SchurPairData,
    pub report: Report,
}

impl SchurValidation {
    pub fn is_valid(&self) -> bool {
        self.report.verdict() == Verdict::Pass
    }
}

/// Support, stabilizer and admissibility checks, each reported under the
/// clause it belongs to.
///
/// Transcendence degree two is replaced by a checkable surrogate: the
/// closure has elements with `nu = (0, *)`, `nu_t != 0`, and `nu = (1, *)`.
pub fn validate_schur_pair(a_gens: &[UTSeries], w_basis: &[UTSeries], cutoffs: Cutoffs) -> Result<SchurValidation> {
    let mut report = Report::default();
    let bounds = cutoffs.bounds;

    let mut w_z = Vec::new();
    let mut cone_fail = None;
    for v in w_basis {
        match psi1_inv(v) {
            Ok(z) => w_z.push(z),
            Err(e) => {
                cone_fail = Some(e.to_string());
                break;
            }
        }
    }
    let mut a_z = Vec::new();
    for a in a_gens {
        match psi1_inv(a) {
            Ok(z) => a_z.push(z),
            Err(e) => {
                cone_fail.get_or_insert(format!("A: {e}"));
            }
        }
    }
    let w: Option<SubspaceW> = match cone_fail {
        Some(msg) => {
            report.push(Check::new("support", Verdict::Fail).with_witness(msg));
            None
        }
        None => match echelon_basis(&w_z, bounds) {
            Ok(w) => {
                report.push(Check::new("support", Verdict::Pass));
                Some(w)
            }
            Err(e) => {
                report.push(Check::new("support", Verdict::Fail).with_witness(e.to_string()));
                None
            }
        },
    };
    // support of A: nonnegative powers of u only is built in; A must not
    // reach beyond the cone checked above
    match &w {
        Some(w) => {
            let mut status = Verdict::Pass;
            let mut witness = None;
            for (n, a) in a_z.iter().enumerate() {
                let r = stabilizes_by_series(w, a)?;
                if r.verdict == Verdict::Fail {
                    status = Verdict::Fail;
                    let ((i, j), rem) = r.witness.expect("failures carry a witness");
                    witness = Some(format!("generator {n} moves w_{{{i},{j}}} out of W: remainder {rem}"));
                    break;
                }
                status = status.and(r.verdict);
            }
            let mut c = Check::new("stabilizer", status);
            if let Some(wi) = witness {
                c = c.with_witness(wi);
            }
            report.push(c);
        }
        None => report.push(Check::new("stabilizer", Verdict::Inconclusive).with_witness("support check failed")),
    }

    let closure = ring_closure(a_gens, cutoffs.words);
    let inv = invariants_na(&closure).unwrap_or(NaInvariants {
        n_a: 0,
        tilde_n_a: 0,
        admissible: false,
        strongly_admissible: false,
        u_witness: None,
    });
    let note = format!("N_A = {}, Ñ_A = {} at word cutoff {}", inv.n_a, inv.tilde_n_a, cutoffs.words);
    report.push(Check::new("admissible", Verdict::from_bool(inv.admissible)).with_witness(note.clone()));
    report.push(Check::new("strongly_admissible", Verdict::from_bool(inv.strongly_admissible)).with_witness(note));
    let dirs: BTreeSet<u32> = closure
        .iter()
        .filter_map(|v| v.nu().ok())
        .filter(|nu| nu.nu_u == 1 || nu.nu_t != 0)
        .map(|nu| nu.nu_u.min(1))
        .collect();
    report.push(
        Check::new("trdeg_surrogate", Verdict::from_bool(dirs.len() == 2))
            .with_witness("surrogate: elements with nu = (0,*) and nu = (1,*) exist; transcendence degree itself is not decided"),
    );

    Ok(SchurValidation {
        data: SchurPairData {
            a_gens: a_gens.to_vec(),
            w_basis: w_basis.to_vec(),
            rank_r: inv.n_a,
            n_a: inv.n_a,
            tilde_n_a: inv.tilde_n_a,
            cutoffs,
        },
        report,
    })
}

/// `psi1` of the canonical rows of a subspace.
pub fn psi1_space(w: &SubspaceW, u_cap: u32) -> Result<Vec<UTSeries>> {
    w.basis().map(|(_, r)| psi1(r, u_cap)).collect()
}

/// The subspace `<1 + t, t^{-i} u^j : i >= 1, 0 <= j <= i>`, as rows
/// `psi1(z1^{-a} z2^{-b})` within `bounds`.
pub fn toric_w(bounds: Bounds) -> Vec<UTSeries> {
    bounds
        .iter()
        .map(|(a, b)| {
            let mut r = UTSeries::monomial(a, -((a + b) as i64), Rat::one());
            if (a, b) == (0, 0) {
                r.add_term(0, 1, Rat::one());
            }
            r
        })
        .collect()
}

/// `{t^-2, u t^-2, t^-3}`.
pub fn toric_a() -> Vec<UTSeries> {
    vec![
        UTSeries::monomial(0, -2, Rat::one()),
        UTSeries::monomial(1, -2, Rat::one()),
        UTSeries::monomial(0, -3, Rat::one()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn m(a: u32, b: i64) -> UTSeries {
        UTSeries::monomial(a, b, rat(1))
    }

    #[test]
    fn psi1_examples() {
        let v = psi1(&ZSeries::monomial(1, -1, rat(1)), 4).unwrap();
        assert_eq!(v, m(1, -2));
        assert_eq!(psi1(&ZSeries::monomial(0, 1, rat(1)), 4).unwrap(), m(0, 1));
        assert_eq!(psi1(&ZSeries::monomial(2, 3, rat(1)), 4).unwrap(), m(2, 1));
        let z = ZSeries::from_terms([((0, 0), rat(1)), ((2, 3), rat(2))], EXACT);
        assert_eq!(psi1_inv(&psi1(&z, 4).unwrap()).unwrap(), z);
        // z1^-3 z2^1 sits outside the cone of the lowest term 1
        let bad = ZSeries::from_terms([((0, 0), rat(1)), ((3, 1), rat(1))], EXACT);
        assert!(psi1(&bad, 4).is_err());
    }

    #[test]
    fn valuation_examples() {
        let a = m(2, 3).add(&m(5, 3)).add(&m(0, 4));
        assert_eq!(a.nu().unwrap(), Valuation2 { nu_u: 2, nu_t: 3 });
        assert_eq!(m(0, 0).nu().unwrap(), Valuation2 { nu_u: 0, nu_t: 0 });
        assert_eq!(m(1, -2).nu().unwrap(), Valuation2 { nu_u: 1, nu_t: -2 });
        assert!(UTSeries::exact_zero().nu().is_err());
    }

    #[test]
    fn closures() {
        let c = ring_closure(&[m(0, -1)], 3);
        assert_eq!(c.len(), 3);
        let c = ring_closure(&[m(0, -2), m(0, -3)], 2);
        let leads: BTreeSet<i64> = c.iter().map(|v| v.nu().unwrap().nu_t).collect();
        for b in [-4, -5, -6] {
            assert!(leads.contains(&b));
        }
        let c = ring_closure(&[m(0, -2), m(1, -2)], 2);
        assert!(c.iter().any(|v| v.nu().unwrap() == Valuation2 { nu_u: 2, nu_t: -4 }));
    }

    #[test]
    fn invariants() {
        let i = invariants_na(&ring_closure(&toric_a(), 3)).unwrap();
        assert_eq!((i.n_a, i.tilde_n_a, i.admissible, i.strongly_admissible), (1, 1, true, true));
        let i = invariants_na(&ring_closure(&[m(0, -2)], 3)).unwrap();
        assert_eq!(i.n_a, 2);
        assert!(!i.admissible);
        let i = invariants_na(&ring_closure(&[m(0, -4), m(0, -6), m(1, -2)], 3)).unwrap();
        assert_eq!((i.n_a, i.tilde_n_a, i.admissible), (2, 2, true));
    }

    #[test]
    fn filtration() {
        let sp = [m(0, 0), m(0, -1), m(1, -1)];
        assert_eq!(filtration_dims(&sp, -1, 1).unwrap(), 3);
        assert_eq!(filtration_dims(&sp, 0, 1).unwrap(), 1);
        assert!(filtration_dims(&sp, 1, 1).is_err());
    }

    #[test]
    fn recoordinatize_examples() {
        let cl = ring_closure(&toric_a(), 2);
        let r = recoordinatize(&cl, 1, 8, 8).unwrap();
        assert!(r.t_prime.agrees_with(&m(0, 1)), "{}", r.t_prime);
        assert!(r.u_prime.agrees_with(&m(1, 0)), "{}", r.u_prime);
        let v = m(0, -2).add(&m(3, 1).scale(&rat(5)));
        let co = r.rewrite(&v).unwrap();
        assert!(r.expand(&co).agrees_with(&v));

        let cl = ring_closure(&[m(0, -4), m(0, -6), m(1, -2)], 3);
        let r = recoordinatize(&cl, 2, 8, 8).unwrap();
        assert_eq!(r.t_prime.nu().unwrap(), Valuation2 { nu_u: 0, nu_t: 2 });
        assert_eq!(r.u_prime.nu().unwrap(), Valuation2 { nu_u: 1, nu_t: 0 });
    }

    #[test]
    fn inverse_of_a_non_monomial() {
        let v = m(0, -2).add(&m(0, -1)).add(&m(1, -2));
        let w = v.inverse(6, 6).unwrap();
        let one = v.mul(&w);
        assert!(one.agrees_with(&m(0, 0)), "{one}");
        assert!(one.tail_prec() >= 4);
    }

    #[test]
    fn toric_pair_validates() {
        let b = Bounds::rect(4, 4);
        let v = validate_schur_pair(&toric_a(), &toric_w(b), Cutoffs { bounds: b, words: 3 }).unwrap();
        assert!(v.is_valid(), "{:?}", v.report);
        assert_eq!(v.data.rank_r, 1);
        let bad = vec![m(0, -2), m(1, -1)];
        let v = validate_schur_pair(&bad, &toric_w(b), Cutoffs { bounds: b, words: 3 }).unwrap();
        assert!(!v.is_valid());
    }
}
