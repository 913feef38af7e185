//! Truncated power series in `x1, x2` over the rationals.
//!
//! An [`XSeries`] stores the terms `c x1^i x2^j` with `i + j < prec` and
//! promises nothing about higher total degrees.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{format, math, Error, Result};
use crate::rat::{fmt_rat, parse_rat, rat, Rat};

/// Exponent pair compared anti-lexicographically: second coordinate first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GammaDeg {
    pub d1: i64,
    pub d2: i64,
}

impl GammaDeg {
    pub fn new(d1: i64, d2: i64) -> Self {
        GammaDeg { d1, d2 }
    }
}

impl Ord for GammaDeg {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.d2, self.d1).cmp(&(other.d2, other.d1))
    }
}

impl PartialOrd for GammaDeg {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::ops::Add for GammaDeg {
    type Output = GammaDeg;
    fn add(self, o: GammaDeg) -> GammaDeg {
        GammaDeg::new(self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl fmt::Display for GammaDeg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.d1, self.d2)
    }
}

/// M-adic order. `AtLeast(n)` means the series vanishes to its precision `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MOrder {
    Finite(u32),
    AtLeast(u32),
}

impl MOrder {
    /// The order as a lower bound usable in precision arithmetic.
    pub fn floor(self) -> u32 {
        match self {
            MOrder::Finite(n) | MOrder::AtLeast(n) => n,
        }
    }
}

/// 2x2 rational matrix, row-major.
pub type Mat2 = [[Rat; 2]; 2];

pub fn det2(m: &Mat2) -> Rat {
    &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0]
}

pub fn inv2(m: &Mat2) -> Result<Mat2> {
    let d = det2(m);
    if d.is_zero() {
        return math("singular coordinate change");
    }
    Ok([
        [&m[1][1] / &d, -&m[0][1] / &d],
        [-&m[1][0] / &d, &m[0][0] / &d],
    ])
}

pub fn transpose2(m: &Mat2) -> Mat2 {
    [
        [m[0][0].clone(), m[1][0].clone()],
        [m[0][1].clone(), m[1][1].clone()],
    ]
}

pub fn mat_mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub fn identity2() -> Mat2 {
    [[rat(1), rat(0)], [rat(0), rat(1)]]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "XSeriesWire", into = "XSeriesWire")]
pub struct XSeries {
    terms: BTreeMap<(u32, u32), Rat>,
    prec: u32,
}

impl XSeries {
    pub fn zero(prec: u32) -> Self {
        XSeries {
            terms: BTreeMap::new(),
            prec,
        }
    }

    pub fn one(prec: u32) -> Self {
        Self::constant(rat(1), prec)
    }

    pub fn constant(c: Rat, prec: u32) -> Self {
        Self::monomial(0, 0, c, prec)
    }

    pub fn monomial(i: u32, j: u32, c: Rat, prec: u32) -> Self {
        let mut s = Self::zero(prec);
        s.add_term(i, j, c);
        s
    }

    /// Builds a series, dropping zero coefficients and terms beyond `prec`.
    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), Rat)>>(terms: I, prec: u32) -> Self {
        let mut s = Self::zero(prec);
        for ((i, j), c) in terms {
            s.add_term(i, j, c);
        }
        s
    }

    /// Adds `c x1^i x2^j`; silently ignored beyond the precision.
    pub fn add_term(&mut self, i: u32, j: u32, c: Rat) {
        if i + j >= self.prec || c.is_zero() {
            return;
        }
        let e = self.terms.entry((i, j)).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rat {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff(0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&(i, j)| i == 0 && j == 0)
    }

    /// True if no stored term involves `x1`.
    pub fn is_x1_free(&self) -> bool {
        self.terms.keys().all(|&(i, _)| i == 0)
    }

    pub fn is_x2_free(&self) -> bool {
        self.terms.keys().all(|&(_, j)| j == 0)
    }

    /// Lowers the precision to `p` (never raises it).
    pub fn truncate(&self, p: u32) -> Self {
        let p = p.min(self.prec);
        XSeries {
            terms: self
                .terms
                .iter()
                .filter(|(&(i, j), _)| i + j < p)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
            prec: p,
        }
    }

    /// Equality of two series on their common precision.
    pub fn agrees_with(&self, other: &XSeries) -> bool {
        let p = self.prec.min(other.prec);
        self.truncate(p) == other.truncate(p)
    }

    pub fn add(&self, other: &XSeries) -> XSeries {
        let mut out = self.truncate(other.prec);
        for (&(i, j), c) in &other.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }

    pub fn neg(&self) -> XSeries {
        XSeries {
            terms: self.terms.iter().map(|(k, v)| (*k, -v)).collect(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &XSeries) -> XSeries {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> XSeries {
        if c.is_zero() {
            return XSeries::zero(self.prec);
        }
        XSeries {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
            prec: self.prec,
        }
    }

    /// Multiplies by `x1^a x2^b`, which raises the precision by `a + b`.
    pub fn shift(&self, a: u32, b: u32) -> XSeries {
        XSeries {
            terms: self
                .terms
                .iter()
                .map(|(&(i, j), v)| ((i + a, j + b), v.clone()))
                .collect(),
            prec: self.prec + a + b,
        }
    }

    /// Cauchy product at precision `min(a.prec, b.prec)`.
    pub fn mul(&self, other: &XSeries) -> XSeries {
        mul_to(self, other, self.prec.min(other.prec))
    }

    pub fn pow(&self, n: u32) -> XSeries {
        let mut acc = XSeries::one(self.prec);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn ord_m(&self) -> MOrder {
        match self.terms.keys().map(|&(i, j)| i + j).min() {
            Some(d) => MOrder::Finite(d),
            None => MOrder::AtLeast(self.prec),
        }
    }

    pub fn ord_gamma(&self) -> Result<GammaDeg> {
        self.terms
            .keys()
            .map(|&(i, j)| GammaDeg::new(i as i64, j as i64))
            .min()
            .ok_or_else(|| Error::Math("zero series has no Γ-order".into()))
    }

    /// Partial derivative along `axis` (1 or 2). Costs one degree of precision.
    pub fn d_dx(&self, axis: u8) -> XSeries {
        let mut out = XSeries::zero(self.prec.saturating_sub(1));
        for (&(i, j), c) in &self.terms {
            match axis {
                1 if i > 0 => out.add_term(i - 1, j, c * rat(i as i64)),
                2 if j > 0 => out.add_term(i, j - 1, c * rat(j as i64)),
                _ => {}
            }
        }
        out
    }

    pub fn d_dx_n(&self, axis: u8, n: u32) -> XSeries {
        let mut out = self.clone();
        for _ in 0..n {
            out = out.d_dx(axis);
        }
        out
    }

    /// Antiderivative along `axis` with zero constant of integration.
    pub fn antideriv(&self, axis: u8) -> XSeries {
        let mut out = XSeries::zero(self.prec + 1);
        for (&(i, j), c) in &self.terms {
            match axis {
                1 => out.add_term(i + 1, j, c / rat(i as i64 + 1)),
                _ => out.add_term(i, j + 1, c / rat(j as i64 + 1)),
            }
        }
        out
    }

    pub fn invert_unit(&self) -> Result<XSeries> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return math("not a unit");
        }
        let inv0 = c0.recip();
        // self = c0 (1 + y) with ord(y) >= 1
        let y = self.scale(&inv0).sub(&XSeries::one(self.prec));
        let neg_y = y.neg();
        let mut acc = XSeries::one(self.prec);
        let mut pow = XSeries::one(self.prec);
        for _ in 1..self.prec {
            pow = pow.mul(&neg_y);
            if pow.is_zero() {
                break;
            }
            acc = acc.add(&pow);
        }
        Ok(acc.scale(&inv0))
    }

    pub fn exp_series(&self) -> Result<XSeries> {
        if !self.constant_term().is_zero() {
            return math("exponent must have positive M-order");
        }
        let mut acc = XSeries::one(self.prec);
        let mut term = XSeries::one(self.prec);
        for k in 1..self.prec {
            term = term.mul(self).scale(&Rat::new(1.into(), k.into()));
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Substitutes `x_i = sum_j m[j][i] x'_j`, i.e. the row vector `x = x' m`.
    pub fn linear_substitute(&self, m: &Mat2) -> Result<XSeries> {
        if det2(m).is_zero() {
            return math("singular coordinate change");
        }
        let l1 = hom_linear(&m[0][0], &m[1][0]);
        let l2 = hom_linear(&m[0][1], &m[1][1]);
        let mut p1 = vec![hom_one()];
        let mut p2 = vec![hom_one()];
        let mut out = XSeries::zero(self.prec);
        for (&(i, j), c) in &self.terms {
            while p1.len() <= i as usize {
                let next = hom_mul(p1.last().unwrap(), &l1);
                p1.push(next);
            }
            while p2.len() <= j as usize {
                let next = hom_mul(p2.last().unwrap(), &l2);
                p2.push(next);
            }
            for (&(a, b), v) in &hom_mul(&p1[i as usize], &p2[j as usize]) {
                out.add_term(a, b, c * v);
            }
        }
        Ok(out)
    }

    /// Evaluates at `x2 = 0`.
    pub fn at_x2_zero(&self) -> XSeries {
        XSeries {
            terms: self
                .terms
                .iter()
                .filter(|(&(_, j), _)| j == 0)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
            prec: self.prec,
        }
    }
}

/// Truncated Cauchy product keeping total degrees below `limit`.
///
/// The caller is responsible for `limit` being justified by the inputs.
pub(crate) fn mul_to(a: &XSeries, b: &XSeries, limit: u32) -> XSeries {
    let mut out = XSeries::zero(limit);
    if a.is_zero() || b.is_zero() {
        return out;
    }
    let size = (limit as usize * (limit as usize + 1)) / 2;
    let idx = |i: u32, j: u32| {
        let d = (i + j) as usize;
        d * (d + 1) / 2 + j as usize
    };
    let mut acc: Vec<Rat> = vec![Rat::zero(); size];
    let mut touched = vec![false; size];
    for (&(i1, j1), c1) in &a.terms {
        if i1 + j1 >= limit {
            continue;
        }
        for (&(i2, j2), c2) in &b.terms {
            let (i, j) = (i1 + i2, j1 + j2);
            if i + j >= limit {
                continue;
            }
            let k = idx(i, j);
            acc[k] += c1 * c2;
            touched[k] = true;
        }
    }
    for d in 0..limit {
        for j in 0..=d {
            let k = idx(d - j, j);
            if touched[k] && !acc[k].is_zero() {
                out.terms.insert((d - j, j), std::mem::take(&mut acc[k]));
            }
        }
    }
    out
}

type Hom = BTreeMap<(u32, u32), Rat>;

fn hom_one() -> Hom {
    let mut h = Hom::new();
    h.insert((0, 0), Rat::one());
    h
}

fn hom_linear(a: &Rat, b: &Rat) -> Hom {
    let mut h = Hom::new();
    if !a.is_zero() {
        h.insert((1, 0), a.clone());
    }
    if !b.is_zero() {
        h.insert((0, 1), b.clone());
    }
    h
}

fn hom_mul(a: &Hom, b: &Hom) -> Hom {
    let mut out = Hom::new();
    for (&(i1, j1), c1) in a {
        for (&(i2, j2), c2) in b {
            *out.entry((i1 + i2, j1 + j2)).or_insert_with(Rat::zero) += c1 * c2;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

impl fmt::Display for XSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        let mut first = true;
        for (&(i, j), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            if i > 0 {
                write!(f, "*x1^{i}")?;
            }
            if j > 0 {
                write!(f, "*x2^{j}")?;
            }
        }
        write!(f, " + O({})", self.prec)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XSeriesWire {
    pub prec: u32,
    pub terms: Vec<(u32, u32, String)>,
}

impl From<XSeries> for XSeriesWire {
    fn from(s: XSeries) -> Self {
        XSeriesWire {
            prec: s.prec,
            terms: s
                .terms
                .iter()
                .map(|(&(i, j), c)| (i, j, fmt_rat(c)))
                .collect(),
        }
    }
}

impl TryFrom<XSeriesWire> for XSeries {
    type Error = Error;
    fn try_from(w: XSeriesWire) -> Result<Self> {
        let mut s = XSeries::zero(w.prec);
        for (i, j, c) in &w.terms {
            if i + j >= w.prec {
                return format(format!("term x1^{i} x2^{j} lies beyond precision {}", w.prec));
            }
            if s.terms.contains_key(&(*i, *j)) {
                return format(format!("duplicate term x1^{i} x2^{j}"));
            }
            let c = parse_rat(c)?;
            if !c.is_zero() {
                s.terms.insert((*i, *j), c);
            }
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratio;

    fn x1(p: u32) -> XSeries {
        XSeries::monomial(1, 0, rat(1), p)
    }
    fn x2(p: u32) -> XSeries {
        XSeries::monomial(0, 1, rat(1), p)
    }

    #[test]
    fn difference_of_squares() {
        let one = XSeries::one(5);
        let a = one.add(&x1(5));
        let b = one.sub(&x1(5));
        let p = a.mul(&b);
        assert_eq!(p, one.sub(&x1(5).mul(&x1(5))));
    }

    #[test]
    fn truncation_drops_degree_three() {
        let one = XSeries::one(3);
        let a = one.add(&x2(3)).add(&x2(3).mul(&x2(3)));
        let b = one.sub(&x2(3));
        assert_eq!(a.mul(&b), XSeries::one(3));
    }

    #[test]
    fn orders() {
        let a = XSeries::from_terms([((2, 1), rat(1)), ((4, 0), rat(1))], 8);
        assert_eq!(a.ord_m(), MOrder::Finite(3));
        assert_eq!(XSeries::one(3).add(&x1(3)).ord_m(), MOrder::Finite(0));
        assert_eq!(XSeries::zero(6).ord_m(), MOrder::AtLeast(6));
        let b = XSeries::from_terms([((3, 0), rat(1)), ((0, 1), rat(1))], 8);
        assert_eq!(b.ord_gamma().unwrap(), GammaDeg::new(3, 0));
        let c = XSeries::from_terms([((1, 1), rat(1)), ((0, 2), rat(1))], 8);
        assert_eq!(c.ord_gamma().unwrap(), GammaDeg::new(1, 1));
        assert_eq!(
            XSeries::monomial(0, 5, rat(1), 8).ord_gamma().unwrap(),
            GammaDeg::new(0, 5)
        );
        assert!(XSeries::zero(4).ord_gamma().is_err());
    }

    #[test]
    fn derivatives_and_integrals() {
        let a = XSeries::monomial(2, 1, rat(1), 6);
        assert_eq!(a.d_dx(1), XSeries::monomial(1, 1, rat(2), 5));
        assert!(XSeries::constant(rat(7), 4).d_dx(1).is_zero());
        assert_eq!(XSeries::one(4).antideriv(1), x1(5));
        assert_eq!(
            XSeries::monomial(1, 1, rat(2), 5).antideriv(1),
            XSeries::monomial(2, 1, rat(1), 6)
        );
        // exp(x2) differentiates to itself with one degree lost
        let e = x2(7).exp_series().unwrap();
        assert_eq!(e.d_dx(2), e.truncate(6));
    }

    #[test]
    fn units_and_exponentials() {
        let geo = XSeries::one(4).sub(&x2(4)).invert_unit().unwrap();
        let expect = XSeries::from_terms((0..4).map(|j| ((0, j), rat(1))), 4);
        assert_eq!(geo, expect);
        assert_eq!(
            XSeries::constant(rat(2), 3).invert_unit().unwrap(),
            XSeries::constant(ratio(1, 2), 3)
        );
        assert!(x1(3).invert_unit().is_err());
        let u = XSeries::one(6).add(&x1(6)).add(&x2(6));
        assert_eq!(u.mul(&u.invert_unit().unwrap()), XSeries::one(6));
        assert_eq!(XSeries::zero(5).exp_series().unwrap(), XSeries::one(5));
        let e = x1(4).exp_series().unwrap();
        let expect = XSeries::from_terms(
            [
                ((0, 0), rat(1)),
                ((1, 0), rat(1)),
                ((2, 0), ratio(1, 2)),
                ((3, 0), ratio(1, 6)),
            ],
            4,
        );
        assert_eq!(e, expect);
        assert!(XSeries::one(3).exp_series().is_err());
    }

    #[test]
    fn coordinate_substitution() {
        let a = XSeries::from_terms([((1, 2), rat(3)), ((0, 0), rat(1))], 6);
        assert_eq!(a.linear_substitute(&identity2()).unwrap(), a);
        let swap = [[rat(0), rat(1)], [rat(1), rat(0)]];
        assert_eq!(x1(4).linear_substitute(&swap).unwrap(), x2(4));
        // x1 = x1' + x2', x2 = x2' turns x1 - x2 into x1'
        let m = [[rat(1), rat(0)], [rat(1), rat(1)]];
        assert_eq!(x1(4).sub(&x2(4)).linear_substitute(&m).unwrap(), x1(4));
        let sing = [[rat(1), rat(2)], [rat(2), rat(4)]];
        assert!(x1(4).linear_substitute(&sing).is_err());
    }

    #[test]
    fn json_round_trip() {
        let a = XSeries::from_terms([((1, 2), ratio(-3, 4)), ((0, 0), rat(1))], 6);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"prec":6,"terms":[[0,0,"1"],[1,2,"-3/4"]]}"#);
        let b: XSeries = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        assert!(serde_json::from_str::<XSeries>(r#"{"prec":2,"terms":[[1,1,"1"]]}"#).is_err());
    }
}
