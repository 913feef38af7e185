//! The completed ring of operators `sum_q a_q(x) d1^q` in one derivation.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{math, Result};
use crate::rat::{binom, rat, Rat};
use crate::series::{mul_to, MOrder, XSeries};

/// `sum_q a_q d1^q`, every coefficient known modulo `M^prec`.
///
/// Coefficients that vanish to the precision are not stored, which keeps the
/// representation finite for completed elements such as `:exp(-x1 d1):`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct D1Op {
    coeffs: BTreeMap<u32, XSeries>,
    prec: u32,
}

impl D1Op {
    pub fn zero(prec: u32) -> Self {
        D1Op {
            coeffs: BTreeMap::new(),
            prec,
        }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_series(0, XSeries::one(prec))
    }

    /// `d1^q` with coefficient 1.
    pub fn d1_pow(q: u32, prec: u32) -> Self {
        Self::from_series(q, XSeries::one(prec))
    }

    /// `f d1^q`, at the precision of `f`.
    pub fn from_series(q: u32, f: XSeries) -> Self {
        let mut out = D1Op::zero(f.prec());
        if !f.is_zero() {
            out.coeffs.insert(q, f);
        }
        out
    }

    /// Builds an operator; the precision is capped by every coefficient's.
    pub fn from_coeffs<I: IntoIterator<Item = (u32, XSeries)>>(coeffs: I, prec: u32) -> Self {
        let coeffs: Vec<(u32, XSeries)> = coeffs.into_iter().collect();
        let p = coeffs.iter().map(|(_, s)| s.prec()).fold(prec, u32::min);
        let mut out = D1Op::zero(p);
        for (q, s) in coeffs {
            out.add_coeff(q, &s);
        }
        out
    }

    fn add_coeff(&mut self, q: u32, s: &XSeries) {
        let s = s.truncate(self.prec);
        let merged = match self.coeffs.remove(&q) {
            Some(old) => old.add(&s),
            None => s,
        };
        if !merged.is_zero() {
            self.coeffs.insert(q, merged);
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&u32, &XSeries)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, q: u32) -> XSeries {
        self.coeffs
            .get(&q)
            .cloned()
            .unwrap_or_else(|| XSeries::zero(self.prec))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest stored power of `d1`.
    pub fn max_q(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn truncate(&self, p: u32) -> D1Op {
        let mut out = D1Op::zero(p.min(self.prec));
        for (&q, s) in &self.coeffs {
            out.add_coeff(q, s);
        }
        out
    }

    pub fn agrees_with(&self, other: &D1Op) -> bool {
        let p = self.prec.min(other.prec);
        self.truncate(p) == other.truncate(p)
    }

    pub fn add(&self, other: &D1Op) -> D1Op {
        let mut out = self.truncate(other.prec);
        for (&q, s) in &other.coeffs {
            out.add_coeff(q, s);
        }
        out
    }

    pub fn neg(&self) -> D1Op {
        D1Op {
            coeffs: self.coeffs.iter().map(|(q, s)| (*q, s.neg())).collect(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &D1Op) -> D1Op {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> D1Op {
        if c.is_zero() {
            return D1Op::zero(self.prec);
        }
        D1Op {
            coeffs: self.coeffs.iter().map(|(q, s)| (*q, s.scale(c))).collect(),
            prec: self.prec,
        }
    }

    /// Coefficient-wise partial derivative along `axis`.
    pub fn d_dx(&self, axis: u8) -> D1Op {
        let mut out = D1Op::zero(self.prec.saturating_sub(1));
        for (&q, s) in &self.coeffs {
            out.add_coeff(q, &s.d_dx(axis));
        }
        out
    }

    /// Coefficient-wise antiderivative along `axis`.
    pub fn antideriv(&self, axis: u8) -> D1Op {
        let mut out = D1Op::zero(self.prec + 1);
        for (&q, s) in &self.coeffs {
            out.add_coeff(q, &s.antideriv(axis));
        }
        out
    }

    /// Leibniz product.
    pub fn mul(&self, other: &D1Op) -> D1Op {
        d1_mul(self, other)
    }

    pub fn commutator(&self, other: &D1Op) -> D1Op {
        self.mul(other).sub(&other.mul(self))
    }

    /// Left multiplication by a function.
    pub fn mul_series_left(&self, f: &XSeries) -> D1Op {
        d1_mul(&D1Op::from_series(0, f.clone()), self)
    }

    /// True when every coefficient is a constant.
    pub fn is_constant_coeff(&self) -> bool {
        self.coeffs.values().all(|s| s.is_constant())
    }

    pub fn is_x1_free(&self) -> bool {
        self.coeffs.values().all(|s| s.is_x1_free())
    }

    /// Minimum M-order over the coefficients.
    pub fn min_ord(&self) -> MOrder {
        self.coeffs
            .values()
            .map(|s| s.ord_m())
            .min_by_key(|o| o.floor())
            .unwrap_or(MOrder::AtLeast(self.prec))
    }
}

/// `g_q = sum_{k,l} C(k,l) a_k d1^l(b_{q+l-k})`.
///
/// The output precision is `min(a.prec, ord(a_k) + b.prec - k)` over stored `k`:
/// applying `d1^l` to `b` costs `l` degrees, recovered by the order of `a_k`.
pub fn d1_mul(a: &D1Op, b: &D1Op) -> D1Op {
    let mut prec = a.prec;
    for (&k, ak) in &a.coeffs {
        let o = ak.ord_m().floor();
        prec = prec.min(o + b.prec.saturating_sub(k));
    }
    let mut out = D1Op::zero(prec);
    if prec == 0 || b.is_zero() {
        return out;
    }
    let max_l = a.max_q().unwrap_or(0);
    let derivs: BTreeMap<u32, Vec<XSeries>> = b
        .coeffs
        .iter()
        .map(|(&m, bm)| {
            let mut v = Vec::with_capacity(max_l as usize + 1);
            v.push(bm.clone());
            for l in 1..=max_l {
                let next = v[l as usize - 1].d_dx(1);
                v.push(next);
            }
            (m, v)
        })
        .collect();
    let mut acc: BTreeMap<u32, XSeries> = BTreeMap::new();
    for (&k, ak) in &a.coeffs {
        for l in 0..=k {
            let c = binom(k as i64, l);
            for (&m, dv) in &derivs {
                let d = &dv[l as usize];
                if d.is_zero() {
                    continue;
                }
                let term = mul_to(ak, d, prec).scale(&c);
                let q = m + k - l;
                let e = acc.entry(q).or_insert_with(|| XSeries::zero(prec));
                *e = e.add(&term);
            }
        }
    }
    for (q, s) in acc {
        out.add_coeff(q, &s);
    }
    out
}

/// Normal-ordered exponential `:exp(a):`.
///
/// The operator is exponentiated as a polynomial in a commuting symbol for
/// `d1` and then read back with all coefficients to the left. This is the
/// convergent meaning of `:exp(-x1 d1):`; it agrees with the plain
/// exponential series when the coefficients do not depend on `x1`.
pub fn op_exp(a: &D1Op) -> Result<D1Op> {
    if a.coeffs.values().any(|s| !s.constant_term().is_zero()) {
        return math("exponential does not converge in D̂₁");
    }
    let prec = a.prec;
    let mut acc: BTreeMap<u32, XSeries> = BTreeMap::new();
    acc.insert(0, XSeries::one(prec));
    let mut power: BTreeMap<u32, XSeries> = acc.clone();
    for n in 1..prec.max(1) {
        let mut next: BTreeMap<u32, XSeries> = BTreeMap::new();
        for (&q1, s1) in &power {
            for (&q2, s2) in &a.coeffs {
                let t = s1.mul(s2).scale(&Rat::new(1.into(), n.into()));
                if t.is_zero() {
                    continue;
                }
                let e = next.entry(q1 + q2).or_insert_with(|| XSeries::zero(prec));
                *e = e.add(&t);
            }
        }
        next.retain(|_, s| !s.is_zero());
        if next.is_empty() {
            break;
        }
        for (q, s) in &next {
            let e = acc.entry(*q).or_insert_with(|| XSeries::zero(prec));
            *e = e.add(s);
        }
        power = next;
    }
    Ok(D1Op::from_coeffs(acc, prec))
}

/// `:exp(-x1 d1):`, the operator `f(x1, x2) -> f(0, x2)`.
pub fn eval_at_x1_zero_op(prec: u32) -> D1Op {
    let a = D1Op::from_series(1, XSeries::monomial(1, 0, rat(-1), prec));
    op_exp(&a).expect("coefficient has positive order")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratio;

    fn x1(p: u32) -> XSeries {
        XSeries::monomial(1, 0, rat(1), p)
    }

    #[test]
    fn leibniz_on_x1() {
        let d = D1Op::d1_pow(1, 6);
        let x = D1Op::from_series(0, x1(6));
        let expect = D1Op::from_coeffs([(1, x1(6)), (0, XSeries::one(6))], 6);
        assert!(d1_mul(&d, &x).agrees_with(&expect));
    }

    #[test]
    fn euler_operator_squared() {
        let e = D1Op::from_series(1, x1(8));
        let sq = d1_mul(&e, &e);
        let expect = D1Op::from_coeffs(
            [(2, XSeries::monomial(2, 0, rat(1), 8)), (1, x1(8))],
            8,
        );
        assert_eq!(sq, expect);
        // apply both sides to x1^m: the Euler operator acts by m
        for m in 0..5u32 {
            let f = XSeries::monomial(m, 0, rat(1), 8);
            let mut applied = XSeries::zero(8);
            for (&q, s) in sq.coeffs() {
                applied = applied.add(&s.mul(&f.d_dx_n(1, q)).truncate(8));
            }
            assert!(applied.agrees_with(&f.scale(&rat((m * m) as i64))));
        }
    }

    #[test]
    fn unit_is_neutral() {
        let a = D1Op::from_coeffs([(2, x1(5)), (0, XSeries::constant(ratio(1, 3), 5))], 5);
        // d1^2 applied to an inexact 1 loses two degrees, x1 recovers one
        let r = d1_mul(&a, &D1Op::one(5));
        assert_eq!(r.prec(), 4);
        assert!(r.agrees_with(&a));
        assert_eq!(d1_mul(&D1Op::one(5), &a), a);
    }

    #[test]
    fn normal_ordered_exponential() {
        assert_eq!(op_exp(&D1Op::zero(5)).unwrap(), D1Op::one(5));
        let e = eval_at_x1_zero_op(6);
        for q in 0..6u32 {
            let f = crate::rat::factorial(q);
            let c = Rat::new(if q % 2 == 0 { 1.into() } else { (-1).into() }, f);
            assert_eq!(e.coeff(q), XSeries::monomial(q, 0, c, 6));
        }
        assert!(op_exp(&D1Op::one(4)).is_err());
    }

    #[test]
    fn exponential_of_x1_free_operator_inverts() {
        let a = D1Op::from_coeffs(
            [
                (1, XSeries::monomial(0, 1, rat(2), 7)),
                (0, XSeries::monomial(0, 2, rat(-1), 7)),
            ],
            7,
        );
        let p = d1_mul(&op_exp(&a).unwrap(), &op_exp(&a.neg()).unwrap());
        assert!(p.agrees_with(&D1Op::one(7)));
    }
}
