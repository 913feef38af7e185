//! Operators `sum_s p_s d2^s` with `p_s` in the completed `d1`-ring and
//! finitely many positive `s`.
//!
//! Slots below `window_lo` are unknown. Every slot from `window_lo` up to the
//! highest stored one is present (possibly zero, to carry its precision);
//! slots above the highest stored one are exactly zero.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::d1::{d1_mul, op_exp, D1Op};
use crate::error::{format, math, Error, Result};
use crate::rat::{binom, Rat};
use crate::series::{GammaDeg, XSeries};
use crate::verdict::Verdict;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EPlusWire", into = "EPlusWire")]
pub struct EPlusOp {
    slots: BTreeMap<i64, D1Op>,
    window_lo: i64,
}

impl EPlusOp {
    /// The zero operator, exact on every slot from `window_lo` up.
    pub fn zero(window_lo: i64) -> Self {
        EPlusOp {
            slots: BTreeMap::new(),
            window_lo,
        }
    }

    /// Builds an operator from explicit slots. Gaps between `window_lo` and the
    /// top slot are filled with zeros of precision `fill_prec`.
    pub fn from_slots<I: IntoIterator<Item = (i64, D1Op)>>(
        slots: I,
        window_lo: i64,
        fill_prec: u32,
    ) -> Self {
        let mut map: BTreeMap<i64, D1Op> = BTreeMap::new();
        for (s, d) in slots {
            if s < window_lo {
                continue;
            }
            let merged = match map.remove(&s) {
                Some(old) => old.add(&d),
                None => d,
            };
            map.insert(s, merged);
        }
        if let Some(&top) = map.keys().next_back() {
            for s in window_lo..top {
                map.entry(s).or_insert_with(|| D1Op::zero(fill_prec));
            }
        }
        let mut out = EPlusOp {
            slots: map,
            window_lo,
        };
        out.raise_window();
        out
    }

    /// `d d2^s` on the window `[window_lo, s]`; lower slots are exact zeros
    /// carried at the precision of `d`.
    pub fn monomial(d: D1Op, s: i64, window_lo: i64) -> Self {
        let p = d.prec();
        Self::from_slots([(s, d)], window_lo, p)
    }

    pub fn one(prec: u32, window_lo: i64) -> Self {
        Self::monomial(D1Op::one(prec), 0, window_lo)
    }

    pub fn d2_pow(s: i64, prec: u32, window_lo: i64) -> Self {
        Self::monomial(D1Op::one(prec), s, window_lo)
    }

    /// `f(x)` as a zeroth-order operator.
    pub fn function(f: XSeries, window_lo: i64) -> Self {
        Self::monomial(D1Op::from_series(0, f), 0, window_lo)
    }

    pub fn window_lo(&self) -> i64 {
        self.window_lo
    }

    /// Highest stored slot.
    pub fn top(&self) -> Option<i64> {
        self.slots.keys().next_back().copied()
    }

    /// Highest slot that is nonzero to its precision.
    pub fn top_nonzero(&self) -> Option<i64> {
        self.slots
            .iter()
            .rev()
            .find(|(_, d)| !d.is_zero())
            .map(|(s, _)| *s)
    }

    pub fn slots(&self) -> impl Iterator<Item = (&i64, &D1Op)> {
        self.slots.iter()
    }

    /// The coefficient of `d2^s`: `None` below the window, an exact zero
    /// above the top.
    pub fn slot(&self, s: i64) -> Option<D1Op> {
        if s < self.window_lo {
            return None;
        }
        match self.slots.get(&s) {
            Some(d) => Some(d.clone()),
            None => Some(D1Op::zero(self.exact_prec_hint())),
        }
    }

    pub fn slot_ref(&self, s: i64) -> Option<&D1Op> {
        self.slots.get(&s)
    }

    /// Precision of a slot; slots above the top are exact and report `None`.
    pub fn slot_prec(&self, s: i64) -> Option<u32> {
        self.slots.get(&s).map(|d| d.prec())
    }

    fn exact_prec_hint(&self) -> u32 {
        self.slots.values().map(|d| d.prec()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.slots.values().all(|d| d.is_zero())
    }

    /// Drops unknown slots at the bottom (precision zero).
    fn raise_window(&mut self) {
        while let Some((&s, d)) = self.slots.iter().next() {
            if d.prec() == 0 {
                self.slots.remove(&s);
                self.window_lo = s + 1;
            } else {
                break;
            }
        }
    }

    /// Forgets slots below `lo`.
    pub fn with_window(&self, lo: i64) -> EPlusOp {
        if lo <= self.window_lo {
            return self.clone();
        }
        EPlusOp {
            slots: self
                .slots
                .range(lo..)
                .map(|(s, d)| (*s, d.clone()))
                .collect(),
            window_lo: lo,
        }
    }

    /// Caps every slot's precision at `p`.
    pub fn truncate_prec(&self, p: u32) -> EPlusOp {
        let mut out = EPlusOp {
            slots: self
                .slots
                .iter()
                .map(|(s, d)| (*s, d.truncate(p)))
                .collect(),
            window_lo: self.window_lo,
        };
        out.raise_window();
        out
    }

    /// Lowest slot precision.
    pub fn min_prec(&self) -> u32 {
        self.slots.values().map(|d| d.prec()).min().unwrap_or(0)
    }

    /// Equality on the slots and degrees both sides claim.
    pub fn agrees_with(&self, other: &EPlusOp) -> bool {
        let lo = self.window_lo.max(other.window_lo);
        let hi = self.top().unwrap_or(lo - 1).max(other.top().unwrap_or(lo - 1));
        (lo..=hi).all(|s| match (self.slots.get(&s), other.slots.get(&s)) {
            (Some(a), Some(b)) => a.agrees_with(b),
            (Some(a), None) | (None, Some(a)) => a.is_zero(),
            (None, None) => true,
        })
    }

    /// Checks that every known slot vanishes to its precision.
    pub fn vanishes(&self) -> bool {
        self.is_zero()
    }

    pub fn add(&self, other: &EPlusOp) -> EPlusOp {
        let lo = self.window_lo.max(other.window_lo);
        let mut slots = BTreeMap::new();
        let hi = self.top().unwrap_or(lo - 1).max(other.top().unwrap_or(lo - 1));
        for s in lo..=hi {
            let d = match (self.slots.get(&s), other.slots.get(&s)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) | (None, Some(a)) => a.clone(),
                (None, None) => continue,
            };
            slots.insert(s, d);
        }
        let fill = self.exact_prec_hint().max(other.exact_prec_hint());
        let mut out = Self::from_slots(slots, lo, fill);
        out.raise_window();
        out
    }

    pub fn neg(&self) -> EPlusOp {
        EPlusOp {
            slots: self.slots.iter().map(|(s, d)| (*s, d.neg())).collect(),
            window_lo: self.window_lo,
        }
    }

    pub fn sub(&self, other: &EPlusOp) -> EPlusOp {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> EPlusOp {
        EPlusOp {
            slots: self.slots.iter().map(|(s, d)| (*s, d.scale(c))).collect(),
            window_lo: self.window_lo,
        }
    }

    pub fn mul(&self, other: &EPlusOp) -> EPlusOp {
        eplus_mul(self, other)
    }

    /// Product that must be known down to `target_lo`.
    pub fn mul_to(&self, other: &EPlusOp, target_lo: i64) -> Result<EPlusOp> {
        let p = eplus_mul(self, other);
        if p.window_lo > target_lo {
            return math(format!(
                "inputs too shallow: product known only from d2^{} but d2^{} was requested",
                p.window_lo, target_lo
            ));
        }
        Ok(p.with_window(target_lo))
    }

    pub fn commutator(&self, other: &EPlusOp) -> EPlusOp {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn pow(&self, n: u32) -> EPlusOp {
        let p = self.exact_prec_hint();
        let mut acc = EPlusOp::one(p, self.window_lo.min(0) * n.max(1) as i64);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Right multiplication by `d2^n`, a pure shift.
    pub fn shift(&self, n: i64) -> EPlusOp {
        EPlusOp {
            slots: self.slots.iter().map(|(s, d)| (*s + n, d.clone())).collect(),
            window_lo: self.window_lo + n,
        }
    }

    /// Left multiplication by a zeroth-order operator `d`, slot by slot.
    pub fn left_mul_d1(&self, d: &D1Op) -> EPlusOp {
        let mut out = EPlusOp {
            slots: self
                .slots
                .iter()
                .map(|(s, c)| (*s, d1_mul(d, c)))
                .collect(),
            window_lo: self.window_lo,
        };
        out.raise_window();
        out
    }

    /// `m d2^s * self` with `m d2^s` treated as exact.
    pub fn left_mul_monomial(&self, m: &D1Op, s: i64) -> EPlusOp {
        let tb = self.top().unwrap_or(0);
        let mono = EPlusOp::monomial(m.clone(), s, self.window_lo + s - tb);
        eplus_mul(&mono, self)
    }

    /// `self * m d2^s` with `m d2^s` treated as exact.
    pub fn right_mul_monomial(&self, m: &D1Op, s: i64) -> EPlusOp {
        let ta = self.top().unwrap_or(0);
        let mono = EPlusOp::monomial(m.clone(), s, self.window_lo + s - ta);
        eplus_mul(self, &mono)
    }

    /// Coefficient-wise partial derivative of every slot.
    pub fn d_dx(&self, axis: u8) -> EPlusOp {
        let mut out = EPlusOp {
            slots: self.slots.iter().map(|(s, d)| (*s, d.d_dx(axis))).collect(),
            window_lo: self.window_lo,
        };
        out.raise_window();
        out
    }

    /// `(k, l)`: `l` is the top nonzero slot and `k` its `d1`-degree.
    pub fn gamma_order(&self) -> Result<GammaDeg> {
        let l = self
            .top_nonzero()
            .ok_or_else(|| Error::Math("zero operator has no Γ-order".into()))?;
        let k = self.slots[&l].max_q().unwrap_or(0);
        Ok(GammaDeg::new(k as i64, l))
    }

    /// Coefficient series of the highest term.
    pub fn ht_coeff(&self) -> Result<XSeries> {
        let g = self.gamma_order()?;
        Ok(self.slots[&g.d2].coeff(g.d1 as u32))
    }

    /// Γ-order with the leading rational coefficient (constant term of the
    /// highest-term coefficient).
    pub fn highest_term(&self) -> Result<(GammaDeg, Rat)> {
        let g = self.gamma_order()?;
        Ok((g, self.ht_coeff()?.constant_term()))
    }

    /// Leading coefficient is exactly 1.
    pub fn is_monic(&self) -> bool {
        match self.ht_coeff() {
            Ok(c) => c.is_constant() && c.constant_term() == Rat::from_integer(1.into()),
            Err(_) => false,
        }
    }

    /// Divides by the leading rational coefficient.
    pub fn make_monic(&self) -> Result<EPlusOp> {
        let (_, c) = self.highest_term()?;
        if c.is_zero() {
            return math("leading coefficient is not a unit");
        }
        Ok(self.scale(&c.recip()))
    }

    /// Coefficients of `d1^q d2^s` as a map, skipping zeros.
    pub fn terms(&self) -> BTreeMap<(u32, i64), XSeries> {
        let mut out = BTreeMap::new();
        for (&s, d) in &self.slots {
            for (&q, c) in d.coeffs() {
                out.insert((q, s), c.clone());
            }
        }
        out
    }

    /// The part with `d2`-exponent below zero.
    pub fn negative_part(&self) -> EPlusOp {
        let slots: Vec<(i64, D1Op)> = self
            .slots
            .range(..0)
            .map(|(s, d)| (*s, d.clone()))
            .collect();
        let fill = self.exact_prec_hint();
        EPlusOp::from_slots(slots, self.window_lo, fill)
    }

    /// No nonzero slot below `d2^0`, judged on the stored truncation.
    pub fn is_in_dhat(&self) -> Verdict {
        Verdict::from_bool(self.slots.range(..0).all(|(_, d)| d.is_zero()))
    }

    /// Whether the stored truncation is a differential operator polynomial in
    /// `d1`. A slot whose top `d1`-coefficient sits right at the precision
    /// boundary may be the visible start of an infinite tail, which makes the
    /// answer inconclusive.
    pub fn is_pdo(&self) -> Verdict {
        if self.is_in_dhat() == Verdict::Fail {
            return Verdict::Fail;
        }
        let mut v = Verdict::Pass;
        for d in self.slots.values() {
            if let Some(q) = d.max_q() {
                let o = d.coeff(q).ord_m().floor();
                if q > 0 && o + 1 >= d.prec() {
                    v = Verdict::Inconclusive;
                }
            }
        }
        v
    }

    /// The Taylor coefficient `[x1^m x2^n]` of the `d1^q d2^s` coefficient.
    pub fn taylor(&self, q: u32, s: i64, m: u32, n: u32) -> Rat {
        match self.slots.get(&s) {
            Some(d) => d.coeff(q).coeff(m, n),
            None => Rat::zero(),
        }
    }
}

/// Leibniz product in `d2` with the inner derivation `d/dx2` on coefficients.
///
/// Slot `s` of the output collects `C(i,k) a_i d^k(b_j)` with `i + j - k = s`;
/// its precision is the minimum over every contributing term, zero slots
/// included. The output is known from `max(wa + tb, wb + ta)` up.
pub fn eplus_mul(a: &EPlusOp, b: &EPlusOp) -> EPlusOp {
    let ta = a.top().unwrap_or(a.window_lo - 1);
    let tb = b.top().unwrap_or(b.window_lo - 1);
    let lo = (a.window_lo + tb).max(b.window_lo + ta);
    let hi = ta + tb;
    if lo > hi {
        return EPlusOp::zero(lo);
    }
    let max_k = (ta + tb - lo).max(0) as usize;
    let mut derivs: BTreeMap<i64, Vec<D1Op>> = BTreeMap::new();
    for (&j, bj) in &b.slots {
        let need = ((ta + j - lo).max(0) as usize).min(max_k);
        let mut v = Vec::with_capacity(need + 1);
        v.push(bj.clone());
        for k in 1..=need {
            let next = v[k - 1].d_dx(2);
            v.push(next);
        }
        derivs.insert(j, v);
    }
    let mut acc: BTreeMap<i64, D1Op> = BTreeMap::new();
    for (&i, ai) in &a.slots {
        for (&j, dv) in &derivs {
            if i + j < lo {
                continue;
            }
            let kmax = if i >= 0 { (i as i64).min(i + j - lo) } else { i + j - lo };
            for k in 0..=kmax {
                let c = binom(i, k as u32);
                if c.is_zero() {
                    continue;
                }
                let term = d1_mul(ai, &dv[k as usize]).scale(&c);
                let s = i + j - k;
                let merged = match acc.remove(&s) {
                    Some(old) => old.add(&term),
                    None => term,
                };
                acc.insert(s, merged);
            }
        }
    }
    let fill = a.exact_prec_hint().min(b.exact_prec_hint());
    EPlusOp::from_slots(acc, lo, fill)
}

/// Inverse of an operator whose highest term is `c d2^t` with `c` a unit
/// function.
///
/// Writing `p = c (1 + X) d2^t` with `X` strictly negative gives
/// `p^{-1} = d2^{-t} (1 - X + X^2 - ...) c^{-1}`.
pub fn invert_monic(p: &EPlusOp) -> Result<EPlusOp> {
    let g = p.gamma_order()?;
    let t = g.d2;
    let top = &p.slots[&t];
    if g.d1 != 0 {
        return math("not invertible within Ê₊");
    }
    let c = top.coeff(0);
    let c_inv = c
        .invert_unit()
        .map_err(|_| Error::Math("not invertible within Ê₊".into()))?;
    let c_inv = D1Op::from_series(0, c_inv);
    let p = p.with_window(p.window_lo).left_mul_d1(&c_inv);
    // drop slots above t that vanish to precision
    let p = EPlusOp::from_slots(
        p.slots.range(..t).map(|(s, d)| (*s, d.clone())),
        p.window_lo,
        p.exact_prec_hint(),
    );
    let x = p.shift(-t);
    let w = x.window_lo;
    let prec = c_inv.prec();
    let mut z = EPlusOp::one(prec, w);
    let mut power = EPlusOp::one(prec, w);
    let neg_x = x.neg();
    loop {
        power = eplus_mul(&power, &neg_x).with_window(w);
        match power.top_nonzero() {
            Some(s) if s >= w => z = z.add(&power),
            _ => break,
        }
    }
    let z = if t == 0 { z } else { z.left_mul_monomial(&D1Op::one(prec), -t) };
    if c.is_constant() {
        // a constant unit commutes with everything
        return Ok(z.scale(&c.constant_term().recip()));
    }
    Ok(z.right_mul_monomial(&c_inv, 0))
}

/// `:exp(a):` as a zeroth-order operator.
pub fn op_exp_eplus(a: &D1Op, window_lo: i64) -> Result<EPlusOp> {
    Ok(EPlusOp::monomial(op_exp(a)?, 0, window_lo))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct D1TermWire {
    pub q: u32,
    pub series: XSeries,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotWire {
    pub s: i64,
    pub prec: u32,
    pub d1: Vec<D1TermWire>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EPlusWire {
    pub window_lo: i64,
    pub slots: Vec<SlotWire>,
}

impl From<EPlusOp> for EPlusWire {
    fn from(p: EPlusOp) -> Self {
        EPlusWire {
            window_lo: p.window_lo,
            slots: p
                .slots
                .iter()
                .map(|(&s, d)| SlotWire {
                    s,
                    prec: d.prec(),
                    d1: d
                        .coeffs()
                        .map(|(&q, c)| D1TermWire {
                            q,
                            series: c.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<EPlusWire> for EPlusOp {
    type Error = Error;
    fn try_from(w: EPlusWire) -> Result<Self> {
        let mut slots = BTreeMap::new();
        for sw in w.slots {
            if sw.s < w.window_lo {
                return format(format!("slot {} lies below window {}", sw.s, w.window_lo));
            }
            let mut d = D1Op::zero(sw.prec);
            for t in sw.d1 {
                if t.series.prec() < sw.prec {
                    return format(format!(
                        "series in slot {} has precision {} below the slot precision {}",
                        sw.s,
                        t.series.prec(),
                        sw.prec
                    ));
                }
                d = d.add(&D1Op::from_series(t.q, t.series.truncate(sw.prec)));
            }
            if slots.insert(sw.s, d).is_some() {
                return format(format!("duplicate slot {}", sw.s));
            }
        }
        let top = slots.keys().next_back().copied();
        if let Some(top) = top {
            for s in w.window_lo..top {
                if !slots.contains_key(&s) {
                    return format(format!("missing slot {s} inside the window"));
                }
            }
        }
        Ok(EPlusOp {
            slots,
            window_lo: w.window_lo,
        })
    }
}
