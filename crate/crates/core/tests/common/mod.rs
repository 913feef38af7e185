//! Seeded generators shared by the acceptance and property targets.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sato2d::d1::D1Op;
use sato2d::eplus::EPlusOp;
use sato2d::rat::{rat, Rat};
use sato2d::series::XSeries;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A nonzero integer in `-3..=3`.
pub fn small<R: Rng>(r: &mut R) -> Rat {
    let n: i64 = r.gen_range(1..=3);
    rat(if r.gen_bool(0.5) { n } else { -n })
}

/// Up to `n` terms `c x1^a x2^b` with `min_deg <= a + b < prec`.
pub fn series<R: Rng>(r: &mut R, prec: u32, n: usize, min_deg: u32) -> XSeries {
    let mut s = XSeries::zero(prec);
    if min_deg >= prec {
        return s;
    }
    for _ in 0..n {
        let d = r.gen_range(min_deg..prec.min(min_deg + 4));
        let a = r.gen_range(0..=d);
        s.add_term(a, d - a, small(r));
    }
    s
}

/// A series with a nonzero constant term.
pub fn unit<R: Rng>(r: &mut R, prec: u32) -> XSeries {
    let mut s = series(r, prec, 3, 1);
    s.add_term(0, 0, small(r));
    s
}

pub fn term(q: u32, s: i64, c: XSeries, window: i64) -> EPlusOp {
    EPlusOp::monomial(D1Op::from_series(q, c), s, window)
}

/// `sum c_{qs}(x) d1^q d2^s` over `q + s <= order`, `s >= 0`.
pub fn pdo<R: Rng>(r: &mut R, prec: u32, window: i64, order: u32) -> EPlusOp {
    let mut p = EPlusOp::zero(window);
    for q in 0..=order {
        for s in 0..=(order - q) {
            if r.gen_bool(0.5) {
                p = p.add(&term(q, s as i64, series(r, prec, 2, 0), window));
            }
        }
    }
    p
}

/// `1 + sum_{s=-1}^{-depth} s_s(x, d1) d2^s` with `d1`-degree at most 2.
pub fn unipotent<R: Rng>(r: &mut R, prec: u32, window: i64, depth: i64) -> EPlusOp {
    let mut s = EPlusOp::one(prec, window);
    for k in 1..=depth {
        for q in 0..=2 {
            if r.gen_bool(0.4) {
                s = s.add(&term(q, -k, series(r, prec, 2, 0), window));
            }
        }
    }
    s
}

/// `d2 + u0 + u_{-1} d2^-1 + ...` with `d1`-degree at most 1.
pub fn monic_l2<R: Rng>(r: &mut R, prec: u32, window: i64) -> EPlusOp {
    let mut l = EPlusOp::d2_pow(1, prec, window);
    for s in window.max(-3)..=0 {
        for q in 0..=1 {
            if r.gen_bool(0.5) {
                l = l.add(&term(q, s, series(r, prec, 2, 0), window));
            }
        }
    }
    l
}

fn ceil_nonneg(x: &Rat) -> u32 {
    let c = x.ceil().to_integer();
    if c <= 0.into() {
        0
    } else {
        c.try_into().unwrap_or(u32::MAX)
    }
}

/// An operator satisfying `A_alpha` for `(k, l)`: `d1^k d2^l` plus terms
/// whose coefficients vanish to the order the cone requires.
pub fn certified<R: Rng>(r: &mut R, prec: u32, window: i64, alpha: &Rat, anchor: (i64, i64)) -> EPlusOp {
    let (k, l) = anchor;
    let mut p = term(k as u32, l, XSeries::one(prec), window);
    for _ in 0..4 {
        let j = r.gen_range((l - 2).max(window)..=l);
        let i: u32 = r.gen_range(0..=(k as u32 + 3));
        let need = Rat::from_integer(i.into()) - alpha * Rat::from_integer((l - j).into()) - Rat::from_integer(k.into());
        p = p.add(&term(i, j, series(r, prec, 2, ceil_nonneg(&need)), window));
    }
    p
}

/// An operator satisfying the strong condition for `(k, l)`.
pub fn strong<R: Rng>(r: &mut R, prec: u32, window: i64, alpha: &Rat, anchor: (i64, i64)) -> EPlusOp {
    let (k, l) = anchor;
    let mut p = term(k as u32, l, XSeries::one(prec), window);
    for _ in 0..4 {
        let j = r.gen_range((l - 2).max(window)..=l);
        let edge = alpha * Rat::from_integer((l - j).into()) + Rat::from_integer(k.into());
        let top: u32 = edge.floor().to_integer().try_into().unwrap_or(0);
        let i = r.gen_range(0..=top);
        p = p.add(&term(i, j, series(r, prec, 2, 0), window));
    }
    p
}
