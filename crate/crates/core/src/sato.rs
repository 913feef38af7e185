//! The correspondence `S = 1 + S^- <-> W = W0 S` for subspaces with support
//! `W0`.
//!
//! Write `T_{m,n}` for the Taylor coefficient of `x1^m x2^n` in `S - 1`,
//! reduced to `V`. The row `z1^{-k} z2^{-l} S` equals
//! `k! l! T_{k,l} + Sigma_{k,l}` where `Sigma_{k,l}` only involves slices
//! `(m, n) != (k, l)` with `m <= k`, `n <= l`. Since the row lies in `W`, it is
//! the combination of canonical basis elements read off from the nonpositive
//! part of `Sigma_{k,l}`, which determines `T_{k,l}`.

use std::collections::BTreeMap;

use num_traits::One;

use crate::action::{echelon_basis, right_act, w0_times, Bounds, SubspaceW};
use crate::d1::D1Op;
use crate::eplus::EPlusOp;
use crate::error::{math, Result};
use crate::growth::{check_a, check_a_zseries, GrowthCert};
use crate::rat::{factorial, Rat};
use crate::series::XSeries;
use crate::zseries::{ZSeries, EXACT};

/// Checks the shape `1 + S^-`.
pub fn check_unipotent(s: &EPlusOp) -> Result<()> {
    if s.window_lo() > 0 {
        return math("operator is not known at d2^0");
    }
    if s.top().is_some_and(|t| t > 0) && s.top_nonzero().is_some_and(|t| t > 0) {
        return math("operator has positive d2 slots; expected 1 + S^-");
    }
    let zero_slot = s.slot(0).expect("window reaches slot 0");
    if !zero_slot.agrees_with(&D1Op::one(zero_slot.prec())) {
        return math("d2^0 slot is not 1; expected 1 + S^-");
    }
    Ok(())
}

/// `W0 S` in canonical form within `bounds`.
pub fn w_from_s(s: &EPlusOp, bounds: Bounds) -> Result<SubspaceW> {
    check_unipotent(s)?;
    w0_times(s, bounds)
}

/// The constant in `z1^{-k} z2^{-l} * x1^m x2^n = c z1^{-(k-m)} z2^{-(l-n)}`,
/// read off from the action itself.
fn lift_constant(k: u32, l: u32, m: u32, n: u32) -> Result<Rat> {
    let f = XSeries::monomial(m, n, Rat::one(), k + l + 2);
    let op = EPlusOp::function(f, -(l as i64) - 2);
    let v = ZSeries::monomial(k, -(l as i64), Rat::one());
    let r = right_act(&v, &op)?;
    Ok(r.coeff(k - m, -(l as i64) + n as i64))
}

/// The slices `T_{m,n}` recovered from `w`, with the operator they assemble to.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub s: EPlusOp,
    /// `T_{m,n}` for every slice that could be solved within the bounds.
    pub slices: BTreeMap<(u32, u32), ZSeries>,
    /// Guaranteed `x`-precision of each negative slot.
    pub slot_precs: BTreeMap<i64, u32>,
}

/// The unique `S = 1 + S^-` with `W0 S = w`, known on slots `window..0`.
pub fn reconstruct_s(w: &SubspaceW, window: i64) -> Result<EPlusOp> {
    Ok(reconstruct(w, window)?.s)
}

/// Slice-by-slice reconstruction; slices are solved with `l` outermost.
pub fn reconstruct(w: &SubspaceW, window: i64) -> Result<Reconstruction> {
    if window > 0 {
        return math("window must reach d2^0");
    }
    let bounds = w.bounds();
    let mut consts: BTreeMap<(u32, u32, u32, u32), Rat> = BTreeMap::new();
    let mut slices: BTreeMap<(u32, u32), ZSeries> = BTreeMap::new();
    for l in 0..=bounds.j_max {
        for k in 0..=bounds.i_max {
            if !bounds.contains(k, l) {
                continue;
            }
            let mut sigma = ZSeries::monomial(k, -(l as i64), Rat::one());
            let mut ok = true;
            'prev: for n in 0..=l {
                for m in 0..=k {
                    if (m, n) == (k, l) {
                        continue;
                    }
                    let t = match slices.get(&(m, n)) {
                        Some(t) => t,
                        None => {
                            ok = false;
                            break 'prev;
                        }
                    };
                    let c = match consts.get(&(k, l, m, n)) {
                        Some(c) => c.clone(),
                        None => {
                            let c = lift_constant(k, l, m, n)?;
                            consts.insert((k, l, m, n), c.clone());
                            c
                        }
                    };
                    let shifted = t.shift(k - m, -((l - n) as i64)).scale(&c);
                    sigma = sigma.add(&shifted);
                }
            }
            if !ok || sigma.tail() < 1 {
                continue;
            }
            let mut combo = ZSeries::exact_zero();
            for ((i, j), c) in sigma.terms() {
                if j > 0 {
                    break;
                }
                match w.get(i, (-j) as u32) {
                    Some(b) => combo = combo.add(&b.scale(c)),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let norm = Rat::from_integer(factorial(k) * factorial(l));
            let t = combo.sub(&sigma).scale(&norm.recip());
            debug_assert!(t.terms().all(|((_, j), _)| j > 0));
            slices.insert((k, l), t);
        }
    }
    let slot_precs = slot_precisions(&slices, window);
    let s = assemble(&slices, &slot_precs, window);
    Ok(Reconstruction {
        s,
        slices,
        slot_precs,
    })
}

/// `N(s)`: the largest `N` such that every slice with `m + n < N` is solved
/// and known at `z2^{-s}`.
fn slot_precisions(slices: &BTreeMap<(u32, u32), ZSeries>, window: i64) -> BTreeMap<i64, u32> {
    let mut out = BTreeMap::new();
    for s in window..0 {
        let mut n_max = 0u32;
        'grow: loop {
            for m in 0..=n_max {
                let n = n_max - m;
                match slices.get(&(m, n)) {
                    Some(t) if t.tail() > -s => {}
                    _ => break 'grow,
                }
            }
            n_max += 1;
        }
        out.insert(s, n_max);
    }
    out
}

fn assemble(
    slices: &BTreeMap<(u32, u32), ZSeries>,
    precs: &BTreeMap<i64, u32>,
    window: i64,
) -> EPlusOp {
    let top_prec = precs.values().copied().max().unwrap_or(0).max(1);
    let mut slots: BTreeMap<i64, D1Op> = BTreeMap::new();
    slots.insert(0, D1Op::one(top_prec));
    for (&s, &p) in precs {
        let mut coeffs: BTreeMap<u32, XSeries> = BTreeMap::new();
        for (&(m, n), t) in slices {
            if m + n >= p {
                continue;
            }
            for ((q, j), c) in t.terms() {
                if j == -s {
                    coeffs
                        .entry(q)
                        .or_insert_with(|| XSeries::zero(p))
                        .add_term(m, n, c.clone());
                }
            }
        }
        slots.insert(s, D1Op::from_coeffs(coeffs, p));
    }
    EPlusOp::from_slots(slots, window, top_prec)
}

/// [`reconstruct_s`] after checking `A_alpha` on every basis row, with an
/// `A_alpha` certificate for the result at the anchor `(0, 0)`.
pub fn reconstruct_s_certified(
    w: &SubspaceW,
    alpha: &Rat,
    window: i64,
) -> Result<(EPlusOp, GrowthCert)> {
    for (&(i, j), row) in w.basis() {
        let c = check_a_zseries(row, alpha)?;
        if !c.holds() {
            return math(format!("basis element w_{{{i},{j}}} violates A_{alpha}"));
        }
    }
    let s = reconstruct_s(w, window)?;
    let cert = check_a(&s, alpha, (0, 0))?;
    Ok((s, cert))
}

/// A row as an exact series, for building subspaces by hand.
pub fn exact_row<I: IntoIterator<Item = ((u32, i64), Rat)>>(terms: I) -> ZSeries {
    ZSeries::from_terms(terms, EXACT)
}

/// The subspace `k[z1^-1] (x) <1 + z2, z2^-j>` of the cuspidal cubic.
pub fn cusp_space(bounds: Bounds) -> SubspaceW {
    let rows: Vec<ZSeries> = bounds
        .iter()
        .map(|(i, j)| {
            let mut r = ZSeries::monomial(i, -(j as i64), Rat::one());
            if j == 0 {
                r.add_term(i, 1, Rat::one());
            }
            r
        })
        .collect();
    echelon_basis(&rows, bounds).expect("cusp rows are canonical")
}
