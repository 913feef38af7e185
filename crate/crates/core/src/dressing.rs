//! Roots, normalization and dressing of a commuting pair `(P, Q)` with
//! Γ-orders `(0, k)` and `(1, l)`, and the passage from such a ring to a
//! Schur pair.

use num_traits::Zero;

use crate::action::{reduce_to_v, stabilizes, w0_times, Bounds, StabReport, SubspaceW};
use crate::d1::{op_exp, D1Op};
use crate::eplus::{invert_monic, EPlusOp};
use crate::error::{math, Result};
use crate::rat::Rat;
use crate::series::{GammaDeg, XSeries};
use crate::zseries::ZSeries;

/// `a^n` for `n >= 1`.
fn power(a: &EPlusOp, n: u32) -> EPlusOp {
    let mut acc = a.clone();
    for _ in 1..n {
        acc = acc.mul(a);
    }
    acc
}

fn check_order(p: &EPlusOp, want: GammaDeg, what: &str) -> Result<()> {
    let g = p.gamma_order()?;
    if g != want || !p.is_monic() {
        return math(format!(
            "{what} must be monic of Γ-order {want}, found {g}{}",
            if p.is_monic() { "" } else { " (not monic)" }
        ));
    }
    Ok(())
}

/// The unique `L2 = d2 + u0 + u_{-1} d2^-1 + ...` with `L2^k = p`.
///
/// Each step compares `p` with the current truncation raised to the `k`-th
/// power; the top discrepancy is `k` times the next coefficient.
pub fn kth_root(p: &EPlusOp, k: u32) -> Result<EPlusOp> {
    if k == 0 {
        return math("root index must be positive");
    }
    check_order(p, GammaDeg::new(0, k as i64), "operator")?;
    let w = p.window_lo() - (k as i64 - 1);
    let prec = p.slot_prec(k as i64).unwrap_or(0);
    let mut l = EPlusOp::monomial(D1Op::one(prec), 1, w);
    let inv_k = Rat::new(1.into(), k.into());
    for i in 0.. {
        let s = -(i as i64);
        let slot = k as i64 - 1 + s;
        if s < w || slot < p.window_lo() {
            break;
        }
        let d = p.sub(&power(&l, k));
        let disc = match d.slot(slot) {
            Some(x) => x,
            None => break,
        };
        if disc.prec() == 0 {
            break;
        }
        l = l.add(&EPlusOp::monomial(disc.scale(&inv_k), s, w));
    }
    Ok(l)
}

/// `L1 = q * l2^{-e}`.
pub fn l1_from_q(q: &EPlusOp, l2: &EPlusOp, e: i64) -> Result<EPlusOp> {
    check_order(l2, GammaDeg::new(0, 1), "L2")?;
    let factor = match e {
        0 => None,
        e if e > 0 => Some(power(&invert_monic(l2)?, e as u32)),
        e => Some(power(l2, (-e) as u32)),
    };
    let l1 = match factor {
        Some(f) => q.mul(&f),
        None => q.clone(),
    };
    let g = l1.gamma_order()?;
    if g != GammaDeg::new(1, 0) {
        return math(format!("Q L2^-{e} has Γ-order {g}, expected (1,0)"));
    }
    Ok(l1)
}

/// A window for order-zero factors that costs `p` nothing under multiplication.
fn factor_window(p: &EPlusOp) -> i64 {
    p.window_lo() - p.top().unwrap_or(0).max(0)
}

fn conj_fn(p: &EPlusOp, f: &XSeries, f_inv: &XSeries) -> EPlusOp {
    let w = factor_window(p);
    EPlusOp::function(f_inv.clone(), w)
        .mul(p)
        .mul(&EPlusOp::function(f.clone(), w))
}

/// Orders of the designated pair, checked.
fn pair_orders(p: &EPlusOp, q: &EPlusOp) -> Result<(u32, i64)> {
    let gp = p.gamma_order()?;
    let gq = q.gamma_order()?;
    if gp.d1 != 0 || gp.d2 < 1 || !p.is_monic() {
        return math(format!("P must be monic of Γ-order (0,k) with k >= 1, found {gp}"));
    }
    if gq.d1 != 1 || !q.is_monic() {
        return math(format!("Q must be monic of Γ-order (1,l), found {gq}"));
    }
    Ok((gp.d2 as u32, gq.d2))
}

#[derive(Clone, Debug)]
pub struct AlmostNormalized {
    pub f: XSeries,
    pub p: EPlusOp,
    pub q: EPlusOp,
}

/// Conjugates by a unit `f` so that the top of `Q` is exactly `d1 d2^l` and
/// `p_{k-1}` has no free term.
pub fn almost_normalize(p: &EPlusOp, q: &EPlusOp) -> Result<AlmostNormalized> {
    let (k, l) = pair_orders(p, q)?;
    let g = q.slot(l).expect("top slot is known").coeff(0);
    let f1 = g.antideriv(1).neg().exp_series()?;
    let f1_inv = f1.invert_unit()?;
    let (p1, q1) = (conj_fn(p, &f1, &f1_inv), conj_fn(q, &f1, &f1_inv));
    let pk = match p1.slot(k as i64 - 1) {
        Some(d) => d,
        None => return math("P is not known at d2^(k-1); widen the window"),
    };
    if !pk.d_dx(1).is_zero() {
        return math("operators do not commute: p_{k-1} depends on x1");
    }
    let h = pk.coeff(0);
    let kr = Rat::from_integer(k.into());
    let f2 = h.scale(&kr.recip()).antideriv(2).neg().exp_series()?;
    let f2_inv = f2.invert_unit()?;
    Ok(AlmostNormalized {
        f: f1.mul(&f2),
        p: conj_fn(&p1, &f2, &f2_inv),
        q: conj_fn(&q1, &f2, &f2_inv),
    })
}

#[derive(Clone, Debug)]
pub struct Normalized {
    /// `s = f exp(-int p_{k-1}/k dx2)`, with `p = s p' s^-1`.
    pub s: EPlusOp,
    pub s_inv: EPlusOp,
    pub p: EPlusOp,
    pub q: EPlusOp,
}

/// Conjugates the pair to `P = d2^k + (slots <= k-2)`, `Q = d1 d2^l + ...`.
pub fn normalize(p: &EPlusOp, q: &EPlusOp) -> Result<Normalized> {
    let (k, _) = pair_orders(p, q)?;
    let an = almost_normalize(p, q)?;
    let pk = an.p.slot(k as i64 - 1).expect("checked in almost_normalize");
    if !pk.d_dx(1).is_zero() {
        return math("operators do not commute: p_{k-1} depends on x1");
    }
    let kr = Rat::from_integer(k.into());
    let a = pk.antideriv(2).scale(&(-kr.recip()));
    let e = op_exp(&a)?;
    let e_inv = op_exp(&a.neg())?;
    let w = factor_window(&an.p).min(factor_window(&an.q));
    let f_inv = an.f.invert_unit()?;
    let s = EPlusOp::function(an.f.clone(), w).mul(&EPlusOp::monomial(e.clone(), 0, w));
    let s_inv = EPlusOp::monomial(e_inv.clone(), 0, w).mul(&EPlusOp::function(f_inv, w));
    let ew = EPlusOp::monomial(e, 0, w);
    let ew_inv = EPlusOp::monomial(e_inv, 0, w);
    let pn = ew_inv.mul(&an.p).mul(&ew);
    let qn = ew_inv.mul(&an.q).mul(&ew);
    if let Some(d) = pn.slot(k as i64 - 1) {
        if !d.is_zero() {
            return math("normalization failed to clear p_{k-1}; operators do not commute");
        }
    }
    Ok(Normalized { s, s_inv, p: pn, q: qn })
}

#[derive(Clone, Debug)]
pub struct Dressing {
    /// `S` with `S^-1 d1 S = L1` and `S^-1 (d2 + u0) S = L2`.
    pub s: EPlusOp,
    pub s_inv: EPlusOp,
    /// Number of stages applied.
    pub stages: u32,
}

/// Removes the `d2^{-k}` terms of `L1, L2` one stage at a time down to
/// `floor`, solving `d1(s_k) = -v_k`, `d2(s_k) + [u0, s_k] = -u_k`.
pub fn dress(l1: &EPlusOp, l2: &EPlusOp, floor: i64) -> Result<Dressing> {
    if floor >= 0 {
        return math("dressing floor must be negative");
    }
    let top1 = l1.slot(0).ok_or_else(|| crate::error::Error::Math("L1 is not known at d2^0".into()))?;
    if l1.top_nonzero() != Some(0) || !top1.agrees_with(&D1Op::d1_pow(1, top1.prec())) {
        return math("L1 must be d1 plus negative d2 slots");
    }
    check_order(l2, GammaDeg::new(0, 1), "L2")?;
    let u0 = l2.slot(0).expect("window reaches d2^0");
    if !u0.d_dx(1).is_zero() {
        return math("u0 depends on x1");
    }
    let margin = floor - 2;
    let mut a1 = l1.clone();
    let mut a2 = l2.clone();
    // exact parts are filled at the best precision present
    let fill = top1.prec().max(l2.slot_prec(1).unwrap_or(0));
    let mut t = EPlusOp::one(fill, margin);
    let mut stages = 0;
    for k in 1..=(-floor) {
        let (v, u) = match (a1.slot(-k), a2.slot(-k)) {
            (Some(v), Some(u)) if v.prec() > 0 && u.prec() > 0 => (v, u),
            _ => {
                return math(format!(
                    "L1, L2 are not known at d2^-{k}; widen the window or raise the precision"
                ))
            }
        };
        let compat = v.d_dx(2).sub(&u.d_dx(1)).add(&u0.commutator(&v));
        if !compat.is_zero() {
            return math(format!("operators do not commute at stage {k}"));
        }
        let iv = v.antideriv(1);
        let inner = v.d_dx(2).antideriv(1).sub(&u).add(&u0.commutator(&iv));
        let sk = iv.neg().add(&inner.antideriv(2));
        stages += 1;
        if sk.is_zero() {
            continue;
        }
        let sk_op = EPlusOp::one(fill, margin).add(&EPlusOp::monomial(sk, -k, margin));
        let sk_inv = invert_monic(&sk_op)?.with_window(margin);
        a1 = sk_inv.mul(&a1).mul(&sk_op);
        a2 = sk_inv.mul(&a2).mul(&sk_op);
        t = t.mul(&sk_op);
    }
    let t = t.with_window(floor.max(t.window_lo()));
    let s = invert_monic(&t)?;
    Ok(Dressing { s, s_inv: t, stages })
}

/// `S X S^-1` for a generator, checked to have constant coefficients and
/// written as `d1^a d2^b -> z1^{-a} z2^{-b}`.
pub fn constant_image(s: &EPlusOp, s_inv: &EPlusOp, x: &EPlusOp) -> Result<(EPlusOp, ZSeries)> {
    let y = s.mul(x).mul(s_inv);
    for ((q, b), c) in y.terms() {
        if !c.is_constant() {
            return math(format!(
                "conjugate has a non-constant coefficient at d1^{q} d2^{b}; the window or precision is too small"
            ));
        }
    }
    let z = reduce_to_v(&y);
    Ok((y, z))
}

#[derive(Clone, Debug)]
pub struct SchurFromRing {
    /// `S` with `S X S^-1` constant for every generator.
    pub s_total: EPlusOp,
    pub s_total_inv: EPlusOp,
    /// `S X S^-1` for each generator.
    pub images: Vec<EPlusOp>,
    /// The same images as elements of `k[z1^-1]((z2))`.
    pub a: Vec<ZSeries>,
    /// `W0 S^-1`.
    pub w: SubspaceW,
    pub stab: Vec<StabReport>,
}

/// The full passage from commuting generators to a Schur pair.
///
/// `P = gens[pi]` and `Q = gens[qi]` are normalized, `L2 = P^{1/k}`,
/// `L1 = Q L2^{-l}`, and the dressing `S_d` of `(L1, L2)` is composed with the
/// normalizing operator `S_n` into `S_total = S_d S_n^-1`.
pub fn schur_from_ring(
    gens: &[EPlusOp],
    pi: usize,
    qi: usize,
    bounds: Bounds,
    floor: i64,
) -> Result<SchurFromRing> {
    if pi >= gens.len() || qi >= gens.len() {
        return math("generator index out of range");
    }
    for a in 0..gens.len() {
        for b in a + 1..gens.len() {
            if !gens[a].commutator(&gens[b]).is_zero() {
                return math(format!("generators {a} and {b} do not commute"));
            }
        }
    }
    let (p, q) = (&gens[pi], &gens[qi]);
    let (k, l) = pair_orders(p, q)?;
    let n = normalize(p, q)?;
    let l2 = kth_root(&n.p, k)?;
    let l1 = l1_from_q(&n.q, &l2, l)?;
    let d = dress(&l1, &l2, floor)?;
    let s_total = d.s.mul(&n.s_inv);
    let s_total_inv = n.s.mul(&d.s_inv);
    let mut images = Vec::new();
    let mut a = Vec::new();
    for x in gens {
        let (y, z) = constant_image(&s_total, &s_total_inv, x)?;
        images.push(y);
        a.push(z);
    }
    let w = w0_times(&s_total_inv, bounds)?;
    let mut stab = Vec::new();
    for y in &images {
        stab.push(stabilizes(&w, y)?);
    }
    Ok(SchurFromRing {
        s_total,
        s_total_inv,
        images,
        a,
        w,
        stab,
    })
}

/// True when `x` has constant coefficients to its precision.
pub fn has_constant_coefficients(x: &EPlusOp) -> bool {
    x.terms().values().all(|c| c.is_constant())
}

/// `c` with the operator's leading rational coefficient removed.
pub fn leading_scalar(x: &EPlusOp) -> Result<Rat> {
    let (_, c) = x.highest_term()?;
    if c.is_zero() {
        return math("leading coefficient vanishes");
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::d1::eval_at_x1_zero_op;
    use crate::rat::rat;

    const P: u32 = 10;

    fn op(q: u32, s: i64, c: XSeries, w: i64) -> EPlusOp {
        EPlusOp::monomial(D1Op::from_series(q, c), s, w)
    }

    #[test]
    fn square_roots() {
        let d2 = EPlusOp::d2_pow(2, P, -6);
        assert!(kth_root(&d2, 2).unwrap().agrees_with(&EPlusOp::d2_pow(1, P, -7)));
        let x2 = XSeries::monomial(0, 1, rat(1), P);
        let l = EPlusOp::d2_pow(1, P, -7).add(&EPlusOp::function(x2, -7));
        let sq = l.mul(&l);
        let r = kth_root(&sq, 2).unwrap();
        assert!(r.agrees_with(&l), "{r:?}");
        assert!(kth_root(&op(1, 2, XSeries::one(P), -4), 2).is_err());
    }

    #[test]
    fn l1_examples() {
        let q = op(1, 1, XSeries::one(P), -4);
        let l2 = EPlusOp::d2_pow(1, P, -5);
        assert!(l1_from_q(&q, &l2, 1).unwrap().agrees_with(&op(1, 0, XSeries::one(P), -4)));
        let d1 = op(1, 0, XSeries::one(P), -4);
        assert!(l1_from_q(&d1, &l2, 0).unwrap().agrees_with(&d1));
    }

    #[test]
    fn normalization_of_a_conjugate() {
        let w = -4;
        let f0 = XSeries::monomial(1, 1, rat(1), P + 4).exp_series().unwrap();
        let f0i = f0.invert_unit().unwrap();
        let p = conj_fn(&EPlusOp::d2_pow(2, P + 4, w), &f0, &f0i);
        let q = conj_fn(&op(1, 1, XSeries::one(P + 4), w), &f0, &f0i);
        let an = almost_normalize(&p, &q).unwrap();
        // f f0 is a constant
        let ratio = an.f.mul(&f0);
        assert!(ratio.is_constant(), "{ratio:?}");
        let n = normalize(&p, &q).unwrap();
        assert!(n.p.agrees_with(&EPlusOp::d2_pow(2, P, w)));
        assert!(n.q.agrees_with(&op(1, 1, XSeries::one(P), w)));
    }

    #[test]
    fn trivial_dressing() {
        let l1 = op(1, 0, XSeries::one(P), -5);
        let l2 = EPlusOp::d2_pow(1, P, -5);
        let d = dress(&l1, &l2, -4).unwrap();
        assert!(d.s.agrees_with(&EPlusOp::one(P, -4)));
    }

    #[test]
    fn dressing_recovers_a_seed() {
        let w = -8;
        let pr = 12;
        let s0 = EPlusOp::one(pr, w)
            .add(&op(0, -1, XSeries::monomial(1, 0, rat(1), pr), w))
            .add(&op(1, -2, XSeries::monomial(0, 1, rat(2), pr), w));
        let s0i = invert_monic(&s0).unwrap();
        let l1 = s0i.mul(&op(1, 0, XSeries::one(pr), w)).mul(&s0);
        let l2 = s0i.mul(&EPlusOp::d2_pow(1, pr, w)).mul(&s0);
        let d = dress(&l1, &l2, -4).unwrap();
        let dev = d.s.mul(&s0i);
        assert!(has_constant_coefficients(&dev), "{dev:?}");
        let back = d.s_inv.mul(&op(1, 0, XSeries::one(pr), w)).mul(&d.s);
        assert!(back.agrees_with(&l1));
    }

    #[test]
    fn toric_root_and_pipeline_images() {
        let w = -5;
        let pr = 9;
        let e = EPlusOp::monomial(eval_at_x1_zero_op(pr), 0, w);
        let one_minus = XSeries::from_terms([((0, 0), rat(1)), ((0, 1), rat(-1))], pr);
        let inv = one_minus.invert_unit().unwrap();
        let inv2 = inv.mul(&inv);
        let p = EPlusOp::d2_pow(2, pr, w).sub(&EPlusOp::function(inv2.scale(&rat(2)), w).mul(&e));
        let q = op(1, 1, XSeries::one(pr), w).add(
            &EPlusOp::function(inv, w)
                .mul(&e)
                .mul(&op(1, 0, XSeries::one(pr), w)),
        );
        assert!(p.commutator(&q).is_zero());
        let r = schur_from_ring(&[p, q], 0, 1, Bounds::triangle(2), -3).unwrap();
        assert!(r.a[0].agrees_with(&ZSeries::monomial(0, -2, rat(1))), "{}", r.a[0]);
        assert!(r.a[1].agrees_with(&ZSeries::monomial(1, -1, rat(1))), "{}", r.a[1]);
    }
}
