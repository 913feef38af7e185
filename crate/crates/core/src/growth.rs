//! Growth cones `A_alpha`, their strong and super-strong variants, the
//! slot-wise `AA_f` conditions, full order and membership in `Pi_alpha`.
//!
//! Operators are judged on their stored truncation: a failure always comes
//! with a concrete term, while "holds" means no stored coefficient violates
//! the cone. Coefficients that vanish to their precision impose nothing.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::d1::D1Op;
use crate::eplus::EPlusOp;
use crate::error::{math, Result};
use crate::rat::{fmt_rat, Rat};
use crate::series::MOrder;
use crate::verdict::Verdict;
use crate::zseries::ZSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthKind {
    A,
    Strong,
    SuperStrong,
}

/// A term `d1^i d2^j` whose coefficient breaks the cone. `ord` is its
/// M-adic order; `required` the bound it had to meet (for the strong
/// variants the coefficient had to vanish, or be constant).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub i: u32,
    pub j: i64,
    pub ord: u32,
    pub required: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthCert {
    #[serde(with = "rat_str")]
    pub alpha: Rat,
    pub anchor: (i64, i64),
    pub kind: GrowthKind,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl GrowthCert {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

mod rat_str {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::rat::{fmt_rat, parse_rat, Rat};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

fn ri(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

fn ceil(r: &Rat) -> BigInt {
    r.ceil().to_integer()
}

/// The cone edge `alpha (l - j) + k` for slot `j`.
pub fn cone_edge(alpha: &Rat, anchor: (i64, i64), j: i64) -> Rat {
    alpha * ri(anchor.1 - j) + ri(anchor.0)
}

/// Least M-order the coefficient of `d1^i d2^j` must have under `A_alpha`.
pub fn required_order(alpha: &Rat, anchor: (i64, i64), i: u32, j: i64) -> Rat {
    let b = ri(i as i64) - cone_edge(alpha, anchor, j);
    if b.is_negative() {
        Rat::zero()
    } else {
        b
    }
}

fn known_order(o: MOrder) -> Option<u32> {
    match o {
        MOrder::Finite(n) => Some(n),
        MOrder::AtLeast(_) => None,
    }
}

fn cert(alpha: &Rat, anchor: (i64, i64), kind: GrowthKind, witness: Option<Witness>) -> GrowthCert {
    GrowthCert {
        alpha: alpha.clone(),
        anchor,
        kind,
        verdict: if witness.is_some() {
            Verdict::Fail
        } else {
            Verdict::Pass
        },
        witness,
    }
}

fn check_alpha(alpha: &Rat) -> Result<()> {
    if alpha.is_negative() {
        return math("alpha must be nonnegative");
    }
    Ok(())
}

/// `ord_M(p_ij) >= max(0, i - alpha (l - j) - k)` for every stored term.
pub fn check_a(p: &EPlusOp, alpha: &Rat, anchor: (i64, i64)) -> Result<GrowthCert> {
    check_alpha(alpha)?;
    for ((i, j), c) in p.terms() {
        let Some(o) = known_order(c.ord_m()) else {
            continue;
        };
        let need = required_order(alpha, anchor, i, j);
        if ri(o as i64) < need {
            return Ok(cert(
                alpha,
                anchor,
                GrowthKind::A,
                Some(Witness {
                    i,
                    j,
                    ord: o,
                    required: fmt_rat(&need),
                }),
            ));
        }
    }
    Ok(cert(alpha, anchor, GrowthKind::A, None))
}

/// `p_ij = 0` for `i > alpha (l - j) + k`.
pub fn check_strong(p: &EPlusOp, alpha: &Rat, anchor: (i64, i64)) -> Result<GrowthCert> {
    check_alpha(alpha)?;
    for ((i, j), c) in p.terms() {
        if ri(i as i64) > cone_edge(alpha, anchor, j) {
            return Ok(cert(
                alpha,
                anchor,
                GrowthKind::Strong,
                Some(Witness {
                    i,
                    j,
                    ord: c.ord_m().floor(),
                    required: "0".into(),
                }),
            ));
        }
    }
    Ok(cert(alpha, anchor, GrowthKind::Strong, None))
}

/// The strong condition, and on every slot the coefficient of `d1^f` with
/// `f = alpha (l - j) + k` is a constant.
pub fn check_super_strong(p: &EPlusOp, alpha: &Rat, anchor: (i64, i64)) -> Result<GrowthCert> {
    let s = check_strong(p, alpha, anchor)?;
    if !s.holds() {
        return Ok(GrowthCert {
            kind: GrowthKind::SuperStrong,
            ..s
        });
    }
    for (&j, d) in p.slots() {
        let f = cone_edge(alpha, anchor, j);
        if !f.is_integer() || f.is_negative() {
            continue;
        }
        let q: u32 = match f.to_integer().try_into() {
            Ok(q) => q,
            Err(_) => continue,
        };
        let c = d.coeff(q);
        if !c.is_constant() {
            return Ok(cert(
                alpha,
                anchor,
                GrowthKind::SuperStrong,
                Some(Witness {
                    i: q,
                    j,
                    ord: c.ord_m().floor(),
                    required: "constant".into(),
                }),
            ));
        }
    }
    Ok(cert(alpha, anchor, GrowthKind::SuperStrong, None))
}

/// Dispatches on `kind`.
pub fn check(p: &EPlusOp, alpha: &Rat, anchor: (i64, i64), kind: GrowthKind) -> Result<GrowthCert> {
    match kind {
        GrowthKind::A => check_a(p, alpha, anchor),
        GrowthKind::Strong => check_strong(p, alpha, anchor),
        GrowthKind::SuperStrong => check_super_strong(p, alpha, anchor),
    }
}

/// The anchor given by the Γ-order.
pub fn natural_anchor(p: &EPlusOp) -> Result<(i64, i64)> {
    let g = p.gamma_order()?;
    Ok((g.d1, g.d2))
}

/// `ford(P) = k / alpha + l`.
pub fn ford(p: &EPlusOp, alpha: &Rat) -> Result<Rat> {
    if alpha.is_zero() {
        return math("full order needs alpha > 0");
    }
    check_alpha(alpha)?;
    let (k, l) = natural_anchor(p)?;
    Ok(ri(k) / alpha + ri(l))
}

/// `AA_f` on a `d1`-operator: `ord_M(p_s) >= s - f` whenever `s >= f`.
pub fn check_aa(d: &D1Op, f: &Rat) -> Verdict {
    Verdict::from_bool(d.coeffs().all(|(&s, c)| {
        let b = ri(s as i64) - f;
        match known_order(c.ord_m()) {
            Some(o) if !b.is_negative() => ri(o as i64) >= b,
            _ => true,
        }
    }))
}

/// `BB_f`: `p_s = 0` for `s > f`.
pub fn check_bb(d: &D1Op, f: &Rat) -> Verdict {
    Verdict::from_bool(d.coeffs().all(|(&s, _)| ri(s as i64) <= *f))
}

/// `CC_f`: `BB_f` and `p_f` constant.
pub fn check_cc(d: &D1Op, f: &Rat) -> Verdict {
    let top_ok = if f.is_integer() && !f.is_negative() {
        match f.to_integer().try_into() {
            Ok(q) => d.coeff(q).is_constant(),
            Err(_) => true,
        }
    } else {
        true
    };
    check_bb(d, f).and(Verdict::from_bool(top_ok))
}

/// Searches anchors `(k, l)` with `l` at or above the top slot for one
/// certifying `A_alpha`, keeping the least `l + k/alpha` (ties: least `l`).
pub fn in_pi_alpha(p: &EPlusOp, alpha: &Rat) -> Result<GrowthCert> {
    if alpha.is_zero() || alpha.is_negative() {
        return math("membership in Pi_alpha needs alpha > 0");
    }
    let terms = p.terms();
    let top = match p.top_nonzero() {
        Some(t) => t,
        None => {
            return Ok(GrowthCert {
                alpha: alpha.clone(),
                anchor: (0, 0),
                kind: GrowthKind::A,
                verdict: Verdict::Inconclusive,
                witness: None,
            })
        }
    };
    // k >= i - alpha (l - j) - ord for every term with known order
    let spread: Vec<Rat> = terms
        .iter()
        .filter_map(|(&(i, j), c)| {
            known_order(c.ord_m()).map(|o| ri(i as i64) + alpha * ri(j) - ri(o as i64))
        })
        .collect();
    let reach = alpha.denom() + BigInt::from(1);
    let span: i64 = reach.try_into().unwrap_or(2);
    let mut best: Option<(Rat, (i64, i64))> = None;
    for l in top..=top + span {
        let m = spread
            .iter()
            .map(|s| ceil(&(s - alpha * ri(l))))
            .max()
            .unwrap_or_else(|| BigInt::from(0));
        let k: i64 = match m.try_into() {
            Ok(k) => k,
            Err(_) => continue,
        };
        let f = ri(k) / alpha + ri(l);
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, (k, l)));
        }
    }
    let (_, anchor) = best.expect("the search range is nonempty");
    check_a(p, alpha, anchor)
}

/// `A_alpha` for an element of `k[z1^-1]((z2))`, read as the constant
/// coefficient operator `z1^{-i} z2^{j} -> d1^i d2^{-j}` and anchored at its
/// lowest term.
pub fn check_a_zseries(v: &ZSeries, alpha: &Rat) -> Result<GrowthCert> {
    check_alpha(alpha)?;
    let anchor = match v.lt() {
        Some((i, j, _)) => (i as i64, -j),
        None => (0, 0),
    };
    for ((i, j), _) in v.terms() {
        if ri(i as i64) > cone_edge(alpha, anchor, -j) {
            return Ok(cert(
                alpha,
                anchor,
                GrowthKind::A,
                Some(Witness {
                    i,
                    j: -j,
                    ord: 0,
                    required: fmt_rat(&(ri(i as i64) - cone_edge(alpha, anchor, -j))),
                }),
            ));
        }
    }
    Ok(cert(alpha, anchor, GrowthKind::A, None))
}
