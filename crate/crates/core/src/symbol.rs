//! Principal symbols, the Poisson bracket and linear changes of coordinates.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::d1::D1Op;
use crate::eplus::EPlusOp;
use crate::error::{math, Result};
use crate::rat::Rat;
use crate::series::{inv2, mat_mul2, transpose2, Mat2, XSeries};
use crate::verdict::Verdict;

/// Homogeneous polynomial in `xi1, xi2` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SymbolPoly {
    pub terms: BTreeMap<(u32, u32), Rat>,
}

impl SymbolPoly {
    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), Rat)>>(it: I) -> Self {
        let mut terms = BTreeMap::new();
        for (k, c) in it {
            if !c.is_zero() {
                terms.insert(k, c);
            }
        }
        SymbolPoly { terms }
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next().map(|(a, b)| a + b)
    }
}

impl fmt::Display for SymbolPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(&(a, b), c)| format!("({c})*xi1^{a}*xi2^{b}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Polynomial in `xi1, xi2` whose coefficients are functions of `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesSymbol {
    terms: BTreeMap<(u32, u32), XSeries>,
    prec: u32,
}

impl SeriesSymbol {
    pub fn zero(prec: u32) -> Self {
        SeriesSymbol {
            terms: BTreeMap::new(),
            prec,
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &XSeries)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, e: (u32, u32), c: &XSeries) {
        let c = c.truncate(self.prec);
        let merged = match self.terms.remove(&e) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(e, merged);
        }
    }

    pub fn truncate(&self, p: u32) -> SeriesSymbol {
        let mut out = SeriesSymbol::zero(p.min(self.prec));
        for (e, c) in &self.terms {
            out.add_term(*e, c);
        }
        out
    }

    pub fn agrees_with(&self, other: &SeriesSymbol) -> bool {
        let p = self.prec.min(other.prec);
        self.truncate(p) == other.truncate(p)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn d_xi(&self, v: u8) -> SeriesSymbol {
        let mut out = SeriesSymbol::zero(self.prec);
        for (&(a, b), c) in &self.terms {
            let (e, n) = match v {
                1 => ((a.wrapping_sub(1), b), a),
                _ => ((a, b.wrapping_sub(1)), b),
            };
            if n > 0 {
                out.add_term(e, &c.scale(&Rat::from_integer(n.into())));
            }
        }
        out
    }

    fn d_x(&self, v: u8) -> SeriesSymbol {
        let mut out = SeriesSymbol::zero(self.prec.saturating_sub(1));
        for (e, c) in &self.terms {
            out.add_term(*e, &c.d_dx(v));
        }
        out
    }

    fn mul(&self, other: &SeriesSymbol) -> SeriesSymbol {
        let mut out = SeriesSymbol::zero(self.prec.min(other.prec));
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &other.terms {
                out.add_term((a1 + a2, b1 + b2), &c1.mul(c2));
            }
        }
        out
    }

    fn sub(&self, other: &SeriesSymbol) -> SeriesSymbol {
        let mut out = self.truncate(other.prec);
        for (e, c) in &other.terms {
            out.add_term(*e, &c.neg());
        }
        out
    }
}

/// Largest `q + s` over nonzero `d1^q d2^s` terms.
pub fn total_order(p: &EPlusOp) -> Option<u32> {
    p.terms()
        .keys()
        .filter(|(_, s)| *s >= 0)
        .map(|&(q, s)| q + s as u32)
        .max()
}

/// The homogeneous part of total degree `m` with its function coefficients.
pub fn symbol_part(p: &EPlusOp, m: u32) -> Result<SeriesSymbol> {
    if p.is_pdo() == Verdict::Fail {
        return math("not a differential operator");
    }
    let mut out = SeriesSymbol::zero(p.min_prec());
    for ((q, s), c) in p.terms() {
        if s >= 0 && q + s as u32 == m {
            out.add_term((q, s as u32), &c);
        }
    }
    Ok(out)
}

/// Top-degree part as a function-coefficient symbol, with its degree.
pub fn principal_symbol_series(p: &EPlusOp) -> Result<(u32, SeriesSymbol)> {
    let m = match total_order(p) {
        Some(m) => m,
        None => return math("zero operator has no principal symbol"),
    };
    Ok((m, symbol_part(p, m)?))
}

/// Principal symbol with constant coefficients.
pub fn principal_symbol(p: &EPlusOp) -> Result<SymbolPoly> {
    let (_, s) = principal_symbol_series(p)?;
    if s.terms.values().any(|c| !c.is_constant()) {
        return math("principal symbol has non-constant coefficients");
    }
    Ok(SymbolPoly::from_terms(
        s.terms.iter().map(|(e, c)| (*e, c.constant_term())),
    ))
}

pub fn check_constant_symbol(p: &EPlusOp) -> Result<bool> {
    let (_, s) = principal_symbol_series(p)?;
    Ok(s.terms.values().all(|c| c.is_constant()))
}

/// `{f,g} = sum_v df/dxi_v d_v(g) - dg/dxi_v d_v(f)`.
pub fn poisson_bracket(f: &SeriesSymbol, g: &SeriesSymbol) -> SeriesSymbol {
    let mut out = SeriesSymbol::zero(f.prec.min(g.prec).saturating_sub(1));
    for v in [1u8, 2] {
        let a = f.d_xi(v).mul(&g.d_x(v));
        let b = g.d_xi(v).mul(&f.d_x(v));
        let t = a.sub(&b);
        for (e, c) in &t.terms {
            out.add_term(*e, c);
        }
    }
    out
}

/// Linear change of coordinates `(d1', d2') M = (d1, d2)`.
///
/// Coefficients are rewritten through `x = x' A` with `A = (M^{-1})^T`, and
/// `d_j = sum_i M[i][j] d'_i`. Only differential operators are accepted.
pub fn linear_change(p: &EPlusOp, m: &Mat2) -> Result<EPlusOp> {
    if p.is_pdo() != Verdict::Pass {
        return math("coordinate change needs a differential operator");
    }
    let a = transpose2(&inv2(m)?);
    // d'_i = sum_l A[i][l] d_l and x'_j = sum_k x_k (A^{-1})[k][j]
    let check = mat_mul2(&a, &inv2(&a)?);
    for (i, row) in check.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let want = if i == j { Rat::one() } else { Rat::zero() };
            if *v != want {
                return math("coordinate change breaks the commutation relations");
            }
        }
    }
    // images of d1 and d2 as linear forms in (d1', d2')
    let img = [
        [m[0][0].clone(), m[1][0].clone()],
        [m[0][1].clone(), m[1][1].clone()],
    ];
    let prec = p.min_prec();
    let mut acc: BTreeMap<(u32, u32), XSeries> = BTreeMap::new();
    for ((q, s), c) in p.terms() {
        let c = c.linear_substitute(&a)?;
        let poly = poly_mul(&linear_pow(&img[0], q), &linear_pow(&img[1], s as u32));
        for ((e1, e2), k) in poly {
            let e = acc.entry((e1, e2)).or_insert_with(|| XSeries::zero(prec));
            *e = e.add(&c.scale(&k));
        }
    }
    let mut slots: BTreeMap<i64, D1Op> = BTreeMap::new();
    for ((e1, e2), c) in acc {
        let d = D1Op::from_series(e1, c.truncate(prec));
        let e = slots.entry(e2 as i64).or_insert_with(|| D1Op::zero(prec));
        *e = e.add(&d);
    }
    Ok(EPlusOp::from_slots(slots, p.window_lo(), prec))
}

type Poly = BTreeMap<(u32, u32), Rat>;

fn linear_pow(l: &[Rat; 2], n: u32) -> Poly {
    let mut lin = Poly::new();
    if !l[0].is_zero() {
        lin.insert((1, 0), l[0].clone());
    }
    if !l[1].is_zero() {
        lin.insert((0, 1), l[1].clone());
    }
    let mut acc = Poly::new();
    acc.insert((0, 0), Rat::one());
    for _ in 0..n {
        acc = poly_mul(&acc, &lin);
    }
    acc
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (&(i1, j1), c1) in a {
        for (&(i2, j2), c2) in b {
            *out.entry((i1 + i2, j1 + j2)).or_insert_with(Rat::zero) += c1 * c2;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}
