//! The right action of operators on `V = k((z1))((z2))` and subspaces of
//! `k[z1^-1]((z2))` in canonical echelon form.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::eplus::EPlusOp;
use crate::error::{format, math, Error, Result};
use crate::rat::{falling, Rat};
use crate::verdict::Verdict;
use crate::zseries::{tail_add, ZSeries};

/// `P(0)`: coefficients at `x = 0`, `d1^a d2^b -> z1^{-a} z2^{-b}`.
pub fn reduce_to_v(p: &EPlusOp) -> ZSeries {
    let mut z = ZSeries::zero(1 - p.window_lo());
    for ((q, s), c) in p.terms() {
        z.add_term(q, -s, c.constant_term());
    }
    z
}

/// `v * p`, computed by lifting `z1^{-k} z2^{j}` to `d1^k d2^{-j}`, composing
/// with `p` and reducing modulo `x1, x2` from the left.
///
/// A term `c z1^{-k} z2^{-l}` meets `f(x) d1^q d2^b` in
/// `sum_{m,n} c k^(m) l^(n) [x1^m x2^n]f z1^{-(k-m+q)} z2^{-(l-n+b)}`
/// with falling factorials `k^(m)`; for `l < 0` the sum over `n` is infinite.
pub fn right_act(v: &ZSeries, p: &EPlusOp) -> Result<ZSeries> {
    if v.i_bound().is_some() {
        return math("a z1-truncated series cannot be acted on by an operator");
    }
    let w = p.window_lo();
    let top = p.top().unwrap_or(w - 1);
    let mut tail = tail_add(v.tail(), -top);
    for ((k, j), _) in v.terms() {
        let l = -j;
        tail = tail.min(j - w + 1);
        for (&b, d) in p.slots() {
            let n0 = (d.prec() as i64 - k as i64).max(0);
            if l < 0 || n0 <= l {
                tail = tail.min(j + n0 - b);
            }
        }
    }
    let mut out = ZSeries::zero(tail);
    for ((k, j), c) in v.terms() {
        let l = -j;
        for (&b, d) in p.slots() {
            for (&q, f) in d.coeffs() {
                for (&(m, n), fc) in f.terms() {
                    if m > k || (l >= 0 && n as i64 > l) {
                        continue;
                    }
                    let e = j + n as i64 - b;
                    if e >= tail {
                        continue;
                    }
                    let coef = c * fc * Rat::from_integer(falling(k as i64, m) * falling(l, n));
                    out.add_term(k - m + q, e, coef);
                }
            }
        }
    }
    Ok(out)
}

/// Index cutoffs of a subspace: `i <= i_max`, `j <= j_max` and optionally
/// `i + j <= total`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub i_max: u32,
    pub j_max: u32,
    pub total: Option<u32>,
}

impl Bounds {
    pub fn rect(i_max: u32, j_max: u32) -> Self {
        Bounds {
            i_max,
            j_max,
            total: None,
        }
    }

    pub fn triangle(d: u32) -> Self {
        Bounds {
            i_max: d,
            j_max: d,
            total: Some(d),
        }
    }

    pub fn contains(&self, i: u32, j: u32) -> bool {
        i <= self.i_max && j <= self.j_max && self.total.is_none_or(|d| i + j <= d)
    }

    /// Index pairs in increasing `j`, then `i`.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..=self.j_max).flat_map(move |j| {
            (0..=self.i_max)
                .filter(move |&i| self.contains(i, j))
                .map(move |i| (i, j))
        })
    }
}

/// A subspace with support `W0 = k[z1^-1, z2^-1]` given by its canonical
/// basis `w_{i,j} = z1^{-i} z2^{-j} + (terms in z2^{>0})` inside the bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SubspaceWire", into = "SubspaceWire")]
pub struct SubspaceW {
    basis: BTreeMap<(u32, u32), ZSeries>,
    bounds: Bounds,
}

impl SubspaceW {
    /// `W0` itself.
    pub fn w0(bounds: Bounds) -> Self {
        SubspaceW {
            basis: bounds
                .iter()
                .map(|(i, j)| ((i, j), ZSeries::monomial(i, -(j as i64), Rat::from_integer(1.into()))))
                .collect(),
            bounds,
        }
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn basis(&self) -> impl Iterator<Item = (&(u32, u32), &ZSeries)> {
        self.basis.iter()
    }

    pub fn get(&self, i: u32, j: u32) -> Option<&ZSeries> {
        self.basis.get(&(i, j))
    }

    /// Equality of both bases on the index pairs and tails they share.
    pub fn agrees_with(&self, other: &SubspaceW) -> bool {
        self.basis.iter().all(|(k, a)| match other.basis.get(k) {
            Some(b) => a.agrees_with(b),
            None => true,
        })
    }

    /// Restricts to smaller bounds.
    pub fn restrict(&self, bounds: Bounds) -> SubspaceW {
        SubspaceW {
            basis: self
                .basis
                .iter()
                .filter(|(&(i, j), _)| bounds.contains(i, j))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
            bounds,
        }
    }

    /// Writes the nonpositive part of `v` in the basis and returns the
    /// remainder, or `None` when a needed basis element lies outside the
    /// bounds or the nonpositive part of `v` is not fully known.
    pub fn reduce(&self, v: &ZSeries) -> Option<ZSeries> {
        if v.tail() < 1 {
            return None;
        }
        let mut r = v.clone();
        loop {
            let next = r
                .terms()
                .filter(|&((_, j), _)| j <= 0)
                .map(|((i, j), c)| (i, j, c.clone()))
                .next();
            let (i, j, c) = match next {
                Some(t) => t,
                None => return Some(r),
            };
            let w = self.basis.get(&(i, (-j) as u32))?;
            r = r.sub(&w.scale(&c));
        }
    }
}

/// Gaussian elimination on lowest terms.
fn eliminate(generators: &[ZSeries]) -> BTreeMap<(u32, i64), ZSeries> {
    let mut pivots: BTreeMap<(u32, i64), ZSeries> = BTreeMap::new();
    for g in generators {
        let mut r = g.clone();
        while let Some((i, j, c)) = r.lt() {
            match pivots.get(&(i, j)) {
                Some(p) => {
                    let pc = p.coeff(i, j);
                    r = r.sub(&p.scale(&(c / pc)));
                }
                None => {
                    let inv = c.recip();
                    pivots.insert((i, j), r.scale(&inv));
                    break;
                }
            }
        }
    }
    pivots
}

/// Lowest-term monomials `(i, j)` (meaning `z1^{-i} z2^{j}`) of the span.
pub fn support(vs: &[ZSeries]) -> BTreeSet<(u32, i64)> {
    eliminate(vs).into_keys().collect()
}

/// The canonical basis of the span of `generators` within `bounds`.
pub fn echelon_basis(generators: &[ZSeries], bounds: Bounds) -> Result<SubspaceW> {
    let basis = canonical_rows(generators, bounds.iter())?;
    Ok(SubspaceW { basis, bounds })
}

/// Rows `z1^{-i} z2^{-j} * op` in canonical form within `bounds`, for an
/// operator with support-preserving action. Rows outside the bounds are
/// added while some row has a nonpositive term only they can eliminate.
pub fn w0_times(op: &EPlusOp, bounds: Bounds) -> Result<SubspaceW> {
    const MAX_ROWS: usize = 1 << 14;
    let mut rows: BTreeMap<(u32, u32), ZSeries> = BTreeMap::new();
    let mut queue: Vec<(u32, u32)> = bounds.iter().collect();
    while let Some((i, j)) = queue.pop() {
        if rows.contains_key(&(i, j)) {
            continue;
        }
        if rows.len() >= MAX_ROWS {
            return math(format!("more than {MAX_ROWS} rows needed to reduce W0 P within the bounds"));
        }
        let r = right_act(&ZSeries::monomial(i, -(j as i64), Rat::one()), op)?;
        if r.tail() < 1 {
            return math(format!(
                "row z1^-{i} z2^-{j} is known only below z2^{}; the operator window must reach d2^{} or lower",
                r.tail(),
                op.window_lo() - 1 + r.tail().min(0) - 1
            ));
        }
        queue.extend(
            r.terms()
                .filter(|&((a, b), _)| b <= 0 && (a, b) != (i, -(j as i64)))
                .map(|((a, b), _)| (a, (-b) as u32))
                .filter(|k| !rows.contains_key(k)),
        );
        rows.insert((i, j), r);
    }
    let keys: Vec<(u32, u32)> = rows.keys().copied().collect();
    let gens: Vec<ZSeries> = rows.into_values().collect();
    let mut basis = canonical_rows(&gens, keys)?;
    basis.retain(|&(i, j), _| bounds.contains(i, j));
    Ok(SubspaceW { basis, bounds })
}

/// Canonical rows at `indices`, every nonpositive term of the span being
/// a lowest term of some generator.
fn canonical_rows<I: IntoIterator<Item = (u32, u32)>>(
    generators: &[ZSeries],
    indices: I,
) -> Result<BTreeMap<(u32, u32), ZSeries>> {
    let indices: Vec<(u32, u32)> = indices.into_iter().collect();
    let pivots = eliminate(generators);
    let outside: Vec<String> = pivots
        .keys()
        .filter(|&&(_, j)| j > 0)
        .map(|&(i, j)| format!("z1^-{i} z2^{j}"))
        .collect();
    if !outside.is_empty() {
        return math(format!(
            "support defect: lowest terms outside W0: {}",
            outside.join(", ")
        ));
    }
    let missing: Vec<String> = indices
        .iter()
        .copied()
        .filter(|&(i, j)| !pivots.contains_key(&(i, -(j as i64))))
        .map(|(i, j)| format!("z1^-{i} z2^-{j}"))
        .collect();
    if !missing.is_empty() {
        return math(format!(
            "support defect: missing support monomials {}",
            missing.join(", ")
        ));
    }
    let mut basis = BTreeMap::new();
    for &(i, j) in &indices {
        let lt = (i, -(j as i64));
        let mut r = pivots[&lt].clone();
        if r.tail() < 1 {
            return math(format!(
                "row z1^-{i} z2^-{j} is known only below z2^{}; deepen the operator window",
                r.tail()
            ));
        }
        loop {
            // first nonpositive term other than the pivot, in elimination order
            let next = r
                .terms()
                .filter(|&((a, b), _)| b <= 0 && (a, b) != lt)
                .map(|((a, b), c)| (a, b, c.clone()))
                .next();
            let (a, b, c) = match next {
                Some(t) => t,
                None => break,
            };
            let p = pivots.get(&(a, b)).ok_or_else(|| {
                Error::Math(format!(
                    "support defect: z1^-{a} z2^{b} occurs but is not a lowest term"
                ))
            })?;
            let pc = p.coeff(a, b);
            r = r.sub(&p.scale(&(c / pc)));
        }
        if r.tail() < 1 {
            return math(format!(
                "row z1^-{i} z2^-{j} is known only below z2^{}; deepen the operator window",
                r.tail()
            ));
        }
        basis.insert((i, j), r);
    }
    Ok(basis)
}

/// Outcome of a stabilizer test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabReport {
    pub verdict: Verdict,
    pub rows_checked: usize,
    /// First basis row whose image left a nonzero remainder, with that remainder.
    pub witness: Option<((u32, u32), ZSeries)>,
}

/// Checks `w_{i,j} * p` in `W` for every basis row whose image can be
/// reduced within the bounds and whose remainder is known past `z2^0`.
pub fn stabilizes(w: &SubspaceW, p: &EPlusOp) -> Result<StabReport> {
    stabilizes_with(w, |row| right_act(row, p))
}

/// [`stabilizes`] for a constant-coefficient element given as a series,
/// acting by multiplication.
pub fn stabilizes_by_series(w: &SubspaceW, a: &ZSeries) -> Result<StabReport> {
    stabilizes_with(w, |row| Ok(row.mul(a)))
}

fn stabilizes_with<F: Fn(&ZSeries) -> Result<ZSeries>>(w: &SubspaceW, act: F) -> Result<StabReport> {
    let mut checked = 0;
    for (&(i, j), row) in &w.basis {
        let img = act(row)?;
        let rem = match w.reduce(&img) {
            Some(r) => r,
            None => continue,
        };
        if !rem.is_zero() {
            return Ok(StabReport {
                verdict: Verdict::Fail,
                rows_checked: checked + 1,
                witness: Some(((i, j), rem)),
            });
        }
        if rem.tail() > 1 {
            checked += 1;
        }
    }
    Ok(StabReport {
        verdict: if checked > 0 {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        },
        rows_checked: checked,
        witness: None,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisEntryWire {
    pub i: u32,
    pub j: u32,
    pub series: ZSeries,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceWire {
    pub bounds: Vec<u32>,
    pub basis: Vec<BasisEntryWire>,
}

impl From<SubspaceW> for SubspaceWire {
    fn from(w: SubspaceW) -> Self {
        let mut bounds = vec![w.bounds.i_max, w.bounds.j_max];
        if let Some(d) = w.bounds.total {
            bounds.push(d);
        }
        SubspaceWire {
            bounds,
            basis: w
                .basis
                .into_iter()
                .map(|((i, j), series)| BasisEntryWire { i, j, series })
                .collect(),
        }
    }
}

impl TryFrom<SubspaceWire> for SubspaceW {
    type Error = Error;
    fn try_from(w: SubspaceWire) -> Result<Self> {
        let bounds = match w.bounds.as_slice() {
            [i, j] => Bounds::rect(*i, *j),
            [i, j, d] => Bounds {
                i_max: *i,
                j_max: *j,
                total: Some(*d),
            },
            _ => return format("bounds must be [I, J] or [I, J, D]"),
        };
        let mut basis = BTreeMap::new();
        for e in w.basis {
            if !bounds.contains(e.i, e.j) {
                return format(format!("basis element ({}, {}) lies outside the bounds", e.i, e.j));
            }
            if basis.insert((e.i, e.j), e.series).is_some() {
                return format(format!("duplicate basis element ({}, {})", e.i, e.j));
            }
        }
        Ok(SubspaceW { basis, bounds })
    }
}

/// Checks the canonical shape `w_{i,j} = z1^{-i} z2^{-j} + (z2^{>0} terms)`.
pub fn check_canonical(w: &SubspaceW) -> Result<()> {
    for (&(i, j), row) in &w.basis {
        for ((a, b), c) in row.terms() {
            if b > 0 {
                continue;
            }
            let pivot = a == i && b == -(j as i64);
            if (pivot && *c != Rat::from_integer(1.into())) || (!pivot && !c.is_zero()) {
                return math(format!("row ({i}, {j}) is not in canonical form"));
            }
        }
        if row.coeff(i, -(j as i64)).is_zero() || row.tail() < 1 {
            return math(format!("row ({i}, {j}) is not in canonical form"));
        }
    }
    Ok(())
}

/// A monomial `c z1^{-i} z2^{j}`, known exactly.
pub fn zmono(i: u32, j: i64, c: Rat) -> ZSeries {
    ZSeries::monomial(i, j, c)
}
