//! One line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;

use common::*;
use sato2d::action::{stabilizes, w0_times, Bounds, SubspaceW};
use sato2d::d1::{d1_mul, D1Op};
use sato2d::dressing::{dress, has_constant_coefficients, kth_root};
use sato2d::eplus::{invert_monic, EPlusOp};
use sato2d::gallery::{
    calogero_operators, cusp_operators, example_calogero_symbols, example_cusp, example_toric,
    example_toric_pipeline, placeholder_potential, toric_operators,
};
use sato2d::growth::{check_a, check_aa, check_strong};
use sato2d::rat::{rat, ratio, Rat};
use sato2d::sato::{reconstruct, w_from_s};
use sato2d::symbol::{poisson_bracket, principal_symbol_series, symbol_part, total_order};
use sato2d::verdict::{Report, Verdict};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

fn named(r: &Report, pred: impl Fn(&str) -> bool) -> Result<usize, String> {
    let mut n = 0;
    for c in r.checks.iter().filter(|c| pred(&c.name)) {
        ensure!(c.status == Verdict::Pass, "{}: {} {}", c.name, c.status, c.witness.clone().unwrap_or_default());
        n += 1;
    }
    Ok(n)
}

/// `hi` knows at least what `lo` knows and agrees with it there.
fn covers(lo: &EPlusOp, hi: &EPlusOp) -> Result<(), String> {
    ensure!(hi.window_lo() <= lo.window_lo(), "window shrank from {} to {}", lo.window_lo(), hi.window_lo());
    for (&s, d) in lo.slots() {
        let hp = hi.slot_prec(s).unwrap_or(0);
        ensure!(hp >= d.prec(), "slot {s}: precision {} at the higher level, {} below", hp, d.prec());
    }
    ensure!(lo.agrees_with(hi), "coefficients differ");
    Ok(())
}

fn cusp_identities() -> Outcome {
    let t = Instant::now();
    let (_, _, r) = example_cusp(12, -8).map_err(|e| e.to_string())?;
    let n = named(&r, |n| n.starts_with("commutator") || n.starts_with("Q^2"))?;
    ensure!(n == 2, "expected two identity checks, found {n}");
    let el = t.elapsed();
    ensure!(el < Duration::from_secs(10), "took {el:.2?}");
    Ok(format!("[P,Q] = 0 and Q^2 = P^3 at prec 12, window -8 in {el:.2?}"))
}

fn toric_identities() -> Outcome {
    let (_, _, _, r) = example_toric(10, -6, Bounds::rect(2, 2)).map_err(|e| e.to_string())?;
    let n = named(&r, |n| n.starts_with("commutator"))?;
    let m = named(&r, |n| n.starts_with("A_1"))?;
    ensure!(n == 3 && m == 3, "expected 3 commutators and 3 certificates, found {n} and {m}");
    Ok("three commutators vanish, three A_1 certificates hold".into())
}

fn sato_roundtrip() -> Outcome {
    let mut r = rng(3);
    let b = Bounds::triangle(3);
    let mut slots_checked = 0;
    for trial in 0..100 {
        let s = unipotent(&mut r, 8, -5, 5);
        let w = w_from_s(&s, b).map_err(|e| format!("trial {trial}: {e}"))?;
        let rec = reconstruct(&w, -3).map_err(|e| format!("trial {trial}: {e}"))?;
        ensure!(rec.s.agrees_with(&s), "trial {trial}: reconstruction differs");
        ensure!(rec.slot_precs.get(&-1).is_some_and(|&p| p >= 2), "trial {trial}: nothing guaranteed at d2^-1");
        slots_checked += rec.slot_precs.values().filter(|&&p| p > 0).count();

        // a second presentation: rows of W0 f S for a unit f
        let f = EPlusOp::function(unit(&mut r, 8), -5);
        let w2 = w0_times(&f.mul(&s), b).map_err(|e| format!("trial {trial}: {e}"))?;
        let rec2 = reconstruct(&w2, -3).map_err(|e| format!("trial {trial}: {e}"))?;
        ensure!(rec2.s.agrees_with(&rec.s), "trial {trial}: two presentations give different S");
    }
    Ok(format!("100 trials, {slots_checked} guaranteed slots, second presentations agree"))
}

fn root_and_dressing() -> Outcome {
    let mut r = rng(4);
    for k in [2u32, 3, 5] {
        for trial in 0..50 {
            let l = monic_l2(&mut r, 8, -4);
            let p = l.pow(k);
            let root = kth_root(&p, k).map_err(|e| format!("k = {k}, trial {trial}: {e}"))?;
            ensure!(root.agrees_with(&l), "k = {k}, trial {trial}: root differs");
            ensure!(root.slot_prec(-1).is_some_and(|p| p > 0), "k = {k}, trial {trial}: root unknown at d2^-1");
        }
    }
    let d1 = term(1, 0, sato2d::series::XSeries::one(10), -6);
    let d2 = EPlusOp::d2_pow(1, 10, -6);
    for trial in 0..50 {
        let s0 = unipotent(&mut r, 10, -6, 2);
        let s0i = invert_monic(&s0).map_err(|e| e.to_string())?;
        let l1 = s0i.mul(&d1).mul(&s0);
        let l2 = s0i.mul(&d2).mul(&s0);
        let d = dress(&l1, &l2, -3).map_err(|e| format!("dress trial {trial}: {e}"))?;
        let dev = d.s.mul(&s0i);
        ensure!(has_constant_coefficients(&dev), "dress trial {trial}: S S0^-1 has non-constant coefficients");
    }
    Ok("150 roots, 50 dressings with constant deviation".into())
}

fn condition_closure() -> Outcome {
    let mut r = rng(5);
    let alphas = [rat(1), ratio(3, 2), rat(2)];
    let mut inconclusive = 0;
    for trial in 0..200 {
        let alpha = &alphas[trial % 3];
        let a1 = (r.gen_range(0..=2), r.gen_range(0..=2));
        let a2 = (r.gen_range(0..=2), r.gen_range(0..=2));
        let sum = (a1.0 + a2.0, a1.1 + a2.1);
        let p1 = certified(&mut r, 8, -3, alpha, a1);
        let p2 = certified(&mut r, 8, -3, alpha, a2);
        for (p, a) in [(&p1, a1), (&p2, a2)] {
            ensure!(check_a(p, alpha, a).unwrap().holds(), "trial {trial}: generator not certified");
        }
        let c = check_a(&p1.mul(&p2), alpha, sum).unwrap();
        ensure!(c.verdict != Verdict::Fail, "trial {trial}: A_alpha product fails at {:?}", c.witness);
        let q1 = strong(&mut r, 8, -3, alpha, a1);
        let q2 = strong(&mut r, 8, -3, alpha, a2);
        let c = check_strong(&q1.mul(&q2), alpha, sum).unwrap();
        ensure!(c.verdict != Verdict::Fail, "trial {trial}: strong product fails at {:?}", c.witness);
        // AA anchors add
        let (f1, f2) = (r.gen_range(0..3u32), r.gen_range(0..3u32));
        let g1 = aa_op(&mut r, f1);
        let g2 = aa_op(&mut r, f2);
        let v = check_aa(&d1_mul(&g1, &g2), &rat((f1 + f2) as i64));
        ensure!(v != Verdict::Fail, "trial {trial}: AA_{} fails for a product", f1 + f2);
        // 1 + S^- certified at (0,0) has a certified inverse
        let s = certified_unipotent(&mut r, alpha);
        let si = invert_monic(&s).map_err(|e| e.to_string())?;
        let c = check_a(&si, alpha, (0, 0)).unwrap();
        ensure!(c.verdict != Verdict::Fail, "trial {trial}: inverse leaves A_alpha at {:?}", c.witness);
        if c.verdict == Verdict::Inconclusive {
            inconclusive += 1;
        }
    }
    let mut caught = 0;
    for trial in 0..60 {
        let alpha = &alphas[trial % 3];
        let a = (r.gen_range(0..=2), r.gen_range(0..=2));
        let p = certified(&mut r, 8, -3, alpha, a);
        // x-free d1^i d2^j just past the cone edge needs positive order
        let j = a.1 - r.gen_range(0..=1);
        let edge = alpha * rat(a.1 - j) + rat(a.0);
        let i: u32 = edge.floor().to_integer().try_into().unwrap();
        let bad = p.add(&term(i + 1, j, sato2d::series::XSeries::one(8), -3));
        let v = check_a(&bad, alpha, a).unwrap().verdict;
        ensure!(v != Verdict::Pass, "violator {trial} passed A_alpha");
        let vs = check_strong(&bad, alpha, a).unwrap().verdict;
        ensure!(vs != Verdict::Pass, "violator {trial} passed the strong condition");
        caught += 1;
    }
    Ok(format!("200 certified pairs closed ({inconclusive} inconclusive), {caught} violators rejected"))
}

fn aa_op<R: Rng>(r: &mut R, f: u32) -> D1Op {
    let coeffs = (0..=f + 2).map(|q| (q, series(r, 8, 2, q.saturating_sub(f))));
    D1Op::from_coeffs(coeffs, 8)
}

fn certified_unipotent<R: Rng>(r: &mut R, alpha: &Rat) -> EPlusOp {
    let mut s = EPlusOp::one(8, -3);
    for j in 1..=3i64 {
        let q: u32 = r.gen_range(0..=3);
        let need = rat(q as i64) - alpha * rat(j);
        let need: u32 = need.ceil().to_integer().try_into().unwrap_or(0);
        s = s.add(&term(q, -j, series(r, 8, 2, need), -3));
    }
    s
}

fn pipeline() -> Outcome {
    let p = example_toric_pipeline(10, -6, -4, 3).map_err(|e| e.to_string())?;
    named(&p.report, |_| true)?;
    let nu: Vec<String> = p.nu.iter().map(|v| v.to_string()).collect();
    Ok(format!("rank {}, nu {}, eigenvalues match", p.validation.data.rank_r, nu.join(" ")))
}

fn stabilizers() -> Outcome {
    let (_, _, _, r) = example_toric(10, -6, Bounds::rect(6, 6)).map_err(|e| e.to_string())?;
    let n = named(&r, |n| n.contains("stabilizes W"))?;
    ensure!(n == 3, "expected 3 stabilizer checks, found {n}");
    let mut g = rng(7);
    let w0 = SubspaceW::w0(Bounds::triangle(4));
    for trial in 0..20 {
        let p = pdo(&mut g, 8, -3, 3);
        let v = stabilizes(&w0, &p).map_err(|e| e.to_string())?;
        ensure!(v.verdict == Verdict::Pass, "PDO {trial}: {}", v.verdict);
    }
    for trial in 0..20 {
        let p = pdo(&mut g, 8, -3, 3);
        let s = -g.gen_range(1..=2i64);
        let q = g.gen_range(0..=2);
        let bad = p.add(&term(q, s, series(&mut g, 8, 2, 0).add(&sato2d::series::XSeries::constant(small(&mut g), 8)), -3));
        let v = stabilizes(&w0, &bad).map_err(|e| e.to_string())?;
        ensure!(v.verdict == Verdict::Fail, "contaminated {trial}: {}", v.verdict);
        let ((i, j), rem) = v.witness.expect("failures carry a witness");
        ensure!(!rem.is_zero(), "contaminated {trial}: empty witness at w_{{{i},{j}}}");
    }
    Ok("toric W stable within (6,6); 20 PDOs stabilize W0, 20 contaminated operators do not".into())
}

fn precision_soundness() -> Outcome {
    let mut checked = 0;
    let (p12, q12) = cusp_operators(12, -8);
    let (p13, q13) = cusp_operators(13, -8);
    for (lo, hi) in [(&p12, &p13), (&q12, &q13)] {
        covers(lo, hi).map_err(|e| format!("cusp: {e}"))?;
    }
    covers(&q12.mul(&q12).sub(&p12.pow(3)), &q13.mul(&q13).sub(&p13.pow(3))).map_err(|e| format!("cusp Q^2 - P^3: {e}"))?;
    checked += 3;
    let lo = toric_operators(10, -6);
    let hi = toric_operators(11, -6);
    for (a, b) in [(&lo.0, &hi.0), (&lo.1, &hi.1), (&lo.2, &hi.2)] {
        covers(a, b).map_err(|e| format!("toric: {e}"))?;
    }
    covers(&lo.0.mul(&lo.1), &hi.0.mul(&hi.1)).map_err(|e| format!("toric PQ: {e}"))?;
    checked += 4;

    let mut r = rng(8);
    let b = Bounds::triangle(3);
    for trial in 0..20 {
        let s9 = unipotent(&mut r, 9, -5, 5);
        let s8 = s9.truncate_prec(8);
        let lo = reconstruct(&w_from_s(&s8, b).map_err(|e| e.to_string())?, -3).map_err(|e| e.to_string())?;
        let hi = reconstruct(&w_from_s(&s9, b).map_err(|e| e.to_string())?, -3).map_err(|e| e.to_string())?;
        covers(&lo.s, &hi.s).map_err(|e| format!("sato trial {trial}: {e}"))?;
        checked += 1;
    }
    for trial in 0..20 {
        let k = [2, 3, 5][trial % 3];
        let l9 = monic_l2(&mut r, 9, -4);
        let l8 = l9.truncate_prec(8);
        let lo = kth_root(&l8.pow(k), k).map_err(|e| e.to_string())?;
        let hi = kth_root(&l9.pow(k), k).map_err(|e| e.to_string())?;
        covers(&lo, &hi).map_err(|e| format!("root trial {trial}: {e}"))?;
        checked += 1;
    }
    for trial in 0..10 {
        let s11 = unipotent(&mut r, 11, -6, 2);
        let s10 = s11.truncate_prec(10);
        let run = |s0: &EPlusOp, prec| -> Result<EPlusOp, String> {
            let s0i = invert_monic(s0).map_err(|e| e.to_string())?;
            let d1 = term(1, 0, sato2d::series::XSeries::one(prec), -6);
            let d2 = EPlusOp::d2_pow(1, prec, -6);
            let l1 = s0i.mul(&d1).mul(s0);
            let l2 = s0i.mul(&d2).mul(s0);
            Ok(dress(&l1, &l2, -3).map_err(|e| e.to_string())?.s)
        };
        let lo = run(&s10, 10)?;
        let hi = run(&s11, 11)?;
        covers(&lo, &hi).map_err(|e| format!("dress trial {trial}: {e}"))?;
        checked += 1;
    }
    Ok(format!("{checked} lower runs confirmed at one precision level higher"))
}

fn symbol_layer() -> Outcome {
    let mut r = rng(9);
    for trial in 0..50 {
        let p = pdo(&mut r, 8, -3, 3);
        let q = pdo(&mut r, 8, -3, 3);
        let (Some(m), Some(n)) = (total_order(&p), total_order(&q)) else {
            continue;
        };
        let (_, sp) = principal_symbol_series(&p).map_err(|e| e.to_string())?;
        let (_, sq) = principal_symbol_series(&q).map_err(|e| e.to_string())?;
        let lhs = symbol_part(&p.commutator(&q), (m + n).saturating_sub(1)).map_err(|e| e.to_string())?;
        let rhs = poisson_bracket(&sp, &sq);
        ensure!(m + n > 0 || rhs.is_zero(), "trial {trial}: nonzero bracket of order-zero operators");
        ensure!(lhs.agrees_with(&rhs), "trial {trial}: sigma([P,Q]) differs from the bracket");
    }
    let g = placeholder_potential(6);
    calogero_operators(&g, 2, -2).map_err(|e| e.to_string())?;
    let rep = example_calogero_symbols(&g, 2).map_err(|e| e.to_string())?;
    named(&rep, |_| true)?;
    Ok("50 brackets match; L1 = d2' and sigma(L2) = 2 xi1'^2 - 2 xi1' xi2' + xi2'^2".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("cusp identities", cusp_identities),
        ("toric identities", toric_identities),
        ("sato roundtrip", sato_roundtrip),
        ("root and dressing roundtrips", root_and_dressing),
        ("condition closure", condition_closure),
        ("pipeline end to end", pipeline),
        ("stabilizer and support", stabilizers),
        ("precision soundness", precision_soundness),
        ("symbol layer", symbol_layer),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = f();
        let el = t.elapsed();
        match out {
            Ok(detail) => println!("criterion {} {name}: PASS ({el:.2?}) {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({el:.2?}) {why}", n + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
