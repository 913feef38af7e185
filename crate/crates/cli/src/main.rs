use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use sato2d::action::{Bounds, SubspaceW};
use sato2d::ba::apply_to_exponential;
use sato2d::dressing::{dress, kth_root, normalize, schur_from_ring};
use sato2d::eplus::EPlusOp;
use sato2d::error::Error;
use sato2d::gallery;
use sato2d::growth::{check, natural_anchor, GrowthKind};
use sato2d::rat::parse_rat;
use sato2d::sato::reconstruct;
use sato2d::schur::{invariants_na, psi1, ring_closure, validate_schur_pair, Cutoffs, UTSeries};
use sato2d::verdict::{Check, Report};
use sato2d::zseries::ZSeries;

/// Exact calculus of truncated operators in two variables.
#[derive(Parser)]
#[command(name = "sato2d", version)]
struct Cli {
    /// x-precision: caps the result of mul, commutator and root, truncates the
    /// inputs of the other operator commands, sets the precision of examples.
    #[arg(long, global = true)]
    prec: Option<u32>,
    /// Lowest d2-slot kept (a negative integer).
    #[arg(long, global = true, allow_hyphen_values = true)]
    window: Option<i64>,
    /// Index cutoff for subspaces, u-cap for psi1, word count for closures.
    #[arg(long, global = true)]
    cutoff: Option<u32>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Product of two operators.
    Mul { a: PathBuf, b: PathBuf },
    /// `[A, B]`.
    Commutator { a: PathBuf, b: PathBuf },
    /// The operator `S = 1 + S^-` with `W0 S = W`.
    SatoReconstruct { w: PathBuf },
    /// The monic k-th root of an operator of order `d2^k`.
    Root {
        p: PathBuf,
        #[arg(long, short)]
        k: u32,
    },
    /// Conjugates a commuting pair to normal form.
    Normalize { p: PathBuf, q: PathBuf },
    /// Dressing operator of a normalized pair; `--window` is the floor.
    Dress { l1: PathBuf, l2: PathBuf },
    /// Images `S X S^-1` and `W = W0 S^-1` for commuting generators.
    Schur {
        /// A JSON array of operators.
        gens: PathBuf,
        #[arg(long, default_value_t = 0)]
        p_index: usize,
        #[arg(long, default_value_t = 1)]
        q_index: usize,
    },
    /// `z1^-i z2^j -> u^i t^(j-i)`.
    Psi1 { v: PathBuf },
    /// `N_A`, `Ñ_A` and admissibility of a JSON array of generators.
    Invariants { gens: PathBuf },
    /// Checks a pair `(A, W)` given as JSON arrays of series in `u, t`.
    ValidateSchur {
        a: PathBuf,
        w: PathBuf,
        #[arg(long, default_value_t = 3)]
        words: u32,
    },
    /// The operator applied to `exp(x1/z1 + x2/z2)`.
    Ba { t: PathBuf },
    /// Growth certificate of one operator.
    CheckCondition {
        p: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::A)]
        kind: Kind,
        #[arg(long, default_value = "1")]
        alpha: String,
        /// `i,j`; defaults to the highest term.
        #[arg(long, allow_hyphen_values = true)]
        anchor: Option<String>,
    },
    /// Reports for the worked examples.
    Example {
        #[arg(value_enum)]
        which: Which,
        /// Coupling `m` of the Calogero example.
        #[arg(long, default_value_t = 2)]
        m: i64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    A,
    Strong,
    SuperStrong,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Cusp,
    Toric,
    CalogeroSymbols,
    SatoWilson,
}

enum Failure {
    Math(String),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Math(m) => Failure::Math(m),
            Error::Format(m) => Failure::Input(m),
        }
    }
}

type Out = Result<serde_json::Value, Failure>;

fn read<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn value<T: Serialize>(v: &T) -> Out {
    serde_json::to_value(v).map_err(|e| Failure::Input(e.to_string()))
}

impl Cli {
    fn op(&self, path: &Path) -> Result<EPlusOp, Failure> {
        Ok(self.trim(self.raw_op(path)?))
    }

    fn raw_op(&self, path: &Path) -> Result<EPlusOp, Failure> {
        let mut p: EPlusOp = read(path)?;
        if let Some(w) = self.window {
            p = p.with_window(w);
        }
        Ok(p)
    }

    fn trim(&self, p: EPlusOp) -> EPlusOp {
        match self.prec {
            Some(n) => p.truncate_prec(n),
            None => p,
        }
    }

    fn bounds(&self) -> Bounds {
        Bounds::triangle(self.cutoff.unwrap_or(3))
    }

    fn run(&self) -> Out {
        match &self.cmd {
            Cmd::Mul { a, b } => value(&self.trim(self.raw_op(a)?.mul(&self.raw_op(b)?))),
            Cmd::Commutator { a, b } => value(&self.trim(self.raw_op(a)?.commutator(&self.raw_op(b)?))),
            Cmd::SatoReconstruct { w } => {
                let w: SubspaceW = read(w)?;
                let r = reconstruct(&w, self.window.unwrap_or(-4))?;
                let precs: Vec<_> = r.slot_precs.iter().map(|(s, p)| json!({"s": s, "prec": p})).collect();
                Ok(json!({"s": value(&r.s)?, "slot_precs": precs}))
            }
            Cmd::Root { p, k } => value(&self.trim(kth_root(&self.raw_op(p)?, *k)?)),
            Cmd::Normalize { p, q } => {
                let n = normalize(&self.op(p)?, &self.op(q)?)?;
                Ok(json!({"s": value(&n.s)?, "s_inv": value(&n.s_inv)?, "p": value(&n.p)?, "q": value(&n.q)?}))
            }
            Cmd::Dress { l1, l2 } => {
                let floor = self.window.unwrap_or(-4);
                let d = dress(&self.op(l1)?, &self.op(l2)?, floor)?;
                Ok(json!({"s": value(&d.s)?, "s_inv": value(&d.s_inv)?, "stages": d.stages}))
            }
            Cmd::Schur { gens, p_index, q_index } => {
                let raw: Vec<EPlusOp> = read(gens)?;
                let gens: Vec<EPlusOp> = raw.into_iter().map(|p| self.trim(p)).collect();
                let floor = self.window.unwrap_or(-4);
                let r = schur_from_ring(&gens, *p_index, *q_index, self.bounds(), floor)?;
                let mut rep = Report::default();
                for (n, s) in r.stab.iter().enumerate() {
                    let mut c = Check::new(format!("image {n} stabilizes W"), s.verdict);
                    if let Some(((i, j), rem)) = &s.witness {
                        c = c.with_witness(format!("w_{{{i},{j}}} leaves W: {rem}"));
                    }
                    rep.push(c);
                }
                Ok(json!({"s": value(&r.s_total)?, "a": value(&r.a)?, "w": value(&r.w)?, "report": value(&rep)?}))
            }
            Cmd::Psi1 { v } => {
                let v: ZSeries = read(v)?;
                value(&psi1(&v, self.cutoff.unwrap_or(6))?)
            }
            Cmd::Invariants { gens } => {
                let gens: Vec<UTSeries> = read(gens)?;
                let closure = ring_closure(&gens, self.cutoff.unwrap_or(6));
                value(&invariants_na(&closure)?)
            }
            Cmd::ValidateSchur { a, w, words } => {
                let a: Vec<UTSeries> = read(a)?;
                let w: Vec<UTSeries> = read(w)?;
                let v = validate_schur_pair(&a, &w, Cutoffs { bounds: self.bounds(), words: *words })?;
                let d = &v.data;
                Ok(json!({
                    "rank_r": d.rank_r,
                    "n_a": d.n_a,
                    "tilde_n_a": d.tilde_n_a,
                    "cutoffs": value(&d.cutoffs)?,
                    "checks": value(&v.report.checks)?,
                }))
            }
            Cmd::Ba { t } => value(&apply_to_exponential(&self.op(t)?)),
            Cmd::CheckCondition { p, kind, alpha, anchor } => {
                let p = self.op(p)?;
                let alpha = parse_rat(alpha)?;
                let anchor = match anchor {
                    Some(s) => parse_anchor(s)?,
                    None => natural_anchor(&p)?,
                };
                let kind = match kind {
                    Kind::A => GrowthKind::A,
                    Kind::Strong => GrowthKind::Strong,
                    Kind::SuperStrong => GrowthKind::SuperStrong,
                };
                value(&check(&p, &alpha, anchor, kind)?)
            }
            Cmd::Example { which, m } => value(&self.example(*which, *m)?),
        }
    }

    fn example(&self, which: Which, m: i64) -> Result<Report, Failure> {
        Ok(match which {
            Which::Cusp => gallery::example_cusp(self.prec.unwrap_or(12), self.window.unwrap_or(-8))?.2,
            Which::Toric => {
                let (prec, window) = (self.prec.unwrap_or(10), self.window.unwrap_or(-6));
                let c = self.cutoff.unwrap_or(6);
                let mut r = gallery::example_toric(prec, window, Bounds::rect(c, c))?.3;
                let pipe = gallery::example_toric_pipeline(prec, window, window + 2, 3)?;
                for ch in pipe.report.checks {
                    r.push(Check { name: format!("pipeline: {}", ch.name), ..ch });
                }
                r
            }
            Which::CalogeroSymbols => {
                gallery::example_calogero_symbols(&gallery::placeholder_potential(self.prec.unwrap_or(6)), m)?
            }
            Which::SatoWilson => gallery::example_sato_wilson(self.prec.unwrap_or(8))?,
        })
    }
}

fn parse_anchor(s: &str) -> Result<(i64, i64), Failure> {
    let bad = || Failure::Input(format!("anchor must be `i,j`, got `{s}`"));
    let (i, j) = s.split_once(',').ok_or_else(bad)?;
    Ok((i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.run().and_then(|v| {
        let mut text = serde_json::to_string_pretty(&v).map_err(|e| Failure::Input(e.to_string()))?;
        text.push('\n');
        match &cli.out {
            Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Math(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
