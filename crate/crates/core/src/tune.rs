//! Coin parametrizations of `μ` and their optimization.
//!
//! A parametrization assigns each context in `S[Ψ]` either a fixed symbol or
//! one of a few shared coins. Optimizing the coin probabilities for the
//! largest `lp_min` gives a lower bound on the capacity of the constraint.
//!
//! Text format:
//!
//! ```text
//! psi = (0,-2) (0,-1) (-1,-1) (-1,0) (-1,1)
//! default = 0
//! coin 0: (00000)
//! coin 1: (00010)
//! theta 0 = 0.741868 0.258132
//! theta 1 = 0.687769 0.312231
//! det (11111) = 0
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{self, BoundResult, BoundsError, BoundsOptions, LpTemplate};
use crate::constraint::Constraint;
use crate::encoder::{validate_encoder, BoundaryDist, EncoderSpec, InvalidEncoder, MuTable, DIST_TOLERANCE};
use crate::format::{context_string, parse_context, parse_index, parse_symbol, symbol_char};
use crate::grid::{Index, IndexSet, Symbol};
use crate::lpsolve::{Direction, LpStatus};

pub const THETA_FLOOR: f64 = 1e-6;
pub const RESTARTS: usize = 5;
pub const CONVERGED_DIAMETER: f64 = 1e-6;
const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
const INITIAL_STEP: f64 = 0.1;

#[derive(Debug, Error)]
pub enum TuneError {
    #[error("theta {coin} does not sum to 1 (sum {sum})")]
    BadTheta { coin: usize, sum: f64 },
    #[error("theta {coin} has {got} entries, expected {expected}")]
    ThetaLength { coin: usize, got: usize, expected: usize },
    #[error("coin {0} is referenced but has no theta")]
    MissingTheta(usize),
    #[error("context ({0}) has the wrong length or an out-of-range symbol")]
    BadContext(String),
    #[error(transparent)]
    Invalid(#[from] InvalidEncoder),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContextClass {
    Deterministic(Symbol),
    Coin(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoinParametrization {
    pub psi: IndexSet,
    pub alphabet: Symbol,
    pub classes: BTreeMap<Vec<Symbol>, ContextClass>,
    /// Symbol written in contexts absent from `classes`.
    pub default: Option<Symbol>,
    pub theta: Vec<Vec<f64>>,
}

impl CoinParametrization {
    pub fn new(psi: IndexSet, alphabet: Symbol, default: Option<Symbol>) -> Self {
        CoinParametrization { psi, alphabet, classes: BTreeMap::new(), default, theta: Vec::new() }
    }

    /// Adds a coin with distribution `theta` used at every given context.
    pub fn add_coin(&mut self, contexts: &[Vec<Symbol>], theta: Vec<f64>) -> usize {
        let k = self.theta.len();
        self.theta.push(theta);
        for ctx in contexts {
            self.classes.insert(ctx.clone(), ContextClass::Coin(k));
        }
        k
    }

    /// Groups contexts by their set of admissible symbols: every context
    /// with at least two admissible symbols shares the coin of its group,
    /// initialized uniform over that set. Other contexts write their only
    /// admissible symbol.
    pub fn by_admissible_sets(c: &Constraint, psi: &IndexSet) -> Self {
        let mut p = CoinParametrization::new(psi.clone(), c.alphabet(), None);
        let mut groups: BTreeMap<Vec<Symbol>, Vec<Vec<Symbol>>> = BTreeMap::new();
        for phi in c.restriction(psi).members() {
            let ok = admissible_symbols(c, psi, phi);
            if ok.len() == 1 {
                p.classes.insert(phi.clone(), ContextClass::Deterministic(ok[0]));
            } else {
                groups.entry(ok).or_default().push(phi.clone());
            }
        }
        for (ok, ctxs) in groups {
            let mut theta = vec![0.0; c.alphabet() as usize];
            for &w in &ok {
                theta[w as usize] = 1.0 / ok.len() as f64;
            }
            p.add_coin(&ctxs, theta);
        }
        p
    }

    pub fn num_coins(&self) -> usize {
        self.theta.len()
    }

    /// Coins whose distribution is not within `1e-9` of a point mass.
    pub fn effective_coins(&self) -> usize {
        self.theta.iter().filter(|th| th.iter().all(|&p| p < 1.0 - 1e-9)).count()
    }

    pub fn check(&self) -> Result<(), TuneError> {
        for (k, th) in self.theta.iter().enumerate() {
            if th.len() != self.alphabet as usize {
                return Err(TuneError::ThetaLength { coin: k, got: th.len(), expected: self.alphabet as usize });
            }
            let sum: f64 = th.iter().sum();
            if (sum - 1.0).abs() > DIST_TOLERANCE || th.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                return Err(TuneError::BadTheta { coin: k, sum });
            }
        }
        for (ctx, class) in &self.classes {
            if ctx.len() != self.psi.len() || ctx.iter().any(|&s| s >= self.alphabet) {
                return Err(TuneError::BadContext(context_string(ctx)));
            }
            match *class {
                ContextClass::Coin(k) if k >= self.theta.len() => return Err(TuneError::MissingTheta(k)),
                ContextClass::Deterministic(s) if s >= self.alphabet => return Err(TuneError::BadContext(context_string(ctx))),
                _ => {}
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("psi =");
        for p in self.psi.iter() {
            let _ = write!(out, " {p}");
        }
        out.push('\n');
        if let Some(d) = self.default {
            let _ = writeln!(out, "default = {}", symbol_char(d));
        }
        let mut coins: Vec<Vec<&Vec<Symbol>>> = vec![Vec::new(); self.theta.len()];
        for (ctx, class) in &self.classes {
            if let ContextClass::Coin(k) = class {
                coins[*k].push(ctx);
            }
        }
        for (k, ctxs) in coins.iter().enumerate() {
            let _ = write!(out, "coin {k}:");
            for ctx in ctxs {
                let _ = write!(out, " ({})", context_string(ctx));
            }
            out.push('\n');
        }
        for (k, th) in self.theta.iter().enumerate() {
            let _ = write!(out, "theta {k} =");
            for p in th {
                let _ = write!(out, " {p}");
            }
            out.push('\n');
        }
        for (ctx, class) in &self.classes {
            if let ContextClass::Deterministic(s) = class {
                let _ = writeln!(out, "det ({}) = {}", context_string(ctx), symbol_char(*s));
            }
        }
        out
    }

    pub fn parse(text: &str, alphabet: Symbol) -> Result<Self, TuneError> {
        let mut psi = None;
        let mut default = None;
        let mut coins: BTreeMap<usize, Vec<Vec<Symbol>>> = BTreeMap::new();
        let mut thetas: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        let mut dets = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |msg: String| TuneError::Parse { line, msg };
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix("coin ") {
                let (idx, ctxs) = rest.split_once(':').ok_or_else(|| err("expected `coin <index>: (ctx) ...`".into()))?;
                let idx: usize = idx.trim().parse().map_err(|e| err(format!("coin index: {e}")))?;
                let list = ctxs.split_whitespace().map(parse_context).collect::<Result<Vec<_>, _>>().map_err(err)?;
                coins.entry(idx).or_default().extend(list);
            } else if let Some(rest) = body.strip_prefix("theta ") {
                let (idx, vals) = rest.split_once('=').ok_or_else(|| err("expected `theta <index> = p0 p1 ...`".into()))?;
                let idx: usize = idx.trim().parse().map_err(|e| err(format!("theta index: {e}")))?;
                let vals = vals
                    .split_whitespace()
                    .map(|v| v.parse::<f64>().map_err(|e| err(format!("probability `{v}`: {e}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                thetas.insert(idx, vals);
            } else if let Some(rest) = body.strip_prefix("det ") {
                let (ctx, sym) = rest.split_once('=').ok_or_else(|| err("expected `det (ctx) = <symbol>`".into()))?;
                dets.push((parse_context(ctx.trim()).map_err(err)?, parse_symbol(sym.trim()).map_err(err)?));
            } else if let Some((key, value)) = body.split_once('=') {
                match key.trim() {
                    "psi" => {
                        let cells = value.split_whitespace().map(parse_index).collect::<Result<Vec<Index>, _>>().map_err(err)?;
                        psi = Some(IndexSet::from_indexes(cells));
                    }
                    "default" => default = Some(parse_symbol(value.trim()).map_err(err)?),
                    other => return Err(err(format!("unknown key `{other}`"))),
                }
            } else {
                return Err(err(format!("unrecognized line `{body}`")));
            }
        }
        let psi = psi.ok_or(TuneError::Parse { line: 0, msg: "missing `psi` line".into() })?;
        let n = coins.keys().chain(thetas.keys()).max().map_or(0, |&k| k + 1);
        let mut p = CoinParametrization::new(psi, alphabet, default);
        for k in 0..n {
            let th = thetas.remove(&k).ok_or(TuneError::MissingTheta(k))?;
            p.add_coin(coins.get(&k).map_or(&[][..], |v| v.as_slice()), th);
        }
        for (ctx, s) in dets {
            p.classes.insert(ctx, ContextClass::Deterministic(s));
        }
        p.check()?;
        Ok(p)
    }

    fn free_layout(&self) -> Vec<(usize, Vec<Symbol>)> {
        // Per coin: its support; the first support symbol takes the remainder.
        self.theta
            .iter()
            .enumerate()
            .filter_map(|(k, th)| {
                let supp: Vec<Symbol> = (0..self.alphabet).filter(|&w| th[w as usize] > 0.0).collect();
                (supp.len() > 1).then_some((k, supp))
            })
            .collect()
    }
}

fn admissible_symbols(c: &Constraint, psi: &IndexSet, phi: &[Symbol]) -> Vec<Symbol> {
    (0..c.alphabet())
        .filter(|&w| {
            !c.forbidden().iter().any(|pat| {
                pat.anchor_symbol() == w
                    && pat.predecessors().iter().all(|&(d, s)| psi.position(d).is_some_and(|k| phi[k] == s))
            })
        })
        .collect()
}

/// Expands a parametrization into a full `μ` table.
pub fn realize_mu(p: &CoinParametrization) -> Result<MuTable, TuneError> {
    p.check()?;
    let mut mu = MuTable::new(p.alphabet, p.psi.len(), p.default);
    for (ctx, class) in &p.classes {
        let dist = match *class {
            ContextClass::Deterministic(s) => crate::encoder::point_mass(p.alphabet, s),
            ContextClass::Coin(k) => p.theta[k].clone(),
        };
        mu.set(ctx.clone(), dist);
    }
    Ok(mu)
}

/// The encoder of `p` with the constraint's safe symbol as boundary fill.
pub fn realize_encoder(c: &Constraint, p: &CoinParametrization) -> Result<EncoderSpec, TuneError> {
    let mu = realize_mu(p)?;
    let fill = c.safe_symbol().unwrap_or(0);
    let e = EncoderSpec::new(p.psi.clone(), mu, BoundaryDist::ConstantFill(fill));
    validate_encoder(c, &e)?;
    Ok(e)
}

#[derive(Clone, Debug)]
pub struct TuneOptions {
    pub budget: usize,
    pub seed: u64,
    pub bounds: BoundsOptions,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions { budget: 500, seed: 0, bounds: BoundsOptions::default() }
    }
}

#[derive(Clone, Debug)]
pub struct TuneOutcome {
    pub parametrization: CoinParametrization,
    pub bounds: BoundResult,
    /// LP evaluations spent, the starting point included.
    pub evaluations: usize,
    pub budget_exhausted: bool,
    pub start_lp_min: f64,
}

struct Objective<'a> {
    template: LpTemplate,
    layout: Vec<(usize, Vec<Symbol>)>,
    base: &'a CoinParametrization,
    opts: &'a BoundsOptions,
}

impl Objective<'_> {
    fn dim(&self) -> usize {
        self.layout.iter().map(|(_, s)| s.len() - 1).sum()
    }

    fn point_of(&self, p: &CoinParametrization) -> Vec<f64> {
        self.layout.iter().flat_map(|(k, supp)| supp[1..].iter().map(|&w| p.theta[*k][w as usize]).collect::<Vec<_>>()).collect()
    }

    /// Clamps each coordinate to `[THETA_FLOOR, 1 − THETA_FLOOR]`, then
    /// scales each coin's block so the remainder is at least `THETA_FLOOR`.
    fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(x.len());
        let mut at = 0;
        for (_, supp) in &self.layout {
            let d = supp.len() - 1;
            let mut block: Vec<f64> = x[at..at + d].iter().map(|v| v.clamp(THETA_FLOOR, 1.0 - THETA_FLOOR)).collect();
            let sum: f64 = block.iter().sum();
            if sum > 1.0 - THETA_FLOOR {
                let f = (1.0 - THETA_FLOOR) / sum;
                block.iter_mut().for_each(|v| *v *= f);
            }
            out.extend(block);
            at += d;
        }
        out
    }

    fn params(&self, x: &[f64]) -> CoinParametrization {
        let mut p = self.base.clone();
        let mut at = 0;
        for (k, supp) in &self.layout {
            let th = &mut p.theta[*k];
            let mut rest = 1.0;
            for &w in &supp[1..] {
                th[w as usize] = x[at];
                rest -= x[at];
                at += 1;
            }
            th[supp[0] as usize] = rest;
        }
        p
    }

    /// `lp_min` at `x`, or `-∞` when the LP is not certified.
    fn eval(&self, x: &[f64]) -> f64 {
        let p = self.params(x);
        let Ok(mu) = realize_mu(&p) else { return f64::NEG_INFINITY };
        let Ok(lp) = self.template.instantiate(&mu, None) else { return f64::NEG_INFINITY };
        match self.opts.solver.solve(&lp, Direction::Min) {
            Ok(s) if s.status == LpStatus::Optimal => s.objective_value,
            _ => f64::NEG_INFINITY,
        }
    }
}

/// Lexicographic-by-value ordering of candidates: larger objective first,
/// then smaller point.
fn better(a: (f64, &[f64]), b: (f64, &[f64])) -> bool {
    if a.0 != b.0 {
        return a.0 > b.0;
    }
    a.1.iter().zip(b.1).find(|(x, y)| x != y).is_some_and(|(x, y)| x < y)
}

struct Budget {
    left: usize,
    used: usize,
}

impl Budget {
    fn take(&mut self, n: usize) -> usize {
        let k = n.min(self.left);
        self.left -= k;
        self.used += k;
        k
    }
}

/// Evaluates a batch of points in parallel; points beyond the budget get `None`.
fn batch(obj: &Objective<'_>, pts: &[Vec<f64>], budget: &mut Budget) -> Vec<Option<f64>> {
    let k = budget.take(pts.len());
    let mut vals: Vec<Option<f64>> = pts[..k].par_iter().map(|x| Some(obj.eval(x))).collect();
    vals.resize(pts.len(), None);
    vals
}

/// Nelder-Mead on `-lp_min` from `simplex`. Returns the best vertex.
fn nelder_mead(obj: &Objective<'_>, simplex: Vec<Vec<f64>>, budget: &mut Budget, limit: usize) -> Option<(f64, Vec<f64>)> {
    let start_used = budget.used;
    let mut local = Budget { left: limit.min(budget.left), used: 0 };
    let vals = batch(obj, &simplex, &mut local);
    let mut verts: Vec<(f64, Vec<f64>)> = Vec::new();
    for (x, v) in simplex.into_iter().zip(vals) {
        verts.push((v?, x));
    }
    let n = verts.len() - 1;
    let eval1 = |x: Vec<f64>, b: &mut Budget| -> Option<(f64, Vec<f64>)> {
        let x = obj.project(&x);
        batch(obj, std::slice::from_ref(&x), b)[0].map(|v| (v, x))
    };
    let result = loop {
        verts.sort_by(|a, b| if better((a.0, &a.1), (b.0, &b.1)) { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater });
        let diameter = verts[1..]
            .iter()
            .map(|(_, x)| x.iter().zip(&verts[0].1).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if diameter < CONVERGED_DIAMETER || local.left == 0 {
            break verts.swap_remove(0);
        }
        let centroid: Vec<f64> = (0..verts[0].1.len()).map(|d| verts[..n].iter().map(|(_, x)| x[d]).sum::<f64>() / n as f64).collect();
        let worst = verts[n].clone();
        let along = |f: f64| -> Vec<f64> { centroid.iter().zip(&worst.1).map(|(c, w)| c + f * (c - w)).collect() };
        let Some(xr) = eval1(along(REFLECT), &mut local) else { break verts.swap_remove(0) };
        if xr.0 > verts[0].0 {
            let Some(xe) = eval1(along(REFLECT * EXPAND), &mut local) else {
                verts[n] = xr;
                continue;
            };
            verts[n] = if xe.0 > xr.0 { xe } else { xr };
        } else if xr.0 > verts[n - 1].0 {
            verts[n] = xr;
        } else {
            let (xc, accept) = if xr.0 > worst.0 {
                let Some(xc) = eval1(along(REFLECT * CONTRACT), &mut local) else { break verts.swap_remove(0) };
                let ok = xc.0 >= xr.0;
                (xc, ok)
            } else {
                let Some(xc) = eval1(along(-CONTRACT), &mut local) else { break verts.swap_remove(0) };
                let ok = xc.0 > worst.0;
                (xc, ok)
            };
            if accept {
                verts[n] = xc;
            } else {
                let best = verts[0].1.clone();
                let pts: Vec<Vec<f64>> = verts[1..]
                    .iter()
                    .map(|(_, x)| obj.project(&best.iter().zip(x).map(|(b, v)| b + SHRINK * (v - b)).collect::<Vec<_>>()))
                    .collect();
                let vals = batch(obj, &pts, &mut local);
                for (k, (x, v)) in pts.into_iter().zip(vals).enumerate() {
                    if let Some(v) = v {
                        verts[k + 1] = (v, x);
                    }
                }
            }
        }
    };
    budget.take(local.used);
    debug_assert!(budget.used >= start_used);
    Some(result)
}

fn initial_simplex(obj: &Objective<'_>, x0: &[f64], step: &[f64]) -> Vec<Vec<f64>> {
    let mut s = vec![x0.to_vec()];
    for d in 0..x0.len() {
        let mut x = x0.to_vec();
        // Step toward the interior when the vertex would leave the box.
        x[d] = if x0[d] + step[d] <= 1.0 - THETA_FLOOR { x0[d] + step[d] } else { x0[d] - step[d] };
        s.push(obj.project(&x));
    }
    s
}

/// Maximizes `θ ↦ lp_min(θ)` by Nelder-Mead: one run from `p0`, then
/// [`RESTARTS`] runs from the best point so far with random step sizes. The
/// remaining budget is split evenly over the remaining runs. The result is
/// re-solved from scratch with [`bounds::compute_bounds_with`].
pub fn optimize_mu(c: &Constraint, p0: &CoinParametrization, r: i64, s: i64, t: i64, opts: &TuneOptions) -> Result<TuneOutcome, TuneError> {
    let e0 = realize_encoder(c, p0)?;
    let g = bounds::build_geometry(&p0.psi, r, s, t)?;
    let template = LpTemplate::compile(c, &p0.psi, &e0.mu, &g, &opts.bounds)?;
    let obj = Objective { template, layout: p0.free_layout(), base: p0, opts: &opts.bounds };
    let start = bounds::compute_bounds_with(c, &e0, r, s, t, None, &opts.bounds)?;
    let mut budget = Budget { left: opts.budget.saturating_sub(1), used: 1 };
    let mut best = (start.lp_min, obj.point_of(p0));
    if obj.dim() > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for run in 0..=RESTARTS {
            if budget.left <= obj.dim() {
                break;
            }
            let x0 = obj.project(&best.1);
            let step: Vec<f64> = if run == 0 {
                vec![INITIAL_STEP; x0.len()]
            } else {
                (0..x0.len()).map(|_| rng.random_range(0.01..0.25)).collect()
            };
            let limit = budget.left / (RESTARTS + 1 - run);
            if let Some((v, x)) = nelder_mead(&obj, initial_simplex(&obj, &x0, &step), &mut budget, limit) {
                if better((v, &x), (best.0, &best.1)) {
                    best = (v, x);
                }
            }
        }
    }
    let (parametrization, final_bounds) = if best.1 == obj.point_of(p0) {
        (p0.clone(), start.clone())
    } else {
        let p = obj.params(&best.1);
        let e = realize_encoder(c, &p)?;
        let b = bounds::compute_bounds_with(c, &e, r, s, t, None, &opts.bounds)?;
        if b.lp_min >= start.lp_min {
            (p, b)
        } else {
            (p0.clone(), start.clone())
        }
    };
    Ok(TuneOutcome {
        parametrization,
        bounds: final_bounds,
        evaluations: budget.used,
        budget_exhausted: budget.left == 0,
        start_lp_min: start.lp_min,
    })
}

#[derive(Clone, Debug)]
pub struct CapacityBound {
    pub value: f64,
    pub certificate: BoundResult,
}

/// `lp_min` of the realized encoder, a lower bound on the capacity of `c`.
pub fn capacity_lower_bound(c: &Constraint, p: &CoinParametrization, r: i64, s: i64, t: i64) -> Result<CapacityBound, TuneError> {
    let e = realize_encoder(c, p)?;
    let b = bounds::compute_bounds(c, &e, r, s, t)?;
    Ok(CapacityBound { value: b.lp_min, certificate: b })
}

/// The two-coin kings parametrization: coins at the all-zero context and at
/// the context with a single 1 two cells to the left, every other context
/// writes 0.
pub fn kings_two_coins(theta0: f64, theta1: f64) -> CoinParametrization {
    let mut p = CoinParametrization::new(crate::grid::psi_sq(), 2, Some(0));
    p.add_coin(&[vec![0, 0, 0, 0, 0]], vec![1.0 - theta0, theta0]);
    p.add_coin(&[vec![0, 0, 0, 1, 0]], vec![1.0 - theta1, theta1]);
    p
}
