//! Stationarity linear program bounding the rate of a bit-stuffing encoder.
//!
//! Fix a parallelogram `B = B^{(t)}_{r,s}` and its raster-largest valid shift
//! `(u,v)`. The window `Λ = σ_{u,v}(B)` contains the origin, and `Γ = ∂(Λ,Ψ)` is
//! its boundary. Any stationary law of the encoder's output restricted to `Λ`
//! is `Prob(Y = y) = π(y[Γ])·w(y)` with `w(y)` the product of the coin
//! probabilities on `Λ \ Γ`. The LP optimizes the entropy of the coin at the
//! origin over boundary laws `π` on `S[Γ]` whose induced law on `Λ` looks the
//! same after a horizontal or a vertical shift.
//!
//! The horizontal shift `σ_{0,1}` is imposed on the boundary `Γ₂` of
//! `Λ₂ = σ_{u,v}(B_{r,s−1})`, and the vertical shift `σ_{1,−t}` on the
//! boundary `Γ₁` of `Λ₁ = σ_{u,v}(B_{r−1,s})`. These are the pairings for which
//! both the event set and its shifted copy lie inside `Λ`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::constraint::{Constraint, RestrictionSet};
use crate::encoder::{entropy_bits, validate_encoder, EncoderSpec, InvalidEncoder, MuTable};
use crate::grid::{self, GridError, Index, IndexSet, Symbol};
use crate::lpsolve::{DenseSimplex, Direction, LpError, LpProblem, LpSolution, LpSolver, LpStatus, Sense};

pub const DEFAULT_MAX_VARS: usize = 200_000;
pub const DEFAULT_MAX_CONFIGS: u64 = 100_000_000;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("no shift of B^({t})_{{{r},{s}}} covers Ψ ∪ {{(0,0)}}")]
    NoValidShift { r: i64, s: i64, t: i64 },
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Invalid(#[from] InvalidEncoder),
    #[error("size cap exceeded: {what} (limit {limit})")]
    SizeCap { what: String, limit: u64 },
    #[error("relaxation parameter must be positive")]
    BadRelaxation,
    #[error("coin support differs from the compiled LP at context {0}")]
    SupportChanged(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("{direction:?} LP not solved ({status:?}): {diagnostics}")]
    Solver { direction: Direction, status: LpStatus, diagnostics: String },
}

#[derive(Clone)]
pub struct BoundsOptions {
    pub max_vars: usize,
    pub max_configs: u64,
    pub solver: Arc<dyn LpSolver>,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        BoundsOptions { max_vars: DEFAULT_MAX_VARS, max_configs: DEFAULT_MAX_CONFIGS, solver: Arc::new(DenseSimplex::default()) }
    }
}

impl fmt::Debug for BoundsOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundsOptions").field("max_vars", &self.max_vars).field("max_configs", &self.max_configs).finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpGeometry {
    pub r: i64,
    pub s: i64,
    pub t: i64,
    pub uv: Index,
    pub lambda: IndexSet,
    pub gamma: IndexSet,
    /// Window without its last row; carries the vertical shift.
    pub lambda1: IndexSet,
    /// Window without its last column; carries the horizontal shift.
    pub lambda2: IndexSet,
    pub gamma1: IndexSet,
    pub gamma2: IndexSet,
}

impl LpGeometry {
    /// Shift of the vertical stationarity events `Γ₁`.
    pub fn vertical_shift(&self) -> (i32, i32) {
        (1, -(self.t as i32))
    }

    pub fn horizontal_shift(&self) -> (i32, i32) {
        (0, 1)
    }
}

pub fn build_geometry(psi: &IndexSet, r: i64, s: i64, t: i64) -> Result<LpGeometry, BoundsError> {
    let uv = grid::largest_valid_shift(r, s, t, psi)?.ok_or(BoundsError::NoValidShift { r, s, t })?;
    let lambda = grid::parallelogram(r, s, t)?.shift(uv.i, uv.j);
    let gamma = grid::boundary(&lambda, psi);
    if gamma.is_empty() {
        return Err(BoundsError::Degenerate("Γ is empty, so the LP has no variables".into()));
    }
    let lambda1 = if r > 1 { grid::parallelogram(r - 1, s, t)?.shift(uv.i, uv.j) } else { IndexSet::empty() };
    let lambda2 = if s > 1 { grid::parallelogram(r, s - 1, t)?.shift(uv.i, uv.j) } else { IndexSet::empty() };
    let gamma1 = grid::boundary(&lambda1, psi);
    let gamma2 = grid::boundary(&lambda2, psi);
    Ok(LpGeometry { r, s, t, uv, lambda, gamma, lambda1, lambda2, gamma1, gamma2 })
}

/// One member `y` of `S[Λ]` with positive weight, reduced to what the LP needs.
#[derive(Clone, Copy, Debug)]
struct Record {
    var: u32,
    h_plus: u32,
    h_minus: u32,
    v_plus: u32,
    v_minus: u32,
    factors: (u32, u32),
    origin_ctx: u32,
}

/// The LP for fixed `(c, Ψ, r, s, t)` and fixed coin supports. Instantiating
/// it for a particular `μ` only recomputes weights and entropies.
#[derive(Clone, Debug)]
pub struct LpTemplate {
    geometry: LpGeometry,
    variables: RestrictionSet,
    h_events: RestrictionSet,
    v_events: RestrictionSet,
    /// `S[Ψ]`; context ids index into it.
    contexts: RestrictionSet,
    support: Vec<Vec<bool>>,
    var_ctx: Option<Vec<u32>>,
    records: Vec<Record>,
    factors: Vec<(u32, Symbol)>,
}

impl LpTemplate {
    pub fn compile(c: &Constraint, psi: &IndexSet, mu: &MuTable, g: &LpGeometry, opts: &BoundsOptions) -> Result<Self, BoundsError> {
        let variables = c.restriction(&g.gamma);
        if variables.len() > opts.max_vars {
            return Err(BoundsError::SizeCap { what: format!("|S[Γ]| = {}", variables.len()), limit: opts.max_vars as u64 });
        }
        if variables.is_empty() {
            return Err(BoundsError::Degenerate("S[Γ] is empty".into()));
        }
        let h_events = c.restriction(&g.gamma2);
        let v_events = c.restriction(&g.gamma1);
        let contexts = c.restriction(psi);
        let support: Vec<Vec<bool>> = contexts
            .members()
            .iter()
            .map(|phi| mu.dist(phi).map(|d| d.iter().map(|&p| p > 0.0).collect()).unwrap_or_default())
            .collect();

        let lam = &g.lambda;
        let pos = |p: Index| lam.position(p).expect("inside Λ");
        let positions = |set: &IndexSet, (a, b): (i32, i32)| set.iter().map(|p| pos(p.shifted(a, b))).collect::<Vec<_>>();
        let gamma_pos = positions(&g.gamma, (0, 0));
        let (ha, hb) = g.horizontal_shift();
        let (va, vb) = g.vertical_shift();
        let h_plus = positions(&g.gamma2, (0, 0));
        let h_minus = positions(&g.gamma2, (ha, hb));
        let v_plus = positions(&g.gamma1, (0, 0));
        let v_minus = positions(&g.gamma1, (va, vb));
        let origin_ctx_pos = if psi.iter().all(|p| lam.contains(p)) { Some(positions(psi, (0, 0))) } else { None };
        let var_ctx = if psi.is_subset(&g.gamma) {
            let at: Vec<usize> = psi.iter().map(|p| g.gamma.position(p).unwrap()).collect();
            let ids = variables
                .members()
                .iter()
                .map(|z| {
                    let phi: Vec<Symbol> = at.iter().map(|&k| z[k]).collect();
                    contexts.index_of(&phi).map(|k| k as u32)
                })
                .collect::<Option<Vec<u32>>>();
            Some(ids.ok_or_else(|| BoundsError::Degenerate("a boundary configuration has an inadmissible Ψ-context".into()))?)
        } else {
            None
        };
        if var_ctx.is_none() && origin_ctx_pos.is_none() {
            return Err(BoundsError::Degenerate("Ψ is not inside Λ".into()));
        }

        // Cells of Λ \ Γ with the Λ-positions of their Ψ-contexts.
        let free: Vec<Option<Vec<usize>>> =
            lam.iter().map(|p| (!g.gamma.contains(p)).then(|| psi.iter().map(|q| pos(p.shifted(q.i, q.j))).collect())).collect();

        let mut records = Vec::new();
        let mut factors: Vec<(u32, Symbol)> = Vec::new();
        let mut seen: u64 = 0;
        let overflow = std::cell::Cell::new(false);
        let mut missing = false;
        let mut ctx_buf = Vec::with_capacity(psi.len());
        c.for_each_member(
            lam,
            |k, w, prefix| {
                if overflow.get() {
                    return false;
                }
                let Some(ctx_pos) = &free[k] else { return true };
                ctx_buf.clear();
                ctx_buf.extend(ctx_pos.iter().map(|&q| prefix[q]));
                match contexts.index_of(&ctx_buf) {
                    Some(id) => support[id].get(w as usize).copied().unwrap_or(false),
                    None => false,
                }
            },
            |y| {
                seen += 1;
                if seen > opts.max_configs {
                    overflow.set(true);
                    return;
                }
                let look = |set: &RestrictionSet, at: &[usize]| {
                    let vals: Vec<Symbol> = at.iter().map(|&q| y[q]).collect();
                    set.index_of(&vals).map(|k| k as u32)
                };
                let start = factors.len() as u32;
                let mut ctx = Vec::with_capacity(psi.len());
                for (k, f) in free.iter().enumerate() {
                    if let Some(ctx_pos) = f {
                        ctx.clear();
                        ctx.extend(ctx_pos.iter().map(|&q| y[q]));
                        factors.push((contexts.index_of(&ctx).expect("checked during enumeration") as u32, y[k]));
                    }
                }
                let origin_ctx = match &origin_ctx_pos {
                    Some(at) => look(&contexts, at),
                    None => Some(0),
                };
                let rec = (|| {
                    Some(Record {
                        var: look(&variables, &gamma_pos)?,
                        h_plus: look(&h_events, &h_plus)?,
                        h_minus: look(&h_events, &h_minus)?,
                        v_plus: look(&v_events, &v_plus)?,
                        v_minus: look(&v_events, &v_minus)?,
                        factors: (start, factors.len() as u32),
                        origin_ctx: origin_ctx?,
                    })
                })();
                match rec {
                    Some(r) => records.push(r),
                    None => missing = true,
                }
            },
        );
        if overflow.get() {
            return Err(BoundsError::SizeCap { what: "streamed Λ-configurations".into(), limit: opts.max_configs });
        }
        if missing {
            return Err(BoundsError::Degenerate("a restriction of a configuration in S[Λ] is not admissible".into()));
        }
        Ok(LpTemplate { geometry: g.clone(), variables, h_events, v_events, contexts, support, var_ctx, records, factors })
    }

    pub fn geometry(&self) -> &LpGeometry {
        &self.geometry
    }

    pub fn variables(&self) -> &RestrictionSet {
        &self.variables
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    /// `|S[Γ₂]|` horizontal plus `|S[Γ₁]|` vertical stationarity rows.
    pub fn num_stationarity_rows(&self) -> (usize, usize) {
        (self.h_events.len(), self.v_events.len())
    }

    /// Number of weighted configurations `y ∈ S[Λ]`.
    pub fn num_configurations(&self) -> usize {
        self.records.len()
    }

    fn coins(&self, mu: &MuTable) -> Result<(Vec<Vec<f64>>, Vec<f64>), BoundsError> {
        let mut probs = Vec::with_capacity(self.contexts.len());
        let mut ent = Vec::with_capacity(self.contexts.len());
        for (k, phi) in self.contexts.members().iter().enumerate() {
            let d = mu.dist(phi).unwrap_or_default();
            let supp: Vec<bool> = d.iter().map(|&p| p > 0.0).collect();
            if supp != self.support[k] {
                return Err(BoundsError::SupportChanged(k));
            }
            ent.push(entropy_bits(&d));
            probs.push(d);
        }
        Ok((probs, ent))
    }

    /// `w(y)` for every record, in enumeration order.
    pub fn weights(&self, mu: &MuTable) -> Result<Vec<f64>, BoundsError> {
        let (probs, _) = self.coins(mu)?;
        Ok(self.records.iter().map(|r| self.weight(r, &probs)).collect())
    }

    fn weight(&self, r: &Record, probs: &[Vec<f64>]) -> f64 {
        self.factors[r.factors.0 as usize..r.factors.1 as usize].iter().map(|&(ctx, w)| probs[ctx as usize][w as usize]).product()
    }

    /// Objective coefficients `c_z`.
    pub fn objective(&self, mu: &MuTable) -> Result<Vec<f64>, BoundsError> {
        let (probs, ent) = self.coins(mu)?;
        Ok(self.objective_from(&probs, &ent))
    }

    fn objective_from(&self, probs: &[Vec<f64>], ent: &[f64]) -> Vec<f64> {
        match &self.var_ctx {
            Some(ids) => ids.iter().map(|&k| ent[k as usize]).collect(),
            None => {
                let mut c = vec![0.0; self.num_vars()];
                for r in &self.records {
                    c[r.var as usize] += self.weight(r, probs) * ent[r.origin_ctx as usize];
                }
                c
            }
        }
    }

    /// The LP for `mu`. With `relax = Some(k)` each stationarity equality
    /// becomes `|Δ| ≤ 1/k` (horizontal) or `|Δ| ≤ (t+1)/k` (vertical).
    pub fn instantiate(&self, mu: &MuTable, relax: Option<u64>) -> Result<LpProblem, BoundsError> {
        if relax == Some(0) {
            return Err(BoundsError::BadRelaxation);
        }
        let (probs, ent) = self.coins(mu)?;
        let n = self.num_vars();
        let (nh, nv) = self.num_stationarity_rows();
        let mut h = vec![vec![0.0; n]; nh];
        let mut v = vec![vec![0.0; n]; nv];
        for r in &self.records {
            let w = self.weight(r, &probs);
            if w == 0.0 {
                continue;
            }
            let z = r.var as usize;
            h[r.h_plus as usize][z] += w;
            h[r.h_minus as usize][z] -= w;
            v[r.v_plus as usize][z] += w;
            v[r.v_minus as usize][z] -= w;
        }
        let mut p = LpProblem::new(self.objective_from(&probs, &ent));
        p.add_eq(vec![1.0; n], 1.0);
        match relax {
            None => {
                for row in h.into_iter().chain(v) {
                    p.add_eq(row, 0.0);
                }
            }
            Some(k) => {
                let eh = 1.0 / k as f64;
                let ev = (self.geometry.t + 1) as f64 / k as f64;
                for (row, eps) in h.into_iter().map(|r| (r, eh)).chain(v.into_iter().map(|r| (r, ev))) {
                    p.add_ineq(row.clone(), eps, Sense::Le);
                    p.add_ineq(row, -eps, Sense::Ge);
                }
            }
        }
        Ok(p)
    }
}

/// The assembled LP for one encoder.
#[derive(Clone, Debug)]
pub struct StuffLp {
    pub template: Arc<LpTemplate>,
    pub problem: LpProblem,
    pub relax: Option<u64>,
}

impl StuffLp {
    pub fn geometry(&self) -> &LpGeometry {
        self.template.geometry()
    }

    pub fn variables(&self) -> &RestrictionSet {
        self.template.variables()
    }
}

/// Builds the LP. The boundary distribution of `e` is never read.
pub fn build_lp(c: &Constraint, e: &EncoderSpec, g: &LpGeometry, relax: Option<u64>, opts: &BoundsOptions) -> Result<StuffLp, BoundsError> {
    validate_encoder(c, e)?;
    let template = Arc::new(LpTemplate::compile(c, &e.psi, &e.mu, g, opts)?);
    let problem = template.instantiate(&e.mu, relax)?;
    Ok(StuffLp { template, problem, relax })
}

/// Solver-side evidence for one direction.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub duality_gap: f64,
    pub max_primal_violation: f64,
    pub max_dual_violation: f64,
    pub iterations: usize,
    pub removed_rows: usize,
}

impl From<&LpSolution> for Certificate {
    fn from(s: &LpSolution) -> Self {
        Certificate {
            duality_gap: s.duality_gap,
            max_primal_violation: s.max_primal_violation,
            max_dual_violation: s.max_dual_violation,
            iterations: s.iterations,
            removed_rows: s.removed_rows,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundResult {
    pub lp_min: f64,
    pub lp_max: f64,
    pub r: i64,
    pub s: i64,
    pub t: i64,
    pub uv: Index,
    pub lambda_len: usize,
    pub gamma_len: usize,
    pub vars: usize,
    /// Constraints before redundancy removal, normalization row included.
    pub cons: usize,
    pub relax: Option<u64>,
    pub min_certificate: Certificate,
    pub max_certificate: Certificate,
    pub argmin: Vec<f64>,
    pub argmax: Vec<f64>,
}

impl BoundResult {
    pub fn machine_line(&self) -> String {
        format!(
            "lp_min={:.16e} lp_max={:.16e} r={} s={} t={} vars={} cons={}",
            self.lp_min, self.lp_max, self.r, self.s, self.t, self.vars, self.cons
        )
    }

    /// Parses a line written by [`BoundResult::machine_line`] into
    /// `(lp_min, lp_max, r, s, t, vars, cons)`.
    pub fn parse_machine_line(line: &str) -> Option<(f64, f64, i64, i64, i64, usize, usize)> {
        let mut fields = HashMap::new();
        for tok in line.split_whitespace() {
            let (k, v) = tok.split_once('=')?;
            fields.insert(k, v);
        }
        Some((
            fields.get("lp_min")?.parse().ok()?,
            fields.get("lp_max")?.parse().ok()?,
            fields.get("r")?.parse().ok()?,
            fields.get("s")?.parse().ok()?,
            fields.get("t")?.parse().ok()?,
            fields.get("vars")?.parse().ok()?,
            fields.get("cons")?.parse().ok()?,
        ))
    }

    pub fn table(&self) -> String {
        let relax = self.relax.map_or("none".to_string(), |k| k.to_string());
        let rows = [
            ("lp_min", format!("{:.8}", self.lp_min)),
            ("lp_max", format!("{:.8}", self.lp_max)),
            ("(r,s,t)", format!("({},{},{})", self.r, self.s, self.t)),
            ("(u,v)", format!("({},{})", self.uv.i, self.uv.j)),
            ("|Λ| / |Γ|", format!("{} / {}", self.lambda_len, self.gamma_len)),
            ("variables", self.vars.to_string()),
            ("constraints", self.cons.to_string()),
            ("relaxation k", relax),
            ("gap (min/max)", format!("{:.1e} / {:.1e}", self.min_certificate.duality_gap, self.max_certificate.duality_gap)),
        ];
        let mut out = String::new();
        for (k, v) in rows {
            out.push_str(&format!("{k:<14} {v}\n"));
        }
        out
    }
}

pub fn solve_lp(lp: &StuffLp, solver: &dyn LpSolver) -> Result<BoundResult, BoundsError> {
    let (lo, hi) = rayon::join(|| solver.solve(&lp.problem, Direction::Min), || solver.solve(&lp.problem, Direction::Max));
    let (lo, hi) = (lo?, hi?);
    for (direction, s) in [(Direction::Min, &lo), (Direction::Max, &hi)] {
        if s.status != LpStatus::Optimal {
            return Err(BoundsError::Solver { direction, status: s.status, diagnostics: s.diagnostics.clone() });
        }
    }
    let g = lp.geometry();
    Ok(BoundResult {
        lp_min: lo.objective_value,
        lp_max: hi.objective_value,
        r: g.r,
        s: g.s,
        t: g.t,
        uv: g.uv,
        lambda_len: g.lambda.len(),
        gamma_len: g.gamma.len(),
        vars: lp.problem.num_vars,
        cons: lp.problem.num_constraints(),
        relax: lp.relax,
        min_certificate: Certificate::from(&lo),
        max_certificate: Certificate::from(&hi),
        argmin: lo.primal,
        argmax: hi.primal,
    })
}

pub fn compute_bounds(c: &Constraint, e: &EncoderSpec, r: i64, s: i64, t: i64) -> Result<BoundResult, BoundsError> {
    compute_bounds_with(c, e, r, s, t, None, &BoundsOptions::default())
}

pub fn compute_relaxed_bounds(c: &Constraint, e: &EncoderSpec, r: i64, s: i64, t: i64, k: u64) -> Result<BoundResult, BoundsError> {
    compute_bounds_with(c, e, r, s, t, Some(k), &BoundsOptions::default())
}

pub fn compute_bounds_with(
    c: &Constraint,
    e: &EncoderSpec,
    r: i64,
    s: i64,
    t: i64,
    relax: Option<u64>,
    opts: &BoundsOptions,
) -> Result<BoundResult, BoundsError> {
    if relax == Some(0) {
        return Err(BoundsError::BadRelaxation);
    }
    let g = build_geometry(&e.psi, r, s, t)?;
    let lp = build_lp(c, e, &g, relax, opts)?;
    solve_lp(&lp, opts.solver.as_ref())
}
