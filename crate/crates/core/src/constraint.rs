//! Two-dimensional constraints given by finitely many forbidden patterns, and
//! their restrictions `S[U]` to finite index sets.
//!
//! A configuration on `U` belongs to `S[U]` when it avoids every forbidden
//! pattern and extends to a pattern-free configuration on the bounding box of
//! `U` inflated by the constraint's extension margin. With a safe symbol the
//! completion "fill everything else with the safe symbol" is tried first.
//! For constraints without a safe symbol the finite-box test is only an
//! approximation of extendability to the whole plane.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::grid::{Configuration, Index, IndexSet, Symbol};

/// Largest supported alphabet; symbols are written as base-36 digits.
pub const MAX_ALPHABET: u8 = 36;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstraintError {
    #[error("unknown builtin constraint `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid parameters for `{name}`: {reason}")]
    BadParams { name: String, reason: String },
    #[error("alphabet size must be in 2..={MAX_ALPHABET} (got {0})")]
    BadAlphabet(u32),
    #[error("forbidden pattern {0} is empty")]
    EmptyPattern(usize),
    #[error("forbidden pattern {pattern} uses symbol {symbol} outside the alphabet")]
    SymbolOutOfRange { pattern: usize, symbol: u32 },
    #[error("safe symbol {0} is itself forbidden (the constant array matches a pattern)")]
    UnsafeSafeSymbol(Symbol),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A forbidden pattern anchored so that its raster-last cell is `(0,0)`;
/// every other cell precedes the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    cells: Vec<(Index, Symbol)>,
}

impl Pattern {
    /// Anchors an arbitrary placement of the pattern.
    pub fn new(mut cells: Vec<(Index, Symbol)>) -> Self {
        cells.sort_by_key(|c| c.0);
        cells.dedup_by_key(|c| c.0);
        if let Some(&(last, _)) = cells.last() {
            for c in &mut cells {
                c.0 = c.0.shifted(-last.i, -last.j);
            }
        }
        Pattern { cells }
    }

    pub fn cells(&self) -> &[(Index, Symbol)] {
        &self.cells
    }

    /// Cells other than the anchor.
    pub fn predecessors(&self) -> &[(Index, Symbol)] {
        &self.cells[..self.cells.len().saturating_sub(1)]
    }

    pub fn anchor_symbol(&self) -> Symbol {
        self.cells.last().expect("nonempty pattern").1
    }

    /// Chebyshev diameter of the pattern's bounding box.
    pub fn diameter(&self) -> usize {
        let (mut lo_i, mut lo_j, mut hi_i, mut hi_j) = (0, 0, 0, 0);
        for (p, _) in &self.cells {
            lo_i = lo_i.min(p.i);
            lo_j = lo_j.min(p.j);
            hi_i = hi_i.max(p.i);
            hi_j = hi_j.max(p.j);
        }
        (hi_i - lo_i).max(hi_j - lo_j) as usize
    }

    fn reach(&self) -> usize {
        self.cells.iter().map(|(p, _)| p.i.unsigned_abs().max(p.j.unsigned_abs()) as usize).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct Constraint {
    name: String,
    alphabet: Symbol,
    forbidden: Vec<Pattern>,
    safe_symbol: Option<Symbol>,
    margin: usize,
    /// Halo around the inflated box so pattern probes never leave the canvas.
    reach: usize,
}

impl Constraint {
    pub fn new(
        name: impl Into<String>,
        alphabet: u32,
        forbidden: Vec<Pattern>,
        safe_symbol: Option<Symbol>,
        margin: Option<usize>,
    ) -> Result<Self, ConstraintError> {
        if !(2..=MAX_ALPHABET as u32).contains(&alphabet) {
            return Err(ConstraintError::BadAlphabet(alphabet));
        }
        for (k, p) in forbidden.iter().enumerate() {
            if p.cells.is_empty() {
                return Err(ConstraintError::EmptyPattern(k));
            }
            if let Some(&(_, v)) = p.cells.iter().find(|c| c.1 as u32 >= alphabet) {
                return Err(ConstraintError::SymbolOutOfRange { pattern: k, symbol: v as u32 });
            }
        }
        if let Some(safe) = safe_symbol {
            if safe as u32 >= alphabet {
                return Err(ConstraintError::SymbolOutOfRange { pattern: usize::MAX, symbol: safe as u32 });
            }
            if forbidden.iter().any(|p| p.cells.iter().all(|c| c.1 == safe)) {
                return Err(ConstraintError::UnsafeSafeSymbol(safe));
            }
        }
        let diameter = forbidden.iter().map(Pattern::diameter).max().unwrap_or(0);
        let reach = forbidden.iter().map(Pattern::reach).max().unwrap_or(0);
        Ok(Constraint {
            name: name.into(),
            alphabet: alphabet as Symbol,
            forbidden,
            safe_symbol,
            margin: margin.unwrap_or(diameter),
            reach,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> Symbol {
        self.alphabet
    }

    pub fn forbidden(&self) -> &[Pattern] {
        &self.forbidden
    }

    pub fn safe_symbol(&self) -> Option<Symbol> {
        self.safe_symbol
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn with_margin(mut self, margin: usize) -> Self {
        self.margin = margin;
        self
    }

    /// Whether the constant array of `symbol` avoids every pattern.
    pub fn constant_is_valid(&self, symbol: Symbol) -> bool {
        !self.forbidden.iter().any(|p| p.cells.iter().all(|c| c.1 == symbol))
    }

    /// True iff no placement of a forbidden pattern lies inside the support of
    /// `a` and agrees with `a` there.
    pub fn locally_valid(&self, a: &Configuration) -> bool {
        self.first_violation(a).is_none()
    }

    /// Raster-first cell at which some forbidden pattern, anchored there,
    /// matches `a`.
    pub fn first_violation(&self, a: &Configuration) -> Option<Index> {
        let mut canvas = Canvas::around(a.support(), 0, self.reach)?;
        canvas.write(a);
        a.support().iter().find(|&p| self.violation_at(&canvas, canvas.offset(p)))
    }

    /// True iff `a` extends to a pattern-free configuration on its bounding
    /// box inflated by the margin. Assumes `a` is locally valid.
    pub fn extendable(&self, a: &Configuration) -> bool {
        let Some(mut canvas) = Canvas::around(a.support(), self.margin, self.reach) else {
            return true;
        };
        canvas.write(a);
        self.extendable_canvas(&mut canvas)
    }

    /// `locally_valid && extendable`: membership of `a` in `S[support(a)]`.
    pub fn admits(&self, a: &Configuration) -> bool {
        self.locally_valid(a) && self.extendable(a)
    }

    /// Enumerates `S[U]` in lexicographic order of value strings.
    pub fn restriction(&self, u: &IndexSet) -> RestrictionSet {
        let mut members = Vec::new();
        self.for_each_member(u, |_, _, _| true, |vals| members.push(vals.to_vec()));
        RestrictionSet::new(Arc::new(u.clone()), members)
    }

    /// Number of members of `S[U]`, without storing them.
    pub fn count_restriction(&self, u: &IndexSet) -> u64 {
        let mut n = 0u64;
        self.for_each_member(u, |_, _, _| true, |_| n += 1);
        n
    }

    /// Backtracking enumeration of `S[U]`. Cells of `U` are assigned in raster
    /// order with symbols ascending; `filter(k, w, prefix)` may veto symbol `w`
    /// at the `k`-th cell given the values already placed; `leaf` receives
    /// every surviving member, aligned with `U`'s raster order.
    pub fn for_each_member<F, L>(&self, u: &IndexSet, mut filter: F, mut leaf: L)
    where
        F: FnMut(usize, Symbol, &[Symbol]) -> bool,
        L: FnMut(&[Symbol]),
    {
        let Some(mut canvas) = Canvas::around(u, self.margin, self.reach) else {
            leaf(&[]);
            return;
        };
        let offsets: Vec<usize> = u.iter().map(|p| canvas.offset(p)).collect();
        let mut values = vec![0; u.len()];
        self.enumerate(&mut canvas, &offsets, 0, &mut values, &mut filter, &mut leaf);
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate<F, L>(
        &self,
        canvas: &mut Canvas,
        offsets: &[usize],
        k: usize,
        values: &mut [Symbol],
        filter: &mut F,
        leaf: &mut L,
    ) where
        F: FnMut(usize, Symbol, &[Symbol]) -> bool,
        L: FnMut(&[Symbol]),
    {
        if k == offsets.len() {
            if self.extendable_canvas(canvas) {
                leaf(values);
            }
            return;
        }
        let at = offsets[k];
        for w in 0..self.alphabet {
            if !filter(k, w, &values[..k]) {
                continue;
            }
            canvas.cells[at] = w;
            if !self.violation_at(canvas, at) {
                values[k] = w;
                self.enumerate(canvas, offsets, k + 1, values, filter, leaf);
            }
        }
        canvas.cells[at] = UNSET;
    }

    /// Whether some pattern anchored at canvas offset `at` matches.
    fn violation_at(&self, canvas: &Canvas, at: usize) -> bool {
        let v = canvas.cells[at];
        self.forbidden.iter().any(|p| {
            p.anchor_symbol() == v
                && p.predecessors().iter().all(|&(d, s)| canvas.cells[canvas.rel(at, d)] == s)
        })
    }

    fn extendable_canvas(&self, canvas: &mut Canvas) -> bool {
        let free: Vec<usize> = canvas.box_offsets().filter(|&o| canvas.cells[o] == UNSET).collect();
        if free.is_empty() {
            return true;
        }
        if let Some(safe) = self.safe_symbol {
            for &o in &free {
                canvas.cells[o] = safe;
            }
            let ok = canvas.box_offsets().all(|o| !self.violation_at(canvas, o));
            for &o in &free {
                canvas.cells[o] = UNSET;
            }
            if ok {
                return true;
            }
        }
        let order: Vec<usize> = canvas.box_offsets().collect();
        let ok = self.complete(canvas, &order, 0);
        for &o in &free {
            canvas.cells[o] = UNSET;
        }
        ok
    }

    fn complete(&self, canvas: &mut Canvas, order: &[usize], k: usize) -> bool {
        let Some(&at) = order.get(k) else {
            return true;
        };
        if canvas.cells[at] != UNSET {
            return !self.violation_at(canvas, at) && self.complete(canvas, order, k + 1);
        }
        for w in 0..self.alphabet {
            canvas.cells[at] = w;
            if !self.violation_at(canvas, at) && self.complete(canvas, order, k + 1) {
                return true;
            }
        }
        canvas.cells[at] = UNSET;
        false
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (|Σ|={}, {} patterns, margin {})", self.name, self.alphabet, self.forbidden.len(), self.margin)
    }
}

const UNSET: Symbol = 254;
const OUT: Symbol = 255;

/// Dense scratch grid covering a bounding box, its margin, and a halo of
/// `OUT` cells wide enough that pattern probes stay in bounds.
struct Canvas {
    i0: i32,
    j0: i32,
    width: usize,
    height: usize,
    halo: usize,
    cells: Vec<Symbol>,
}

impl Canvas {
    fn around(u: &IndexSet, margin: usize, reach: usize) -> Option<Canvas> {
        let (lo_i, lo_j, hi_i, hi_j) = u.bounding_box()?;
        let halo = reach + 1;
        let pad = (margin + halo) as i32;
        let (i0, j0) = (lo_i - pad, lo_j - pad);
        let height = (hi_i - lo_i) as usize + 1 + 2 * (margin + halo);
        let width = (hi_j - lo_j) as usize + 1 + 2 * (margin + halo);
        let mut cells = vec![OUT; width * height];
        for r in halo..height - halo {
            for c in halo..width - halo {
                cells[r * width + c] = UNSET;
            }
        }
        Some(Canvas { i0, j0, width, height, halo, cells })
    }

    fn offset(&self, p: Index) -> usize {
        (p.i - self.i0) as usize * self.width + (p.j - self.j0) as usize
    }

    fn rel(&self, at: usize, d: Index) -> usize {
        (at as isize + d.i as isize * self.width as isize + d.j as isize) as usize
    }

    fn write(&mut self, a: &Configuration) {
        for (p, v) in a.cells() {
            let o = self.offset(p);
            self.cells[o] = v;
        }
    }

    fn box_offsets(&self) -> impl Iterator<Item = usize> + '_ {
        let (h, w) = (self.halo, self.width);
        (h..self.height - h).flat_map(move |r| (h..w - h).map(move |c| r * w + c))
    }
}

/// Enumerated `S[U]`, in lexicographic order of value strings.
#[derive(Clone, Debug)]
pub struct RestrictionSet {
    support: Arc<IndexSet>,
    members: Vec<Vec<Symbol>>,
    lookup: HashMap<Vec<Symbol>, usize>,
}

impl RestrictionSet {
    fn new(support: Arc<IndexSet>, members: Vec<Vec<Symbol>>) -> Self {
        let lookup = members.iter().enumerate().map(|(k, m)| (m.clone(), k)).collect();
        RestrictionSet { support, members, lookup }
    }

    pub fn support(&self) -> &IndexSet {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Value strings aligned with the support's raster order.
    pub fn members(&self) -> &[Vec<Symbol>] {
        &self.members
    }

    pub fn index_of(&self, values: &[Symbol]) -> Option<usize> {
        self.lookup.get(values).copied()
    }

    pub fn contains(&self, a: &Configuration) -> bool {
        a.support() == &*self.support && self.lookup.contains_key(a.values())
    }

    pub fn configuration(&self, k: usize) -> Configuration {
        Configuration::new(self.support.clone(), self.members[k].clone())
    }

    pub fn configurations(&self) -> impl Iterator<Item = Configuration> + '_ {
        (0..self.members.len()).map(|k| self.configuration(k))
    }
}

fn pat(cells: &[((i32, i32), Symbol)]) -> Pattern {
    Pattern::new(cells.iter().map(|&(p, v)| (Index::from(p), v)).collect())
}

/// No two 1s adjacent horizontally, vertically or diagonally.
pub fn kings() -> Constraint {
    let forbidden = [(0, 1), (1, 0), (1, 1), (1, -1)].iter().map(|&d| pat(&[((0, 0), 1), (d, 1)])).collect();
    Constraint::new("kings", 2, forbidden, Some(0), None).expect("builtin")
}

/// No two 1s at distance `≤ d` along a row or column.
pub fn rll_d_inf(d: u32) -> Result<Constraint, ConstraintError> {
    if d == 0 {
        return Err(ConstraintError::BadParams { name: "rll_d_inf".into(), reason: "d must be ≥ 1".into() });
    }
    let d = d as i32;
    let mut forbidden = Vec::new();
    for g in 1..=d {
        forbidden.push(pat(&[((0, 0), 1), ((0, g), 1)]));
        forbidden.push(pat(&[((0, 0), 1), ((g, 0), 1)]));
    }
    Constraint::new(format!("({d},inf)-RLL"), 2, forbidden, Some(0), None)
}

/// No run of more than `k` zeros along a row or column.
pub fn rll_0_k(k: u32) -> Result<Constraint, ConstraintError> {
    if k == 0 {
        return Err(ConstraintError::BadParams { name: "rll_0_k".into(), reason: "k must be ≥ 1".into() });
    }
    let k = k as i32;
    let row: Vec<_> = (0..=k).map(|j| ((0, j), 0)).collect();
    let col: Vec<_> = (0..=k).map(|i| ((i, 0), 0)).collect();
    Constraint::new(format!("(0,{k})-RLL"), 2, vec![pat(&row), pat(&col)], Some(1), None)
}

/// No cell whose value differs from all of its 4 (or 8) neighbors.
pub fn nib(arity: u32) -> Result<Constraint, ConstraintError> {
    let nbrs: Vec<(i32, i32)> = match arity {
        4 => vec![(-1, 0), (0, -1), (0, 1), (1, 0)],
        8 => (-1..=1).flat_map(|i| (-1..=1).map(move |j| (i, j))).filter(|&d| d != (0, 0)).collect(),
        _ => {
            return Err(ConstraintError::BadParams { name: "nib".into(), reason: "arity must be 4 or 8".into() })
        }
    };
    let forbidden = (0..2u8)
        .map(|c| {
            let mut cells = vec![((0, 0), c)];
            cells.extend(nbrs.iter().map(|&d| (d, 1 - c)));
            pat(&cells)
        })
        .collect();
    Constraint::new(format!("n.i.b.{arity}"), 2, forbidden, None, None)
}

/// Resolves `kings`, `rll_d_inf:<d>`, `rll_0_k:<k>`, `nib[:4|8]`.
pub fn builtin_constraint(name: &str, params: &[u32]) -> Result<Constraint, ConstraintError> {
    let one = |what: &str| -> Result<u32, ConstraintError> {
        match params {
            [p] => Ok(*p),
            _ => Err(ConstraintError::BadParams { name: name.into(), reason: format!("expected one parameter {what}") }),
        }
    };
    match name {
        "kings" if params.is_empty() => Ok(kings()),
        "kings" => Err(ConstraintError::BadParams { name: name.into(), reason: "takes no parameters".into() }),
        "rll_d_inf" => rll_d_inf(one("d")?),
        "rll_0_k" => rll_0_k(one("k")?),
        "nib" => match params {
            [] => nib(4),
            [a] => nib(*a),
            _ => Err(ConstraintError::BadParams { name: name.into(), reason: "expected arity 4 or 8".into() }),
        },
        other => Err(ConstraintError::UnknownBuiltin(other.into())),
    }
}

/// Parses `builtin:<name>[:<param>...]` or a constraint definition text.
pub fn parse_constraint_source(src: &str) -> Result<Constraint, ConstraintError> {
    match src.strip_prefix("builtin:") {
        Some(rest) => {
            let mut parts = rest.split(':');
            let name = parts.next().unwrap_or_default();
            let params = parts
                .map(|p| {
                    p.parse::<u32>().map_err(|_| ConstraintError::BadParams {
                        name: name.into(),
                        reason: format!("`{p}` is not a nonnegative integer"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            builtin_constraint(name, &params)
        }
        None => parse_constraint(src),
    }
}

/// Parses the line-oriented constraint format:
///
/// ```text
/// alphabet = 2
/// forbid = (0,0):1 (0,1):1
/// safe = 0
/// margin = 2
/// ```
pub fn parse_constraint(text: &str) -> Result<Constraint, ConstraintError> {
    let mut alphabet = None;
    let mut forbidden = Vec::new();
    let mut safe = None;
    let mut margin = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |msg: String| ConstraintError::Parse { line, msg };
        let (key, value) = body.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
        let value = value.trim();
        match key.trim() {
            "alphabet" => alphabet = Some(value.parse::<u32>().map_err(|e| err(format!("alphabet: {e}")))?),
            "safe" => safe = Some(crate::format::parse_symbol(value).map_err(err)?),
            "margin" => margin = Some(value.parse::<usize>().map_err(|e| err(format!("margin: {e}")))?),
            "forbid" => {
                let cells = value
                    .split_whitespace()
                    .map(|tok| {
                        let (idx, sym) = tok.rsplit_once(':').ok_or_else(|| format!("bad cell `{tok}`"))?;
                        Ok((crate::format::parse_index(idx)?, crate::format::parse_symbol(sym)?))
                    })
                    .collect::<Result<Vec<_>, String>>()
                    .map_err(err)?;
                if cells.is_empty() {
                    return Err(err("empty forbidden pattern".into()));
                }
                forbidden.push(Pattern::new(cells));
            }
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    let alphabet = alphabet.ok_or(ConstraintError::Parse { line: 0, msg: "missing `alphabet`".into() })?;
    Constraint::new("custom", alphabet, forbidden, safe, margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::rectangle;

    fn fig1_array() -> Configuration {
        Configuration::from_rows(&[
            &[1, 0, 0, 0, 0, 1, 0, 0],
            &[0, 0, 0, 0, 0, 0, 0, 0],
            &[0, 0, 0, 0, 0, 0, 1, 0],
            &[0, 0, 0, 0, 0, 0, 0, 0],
            &[0, 1, 0, 0, 0, 0, 0, 0],
        ])
    }

    #[test]
    fn builtin_pattern_shapes() {
        let k = kings();
        assert_eq!(k.forbidden().len(), 4);
        assert!(k.forbidden().iter().all(|p| p.cells().len() == 2 && p.cells().last().unwrap().0 == Index::ORIGIN));
        let r = rll_d_inf(1).unwrap();
        assert_eq!(r.forbidden().len(), 2);
        let z = rll_0_k(2).unwrap();
        assert_eq!(z.forbidden().len(), 2);
        assert!(z.forbidden().iter().all(|p| p.cells().len() == 3 && p.cells().iter().all(|c| c.1 == 0)));
        assert_eq!(z.safe_symbol(), Some(1));
        assert_eq!(nib(4).unwrap().safe_symbol(), None);
        assert!(matches!(builtin_constraint("bogus", &[]), Err(ConstraintError::UnknownBuiltin(_))));
        assert!(matches!(builtin_constraint("rll_d_inf", &[]), Err(ConstraintError::BadParams { .. })));
        assert!(matches!(builtin_constraint("nib", &[6]), Err(ConstraintError::BadParams { .. })));
    }

    #[test]
    fn rll_0_2_matches_one_dimensional_definition() {
        let c = rll_0_k(2).unwrap();
        for bits in 0u32..(1 << 8) {
            let row: Vec<Symbol> = (0..8).map(|j| ((bits >> j) & 1) as Symbol).collect();
            let longest_zero_run = row.split(|&v| v == 1).map(|r| r.len()).max().unwrap();
            let a = Configuration::from_rows(&[&row]);
            assert_eq!(c.locally_valid(&a), longest_zero_run <= 2, "{row:?}");
        }
    }

    #[test]
    fn figure_one_array() {
        let c = kings();
        let a = fig1_array();
        assert!(c.locally_valid(&a));
        assert!(c.locally_valid(&Configuration::constant(Arc::new(rectangle(5, 8).unwrap()), 0)));
        // Any 0 that is an 8-neighbor of a 1 cannot be flipped.
        let ones: Vec<Index> = a.cells().filter(|c| c.1 == 1).map(|c| c.0).collect();
        for (p, v) in a.cells() {
            if v == 1 {
                continue;
            }
            let touches = ones.iter().any(|q| (q.i - p.i).abs() <= 1 && (q.j - p.j).abs() <= 1);
            let flipped = Configuration::from_cells(a.cells().map(|(q, w)| (q, if q == p { 1 } else { w })));
            assert_eq!(c.locally_valid(&flipped), !touches, "{p}");
        }
    }

    #[test]
    fn small_restrictions() {
        let c = kings();
        assert_eq!(c.restriction(&IndexSet::from_pairs(&[(0, 0)])).members(), &[vec![0], vec![1]]);
        assert_eq!(c.restriction(&rectangle(1, 2).unwrap()).members(), &[vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(c.restriction(&rectangle(2, 2).unwrap()).len(), 5);
        assert_eq!(c.restriction(&IndexSet::empty()).len(), 1);
    }

    #[test]
    fn nib_extendability() {
        let c = nib(4).unwrap().with_margin(1);
        assert!(c.extendable(&Configuration::from_cells([(Index::ORIGIN, 1)])));
        let checker: Vec<Vec<Symbol>> = (0..3).map(|i| (0..3).map(|j| ((i + j) % 2) as Symbol).collect()).collect();
        let rows: Vec<&[Symbol]> = checker.iter().map(|r| r.as_slice()).collect();
        let a = Configuration::from_rows(&rows);
        // The centre differs from all four neighbours.
        assert!(!c.locally_valid(&a));
        let corner = Configuration::from_rows(&[&[0, 1], &[1, 0]]);
        assert!(c.locally_valid(&corner));
        assert!(nib(4).unwrap().with_margin(0).extendable(&corner));
        assert!(c.extendable(&corner));
    }

    #[test]
    fn parse_round_trip_of_kings() {
        let text = "# kings\nalphabet = 2\nforbid = (0,0):1 (0,1):1\nforbid = (0,0):1 (1,0):1\n\
                    forbid = (0,0):1 (1,1):1\nforbid = (0,0):1 (1,-1):1\nsafe = 0\n";
        let c = parse_constraint(text).unwrap();
        let k = kings();
        for (m, n) in [(2, 3), (3, 3), (1, 5)] {
            let u = rectangle(m, n).unwrap();
            assert_eq!(c.restriction(&u).members(), k.restriction(&u).members());
        }
        assert_eq!(parse_constraint_source("builtin:rll_0_k:2").unwrap().name(), "(0,2)-RLL");
        assert!(matches!(parse_constraint("alphabet = 2\nfoo = 1"), Err(ConstraintError::Parse { line: 2, .. })));
        assert!(matches!(
            parse_constraint("alphabet = 2\nforbid = (0,0):0\nsafe = 0"),
            Err(ConstraintError::UnsafeSafeSymbol(0))
        ));
    }
}
