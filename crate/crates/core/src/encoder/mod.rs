//! Bit-stuffing encoders `E = (Ψ, μ, δ)`.
//!
//! An array on `B_{M,N}` is produced by first drawing its boundary
//! `∂(B_{M,N}, Ψ)` from `δ_{M,N}` and then writing the interior in raster
//! order, each cell drawn from `μ(· | context)` where the context is the
//! array read through `Ψ` anchored at that cell.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with a
//! 64-bit seed; independent trials use independent ChaCha streams of the same
//! seed, so results do not depend on thread scheduling.

mod coder;
mod spec_text;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::constraint::Constraint;
use crate::format::context_string;
use crate::grid::{self, Configuration, Index, IndexSet, Symbol};

pub use coder::{EncodeOutcome, FREQ_BITS};
pub use spec_text::{parse_encoder, write_encoder};

/// Tolerance for `Σ_w μ(w|φ) = 1`.
pub const DIST_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncoderError {
    #[error("invalid encoder: {0}")]
    Invalid(#[from] InvalidEncoder),
    #[error("array dimensions must be positive (got {m}x{n})")]
    BadDimensions { m: usize, n: usize },
    #[error("window size k must be positive")]
    BadWindow,
    #[error("no explicit boundary distribution for {m}x{n}")]
    MissingBoundary { m: usize, n: usize },
    #[error("boundary distribution for {m}x{n}: {reason}")]
    BadBoundary { m: usize, n: usize, reason: String },
    #[error("context {context} at {at} has no μ entry and there is no default")]
    MissingContext { context: String, at: Index },
    #[error("sampled array violates the constraint at {0}; the boundary distribution is incompatible with μ")]
    SupportViolation(Index),
    #[error("encoding and decoding need a constant-fill boundary")]
    NotInvertible,
    #[error("array has {got} values, expected {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("array is not constraint-valid")]
    NotConstraintValid,
    #[error("boundary cell {0} differs from the fill symbol")]
    BoundaryMismatch(Index),
    #[error("cell {at} holds symbol {symbol}, which has probability 0 under context {context}")]
    Corrupt { at: Index, symbol: Symbol, context: String },
    #[error("more than {0} arrays have positive probability")]
    TooManyOutcomes(usize),
    #[error("encoder text line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvalidEncoder {
    #[error("neighbor {0} does not precede (0,0)")]
    NeighborNotPreceding(Index),
    #[error("μ table is over an alphabet of size {table}, constraint has {constraint}")]
    AlphabetMismatch { table: Symbol, constraint: Symbol },
    #[error("context ({context}) has no μ entry and there is no default symbol")]
    MissingContext { context: String },
    #[error("μ(·|{context}) is not a distribution (sum {sum}, min {min})")]
    NotADistribution { context: String, sum: f64, min: f64 },
    #[error("forbidden pattern {pattern} has cell {cell} outside Ψ; the local support check cannot cover it")]
    PatternNotCovered { pattern: usize, cell: Index },
    #[error("μ({symbol}|{context}) > 0 but writing {symbol} completes forbidden pattern {pattern}")]
    ForbiddenSymbolAllowed { context: String, symbol: Symbol, pattern: usize },
    #[error("constant fill symbol {0} violates the constraint")]
    BadFill(Symbol),
}

/// Conditional coin table `μ(w | φ)`, keyed by context value strings in the
/// raster order of `Ψ`. Contexts absent from the table are deterministic
/// with the default symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct MuTable {
    alphabet: Symbol,
    psi_len: usize,
    entries: BTreeMap<Vec<Symbol>, Vec<f64>>,
    default: Option<Symbol>,
}

impl MuTable {
    pub fn new(alphabet: Symbol, psi_len: usize, default: Option<Symbol>) -> Self {
        MuTable { alphabet, psi_len, entries: BTreeMap::new(), default }
    }

    /// Deterministic table: every context writes `symbol`.
    pub fn constant(alphabet: Symbol, psi_len: usize, symbol: Symbol) -> Self {
        MuTable::new(alphabet, psi_len, Some(symbol))
    }

    pub fn set(&mut self, context: Vec<Symbol>, dist: Vec<f64>) {
        assert_eq!(context.len(), self.psi_len, "context length must equal |Ψ|");
        assert_eq!(dist.len(), self.alphabet as usize, "distribution length must equal |Σ|");
        self.entries.insert(context, dist);
    }

    pub fn with(mut self, context: &[Symbol], dist: &[f64]) -> Self {
        self.set(context.to_vec(), dist.to_vec());
        self
    }

    pub fn alphabet(&self) -> Symbol {
        self.alphabet
    }

    pub fn psi_len(&self) -> usize {
        self.psi_len
    }

    pub fn default_symbol(&self) -> Option<Symbol> {
        self.default
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[Symbol], &[f64])> {
        self.entries.iter().map(|(k, v)| (k.as_slice(), v.as_slice()))
    }

    /// `μ(· | context)`, or `None` if the context is unknown and there is no default.
    pub fn dist(&self, context: &[Symbol]) -> Option<Vec<f64>> {
        match self.entries.get(context) {
            Some(d) => Some(d.clone()),
            None => self.default.map(|s| point_mass(self.alphabet, s)),
        }
    }

    pub fn prob(&self, symbol: Symbol, context: &[Symbol]) -> Option<f64> {
        match self.entries.get(context) {
            Some(d) => Some(d[symbol as usize]),
            None => self.default.map(|s| if s == symbol { 1.0 } else { 0.0 }),
        }
    }
}

pub fn point_mass(alphabet: Symbol, s: Symbol) -> Vec<f64> {
    (0..alphabet).map(|w| if w == s { 1.0 } else { 0.0 }).collect()
}

/// `-Σ p log₂ p` with `0·log 0 = 0`.
pub fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// Boundary distribution family `δ`.
#[derive(Clone, Debug)]
pub enum BoundaryDist {
    /// Point mass on the constant boundary.
    ConstantFill(Symbol),
    /// Explicit finite distributions per array size `(M, N)`; each
    /// configuration must have support `∂_{M,N}`.
    Explicit(BTreeMap<(usize, usize), Vec<(Configuration, f64)>>),
}

#[derive(Clone, Debug)]
pub struct EncoderSpec {
    pub psi: IndexSet,
    pub mu: MuTable,
    pub boundary: BoundaryDist,
}

impl EncoderSpec {
    pub fn new(psi: IndexSet, mu: MuTable, boundary: BoundaryDist) -> Self {
        EncoderSpec { psi, mu, boundary }
    }

    /// Returns a copy with a different boundary distribution.
    pub fn with_boundary(&self, boundary: BoundaryDist) -> Self {
        EncoderSpec { psi: self.psi.clone(), mu: self.mu.clone(), boundary }
    }
}

/// The running-example encoder: kings constraint, `Ψ_sq`, two coins
/// (0.258132 after an all-zero context, 0.312231 after `φ^(1)`), all-zero
/// boundary.
pub fn running_example() -> EncoderSpec {
    running_example_with(0.258132, 0.312231)
}

/// `Ψ_sq` with the two running-example coins set to `p0`, `p1`.
pub fn running_example_with(p0: f64, p1: f64) -> EncoderSpec {
    let psi = grid::psi_sq();
    // Context strings follow Ψ's raster order: (-1,-1) (-1,0) (-1,1) (0,-2) (0,-1).
    let mu = MuTable::new(2, psi.len(), Some(0))
        .with(&[0, 0, 0, 0, 0], &[1.0 - p0, p0])
        .with(&[0, 0, 0, 1, 0], &[1.0 - p1, p1]);
    EncoderSpec::new(psi, mu, BoundaryDist::ConstantFill(0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    /// `|S[Ψ]|`.
    pub contexts: usize,
    /// Contexts whose coin is not a point mass.
    pub random_contexts: usize,
}

/// Checks `Ψ ⊆ T_{0,0}`, that each `μ(·|φ)` for `φ ∈ S[Ψ]` is a
/// distribution, and the local support condition: every forbidden pattern
/// anchored at its raster-last cell lies in `Ψ ∪ {(0,0)}`, and `μ` never
/// puts mass on a symbol that completes one. The check is sufficient, not
/// necessary.
pub fn validate_encoder(c: &Constraint, e: &EncoderSpec) -> Result<ValidationReport, InvalidEncoder> {
    if let Some(p) = e.psi.iter().find(|&p| p >= Index::ORIGIN) {
        return Err(InvalidEncoder::NeighborNotPreceding(p));
    }
    if e.mu.alphabet() != c.alphabet() || e.mu.psi_len() != e.psi.len() {
        return Err(InvalidEncoder::AlphabetMismatch { table: e.mu.alphabet(), constraint: c.alphabet() });
    }
    for (k, pattern) in c.forbidden().iter().enumerate() {
        if let Some(&(cell, _)) = pattern.predecessors().iter().find(|(d, _)| !e.psi.contains(*d)) {
            return Err(InvalidEncoder::PatternNotCovered { pattern: k, cell });
        }
    }
    if let BoundaryDist::ConstantFill(s) = e.boundary {
        if s >= c.alphabet() || !c.constant_is_valid(s) {
            return Err(InvalidEncoder::BadFill(s));
        }
    }
    let contexts = c.restriction(&e.psi);
    let mut random_contexts = 0;
    for phi in contexts.members() {
        let context = context_string(phi);
        let dist = e.mu.dist(phi).ok_or_else(|| InvalidEncoder::MissingContext { context: context.clone() })?;
        let sum: f64 = dist.iter().sum();
        let min = dist.iter().copied().fold(f64::INFINITY, f64::min);
        if (sum - 1.0).abs() > DIST_TOLERANCE || min < 0.0 || dist.iter().any(|p| !p.is_finite()) {
            return Err(InvalidEncoder::NotADistribution { context, sum, min });
        }
        if dist.iter().filter(|&&p| p > 0.0).count() > 1 {
            random_contexts += 1;
        }
        for (w, &p) in dist.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            for (k, pattern) in c.forbidden().iter().enumerate() {
                let completes = pattern.anchor_symbol() as usize == w
                    && pattern
                        .predecessors()
                        .iter()
                        .all(|&(d, s)| phi[e.psi.position(d).expect("covered")] == s);
                if completes {
                    return Err(InvalidEncoder::ForbiddenSymbolAllowed { context, symbol: w as Symbol, pattern: k });
                }
            }
        }
    }
    Ok(ValidationReport { contexts: contexts.len(), random_contexts })
}

/// Seed provenance of a sampled array.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedRecord {
    pub seed: u64,
    pub stream: u64,
}

/// A sampled `M×N` array, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleArray {
    pub m: usize,
    pub n: usize,
    pub values: Vec<Symbol>,
    pub seed: SeedRecord,
}

impl SampleArray {
    pub fn get(&self, i: usize, j: usize) -> Symbol {
        self.values[i * self.n + j]
    }

    pub fn configuration(&self) -> Configuration {
        let support = Arc::new(grid::rectangle(self.m as i64, self.n as i64).expect("positive dims"));
        Configuration::new(support, self.values.clone())
    }
}

/// Per-size layout: which cells are interior, and the linear offsets of `Ψ`.
struct Layout {
    m: usize,
    n: usize,
    /// Interior cells in raster order, as row-major offsets.
    interior: Vec<usize>,
    is_interior: Vec<bool>,
    /// `Ψ` as row-major offsets (valid only at interior anchors).
    psi_offsets: Vec<isize>,
}

impl Layout {
    fn new(psi: &IndexSet, m: usize, n: usize) -> Layout {
        let mut is_interior = vec![false; m * n];
        let mut interior = Vec::new();
        for i in 0..m as i32 {
            for j in 0..n as i32 {
                let fits = psi.iter().all(|d| {
                    let (p, q) = (i + d.i, j + d.j);
                    p >= 0 && q >= 0 && (p as usize) < m && (q as usize) < n
                });
                if fits {
                    let o = i as usize * n + j as usize;
                    is_interior[o] = true;
                    interior.push(o);
                }
            }
        }
        let psi_offsets = psi.iter().map(|d| d.i as isize * n as isize + d.j as isize).collect();
        Layout { m, n, interior, is_interior, psi_offsets }
    }

    fn index(&self, o: usize) -> Index {
        Index::new((o / self.n) as i32, (o % self.n) as i32)
    }

    fn boundary_set(&self) -> IndexSet {
        IndexSet::from_indexes((0..self.m * self.n).filter(|&o| !self.is_interior[o]).map(|o| self.index(o)))
    }
}

/// Context-code lookup table built once per encoder.
pub(crate) struct CoinBook {
    alphabet: u64,
    codes: HashMap<u64, usize>,
    default: Option<usize>,
    pub(crate) dists: Vec<Vec<f64>>,
    pub(crate) entropies: Vec<f64>,
}

impl CoinBook {
    pub(crate) fn new(mu: &MuTable) -> CoinBook {
        let alphabet = mu.alphabet() as u64;
        let mut dists = Vec::new();
        let mut codes = HashMap::new();
        for (ctx, dist) in mu.entries() {
            codes.insert(Self::code_of(alphabet, ctx), dists.len());
            dists.push(dist.to_vec());
        }
        let default = mu.default_symbol().map(|s| {
            dists.push(point_mass(mu.alphabet(), s));
            dists.len() - 1
        });
        let entropies = dists.iter().map(|d| entropy_bits(d)).collect();
        CoinBook { alphabet, codes, default, dists, entropies }
    }

    fn code_of(alphabet: u64, ctx: &[Symbol]) -> u64 {
        ctx.iter().fold(0u64, |acc, &s| acc.wrapping_mul(alphabet).wrapping_add(s as u64))
    }

    pub(crate) fn lookup(&self, ctx: &[Symbol]) -> Option<usize> {
        self.codes.get(&Self::code_of(self.alphabet, ctx)).copied().or(self.default)
    }
}

/// A validated encoder bound to its constraint.
pub struct BitStuffer {
    constraint: Constraint,
    spec: EncoderSpec,
    book: CoinBook,
    report: ValidationReport,
}

impl BitStuffer {
    pub fn new(constraint: &Constraint, spec: &EncoderSpec) -> Result<BitStuffer, InvalidEncoder> {
        let report = validate_encoder(constraint, spec)?;
        Ok(BitStuffer { constraint: constraint.clone(), spec: spec.clone(), book: CoinBook::new(&spec.mu), report })
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    pub fn spec(&self) -> &EncoderSpec {
        &self.spec
    }

    pub fn report(&self) -> ValidationReport {
        self.report
    }

    fn layout(&self, m: usize, n: usize) -> Result<Layout, EncoderError> {
        if m == 0 || n == 0 {
            return Err(EncoderError::BadDimensions { m, n });
        }
        Ok(Layout::new(&self.spec.psi, m, n))
    }

    fn coin_at(&self, layout: &Layout, values: &[Symbol], o: usize, ctx: &mut Vec<Symbol>) -> Result<usize, EncoderError> {
        ctx.clear();
        ctx.extend(layout.psi_offsets.iter().map(|&d| values[(o as isize + d) as usize]));
        self.book.lookup(ctx).ok_or_else(|| EncoderError::MissingContext { context: context_string(ctx), at: layout.index(o) })
    }

    /// Writes the boundary drawn from `δ_{M,N}` into `values`.
    fn draw_boundary(&self, layout: &Layout, values: &mut [Symbol], rng: &mut ChaCha8Rng) -> Result<(), EncoderError> {
        let (m, n) = (layout.m, layout.n);
        match &self.spec.boundary {
            BoundaryDist::ConstantFill(s) => {
                values.fill(*s);
                Ok(())
            }
            BoundaryDist::Explicit(tables) => {
                let table = tables.get(&(m, n)).ok_or(EncoderError::MissingBoundary { m, n })?;
                let bd = layout.boundary_set();
                let bad = |reason: String| EncoderError::BadBoundary { m, n, reason };
                let total: f64 = table.iter().map(|(_, p)| p).sum();
                if (total - 1.0).abs() > 1e-9 || table.iter().any(|(_, p)| *p < 0.0) {
                    return Err(bad(format!("probabilities sum to {total}")));
                }
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = None;
                for (k, (_, p)) in table.iter().enumerate() {
                    if *p > 0.0 {
                        chosen = Some(k);
                        acc += p;
                        if u < acc {
                            break;
                        }
                    }
                }
                let (config, _) = &table[chosen.ok_or_else(|| bad("no configuration has positive mass".into()))?];
                if config.support() != &bd {
                    return Err(bad("configuration support differs from the boundary".into()));
                }
                if !self.constraint.admits(config) {
                    return Err(bad("configuration is outside S[∂]".into()));
                }
                values.fill(0);
                for (p, v) in config.cells() {
                    values[p.i as usize * n + p.j as usize] = v;
                }
                Ok(())
            }
        }
    }

    fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng
    }

    fn fill(&self, m: usize, n: usize, rng: &mut ChaCha8Rng, mut on_cell: impl FnMut(usize, usize)) -> Result<Vec<Symbol>, EncoderError> {
        let layout = self.layout(m, n)?;
        let mut values = vec![0; m * n];
        self.draw_boundary(&layout, &mut values, rng)?;
        let mut ctx = Vec::with_capacity(layout.psi_offsets.len());
        for &o in &layout.interior {
            let coin = self.coin_at(&layout, &values, o, &mut ctx)?;
            on_cell(o, coin);
            values[o] = draw(&self.book.dists[coin], rng.random());
        }
        self.check_support(&layout, &values)?;
        Ok(values)
    }

    fn check_support(&self, layout: &Layout, values: &[Symbol]) -> Result<(), EncoderError> {
        let arr = SampleArray { m: layout.m, n: layout.n, values: values.to_vec(), seed: SeedRecord { seed: 0, stream: 0 } };
        match self.constraint.first_violation(&arr.configuration()) {
            None => Ok(()),
            Some(at) => Err(EncoderError::SupportViolation(at)),
        }
    }

    /// Draws `A(E, M, N)` using stream 0 of `seed`.
    pub fn sample(&self, m: usize, n: usize, seed: u64) -> Result<SampleArray, EncoderError> {
        self.sample_stream(m, n, seed, 0)
    }

    pub fn sample_stream(&self, m: usize, n: usize, seed: u64, stream: u64) -> Result<SampleArray, EncoderError> {
        let mut rng = Self::rng(seed, stream);
        let values = self.fill(m, n, &mut rng, |_, _| {})?;
        Ok(SampleArray { m, n, values, seed: SeedRecord { seed, stream } })
    }

    /// Draws `A^{(k)}(E, M, N)`: samples an `(M+k-1)×(N+k-1)` array and
    /// returns a uniformly chosen `M×N` window, re-indexed to `B_{M,N}`.
    pub fn sample_quasistationary(&self, m: usize, n: usize, k: usize, seed: u64) -> Result<SampleArray, EncoderError> {
        self.sample_quasistationary_stream(m, n, k, seed, 0)
    }

    pub fn sample_quasistationary_stream(
        &self,
        m: usize,
        n: usize,
        k: usize,
        seed: u64,
        stream: u64,
    ) -> Result<SampleArray, EncoderError> {
        if k == 0 {
            return Err(EncoderError::BadWindow);
        }
        if m == 0 || n == 0 {
            return Err(EncoderError::BadDimensions { m, n });
        }
        let mut rng = Self::rng(seed, stream);
        let (bm, bn) = (m + k - 1, n + k - 1);
        let big = self.fill(bm, bn, &mut rng, |_, _| {})?;
        let (di, dj) = (rng.random_range(0..k), rng.random_range(0..k));
        let values = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| big[(i + di) * bn + j + dj]).collect();
        Ok(SampleArray { m, n, values, seed: SeedRecord { seed, stream } })
    }

    /// Mean and standard error, over `trials` independent arrays, of the
    /// summed interior coin entropies divided by `M·N` (bits per symbol).
    /// Trial `k` uses stream `k` of `seed`.
    pub fn empirical_rate(&self, m: usize, n: usize, trials: usize, seed: u64) -> Result<RateEstimate, EncoderError> {
        self.layout(m, n)?;
        let per_trial: Vec<f64> = (0..trials as u64)
            .into_par_iter()
            .map(|stream| {
                let mut rng = Self::rng(seed, stream);
                let mut bits = 0.0;
                self.fill(m, n, &mut rng, |_, coin| bits += self.book.entropies[coin])?;
                Ok(bits / (m * n) as f64)
            })
            .collect::<Result<_, EncoderError>>()?;
        let interior = Layout::new(&self.spec.psi, m, n).interior.len();
        Ok(RateEstimate::from_trials(&per_trial, interior as f64 / (m * n) as f64))
    }

    /// Like [`BitStuffer::empirical_rate`] for `A^{(k)}(E, M, N)`: per trial,
    /// the coin entropies of the cells inside the chosen window of the
    /// enlarged array, divided by `M·N`. Windows match
    /// [`BitStuffer::sample_quasistationary_stream`] for the same stream.
    pub fn empirical_rate_quasistationary(
        &self,
        m: usize,
        n: usize,
        k: usize,
        trials: usize,
        seed: u64,
    ) -> Result<RateEstimate, EncoderError> {
        if k == 0 {
            return Err(EncoderError::BadWindow);
        }
        self.layout(m, n)?;
        let (bm, bn) = (m + k - 1, n + k - 1);
        let per_trial: Vec<f64> = (0..trials as u64)
            .into_par_iter()
            .map(|stream| {
                let mut rng = Self::rng(seed, stream);
                let mut ent = vec![0.0; bm * bn];
                self.fill(bm, bn, &mut rng, |o, coin| ent[o] = self.book.entropies[coin])?;
                let (di, dj) = (rng.random_range(0..k), rng.random_range(0..k));
                let bits: f64 = (0..m).flat_map(|i| (0..n).map(move |j| (i + di) * bn + j + dj)).map(|o| ent[o]).sum();
                Ok(bits / (m * n) as f64)
            })
            .collect::<Result<_, EncoderError>>()?;
        Ok(RateEstimate::from_trials(&per_trial, 1.0))
    }

    /// Encodes `bits` into an `M×N` array; see [`EncodeOutcome`].
    pub fn encode(&self, m: usize, n: usize, bits: &[bool]) -> Result<EncodeOutcome, EncoderError> {
        let BoundaryDist::ConstantFill(fill) = self.spec.boundary else {
            return Err(EncoderError::NotInvertible);
        };
        let layout = self.layout(m, n)?;
        let mut values = vec![fill; m * n];
        let mut source = coder::Expander::new(bits);
        let mut sink = coder::Compressor::new();
        let mut ctx = Vec::new();
        for &o in &layout.interior {
            let coin = self.coin_at(&layout, &values, o, &mut ctx)?;
            let q = coder::Quantized::new(&self.book.dists[coin]);
            let w = source.next_symbol(&q);
            sink.push_symbol(&q, w);
            values[o] = w;
        }
        self.check_support(&layout, &values)?;
        let emitted = sink.finish();
        let consumed = emitted.len();
        debug_assert!(emitted.iter().zip(bits).all(|(a, b)| a == b), "transformer prefix mismatch");
        Ok(EncodeOutcome {
            array: SampleArray { m, n, values, seed: SeedRecord { seed: 0, stream: 0 } },
            bits_consumed: consumed,
            exhausted: source.read_past_end(),
        })
    }

    /// Recovers the information bits carried by an array produced by
    /// [`BitStuffer::encode`].
    pub fn decode(&self, arr: &SampleArray) -> Result<Vec<bool>, EncoderError> {
        let BoundaryDist::ConstantFill(fill) = self.spec.boundary else {
            return Err(EncoderError::NotInvertible);
        };
        let layout = self.layout(arr.m, arr.n)?;
        if arr.values.len() != arr.m * arr.n {
            return Err(EncoderError::ShapeMismatch { expected: arr.m * arr.n, got: arr.values.len() });
        }
        if arr.values.iter().any(|&v| v >= self.constraint.alphabet())
            || !self.constraint.locally_valid(&arr.configuration())
        {
            return Err(EncoderError::NotConstraintValid);
        }
        if let Some(o) = (0..arr.m * arr.n).find(|&o| !layout.is_interior[o] && arr.values[o] != fill) {
            return Err(EncoderError::BoundaryMismatch(layout.index(o)));
        }
        let mut sink = coder::Compressor::new();
        let mut ctx = Vec::new();
        for &o in &layout.interior {
            let coin = self.coin_at(&layout, &arr.values, o, &mut ctx)?;
            let q = coder::Quantized::new(&self.book.dists[coin]);
            let w = arr.values[o];
            if q.freq(w) == 0 {
                return Err(EncoderError::Corrupt { at: layout.index(o), symbol: w, context: context_string(&ctx) });
            }
            sink.push_symbol(&q, w);
        }
        Ok(sink.finish())
    }

    /// Every `M×N` array with positive probability, with its probability and
    /// the summed entropy of the coins used to write it. Fails once more
    /// than `limit` arrays have been found.
    pub fn exact_outcomes(&self, m: usize, n: usize, limit: usize) -> Result<Vec<ExactOutcome>, EncoderError> {
        let layout = self.layout(m, n)?;
        let starts: Vec<(Vec<Symbol>, f64)> = match &self.spec.boundary {
            BoundaryDist::ConstantFill(s) => vec![(vec![*s; m * n], 1.0)],
            BoundaryDist::Explicit(tables) => {
                let table = tables.get(&(m, n)).ok_or(EncoderError::MissingBoundary { m, n })?;
                table
                    .iter()
                    .filter(|(_, p)| *p > 0.0)
                    .map(|(config, p)| {
                        let mut values = vec![0; m * n];
                        for (q, v) in config.cells() {
                            values[q.i as usize * n + q.j as usize] = v;
                        }
                        (values, *p)
                    })
                    .collect()
            }
        };
        let mut out = Vec::new();
        for (mut values, p) in starts {
            self.enumerate(&layout, 0, &mut values, p, 0.0, limit, &mut out)?;
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &self,
        layout: &Layout,
        pos: usize,
        values: &mut Vec<Symbol>,
        prob: f64,
        entropy: f64,
        limit: usize,
        out: &mut Vec<ExactOutcome>,
    ) -> Result<(), EncoderError> {
        let Some(&o) = layout.interior.get(pos) else {
            if out.len() == limit {
                return Err(EncoderError::TooManyOutcomes(limit));
            }
            self.check_support(layout, values)?;
            out.push(ExactOutcome { values: values.clone(), prob, coin_entropy: entropy });
            return Ok(());
        };
        let mut ctx = Vec::new();
        let coin = self.coin_at(layout, values, o, &mut ctx)?;
        let h = self.book.entropies[coin];
        for (w, &p) in self.book.dists[coin].iter().enumerate() {
            if p > 0.0 {
                values[o] = w as Symbol;
                self.enumerate(layout, pos + 1, values, prob * p, entropy + h, limit, out)?;
            }
        }
        Ok(())
    }

    /// Number of interior cells of `B_{M,N}`.
    pub fn interior_len(&self, m: usize, n: usize) -> usize {
        Layout::new(&self.spec.psi, m, n).interior.len()
    }
}

fn draw(dist: &[f64], u: f64) -> Symbol {
    let mut acc = 0.0;
    let mut last = 0;
    for (w, &p) in dist.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = w;
            if u < acc {
                return w as Symbol;
            }
        }
    }
    last as Symbol
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactOutcome {
    /// Row-major array values.
    pub values: Vec<Symbol>,
    pub prob: f64,
    pub coin_entropy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    /// Bits per symbol, normalized by `M·N`.
    pub mean: f64,
    pub stderr: f64,
    /// `|interior| / (M·N)`; dividing `mean` by it gives bits per interior cell.
    pub interior_fraction: f64,
    pub trials: usize,
}

impl RateEstimate {
    fn from_trials(xs: &[f64], interior_fraction: f64) -> RateEstimate {
        let n = xs.len();
        if n == 0 {
            return RateEstimate { mean: 0.0, stderr: 0.0, interior_fraction, trials: 0 };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n < 2 {
            0.0
        } else {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        };
        RateEstimate { mean, stderr, interior_fraction, trials: n }
    }

    /// Mean entropy per interior cell.
    pub fn per_interior_cell(&self) -> f64 {
        if self.interior_fraction > 0.0 {
            self.mean / self.interior_fraction
        } else {
            0.0
        }
    }
}
