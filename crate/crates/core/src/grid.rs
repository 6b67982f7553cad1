//! Integer geometry on Z²: index sets, configurations, shifts, restrictions
//! and boundaries.
//!
//! Every index set iterates in raster order (row-major, the `≺` order), and
//! every configuration stores its values aligned with that order. This makes
//! value vectors directly comparable as strings and keeps enumeration order
//! reproducible.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Alphabet symbol. Alphabets are `0..k` for some `k ≤ 36`.
pub type Symbol = u8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("parallelogram dimensions must be positive (got r={r}, s={s})")]
    BadDimensions { r: i64, s: i64 },
    #[error("shear t must be nonnegative (got {0})")]
    NegativeShear(i64),
    #[error("index set is not contained in the configuration support (first missing {0})")]
    NotContained(Index),
}

/// A cell of Z². The derived ordering is the lexicographic (raster) order:
/// rows first, then columns.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Index {
    pub i: i32,
    pub j: i32,
}

impl Index {
    pub const ORIGIN: Index = Index { i: 0, j: 0 };

    pub const fn new(i: i32, j: i32) -> Self {
        Index { i, j }
    }

    pub fn shifted(self, alpha: i32, beta: i32) -> Index {
        Index::new(self.i + alpha, self.j + beta)
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

impl From<(i32, i32)> for Index {
    fn from((i, j): (i32, i32)) -> Self {
        Index::new(i, j)
    }
}

/// Finite subset of Z², kept sorted in raster order with an O(1) position map.
#[derive(Clone)]
pub struct IndexSet {
    members: Vec<Index>,
    position: HashMap<Index, usize>,
}

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet { members: Vec::new(), position: HashMap::new() }
    }

    pub fn from_indexes<I: IntoIterator<Item = Index>>(iter: I) -> Self {
        let mut members: Vec<Index> = iter.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        let position = members.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        IndexSet { members, position }
    }

    pub fn from_pairs(pairs: &[(i32, i32)]) -> Self {
        Self::from_indexes(pairs.iter().map(|&p| Index::from(p)))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, p: Index) -> bool {
        self.position.contains_key(&p)
    }

    /// Rank of `p` in raster order, if present.
    pub fn position(&self, p: Index) -> Option<usize> {
        self.position.get(&p).copied()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = Index> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[Index] {
        &self.members
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.members.iter().all(|&p| other.contains(p))
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        IndexSet::from_indexes(self.iter().chain(other.iter()))
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet::from_indexes(self.iter().filter(|&p| !other.contains(p)))
    }

    /// `σ_{α,β}(U)`.
    pub fn shift(&self, alpha: i32, beta: i32) -> IndexSet {
        // Translation preserves raster order.
        let members: Vec<Index> = self.members.iter().map(|p| p.shifted(alpha, beta)).collect();
        let position = members.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        IndexSet { members, position }
    }

    /// Inclusive bounding box `(min_i, min_j, max_i, max_j)`.
    pub fn bounding_box(&self) -> Option<(i32, i32, i32, i32)> {
        let first = self.members.first()?;
        let mut bb = (first.i, first.j, first.i, first.j);
        for p in &self.members {
            bb.0 = bb.0.min(p.i);
            bb.1 = bb.1.min(p.j);
            bb.2 = bb.2.max(p.i);
            bb.3 = bb.3.max(p.j);
        }
        Some(bb)
    }

    /// Whether every member precedes (0,0), i.e. the set lies in `T_{0,0}`.
    pub fn precedes_origin(&self) -> bool {
        self.members.iter().all(|&p| p < Index::ORIGIN)
    }
}

impl PartialEq for IndexSet {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members
    }
}

impl Eq for IndexSet {}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members.iter()).finish()
    }
}

impl FromIterator<Index> for IndexSet {
    fn from_iter<T: IntoIterator<Item = Index>>(iter: T) -> Self {
        IndexSet::from_indexes(iter)
    }
}

/// Assignment of symbols to a finite index set. `values[k]` belongs to the
/// `k`-th member of the support in raster order.
#[derive(Clone, PartialEq, Eq)]
pub struct Configuration {
    support: Arc<IndexSet>,
    values: Vec<Symbol>,
}

impl Configuration {
    pub fn new(support: Arc<IndexSet>, values: Vec<Symbol>) -> Self {
        assert_eq!(support.len(), values.len(), "configuration values must match support size");
        Configuration { support, values }
    }

    pub fn empty() -> Self {
        Configuration { support: Arc::new(IndexSet::empty()), values: Vec::new() }
    }

    pub fn constant(support: Arc<IndexSet>, symbol: Symbol) -> Self {
        let values = vec![symbol; support.len()];
        Configuration { support, values }
    }

    /// Builds a configuration from `(index, symbol)` pairs; later duplicates win.
    pub fn from_cells<I: IntoIterator<Item = (Index, Symbol)>>(cells: I) -> Self {
        let mut cells: Vec<(Index, Symbol)> = cells.into_iter().collect();
        cells.sort_by_key(|c| c.0);
        let mut dedup: Vec<(Index, Symbol)> = Vec::with_capacity(cells.len());
        for c in cells {
            match dedup.last_mut() {
                Some(last) if last.0 == c.0 => *last = c,
                _ => dedup.push(c),
            }
        }
        let support = IndexSet::from_indexes(dedup.iter().map(|c| c.0));
        let values = dedup.into_iter().map(|c| c.1).collect();
        Configuration { support: Arc::new(support), values }
    }

    /// Rectangular configuration on `B_{M,N}` from row-major values.
    pub fn from_rows(rows: &[&[Symbol]]) -> Self {
        Configuration::from_cells(rows.iter().enumerate().flat_map(|(i, row)| {
            row.iter().enumerate().map(move |(j, &v)| (Index::new(i as i32, j as i32), v))
        }))
    }

    pub fn support(&self) -> &IndexSet {
        &self.support
    }

    pub fn support_arc(&self) -> &Arc<IndexSet> {
        &self.support
    }

    pub fn values(&self) -> &[Symbol] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, p: Index) -> Option<Symbol> {
        self.support.position(p).map(|k| self.values[k])
    }

    pub fn cells(&self) -> impl Iterator<Item = (Index, Symbol)> + '_ {
        self.support.iter().zip(self.values.iter().copied())
    }

    /// `σ_{α,β}(a)`.
    pub fn shift(&self, alpha: i32, beta: i32) -> Configuration {
        Configuration { support: Arc::new(self.support.shift(alpha, beta)), values: self.values.clone() }
    }

    /// `a[P]`.
    pub fn restrict(&self, p: &IndexSet) -> Result<Configuration, GridError> {
        let mut values = Vec::with_capacity(p.len());
        for q in p.iter() {
            values.push(self.get(q).ok_or(GridError::NotContained(q))?);
        }
        Ok(Configuration { support: Arc::new(p.clone()), values })
    }

    /// `τ_{α,β}(a, P) = (σ_{-α,-β}(a))[P]`: the values of `a` read through the
    /// window `P` anchored at `(α,β)`.
    pub fn tau(&self, alpha: i32, beta: i32, p: &IndexSet) -> Result<Configuration, GridError> {
        let mut values = Vec::with_capacity(p.len());
        for q in p.iter() {
            let src = q.shifted(alpha, beta);
            values.push(self.get(src).ok_or(GridError::NotContained(src))?);
        }
        Ok(Configuration { support: Arc::new(p.clone()), values })
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.cells()).finish()
    }
}

/// `B^{(t)}_{r,s} = {(i,j) : 0 ≤ i < r, 0 ≤ t·i + j < s}`.
pub fn parallelogram(r: i64, s: i64, t: i64) -> Result<IndexSet, GridError> {
    if r <= 0 || s <= 0 {
        return Err(GridError::BadDimensions { r, s });
    }
    if t < 0 {
        return Err(GridError::NegativeShear(t));
    }
    let (r, s, t) = (r as i32, s as i32, t as i32);
    Ok(IndexSet::from_indexes(
        (0..r).flat_map(|i| (-t * i..s - t * i).map(move |j| Index::new(i, j))),
    ))
}

/// `B_{M,N}`.
pub fn rectangle(m: i64, n: i64) -> Result<IndexSet, GridError> {
    parallelogram(m, n, 0)
}

/// `∂(U, Ψ)`: anchors in `U` at which the shifted neighbor set escapes `U`.
pub fn boundary(u: &IndexSet, psi: &IndexSet) -> IndexSet {
    IndexSet::from_indexes(u.iter().filter(|&a| !fits(u, psi, a)))
}

/// `U \ ∂(U, Ψ)`.
pub fn interior(u: &IndexSet, psi: &IndexSet) -> IndexSet {
    IndexSet::from_indexes(u.iter().filter(|&a| fits(u, psi, a)))
}

fn fits(u: &IndexSet, psi: &IndexSet, anchor: Index) -> bool {
    psi.iter().all(|q| u.contains(q.shifted(anchor.i, anchor.j)))
}

/// The raster-largest shift `(u,v)` with `Ψ ∪ {(0,0)} ⊆ σ_{u,v}(B^{(t)}_{r,s})`,
/// or `None` when the parallelogram is too small for the neighbor set.
pub fn largest_valid_shift(r: i64, s: i64, t: i64, psi: &IndexSet) -> Result<Option<Index>, GridError> {
    let b = parallelogram(r, s, t)?;
    let need = psi.union(&IndexSet::from_indexes([Index::ORIGIN]));
    let (b_min_i, b_min_j, b_max_i, b_max_j) = b.bounding_box().expect("nonempty parallelogram");
    let (n_min_i, n_min_j, n_max_i, n_max_j) = need.bounding_box().expect("contains origin");
    // A qualifying shift maps the bounding box of B around that of `need`,
    // so it lies in the Minkowski difference of the two boxes. Scan it from the
    // raster-largest corner downward and stop at the first hit.
    for alpha in (n_max_i - b_max_i..=n_min_i - b_min_i).rev() {
        for beta in (n_max_j - b_max_j..=n_min_j - b_min_j).rev() {
            if need.iter().all(|q| b.contains(q.shifted(-alpha, -beta))) {
                return Ok(Some(Index::new(alpha, beta)));
            }
        }
    }
    Ok(None)
}

/// The running-example neighbor set `{(0,-2),(0,-1),(-1,-1),(-1,0),(-1,1)}`.
pub fn psi_sq() -> IndexSet {
    IndexSet::from_pairs(&[(0, -2), (0, -1), (-1, -1), (-1, 0), (-1, 1)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pairs: &[(i32, i32)]) -> IndexSet {
        IndexSet::from_pairs(pairs)
    }

    #[test]
    fn rectangle_and_sheared_parallelogram() {
        assert_eq!(parallelogram(2, 3, 0).unwrap(), set(&[(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]));
        assert_eq!(parallelogram(2, 3, 1).unwrap(), set(&[(0, 0), (0, 1), (0, 2), (1, -1), (1, 0), (1, 1)]));
        let b = parallelogram(4, 5, 1).unwrap();
        assert_eq!(b.len(), 20);
        for i in 0..4 {
            for j in -10..10 {
                assert_eq!(b.contains(Index::new(i, j)), j >= -i && j < 5 - i);
            }
        }
    }

    #[test]
    fn parallelogram_rejects_bad_dimensions() {
        assert!(matches!(parallelogram(0, 3, 0), Err(GridError::BadDimensions { .. })));
        assert!(matches!(parallelogram(2, -1, 0), Err(GridError::BadDimensions { .. })));
        assert!(matches!(parallelogram(2, 2, -1), Err(GridError::NegativeShear(-1))));
    }

    #[test]
    fn shifts() {
        let u = set(&[(0, 0), (3, 4)]);
        assert_eq!(u.shift(0, 0), u);
        assert_eq!(set(&[(0, 0)]).shift(1, -1), set(&[(1, -1)]));
        let lambda = parallelogram(4, 5, 1).unwrap().shift(-1, -1);
        let rows: Vec<i32> = lambda.iter().map(|p| p.i).collect();
        assert_eq!(*rows.first().unwrap(), -1);
        assert_eq!(*rows.last().unwrap(), 2);
        assert!(lambda.contains(Index::new(-1, -1)) && lambda.contains(Index::new(2, -4)));

        let a = Configuration::from_cells([(Index::new(0, 0), 1)]);
        assert_eq!(a.shift(2, 3), Configuration::from_cells([(Index::new(2, 3), 1)]));
        assert_eq!(a.shift(2, 3).shift(-2, -3), a);
    }

    #[test]
    fn restriction_and_tau() {
        let a = Configuration::from_rows(&[&[0, 0], &[0, 0]]);
        assert_eq!(a.restrict(a.support()).unwrap(), a);
        assert!(a.restrict(&IndexSet::empty()).unwrap().is_empty());
        assert_eq!(a.restrict(&set(&[(0, 0)])).unwrap(), Configuration::from_cells([(Index::new(0, 0), 0)]));
        assert!(matches!(a.restrict(&set(&[(5, 5)])), Err(GridError::NotContained(_))));
        assert_eq!(a.tau(0, 0, &set(&[(1, 1)])).unwrap(), a.restrict(&set(&[(1, 1)])).unwrap());

        let psi = psi_sq();
        let zeros = Configuration::constant(Arc::new(rectangle(5, 8).unwrap()), 0);
        let phi0 = zeros.tau(2, 2, &psi).unwrap();
        assert!(phi0.values().iter().all(|&v| v == 0));
        assert_eq!(phi0.support(), &psi);

        // A single 1 two columns to the left of the anchor gives φ^(1).
        let mut cells: Vec<(Index, Symbol)> = zeros.cells().collect();
        cells.push((Index::new(2, 0), 1));
        let a = Configuration::from_cells(cells);
        let phi1 = a.tau(2, 2, &psi).unwrap();
        assert_eq!(phi1.get(Index::new(0, -2)), Some(1));
        assert_eq!(phi1.values().iter().filter(|&&v| v == 1).count(), 1);
        assert!(a.tau(0, 0, &psi).is_err());
    }

    #[test]
    fn boundary_of_rectangle() {
        let psi = psi_sq();
        let b = rectangle(5, 8).unwrap();
        let bd = boundary(&b, &psi);
        let int = interior(&b, &psi);
        assert_eq!(bd.len(), 20);
        assert_eq!(int.len(), 20);
        for p in b.iter() {
            let expect_int = p.i >= 1 && (2..=6).contains(&p.j);
            assert_eq!(int.contains(p), expect_int, "{p}");
        }
        assert!(boundary(&b, &IndexSet::empty()).is_empty());
    }

    #[test]
    fn running_example_gamma_contains_psi() {
        let psi = psi_sq();
        let lambda = parallelogram(4, 5, 1).unwrap().shift(-1, -1);
        let gamma = boundary(&lambda, &psi);
        assert!(psi.is_subset(&gamma));
        assert!(gamma.is_subset(&lambda));
        assert_eq!(gamma.len(), 11);
    }

    #[test]
    fn largest_shift_examples() {
        let psi = psi_sq();
        assert_eq!(largest_valid_shift(2, 3, 0, &psi).unwrap(), None);
        assert_eq!(largest_valid_shift(4, 5, 1, &psi).unwrap(), Some(Index::new(-1, -1)));
        assert_eq!(largest_valid_shift(3, 4, 0, &IndexSet::empty()).unwrap(), Some(Index::ORIGIN));
    }

    #[test]
    fn largest_shift_matches_exhaustive_search() {
        let psi = psi_sq();
        for (r, s, t) in [(4, 5, 1), (3, 5, 0), (2, 4, 0), (4, 6, 2), (5, 4, 1), (3, 3, 0)] {
            let b = parallelogram(r, s, t).unwrap();
            let mut need: Vec<Index> = psi.iter().collect();
            need.push(Index::ORIGIN);
            let mut best = None;
            for alpha in -20..=20 {
                for beta in -20..=20 {
                    let shifted = b.shift(alpha, beta);
                    if need.iter().all(|&q| shifted.contains(q)) {
                        let cand = Index::new(alpha, beta);
                        if best.is_none_or(|b| cand > b) {
                            best = Some(cand);
                        }
                    }
                }
            }
            assert_eq!(largest_valid_shift(r, s, t, &psi).unwrap(), best, "({r},{s},{t})");
        }
    }
}
