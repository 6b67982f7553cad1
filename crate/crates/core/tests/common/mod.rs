//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the sampler or the LP builder; the encoder law is recomputed from
//! the μ table by exhaustive enumeration.

#![allow(dead_code)]

use std::collections::HashMap;

use bitstuff::encoder::{BoundaryDist, EncoderSpec};
use bitstuff::lpsolve::{Direction, LpProblem, Sense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn h2(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// One outcome of the encoder on an `m×n` array: row-major values, its
/// probability, and the summed entropy of the coins used to write it.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub values: Vec<u8>,
    pub prob: f64,
    pub coin_entropy: f64,
}

fn offsets(e: &EncoderSpec) -> Vec<(i64, i64)> {
    let mut v: Vec<(i64, i64)> = e.psi.iter().map(|p| (p.i as i64, p.j as i64)).collect();
    v.sort();
    v
}

/// Cells whose whole neighborhood lies inside the array, in raster order.
pub fn interior_cells(e: &EncoderSpec, m: usize, n: usize) -> Vec<(usize, usize)> {
    let off = offsets(e);
    let mut out = Vec::new();
    for i in 0..m {
        for j in 0..n {
            let inside = off.iter().all(|&(a, b)| {
                let (r, c) = (i as i64 + a, j as i64 + b);
                r >= 0 && c >= 0 && r < m as i64 && c < n as i64
            });
            if inside {
                out.push((i, j));
            }
        }
    }
    out
}

/// Every array with positive probability, for a constant-fill encoder.
pub fn exact_arrays(e: &EncoderSpec, m: usize, n: usize) -> Vec<Outcome> {
    let BoundaryDist::ConstantFill(fill) = e.boundary else { panic!("oracle needs a constant fill") };
    let off = offsets(e);
    let cells = interior_cells(e, m, n);
    let mut out = Vec::new();
    let mut values = vec![fill; m * n];
    fn rec(
        e: &EncoderSpec,
        off: &[(i64, i64)],
        cells: &[(usize, usize)],
        n: usize,
        values: &mut Vec<u8>,
        prob: f64,
        ent: f64,
        out: &mut Vec<Outcome>,
    ) {
        let Some((&(i, j), rest)) = cells.split_first() else {
            out.push(Outcome { values: values.clone(), prob, coin_entropy: ent });
            return;
        };
        let ctx: Vec<u8> =
            off.iter().map(|&(a, b)| values[((i as i64 + a) as usize) * n + (j as i64 + b) as usize]).collect();
        let dist = e.mu.dist(&ctx).expect("context covered");
        let h = h2(&dist);
        for (w, &p) in dist.iter().enumerate() {
            if p > 0.0 {
                values[i * n + j] = w as u8;
                rec(e, off, rest, n, values, prob * p, ent + h, out);
            }
        }
        values[i * n + j] = 0;
    }
    rec(e, &off, &cells, n, &mut values, 1.0, 0.0, &mut out);
    out
}

/// Law of `A^{(k)}`: the uniform `m×n` window of the `(m+k−1)×(n+k−1)` array.
pub fn window_law(e: &EncoderSpec, m: usize, n: usize, k: usize) -> Vec<(Vec<u8>, f64)> {
    let (bm, bn) = (m + k - 1, n + k - 1);
    let mut law: HashMap<Vec<u8>, f64> = HashMap::new();
    for o in exact_arrays(e, bm, bn) {
        for di in 0..k {
            for dj in 0..k {
                let w: Vec<u8> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| o.values[(i + di) * bn + j + dj]).collect();
                *law.entry(w).or_default() += o.prob / (k * k) as f64;
            }
        }
    }
    let mut v: Vec<_> = law.into_iter().collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

/// No two 1s adjacent horizontally, vertically or diagonally.
pub fn kings_ok(values: &[u8], m: usize, n: usize) -> bool {
    for i in 0..m {
        for j in 0..n {
            if values[i * n + j] != 1 {
                continue;
            }
            for (a, b) in [(0i64, 1i64), (1, -1), (1, 0), (1, 1)] {
                let (r, c) = (i as i64 + a, j as i64 + b);
                if r >= 0 && c >= 0 && r < m as i64 && c < n as i64 && values[r as usize * n + c as usize] == 1 {
                    return false;
                }
            }
        }
    }
    true
}

fn solve_square(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &v)| r.iter().copied().chain([v]).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))?;
        if m[p][c].abs() < 1e-11 {
            return None;
        }
        m.swap(p, c);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    Some((0..n).map(|r| m[r][n] / m[r][r]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

/// Optimum over the vertices of a bounded LP, or `None` if it has no
/// feasible vertex. A vertex is any feasible point fixed by `n` linearly
/// independent rows taken from the equalities, inequalities and bounds, so
/// redundant equalities are handled.
pub fn vertex_optimum(p: &LpProblem, dir: Direction) -> Option<f64> {
    let n = p.num_vars;
    let mut rows: Vec<(Vec<f64>, f64)> = p.eq_constraints.clone();
    for (r, b, _) in &p.ineq_constraints {
        rows.push((r.clone(), *b));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push((e, 0.0));
    }
    let mut best: Option<f64> = None;
    for pick in combinations(rows.len(), n) {
        let a: Vec<Vec<f64>> = pick.iter().map(|&k| rows[k].0.clone()).collect();
        let b: Vec<f64> = pick.iter().map(|&k| rows[k].1).collect();
        let Some(x) = solve_square(&a, &b) else { continue };
        if p.max_violation(&x) > 1e-9 {
            continue;
        }
        let v = p.objective_at(&x);
        best = Some(match (best, dir) {
            (None, _) => v,
            (Some(c), Direction::Min) => c.min(v),
            (Some(c), Direction::Max) => c.max(v),
        });
    }
    best
}

/// Random LP with at most 6 variables and 6 constraints; the last
/// inequality bounds `Σx` so every feasible instance has an optimum.
pub fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.random_range(1..=6);
    let total = rng.random_range(1..=6);
    let neq = rng.random_range(0..total.min(n + 1));
    let nineq = total - neq - 1;
    let coef = |rng: &mut ChaCha8Rng| rng.random_range(-5i32..=5) as f64;
    let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0..=3) as f64).collect();
    let mut p = LpProblem::new((0..n).map(|_| coef(rng)).collect());
    for _ in 0..neq {
        let row: Vec<f64> = (0..n).map(|_| coef(rng)).collect();
        let rhs = if rng.random_bool(0.85) { row.iter().zip(&x0).map(|(a, b)| a * b).sum() } else { coef(rng) };
        p.add_eq(row, rhs);
    }
    for _ in 0..nineq {
        let row: Vec<f64> = (0..n).map(|_| coef(rng)).collect();
        let at: f64 = row.iter().zip(&x0).map(|(a, b)| a * b).sum();
        let sense = if rng.random_bool(0.5) { Sense::Le } else { Sense::Ge };
        let slack = rng.random_range(0..=3) as f64;
        let rhs = if rng.random_bool(0.85) {
            if sense == Sense::Le { at + slack } else { at - slack }
        } else {
            coef(rng)
        };
        p.add_ineq(row, rhs, sense);
    }
    p.add_ineq(vec![1.0; n], 20.0, Sense::Le);
    p
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
