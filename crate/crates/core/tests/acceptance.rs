//! Acceptance suite: one PASS/FAIL line per criterion. Criterion 13 is
//! informational and never fails the run.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use bitstuff::bounds::{self, build_geometry, build_lp, BoundsOptions};
use bitstuff::constraint::{kings, rll_d_inf, Constraint};
use bitstuff::encoder::{running_example, BitStuffer, BoundaryDist, EncoderSpec, MuTable};
use bitstuff::grid::{self, Configuration, Index, IndexSet};
use bitstuff::lpsolve::{self, Direction, LpStatus};
use bitstuff::tune::{self, CoinParametrization, TuneOptions};
use rand::Rng;
use rayon::prelude::*;

const LP_MIN: f64 = 0.42430953;
const LP_MAX: f64 = 0.42442765;
const KINGS_CAP_UPPER: f64 = 0.425078;
const SEED: u64 = 20240601;

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Check {
    Check { pass, detail }
}

fn kings_running() -> (Constraint, EncoderSpec) {
    (kings(), running_example())
}

fn c1_running_example() -> Check {
    let (c, e) = kings_running();
    let start = Instant::now();
    let b = bounds::compute_bounds(&c, &e, 4, 5, 1).unwrap();
    let dt = start.elapsed();
    let pass = (b.lp_min - LP_MIN).abs() <= 1e-6 && (b.lp_max - LP_MAX).abs() <= 1e-6 && dt <= Duration::from_secs(300);
    check(pass, format!("lp_min={:.11} lp_max={:.11} in {:.2?}", b.lp_min, b.lp_max, dt))
}

fn c2_capacity_sanity() -> Check {
    let (c, e) = kings_running();
    let b = bounds::compute_bounds(&c, &e, 4, 5, 1).unwrap();
    let margin = KINGS_CAP_UPPER - b.lp_min;
    check(margin >= 5e-4, format!("cap upper bound - lp_min = {margin:.6}"))
}

fn c3_rate_sandwich() -> Check {
    let (c, e) = kings_running();
    let s = BitStuffer::new(&c, &e).unwrap();
    let start = Instant::now();
    let r = s.empirical_rate(200, 200, 50, SEED).unwrap();
    let dt = start.elapsed();
    let (lo, hi) = (LP_MIN - 0.002, LP_MAX + 0.002);
    let pass = r.mean >= lo && r.mean <= hi && r.stderr < 5e-4 && dt <= Duration::from_secs(120);
    check(
        pass,
        format!(
            "mean={:.5} stderr={:.1e} band=[{lo:.5},{hi:.5}] per-interior-cell={:.5} in {:.2?}",
            r.mean,
            r.stderr,
            r.per_interior_cell(),
            dt
        ),
    )
}

fn two_point_boundary(e: &EncoderSpec, sizes: &[(usize, usize)]) -> BoundaryDist {
    let mut tables = BTreeMap::new();
    for &(m, n) in sizes {
        let bd = Arc::new(grid::boundary(&grid::rectangle(m as i64, n as i64).unwrap(), &e.psi));
        let zero = Configuration::constant(bd.clone(), 0);
        let mut values = vec![0; bd.len()];
        values[bd.position(Index::ORIGIN).unwrap()] = 1;
        let corner = Configuration::new(bd, values);
        tables.insert((m, n), vec![(zero, 0.5), (corner, 0.5)]);
    }
    BoundaryDist::Explicit(tables)
}

fn c4_delta_independence() -> Check {
    let (c, a) = kings_running();
    let b = a.with_boundary(two_point_boundary(&a, &[(5, 5), (200, 200)]));
    let ba = bounds::compute_bounds(&c, &a, 4, 5, 1).unwrap();
    let bb = bounds::compute_bounds(&c, &b, 4, 5, 1).unwrap();
    let ra = BitStuffer::new(&c, &a).unwrap().empirical_rate(200, 200, 50, SEED).unwrap();
    let rb = BitStuffer::new(&c, &b).unwrap().empirical_rate(200, 200, 50, SEED).unwrap();
    let diff = (ra.mean - rb.mean).abs();
    let se = (ra.stderr.powi(2) + rb.stderr.powi(2)).sqrt();
    check(
        ba == bb && diff < 4.0 * se,
        format!("bounds identical={} |rate diff|={diff:.2e} vs 4se={:.2e}", ba == bb, 4.0 * se),
    )
}

fn c5_relaxed_nesting() -> Check {
    let (c, e) = kings_running();
    let exact = bounds::compute_bounds(&c, &e, 4, 5, 1).unwrap();
    let ks = [1u64, 2, 4, 8, 16, 1_000_000];
    let res: Vec<_> = ks.iter().map(|&k| bounds::compute_relaxed_bounds(&c, &e, 4, 5, 1, k).unwrap()).collect();
    let mut ok = true;
    for w in res.windows(2) {
        ok &= w[0].lp_min <= w[1].lp_min + 1e-9 && w[0].lp_max >= w[1].lp_max - 1e-9;
    }
    for r in &res {
        ok &= r.lp_min <= exact.lp_min + 1e-9 && exact.lp_max <= r.lp_max + 1e-9;
    }
    let last = res.last().unwrap();
    ok &= (last.lp_min - exact.lp_min).abs() <= 1e-4 && (last.lp_max - exact.lp_max).abs() <= 1e-4;
    let pairs: Vec<String> = ks.iter().zip(&res).map(|(k, r)| format!("k={k}:[{:.4},{:.4}]", r.lp_min, r.lp_max)).collect();
    check(ok, pairs.join(" "))
}

fn c6_feasibility_witness() -> Check {
    let (c, e) = kings_running();
    let (m, k) = (6usize, 2usize);
    let g = build_geometry(&e.psi, 3, 4, 1).unwrap();
    let lp = build_lp(&c, &e, &g, Some(k as u64), &BoundsOptions::default()).unwrap();
    let (ai, aj) = (2i32, 3i32);
    let gamma: Vec<Index> = g.gamma.iter().collect();
    let mut pi = vec![0.0; lp.variables().len()];
    let mut missing = 0;
    for (w, p) in common::window_law(&e, m, m, k) {
        let z: Vec<u8> = gamma.iter().map(|q| w[(q.i + ai) as usize * m + (q.j + aj) as usize]).collect();
        match lp.variables().index_of(&z) {
            Some(x) => pi[x] += p,
            None => missing += 1,
        }
    }
    let viol = lp.problem.max_violation(&pi);
    check(
        missing == 0 && viol <= 1e-10,
        format!("geometry (3,4,1) |Gamma|={} rows={} max violation={viol:.1e}", gamma.len(), lp.problem.num_constraints()),
    )
}

/// Largest excess of a shifted event difference over `(|α|+|β|)/k`, over all
/// single-cell and two-cell events of the exact window law.
fn shift_excess(law: &[(Vec<u8>, f64)], m: usize, n: usize, k: usize) -> f64 {
    let cells: Vec<(i64, i64)> = (0..m as i64).flat_map(|i| (0..n as i64).map(move |j| (i, j))).collect();
    let at = |w: &[u8], (i, j): (i64, i64)| w[i as usize * n + j as usize];
    let inside = |(i, j): (i64, i64)| i >= 0 && j >= 0 && i < m as i64 && j < n as i64;
    let prob = |event: &dyn Fn(&[u8]) -> bool| law.iter().filter(|(w, _)| event(w)).map(|(_, p)| p).sum::<f64>();
    let mut sets: Vec<Vec<(i64, i64)>> = cells.iter().map(|&p| vec![p]).collect();
    for (x, &p) in cells.iter().enumerate() {
        for &q in &cells[x + 1..] {
            sets.push(vec![p, q]);
        }
    }
    let mut worst = f64::NEG_INFINITY;
    for u in &sets {
        for a in -(m as i64)..m as i64 {
            for b in -(n as i64)..n as i64 {
                let shifted: Vec<(i64, i64)> = u.iter().map(|&(i, j)| (i + a, j + b)).collect();
                if (a, b) == (0, 0) || !shifted.iter().all(|&p| inside(p)) {
                    continue;
                }
                for code in 0..(1u32 << u.len()) {
                    let sym: Vec<u8> = (0..u.len()).map(|x| ((code >> x) & 1) as u8).collect();
                    let p0 = prob(&|w| u.iter().zip(&sym).all(|(&c, &s)| at(w, c) == s));
                    let p1 = prob(&|w| shifted.iter().zip(&sym).all(|(&c, &s)| at(w, c) == s));
                    let bound = (a.abs() + b.abs()) as f64 / k as f64;
                    worst = worst.max((p0 - p1).abs() - bound);
                }
            }
        }
    }
    worst
}

fn psi4_encoder() -> EncoderSpec {
    let psi = IndexSet::from_pairs(&[(-1, -1), (-1, 0), (-1, 1), (0, -1)]);
    let mu = MuTable::new(2, 4, Some(0)).with(&[0, 0, 0, 0], &[0.65, 0.35]);
    EncoderSpec::new(psi, mu, BoundaryDist::ConstantFill(0))
}

fn c7_quasi_stationarity() -> Check {
    let (c, e) = kings_running();
    let small = psi4_encoder();
    let exact = [
        ("psi_sq M=N=2", shift_excess(&common::window_law(&e, 2, 2, 2), 2, 2, 2)),
        ("psi_sq M=N=3", shift_excess(&common::window_law(&e, 3, 3, 2), 3, 3, 2)),
        ("psi4 M=N=2", shift_excess(&common::window_law(&small, 2, 2, 2), 2, 2, 2)),
        ("psi4 M=N=3", shift_excess(&common::window_law(&small, 3, 3, 2), 3, 3, 2)),
    ];
    let exact_ok = exact.iter().all(|(_, x)| *x <= 1e-12);

    let (m, k, samples) = (3usize, 4usize, 100_000u64);
    let s = BitStuffer::new(&c, &e).unwrap();
    let arrays: Vec<Vec<u8>> =
        (0..samples).into_par_iter().map(|t| s.sample_quasistationary_stream(m, m, k, SEED, t).unwrap().values).collect();
    let mut stat_worst = f64::NEG_INFINITY;
    for p in 0..m * m {
        for q in 0..m * m {
            let (a, b) = ((q / m) as i64 - (p / m) as i64, (q % m) as i64 - (p % m) as i64);
            if p == q {
                continue;
            }
            let d: Vec<f64> = arrays.iter().map(|w| w[p] as f64 - w[q] as f64).collect();
            let mean = d.iter().sum::<f64>() / samples as f64;
            let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
            let se = (var / samples as f64).sqrt();
            let bound = (a.abs() + b.abs()) as f64 / k as f64;
            stat_worst = stat_worst.max(mean.abs() - bound - 4.0 * se);
        }
    }
    let detail: Vec<String> = exact.iter().map(|(n, x)| format!("{n}: {x:+.1e}")).collect();
    check(
        exact_ok && stat_worst <= 0.0,
        format!("exact excess {}; statistical excess over bound+4se {stat_worst:+.2e}", detail.join(", ")),
    )
}

fn c8_enumeration_oracle() -> Check {
    let c = kings();
    let mut bad = Vec::new();
    for m in 1..=4usize {
        for n in 1..=4usize {
            let lib = c.count_restriction(&grid::rectangle(m as i64, n as i64).unwrap());
            let brute = (0u32..1 << (m * n))
                .filter(|&code| {
                    let v: Vec<u8> = (0..m * n).map(|x| ((code >> x) & 1) as u8).collect();
                    common::kings_ok(&v, m, n)
                })
                .count() as u64;
            if lib != brute {
                bad.push(format!("{m}x{n}: {lib} vs {brute}"));
            }
        }
    }
    check(bad.is_empty(), if bad.is_empty() { "16 sizes match".into() } else { bad.join(", ") })
}

fn c9_chain_rule() -> Check {
    let (c, e) = kings_running();
    let oracle = common::exact_arrays(&e, 4, 4);
    let h: f64 = oracle.iter().map(|o| -o.prob * o.prob.log2()).sum();
    let lib = BitStuffer::new(&c, &e).unwrap().exact_outcomes(4, 4, 1 << 20).unwrap();
    let expected: f64 = lib.iter().map(|o| o.prob * o.coin_entropy).sum();
    let diff = (h - expected).abs();
    check(
        diff <= 1e-10 && lib.len() == oracle.len(),
        format!("H={h:.12} E[sum h]={expected:.12} diff={diff:.1e} arrays={}", lib.len()),
    )
}

fn c10_lp_oracle() -> Check {
    let mut rng = common::rng(SEED);
    let (mut disagree, mut gaps, mut solved) = (0, 0, 0);
    for _ in 0..1000 {
        let p = common::random_lp(&mut rng);
        for dir in [Direction::Min, Direction::Max] {
            let sol = lpsolve::solve(&p, dir).unwrap();
            match common::vertex_optimum(&p, dir) {
                Some(v) => {
                    solved += 1;
                    if sol.status != LpStatus::Optimal || (sol.objective_value - v).abs() > 1e-8 {
                        disagree += 1;
                    }
                }
                None => {
                    if sol.status != LpStatus::Infeasible {
                        disagree += 1;
                    }
                }
            }
            if sol.is_optimal() && sol.duality_gap > 1e-8 * (1.0 + sol.objective_value.abs()) {
                gaps += 1;
            }
        }
    }
    check(
        disagree == 0 && gaps == 0,
        format!("2000 solves ({solved} feasible): {disagree} disagreements, {gaps} gap violations"),
    )
}

fn c11_round_trips() -> Check {
    let (c, e) = kings_running();
    let s = BitStuffer::new(&c, &e).unwrap();
    let mut rng = common::rng(SEED + 11);
    let inputs: Vec<Vec<bool>> = (0..1000)
        .map(|_| {
            let len = rng.random_range(0..=512);
            (0..len).map(|_| rng.random_bool(0.5)).collect()
        })
        .collect();
    let failures = inputs
        .par_iter()
        .filter(|bits| {
            let out = s.encode(20, 20, bits).unwrap();
            let mut want: Vec<bool> = bits.iter().copied().take(out.bits_consumed).collect();
            want.resize(out.bits_consumed, false);
            !(c.locally_valid(&out.array.configuration()) && s.decode(&out.array).unwrap() == want)
        })
        .count();
    check(failures == 0, format!("{failures} of 1000 round trips failed"))
}

fn c12_optimizer() -> Check {
    let c = kings();
    let opts = TuneOptions { budget: 500, seed: SEED, ..TuneOptions::default() };
    let start = Instant::now();
    let out = tune::optimize_mu(&c, &tune::kings_two_coins(0.5, 0.5), 4, 5, 1, &opts).unwrap();
    let th = &out.parametrization.theta;
    let (t0, t1) = (th[0][1], th[1][1]);
    let pass = out.bounds.lp_min >= 0.4242 && (t0 - 0.258132).abs() <= 0.005 && (t1 - 0.312231).abs() <= 0.005;
    check(
        pass,
        format!(
            "lp_min={:.7} theta=({t0:.6},{t1:.6}) evals={} in {:.2?}",
            out.bounds.lp_min,
            out.evaluations,
            start.elapsed()
        ),
    )
}

/// Best optimized lp_min of `p0` over the given geometries.
fn best_over(c: &Constraint, p0: &CoinParametrization, geoms: &[(i64, i64, i64)], budget: usize) -> (f64, (i64, i64, i64)) {
    let opts = TuneOptions { budget, seed: SEED, ..TuneOptions::default() };
    geoms
        .iter()
        .filter_map(|&g| tune::optimize_mu(c, p0, g.0, g.1, g.2, &opts).ok().map(|o| (o.bounds.lp_min, g)))
        .fold((f64::NEG_INFINITY, (0, 0, 0)), |a, b| if b.0 > a.0 { b } else { a })
}

/// (1,∞)-RLL over Ψ_sq: a cell may be 1 only when its left and upper
/// neighbours are 0. The coin is picked by the other three context cells:
/// upper-right 1, else two-left 1, else neither.
fn rll1_three_coins() -> CoinParametrization {
    let mut p = CoinParametrization::new(grid::psi_sq(), 2, Some(0));
    let mut groups: [Vec<Vec<u8>>; 3] = Default::default();
    for code in 0u8..8 {
        let (ul, ur, ll) = (code & 1, (code >> 1) & 1, (code >> 2) & 1);
        let g = if ur == 1 {
            0
        } else if ll == 1 {
            1
        } else {
            2
        };
        groups[g].push(vec![ul, 0, ur, ll, 0]);
    }
    for g in &groups {
        p.add_coin(g, vec![0.5, 0.5]);
    }
    p
}

fn c13_table_targets() -> Check {
    let rll2 = rll_d_inf(2).unwrap();
    let psi = IndexSet::from_pairs(&[(-2, 0), (-1, 0), (0, -2), (0, -1)]);
    let one = CoinParametrization::by_admissible_sets(&rll2, &psi);
    let (v2, g2) = best_over(&rll2, &one, &[(3, 6, 1)], 80);
    let rll1 = rll_d_inf(1).unwrap();
    let (v1, g1) = best_over(&rll1, &rll1_three_coins(), &[(4, 5, 1)], 150);
    let pass = v2 >= 0.4407 - 1e-3 && v1 >= 0.5877 - 2e-3;
    check(
        pass,
        format!(
            "(2,inf)-RLL 1 coin: lp_min={v2:.6} at {g2:?} (target 0.4397); (1,inf)-RLL 3 coins: lp_min={v1:.6} at {g1:?} (target 0.5857)"
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [(u32, &str, fn() -> Check); 13] = [
        (1, "running-example bounds", c1_running_example),
        (2, "capacity sanity", c2_capacity_sanity),
        (3, "rate sandwich", c3_rate_sandwich),
        (4, "boundary independence", c4_delta_independence),
        (5, "relaxed nesting", c5_relaxed_nesting),
        (6, "feasibility witness", c6_feasibility_witness),
        (7, "quasi-stationarity", c7_quasi_stationarity),
        (8, "enumeration oracle", c8_enumeration_oracle),
        (9, "entropy chain rule", c9_chain_rule),
        (10, "LP oracle", c10_lp_oracle),
        (11, "encode/decode", c11_round_trips),
        (12, "optimizer recovery", c12_optimizer),
        (13, "table targets (informational)", c13_table_targets),
    ];
    let mut failed = Vec::new();
    for (id, name, f) in criteria {
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            check(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let verdict = match (r.pass, id == 13) {
            (true, _) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "INFO-MISS",
        };
        println!("criterion {id:>2} {verdict:<9} {name}: {}", r.detail);
        if !r.pass && id != 13 {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
