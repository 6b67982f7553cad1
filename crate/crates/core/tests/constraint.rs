use bitstuff::constraint::{self, kings, nib, parse_constraint_source, rll_d_inf, rll_0_k, Constraint};
use bitstuff::grid::{self, Configuration, IndexSet};

/// Brute-force count of `m×n` binary arrays that are locally valid and stay
/// valid after padding with `pad` on every side by `margin` cells.
fn brute(c: &Constraint, m: usize, n: usize, pad: u8, margin: usize) -> u64 {
    let (pm, pn) = (m + 2 * margin, n + 2 * margin);
    let big = std::sync::Arc::new(grid::rectangle(pm as i64, pn as i64).unwrap());
    (0u32..1 << (m * n))
        .filter(|&code| {
            let mut v = vec![pad; pm * pn];
            for k in 0..m * n {
                v[(k / n + margin) * pn + k % n + margin] = ((code >> k) & 1) as u8;
            }
            c.locally_valid(&Configuration::new(big.clone(), v))
        })
        .count() as u64
}

#[test]
fn restriction_sizes_match_padded_brute_force() {
    for c in [kings(), rll_d_inf(1).unwrap(), rll_d_inf(2).unwrap()] {
        for (m, n) in [(1, 2), (2, 3), (3, 3), (3, 4)] {
            let u = grid::rectangle(m as i64, n as i64).unwrap();
            assert_eq!(c.count_restriction(&u), brute(&c, m, n, 0, 2), "{} {m}x{n}", c.name());
        }
    }
    let u = grid::rectangle(1, 2).unwrap();
    let members: Vec<Vec<u8>> = kings().restriction(&u).members().to_vec();
    assert_eq!(members, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
}

#[test]
fn zero_k_rll_pads_with_ones() {
    let c = rll_0_k(1).unwrap();
    for (m, n) in [(2, 2), (2, 3), (3, 3)] {
        let u = grid::rectangle(m as i64, n as i64).unwrap();
        assert_eq!(c.count_restriction(&u), brute(&c, m, n, 1, 2));
    }
}

#[test]
fn isolated_bits() {
    let c = nib(4).unwrap();
    let cells = |rows: &[&[u8]]| Configuration::from_rows(rows);
    assert!(!c.locally_valid(&cells(&[&[0, 0, 0], &[0, 1, 0], &[0, 0, 0]])));
    assert!(c.locally_valid(&cells(&[&[0, 0, 0], &[0, 1, 1], &[0, 0, 0]])));
    assert!(c.safe_symbol().is_none());
}

#[test]
fn sources_parse() {
    assert_eq!(parse_constraint_source("builtin:kings").unwrap().name(), "kings");
    assert_eq!(parse_constraint_source("builtin:rll_d_inf:3").unwrap().forbidden().len(), 6);
    assert!(parse_constraint_source("builtin:nib:5").is_err());
    assert!(parse_constraint_source("builtin:nope").is_err());
    let text = "alphabet = 2\nforbid = (0,0):1 (0,1):1\nforbid = (0,0):1 (1,0):1\nsafe = 0\n";
    let c = parse_constraint_source(text).unwrap();
    assert_eq!(c.count_restriction(&grid::rectangle(3, 3).unwrap()), rll_d_inf(1).unwrap().count_restriction(&grid::rectangle(3, 3).unwrap()));
    assert!(matches!(parse_constraint_source("alphabet = 2\nforbid = (0,0)\n"), Err(constraint::ConstraintError::Parse { line: 2, .. })));
}

#[test]
fn first_violation_points_at_the_pattern() {
    let a = Configuration::from_rows(&[&[0, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
    let v = kings().first_violation(&a).unwrap();
    assert!(v == grid::Index::new(1, 1) || v == grid::Index::new(2, 2));
    assert!(kings().restriction(&IndexSet::empty()).len() == 1);
}
