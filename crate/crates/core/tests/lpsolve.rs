mod common;

use bitstuff::lpsolve::{self, Direction, LpProblem, LpStatus, Sense};

#[test]
fn random_lps_match_vertex_enumeration() {
    let mut rng = common::rng(7);
    for _ in 0..300 {
        let p = common::random_lp(&mut rng);
        for dir in [Direction::Min, Direction::Max] {
            let sol = lpsolve::solve(&p, dir).unwrap();
            match common::vertex_optimum(&p, dir) {
                Some(v) => {
                    assert_eq!(sol.status, LpStatus::Optimal, "{}", p.to_lp_format(dir));
                    assert!((sol.objective_value - v).abs() <= 1e-8, "{} vs {v}", sol.objective_value);
                    assert!(sol.max_primal_violation <= 1e-9);
                }
                None => assert_eq!(sol.status, LpStatus::Infeasible),
            }
        }
    }
}

#[test]
fn duals_give_the_same_objective() {
    let mut rng = common::rng(8);
    let mut checked = 0;
    for _ in 0..200 {
        let p = common::random_lp(&mut rng);
        let sol = lpsolve::solve(&p, Direction::Min).unwrap();
        if !sol.is_optimal() {
            continue;
        }
        let rhs = p.eq_constraints.iter().map(|r| r.1).chain(p.ineq_constraints.iter().map(|r| r.1));
        let dual_obj: f64 = rhs.zip(&sol.dual).map(|(b, y)| b * y).sum();
        assert!((dual_obj - sol.objective_value).abs() <= 1e-8 * (1.0 + sol.objective_value.abs()));
        // Dual signs for a minimization: y ≤ 0 on ≤ rows, y ≥ 0 on ≥ rows.
        for ((_, _, sense), y) in p.ineq_constraints.iter().zip(&sol.dual[p.eq_constraints.len()..]) {
            match sense {
                Sense::Le => assert!(*y <= 1e-9),
                Sense::Ge => assert!(*y >= -1e-9),
            }
        }
        checked += 1;
    }
    assert!(checked > 100);
}

#[test]
fn objective_scaling_scales_the_optimum() {
    let mut rng = common::rng(9);
    for _ in 0..100 {
        let p = common::random_lp(&mut rng);
        let a = lpsolve::solve(&p, Direction::Max).unwrap();
        let mut q = p.clone();
        q.objective.iter_mut().for_each(|c| *c *= 1000.0);
        let b = lpsolve::solve(&q, Direction::Max).unwrap();
        assert_eq!(a.status, b.status);
        if a.is_optimal() {
            assert!((1000.0 * a.objective_value - b.objective_value).abs() <= 1e-6 * (1.0 + b.objective_value.abs()));
        }
    }
}

#[test]
fn beale_cycling_example_terminates() {
    // Beale's example cycles under the textbook ratio rule.
    let mut p = LpProblem::new(vec![-0.75, 150.0, -0.02, 6.0]);
    p.add_ineq(vec![0.25, -60.0, -0.04, 9.0], 0.0, Sense::Le);
    p.add_ineq(vec![0.5, -90.0, -0.02, 3.0], 0.0, Sense::Le);
    p.add_ineq(vec![0.0, 0.0, 1.0, 0.0], 1.0, Sense::Le);
    let sol = lpsolve::solve(&p, Direction::Min).unwrap();
    assert!(sol.is_optimal());
    assert!((sol.objective_value + 0.05).abs() < 1e-9);
}

#[test]
fn unbounded_and_infeasible() {
    let mut p = LpProblem::new(vec![1.0, 1.0]);
    p.add_ineq(vec![1.0, -1.0], 1.0, Sense::Le);
    assert_eq!(lpsolve::solve(&p, Direction::Max).unwrap().status, LpStatus::Unbounded);
    let mut q = LpProblem::new(vec![1.0]);
    q.add_ineq(vec![1.0], 2.0, Sense::Ge);
    q.add_ineq(vec![1.0], 1.0, Sense::Le);
    assert_eq!(lpsolve::solve(&q, Direction::Min).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn export_lists_every_row() {
    let mut rng = common::rng(10);
    let p = common::random_lp(&mut rng);
    let text = p.to_lp_format(Direction::Max);
    assert!(text.contains("Maximize"));
    assert_eq!(text.lines().filter(|l| l.trim_start().starts_with('e') || l.trim_start().starts_with('i')).count(), p.num_constraints());
    assert!(text.trim_end().ends_with("End"));
}
