//! Cross-checks of the discretization against brute-force evaluations.

use nonlocal_core::energy::{fractional_seminorm_p, gagliardo_seminorm_p, Energy, EnergyParams};
use nonlocal_core::solver::{solve_dirichlet, SolveOptions, SolveResult};
use nonlocal_core::tail::{compute_tail, FarField};
use nonlocal_core::{DiscreteDomain, KernelSpec, PhiTable, Shape};

fn solve_with(d: &DiscreteDomain, spec: &KernelSpec, g: impl Fn([f64; 2]) -> f64) -> SolveResult {
    let e = Energy::new(d, EnergyParams::with_default_reg(spec.clone(), 1.0).unwrap()).unwrap();
    solve_dirichlet(&e, &d.sample_exterior(g), &SolveOptions::default()).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn seminorm_matches_dense_double_sum_in_2d() {
    let d = DiscreteDomain::build(Shape::ball_2d([0.0, 0.0], 1.0), 0.2, 2.5).unwrap();
    let f: Vec<f64> = d.coords().iter().map(|x| x[0] * x[0] - 0.5 * x[1]).collect();
    let nodes = d.nodes_in_ball([0.0, 0.0], 0.9);
    let (s, p) = (0.6, 2.5);
    let mut dense = 0.0;
    for &i in &nodes {
        for &j in &nodes {
            if i != j {
                let r = d.distance(i, j);
                dense += (f[i] - f[j]).abs().powf(p) / r.powf(2.0 + s * p);
            }
        }
    }
    dense *= d.cell_measure().powi(2);
    let got = fractional_seminorm_p(&f, &d, &nodes, s, p).unwrap();
    assert!((got - dense).abs() <= 1e-12 * dense, "{got} vs {dense}");
    let general = gagliardo_seminorm_p(&f, &d, &nodes, &KernelSpec::power(s, p, 2)).unwrap();
    assert!((general - dense).abs() <= 1e-9 * dense, "{general} vs {dense}");
}

#[test]
fn solutions_follow_affine_changes_of_the_data() {
    let d = DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), 0.05, 3.0).unwrap();
    let spec = KernelSpec::power(0.6, 2.0, 1);
    let g = |x: [f64; 2]| (3.0 * x[0]).sin();
    let base = solve_with(&d, &spec, g);
    let shifted = solve_with(&d, &spec, |x| g(x) + 4.0);
    let scaled = solve_with(&d, &spec, |x| -2.5 * g(x));
    let tol = 10.0 * base.tol_g.max(shifted.tol_g).max(scaled.tol_g);
    let plus: Vec<f64> = base.u.values().iter().map(|v| v + 4.0).collect();
    let times: Vec<f64> = base.u.values().iter().map(|v| -2.5 * v).collect();
    assert!(max_diff(&plus, shifted.u.values()) <= tol);
    assert!(max_diff(&times, scaled.u.values()) <= 2.5 * tol);
}

#[test]
fn reflected_data_gives_reflected_solution() {
    let d = DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), 0.05, 3.0).unwrap();
    let spec = KernelSpec::power(0.4, 3.0, 1);
    let g = |x: [f64; 2]| x[0].powi(3) + x[0];
    let sol = solve_with(&d, &spec, g);
    assert!(sol.converged);
    for (i, x) in d.coords().iter().enumerate() {
        let mirror = d.node_at([-d.lattice(i)[0], 0]).unwrap();
        assert!(
            (sol.u.values()[i] + sol.u.values()[mirror]).abs() <= 1e-4,
            "odd symmetry broken at {x:?}"
        );
    }
}

#[test]
fn solution_respects_data_bounds() {
    let d = DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), 0.05, 3.0).unwrap();
    let sol = solve_with(&d, &KernelSpec::power(0.5, 1.5, 1), |x| (2.0 * x[0]).cos());
    let n_int = d.n_interior();
    let ext = &sol.u.values()[n_int..];
    let (lo, hi) = ext
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    for &v in &sol.u.values()[..n_int] {
        assert!(v >= lo - 1e-6 && v <= hi + 1e-6);
    }
}

#[test]
fn tail_does_not_depend_on_the_truncation_radius() {
    let table = PhiTable::new(&KernelSpec::power(0.5, 2.0, 1)).unwrap();
    let far = FarField::Constant { value: 2.0 };
    let tail = |r_trunc: f64| {
        let d = DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), 0.05, r_trunc).unwrap();
        let f: Vec<f64> = d
            .coords()
            .iter()
            .map(|x| if d.shape().contains(*x) { x[0] } else { 2.0 })
            .collect();
        compute_tail(&table, &d, &f, &far, [0.0, 0.0], 0.5).unwrap().value
    };
    let (a, b) = (tail(3.0), tail(6.0));
    assert!((a - b).abs() <= 1e-2 * b, "{a} vs {b}");
}
