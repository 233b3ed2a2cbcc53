//! Dirichlet problem by direct minimization of the discrete energy over the
//! interior values, exterior values held fixed.
//!
//! The method is accelerated gradient descent (FISTA) with a backtracking
//! Lipschitz estimate and a monotone restart: whenever a step would raise
//! the energy, momentum is dropped and a plain gradient step from the last
//! accepted iterate is taken instead, so accepted energies never increase.

use serde::{Deserialize, Serialize};

use crate::domain::GridFunction;
use crate::energy::Energy;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    /// Interior copies the nearest exterior value.
    #[default]
    NearestExterior,
    Zeros,
    /// Interior values supplied by the caller.
    Given(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Gradient max-norm target; `None` means `1e-8 · (‖∇F(u₀)‖∞ + 1)`.
    pub tol_g: Option<f64>,
    /// Relative energy decrease over the last `window` iterations.
    pub tol_e: f64,
    pub window: usize,
    pub max_iter: usize,
    pub start: Start,
    /// Keep every iterate's energy in the result.
    pub record_trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_g: None,
            tol_e: 1e-10,
            window: 5,
            max_iter: 20_000,
            start: Start::NearestExterior,
            record_trace: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub energy: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub u: GridFunction,
    pub final_energy: f64,
    /// `‖∇F(u)‖∞` over interior nodes.
    pub grad_norm: f64,
    pub tol_g: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restarts: usize,
    pub trace: Vec<TracePoint>,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Largest eigenvalue of the `p = 2` Hessian by power iteration.
pub fn quadratic_form_norm(energy: &Energy, iterations: usize) -> f64 {
    let n = energy.domain().n_interior();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (i as f64 * 0.7).sin()).collect();
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let hv = energy.quadratic_form_apply(&v);
        lambda = v.iter().zip(&hv).map(|(a, b)| a * b).sum::<f64>();
        v = hv;
    }
    lambda
}

/// Minimizes the energy with exterior slots fixed to `g`.
pub fn solve_dirichlet(energy: &Energy, g: &[f64], opts: &SolveOptions) -> Result<SolveResult> {
    let domain = energy.domain();
    let n_int = domain.n_interior();
    let mut x = match &opts.start {
        Start::NearestExterior => domain.impose_exterior_data(g)?.values().to_vec(),
        Start::Zeros | Start::Given(_) => {
            let mut u = domain.impose_exterior_data(g)?.values().to_vec();
            match &opts.start {
                Start::Given(v) => {
                    if v.len() != n_int || v.iter().any(|t| !t.is_finite()) {
                        return Err(Error::Shape(format!("start needs {n_int} finite interior values")));
                    }
                    u[..n_int].copy_from_slice(v);
                }
                _ => u[..n_int].iter_mut().for_each(|t| *t = 0.0),
            }
            u
        }
    };
    if opts.window == 0 {
        return Err(Error::Parameter("energy window must be >= 1".into()));
    }
    let p = energy.params().spec.p;

    let mut fx = energy.value(&x)?;
    let mut gx = energy.gradient(&x)?;
    let g0 = max_norm(&gx);
    let tol_g = opts.tol_g.unwrap_or(1e-8 * (g0 + 1.0));
    if !fx.is_finite() {
        return Err(Error::Numeric("initial energy is not finite".into()));
    }

    let mut lip = quadratic_form_norm(energy, 60);
    if p != 2.0 {
        let (lo, hi) = g
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let osc = (hi - lo).max(1e-12);
        lip *= 0.5 * p * (p - 1.0) * osc.powf(p - 2.0);
    }
    if !(lip > 0.0) || !lip.is_finite() {
        lip = 1.0;
    }

    let mut energies = vec![fx];
    let mut trace = Vec::new();
    if opts.record_trace {
        trace.push(TracePoint {
            iteration: 0,
            energy: fx,
            grad_norm: g0,
        });
    }
    let window_ok = |e: &[f64]| {
        if e.len() <= opts.window {
            return e[e.len() - 1] == 0.0;
        }
        let old = e[e.len() - 1 - opts.window];
        let new = e[e.len() - 1];
        (old - new) <= opts.tol_e * old.abs().max(f64::MIN_POSITIVE)
    };
    let done = |gn: f64, e: &[f64]| gn <= tol_g && window_ok(e);

    let mut y = x.clone();
    let mut t: f64 = 1.0;
    let mut restarts = 0;
    let mut iterations = 0;
    let mut grad_norm = g0;
    let mut converged = done(grad_norm, &energies);
    let mut gy = gx.clone();
    let mut trial = x.clone();

    while !converged && iterations < opts.max_iter {
        iterations += 1;
        if p != 2.0 {
            lip *= 0.9;
        }
        let gnorm2: f64 = gy.iter().map(|v| v * v).sum();
        let mut attempts = 0;
        loop {
            for i in 0..n_int {
                trial[i] = y[i] - gy[i] / lip;
            }
            trial[n_int..].copy_from_slice(&y[n_int..]);
            // sufficient decrease measured from y, as an accurate difference
            let drop = energy.difference(&trial, &y)?;
            if drop.is_finite() && drop <= -0.5 * gnorm2 / lip * (1.0 - 1e-9) {
                break;
            }
            lip *= 2.0;
            attempts += 1;
            if attempts > 200 {
                return Err(Error::Numeric("line search failed to find a decrease".into()));
            }
        }
        let step = energy.difference(&trial, &x)?;
        let f_trial = fx + step;
        if step > 0.0 {
            // momentum overshoot: restart from the last accepted iterate
            restarts += 1;
            if t == 1.0 {
                // even a plain step fails to decrease: floating point floor
                break;
            }
            t = 1.0;
            y.copy_from_slice(&x);
            gy.copy_from_slice(&gx);
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for i in 0..n_int {
            y[i] = trial[i] + beta * (trial[i] - x[i]);
        }
        x.copy_from_slice(&trial);
        fx = f_trial;
        t = t_next;
        gx = energy.gradient(&x)?;
        grad_norm = max_norm(&gx);
        if !fx.is_finite() || !grad_norm.is_finite() {
            return Err(Error::Numeric("energy or gradient became non-finite".into()));
        }
        energies.push(fx);
        if opts.record_trace {
            trace.push(TracePoint {
                iteration: iterations,
                energy: fx,
                grad_norm,
            });
        }
        converged = done(grad_norm, &energies);
        if beta == 0.0 {
            gy.copy_from_slice(&gx);
        } else {
            gy = energy.gradient(&y)?;
        }
    }
    if !converged {
        converged = done(grad_norm, &energies);
    }
    let final_energy = energy.value(&x)?;
    Ok(SolveResult {
        u: GridFunction::new(domain, x)?,
        final_energy,
        grad_norm,
        tol_g,
        iterations,
        converged,
        restarts,
        trace,
    })
}

/// Maximum over interior nodes of the pairing of `u` with the nodal hat
/// functions, i.e. `‖∇F(u)‖∞ / (2p)`.
pub fn weak_residual(energy: &Energy, u: &[f64]) -> Result<f64> {
    let p = energy.params().spec.p;
    Ok(max_norm(&energy.gradient(u)?) / (2.0 * p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeCheck {
    pub pass: bool,
    pub g_min: f64,
    pub g_max: f64,
    /// First interior node outside the band, with its value.
    pub offending: Option<(usize, f64)>,
}

/// Checks `min g - tol ≤ u_i ≤ max g + tol` on interior nodes.
pub fn range_bounds_check(u: &GridFunction, n_interior: usize, tol: f64) -> RangeCheck {
    let v = u.values();
    let (g_min, g_max) = v[n_interior..]
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let offending = v[..n_interior]
        .iter()
        .enumerate()
        .find(|(_, &x)| x < g_min - tol || x > g_max + tol)
        .map(|(i, &x)| (i, x));
    RangeCheck {
        pass: offending.is_none(),
        g_min,
        g_max,
        offending,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{DiscreteDomain, Shape};
    use crate::energy::EnergyParams;
    use crate::kernel::KernelSpec;

    fn setup(h: f64, s: f64, p: f64) -> (DiscreteDomain, EnergyParams) {
        let d = DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), h, 4.0).unwrap();
        let params = EnergyParams::with_default_reg(KernelSpec::power(s, p, 1), 1.0).unwrap();
        (d, params)
    }

    #[test]
    fn constant_data_is_exact() {
        let (d, params) = setup(0.1, 0.5, 2.0);
        let e = Energy::new(&d, params).unwrap();
        let r = solve_dirichlet(&e, &vec![3.0; d.n_exterior()], &SolveOptions::default()).unwrap();
        assert!(r.converged && r.iterations <= 1);
        assert_eq!(r.final_energy, 0.0);
        assert!(r.u.values().iter().all(|&v| v == 3.0));
        assert!(range_bounds_check(&r.u, d.n_interior(), 0.0).pass);
    }

    #[test]
    fn energies_never_increase_and_starts_agree() {
        let (d, params) = setup(0.1, 0.5, 2.0);
        let e = Energy::new(&d, params).unwrap();
        let g = d.sample_exterior(|x| (2.0 * x[0]).sin());
        let a = solve_dirichlet(&e, &g, &SolveOptions::default()).unwrap();
        assert!(a.converged, "{} {}", a.grad_norm, a.tol_g);
        for w in a.trace.windows(2) {
            assert!(w[1].energy <= w[0].energy);
        }
        let b = solve_dirichlet(
            &e,
            &g,
            &SolveOptions {
                start: Start::Zeros,
                ..SolveOptions::default()
            },
        )
        .unwrap();
        let diff =
            a.u.values()
                .iter()
                .zip(b.u.values())
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(diff <= 10.0 * a.tol_g.max(b.tol_g), "{diff}");
        assert!(weak_residual(&e, a.u.values()).unwrap() <= a.tol_g / 4.0 * (1.0 + 1e-12));
    }

    #[test]
    fn p_three_solve_stays_in_range() {
        let (d, params) = setup(0.1, 0.6, 3.0);
        let e = Energy::new(&d, params).unwrap();
        let g = d.sample_exterior(|x| if x[0] > 0.0 { 1.0 } else { 0.0 });
        let r = solve_dirichlet(&e, &g, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        assert!(range_bounds_check(&r.u, d.n_interior(), 1e-6).pass);
    }

    #[test]
    fn range_violation_reports_node() {
        let (d, _) = setup(0.25, 0.5, 2.0);
        let mut v = vec![0.5; d.n_nodes()];
        v[d.n_interior()..].iter_mut().for_each(|x| *x = 1.0);
        v[2] = 2.0;
        let u = GridFunction::new(&d, v).unwrap();
        let r = range_bounds_check(&u, d.n_interior(), 1e-9);
        assert!(!r.pass);
        assert_eq!(r.offending, Some((0, 0.5)));
    }
}
