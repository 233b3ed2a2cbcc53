//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nonlocal_core::energy::{Energy, EnergyParams};
use nonlocal_core::kernel::{check_dini, log_grid, DiniOptions};
use nonlocal_core::profiles::{bump, bump_derivative_1d, RandomSmooth};
use nonlocal_core::solver::{solve_dirichlet, weak_residual, SolveOptions, SolveResult, Start};
use nonlocal_core::stability::{bbm_energy_curve, Profile1d, DEFAULT_S_LIST};
use nonlocal_core::tail::{compute_tail, FarField};
use nonlocal_core::verify::{harnack_report, holder_exponent_fit, sobolev_poincare_report, Exponent, Setting, DEFAULT_CEILING};
use nonlocal_core::{DiscreteDomain, KernelSpec, PhiTable, PhiVariant, Shape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, format!("{what} took {elapsed:?}, limit {limit:?}"))
}

fn domain_1d(h: f64, r_trunc: f64) -> DiscreteDomain {
    DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), h, r_trunc).unwrap()
}

fn solve(d: &DiscreteDomain, spec: &KernelSpec, g: impl Fn(f64) -> f64, start: Start) -> SolveResult {
    let e = Energy::new(d, EnergyParams::with_default_reg(spec.clone(), 1.0).unwrap()).unwrap();
    let gv = d.sample_exterior(|x| g(x[0]));
    solve_dirichlet(
        &e,
        &gv,
        &SolveOptions {
            start,
            record_trace: false,
            ..SolveOptions::default()
        },
    )
    .unwrap()
}

fn capital_phi_oracle() -> Outcome {
    let clock = Instant::now();
    let mut worst: f64 = 0.0;
    for s in [0.3, 0.5, 0.75, 0.9] {
        for p in [1.5, 2.0, 3.0] {
            let table = PhiTable::new(&KernelSpec::power(s, p, 1)).map_err(|e| e.to_string())?;
            let a = (1.0 - s) * p;
            for t in log_grid(1e-3, 1e3, 61) {
                let exact = t.powf(a) / a;
                let got = table.capital_phi(t).map_err(|e| e.to_string())?;
                worst = worst.max((got - exact).abs() / exact);
            }
        }
    }
    let elapsed = clock.elapsed();
    ensure(worst <= 1e-10, format!("max relative error {worst:e}"))?;
    within(elapsed, Duration::from_secs(1), "Phi sweep")?;
    Ok(format!("max rel err {worst:.2e} in {elapsed:.2?}"))
}

fn dini_classifier() -> Outcome {
    let clock = Instant::now();
    let opts = DiniOptions {
        upper: (-1.0f64).exp(),
        ..DiniOptions::default()
    };
    let probe = |gamma: f64| check_dini(&KernelSpec::with_phi(PhiVariant::LogProbe { gamma }, 2.0, 0.5, 1), opts);
    let conv = probe(2.0);
    let div = probe(1.0);
    let elapsed = clock.elapsed();
    let value = conv.value.ok_or("gamma = 2 reported divergent")?;
    // ∫_0^{1/e} (-log t)^{-2} dt/t = ∫_1^∞ u^{-2} du = 1
    ensure((value - 1.0).abs() <= 1e-6, format!("gamma = 2 value {value}"))?;
    ensure(conv.pass && !div.pass, format!("classification {} / {}", conv.pass, div.pass))?;
    within(elapsed, Duration::from_secs(1), "Dini checks")?;
    Ok(format!("gamma=2 value {value:.9}, gamma=1 divergent, {elapsed:.2?}"))
}

fn kernel_mass() -> Outcome {
    let table = PhiTable::new(&KernelSpec::power(0.5, 2.0, 1)).map_err(|e| e.to_string())?;
    let m = table.exterior_kernel_mass(1.0).map_err(|e| e.to_string())?;
    // ∫_{|y|>1} |y|^{-2} dy = 2
    let rel = (m.value - 2.0).abs() / 2.0;
    ensure(rel <= 5e-3, format!("mass {} vs 2", m.value))?;

    let tabulated: Vec<(f64, f64)> = log_grid(1e-6, 1e6, 97).into_iter().map(|t| (t, t.powf(0.8))).collect();
    let zoo = [
        KernelSpec::power(0.5, 2.0, 1),
        KernelSpec::power(0.3, 3.0, 2),
        KernelSpec::with_phi(PhiVariant::Sum { s: 0.3, s2: 0.7 }, 2.0, 0.3, 1),
        KernelSpec::with_phi(PhiVariant::Min { s: 0.3, s2: 0.7 }, 2.0, 0.3, 1),
        KernelSpec::with_phi(PhiVariant::LogPerturbedPower { s: 0.5, gamma: 1.0 }, 2.0, 0.5, 1),
        KernelSpec::with_phi(PhiVariant::LogBorderline { gamma: 2.0, s: 0.5 }, 2.0, 0.5, 1),
        KernelSpec::with_phi(PhiVariant::Tabulated { points: tabulated }, 2.0, 0.6, 1),
    ];
    let mut worst: f64 = 0.0;
    for spec in &zoo {
        let table = PhiTable::new(spec).map_err(|e| format!("{:?}: {e}", spec.phi))?;
        let sp = spec.s * spec.p;
        for r in log_grid(1e-2, 1e2, 9) {
            let mass = table.exterior_kernel_mass(r).map_err(|e| e.to_string())?.value;
            let reference = spec.omega_n() / sp * table.phi(r).map_err(|e| e.to_string())? / r.powf(spec.p);
            let measured_l = mass / reference;
            ensure(
                measured_l <= 1.01,
                format!("{:?} at r = {r}: measured L {measured_l}", spec.phi),
            )?;
            worst = worst.max(measured_l);
        }
    }
    Ok(format!(
        "mass {:.6} (rel {rel:.1e}), max measured L {worst:.4} over {} kernels",
        m.value,
        zoo.len()
    ))
}

fn gradient_check() -> Outcome {
    let clock = Instant::now();
    let d = domain_1d(0.05, 2.2);
    ensure(d.n_nodes() <= 100, format!("{} nodes", d.n_nodes()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut summary = Vec::new();
    for (p, eps, limit) in [(2.0, 0.0, 1e-6), (1.5, 1e-2, 1e-4), (3.0, 1e-2, 1e-4)] {
        let e = Energy::new(&d, EnergyParams::new(KernelSpec::power(0.5, p, 1), eps).unwrap()).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let w: Vec<f64> = (0..d.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let grad = e.gradient(&w).unwrap();
            let step = 1e-6;
            let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            for i in 0..d.n_interior() {
                let mut plus = w.clone();
                let mut minus = w.clone();
                plus[i] += step;
                minus[i] -= step;
                let fd = (e.value(&plus).unwrap() - e.value(&minus).unwrap()) / (2.0 * step);
                worst = worst.max((fd - grad[i]).abs() / scale);
            }
        }
        ensure(worst <= limit, format!("p = {p}: relative error {worst:e} > {limit:e}"))?;
        summary.push(format!("p={p}: {worst:.1e}"));
    }
    within(clock.elapsed(), Duration::from_secs(10), "gradient check")?;
    Ok(format!(
        "{} ({} nodes, {:.2?})",
        summary.join(", "),
        d.n_nodes(),
        clock.elapsed()
    ))
}

fn solver_correctness() -> Outcome {
    let clock = Instant::now();
    let spec = KernelSpec::power(0.5, 2.0, 1);
    let d = domain_1d(0.05, 4.0);
    let c = solve(&d, &spec, |_| 2.5, Start::Zeros);
    let dev = c.u.values().iter().fold(0.0f64, |m, v| m.max((v - 2.5).abs()));
    ensure(c.converged && dev <= c.tol_g, format!("constant data deviates by {dev:e}"))?;

    let mut ratios = Vec::new();
    for h in [0.05, 0.025] {
        let d = domain_1d(h, 4.0);
        let e = Energy::new(&d, EnergyParams::with_default_reg(spec.clone(), 1.0).unwrap()).unwrap();
        let sol = solve(&d, &spec, |x| x, Start::NearestExterior);
        ensure(sol.converged, format!("affine solve at h = {h} did not converge"))?;
        let solved = weak_residual(&e, sol.u.values()).unwrap();
        ensure(solved <= sol.tol_g, format!("solution residual {solved:e} above tolerance"))?;
        let affine: Vec<f64> = d.coords().iter().map(|x| x[0]).collect();
        ratios.push(weak_residual(&e, &affine).unwrap() / h);
    }
    let drift = (ratios[0] - ratios[1]).abs() / ratios[1];
    ensure(drift <= 0.1, format!("C(h) = {ratios:?} drifts by {drift:.3}"))?;

    let g = |x: f64| (2.0 * x).sin() + 0.5 * x;
    let a = solve(&d, &spec, g, Start::NearestExterior);
    let b = solve(&d, &spec, g, Start::Zeros);
    let diff =
        a.u.values()
            .iter()
            .zip(b.u.values())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let tol = a.tol_g.max(b.tol_g);
    ensure(diff <= 10.0 * tol, format!("two starts differ by {diff:e}, tol_g {tol:e}"))?;
    within(clock.elapsed(), Duration::from_secs(60), "solver checks")?;
    Ok(format!(
        "C(0.05) = {:.4}, C(0.025) = {:.4}, start diff {:.1e} <= {:.1e}, {:.2?}",
        ratios[0],
        ratios[1],
        diff,
        10.0 * tol,
        clock.elapsed()
    ))
}

fn tail_oracle() -> Outcome {
    let d = domain_1d(0.05, 4.0);
    let ones = vec![1.0; d.n_nodes()];
    let far = FarField::Constant { value: 1.0 };
    let tail = |s: f64, r: f64| -> Result<f64, String> {
        let table = PhiTable::new(&KernelSpec::power(s, 2.0, 1)).map_err(|e| e.to_string())?;
        Ok(compute_tail(&table, &d, &ones, &far, [0.0, 0.0], r)
            .map_err(|e| e.to_string())?
            .value)
    };
    let mut worst: f64 = 0.0;
    for s in [0.25, 0.5, 0.75] {
        for r in [0.5, 1.0, 2.0] {
            let exact = 2.0 * (1.0 - s) / s;
            worst = worst.max((tail(s, r)? - exact).abs() / exact);
        }
    }
    ensure(worst <= 0.01, format!("relative error {worst:e}"))?;
    let sweep = [0.25, 0.5, 0.75, 0.9, 0.99, 0.999];
    let values: Vec<f64> = sweep.iter().map(|&s| tail(s, 1.0)).collect::<Result<_, _>>()?;
    ensure(values.windows(2).all(|w| w[1] < w[0]), format!("not decreasing: {values:?}"))?;
    let last = values[values.len() - 1];
    ensure(last < 0.01, format!("Tail at s = 0.999 is {last}"))?;
    Ok(format!(
        "max rel err {worst:.1e}; Tail(1; 0, 1) from {:.3} down to {last:.2e}",
        values[0]
    ))
}

fn sobolev_poincare() -> Outcome {
    let clock = Instant::now();
    let d = domain_1d(0.02, 4.0);
    let sweep = [0.5, 0.6, 0.7, 0.8, 0.9, 0.95];
    let tables: Vec<PhiTable> = sweep
        .iter()
        .map(|&s| PhiTable::new(&KernelSpec::power(s, 2.0, 1)).unwrap())
        .collect();
    let mut worst_spread: f64 = 0.0;
    let mut largest: f64 = 0.0;
    for seed in 0..10 {
        let f = RandomSmooth::new(seed, 4, 2.0);
        let values: Vec<f64> = d.coords().iter().map(|&x| f.eval(x)).collect();
        let mut constants = Vec::new();
        for table in &tables {
            let set = Setting::new(&d, table, &values, FarField::Zero)
                .unwrap()
                .with_ceiling(DEFAULT_CEILING);
            let rep = sobolev_poincare_report(&set, [0.0, 0.0], 1.0, Exponent::Auto).map_err(|e| e.to_string())?;
            ensure(
                rep.pass,
                format!("seed {seed}, s = {}: constant {}", table.spec().s, rep.measured_constant),
            )?;
            ensure(rep.measured_constant > 0.0, format!("seed {seed}: vacuous report"))?;
            constants.push(rep.measured_constant);
        }
        let max = constants.iter().cloned().fold(0.0, f64::max);
        let min = constants.iter().cloned().fold(f64::INFINITY, f64::min);
        worst_spread = worst_spread.max(max / min);
        largest = largest.max(max);
    }
    ensure(worst_spread < 20.0, format!("max/min spread {worst_spread:.2}"))?;
    within(clock.elapsed(), Duration::from_secs(300), "Sobolev-Poincare sweep")?;
    Ok(format!(
        "10 functions x {} s, ceiling {DEFAULT_CEILING:e}, largest constant {largest:.3e}, worst max/min {worst_spread:.2}, {:.2?}",
        sweep.len(),
        clock.elapsed()
    ))
}

fn harnack_sanity() -> Outcome {
    let spec = KernelSpec::power(0.5, 2.0, 1);
    let table = PhiTable::new(&spec).unwrap();
    let d = domain_1d(0.05, 4.0);
    let ones = vec![1.0; d.n_nodes()];
    let set = Setting::new(&d, &table, &ones, FarField::Constant { value: 1.0 }).unwrap();
    let unit = harnack_report(&set, [0.0, 0.0], 0.4, 0.8).map_err(|e| e.to_string())?;
    ensure(
        unit.measured_constant == 1.0,
        format!("u = 1 gives {}", unit.measured_constant),
    )?;

    let mut constants = Vec::new();
    for h in [0.02, 0.01] {
        let d = domain_1d(h, 4.0);
        let sol = solve(&d, &spec, |x| 1.0 + (x * x).min(4.0), Start::NearestExterior);
        ensure(sol.converged, format!("solve at h = {h} did not converge"))?;
        let set = Setting::new(&d, &table, sol.u.values(), FarField::Constant { value: 5.0 }).unwrap();
        let c = harnack_report(&set, [0.0, 0.0], 0.4, 0.8)
            .map_err(|e| e.to_string())?
            .measured_constant;
        ensure(c.is_finite() && c > 0.0, format!("h = {h}: constant {c}"))?;
        constants.push(c);
    }
    let drift = (constants[0] - constants[1]).abs() / constants[1];
    ensure(drift <= 0.1, format!("drift {drift:.3}"))?;
    Ok(format!(
        "u=1 -> 1; c(0.02) = {:.4}, c(0.01) = {:.4}, drift {:.2}%",
        constants[0],
        constants[1],
        100.0 * drift
    ))
}

fn holder_fit() -> Outcome {
    let spec = KernelSpec::power(0.5, 2.0, 1);
    let d = domain_1d(0.01, 4.0);
    let affine = solve(&d, &spec, |x| x, Start::NearestExterior);
    let fit = holder_exponent_fit(&d, affine.u.values(), [0.0, 0.0], 0.8, 0.0).map_err(|e| e.to_string())?;
    ensure(
        (0.95..=1.05).contains(&fit.alpha_hat),
        format!("affine alpha {}", fit.alpha_hat),
    )?;

    let step = |x: f64| if x > 0.0 { 1.0 } else { 0.0 };
    let mut alphas = Vec::new();
    for h in [0.01, 0.005] {
        let d = domain_1d(h, 4.0);
        let sol = solve(&d, &spec, step, Start::NearestExterior);
        ensure(sol.converged, format!("step solve at h = {h} did not converge"))?;
        let f = holder_exponent_fit(&d, sol.u.values(), [1.0, 0.0], 1.0, 0.0625).map_err(|e| e.to_string())?;
        ensure(
            f.alpha_hat > 0.0 && f.alpha_hat <= 1.0,
            format!("rough alpha {} at h = {h}", f.alpha_hat),
        )?;
        alphas.push(f.alpha_hat);
    }
    let drift = (alphas[0] - alphas[1]).abs() / alphas[1];
    ensure(drift <= 0.1, format!("rough alpha drift {drift:.3}"))?;
    Ok(format!(
        "affine alpha {:.4}; rough alpha {:.4} (h=0.01), {:.4} (h=0.005), drift {:.2}%",
        fit.alpha_hat,
        alphas[0],
        alphas[1],
        100.0 * drift
    ))
}

/// Normalized p = 2 energy of the unit bump along the power family, from
/// its Fourier transform: with `D(ρ) = (1/π) ∫ |f̂|² (1 - cos ρξ) dξ` and
/// `∫_0^∞ (1 - cos t) t^{-1-α} dt = -Γ(-α) cos(πα/2)`,
/// `E(s) = (4 / (π Φ(r))) C(2s) ∫_0^∞ f̂(ξ)² ξ^{2s} dξ`.
struct FourierOracle {
    xi: Vec<f64>,
    weights: Vec<f64>,
    spectrum: Vec<f64>,
}

impl FourierOracle {
    fn new() -> Self {
        // the bump is flat to all orders at ±1, so the trapezoid rule is
        // spectrally accurate for its cosine transform
        let nx = 4000;
        let dx = 2.0 / nx as f64;
        let xs: Vec<f64> = (0..=nx).map(|k| -1.0 + k as f64 * dx).collect();
        let fx: Vec<f64> = xs.iter().map(|&x| bump([x, 0.0], [0.0, 0.0], 1.0)).collect();
        let (xi_max, m) = (400.0, 8000);
        let dxi = xi_max / m as f64;
        let xi: Vec<f64> = (0..=m).map(|k| k as f64 * dxi).collect();
        let weights = (0..=m)
            .map(|k| {
                let w = if k == 0 || k == m {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * dxi / 3.0
            })
            .collect();
        let spectrum = xi
            .iter()
            .map(|&z| xs.iter().zip(&fx).map(|(x, f)| f * (z * x).cos()).sum::<f64>() * dx)
            .collect();
        Self { xi, weights, spectrum }
    }

    fn energy(&self, s: f64, r: f64) -> f64 {
        let alpha = 2.0 * s;
        let c = -statrs::function::gamma::gamma(-alpha) * (PI * alpha / 2.0).cos();
        let a = 2.0 * (1.0 - s);
        let cap = r.powf(a) / a;
        let moment: f64 = self
            .xi
            .iter()
            .zip(&self.weights)
            .zip(&self.spectrum)
            .map(|((z, w), f)| w * f * f * z.powf(alpha))
            .sum();
        4.0 / (PI * cap) * c * moment
    }

    /// Quadratic Richardson extrapolation to `s = 1` from three close values.
    fn limit(&self, r: f64) -> f64 {
        let ds = [4e-3, 2e-3, 1e-3];
        let e: Vec<f64> = ds.iter().map(|&d| self.energy(1.0 - d, r)).collect();
        let first = [2.0 * e[1] - e[0], 2.0 * e[2] - e[1]];
        (4.0 * first[1] - first[0]) / 3.0
    }
}

fn bbm_limit() -> Outcome {
    let oracle = FourierOracle::new();
    let f = |x: f64| bump([x, 0.0], [0.0, 0.0], 1.0);
    let prof = Profile1d {
        f: &f,
        support: (-1.0, 1.0),
    };
    let grad_sq: f64 = {
        let n = 20000;
        let dx = 2.0 / n as f64;
        (0..=n)
            .map(|k| bump_derivative_1d(-1.0 + k as f64 * dx, 0.0, 1.0).powi(2))
            .sum::<f64>()
            * dx
    };
    let mut lines = Vec::new();
    let mut limits = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        let reference = oracle.limit(r);
        let curve = bbm_energy_curve(&prof, 2.0, r, &DEFAULT_S_LIST).map_err(|e| e.to_string())?;
        let rel = (curve.extrapolated_limit - reference).abs() / reference;
        ensure(
            rel <= 0.02,
            format!("r = {r}: limit {} vs oracle {reference}", curve.extrapolated_limit),
        )?;
        limits.push(curve.extrapolated_limit);
        lines.push(format!("r={r}: {:.5} vs {reference:.5}", curve.extrapolated_limit));
    }
    for w in limits.windows(2) {
        let rel = (w[0] - w[1]).abs() / w[1];
        ensure(rel <= 0.02, format!("limits at r and 2r differ by {rel:.4}"))?;
    }
    Ok(format!("{}; 2|f'|^2 = {:.5}", lines.join(", "), 2.0 * grad_sq))
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_nonlocal-lab");
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/acceptance.json");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (tag, threads) in [("a", "1"), ("b", "3")] {
        let out = dir.path().join(tag);
        let status = Command::new(exe)
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(["--threads", threads])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(
            status.status.code() == Some(0),
            format!("run {tag} exited with {:?}", status.status.code()),
        )?;
        outputs.push(out);
    }
    let mut csv: Vec<String> = std::fs::read_dir(&outputs[0])
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .filter(|n| n.ends_with(".csv"))
        .collect();
    csv.sort();
    ensure(csv.len() >= 3, format!("only {} CSV files", csv.len()))?;
    for name in &csv {
        let a = std::fs::read(outputs[0].join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(outputs[1].join(name)).map_err(|e| format!("{name}: {e}"))?;
        ensure(a == b, format!("{name} differs between runs"))?;
    }
    Ok(format!(
        "{} CSV files byte-identical across two runs (1 and 3 threads)",
        csv.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("capital Phi oracle", capital_phi_oracle),
        ("Dini classifier", dini_classifier),
        ("kernel mass", kernel_mass),
        ("gradient check", gradient_check),
        ("solver correctness", solver_correctness),
        ("tail oracle", tail_oracle),
        ("Sobolev-Poincare s-uniformity", sobolev_poincare),
        ("Harnack sanity", harnack_sanity),
        ("Holder fit", holder_fit),
        ("BBM limit", bbm_limit),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
