//! Behaviour as `s ↗ 1`: normalized energies approaching the local
//! p-Dirichlet energy, and nonlocal solutions approaching the local
//! p-harmonic one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{DiscreteDomain, Shape};
use crate::energy::{Energy, EnergyParams};
use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, PhiTable};
use crate::quad::{integrate, QuadOptions};
use crate::solver::{solve_dirichlet, SolveOptions};
use crate::tail::{compute_tail, FarField};

pub const DEFAULT_S_LIST: [f64; 5] = [0.5, 0.7, 0.9, 0.95, 0.99];

/// `∫_{S^{n-1}} |σ·e|^p dσ`.
pub fn sphere_moment(n: usize, p: f64) -> f64 {
    match n {
        1 => 2.0,
        _ => {
            4.0 * integrate(
                |t: f64| t.cos().powf(p),
                0.0,
                std::f64::consts::FRAC_PI_2,
                QuadOptions::default(),
            )
            .value
        }
    }
}

/// A smooth 1D profile with support in `[lo, hi]`.
pub struct Profile1d<'a> {
    pub f: &'a (dyn Fn(f64) -> f64 + Sync),
    pub support: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BbmPoint {
    pub s: f64,
    pub normalized_energy: f64,
    /// Part from `|x - y| < r`.
    pub near: f64,
    /// Part from `|x - y| ≥ r`.
    pub far: f64,
    /// `((1-s)/s) 2^p L² ω_n r^{-p} ‖f‖_p^p`.
    pub far_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BbmCurve {
    pub r: f64,
    pub p: f64,
    pub points: Vec<BbmPoint>,
    /// `a` in the fit `a + b(1-s)` over the three largest `s`.
    pub extrapolated_limit: f64,
    pub slope: f64,
}

fn difference_mass(profile: &Profile1d, p: f64, rho: f64) -> f64 {
    let (lo, hi) = profile.support;
    let f = profile.f;
    let opts = QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-12,
        max_subdivisions: 2000,
    };
    integrate(|x| (f(x + rho) - f(x)).abs().powf(p), lo - rho, hi, opts).value
}

/// Normalized energy `(1/Φ_s(r)) ∬ |f(x)-f(y)|^p φ_s(|x-y|)/|x-y|^{1+p}`
/// for a 1D profile, written as `(2/Φ(r)) ∫_0^∞ φ(ρ) ρ^{-1-p} D(ρ) dρ` with
/// `D(ρ) = ∫ |f(x+ρ) - f(x)|^p dx`.
pub fn normalized_energy(profile: &Profile1d, table: &PhiTable, r: f64) -> Result<BbmPoint> {
    let spec = table.spec();
    if spec.dim != 1 {
        return Err(Error::Parameter("energy curves are computed in 1D".into()));
    }
    let p = spec.p;
    let (lo, hi) = profile.support;
    let span = hi - lo;
    if !(span > 0.0) || !(r > 0.0) {
        return Err(Error::Parameter("need a nonempty support and r > 0".into()));
    }
    let f = profile.f;
    let norm_p = integrate(|x| f(x).abs().powf(p), lo, hi, QuadOptions::with_rel_tol(1e-12)).value;
    let cap_r = table.capital_phi(r)?;
    let far_bound = (1.0 - spec.s) / spec.s * 2f64.powf(p) * spec.l * spec.l * spec.omega_n() * r.powf(-p) * norm_p;
    if norm_p == 0.0 {
        return Ok(BbmPoint {
            s: spec.s,
            normalized_energy: 0.0,
            near: 0.0,
            far: 0.0,
            far_bound,
        });
    }

    // A(ρ) = D(ρ)/ρ^p is smooth on (0, span] and tends to ∫|f'|^p.
    let rho_min = 1e-4 * span;
    let a_min = difference_mass(profile, p, rho_min) / rho_min.powf(p);
    let integrand = |v: f64| {
        let rho = v.exp();
        let phi = spec.phi_log(v).unwrap_or(f64::NAN);
        phi * difference_mass(profile, p, rho) / rho.powf(p)
    };
    let opts = QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-10,
        max_subdivisions: 400,
    };
    let piece = |a: f64, b: f64| -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let r = integrate(integrand, a.ln(), b.ln(), opts);
        if !r.value.is_finite() {
            return Err(Error::Numeric("difference-profile integral is not finite".into()));
        }
        Ok(r.value)
    };
    let split = r.min(span).max(rho_min);
    let mut near = table.capital_phi(rho_min)? * a_min + piece(rho_min, split)?;
    let mut far = 0.0;
    if r < span {
        far += piece(r, span)?;
    } else {
        near += 2.0 * norm_p * table.radial_integral(span, r)?;
    }
    let (q, rem) = table.radial_tail(r.max(span))?;
    far += 2.0 * norm_p * (q + rem);
    let (near, far) = (2.0 * near / cap_r, 2.0 * far / cap_r);
    Ok(BbmPoint {
        s: spec.s,
        normalized_energy: near + far,
        near,
        far,
        far_bound,
    })
}

/// Normalized energies of `profile` for the power family `φ_s(t) = t^{(1-s)p}`.
pub fn bbm_energy_curve(profile: &Profile1d, p: f64, r: f64, s_list: &[f64]) -> Result<BbmCurve> {
    if s_list.len() < 3 {
        return Err(Error::Parameter("need at least three values of s".into()));
    }
    let points: Vec<BbmPoint> = s_list
        .iter()
        .map(|&s| {
            let table = PhiTable::new(&KernelSpec::power(s, p, 1))?;
            normalized_energy(profile, &table, r)
        })
        .collect::<Result<_>>()?;
    let mut top: Vec<&BbmPoint> = points.iter().collect();
    top.sort_by(|a, b| b.s.total_cmp(&a.s));
    let fit: Vec<(f64, f64)> = top.iter().take(3).map(|q| (1.0 - q.s, q.normalized_energy)).collect();
    let m = fit.len() as f64;
    let mx = fit.iter().map(|q| q.0).sum::<f64>() / m;
    let my = fit.iter().map(|q| q.1).sum::<f64>() / m;
    let sxy: f64 = fit.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
    let sxx: f64 = fit.iter().map(|q| (q.0 - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Ok(BbmCurve {
        r,
        p,
        points,
        extrapolated_limit: my - slope * mx,
        slope,
    })
}

/// How the grid spacing follows `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshRule {
    Fixed {
        h: f64,
    },
    /// `h = clamp((1-s) diam / 4, h_min, h_max)`.
    Refine {
        h_max: f64,
        h_min: f64,
    },
}

impl MeshRule {
    pub fn spacing(&self, s: f64, diam: f64) -> f64 {
        match *self {
            MeshRule::Fixed { h } => h,
            MeshRule::Refine { h_max, h_min } => ((1.0 - s) * diam / 4.0).clamp(h_min, h_max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalLimitRow {
    pub s: f64,
    pub h: f64,
    /// `‖u_s - u_loc‖_{L^p(Ω)}`.
    pub distance: f64,
    /// `Tail(g_+; 0, 1)`.
    pub tail: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalLimitOptions {
    pub p: f64,
    pub r_trunc: f64,
    pub mesh: MeshRule,
    /// Far-field model of `g_+` used for the tail column.
    pub far_positive: FarField,
}

/// Solves on Ω = (-1, 1) for each `s` with the power kernel and compares
/// with the local p-harmonic solution, the affine interpolant of
/// `g(-1), g(1)`.
pub fn local_limit_solution_study<G>(g: G, s_list: &[f64], opts: &LocalLimitOptions) -> Result<Vec<LocalLimitRow>>
where
    G: Fn(f64) -> f64 + Sync,
{
    let (g_left, g_right) = (g(-1.0), g(1.0));
    let local = |x: f64| g_left + (g_right - g_left) * (x + 1.0) / 2.0;
    s_list
        .par_iter()
        .map(|&s| {
            let h = opts.mesh.spacing(s, 2.0);
            let domain = DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), h, opts.r_trunc)?;
            let spec = KernelSpec::power(s, opts.p, 1);
            let table = PhiTable::new(&spec)?;
            let params = EnergyParams::with_default_reg(spec, 1.0)?;
            let energy = Energy::new(&domain, params)?;
            let gv = domain.sample_exterior(|x| g(x[0]));
            let sol = solve_dirichlet(
                &energy,
                &gv,
                &SolveOptions {
                    record_trace: false,
                    ..SolveOptions::default()
                },
            )?;
            let u = sol.u.values();
            let distance = ((0..domain.n_interior())
                .map(|i| (u[i] - local(domain.coord(i)[0])).abs().powf(opts.p))
                .sum::<f64>()
                * h)
                .powf(1.0 / opts.p);
            let positive: Vec<f64> = u.iter().map(|v| v.max(0.0)).collect();
            let tail = compute_tail(&table, &domain, &positive, &opts.far_positive, [0.0, 0.0], 1.0)?.value;
            Ok(LocalLimitRow {
                s,
                h,
                distance,
                tail,
                iterations: sol.iterations,
                converged: sol.converged,
            })
        })
        .collect()
}
