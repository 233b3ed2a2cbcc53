//! Kernel-order functions φ, their logarithmic primitive Φ, and sampled
//! checks of the structural conditions placed on φ.
//!
//! The kernel of the equation is comparable to `φ(|x-y|) / |x-y|^{n+p}`.
//! A [`KernelSpec`] carries the choice of φ together with the declared
//! growth exponent `p`, the scaling indices `s < s̃`, the almost-monotonicity
//! constant `L` and the ellipticity constant `Λ`.

use std::cell::RefCell;
use std::f64::consts::{E, LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_to_infinity, QuadOptions};

/// Surface area of the unit sphere in ℝⁿ for the supported dimensions.
pub fn omega(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiVariant {
    /// `t^{(1-s)p}`, the fractional kernel.
    Power { s: f64 },
    /// `t^{(1-s)p} + t^{(1-s2)p}`.
    Sum { s: f64, s2: f64 },
    /// `min{t^{(1-s)p}, t^{(1-s2)p}}`.
    Min { s: f64, s2: f64 },
    /// `t^{(1-s)p} [log(1 + 1/t)]^γ`.
    LogPerturbedPower { s: f64, gamma: f64 },
    /// `max{(-log t)^{-γ}, t^{(1-s)p}}` below the point where
    /// `φ(t)/t^{(1-s)p}` stops decreasing, continued as a constant multiple
    /// of `t^{(1-s)p}` beyond it.
    LogBorderline { gamma: f64, s: f64 },
    /// Pure logarithmic probe `(-log t)^{-γ}` on `(0, 1/e]`, equal to 1 beyond.
    LogProbe { gamma: f64 },
    /// Samples `(t, φ(t))`, interpolated piecewise linearly in log-log space.
    Tabulated { points: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub phi: PhiVariant,
    pub p: f64,
    pub s: f64,
    pub s_tilde: f64,
    #[serde(rename = "L", default = "unit")]
    pub l: f64,
    #[serde(rename = "Lambda", default = "unit")]
    pub lambda: f64,
    #[serde(rename = "n")]
    pub dim: usize,
}

fn unit() -> f64 {
    1.0
}

impl KernelSpec {
    /// Fractional kernel `φ(t) = t^{(1-s)p}` with `L = Λ = 1` and `s̃ = 1.5`.
    pub fn power(s: f64, p: f64, dim: usize) -> Self {
        Self {
            phi: PhiVariant::Power { s },
            p,
            s,
            s_tilde: 1.5,
            l: 1.0,
            lambda: 1.0,
            dim,
        }
    }

    pub fn with_phi(phi: PhiVariant, p: f64, s: f64, dim: usize) -> Self {
        Self {
            phi,
            p,
            s,
            s_tilde: 1.5,
            l: 1.0,
            lambda: 1.0,
            dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad(format!("p must be > 1, got {}", self.p));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return bad(format!("s must lie in (0,1), got {}", self.s));
        }
        if !(self.s_tilde > self.s && self.s_tilde.is_finite()) {
            return bad(format!("s_tilde must exceed s, got {}", self.s_tilde));
        }
        if !(self.l >= 1.0) || !(self.lambda >= 1.0) {
            return bad("L and Lambda must be >= 1".into());
        }
        if !(self.dim == 1 || self.dim == 2) {
            return bad(format!("dimension must be 1 or 2, got {}", self.dim));
        }
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{name} must lie in (0,1), got {v}")))
            }
        };
        match &self.phi {
            PhiVariant::Power { s } => unit("phi.s", *s),
            PhiVariant::Sum { s, s2 } | PhiVariant::Min { s, s2 } => {
                unit("phi.s", *s)?;
                unit("phi.s2", *s2)?;
                if s2 <= s {
                    return bad("phi.s2 must exceed phi.s".into());
                }
                Ok(())
            }
            PhiVariant::LogPerturbedPower { s, gamma } => {
                unit("phi.s", *s)?;
                if !(*gamma > 0.0) {
                    return bad("gamma must be > 0".into());
                }
                Ok(())
            }
            PhiVariant::LogBorderline { gamma, s } => {
                unit("phi.s", *s)?;
                if !(*gamma > 0.0) {
                    return bad("gamma must be > 0".into());
                }
                Ok(())
            }
            PhiVariant::LogProbe { gamma } => {
                if !(*gamma > 0.0) {
                    return bad("gamma must be > 0".into());
                }
                Ok(())
            }
            PhiVariant::Tabulated { points } => {
                if points.len() < 2 {
                    return bad("tabulated phi needs at least two samples".into());
                }
                for w in points.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return bad("tabulated sample points must be strictly increasing".into());
                    }
                }
                if points.iter().any(|&(t, v)| !(t > 0.0 && v > 0.0 && v.is_finite())) {
                    return bad("tabulated samples must be positive and finite".into());
                }
                Ok(())
            }
        }
    }

    /// `(1-s)p` for the declared lower index.
    pub fn lower_exponent(&self) -> f64 {
        (1.0 - self.s) * self.p
    }

    pub fn upper_exponent(&self) -> f64 {
        (1.0 - self.s_tilde) * self.p
    }

    pub fn omega_n(&self) -> f64 {
        omega(self.dim)
    }

    /// Evaluates φ(t).
    pub fn phi_eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Domain(format!("phi requires finite t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let p = self.p;
        let v = match &self.phi {
            PhiVariant::Power { s } => t.powf((1.0 - s) * p),
            PhiVariant::Sum { s, s2 } => t.powf((1.0 - s) * p) + t.powf((1.0 - s2) * p),
            PhiVariant::Min { s, s2 } => t.powf((1.0 - s) * p).min(t.powf((1.0 - s2) * p)),
            PhiVariant::LogPerturbedPower { s, gamma } => t.powf((1.0 - s) * p) * (1.0 / t).ln_1p().powf(*gamma),
            PhiVariant::LogBorderline { gamma, s } => {
                let a = (1.0 - s) * p;
                let t_c = (-gamma / a).exp();
                let tm = t.min(t_c);
                let ratio = (-tm.ln()).powf(-gamma) / tm.powf(a);
                t.powf(a) * ratio.max(1.0)
            }
            PhiVariant::LogProbe { gamma } => {
                if t <= 1.0 / E {
                    (-t.ln()).powf(-gamma)
                } else {
                    1.0
                }
            }
            PhiVariant::Tabulated { points } => tabulated_eval(points, t)?,
        };
        Ok(v)
    }

    /// φ(e^v), evaluated in the log variable so that very small arguments
    /// neither underflow nor overflow.
    pub fn phi_log(&self, v: f64) -> Result<f64> {
        if v.is_nan() || v == f64::INFINITY {
            return Err(Error::Domain(format!("phi requires finite t >= 0, got ln t = {v}")));
        }
        if v == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        let p = self.p;
        let v = match &self.phi {
            PhiVariant::Power { s } => ((1.0 - s) * p * v).exp(),
            PhiVariant::Sum { s, s2 } => ((1.0 - s) * p * v).exp() + ((1.0 - s2) * p * v).exp(),
            PhiVariant::Min { s, s2 } => ((1.0 - s) * p * v).min((1.0 - s2) * p * v).exp(),
            PhiVariant::LogPerturbedPower { s, gamma } => {
                // ln(1 + 1/t) = -v + ln(1 + t) for t = e^v
                let l = if v < 0.0 { -v + v.exp().ln_1p() } else { (-v).exp().ln_1p() };
                ((1.0 - s) * p * v + gamma * l.ln()).exp()
            }
            PhiVariant::LogBorderline { gamma, s } => {
                let a = (1.0 - s) * p;
                let u = (-v).max(gamma / a);
                (a * v + (a * u - gamma * u.ln()).max(0.0)).exp()
            }
            PhiVariant::LogProbe { gamma } => {
                if v <= -1.0 {
                    (-v).powf(-gamma)
                } else {
                    1.0
                }
            }
            PhiVariant::Tabulated { points } => tabulated_eval(points, v.exp())?,
        };
        Ok(v)
    }

    /// Kernel profile `φ(ρ)/ρ^{n+p}` at distance `rho > 0`.
    pub fn kernel_profile(&self, rho: f64) -> Result<f64> {
        Ok(self.phi_eval(rho)? / rho.powf(self.dim as f64 + self.p))
    }
}

fn tabulated_eval(points: &[(f64, f64)], t: f64) -> Result<f64> {
    let (lo, hi) = (points[0].0, points[points.len() - 1].0);
    if t < lo || t > hi {
        return Err(Error::Range { t, lo, hi });
    }
    let k = points.partition_point(|&(x, _)| x <= t).clamp(1, points.len() - 1);
    let (t0, v0) = points[k - 1];
    let (t1, v1) = points[k];
    let slope = (v1.ln() - v0.ln()) / (t1.ln() - t0.ln());
    Ok(v0 * (t / t0).powf(slope))
}

fn tabulated_slope(points: &[(f64, f64)], k: usize) -> f64 {
    let (t0, v0) = points[k];
    let (t1, v1) = points[k + 1];
    (v1.ln() - v0.ln()) / (t1.ln() - t0.ln())
}

/// Φ of a tabulated kernel: the first segment's power law is continued to 0
/// and each segment is integrated in closed form.
fn tabulated_capital_phi(points: &[(f64, f64)], t: f64) -> Result<f64> {
    let b0 = tabulated_slope(points, 0);
    if b0 <= 0.0 {
        return Err(Error::Divergence(
            "tabulated phi does not vanish at 0 in log-log extrapolation".into(),
        ));
    }
    let (lo, hi) = (points[0].0, points[points.len() - 1].0);
    if t > hi {
        return Err(Error::Range { t, lo, hi });
    }
    let phi_lo = points[0].1;
    if t <= lo {
        return Ok(phi_lo * (t / lo).powf(b0) / b0);
    }
    let mut acc = phi_lo / b0;
    for k in 0..points.len() - 1 {
        let (t0, v0) = points[k];
        let t1 = points[k + 1].0;
        if t0 >= t {
            break;
        }
        let b = tabulated_slope(points, k);
        let upper = t.min(t1);
        let v_up = v0 * (upper / t0).powf(b);
        acc += if b.abs() < 1e-14 {
            v0 * (upper / t0).ln()
        } else {
            (v_up - v0) / b
        };
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiniOptions {
    /// Upper limit of the Dini integral, in `(0, 1]`.
    pub upper: f64,
    /// Number of dyadic shells examined.
    pub shells: usize,
    /// Decay exponent (in `-log t`) above which the shell masses are
    /// declared summable.
    pub exponent_margin: f64,
}

impl Default for DiniOptions {
    fn default() -> Self {
        Self {
            upper: 1.0,
            shells: 50,
            exponent_margin: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiniReport {
    pub pass: bool,
    /// `∫_0^upper φ(t) dt/t` when convergent.
    pub value: Option<f64>,
    /// Sum over the examined shells.
    pub partial_sum: f64,
    /// Fitted algebraic decay exponent of the shell masses in `u = -log t`.
    pub decay_exponent: f64,
    /// Estimated mass beyond the examined shells (infinite when divergent).
    pub tail_estimate: Option<f64>,
}

/// Checks the Dini condition `∫_0^upper φ(t) dt/t < ∞`.
///
/// Shell `k` is `(2^{-k-1}·upper, 2^{-k}·upper]`. In the variable `u = -log t`
/// the shell masses of a Dini kernel decay faster than `u^{-1}`; the decay
/// exponent is fitted between the middle and the last shell.
pub fn check_dini(spec: &KernelSpec, opts: DiniOptions) -> DiniReport {
    let diverged = |partial: f64, q: f64| DiniReport {
        pass: false,
        value: None,
        partial_sum: partial,
        decay_exponent: q,
        tail_estimate: None,
    };
    if !(opts.upper > 0.0 && opts.upper <= 1.0) || opts.shells < 8 {
        return diverged(f64::NAN, f64::NAN);
    }
    let u0 = -opts.upper.ln();
    let q_opts = QuadOptions::with_rel_tol(1e-12);
    let mut shells = Vec::with_capacity(opts.shells);
    for k in 0..opts.shells {
        let a = u0 + k as f64 * LN_2;
        let b = a + LN_2;
        let r = integrate(|u| spec.phi_log(-u).unwrap_or(f64::NAN), a, b, q_opts);
        if !r.value.is_finite() {
            return diverged(f64::INFINITY, f64::NAN);
        }
        shells.push(r.value);
    }
    let partial: f64 = shells.iter().sum();
    let last = opts.shells - 1;
    let mid = opts.shells / 2;
    let (s_mid, s_last) = (shells[mid], shells[last]);
    let u_mid = u0 + (mid as f64 + 0.5) * LN_2;
    let u_last = u0 + (last as f64 + 0.5) * LN_2;
    let q = if s_last <= 0.0 {
        f64::INFINITY
    } else if s_mid <= 0.0 {
        f64::NEG_INFINITY
    } else {
        (s_mid / s_last).ln() / (u_last / u_mid).ln()
    };
    if !(q > 1.0 + opts.exponent_margin) {
        return diverged(partial, q);
    }
    let tail_estimate = if q.is_finite() {
        // ∫_{u_K}^∞ C u^{-q} du with C fitted at the last shell.
        let u_end = u0 + opts.shells as f64 * LN_2;
        s_last / LN_2 * u_last.powf(q) * u_end.powf(1.0 - q) / (q - 1.0)
    } else {
        0.0
    };

    let value = if let PhiVariant::Tabulated { points } = &spec.phi {
        tabulated_capital_phi(points, opts.upper).ok()
    } else {
        let r = integrate_to_infinity(|u| spec.phi_log(-u).unwrap_or(f64::NAN), u0, QuadOptions::with_rel_tol(1e-12));
        (r.converged && r.value.is_finite()).then_some(r.value)
    };
    DiniReport {
        pass: value.is_some(),
        value,
        partial_sum: partial,
        decay_exponent: q,
        tail_estimate: Some(tail_estimate),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingReport {
    #[serde(rename = "L_dec")]
    pub l_dec: f64,
    #[serde(rename = "L_inc")]
    pub l_inc: f64,
    pub pass: bool,
}

/// Smallest constants for which the almost-decreasing and almost-increasing
/// conditions hold over all pairs `t₁ ≤ t₂` of the sample grid.
pub fn check_scaling_bounds(spec: &KernelSpec, t_grid: &[f64], tolerance: f64) -> Result<ScalingReport> {
    if t_grid.len() < 64 {
        return Err(Error::Parameter(format!(
            "scaling check needs >= 64 grid points, got {}",
            t_grid.len()
        )));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid[0] <= 0.0 {
        return Err(Error::Parameter("scaling grid must be positive and increasing".into()));
    }
    let decades = (t_grid[t_grid.len() - 1] / t_grid[0]).log10();
    if decades < 6.0 - 1e-9 {
        return Err(Error::Parameter(format!(
            "scaling grid must span >= 6 decades, spans {decades:.2}"
        )));
    }
    let a = spec.lower_exponent();
    let b = spec.upper_exponent();
    let mut l_dec: f64 = 1.0;
    let mut l_inc: f64 = 1.0;
    let mut min_dec = f64::INFINITY;
    let mut max_inc = 0.0f64;
    for &t in t_grid {
        let v = spec.phi_eval(t)?;
        // work in logs so extreme exponents do not overflow
        let ld = v.ln() - a * t.ln();
        let li = v.ln() - b * t.ln();
        min_dec = min_dec.min(ld);
        l_dec = l_dec.max((ld - min_dec).exp());
        max_inc = if max_inc == 0.0 { li } else { max_inc.max(li) };
        l_inc = l_inc.max((max_inc - li).exp());
    }
    let ceiling = spec.l * (1.0 + tolerance);
    Ok(ScalingReport {
        l_dec,
        l_inc,
        pass: l_dec <= ceiling && l_inc <= ceiling,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelMass {
    pub value: f64,
    pub quadrature_part: f64,
    pub remainder: f64,
    /// `L ω_n/(sp) · φ(r)/r^p`.
    pub bound: f64,
}

/// φ together with its primitive Φ, cached on a log-spaced grid.
#[derive(Debug, Clone)]
pub struct PhiTable {
    spec: KernelSpec,
    analytic: bool,
    grid_t: Vec<f64>,
    grid_cap: Vec<f64>,
}

const GRID_LO: f64 = 1e-12;
const GRID_HI: f64 = 1e12;
const GRID_PER_DECADE: usize = 8;
/// Ratio of the quadrature cutoff to the inner radius in radial integrals.
const RADIAL_CUTOFF_FACTOR: f64 = 1e4;

impl PhiTable {
    pub fn new(spec: &KernelSpec) -> Result<Self> {
        spec.validate()?;
        let analytic = matches!(spec.phi, PhiVariant::Power { .. } | PhiVariant::Tabulated { .. });
        let mut table = Self {
            spec: spec.clone(),
            analytic,
            grid_t: Vec::new(),
            grid_cap: Vec::new(),
        };
        if let PhiVariant::Tabulated { points } = &spec.phi {
            tabulated_capital_phi(points, points[0].0)?;
            return Ok(table);
        }
        if analytic {
            return Ok(table);
        }
        let decades = (GRID_HI / GRID_LO).log10().round() as usize;
        let grid_t = log_grid(GRID_LO, GRID_HI, decades * GRID_PER_DECADE + 1);
        let opts = QuadOptions::with_rel_tol(1e-13);
        let first = integrate_to_infinity(|u| spec.phi_log(-u).unwrap_or(f64::NAN), -GRID_LO.ln(), opts);
        if !first.converged || !first.value.is_finite() {
            return Err(Error::Divergence(format!(
                "Dini integral of {:?} does not converge",
                spec.phi
            )));
        }
        let mut grid_cap = Vec::with_capacity(grid_t.len());
        grid_cap.push(first.value);
        for w in grid_t.windows(2) {
            let r = integrate(|v| spec.phi_log(v).unwrap_or(f64::NAN), w[0].ln(), w[1].ln(), opts);
            if !r.value.is_finite() {
                return Err(Error::Divergence("Phi increment is not finite".into()));
            }
            grid_cap.push(grid_cap[grid_cap.len() - 1] + r.value);
        }
        table.grid_t = grid_t;
        table.grid_cap = grid_cap;
        Ok(table)
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn is_analytic(&self) -> bool {
        self.analytic
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        self.spec.phi_eval(t)
    }

    /// Φ(t) = ∫_0^t φ(τ) dτ/τ.
    pub fn capital_phi(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Domain(format!("Phi requires finite t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        match &self.spec.phi {
            PhiVariant::Power { s } => {
                let a = (1.0 - s) * self.spec.p;
                return Ok(t.powf(a) / a);
            }
            PhiVariant::Tabulated { points } => return tabulated_capital_phi(points, t),
            _ => {}
        }
        let spec = &self.spec;
        let opts = QuadOptions::with_rel_tol(1e-13);
        if t < self.grid_t[0] {
            let r = integrate_to_infinity(|u| spec.phi_log(-u).unwrap_or(f64::NAN), -t.ln(), opts);
            return Ok(r.value);
        }
        let k = self.grid_t.partition_point(|&x| x <= t) - 1;
        let base = self.grid_cap[k];
        let r = integrate(|v| spec.phi_log(v).unwrap_or(f64::NAN), self.grid_t[k].ln(), t.ln(), opts);
        if !r.value.is_finite() {
            return Err(Error::Divergence("Phi increment is not finite".into()));
        }
        Ok(base + r.value)
    }

    /// `∫_a^b φ(ρ) ρ^{-1-p} dρ` for `0 < a ≤ b < ∞`.
    pub fn radial_integral(&self, a: f64, b: f64) -> Result<f64> {
        if !(a > 0.0) || !(b >= a) || !b.is_finite() {
            return Err(Error::Domain(format!(
                "radial integral needs 0 < a <= b < inf, got [{a}, {b}]"
            )));
        }
        if a == b {
            return Ok(0.0);
        }
        let p = self.spec.p;
        if let PhiVariant::Power { s } = self.spec.phi {
            let e = -s * p;
            return Ok((b.powf(e) - a.powf(e)) / e);
        }
        let spec = &self.spec;
        let failure = RefCell::new(None);
        let r = integrate(
            |v| match spec.phi_log(v) {
                Ok(phi) => phi * (-p * v).exp(),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            a.ln(),
            b.ln(),
            QuadOptions::with_rel_tol(1e-12),
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        if !r.converged || !r.value.is_finite() {
            return Err(Error::Divergence(format!("radial integral over [{a}, {b}] did not converge")));
        }
        Ok(r.value)
    }

    /// Upper bound for `∫_R^∞ φ(ρ) ρ^{-1-p} dρ` from the almost-decreasing
    /// majorant `φ(ρ) ≤ L φ(R) (ρ/R)^{(1-s)p}`.
    pub fn radial_remainder_bound(&self, big_r: f64) -> Result<f64> {
        let sp = self.spec.s * self.spec.p;
        Ok(self.spec.l * self.phi(big_r)? * big_r.powf(-self.spec.p) / sp)
    }

    /// `∫_r^∞ φ(ρ) ρ^{-1-p} dρ`: quadrature up to a cutoff plus the majorant
    /// remainder. Returns `(quadrature_part, remainder)`.
    pub fn radial_tail(&self, r: f64) -> Result<(f64, f64)> {
        if let PhiVariant::Power { s } = self.spec.phi {
            return Ok((r.powf(-s * self.spec.p) / (s * self.spec.p), 0.0));
        }
        let mut cutoff = r * RADIAL_CUTOFF_FACTOR;
        if let PhiVariant::Tabulated { points } = &self.spec.phi {
            let hi = points[points.len() - 1].0;
            if r > hi {
                return Err(Error::Range {
                    t: r,
                    lo: points[0].0,
                    hi,
                });
            }
            cutoff = cutoff.min(hi);
        }
        let quad = self.radial_integral(r, cutoff)?;
        let rem = self.radial_remainder_bound(cutoff)?;
        Ok((quad, rem))
    }

    /// `ω_n ∫_r^∞ φ(ρ) ρ^{-p-1} dρ`, the kernel mass outside `B_r(x)`.
    pub fn exterior_kernel_mass(&self, r: f64) -> Result<KernelMass> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("exterior mass needs r > 0, got {r}")));
        }
        let omega = self.spec.omega_n();
        let (quad, rem) = self.radial_tail(r)?;
        let sp = self.spec.s * self.spec.p;
        Ok(KernelMass {
            value: omega * (quad + rem),
            quadrature_part: omega * quad,
            remainder: omega * rem,
            bound: self.spec.l * omega / sp * self.phi(r)? / r.powf(self.spec.p),
        })
    }
}
