//! Measured versions of the regularity inequalities.
//!
//! Each report evaluates the left-hand side and the right-hand side without
//! its unknown constant on a concrete grid function, and records the ratio
//! as the measured constant. Balls are node sets (cell centers inside the
//! open ball); means are plain node averages; sup and inf are nodal.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::DiscreteDomain;
use crate::energy::{fractional_seminorm_p, gagliardo_seminorm_p, local_p_dirichlet_energy, Energy, EnergyParams, Region};
use crate::error::{Error, Result};
use crate::kernel::PhiTable;
use crate::tail::{compute_tail, FarField};

pub const DEFAULT_CEILING: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs_parts: BTreeMap<String, f64>,
    pub measured_constant: f64,
    pub ceiling: f64,
    pub pass: bool,
    pub kernel: String,
    pub metadata: BTreeMap<String, f64>,
}

impl InequalityReport {
    pub fn rhs_total(&self) -> f64 {
        self.rhs_parts.values().sum()
    }
}

/// Grid, kernel, data and far-field model shared by all reports.
#[derive(Debug, Clone, Copy)]
pub struct Setting<'a> {
    pub domain: &'a DiscreteDomain,
    pub table: &'a PhiTable,
    pub values: &'a [f64],
    /// Far-field model of `values` beyond the truncated universe.
    pub far: FarField,
    pub ceiling: f64,
}

impl<'a> Setting<'a> {
    pub fn new(domain: &'a DiscreteDomain, table: &'a PhiTable, values: &'a [f64], far: FarField) -> Result<Self> {
        if values.len() != domain.n_nodes() {
            return Err(Error::Shape("value count does not match the domain".into()));
        }
        if table.spec().dim != domain.dim() {
            return Err(Error::Shape("kernel and domain dimensions differ".into()));
        }
        Ok(Self {
            domain,
            table,
            values,
            far,
            ceiling: DEFAULT_CEILING,
        })
    }

    pub fn with_ceiling(mut self, ceiling: f64) -> Self {
        self.ceiling = ceiling;
        self
    }

    fn p(&self) -> f64 {
        self.table.spec().p
    }

    fn n(&self) -> f64 {
        self.domain.dim() as f64
    }

    fn ball(&self, x0: [f64; 2], r: f64) -> Result<Vec<usize>> {
        let nodes = self.domain.nodes_in_ball(x0, r);
        if nodes.is_empty() {
            return Err(Error::Resolution(format!("ball of radius {r} contains no grid nodes")));
        }
        Ok(nodes)
    }

    fn metadata(&self, extra: &[(&str, f64)]) -> BTreeMap<String, f64> {
        let spec = self.table.spec();
        let mut m = BTreeMap::new();
        m.insert("s".into(), spec.s);
        m.insert("p".into(), spec.p);
        m.insert("h".into(), self.domain.h());
        m.insert("n".into(), self.n());
        for (k, v) in extra {
            m.insert((*k).into(), *v);
        }
        m
    }

    fn report(
        &self,
        name: &str,
        lhs: f64,
        parts: Vec<(&str, f64)>,
        constant: f64,
        extra: &[(&str, f64)],
    ) -> Result<InequalityReport> {
        let rhs_parts: BTreeMap<String, f64> = parts.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        if !lhs.is_finite() || rhs_parts.values().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("{name}: non-finite inequality side")));
        }
        let vacuous = lhs <= 0.0;
        let measured_constant = if vacuous { 0.0 } else { constant };
        Ok(InequalityReport {
            name: name.to_string(),
            lhs,
            rhs_parts,
            measured_constant,
            ceiling: self.ceiling,
            pass: vacuous || measured_constant <= self.ceiling,
            kernel: format!("{:?}", self.table.spec().phi),
            metadata: self.metadata(extra),
        })
    }

    fn mean_over(&self, nodes: &[usize], f: impl Fn(f64) -> f64) -> f64 {
        nodes.iter().map(|&i| f(self.values[i])).sum::<f64>() / nodes.len() as f64
    }

    fn integral_over(&self, nodes: &[usize], f: impl Fn(f64) -> f64) -> f64 {
        nodes.iter().map(|&i| f(self.values[i])).sum::<f64>() * self.domain.cell_measure()
    }

    /// Tail of `op(u)` with the far-field model transformed the same way.
    fn tail_of(&self, op: impl Fn(f64) -> f64 + Copy, x0: [f64; 2], r: f64) -> Result<f64> {
        let mapped: Vec<f64> = self.values.iter().map(|&v| op(v)).collect();
        let far = self.far.map_constant(op);
        Ok(compute_tail(self.table, self.domain, &mapped, &far, x0, r)?.value)
    }

    fn seminorm(&self, values: &[f64], nodes: &[usize]) -> Result<f64> {
        gagliardo_seminorm_p(values, self.domain, nodes, self.table.spec())
    }

    /// `(r^p/Φ(r) · Φ(R)/R^p)^{1/(p-1)} Tail(u_-; x₀, R)`.
    fn harnack_tail_term(&self, x0: [f64; 2], r: f64, big_r: f64) -> Result<f64> {
        let p = self.p();
        let scale = r.powf(p) / self.table.capital_phi(r)? * self.table.capital_phi(big_r)? / big_r.powf(p);
        let tail = self.tail_of(|v| (-v).max(0.0), x0, big_r)?;
        Ok(scale.powf(1.0 / (p - 1.0)) * tail)
    }

    fn require_nonnegative(&self, x0: [f64; 2], big_r: f64) -> Result<Vec<usize>> {
        let nodes = self.ball(x0, big_r)?;
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-10 * (1.0 + scale);
        if let Some(&i) = nodes.iter().find(|&&i| self.values[i] < -tol) {
            return Err(Error::Precondition(format!(
                "u = {} < 0 at node {i} inside B_R",
                self.values[i]
            )));
        }
        Ok(nodes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Exponent {
    /// `p*_s` when `sp < n`, otherwise `p̃ = 2p`.
    #[default]
    Auto,
    /// A fixed `p̃ > p`, used with the `sp ≥ n` form.
    Tilde { value: f64 },
}

/// Sobolev–Poincaré inequality on `B_r(x₀)`.
pub fn sobolev_poincare_report(set: &Setting, x0: [f64; 2], r: f64, exponent: Exponent) -> Result<InequalityReport> {
    let spec = set.table.spec();
    let (n, p, s) = (set.n(), spec.p, spec.s);
    let sp = s * p;
    let (q, factor) = match exponent {
        Exponent::Auto if sp < n => (n * p / (n - sp), 1.0 / (s.powf(p) * (n - sp).powf(p - 1.0))),
        Exponent::Auto => (2.0 * p, tilde_factor(2.0 * p, p)),
        Exponent::Tilde { value } => {
            if !(value > p) {
                return Err(Error::Parameter(format!("exponent {value} must exceed p = {p}")));
            }
            (value, tilde_factor(value, p))
        }
    };
    let ball = set.ball(x0, r)?;
    let mean = set.mean_over(&ball, |v| v);
    let lhs = set.mean_over(&ball, |v| (v - mean).abs().powf(q)).powf(p / q);
    let measure = ball.len() as f64 * set.domain.cell_measure();
    let energy = set.seminorm(set.values, &ball)? / measure;
    let rhs = factor * r.powf(p) / set.table.capital_phi(r)? * energy;
    set.report(
        "sobolev_poincare",
        lhs,
        vec![("energy", rhs)],
        lhs / rhs,
        &[("r", r), ("exponent", q), ("x0", x0[0])],
    )
}

fn tilde_factor(pt: f64, p: f64) -> f64 {
    pt.powf(2.0 * p - 1.0) / (pt - p).powf(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

/// Caccioppoli inequality for `w_± = (u - k)_±` with `ρ < r`.
pub fn caccioppoli_report(set: &Setting, x0: [f64; 2], k: f64, sign: Sign, rho: f64, r: f64) -> Result<InequalityReport> {
    if !(rho > 0.0 && rho < r) {
        return Err(Error::Parameter(format!("need 0 < rho < r, got rho = {rho}, r = {r}")));
    }
    let spec = set.table.spec();
    let (n, p) = (set.n(), spec.p);
    let op = move |v: f64| match sign {
        Sign::Plus => (v - k).max(0.0),
        Sign::Minus => (k - v).max(0.0),
    };
    let w: Vec<f64> = set.values.iter().map(|&v| op(v)).collect();
    let inner = set.ball(x0, rho)?;
    let outer = set.ball(x0, r)?;
    let lhs = set.seminorm(&w, &inner)?;
    let cap = set.table.capital_phi(r)?;
    let energy = cap / (r - rho).powf(p) * outer.iter().map(|&i| w[i].powf(p)).sum::<f64>() * set.domain.cell_measure();
    let tail = set.tail_of(op, x0, r)?;
    let tail_term = (r / (r - rho)).powf(n + spec.s_tilde * p) * cap / r.powf(p)
        * tail.powf(p - 1.0)
        * outer.iter().map(|&i| w[i]).sum::<f64>()
        * set.domain.cell_measure();
    let name = match sign {
        Sign::Plus => "caccioppoli_plus",
        Sign::Minus => "caccioppoli_minus",
    };
    set.report(
        name,
        lhs,
        vec![("energy", energy), ("tail", tail_term)],
        lhs / (energy + tail_term),
        &[("k", k), ("rho", rho), ("r", r)],
    )
}

/// Logarithmic estimate for a nonnegative (super)solution on `B_R`.
pub fn log_estimate_report(set: &Setting, x0: [f64; 2], d: f64, r: f64, big_r: f64) -> Result<InequalityReport> {
    if !(d > 0.0) {
        return Err(Error::Parameter(format!("d must be > 0, got {d}")));
    }
    check_radii(r, big_r)?;
    set.require_nonnegative(x0, big_r)?;
    let (n, p) = (set.n(), set.p());
    let ball = set.ball(x0, r)?;
    let logs: Vec<f64> = set.values.iter().map(|&v| (v.max(0.0) + d).ln()).collect();
    let lhs = set.seminorm(&logs, &ball)?;
    let base = r.powf(n - p) * set.table.capital_phi(r)?;
    let ht = set.harnack_tail_term(x0, r, big_r)?;
    let tail = base * d.powf(1.0 - p) * ht.powf(p - 1.0);
    set.report(
        "log_estimate",
        lhs,
        vec![("base", base), ("tail", tail)],
        lhs / (base + tail),
        &[("d", d), ("r", r), ("R", big_r)],
    )
}

/// Oscillation of `v = min{(log(a+d) - log(u+d))_+, log b}` on `B_r`.
pub fn log_oscillation_report(
    set: &Setting,
    x0: [f64; 2],
    a: f64,
    b: f64,
    d: f64,
    r: f64,
    big_r: f64,
) -> Result<InequalityReport> {
    if !(a > 0.0 && d > 0.0 && b > 1.0) {
        return Err(Error::Parameter("need a, d > 0 and b > 1".into()));
    }
    check_radii(r, big_r)?;
    set.require_nonnegative(x0, big_r)?;
    let p = set.p();
    let ball = set.ball(x0, r)?;
    let v = |u: f64| ((a + d).ln() - (u.max(0.0) + d).ln()).max(0.0).min(b.ln());
    let mean = set.mean_over(&ball, v);
    let lhs = set.mean_over(&ball, |u| (v(u) - mean).abs().powf(p));
    let ht = set.harnack_tail_term(x0, r, big_r)?;
    let tail = d.powf(1.0 - p) * ht.powf(p - 1.0);
    set.report(
        "log_oscillation",
        lhs,
        vec![("base", 1.0), ("tail", tail)],
        lhs / (1.0 + tail),
        &[("a", a), ("b", b), ("d", d), ("r", r), ("R", big_r)],
    )
}

fn check_radii(r: f64, big_r: f64) -> Result<()> {
    if !(r > 0.0 && r <= 0.5 * big_r * (1.0 + 1e-12)) {
        return Err(Error::Parameter(format!("need 0 < r <= R/2, got r = {r}, R = {big_r}")));
    }
    Ok(())
}

/// Local boundedness: `sup_{B_{r/2}} u` against the mean and tail terms.
/// The measured `c_b` is `(lhs - tail term)_+ / mean term`.
pub fn local_boundedness_report(set: &Setting, x0: [f64; 2], r: f64, eps: f64) -> Result<InequalityReport> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    let spec = set.table.spec();
    let (n, p, s) = (set.n(), spec.p, spec.s);
    let half = set.ball(x0, 0.5 * r)?;
    let ball = set.ball(x0, r)?;
    let lhs = half.iter().map(|&i| set.values[i]).fold(f64::NEG_INFINITY, f64::max);
    let mean = set.mean_over(&ball, |v| v.max(0.0).powf(p)).powf(1.0 / p);
    let mean_term = eps.powf(-n * (p - 1.0) / (s * p * p)) * mean;
    let tail_term = eps * set.tail_of(|v| v.max(0.0), x0, 0.5 * r)?;
    let excess = (lhs - tail_term).max(0.0);
    let c_b = if excess == 0.0 { 0.0 } else { excess / mean_term };
    set.report(
        "local_boundedness",
        lhs,
        vec![("mean", mean_term), ("tail", tail_term)],
        c_b,
        &[("r", r), ("epsilon", eps)],
    )
}

/// Harnack inequality on `B_r ⊂ B_R` for `u ≥ 0` in `B_R`; the measured
/// constant is `sup / (inf + tail term)`.
pub fn harnack_report(set: &Setting, x0: [f64; 2], r: f64, big_r: f64) -> Result<InequalityReport> {
    check_radii(r, big_r)?;
    set.require_nonnegative(x0, big_r)?;
    let ball = set.ball(x0, r)?;
    let sup = ball.iter().map(|&i| set.values[i]).fold(f64::NEG_INFINITY, f64::max);
    let inf = ball.iter().map(|&i| set.values[i]).fold(f64::INFINITY, f64::min).max(0.0);
    let tail = set.harnack_tail_term(x0, r, big_r)?;
    set.report(
        "harnack",
        sup,
        vec![("inf", inf), ("tail", tail)],
        sup / (inf + tail),
        &[("r", r), ("R", big_r)],
    )
}

/// Critical exponent `t̄`, infinite when `sp ≥ n`.
pub fn weak_harnack_exponent(n: f64, p: f64, s: f64) -> f64 {
    if s * p < n {
        n * (p - 1.0) / (n - s * p)
    } else {
        f64::INFINITY
    }
}

/// Weak Harnack inequality with a `t`-mean over `B_{r/2}`.
pub fn weak_harnack_report(set: &Setting, x0: [f64; 2], r: f64, big_r: f64, t: f64) -> Result<InequalityReport> {
    let spec = set.table.spec();
    let t_bar = weak_harnack_exponent(set.n(), spec.p, spec.s);
    if !(t > 0.0 && t < t_bar) {
        return Err(Error::Parameter(format!("t must lie in (0, {t_bar}), got {t}")));
    }
    check_radii(r, big_r)?;
    set.require_nonnegative(x0, big_r)?;
    let half = set.ball(x0, 0.5 * r)?;
    let ball = set.ball(x0, r)?;
    let lhs = set.mean_over(&half, |v| v.max(0.0).powf(t)).powf(1.0 / t);
    let inf = ball.iter().map(|&i| set.values[i]).fold(f64::INFINITY, f64::min).max(0.0);
    let tail = set.harnack_tail_term(x0, r, big_r)?;
    set.report(
        "weak_harnack",
        lhs,
        vec![("inf", inf), ("tail", tail)],
        lhs / (inf + tail),
        &[("r", r), ("R", big_r), ("t", t), ("t_bar", t_bar)],
    )
}

/// Result of a dyadic oscillation fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    /// Fitted exponent; infinite when the oscillation vanishes at all radii.
    pub alpha_hat: f64,
    pub degenerate: bool,
    pub c_hat: f64,
    pub radii: Vec<f64>,
    pub osc: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl HolderFit {
    pub fn status(&self) -> &'static str {
        if self.degenerate {
            "degenerate: unbounded"
        } else {
            "fitted"
        }
    }
}

/// Least-squares slope of `log osc_{B_ρ}` against `log ρ` over
/// `ρ_k = r 2^{-k}`, using radii with `ρ ≥ min_radius` (at least `4h`).
/// Sup and inf are over nodes in the closed ball.
pub fn holder_exponent_fit(domain: &DiscreteDomain, u: &[f64], x0: [f64; 2], r: f64, min_radius: f64) -> Result<HolderFit> {
    if u.len() != domain.n_nodes() {
        return Err(Error::Shape("value count does not match the domain".into()));
    }
    let floor = min_radius.max(4.0 * domain.h());
    let mut radii = Vec::new();
    let mut rho = r;
    while rho >= floor * (1.0 - 1e-12) {
        radii.push(rho);
        rho *= 0.5;
    }
    if radii.len() < 5 {
        return Err(Error::Resolution(format!(
            "only {} dyadic radii resolvable (need 5) at h = {}",
            radii.len(),
            domain.h()
        )));
    }
    let osc: Vec<f64> = radii
        .iter()
        .map(|&rho| {
            let closed = rho * (1.0 + 1e-9);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (i, x) in domain.coords().iter().enumerate() {
                if (x[0] - x0[0]).powi(2) + (x[1] - x0[1]).powi(2) <= closed * closed {
                    lo = lo.min(u[i]);
                    hi = hi.max(u[i]);
                }
            }
            hi - lo
        })
        .collect();
    let scale = osc.iter().fold(0.0f64, |m, v| m.max(*v));
    if osc.iter().all(|&o| o <= 1e-14 * (1.0 + scale)) {
        return Ok(HolderFit {
            alpha_hat: f64::INFINITY,
            degenerate: true,
            c_hat: 0.0,
            residuals: vec![0.0; radii.len()],
            radii,
            osc,
        });
    }
    if osc.iter().any(|&o| o <= 0.0) {
        return Err(Error::Resolution("oscillation vanishes at some but not all radii".into()));
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = osc.iter().map(|o| o.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + alpha * x)).collect();
    let c_hat = radii
        .iter()
        .zip(&osc)
        .map(|(rho, o)| o / (rho / r).powf(alpha))
        .fold(0.0f64, f64::max);
    Ok(HolderFit {
        alpha_hat: alpha,
        degenerate: false,
        c_hat,
        radii,
        osc,
        residuals,
    })
}

/// The three embedding comparisons on a ball `B_r(x₀)` (items i, iii) and
/// on the whole domain Ω (item ii, `f` supported in Ω).
pub fn embedding_report(set: &Setting, x0: [f64; 2], r: f64) -> Result<Vec<InequalityReport>> {
    let spec = set.table.spec();
    let p = spec.p;
    let d = set.domain;
    let ball = set.ball(x0, r)?;
    let region = Region::Ball { center: x0, radius: r };

    let lhs_i = set.seminorm(set.values, &ball)?;
    let rhs_i = set.table.capital_phi(2.0 * r)? * local_p_dirichlet_energy(set.values, d, p, &region)?;
    let first = set.report("embedding_i", lhs_i, vec![("gradient", rhs_i)], lhs_i / rhs_i, &[("r", r)])?;

    let big_r = d.shape().diameter();
    let omega: Vec<usize> = (0..d.n_interior()).collect();
    let energy = Energy::new(
        d,
        EnergyParams::new(spec.clone(), 0.0).or_else(|_| EnergyParams::with_default_reg(spec.clone(), 1.0))?,
    )?;
    let lhs_ii = energy.value(set.values)?;
    let grad_ii = set.table.capital_phi(big_r)? * local_p_dirichlet_energy(set.values, d, p, &Region::All)?;
    let mass_ii = set.table.phi(big_r)? / big_r.powf(p) * set.integral_over(&omega, |v| v.abs().powf(p));
    let second = set.report(
        "embedding_ii",
        lhs_ii,
        vec![("gradient", grad_ii), ("mass", mass_ii)],
        lhs_ii / (grad_ii + mass_ii),
        &[("R", big_r)],
    )?;

    let lhs_iii = fractional_seminorm_p(set.values, d, &omega, spec.s, p)?;
    let rhs_iii = spec.l * big_r.powf(spec.lower_exponent()) / set.table.phi(big_r)? * set.seminorm(set.values, &omega)?;
    let third = set.report(
        "embedding_iii",
        lhs_iii,
        vec![("phi_seminorm", rhs_iii)],
        lhs_iii / rhs_iii,
        &[("R", big_r)],
    )?;
    Ok(vec![first, second, third])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Shape;
    use crate::kernel::KernelSpec;

    fn grid() -> (DiscreteDomain, PhiTable) {
        let d = DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), 0.05, 4.0).unwrap();
        (d, PhiTable::new(&KernelSpec::power(0.5, 2.0, 1)).unwrap())
    }

    #[test]
    fn constant_data_reports() {
        let (d, table) = grid();
        let ones = vec![1.0; d.n_nodes()];
        let set = Setting::new(&d, &table, &ones, FarField::Constant { value: 1.0 }).unwrap();
        let sp = sobolev_poincare_report(&set, [0.0, 0.0], 0.8, Exponent::Auto).unwrap();
        assert!(sp.pass && sp.lhs == 0.0);
        let h = harnack_report(&set, [0.0, 0.0], 0.4, 0.8).unwrap();
        assert_eq!(h.measured_constant, 1.0);
        assert_eq!(h.rhs_parts["tail"], 0.0);
        let w = weak_harnack_report(&set, [0.0, 0.0], 0.4, 0.8, 0.7).unwrap();
        assert!((w.measured_constant - 1.0).abs() < 1e-15);
        let c = caccioppoli_report(&set, [0.0, 0.0], 1.0, Sign::Plus, 0.4, 0.8).unwrap();
        assert!(c.pass && c.lhs == 0.0 && c.rhs_total() == 0.0);
        let l = log_estimate_report(&set, [0.0, 0.0], 0.1, 0.4, 0.8).unwrap();
        assert_eq!(l.lhs, 0.0);
        let b = local_boundedness_report(&set, [0.0, 0.0], 0.8, 1.0).unwrap();
        assert_eq!(b.lhs, 1.0);
        assert!((b.rhs_parts["mean"] - 1.0).abs() < 1e-15);
        assert!(b.pass);
        for rep in embedding_report(&set, [0.0, 0.0], 0.8).unwrap() {
            assert_eq!(rep.lhs, 0.0);
        }
    }

    #[test]
    fn nonpositive_data_is_vacuous() {
        let (d, table) = grid();
        let neg = vec![-2.0; d.n_nodes()];
        let set = Setting::new(&d, &table, &neg, FarField::Constant { value: -2.0 }).unwrap();
        let b = local_boundedness_report(&set, [0.0, 0.0], 0.8, 0.5).unwrap();
        assert!(b.pass && b.lhs <= 0.0);
        assert!(matches!(
            harnack_report(&set, [0.0, 0.0], 0.4, 0.8),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn parameter_errors() {
        let (d, table) = grid();
        let f: Vec<f64> = d.coords().iter().map(|x| x[0]).collect();
        let set = Setting::new(&d, &table, &f, FarField::Zero).unwrap();
        assert!(matches!(
            sobolev_poincare_report(&set, [0.0, 0.0], 0.8, Exponent::Tilde { value: 1.5 }),
            Err(Error::Parameter(_))
        ));
        assert!(caccioppoli_report(&set, [0.0, 0.0], 0.0, Sign::Plus, 0.8, 0.8).is_err());
        let pos: Vec<f64> = f.iter().map(|v| v + 5.0).collect();
        let set = Setting::new(&d, &table, &pos, FarField::Constant { value: 5.0 }).unwrap();
        assert!(log_estimate_report(&set, [0.0, 0.0], 0.0, 0.4, 0.8).is_err());
        let spec = KernelSpec::power(0.3, 2.0, 1);
        let t2 = PhiTable::new(&spec).unwrap();
        let set = Setting::new(&d, &t2, &pos, FarField::Constant { value: 5.0 }).unwrap();
        // t̄ = 1/(1 - 0.6) = 2.5
        assert!(weak_harnack_report(&set, [0.0, 0.0], 0.4, 0.8, 2.5).is_err());
        assert!(weak_harnack_report(&set, [0.0, 0.0], 0.4, 0.8, 2.4).is_ok());
    }

    #[test]
    fn affine_and_constant_holder_fits() {
        let d = DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), 0.01, 3.0).unwrap();
        let f: Vec<f64> = d.coords().iter().map(|x| 2.0 * x[0] + 1.0).collect();
        let fit = holder_exponent_fit(&d, &f, [0.0, 0.0], 0.8, 0.0).unwrap();
        assert!((fit.alpha_hat - 1.0).abs() < 1e-9, "{fit:?}");
        let c = vec![4.0; d.n_nodes()];
        let fit = holder_exponent_fit(&d, &c, [0.0, 0.0], 0.8, 0.0).unwrap();
        assert!(fit.degenerate && fit.alpha_hat.is_infinite());
        assert_eq!(fit.status(), "degenerate: unbounded");
        let coarse = DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), 0.1, 3.0).unwrap();
        let f: Vec<f64> = coarse.coords().iter().map(|x| x[0]).collect();
        assert!(matches!(
            holder_exponent_fit(&coarse, &f, [0.0, 0.0], 0.8, 0.0),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn embedding_iii_is_exact_for_power_kernels() {
        let (d, table) = grid();
        let f: Vec<f64> = d.coords().iter().map(|x| (3.0 * x[0]).sin()).collect();
        let set = Setting::new(&d, &table, &f, FarField::Zero).unwrap();
        let reps = embedding_report(&set, [0.0, 0.0], 0.5).unwrap();
        assert!((reps[2].measured_constant - 1.0).abs() < 1e-12);
        assert!(reps.iter().all(|r| r.pass && r.measured_constant.is_finite()));
    }
}
