//! Discrete nonlocal energies, Gagliardo-type seminorms and the energy
//! gradient.
//!
//! The energy of `w` is the double sum over ordered node pairs in the
//! interaction set (at least one endpoint in Ω), which is twice the sum over
//! unordered pairs:
//!
//! `F(w) = 2 Σ_{i<j} |w_i - w_j|^p K_ij h^{2n}`.
//!
//! The diagonal is excluded; that is the whole treatment of the kernel
//! singularity.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::DiscreteDomain;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

/// Per-pair coefficient multiplying the kernel; must be symmetric and take
/// values in `[1/Λ, Λ]`.
pub type Multiplier = Arc<dyn Fn([f64; 2], [f64; 2]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub spec: KernelSpec,
    pub epsilon_reg: f64,
}

impl EnergyParams {
    pub fn new(spec: KernelSpec, epsilon_reg: f64) -> Result<Self> {
        spec.validate()?;
        if !(epsilon_reg >= 0.0) || !epsilon_reg.is_finite() {
            return Err(Error::Parameter(format!("epsilon_reg must be >= 0, got {epsilon_reg}")));
        }
        if spec.p < 2.0 && epsilon_reg == 0.0 {
            return Err(Error::Parameter("p < 2 requires epsilon_reg > 0".into()));
        }
        Ok(Self { spec, epsilon_reg })
    }

    /// Default regularization: none for `p ≥ 2`, `1e-8 · scale` otherwise.
    pub fn with_default_reg(spec: KernelSpec, scale: f64) -> Result<Self> {
        let eps = if spec.p < 2.0 { 1e-8 * scale.abs().max(1e-300) } else { 0.0 };
        Self::new(spec, eps)
    }
}

/// `(t² + ε²)^{p/2} - ε^p`, which is `|t|^p` when `ε = 0`.
#[inline]
pub fn rho_eps(t: f64, p: f64, eps: f64) -> f64 {
    if eps == 0.0 {
        if p == 2.0 {
            t * t
        } else {
            t.abs().powf(p)
        }
    } else {
        (t * t + eps * eps).powf(0.5 * p) - eps.powf(p)
    }
}

/// `ρ_ε(t + d) - ρ_ε(t)` without cancelling two large powers.
#[inline]
pub fn rho_eps_difference(t: f64, d: f64, p: f64, eps: f64) -> f64 {
    if d == 0.0 {
        return 0.0;
    }
    let dv = d * (2.0 * t + d);
    if eps == 0.0 && p == 2.0 {
        return dv;
    }
    let u = t * t + eps * eps;
    if u == 0.0 {
        return d.abs().powf(p);
    }
    u.powf(0.5 * p) * (0.5 * p * (dv / u).ln_1p()).exp_m1()
}

/// `(t² + ε²)^{(p-2)/2} t`.
#[inline]
pub fn sigma_eps(t: f64, p: f64, eps: f64) -> f64 {
    if p == 2.0 {
        t
    } else if eps == 0.0 {
        if t == 0.0 {
            0.0
        } else {
            t.abs().powf(p - 2.0) * t
        }
    } else {
        (t * t + eps * eps).powf(0.5 * (p - 2.0)) * t
    }
}

/// Kernel weights `c_ij = m(x_i, x_j) φ(d_ij) d_ij^{-n-p} h^{2n}` for one
/// domain. Weights without a multiplier depend only on the lattice offset
/// and are tabulated once.
pub struct Energy<'a> {
    domain: &'a DiscreteDomain,
    params: EnergyParams,
    span: [i64; 2],
    width: usize,
    table: Vec<f64>,
    multiplier: Option<Vec<Vec<f64>>>,
}

impl std::fmt::Debug for Energy<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Energy")
            .field("params", &self.params)
            .field("nodes", &self.domain.n_nodes())
            .field("multiplier", &self.multiplier.is_some())
            .finish()
    }
}

impl<'a> Energy<'a> {
    pub fn new(domain: &'a DiscreteDomain, params: EnergyParams) -> Result<Self> {
        if params.spec.dim != domain.dim() {
            return Err(Error::Shape(format!(
                "kernel dimension {} does not match domain dimension {}",
                params.spec.dim,
                domain.dim()
            )));
        }
        let mut lo = [i64::MAX; 2];
        let mut hi = [i64::MIN; 2];
        for i in 0..domain.n_nodes() {
            let l = domain.lattice(i);
            for k in 0..2 {
                lo[k] = lo[k].min(l[k]);
                hi[k] = hi[k].max(l[k]);
            }
        }
        let span = [hi[0] - lo[0], hi[1] - lo[1]];
        let width = (2 * span[0] + 1) as usize;
        let rows = (2 * span[1] + 1) as usize;
        let h = domain.h();
        let w2 = domain.cell_measure().powi(2);
        let spec = &params.spec;
        let mut table = vec![0.0; width * rows];
        for b in 0..rows {
            let dj = b as i64 - span[1];
            for a in 0..width {
                let di = a as i64 - span[0];
                if di == 0 && dj == 0 {
                    continue;
                }
                let d = h * ((di * di + dj * dj) as f64).sqrt();
                if d > 2.0 * domain.r_trunc() * (1.0 + 1e-12) {
                    continue;
                }
                table[b * width + a] = spec.kernel_profile(d)? * w2;
            }
        }
        Ok(Self {
            domain,
            params,
            span,
            width,
            table,
            multiplier: None,
        })
    }

    /// Attaches a coefficient `m(x, y)`; it is sampled once per interior row
    /// and checked against `[1/Λ, Λ]` and symmetry.
    pub fn with_multiplier(mut self, m: Multiplier) -> Result<Self> {
        let lambda = self.params.spec.lambda;
        let d = self.domain;
        let n_int = d.n_interior();
        let rows: Vec<Vec<f64>> = (0..n_int)
            .map(|i| {
                (0..d.n_nodes())
                    .map(|j| if i == j { 0.0 } else { m(d.coord(i), d.coord(j)) })
                    .collect()
            })
            .collect();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i == j {
                    continue;
                }
                if !(v >= 1.0 / lambda * (1.0 - 1e-12) && v <= lambda * (1.0 + 1e-12)) {
                    return Err(Error::Parameter(format!(
                        "kernel multiplier {v} at pair ({i}, {j}) outside [1/Lambda, Lambda]"
                    )));
                }
                if j < n_int && (v - rows[j][i]).abs() > 1e-12 * v.abs() {
                    return Err(Error::Parameter(format!("kernel multiplier is not symmetric at ({i}, {j})")));
                }
            }
        }
        self.multiplier = Some(rows);
        Ok(self)
    }

    pub fn domain(&self) -> &DiscreteDomain {
        self.domain
    }

    pub fn params(&self) -> &EnergyParams {
        &self.params
    }

    /// `c_ij` for `i` interior; zero on the diagonal.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.domain.lattice(i), self.domain.lattice(j));
        let col = (b[0] - a[0] + self.span[0]) as usize;
        let row = (b[1] - a[1] + self.span[1]) as usize;
        let base = self.table[row * self.width + col];
        match &self.multiplier {
            Some(m) => base * m[i][j],
            None => base,
        }
    }

    fn check_len(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.domain.n_nodes() {
            return Err(Error::Shape(format!(
                "expected {} nodal values, got {}",
                self.domain.n_nodes(),
                w.len()
            )));
        }
        Ok(())
    }

    /// Regularized energy `2 Σ_{pairs} ρ_ε(w_i - w_j) c_ij`.
    pub fn value(&self, w: &[f64]) -> Result<f64> {
        self.check_len(w)?;
        let (p, eps) = (self.params.spec.p, self.params.epsilon_reg);
        let n = self.domain.n_nodes();
        let rows: Vec<f64> = (0..self.domain.n_interior())
            .into_par_iter()
            .map(|i| {
                let wi = w[i];
                (i + 1..n)
                    .map(|j| rho_eps(wi - w[j], p, eps) * self.weight(i, j))
                    .sum::<f64>()
            })
            .collect();
        Ok(2.0 * rows.iter().sum::<f64>())
    }

    /// `F(a) - F(b)`, summed pairwise from the increments `a - b` so that it
    /// stays accurate when the two energies agree to many digits.
    pub fn difference(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.check_len(a)?;
        self.check_len(b)?;
        let (p, eps) = (self.params.spec.p, self.params.epsilon_reg);
        let n = self.domain.n_nodes();
        let rows: Vec<f64> = (0..self.domain.n_interior())
            .into_par_iter()
            .map(|i| {
                let di = a[i] - b[i];
                (i + 1..n)
                    .map(|j| rho_eps_difference(b[i] - b[j], di - (a[j] - b[j]), p, eps) * self.weight(i, j))
                    .sum::<f64>()
            })
            .collect();
        Ok(2.0 * rows.iter().sum::<f64>())
    }

    /// Partial derivatives with respect to interior values.
    pub fn gradient(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_len(w)?;
        let (p, eps) = (self.params.spec.p, self.params.epsilon_reg);
        let n = self.domain.n_nodes();
        Ok((0..self.domain.n_interior())
            .into_par_iter()
            .map(|i| {
                let wi = w[i];
                let s: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| sigma_eps(wi - w[j], p, eps) * self.weight(i, j))
                    .sum();
                2.0 * p * s
            })
            .collect())
    }

    /// Applies the Hessian of the `p = 2` energy, `4(D - C)`, to an interior
    /// vector (exterior entries taken as zero).
    #[allow(clippy::needless_range_loop)]
    pub fn quadratic_form_apply(&self, v: &[f64]) -> Vec<f64> {
        let n_int = self.domain.n_interior();
        let n = self.domain.n_nodes();
        (0..n_int)
            .into_par_iter()
            .map(|i| {
                let mut diag = 0.0;
                let mut off = 0.0;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let c = self.weight(i, j);
                    diag += c;
                    if j < n_int {
                        off += c * v[j];
                    }
                }
                4.0 * (diag * v[i] - off)
            })
            .collect()
    }
}

/// `2 Σ_{i<j in U} |f_i - f_j|^p k(d_ij) h^{2n}`, the discrete double
/// integral over `U × U` with kernel `k`.
pub fn gagliardo_with<K>(values: &[f64], domain: &DiscreteDomain, nodes: &[usize], p: f64, k: K) -> Result<f64>
where
    K: Fn(f64) -> Result<f64> + Sync,
{
    if values.len() != domain.n_nodes() {
        return Err(Error::Shape("value count does not match the domain".into()));
    }
    let w2 = domain.cell_measure().powi(2);
    let rows: Vec<Result<f64>> = (0..nodes.len())
        .into_par_iter()
        .map(|a| {
            let i = nodes[a];
            let mut s = 0.0;
            for &j in &nodes[a + 1..] {
                let diff = values[i] - values[j];
                if diff == 0.0 {
                    continue;
                }
                s += rho_eps(diff, p, 0.0) * k(domain.distance(i, j))?;
            }
            Ok(s)
        })
        .collect();
    let mut total = 0.0;
    for r in rows {
        total += r?;
    }
    Ok(2.0 * w2 * total)
}

/// `[f]^p_{W^{φ,p}(U)}` on the node set `U`.
pub fn gagliardo_seminorm_p(values: &[f64], domain: &DiscreteDomain, nodes: &[usize], spec: &KernelSpec) -> Result<f64> {
    gagliardo_with(values, domain, nodes, spec.p, |d| spec.kernel_profile(d))
}

/// `[f]^p_{W^{s,p}(U)}`, the fractional seminorm of order `s`.
pub fn fractional_seminorm_p(values: &[f64], domain: &DiscreteDomain, nodes: &[usize], s: f64, p: f64) -> Result<f64> {
    let e = domain.dim() as f64 + s * p;
    gagliardo_with(values, domain, nodes, p, |d| Ok(d.powf(-e)))
}

/// Integration region for the local energy.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    All,
    Ball {
        center: [f64; 2],
        radius: f64,
    },
    /// Closed box; boundary nodes get trapezoid half weights.
    Box {
        lo: [f64; 2],
        hi: [f64; 2],
    },
}

/// `Σ hⁿ w_i |∇_h f(x_i)|^p` with centered differences, one-sided where a
/// neighbor is missing.
pub fn local_p_dirichlet_energy(values: &[f64], domain: &DiscreteDomain, p: f64, region: &Region) -> Result<f64> {
    if values.len() != domain.n_nodes() {
        return Err(Error::Shape("value count does not match the domain".into()));
    }
    let h = domain.h();
    let dim = domain.dim();
    let tol = 1e-9 * h;
    let mut total = 0.0;
    for i in 0..domain.n_nodes() {
        let x = domain.coord(i);
        let weight = match region {
            Region::All => 1.0,
            Region::Ball { center, radius } => {
                let d2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                if d2 < radius * radius {
                    1.0
                } else {
                    0.0
                }
            }
            Region::Box { lo, hi } => {
                let mut w = 1.0;
                for k in 0..dim {
                    if x[k] < lo[k] - tol || x[k] > hi[k] + tol {
                        w = 0.0;
                    } else if (x[k] - lo[k]).abs() <= tol || (x[k] - hi[k]).abs() <= tol {
                        w *= 0.5;
                    }
                }
                w
            }
        };
        if weight == 0.0 {
            continue;
        }
        let l = domain.lattice(i);
        let mut g2 = 0.0;
        for k in 0..dim {
            let mut fwd = l;
            fwd[k] += 1;
            let mut bwd = l;
            bwd[k] -= 1;
            let d = match (domain.node_at(fwd), domain.node_at(bwd)) {
                (Some(a), Some(b)) => (values[a] - values[b]) / (2.0 * h),
                (Some(a), None) => (values[a] - values[i]) / h,
                (None, Some(b)) => (values[i] - values[b]) / h,
                (None, None) => 0.0,
            };
            g2 += d * d;
        }
        total += weight * g2.sqrt().powf(p);
    }
    Ok(total * domain.cell_measure())
}
