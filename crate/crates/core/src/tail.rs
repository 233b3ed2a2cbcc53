//! Nonlocal tail
//!
//! `Tail(f; x₀, r) = ( r^p/Φ(r) ∫_{ℝⁿ∖B_r(x₀)} |f(y)|^{p-1} φ(|y-x₀|) |y-x₀|^{-n-p} dy )^{1/(p-1)}`.
//!
//! Nodal data are treated as piecewise constant on grid cells. Beyond the
//! cells of the truncated universe `f` is described by a far-field model and
//! integrated along rays from `x₀`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::DiscreteDomain;
use crate::error::{Error, Result};
use crate::kernel::PhiTable;

/// Angular resolution of the far-field ray integral in 2D.
const RAYS_2D: usize = 256;
/// Sub-cell points per axis for 2D cells.
const SUBCELL_2D: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FarField {
    Zero,
    Constant {
        value: f64,
    },
    /// `|f(y)| ≤ a (1 + |y|)^β`.
    Power {
        a: f64,
        beta: f64,
    },
}

impl FarField {
    fn validate(&self, p: f64, sp: f64) -> Result<()> {
        match *self {
            FarField::Zero => Ok(()),
            FarField::Constant { value } if value.is_finite() => Ok(()),
            FarField::Constant { .. } => Err(Error::Parameter("far-field constant must be finite".into())),
            FarField::Power { a, beta } => {
                if !(a >= 0.0) || !beta.is_finite() {
                    return Err(Error::Parameter("far-field bound needs a >= 0 and finite beta".into()));
                }
                if beta * (p - 1.0) >= sp {
                    return Err(Error::Divergence(format!(
                        "far-field growth beta = {beta} with beta(p-1) >= sp = {sp} has an infinite tail"
                    )));
                }
                Ok(())
            }
        }
    }

    /// The model applied to a transformed function, e.g. `(f - k)_+`.
    pub fn map_constant<F: Fn(f64) -> f64>(&self, op: F) -> FarField {
        match *self {
            FarField::Zero => match op(0.0) {
                0.0 => FarField::Zero,
                v => FarField::Constant { value: v },
            },
            FarField::Constant { value } => FarField::Constant { value: op(value) },
            other => other,
        }
    }
}

/// Tail value plus the unrooted parts it was assembled from (both already
/// carry the `r^p/Φ(r)` normalization).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailResult {
    pub value: f64,
    pub quadrature_part: f64,
    pub remainder: f64,
    pub remainder_bound: f64,
}

/// `∫_{ℝⁿ∖B_r(x₀)} |f|^{p-1} K`-type integral split into grid and far parts.
#[derive(Debug, Clone, Copy, PartialEq)]
struct RawTail {
    grid: f64,
    far: f64,
    far_bound: f64,
}

pub fn compute_tail(
    table: &PhiTable,
    domain: &DiscreteDomain,
    f: &[f64],
    far: &FarField,
    x0: [f64; 2],
    r: f64,
) -> Result<TailResult> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Parameter(format!("tail radius must be > 0, got {r}")));
    }
    if f.len() != domain.n_nodes() {
        return Err(Error::Shape("value count does not match the domain".into()));
    }
    let spec = table.spec();
    if spec.dim != domain.dim() {
        return Err(Error::Shape("kernel and domain dimensions differ".into()));
    }
    let p = spec.p;
    far.validate(p, spec.s * p)?;
    let raw = raw_tail(table, domain, f, far, x0, r)?;
    let norm = r.powf(p) / table.capital_phi(r)?;
    let total = norm * (raw.grid + raw.far);
    Ok(TailResult {
        value: total.max(0.0).powf(1.0 / (p - 1.0)),
        quadrature_part: norm * raw.grid,
        remainder: norm * raw.far,
        remainder_bound: norm * raw.far_bound,
    })
}

fn raw_tail(table: &PhiTable, domain: &DiscreteDomain, f: &[f64], far: &FarField, x0: [f64; 2], r: f64) -> Result<RawTail> {
    let p = table.spec().p;
    let weight = |v: f64| v.abs().powf(p - 1.0);
    let h = domain.h();
    let mut grid = 0.0;
    if domain.dim() == 1 {
        let seg = |a: f64, b: f64| -> Result<f64> {
            let a = a.max(r);
            if b > a {
                table.radial_integral(a, b)
            } else {
                Ok(0.0)
            }
        };
        for (j, x) in domain.coords().iter().enumerate() {
            let w = weight(f[j]);
            if w == 0.0 {
                continue;
            }
            let (lo, hi) = (x[0] - 0.5 * h - x0[0], x[0] + 0.5 * h - x0[0]);
            let mut m = 0.0;
            if hi > 0.0 {
                m += seg(lo.max(0.0), hi)?;
            }
            if lo < 0.0 {
                m += seg((-hi).max(0.0), -lo)?;
            }
            grid += w * m;
        }
    } else {
        let k = SUBCELL_2D as f64;
        let sub = h / k;
        let area = sub * sub;
        let spec = table.spec();
        for (j, x) in domain.coords().iter().enumerate() {
            let w = weight(f[j]);
            if w == 0.0 {
                continue;
            }
            let mut m = 0.0;
            for a in 0..SUBCELL_2D {
                for b in 0..SUBCELL_2D {
                    let y0 = x[0] - 0.5 * h + (a as f64 + 0.5) * sub;
                    let y1 = x[1] - 0.5 * h + (b as f64 + 0.5) * sub;
                    let d = ((y0 - x0[0]).powi(2) + (y1 - x0[1]).powi(2)).sqrt();
                    if d >= r {
                        m += spec.kernel_profile(d)? * area;
                    }
                }
            }
            grid += w * m;
        }
    }
    let (far_value, far_bound) = far_part(table, domain, far, x0, r)?;
    Ok(RawTail {
        grid,
        far: far_value,
        far_bound,
    })
}

/// Far-field contribution beyond the grid cells, and a majorant-based bound.
fn far_part(table: &PhiTable, domain: &DiscreteDomain, far: &FarField, x0: [f64; 2], r: f64) -> Result<(f64, f64)> {
    let spec = table.spec();
    let p = spec.p;
    let sp = spec.s * p;
    let h = domain.h();
    let c = domain.center();
    // Every direction from x₀ leaves the covered region after distance ≥ a_min.
    let cover = domain.r_trunc() + 0.5 * h;
    let off = ((x0[0] - c[0]).powi(2) + (x0[1] - c[1]).powi(2)).sqrt();
    let a_min = (cover - off).max(r);
    match *far {
        FarField::Zero => Ok((0.0, 0.0)),
        FarField::Constant { value } => {
            let w = value.abs().powf(p - 1.0);
            if w == 0.0 {
                return Ok((0.0, 0.0));
            }
            let ray = |a: f64| -> Result<f64> {
                let (q, rem) = table.radial_tail(a)?;
                Ok(q + rem)
            };
            let exact = if domain.dim() == 1 {
                let xs = domain.coords().iter().map(|x| x[0]);
                let lo = xs.clone().fold(f64::INFINITY, f64::min) - 0.5 * h;
                let hi = xs.fold(f64::NEG_INFINITY, f64::max) + 0.5 * h;
                ray((hi - x0[0]).max(r))? + ray((x0[0] - lo).max(r))?
            } else {
                let dx = [x0[0] - c[0], x0[1] - c[1]];
                let d2 = dx[0] * dx[0] + dx[1] * dx[1];
                let mut sum = 0.0;
                for k in 0..RAYS_2D {
                    let theta = 2.0 * PI * k as f64 / RAYS_2D as f64;
                    let e = [theta.cos(), theta.sin()];
                    let b = dx[0] * e[0] + dx[1] * e[1];
                    let exit = -b + (b * b - (d2 - cover * cover)).max(0.0).sqrt();
                    sum += ray(exit.max(r))?;
                }
                sum * 2.0 * PI / RAYS_2D as f64
            };
            let bound = spec.omega_n() * spec.l * table.phi(a_min)? * a_min.powf(-p) / sp;
            Ok((w * exact, w * bound))
        }
        FarField::Power { a, beta } => {
            // |f(y)|^{p-1} ≤ a^{p-1} (1 + |x₀| + ρ)^{β(p-1)} along rays, and
            // φ(ρ) ≤ L φ(a_min) (ρ/a_min)^{(1-s)p}.
            let q = beta * (p - 1.0);
            let x0_norm = (x0[0] * x0[0] + x0[1] * x0[1]).sqrt();
            let growth = if q > 0.0 {
                (1.0 + (1.0 + x0_norm) / a_min).powf(q)
            } else {
                1.0
            };
            let lower = (1.0 - spec.s) * p;
            let bound =
                spec.omega_n() * spec.l * a.powf(p - 1.0) * table.phi(a_min)? * a_min.powf(-lower) * growth * a_min.powf(q - sp)
                    / (sp - q);
            Ok((bound, bound))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Shape;
    use crate::kernel::KernelSpec;

    fn setup(s: f64, h: f64, big_r: f64) -> (PhiTable, DiscreteDomain) {
        let table = PhiTable::new(&KernelSpec::power(s, 2.0, 1)).unwrap();
        let d = DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), h, big_r).unwrap();
        (table, d)
    }

    #[test]
    fn zero_outside_ball_gives_zero() {
        let (table, d) = setup(0.5, 0.1, 4.0);
        let f: Vec<f64> = d.coords().iter().map(|x| if x[0].abs() < 0.5 { 3.0 } else { 0.0 }).collect();
        let t = compute_tail(&table, &d, &f, &FarField::Zero, [0.0, 0.0], 0.6).unwrap();
        assert_eq!(t.value, 0.0);
    }

    #[test]
    fn unit_data_matches_closed_form() {
        for s in [0.25, 0.5, 0.75] {
            let (table, d) = setup(s, 0.05, 4.0);
            let ones = vec![1.0; d.n_nodes()];
            for r in [0.5, 1.0] {
                let t = compute_tail(&table, &d, &ones, &FarField::Constant { value: 1.0 }, [0.0, 0.0], r).unwrap();
                let exact = 2.0 * (1.0 - s) / s;
                assert!((t.value - exact).abs() < 1e-9 * exact, "s={s} r={r} {t:?}");
            }
        }
    }

    #[test]
    fn heavy_far_field_is_rejected() {
        let (table, d) = setup(0.5, 0.1, 4.0);
        let ones = vec![1.0; d.n_nodes()];
        let far = FarField::Power { a: 1.0, beta: 1.0 };
        assert!(matches!(
            compute_tail(&table, &d, &ones, &far, [0.0, 0.0], 1.0),
            Err(Error::Divergence(_))
        ));
        let ok = FarField::Power { a: 1.0, beta: 0.5 };
        let t = compute_tail(&table, &d, &ones, &ok, [0.0, 0.0], 1.0).unwrap();
        assert!(t.value.is_finite() && t.remainder_bound > 0.0);
    }

    #[test]
    fn two_dimensional_unit_data() {
        let table = PhiTable::new(&KernelSpec::power(0.5, 2.0, 2)).unwrap();
        let d = DiscreteDomain::build(Shape::ball_2d([0.0, 0.0], 1.0), 0.1, 3.0).unwrap();
        let ones = vec![1.0; d.n_nodes()];
        let t = compute_tail(&table, &d, &ones, &FarField::Constant { value: 1.0 }, [0.2, 0.1], 0.5).unwrap();
        // ω₂ (1-s)/s = 2π for s = 1/2, p = 2
        assert!((t.value - 2.0 * PI).abs() < 0.02 * 2.0 * PI, "{t:?}");
    }
}
