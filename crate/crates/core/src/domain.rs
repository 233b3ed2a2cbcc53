//! Uniform Cartesian discretization of Ω and of the truncated exterior.
//!
//! Nodes sit on the lattice `hℤⁿ`; each node stands for the cell of side `h`
//! centered at it. Interior nodes are those whose cell center lies in the
//! open set Ω, exterior nodes cover the rest of the closed ball of radius
//! `R_trunc` around the center of Ω. Interior nodes are numbered first.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack for boundary membership tests on lattice coordinates.
const MEMBERSHIP_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Shape {
    pub fn ball_1d(center: f64, radius: f64) -> Self {
        Shape::Ball {
            center: vec![center],
            radius,
        }
    }

    pub fn ball_2d(center: [f64; 2], radius: f64) -> Self {
        Shape::Ball {
            center: center.to_vec(),
            radius,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Ball { center, .. } => center.len(),
            Shape::Box { lo, .. } => lo.len(),
        }
    }

    pub fn center(&self) -> [f64; 2] {
        let mut c = [0.0; 2];
        match self {
            Shape::Ball { center, .. } => c[..center.len()].copy_from_slice(center),
            Shape::Box { lo, hi } => {
                for k in 0..lo.len() {
                    c[k] = 0.5 * (lo[k] + hi[k]);
                }
            }
        }
        c
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Shape::Ball { radius, .. } => 2.0 * radius,
            Shape::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt(),
        }
    }

    /// Membership in the open set.
    pub fn contains(&self, x: [f64; 2]) -> bool {
        match self {
            Shape::Ball { center, radius } => {
                let d2: f64 = center.iter().enumerate().map(|(k, c)| (x[k] - c).powi(2)).sum();
                d2 < radius * radius * (1.0 - MEMBERSHIP_EPS)
            }
            Shape::Box { lo, hi } => (0..lo.len()).all(|k| {
                let slack = MEMBERSHIP_EPS * (hi[k] - lo[k]);
                x[k] > lo[k] + slack && x[k] < hi[k] - slack
            }),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        if !(n == 1 || n == 2) {
            return Err(Error::Parameter(format!("domain dimension must be 1 or 2, got {n}")));
        }
        match self {
            Shape::Ball { center, radius } => {
                if !(*radius > 0.0) || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Parameter("ball needs a finite center and radius > 0".into()));
                }
            }
            Shape::Box { lo, hi } => {
                if hi.len() != n || lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
                    return Err(Error::Parameter("box needs lo < hi in every coordinate".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainLimits {
    pub max_nodes: usize,
}

impl Default for DomainLimits {
    fn default() -> Self {
        Self { max_nodes: 400_000 }
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteDomain {
    dim: usize,
    h: f64,
    shape: Shape,
    r_trunc: f64,
    coords: Vec<[f64; 2]>,
    lattice: Vec<[i64; 2]>,
    n_interior: usize,
    index: HashMap<[i64; 2], usize>,
}

impl DiscreteDomain {
    pub fn build(shape: Shape, h: f64, r_trunc: f64) -> Result<Self> {
        Self::build_with_limits(shape, h, r_trunc, DomainLimits::default())
    }

    pub fn build_with_limits(shape: Shape, h: f64, r_trunc: f64, limits: DomainLimits) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Parameter(format!("grid spacing must be > 0, got {h}")));
        }
        shape.validate()?;
        let diam = shape.diameter();
        if !(r_trunc > diam) || !r_trunc.is_finite() {
            return Err(Error::Parameter(format!(
                "truncation radius {r_trunc} must exceed diam(Omega) = {diam}"
            )));
        }
        let dim = shape.dim();
        let center = shape.center();
        let kmin: Vec<i64> = (0..dim).map(|k| ((center[k] - r_trunc) / h).floor() as i64).collect();
        let kmax: Vec<i64> = (0..dim).map(|k| ((center[k] + r_trunc) / h).ceil() as i64).collect();
        let estimate: f64 = (0..dim).map(|k| (kmax[k] - kmin[k] + 1) as f64).product();
        let ball_fraction = if dim == 2 { std::f64::consts::PI / 4.0 } else { 1.0 };
        if estimate * ball_fraction > 1.05 * limits.max_nodes as f64 + 16.0 {
            return Err(Error::Capacity {
                nodes: (estimate * ball_fraction) as usize,
                limit: limits.max_nodes,
            });
        }

        let r2 = r_trunc * r_trunc * (1.0 + MEMBERSHIP_EPS);
        let mut interior = Vec::new();
        let mut exterior = Vec::new();
        let (j_lo, j_hi) = if dim == 2 { (kmin[1], kmax[1]) } else { (0, 0) };
        for i in kmin[0]..=kmax[0] {
            for j in j_lo..=j_hi {
                let x = [i as f64 * h, j as f64 * h];
                let d2: f64 = (0..dim).map(|k| (x[k] - center[k]).powi(2)).sum();
                if d2 > r2 {
                    continue;
                }
                if shape.contains(x) {
                    interior.push(([i, j], x));
                } else {
                    exterior.push(([i, j], x));
                }
            }
        }
        let total = interior.len() + exterior.len();
        if total > limits.max_nodes {
            return Err(Error::Capacity {
                nodes: total,
                limit: limits.max_nodes,
            });
        }
        if interior.is_empty() {
            return Err(Error::Parameter("grid spacing too coarse: no interior nodes".into()));
        }
        let n_interior = interior.len();
        let mut coords = Vec::with_capacity(total);
        let mut lattice = Vec::with_capacity(total);
        let mut index = HashMap::with_capacity(total);
        for (idx, (l, x)) in interior.into_iter().chain(exterior).enumerate() {
            coords.push(x);
            lattice.push(l);
            index.insert(l, idx);
        }
        Ok(Self {
            dim,
            h,
            shape,
            r_trunc,
            coords,
            lattice,
            n_interior,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn r_trunc(&self) -> f64 {
        self.r_trunc
    }

    pub fn center(&self) -> [f64; 2] {
        self.shape.center()
    }

    /// `hⁿ`.
    pub fn cell_measure(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_exterior(&self) -> usize {
        self.coords.len() - self.n_interior
    }

    pub fn is_interior(&self, i: usize) -> bool {
        i < self.n_interior
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> [f64; 2] {
        self.coords[i]
    }

    pub fn lattice(&self, i: usize) -> [i64; 2] {
        self.lattice[i]
    }

    pub fn node_at(&self, l: [i64; 2]) -> Option<usize> {
        self.index.get(&l).copied()
    }

    pub fn exterior_coords(&self) -> &[[f64; 2]] {
        &self.coords[self.n_interior..]
    }

    /// True when the truncation radius is at least four diameters of Ω.
    pub fn is_well_truncated(&self) -> bool {
        self.r_trunc >= 4.0 * self.shape.diameter()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.coords[i], self.coords[j]);
        let dx = a[0] - b[0];
        let dy = a[1] - b[1];
        (dx * dx + dy * dy).sqrt()
    }

    /// Nodes whose center lies in the open ball `B_r(x0)`.
    pub fn nodes_in_ball(&self, x0: [f64; 2], r: f64) -> Vec<usize> {
        let r2 = r * r * (1.0 - MEMBERSHIP_EPS);
        (0..self.coords.len())
            .filter(|&i| {
                let x = self.coords[i];
                (x[0] - x0[0]).powi(2) + (x[1] - x0[1]).powi(2) < r2
            })
            .collect()
    }

    /// Each unordered pair with at least one interior endpoint, once, with
    /// weight `h^{2n}`.
    pub fn interaction_pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let w = self.cell_measure().powi(2);
        let total = self.coords.len();
        (0..self.n_interior).flat_map(move |i| (i + 1..total).map(move |j| (i, j, w)))
    }

    /// Index of the nearest exterior node to each interior node; ties go to
    /// the lowest index.
    pub fn nearest_exterior(&self) -> Vec<usize> {
        (0..self.n_interior)
            .map(|i| {
                let mut best = (f64::INFINITY, self.n_interior);
                for j in self.n_interior..self.coords.len() {
                    let d = self.distance(i, j);
                    if d < best.0 {
                        best = (d, j);
                    }
                }
                best.1
            })
            .collect()
    }

    /// Builds the admissible function with exterior slots fixed to `g` and
    /// interior slots copied from the nearest exterior node.
    pub fn impose_exterior_data(&self, g: &[f64]) -> Result<GridFunction> {
        if g.len() != self.n_exterior() {
            return Err(Error::Shape(format!(
                "exterior data has {} values, domain has {} exterior nodes",
                g.len(),
                self.n_exterior()
            )));
        }
        if let Some(k) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("exterior value {k} is not finite")));
        }
        let mut values = vec![0.0; self.n_nodes()];
        values[self.n_interior..].copy_from_slice(g);
        for (i, j) in self.nearest_exterior().into_iter().enumerate() {
            values[i] = values[j];
        }
        Ok(GridFunction { values })
    }

    /// Samples `f` at the exterior nodes.
    pub fn sample_exterior<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Vec<f64> {
        self.exterior_coords().iter().map(|&x| f(x)).collect()
    }
}

/// Nodal values on interior ∪ exterior nodes, in domain order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: &DiscreteDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.n_nodes() {
            return Err(Error::Shape(format!(
                "grid function has {} values, domain has {} nodes",
                values.len(),
                domain.n_nodes()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("value at node {k} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn from_fn<F: Fn([f64; 2]) -> f64>(domain: &DiscreteDomain, f: F) -> Result<Self> {
        Self::new(domain, domain.coords().iter().map(|&x| f(x)).collect())
    }

    pub fn constant(domain: &DiscreteDomain, c: f64) -> Result<Self> {
        Self::new(domain, vec![c; domain.n_nodes()])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Writes `x[,y],value` rows.
    pub fn write_csv<W: Write>(&self, domain: &DiscreteDomain, mut out: W) -> std::io::Result<()> {
        if domain.dim() == 1 {
            writeln!(out, "x,value")?;
        } else {
            writeln!(out, "x,y,value")?;
        }
        for (x, v) in domain.coords().iter().zip(&self.values) {
            if domain.dim() == 1 {
                writeln!(out, "{},{}", x[0], v)?;
            } else {
                writeln!(out, "{},{},{}", x[0], x[1], v)?;
            }
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for GridFunction {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_ball_counts() {
        let d = DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), 0.1, 8.0).unwrap();
        assert_eq!(d.n_interior(), 19);
        assert_eq!(d.n_nodes(), 161);
        let ext = d.exterior_coords();
        let lo = ext.iter().map(|x| x[0]).fold(f64::INFINITY, f64::min);
        let hi = ext.iter().map(|x| x[0]).fold(f64::NEG_INFINITY, f64::max);
        assert!((lo + 8.0).abs() < 1e-12 && (hi - 8.0).abs() < 1e-12);
        assert!(ext.iter().all(|x| x[0].abs() >= 1.0 - 1e-12));
    }

    #[test]
    fn two_dimensional_disk_count_matches_brute_force() {
        let d = DiscreteDomain::build(Shape::ball_2d([0.0, 0.0], 1.0), 0.25, 4.0).unwrap();
        // open unit disk: lattice points (i/4, j/4) with i² + j² < 16
        let mut brute = 0;
        for i in -4i64..=4 {
            for j in -4i64..=4 {
                if i * i + j * j < 16 {
                    brute += 1;
                }
            }
        }
        assert_eq!(brute, 45);
        assert_eq!(d.n_interior(), brute);
    }

    #[test]
    fn bad_parameters() {
        assert!(matches!(
            DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), 0.0, 8.0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), -0.1, 8.0),
            Err(Error::Parameter(_))
        ));
        assert!(DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), 0.1, 1.5).is_err());
        let limits = DomainLimits { max_nodes: 100 };
        assert!(matches!(
            DiscreteDomain::build_with_limits(Shape::ball_1d(0.0, 1.0), 0.01, 8.0, limits),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn pair_count_excludes_exterior_pairs_and_diagonal() {
        // Ω = (-1, 1) with h = 0.75: interior {-0.75, 0, 0.75}; R = 2.2 adds ±1.5.
        let d = DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), 0.75, 2.2).unwrap();
        assert_eq!(d.n_interior(), 3);
        assert_eq!(d.n_exterior(), 2);
        let pairs: Vec<_> = d.interaction_pairs().collect();
        // C(5,2) = 10 minus the single exterior-exterior pair
        assert_eq!(pairs.len(), 9);
        assert!(pairs.iter().all(|&(i, j, _)| i != j));
        let mut seen = std::collections::HashSet::new();
        for &(i, j, _) in &pairs {
            assert!(seen.insert((i.min(j), i.max(j))));
        }
    }

    #[test]
    fn pair_weight_sum_on_subset() {
        let d = DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), 0.1, 8.0).unwrap();
        let set: std::collections::HashSet<usize> = d.nodes_in_ball([0.3, 0.0], 0.45).into_iter().collect();
        let w: f64 = d
            .interaction_pairs()
            .filter(|(i, j, _)| set.contains(i) && set.contains(j))
            .map(|(_, _, w)| w)
            .sum();
        let m = set.len() as f64;
        let expected = d.h().powi(2) * (m * m - m) / 2.0;
        assert!((w - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn pair_stream_is_reflection_invariant() {
        let d = DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), 0.2, 3.0).unwrap();
        let key = |i: usize, j: usize, flip: bool| {
            let s = if flip { -1 } else { 1 };
            let (a, b) = (s * d.lattice(i)[0], s * d.lattice(j)[0]);
            (a.min(b), a.max(b))
        };
        let mut plain: Vec<_> = d.interaction_pairs().map(|(i, j, _)| key(i, j, false)).collect();
        let mut mirrored: Vec<_> = d.interaction_pairs().map(|(i, j, _)| key(i, j, true)).collect();
        plain.sort();
        mirrored.sort();
        assert_eq!(plain, mirrored);
    }

    #[test]
    fn refinement_scales_pair_count() {
        let count = |h: f64| {
            let d = DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), h, 4.0).unwrap();
            let inside = |i: usize| d.coord(i)[0].abs() < 0.5;
            d.interaction_pairs().filter(|&(i, j, _)| inside(i) && inside(j)).count() as f64
        };
        let ratio = count(0.01) / count(0.02);
        assert!((ratio - 4.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn exterior_data_examples() {
        let d = DiscreteDomain::build(Shape::ball_1d(0.0, 1.0), 0.1, 8.0).unwrap();
        let u = d.impose_exterior_data(&vec![3.0; d.n_exterior()]).unwrap();
        assert!(u.values().iter().all(|&v| v == 3.0));

        let g = d.sample_exterior(|x| x[0]);
        let u = d.impose_exterior_data(&g).unwrap();
        for j in d.n_interior()..d.n_nodes() {
            assert_eq!(u[j], d.coord(j)[0]);
        }
        // nearest exterior copies the boundary values ±1
        assert_eq!(u[d.node_at([9, 0]).unwrap()], 1.0);

        let mut bad = g.clone();
        bad[3] = f64::NAN;
        assert!(matches!(d.impose_exterior_data(&bad), Err(Error::Shape(_))));
        assert!(matches!(d.impose_exterior_data(&g[1..]), Err(Error::Shape(_))));
    }
}
