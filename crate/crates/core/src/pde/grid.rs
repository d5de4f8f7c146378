//! Domain grids for the Dirichlet solvers.
//!
//! Rectangles use the classical 9-point central-difference Hessian.
//! Ball domains truncate stencil arms at the circle (unequal-arm
//! second differences along the axes and both diagonals); every
//! stencil used here is exact on quadratic polynomials, so problems
//! with quadratic solutions are reproduced to solver tolerance even on
//! curved boundaries. The cross derivative comes from the two diagonal
//! second differences: f_xy = (D₊ − D₋)/4 with D_± the second
//! derivative along (1, ±1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMat2;

/// Domain descriptor (n = 1 or 2; a 1D "ball" is just an interval, use
/// `Rect`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainShape {
    Rect { min: Vec<f64>, max: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl DomainShape {
    pub fn dim(&self) -> usize {
        match self {
            DomainShape::Rect { min, .. } => min.len(),
            DomainShape::Ball { center, .. } => center.len(),
        }
    }

    /// Characteristic length used to scale the convexity floor.
    pub fn scale(&self) -> f64 {
        match self {
            DomainShape::Rect { min, max } => min
                .iter()
                .zip(max.iter())
                .map(|(a, b)| b - a)
                .fold(0.0f64, f64::max),
            DomainShape::Ball { radius, .. } => 2.0 * radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Exterior,
    /// Grid node carrying fixed Dirichlet data (rectangle rim).
    Boundary,
    Interior,
}

/// One arm of a second-difference stencil: either a grid node at unit
/// parameter distance or a fixed boundary value at distance θ ∈ (0,1].
#[derive(Debug, Clone, Copy)]
pub enum Arm {
    Node { flat: usize },
    Fixed { value: f64, theta: f64 },
}

impl Arm {
    fn theta(&self) -> f64 {
        match self {
            Arm::Node { .. } => 1.0,
            Arm::Fixed { theta, .. } => *theta,
        }
    }
}

/// Unequal-arm pair along one line through a node.
#[derive(Debug, Clone, Copy)]
pub struct ArmPair {
    pub plus: Arm,
    pub minus: Arm,
}

/// Stencil arms for one interior node: axes and (in 2D) the two
/// diagonals.
#[derive(Debug, Clone)]
pub struct NodeStencil {
    pub x: ArmPair,
    pub y: Option<ArmPair>,
    /// Along (+1, +1)/(−1, −1).
    pub diag_p: Option<ArmPair>,
    /// Along (+1, −1)/(−1, +1).
    pub diag_m: Option<ArmPair>,
}

/// Uniform bounding grid over a domain with per-node classification
/// and precomputed boundary-truncated stencils.
#[derive(Debug, Clone)]
pub struct DomainGrid {
    pub shape: DomainShape,
    pub n: usize,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    origin: [f64; 2],
    class: Vec<NodeClass>,
    interior: Vec<usize>,
    rank_of: Vec<Option<usize>>,
    stencils: Vec<NodeStencil>,
    /// Fixed Dirichlet values at `Boundary` grid nodes.
    boundary_values: Vec<f64>,
}

const MIN_ARM: f64 = 1e-6;

impl DomainGrid {
    /// Build the grid with `resolution` nodes along x (the bounding
    /// box of a ball, or the rectangle itself); cells are square, so
    /// rectangle extents must be commensurate.
    pub fn new(
        shape: DomainShape,
        resolution: usize,
        boundary: &dyn Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        if resolution < 5 {
            return Err(Error::domain("grid needs at least 5 nodes per axis"));
        }
        let n = shape.dim();
        if n == 0 || n > 2 {
            return Err(Error::domain("Dirichlet solvers support n = 1 or 2"));
        }
        match &shape {
            DomainShape::Rect { min, max } => {
                if min.len() != n || max.len() != n {
                    return Err(Error::domain("rectangle corner dimensions disagree"));
                }
                if min.iter().zip(max.iter()).any(|(a, b)| b <= a) {
                    return Err(Error::domain("rectangle must have positive extents"));
                }
            }
            DomainShape::Ball { radius, center } => {
                if *radius <= 0.0 {
                    return Err(Error::domain("ball radius must be positive"));
                }
                if center.len() != n {
                    return Err(Error::domain("ball center dimension mismatch"));
                }
                if n == 1 {
                    return Err(Error::domain("use a rectangle for 1D domains"));
                }
            }
        }

        let (origin, extent_x, extent_y) = match &shape {
            DomainShape::Rect { min, max } => {
                let ex = max[0] - min[0];
                let ey = if n == 2 { max[1] - min[1] } else { 0.0 };
                ([min[0], if n == 2 { min[1] } else { 0.0 }], ex, ey)
            }
            DomainShape::Ball { center, radius } => {
                ([center[0] - radius, center[1] - radius], 2.0 * radius, 2.0 * radius)
            }
        };
        let h = extent_x / (resolution - 1) as f64;
        let nx = resolution;
        let ny = if n == 1 {
            1
        } else {
            let ny = (extent_y / h).round() as usize + 1;
            if ((ny - 1) as f64 * h - extent_y).abs() > 1e-9 * extent_y.max(1.0) {
                return Err(Error::domain(
                    "rectangle extents must be commensurate (square cells)",
                ));
            }
            ny
        };

        let mut grid = DomainGrid {
            shape,
            n,
            nx,
            ny,
            h,
            origin,
            class: vec![NodeClass::Exterior; nx * ny],
            interior: Vec::new(),
            rank_of: vec![None; nx * ny],
            stencils: Vec::new(),
            boundary_values: vec![0.0; nx * ny],
        };
        grid.classify();
        grid.build_stencils(boundary)?;
        Ok(grid)
    }

    pub fn node_xy(&self, flat: usize) -> [f64; 2] {
        let (ix, iy) = (flat % self.nx, flat / self.nx);
        [self.origin[0] + ix as f64 * self.h, self.origin[1] + iy as f64 * self.h]
    }

    pub fn class_of(&self, flat: usize) -> NodeClass {
        self.class[flat]
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn interior_count(&self) -> usize {
        self.interior.len()
    }

    pub fn rank_of(&self, flat: usize) -> Option<usize> {
        self.rank_of[flat]
    }

    pub fn stencil(&self, rank: usize) -> &NodeStencil {
        &self.stencils[rank]
    }

    pub fn boundary_value(&self, flat: usize) -> f64 {
        self.boundary_values[flat]
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    fn inside(&self, x: f64, y: f64) -> bool {
        match &self.shape {
            DomainShape::Rect { .. } => true, // classification by index below
            DomainShape::Ball { center, radius } => {
                let dx = x - center[0];
                let dy = y - center[1];
                (dx * dx + dy * dy).sqrt() < radius * (1.0 - 1e-12)
            }
        }
    }

    fn classify(&mut self) {
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let flat = iy * self.nx + ix;
                let on_rim = ix == 0
                    || ix == self.nx - 1
                    || (self.n == 2 && (iy == 0 || iy == self.ny - 1));
                self.class[flat] = match &self.shape {
                    DomainShape::Rect { .. } => {
                        if on_rim {
                            NodeClass::Boundary
                        } else {
                            NodeClass::Interior
                        }
                    }
                    DomainShape::Ball { .. } => {
                        let p = self.node_xy(flat);
                        if self.inside(p[0], p[1]) {
                            NodeClass::Interior
                        } else {
                            NodeClass::Exterior
                        }
                    }
                };
            }
        }
        for flat in 0..self.class.len() {
            if self.class[flat] == NodeClass::Interior {
                self.rank_of[flat] = Some(self.interior.len());
                self.interior.push(flat);
            }
        }
    }

    /// Arm from `flat` in grid direction (sx, sy): the neighbor node if
    /// usable, otherwise the Dirichlet value at the domain-boundary
    /// intersection.
    fn arm(
        &self,
        flat: usize,
        sx: isize,
        sy: isize,
        boundary: &dyn Fn(&[f64]) -> f64,
    ) -> Result<Arm> {
        let (ix, iy) = ((flat % self.nx) as isize, (flat / self.nx) as isize);
        let (jx, jy) = (ix + sx, iy + sy);
        let neighbor_ok = jx >= 0 && jy >= 0 && (jx as usize) < self.nx && (jy as usize) < self.ny;
        if neighbor_ok {
            let nflat = jy as usize * self.nx + jx as usize;
            match self.class[nflat] {
                NodeClass::Interior => return Ok(Arm::Node { flat: nflat }),
                NodeClass::Boundary => {
                    // rectangle rim node: fixed value at unit distance
                    return Ok(Arm::Fixed { value: self.boundary_values[nflat], theta: 1.0 });
                }
                NodeClass::Exterior => {}
            }
        }
        // truncate at the circle
        let (center, radius) = match &self.shape {
            DomainShape::Ball { center, radius } => (center, *radius),
            DomainShape::Rect { .. } => {
                return Err(Error::numeric(
                    "rectangle stencil reached outside the grid (corner handling bug)",
                ));
            }
        };
        let p = self.node_xy(flat);
        let u = [sx as f64 * self.h, sy as f64 * self.h];
        let d = [p[0] - center[0], p[1] - center[1]];
        let a = u[0] * u[0] + u[1] * u[1];
        let b = 2.0 * (u[0] * d[0] + u[1] * d[1]);
        let c = d[0] * d[0] + d[1] * d[1] - radius * radius;
        let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
        let t = (-b + disc) / (2.0 * a);
        if !(0.0..=1.0 + 1e-12).contains(&t) {
            return Err(Error::numeric(format!(
                "boundary intersection parameter t = {t} out of range at node {flat}"
            )));
        }
        let theta = t.clamp(MIN_ARM, 1.0);
        let q = [p[0] + theta * u[0], p[1] + theta * u[1]];
        Ok(Arm::Fixed { value: boundary(&q[..self.n]), theta })
    }

    fn build_stencils(&mut self, boundary: &dyn Fn(&[f64]) -> f64) -> Result<()> {
        // fill rim Dirichlet data first so rectangle arms can read it
        for flat in 0..self.node_count() {
            if self.class[flat] == NodeClass::Boundary {
                let p = self.node_xy(flat);
                self.boundary_values[flat] = boundary(&p[..self.n]);
            }
        }
        let mut stencils = Vec::with_capacity(self.interior.len());
        for &flat in &self.interior {
            let x = ArmPair {
                plus: self.arm(flat, 1, 0, boundary)?,
                minus: self.arm(flat, -1, 0, boundary)?,
            };
            let (y, diag_p, diag_m) = if self.n == 2 {
                (
                    Some(ArmPair {
                        plus: self.arm(flat, 0, 1, boundary)?,
                        minus: self.arm(flat, 0, -1, boundary)?,
                    }),
                    Some(ArmPair {
                        plus: self.arm(flat, 1, 1, boundary)?,
                        minus: self.arm(flat, -1, -1, boundary)?,
                    }),
                    Some(ArmPair {
                        plus: self.arm(flat, 1, -1, boundary)?,
                        minus: self.arm(flat, -1, 1, boundary)?,
                    }),
                )
            } else {
                (None, None, None)
            };
            stencils.push(NodeStencil { x, y, diag_p, diag_m });
        }
        self.stencils = stencils;
        Ok(())
    }

    /// Is every stencil arm of this interior rank a regular unit arm
    /// to another interior node?
    pub fn is_deep_interior(&self, rank: usize) -> bool {
        let st = &self.stencils[rank];
        let regular = |a: &Arm| matches!(a, Arm::Node { .. });
        let pair_ok = |p: &ArmPair| regular(&p.plus) && regular(&p.minus);
        pair_ok(&st.x)
            && st.y.as_ref().map_or(true, |p| pair_ok(p))
            && st.diag_p.as_ref().map_or(true, |p| pair_ok(p))
            && st.diag_m.as_ref().map_or(true, |p| pair_ok(p))
    }
}

/// Weights of the unequal-arm second difference along one line:
/// returns (w_plus, w_minus, w_center) so that
/// D = w₊·f₊ + w₋·f₋ + w₀·f₀ approximates the second derivative in the
/// line parameter (exactly for quadratics).
pub fn second_diff_weights(tp: f64, tm: f64) -> (f64, f64, f64) {
    let wp = 2.0 / (tp * (tp + tm));
    let wm = 2.0 / (tm * (tp + tm));
    let wc = -2.0 / (tp * tm);
    (wp, wm, wc)
}

/// Weights of the unequal-arm first difference (exact for quadratics).
pub fn first_diff_weights(tp: f64, tm: f64) -> (f64, f64, f64) {
    let denom = tp * tm * (tp + tm);
    let wp = tm * tm / denom;
    let wm = -tp * tp / denom;
    let wc = (tp * tp - tm * tm) / denom;
    (wp, wm, wc)
}

/// Scalar field on a domain grid: interior values are the unknowns,
/// rectangle-rim values are fixed Dirichlet data, exterior entries are
/// unused.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: std::sync::Arc<DomainGrid>,
    pub values: Vec<f64>,
}

impl GridFunction {
    /// Sample a function everywhere (interior + rim).
    pub fn sample(grid: std::sync::Arc<DomainGrid>, f: &dyn Fn(&[f64]) -> f64) -> Self {
        let mut values = vec![0.0; grid.node_count()];
        for flat in 0..grid.node_count() {
            if grid.class_of(flat) != NodeClass::Exterior {
                let p = grid.node_xy(flat);
                values[flat] = f(&p[..grid.n]);
            }
        }
        GridFunction { grid, values }
    }

    pub fn from_interior(grid: std::sync::Arc<DomainGrid>, interior: &[f64]) -> Self {
        let mut values = vec![0.0; grid.node_count()];
        for flat in 0..grid.node_count() {
            if grid.class_of(flat) == NodeClass::Boundary {
                values[flat] = grid.boundary_value(flat);
            }
        }
        for (rank, &flat) in grid.interior_nodes().iter().enumerate() {
            values[flat] = interior[rank];
        }
        GridFunction { grid, values }
    }

    pub fn interior_values(&self) -> Vec<f64> {
        self.grid.interior_nodes().iter().map(|&f| self.values[f]).collect()
    }

    fn arm_value(&self, arm: &Arm) -> f64 {
        match arm {
            Arm::Node { flat } => self.values[*flat],
            Arm::Fixed { value, .. } => *value,
        }
    }

    fn line_second(&self, center: f64, pair: &ArmPair) -> f64 {
        let (wp, wm, wc) = second_diff_weights(pair.plus.theta(), pair.minus.theta());
        wp * self.arm_value(&pair.plus) + wm * self.arm_value(&pair.minus) + wc * center
    }

    fn line_first(&self, center: f64, pair: &ArmPair) -> f64 {
        let (wp, wm, wc) = first_diff_weights(pair.plus.theta(), pair.minus.theta());
        wp * self.arm_value(&pair.plus) + wm * self.arm_value(&pair.minus) + wc * center
    }

    /// Discrete Hessian at an interior rank.
    pub fn hessian_at_rank(&self, rank: usize) -> SymMat2 {
        let grid = &self.grid;
        let flat = grid.interior_nodes()[rank];
        let st = grid.stencil(rank);
        let center = self.values[flat];
        let h2 = grid.h * grid.h;
        let hxx = self.line_second(center, &st.x) / h2;
        if grid.n == 1 {
            return SymMat2::scalar(hxx);
        }
        let hyy = self.line_second(center, st.y.as_ref().expect("2D stencil")) / h2;
        let dp = self.line_second(center, st.diag_p.as_ref().expect("2D stencil")) / h2;
        let dm = self.line_second(center, st.diag_m.as_ref().expect("2D stencil")) / h2;
        let hxy = (dp - dm) * 0.25;
        SymMat2 { a11: hxx, a12: hxy, a22: hyy }
    }

    /// Discrete gradient at an interior rank.
    pub fn gradient_at_rank(&self, rank: usize) -> [f64; 2] {
        let grid = &self.grid;
        let flat = grid.interior_nodes()[rank];
        let st = grid.stencil(rank);
        let center = self.values[flat];
        let gx = self.line_first(center, &st.x) / grid.h;
        let gy = if grid.n == 2 {
            self.line_first(center, st.y.as_ref().expect("2D stencil")) / grid.h
        } else {
            0.0
        };
        [gx, gy]
    }

    /// Convexity certificate: the smallest discrete-Hessian eigenvalue
    /// over all interior nodes.
    pub fn min_hessian_eigenvalue(&self) -> f64 {
        (0..self.grid.interior_count())
            .map(|r| self.hessian_at_rank(r).min_eigenvalue(self.grid.n))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest Frobenius norm of the discrete Hessian over interior
    /// nodes.
    pub fn max_hessian_frobenius(&self) -> f64 {
        (0..self.grid.interior_count())
            .map(|r| {
                let m = self.hessian_at_rank(r);
                match self.grid.n {
                    1 => m.a11.abs(),
                    _ => (m.a11 * m.a11 + 2.0 * m.a12 * m.a12 + m.a22 * m.a22).sqrt(),
                }
            })
            .fold(0.0f64, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn rect_grid_classification() {
        let g = DomainGrid::new(
            DomainShape::Rect { min: vec![-1.0, -1.0], max: vec![1.0, 1.0] },
            9,
            &|_| 0.0,
        )
        .unwrap();
        assert_eq!(g.nx, 9);
        assert_eq!(g.ny, 9);
        assert_eq!(g.interior_count(), 49);
    }

    #[test]
    fn hessian_exact_on_quadratics_rect() {
        let g = Arc::new(
            DomainGrid::new(
                DomainShape::Rect { min: vec![0.0, 0.0], max: vec![1.0, 1.0] },
                17,
                &|x| x[0] * x[0] + 0.5 * x[0] * x[1] + 2.0 * x[1] * x[1],
            )
            .unwrap(),
        );
        let f = GridFunction::sample(g.clone(), &|x| {
            x[0] * x[0] + 0.5 * x[0] * x[1] + 2.0 * x[1] * x[1]
        });
        for r in 0..g.interior_count() {
            let h = f.hessian_at_rank(r);
            assert!((h.a11 - 2.0).abs() < 1e-10);
            assert!((h.a12 - 0.5).abs() < 1e-10);
            assert!((h.a22 - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn hessian_exact_on_quadratics_ball() {
        let q = |x: &[f64]| 1.5 * x[0] * x[0] - 0.7 * x[0] * x[1] + 0.9 * x[1] * x[1] + x[0];
        let g = Arc::new(
            DomainGrid::new(
                DomainShape::Ball { center: vec![0.0, 0.0], radius: 1.0 },
                33,
                &q,
            )
            .unwrap(),
        );
        let f = GridFunction::sample(g.clone(), &q);
        for r in 0..g.interior_count() {
            let h = f.hessian_at_rank(r);
            assert!((h.a11 - 3.0).abs() < 1e-8, "rank {r}: {h:?}");
            assert!((h.a12 + 0.7).abs() < 1e-8, "rank {r}: {h:?}");
            assert!((h.a22 - 1.8).abs() < 1e-8, "rank {r}: {h:?}");
        }
    }

    #[test]
    fn gradient_exact_on_quadratics_ball() {
        let q = |x: &[f64]| 0.5 * (x[0] * x[0] + x[1] * x[1]) + 0.25 * x[0];
        let g = Arc::new(
            DomainGrid::new(DomainShape::Ball { center: vec![0.0, 0.0], radius: 1.0 }, 25, &q)
                .unwrap(),
        );
        let f = GridFunction::sample(g.clone(), &q);
        for r in 0..g.interior_count() {
            let p = g.node_xy(g.interior_nodes()[r]);
            let grad = f.gradient_at_rank(r);
            assert!((grad[0] - (p[0] + 0.25)).abs() < 1e-9);
            assert!((grad[1] - p[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn one_dimensional_grid() {
        let g = Arc::new(
            DomainGrid::new(DomainShape::Rect { min: vec![-1.0], max: vec![1.0] }, 11, &|x| {
                x[0] * x[0]
            })
            .unwrap(),
        );
        assert_eq!(g.interior_count(), 9);
        let f = GridFunction::sample(g.clone(), &|x| x[0] * x[0]);
        for r in 0..g.interior_count() {
            assert!((f.hessian_at_rank(r).a11 - 2.0).abs() < 1e-10);
        }
    }
}
