//! Reference polytopes used across tests and example configurations.

use super::Polytope;
use crate::error::Result;

/// [0,1]^n.
pub fn unit_box(n: usize) -> Result<Polytope> {
    let mut verts = Vec::with_capacity(1 << n);
    for mask in 0..(1u32 << n) {
        verts.push((0..n).map(|i| ((mask >> i) & 1) as f64).collect());
    }
    Polytope::from_vertices(&verts)
}

/// [0,a]×[0,b].
pub fn rect2(a: f64, b: f64) -> Result<Polytope> {
    Polytope::from_vertices(&[vec![0.0, 0.0], vec![a, 0.0], vec![0.0, b], vec![a, b]])
}

/// conv{0, a·e₁, a·e₂}: the moment polytope of the class a·H on the
/// projective plane.
pub fn simplex2(a: f64) -> Result<Polytope> {
    Polytope::from_vertices(&[vec![0.0, 0.0], vec![a, 0.0], vec![0.0, a]])
}

/// The simplex of side `a` with the corner at the origin cut at depth
/// `b`: the moment polytope of a·H − b·E on the blow-up of the plane
/// at a torus-fixed point. The cut facet (class E) has outward normal
/// (−1, −1).
pub fn corner_cut_simplex(a: f64, b: f64) -> Result<Polytope> {
    Polytope::from_vertices(&[vec![b, 0.0], vec![a, 0.0], vec![0.0, a], vec![0.0, b]])
}

/// conv{0, a·e₁, a·e₂, a·e₃}.
pub fn simplex3(a: f64) -> Result<Polytope> {
    Polytope::from_vertices(&[
        vec![0.0, 0.0, 0.0],
        vec![a, 0.0, 0.0],
        vec![0.0, a, 0.0],
        vec![0.0, 0.0, a],
    ])
}
