//! Exact convex-geometry kernel for lattice-rational polytopes in
//! dimension ≤ 3.
//!
//! Input coordinates are rationalized, placed on a common integer
//! lattice, and every hull / volume / face computation runs in checked
//! i128 arithmetic, so volumes and mixed volumes come out as exact
//! rationals. The point counts involved are tiny (tens of vertices),
//! which makes the brute-force supporting-plane hull in 3D perfectly
//! adequate and easy to trust.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

/// Largest point set the 3D brute-force hull accepts.
const HULL_POINT_CAP: usize = 160;
/// Magnitude guard for scaled integer coordinates.
const COORD_CAP: i128 = 1 << 40;

/// Rationalize an f64 by continued fractions: smallest denominator
/// q ≤ 10⁶ with |x − p/q| ≤ 1e−9·max(1, |x|). Desk-scale polytope
/// data is rational by intent; this recovers e.g. 0.1 as 1/10 instead
/// of its binary expansion.
pub fn rat_from_f64(x: f64) -> Result<Rat> {
    if !x.is_finite() {
        return Err(Error::domain("polytope coordinates must be finite"));
    }
    let tol = 1e-9 * x.abs().max(1.0);
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, x.floor() as i64, 1i64);
    let mut frac = x - x.floor();
    for _ in 0..64 {
        let approx = p1 as f64 / q1 as f64;
        if (x - approx).abs() <= tol {
            return Ok(Rat::new(BigInt::from(p1), BigInt::from(q1)));
        }
        if frac.abs() < 1e-15 {
            break;
        }
        let r = 1.0 / frac;
        let a = r.floor();
        frac = r - a;
        let a = a as i64;
        let (p2, q2) = (
            a.checked_mul(p1).and_then(|v| v.checked_add(p0)),
            a.checked_mul(q1).and_then(|v| v.checked_add(q0)),
        );
        match (p2, q2) {
            (Some(p2), Some(q2)) if q2 <= 1_000_000 => {
                p0 = p1;
                q0 = q1;
                p1 = p2;
                q1 = q2;
            }
            _ => break,
        }
    }
    let approx = p1 as f64 / q1 as f64;
    if (x - approx).abs() <= tol {
        Ok(Rat::new(BigInt::from(p1), BigInt::from(q1)))
    } else {
        Err(Error::numeric(format!(
            "coordinate {x} has no rational representation with denominator ≤ 1e6"
        )))
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn checked(v: Option<i128>) -> Result<i128> {
    v.ok_or_else(|| Error::numeric("integer overflow in exact polytope kernel"))
}

fn dot(a: &[i128], b: &[i128]) -> Result<i128> {
    let mut s: i128 = 0;
    for (x, y) in a.iter().zip(b.iter()) {
        s = checked(s.checked_add(checked(x.checked_mul(*y))?))?;
    }
    Ok(s)
}

fn sub(a: &[i128], b: &[i128]) -> Vec<i128> {
    a.iter().zip(b.iter()).map(|(x, y)| x - y).collect()
}

fn cross3(a: &[i128], b: &[i128]) -> Result<Vec<i128>> {
    Ok(vec![
        checked(a[1].checked_mul(b[2]))? - checked(a[2].checked_mul(b[1]))?,
        checked(a[2].checked_mul(b[0]))? - checked(a[0].checked_mul(b[2]))?,
        checked(a[0].checked_mul(b[1]))? - checked(a[1].checked_mul(b[0]))?,
    ])
}

fn det3(a: &[i128], b: &[i128], c: &[i128]) -> Result<i128> {
    dot(&cross3(a, b)?, c)
}

fn gcd_all(v: &[i128]) -> i128 {
    v.iter().fold(0i128, |g, &x| g.gcd(&x.abs()))
}

fn primitivize(mut v: Vec<i128>) -> Vec<i128> {
    let g = gcd_all(&v);
    if g > 1 {
        for x in v.iter_mut() {
            *x /= g;
        }
    }
    v
}

/// Rank of a small integer matrix by fraction-free elimination.
fn int_rank(rows: &[Vec<i128>]) -> usize {
    let mut m: Vec<Vec<Rat>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| Rat::from_integer(BigInt::from(x))).collect())
        .collect();
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        if let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) {
            m.swap(rank, p);
            let pivot = m[rank][c].clone();
            for r in (rank + 1)..m.len() {
                if !m[r][c].is_zero() {
                    let f = &m[r][c] / &pivot;
                    for cc in c..cols {
                        let v = &m[rank][cc] * &f;
                        m[r][cc] = &m[r][cc] - v;
                    }
                }
            }
            rank += 1;
            if rank == m.len() {
                break;
            }
        }
    }
    rank
}

/// Facet of an integer hull: outward primitive normal with
/// normal·x ≤ offset on the hull, plus incident vertex indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntFacet {
    pub normal: Vec<i128>,
    pub offset: i128,
    pub vertices: Vec<usize>,
}

/// Convex hull of an integer point set, with canonical vertex order
/// (lexicographically sorted) and its facet list.
#[derive(Debug, Clone)]
pub struct IntHull {
    pub dim: usize,
    pub vertices: Vec<Vec<i128>>,
    pub facets: Vec<IntFacet>,
}

pub fn int_hull(points: &[Vec<i128>], dim: usize) -> Result<IntHull> {
    let mut pts: Vec<Vec<i128>> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.is_empty() {
        return Err(Error::domain("hull of an empty point set"));
    }
    for p in &pts {
        if p.len() != dim {
            return Err(Error::domain("hull points must share the ambient dimension"));
        }
        if p.iter().any(|x| x.abs() > COORD_CAP) {
            return Err(Error::numeric("scaled coordinates exceed the exact-kernel cap"));
        }
    }
    let diffs: Vec<Vec<i128>> = pts[1..].iter().map(|p| sub(p, &pts[0])).collect();
    if int_rank(&diffs) < dim {
        return Err(Error::domain(
            "degenerate hull: point set is not full-dimensional in its ambient space",
        ));
    }
    match dim {
        1 => hull_1d(pts),
        2 => hull_2d(pts),
        3 => hull_3d(pts),
        _ => Err(Error::domain("exact hull kernel supports dimensions 1..=3")),
    }
}

fn hull_1d(pts: Vec<Vec<i128>>) -> Result<IntHull> {
    let lo = pts.first().unwrap().clone();
    let hi = pts.last().unwrap().clone();
    let vertices = vec![lo.clone(), hi.clone()];
    let facets = vec![
        IntFacet { normal: vec![-1], offset: -lo[0], vertices: vec![0] },
        IntFacet { normal: vec![1], offset: hi[0], vertices: vec![1] },
    ];
    Ok(IntHull { dim: 1, vertices, facets })
}

fn cross2(o: &[i128], a: &[i128], b: &[i128]) -> Result<i128> {
    let u = sub(a, o);
    let v = sub(b, o);
    Ok(checked(u[0].checked_mul(v[1]))? - checked(u[1].checked_mul(v[0]))?)
}

fn hull_2d(pts: Vec<Vec<i128>>) -> Result<IntHull> {
    // monotone chain; input already lexicographically sorted and deduped
    let build = |iter: &[Vec<i128>]| -> Result<Vec<Vec<i128>>> {
        let mut chain: Vec<Vec<i128>> = Vec::new();
        for p in iter {
            while chain.len() >= 2
                && cross2(&chain[chain.len() - 2], &chain[chain.len() - 1], p)? <= 0
            {
                chain.pop();
            }
            chain.push(p.clone());
        }
        Ok(chain)
    };
    let lower = build(&pts)?;
    let rev: Vec<Vec<i128>> = pts.iter().rev().cloned().collect();
    let upper = build(&rev)?;
    // counterclockwise cycle
    let mut cycle = lower;
    let first = cycle[0].clone();
    cycle.extend(upper.into_iter().skip(1).take_while(|p| *p != first));

    let mut vertices = cycle.clone();
    vertices.sort();
    let index_of = |p: &Vec<i128>| vertices.binary_search(p).expect("cycle point is a vertex");

    let m = cycle.len();
    let mut facets = Vec::with_capacity(m);
    for i in 0..m {
        let a = &cycle[i];
        let b = &cycle[(i + 1) % m];
        let d = sub(b, a);
        let normal = primitivize(vec![d[1], -d[0]]);
        let offset = dot(&normal, a)?;
        let mut vs = vec![index_of(a), index_of(b)];
        vs.sort_unstable();
        facets.push(IntFacet { normal, offset, vertices: vs });
    }
    facets.sort_by(|x, y| (&x.normal, x.offset).cmp(&(&y.normal, y.offset)));
    Ok(IntHull { dim: 2, vertices, facets })
}

fn hull_3d(pts: Vec<Vec<i128>>) -> Result<IntHull> {
    if pts.len() > HULL_POINT_CAP {
        return Err(Error::numeric(format!(
            "3D hull kernel capped at {HULL_POINT_CAP} points, got {}",
            pts.len()
        )));
    }
    let n = pts.len();
    let mut planes: Vec<(Vec<i128>, i128)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let u = sub(&pts[j], &pts[i]);
                let v = sub(&pts[k], &pts[i]);
                let nrm = cross3(&u, &v)?;
                if nrm.iter().all(|x| *x == 0) {
                    continue;
                }
                let nrm = primitivize(nrm);
                let off = dot(&nrm, &pts[i])?;
                let mut above = false;
                let mut below = false;
                for p in &pts {
                    let s = dot(&nrm, p)? - off;
                    if s > 0 {
                        above = true;
                    } else if s < 0 {
                        below = true;
                    }
                    if above && below {
                        break;
                    }
                }
                if above && below {
                    continue;
                }
                let (nrm, off) = if above {
                    (nrm.iter().map(|x| -x).collect::<Vec<_>>(), -off)
                } else {
                    (nrm, off)
                };
                planes.push((nrm, off));
            }
        }
    }
    planes.sort();
    planes.dedup();

    // vertices: points whose active facet normals span R³
    let mut vertices: Vec<Vec<i128>> = Vec::new();
    let mut active_sets: Vec<Vec<usize>> = Vec::new();
    for p in &pts {
        let mut active: Vec<usize> = Vec::new();
        for (fi, (nrm, off)) in planes.iter().enumerate() {
            if dot(nrm, p)? == *off {
                active.push(fi);
            }
        }
        if active.len() >= 3 {
            let normals: Vec<Vec<i128>> = active.iter().map(|&fi| planes[fi].0.clone()).collect();
            if int_rank(&normals) == 3 {
                vertices.push(p.clone());
                active_sets.push(active);
            }
        }
    }
    let mut order: Vec<usize> = (0..vertices.len()).collect();
    order.sort_by(|&a, &b| vertices[a].cmp(&vertices[b]));
    let vertices: Vec<Vec<i128>> = order.iter().map(|&i| vertices[i].clone()).collect();
    let active_sets: Vec<Vec<usize>> = order.iter().map(|&i| active_sets[i].clone()).collect();

    let mut facets = Vec::with_capacity(planes.len());
    for (fi, (normal, offset)) in planes.iter().enumerate() {
        let vs: Vec<usize> = (0..vertices.len())
            .filter(|&vi| active_sets[vi].binary_search(&fi).is_ok())
            .collect();
        if vs.len() >= 3 {
            facets.push(IntFacet { normal: normal.clone(), offset: *offset, vertices: vs });
        }
    }
    facets.sort_by(|x, y| (&x.normal, x.offset).cmp(&(&y.normal, y.offset)));
    Ok(IntHull { dim: 3, vertices, facets })
}

impl IntHull {
    /// Exact Euclidean volume of the hull (in the scaled integer
    /// coordinates); divide by scaleⁿ to recover the true volume.
    pub fn volume(&self) -> Result<Rat> {
        match self.dim {
            1 => {
                let lo = &self.vertices[0];
                let hi = &self.vertices[self.vertices.len() - 1];
                Ok(Rat::from_integer(BigInt::from(hi[0] - lo[0])))
            }
            2 => {
                let cycle = self.cycle_2d()?;
                let mut twice: BigInt = BigInt::zero();
                for i in 1..(cycle.len() - 1) {
                    let c = cross2(&cycle[0], &cycle[i], &cycle[i + 1])?;
                    twice += BigInt::from(c);
                }
                Ok(Rat::new(twice, BigInt::from(2)))
            }
            3 => {
                let mut six: BigInt = BigInt::zero();
                for f in &self.facets {
                    let ring = self.facet_ring(f)?;
                    // orient the fan so its triangles point along the
                    // outward normal
                    let a = &self.vertices[ring[0]];
                    let b = &self.vertices[ring[1]];
                    let c = &self.vertices[ring[2]];
                    let orient = det3(&sub(b, a), &sub(c, a), &f.normal)?;
                    let ring: Vec<usize> =
                        if orient < 0 { ring.iter().rev().copied().collect() } else { ring };
                    let a = &self.vertices[ring[0]];
                    for w in ring[1..].windows(2) {
                        let b = &self.vertices[w[0]];
                        let c = &self.vertices[w[1]];
                        six += BigInt::from(det3(a, b, c)?);
                    }
                }
                Ok(Rat::new(six, BigInt::from(6)))
            }
            _ => Err(Error::domain("volume implemented for dimensions 1..=3")),
        }
    }

    /// Vertices in counterclockwise cyclic order (2D only).
    fn cycle_2d(&self) -> Result<Vec<Vec<i128>>> {
        let pts = self.vertices.clone();
        let hull = hull_2d(pts)?;
        // rebuild the cycle by walking facet adjacency
        let mut cycle: Vec<Vec<i128>> = Vec::new();
        let start = 0usize;
        let mut cur = start;
        let mut prev = usize::MAX;
        loop {
            cycle.push(hull.vertices[cur].clone());
            let next = hull
                .facets
                .iter()
                .filter(|f| f.vertices.contains(&cur))
                .flat_map(|f| f.vertices.iter().copied())
                .find(|&v| v != cur && v != prev)
                .ok_or_else(|| Error::numeric("2D cycle walk failed"))?;
            prev = cur;
            cur = next;
            if cur == start {
                break;
            }
        }
        // ensure counterclockwise
        if cycle.len() >= 3 && cross2(&cycle[0], &cycle[1], &cycle[2])? < 0 {
            cycle.reverse();
        }
        Ok(cycle)
    }

    /// Vertex indices of a facet in cyclic order around the facet.
    fn facet_ring(&self, f: &IntFacet) -> Result<Vec<usize>> {
        // project out the dominant normal axis; the projection is
        // injective and affine on the facet plane
        let axis = (0..3)
            .max_by_key(|&i| f.normal[i].abs())
            .expect("3D normal");
        let planar: Vec<Vec<i128>> = f
            .vertices
            .iter()
            .map(|&vi| {
                (0..3)
                    .filter(|&i| i != axis)
                    .map(|i| self.vertices[vi][i])
                    .collect::<Vec<i128>>()
            })
            .collect();
        let hull = hull_2d(planar.clone())?;
        let cycle = hull.cycle_2d()?;
        let ring: Vec<usize> = cycle
            .iter()
            .map(|p| {
                f.vertices[planar
                    .iter()
                    .position(|q| q == p)
                    .expect("cycle point came from the facet")]
            })
            .collect();
        if ring.len() != f.vertices.len() {
            return Err(Error::numeric("facet ring lost vertices (degenerate facet data)"));
        }
        Ok(ring)
    }
}

/// Rational point set placed on one integer lattice: coordinates are
/// `pts[i][j] / scale`.
#[derive(Debug, Clone)]
pub struct ScaledPoints {
    pub scale: BigInt,
    pub pts: Vec<Vec<i128>>,
    pub dim: usize,
}

impl ScaledPoints {
    pub fn from_rational(points: &[Vec<Rat>], dim: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("empty point set"));
        }
        let mut scale = BigInt::one();
        for p in points {
            if p.len() != dim {
                return Err(Error::domain("points must share the ambient dimension"));
            }
            for c in p {
                scale = scale.lcm(c.denom());
            }
        }
        let mut pts = Vec::with_capacity(points.len());
        for p in points {
            let mut row = Vec::with_capacity(dim);
            for c in p {
                let v = (c * Rat::from_integer(scale.clone())).to_integer();
                let v = v.to_i128().ok_or_else(|| {
                    Error::numeric("rational coordinates exceed the exact-kernel range")
                })?;
                if v.abs() > COORD_CAP {
                    return Err(Error::numeric("scaled coordinates exceed the exact-kernel cap"));
                }
                row.push(v);
            }
            pts.push(row);
        }
        Ok(ScaledPoints { scale, pts, dim })
    }

    pub fn rational_vertex(&self, v: &[i128]) -> Vec<Rat> {
        v.iter()
            .map(|&c| Rat::new(BigInt::from(c), self.scale.clone()))
            .collect()
    }

    /// Rescale two sets onto a common lattice.
    pub fn common(a: &ScaledPoints, b: &ScaledPoints) -> Result<(ScaledPoints, ScaledPoints)> {
        let scale = a.scale.lcm(&b.scale);
        let rescale = |s: &ScaledPoints| -> Result<ScaledPoints> {
            let f = (&scale / &s.scale)
                .to_i128()
                .ok_or_else(|| Error::numeric("common-lattice factor overflow"))?;
            let pts = s
                .pts
                .iter()
                .map(|p| {
                    p.iter()
                        .map(|&c| {
                            checked(c.checked_mul(f)).and_then(|v| {
                                if v.abs() > COORD_CAP {
                                    Err(Error::numeric(
                                        "scaled coordinates exceed the exact-kernel cap",
                                    ))
                                } else {
                                    Ok(v)
                                }
                            })
                        })
                        .collect::<Result<Vec<i128>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ScaledPoints { scale: scale.clone(), pts, dim: s.dim })
        };
        Ok((rescale(a)?, rescale(b)?))
    }
}

/// Exact volume of conv(j·P + Q) for the mixed-volume interpolation,
/// in true (unscaled) units.
pub fn minkowski_volume(p: &ScaledPoints, q: &ScaledPoints, j: i128) -> Result<Rat> {
    let (p, q) = ScaledPoints::common(p, q)?;
    let mut sums = Vec::with_capacity(p.pts.len() * q.pts.len());
    for a in &p.pts {
        for b in &q.pts {
            let s: Result<Vec<i128>> = a
                .iter()
                .zip(b.iter())
                .map(|(&x, &y)| checked(x.checked_mul(j)).and_then(|v| checked(v.checked_add(y))))
                .collect();
            sums.push(s?);
        }
    }
    let hull = int_hull(&sums, p.dim)?;
    let scaled_vol = hull.volume()?;
    let scale_pow = num_traits::pow::pow(Rat::from_integer(p.scale.clone()), p.dim);
    Ok(scaled_vol / scale_pow)
}

/// Integer basis of the kernel lattice { z ∈ Z³ : z·n = 0 } for a
/// primitive normal n. The rows returned generate the full rank-2
/// sublattice (their 2×2 minors reproduce ±n, which is primitive).
pub fn kernel_basis_3d(n: &[i128]) -> Result<[Vec<i128>; 2]> {
    let (a, b, c) = (n[0], n[1], n[2]);
    if b == 0 && c == 0 {
        return Ok([vec![0, 1, 0], vec![0, 0, 1]]);
    }
    let g1 = b.gcd(&c);
    // y·b + z·c = g1 by extended gcd
    let (y, z) = ext_gcd(b, c);
    debug_assert_eq!(y * b + z * c, g1);
    let t1 = vec![0, c / g1, -b / g1];
    let t2 = vec![g1, -a * y, -a * z];
    debug_assert_eq!(dot(&t1, n)?, 0);
    debug_assert_eq!(dot(&t2, n)?, 0);
    Ok([t1, t2])
}

/// Bézout coefficients (x, y) with x·a + y·b = gcd(a, b).
fn ext_gcd(a: i128, b: i128) -> (i128, i128) {
    if b == 0 {
        return (a.signum(), 0);
    }
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-s0, -t0)
    } else {
        (s0, t0)
    }
}

/// Exact solve of a small rational linear system (used for the 4×4
/// mixed-volume interpolation and face-coordinate changes).
pub fn solve_rational(mut m: Vec<Vec<Rat>>, mut rhs: Vec<Rat>) -> Result<Vec<Rat>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or_else(|| Error::numeric("singular rational system"))?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in (col + 1)..n {
            if !m[r][col].is_zero() {
                let f = &m[r][col] / &m[col][col];
                for c in col..n {
                    let v = &m[col][c] * &f;
                    m[r][c] = &m[r][c] - v;
                }
                let v = &rhs[col] * &f;
                rhs[r] = &rhs[r] - v;
            }
        }
    }
    let mut x = vec![Rat::zero(); n];
    for r in (0..n).rev() {
        let mut s = rhs[r].clone();
        for c in (r + 1)..n {
            s = s - &m[r][c] * &x[c];
        }
        x[r] = s / &m[r][r];
    }
    Ok(x)
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num = 1u64;
    for i in 0..k {
        num = num * (n - i) as u64 / (i + 1) as u64;
    }
    num
}

pub fn rat_from_u64(v: u64) -> Rat {
    Rat::from_integer(BigInt::from_u64(v).expect("u64 fits"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ipts(v: &[[i128; 2]]) -> Vec<Vec<i128>> {
        v.iter().map(|p| p.to_vec()).collect()
    }

    #[test]
    fn square_hull_and_volume() {
        let pts = ipts(&[[0, 0], [2, 0], [0, 2], [2, 2], [1, 1]]);
        let hull = int_hull(&pts, 2).unwrap();
        assert_eq!(hull.vertices.len(), 4);
        assert_eq!(hull.facets.len(), 4);
        assert_eq!(hull.volume().unwrap(), Rat::from_integer(BigInt::from(4)));
    }

    #[test]
    fn cube_hull_and_volume() {
        let mut pts = Vec::new();
        for x in [0, 3] {
            for y in [0, 3] {
                for z in [0, 3] {
                    pts.push(vec![x, y, z]);
                }
            }
        }
        pts.push(vec![1, 1, 1]); // interior point must disappear
        let hull = int_hull(&pts, 3).unwrap();
        assert_eq!(hull.vertices.len(), 8);
        assert_eq!(hull.facets.len(), 6);
        assert_eq!(hull.volume().unwrap(), Rat::from_integer(BigInt::from(27)));
    }

    #[test]
    fn tetrahedron_volume() {
        let pts = vec![vec![0, 0, 0], vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]];
        let hull = int_hull(&pts, 3).unwrap();
        assert_eq!(hull.facets.len(), 4);
        assert_eq!(
            hull.volume().unwrap(),
            Rat::new(BigInt::from(8), BigInt::from(6))
        );
    }

    #[test]
    fn degenerate_hull_rejected() {
        let pts = ipts(&[[0, 0], [1, 1], [2, 2]]);
        assert!(int_hull(&pts, 2).is_err());
    }

    #[test]
    fn rationalization_recovers_decimals() {
        let r = rat_from_f64(0.1).unwrap();
        assert_eq!(r, Rat::new(BigInt::from(1), BigInt::from(10)));
        let third = rat_from_f64(1.0 / 3.0).unwrap();
        assert_eq!(third, Rat::new(BigInt::from(1), BigInt::from(3)));
        assert_eq!(rat_from_f64(-2.5).unwrap(), Rat::new(BigInt::from(-5), BigInt::from(2)));
    }

    #[test]
    fn kernel_basis_is_orthogonal_and_primitive() {
        for n in [[1i128, 1, 1], [2, -3, 5], [1, 0, 0], [0, 4, 6]] {
            let n = primitivize(n.to_vec());
            let [t1, t2] = kernel_basis_3d(&n).unwrap();
            assert_eq!(dot(&t1, &n).unwrap(), 0);
            assert_eq!(dot(&t2, &n).unwrap(), 0);
            // 2×2 minors reproduce ±n ⇒ primitive sublattice
            let m = cross3(&t1, &t2).unwrap();
            let m = primitivize(m);
            assert!(m == n || m.iter().zip(&n).all(|(a, b)| *a == -b));
        }
    }
}
