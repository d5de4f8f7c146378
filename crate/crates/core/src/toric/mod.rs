//! Moment polytopes of toric Kähler classes, mixed volumes, and the
//! face-wise numerical stability criterion.
//!
//! A pair of full-dimensional lattice-rational polytopes (P_χ, P_α)
//! with the same normal fan encodes two Kähler classes on one toric
//! manifold. Intersection numbers are mixed volumes,
//! ∫ χ^a ∧ α^b = n!·V(P_χ[a], P_α[b]), and the solvability test for
//! Λ_ω α + d·αⁿ/ωⁿ = c is: the global integral
//! ∫ cχⁿ − nχ^{n−1}∧α must be ≥ 0 and every proper toric face V of
//! dimension p ≥ 1 must have strictly positive margin
//! ∫_V cχ^p − pχ^{p−1}∧α. Faces are restricted with lattice-normalized
//! coordinates so that the restricted volumes really are the
//! intersection numbers of the corresponding subvarieties.
//!
//! Everything downstream of f64 input runs in exact rational
//! arithmetic; margins are only rounded on output.

mod exact;
pub mod shapes;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use exact::{rat_from_f64, rat_from_u64, rat_to_f64, IntHull, Rat, ScaledPoints};

/// Supporting halfspace normal·x ≤ offset with a primitive integer
/// normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Convex lattice-rational polytope in dimension ≤ 3, stored with its
/// exact hull (vertices + facets cross-validated at construction).
#[derive(Debug, Clone)]
pub struct Polytope {
    dim: usize,
    verts: Vec<Vec<Rat>>,
    scaled: ScaledPoints,
    hull: IntHull,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolytopeJson {
    vertices: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    halfspaces: Option<Vec<Halfspace>>,
}

impl Serialize for Polytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolytopeJson {
            vertices: self.vertices(),
            halfspaces: Some(self.halfspaces()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolytopeJson::deserialize(d)?;
        let poly = Polytope::from_vertices(&raw.vertices).map_err(serde::de::Error::custom)?;
        if let Some(hs) = raw.halfspaces {
            poly.cross_validate_halfspaces(&hs).map_err(serde::de::Error::custom)?;
        }
        Ok(poly)
    }
}

impl Polytope {
    /// Hull of the given points; must be full-dimensional in its
    /// ambient dimension (≤ 3).
    pub fn from_vertices(vertices: &[Vec<f64>]) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::domain("polytope needs at least one vertex"));
        }
        let dim = vertices[0].len();
        if dim == 0 || dim > 3 {
            return Err(Error::domain("polytope dimension must be 1, 2 or 3"));
        }
        let rat: Vec<Vec<Rat>> = vertices
            .iter()
            .map(|v| v.iter().map(|&c| rat_from_f64(c)).collect::<Result<Vec<Rat>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rational_vertices(rat, dim)
    }

    fn from_rational_vertices(points: Vec<Vec<Rat>>, dim: usize) -> Result<Self> {
        let scaled_all = ScaledPoints::from_rational(&points, dim)?;
        let hull = exact::int_hull(&scaled_all.pts, dim)?;
        let scaled =
            ScaledPoints { scale: scaled_all.scale.clone(), pts: hull.vertices.clone(), dim };
        let verts: Vec<Vec<Rat>> =
            hull.vertices.iter().map(|v| scaled.rational_vertex(v)).collect();
        Ok(Polytope { dim, verts, scaled, hull })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Hull vertices in canonical (lexicographic) order.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        self.verts
            .iter()
            .map(|v| v.iter().map(rat_to_f64).collect())
            .collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.verts.len()
    }

    /// Facet halfspaces with primitive integer normals; offsets are in
    /// true (unscaled) coordinates.
    pub fn halfspaces(&self) -> Vec<Halfspace> {
        self.hull
            .facets
            .iter()
            .map(|f| Halfspace {
                normal: f.normal.iter().map(|&x| x as f64).collect(),
                offset: rat_to_f64(&self.facet_offset(f)),
            })
            .collect()
    }

    fn facet_offset(&self, f: &exact::IntFacet) -> Rat {
        // normal·(x·scale) ≤ offset ⇒ normal·x ≤ offset/scale
        Rat::new(f.offset.into(), self.scaled.scale.clone())
    }

    fn cross_validate_halfspaces(&self, provided: &[Halfspace]) -> Result<()> {
        // each provided inequality must hold on every vertex, and each
        // hull facet must appear among the provided ones (redundant
        // extras are allowed, cuts are not)
        let mut provided_exact: Vec<(Vec<i128>, Rat)> = Vec::new();
        for hs in provided {
            if hs.normal.len() != self.dim {
                return Err(Error::domain("halfspace normal has wrong dimension"));
            }
            let n_rat: Vec<Rat> =
                hs.normal.iter().map(|&c| rat_from_f64(c)).collect::<Result<Vec<_>>>()?;
            let o_rat = rat_from_f64(hs.offset)?;
            let (n_prim, factor) = primitive_direction(&n_rat)?;
            provided_exact.push((n_prim, o_rat * factor));
        }
        for (n, o) in &provided_exact {
            for v in &self.verts {
                let lhs: Rat = n
                    .iter()
                    .zip(v.iter())
                    .map(|(&ni, vi)| Rat::from_integer(ni.into()) * vi)
                    .sum();
                if &lhs > o {
                    return Err(Error::domain(
                        "halfspace list cuts off a vertex: V- and H-representations disagree",
                    ));
                }
            }
        }
        for f in &self.hull.facets {
            let off = self.facet_offset(f);
            let found = provided_exact
                .iter()
                .any(|(n, o)| *n == f.normal && *o == off);
            if !found {
                return Err(Error::domain(format!(
                    "halfspace list is missing the facet with normal {:?}: V- and H-representations disagree",
                    f.normal
                )));
            }
        }
        Ok(())
    }

    /// Exact Euclidean volume.
    pub fn volume_exact(&self) -> Result<Rat> {
        let scaled_vol = self.hull.volume()?;
        let scale_pow =
            num_traits::pow::pow(Rat::from_integer(self.scaled.scale.clone()), self.dim);
        Ok(scaled_vol / scale_pow)
    }

    /// Convex hull of pairwise vertex sums, canonicalized.
    pub fn minkowski_sum(&self, other: &Polytope) -> Result<Polytope> {
        if self.dim != other.dim {
            return Err(Error::domain("Minkowski sum needs equal ambient dimensions"));
        }
        let mut sums = Vec::with_capacity(self.verts.len() * other.verts.len());
        for a in &self.verts {
            for b in &other.verts {
                sums.push(a.iter().zip(b.iter()).map(|(x, y)| x + y).collect::<Vec<Rat>>());
            }
        }
        Self::from_rational_vertices(sums, self.dim)
    }

    /// Exact containment test: every vertex of `inner` satisfies every
    /// facet inequality of `self`.
    pub fn contains_polytope(&self, inner: &Polytope) -> bool {
        if self.dim != inner.dim {
            return false;
        }
        for f in &self.hull.facets {
            let off = self.facet_offset(f);
            for v in &inner.verts {
                let lhs: Rat = f
                    .normal
                    .iter()
                    .zip(v.iter())
                    .map(|(&ni, vi)| Rat::from_integer(ni.into()) * vi)
                    .sum();
                if lhs > off {
                    return false;
                }
            }
        }
        true
    }

    /// Dilate by a rational factor t ≥ 0 (test helper for
    /// multilinearity checks).
    pub fn scale(&self, t: f64) -> Result<Polytope> {
        let t = rat_from_f64(t)?;
        if t.is_negative() {
            return Err(Error::domain("scale factor must be nonnegative"));
        }
        let pts: Vec<Vec<Rat>> = self
            .verts
            .iter()
            .map(|v| v.iter().map(|c| c * t.clone()).collect())
            .collect();
        Self::from_rational_vertices(pts, self.dim)
    }

    fn facet_normals(&self) -> Vec<Vec<i128>> {
        let mut ns: Vec<Vec<i128>> = self.hull.facets.iter().map(|f| f.normal.clone()).collect();
        ns.sort();
        ns
    }
}

/// Primitive integer direction of a rational vector, with the factor
/// such that primitive = factor · input.
fn primitive_direction(v: &[Rat]) -> Result<(Vec<i128>, Rat)> {
    use num_integer::Integer;
    if v.iter().all(|c| c.is_zero()) {
        return Err(Error::domain("zero vector has no direction"));
    }
    let mut scale = num_bigint::BigInt::from(1);
    for c in v {
        scale = scale.lcm(c.denom());
    }
    let ints: Vec<num_bigint::BigInt> =
        v.iter().map(|c| (c * Rat::from_integer(scale.clone())).to_integer()).collect();
    let mut g = num_bigint::BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    let prim: Vec<i128> = ints
        .iter()
        .map(|x| {
            (x / &g)
                .to_i128()
                .ok_or_else(|| Error::numeric("direction entries exceed the exact-kernel range"))
        })
        .collect::<Result<Vec<_>>>()?;
    let factor = Rat::new(scale, g);
    Ok((prim, factor))
}

/// Mixed volume V(P[k], Q[n−k]): the coefficient in
/// Vol(sP + tQ) = Σ_k C(n,k)·V(P[k],Q[n−k])·s^k·t^{n−k}, recovered by
/// exact polynomial interpolation of Vol(jP + Q) at j = 0..n.
pub fn mixed_volume(p: &Polytope, q: &Polytope, k: usize) -> Result<f64> {
    Ok(rat_to_f64(&mixed_volume_exact(p, q, k)?))
}

pub(crate) fn mixed_volume_exact(p: &Polytope, q: &Polytope, k: usize) -> Result<Rat> {
    if p.dim != q.dim {
        return Err(Error::domain("mixed volume needs equal ambient dimensions"));
    }
    let n = p.dim;
    if k > n {
        return Err(Error::domain(format!("mixed volume index k = {k} exceeds n = {n}")));
    }
    let mut samples: Vec<Rat> = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let v = exact::minkowski_volume(&p.scaled, &q.scaled, j as i128).map_err(|e| {
            Error::numeric(format!(
                "mixed-volume interpolation failed at sample j = {j}: {e}; samples so far: {:?}",
                samples.iter().map(rat_to_f64).collect::<Vec<_>>()
            ))
        })?;
        samples.push(v);
    }
    // rows: Σ_k C(n,k)·V_k·j^k = Vol(jP + Q)
    let m: Vec<Vec<Rat>> = (0..=n)
        .map(|j| {
            (0..=n)
                .map(|kk| {
                    rat_from_u64(exact::binomial(n, kk))
                        * num_traits::pow::pow(rat_from_u64(j as u64), kk)
                })
                .collect()
        })
        .collect();
    let coeffs = exact::solve_rational(m, samples)?;
    Ok(coeffs[k].clone())
}

/// Intersection number ∫ χ^a ∧ α^b = n!·V(P_χ[a], P_α[b]) on the toric
/// manifold of the common normal fan; errors when the fans differ.
pub fn intersection_number(p_chi: &Polytope, p_alpha: &Polytope, a: usize, b: usize) -> Result<f64> {
    Ok(rat_to_f64(&intersection_number_exact(p_chi, p_alpha, a, b)?))
}

fn intersection_number_exact(
    p_chi: &Polytope,
    p_alpha: &Polytope,
    a: usize,
    b: usize,
) -> Result<Rat> {
    let n = p_chi.dim;
    if a + b != n {
        return Err(Error::domain(format!("need a + b = n, got {a} + {b} ≠ {n}")));
    }
    check_compatible_fans(p_chi, p_alpha)?;
    let mv = mixed_volume_exact(p_chi, p_alpha, a)?;
    Ok(mv * rat_from_u64(factorial(n)))
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product::<u64>().max(1)
}

fn check_compatible_fans(p: &Polytope, q: &Polytope) -> Result<()> {
    if p.dim != q.dim {
        return Err(Error::domain("polytopes live in different ambient dimensions"));
    }
    if p.facet_normals() != q.facet_normals() {
        return Err(Error::domain(
            "incompatible normal fans: the classes do not live on one toric manifold",
        ));
    }
    Ok(())
}

/// A proper face shared between two same-fan polytopes, identified by
/// the primitive outward normals of the facets containing it.
#[derive(Debug, Clone)]
pub struct Face {
    pub codim: usize,
    /// Sorted primitive normals of the supporting facets.
    pub key: Vec<Vec<i128>>,
    /// Vertex ids into the owning polytope.
    pub vertex_ids: Vec<usize>,
}

/// All faces of codimension 1..n−1 (subvarieties of dimension ≥ 1),
/// sorted by codimension then by normal key.
pub fn proper_faces(p: &Polytope) -> Vec<Face> {
    let mut faces: Vec<Face> = Vec::new();
    for f in &p.hull.facets {
        faces.push(Face { codim: 1, key: vec![f.normal.clone()], vertex_ids: f.vertices.clone() });
    }
    if p.dim == 3 {
        let fs = &p.hull.facets;
        let mut seen: Vec<Vec<usize>> = Vec::new();
        for i in 0..fs.len() {
            for j in (i + 1)..fs.len() {
                let shared: Vec<usize> = fs[i]
                    .vertices
                    .iter()
                    .copied()
                    .filter(|v| fs[j].vertices.contains(v))
                    .collect();
                if shared.len() >= 2 && !seen.contains(&shared) {
                    seen.push(shared.clone());
                    // every facet containing the whole edge supports it
                    let mut key: Vec<Vec<i128>> = fs
                        .iter()
                        .filter(|f| shared.iter().all(|v| f.vertices.contains(v)))
                        .map(|f| f.normal.clone())
                        .collect();
                    key.sort();
                    faces.push(Face { codim: 2, key, vertex_ids: shared });
                }
            }
        }
    }
    faces.sort_by(|a, b| (a.codim, &a.key).cmp(&(b.codim, &b.key)));
    faces
}

/// Restrict a polytope to one of its faces, in lattice-normalized
/// coordinates of the face's affine span. The same `basis` must be
/// used for corresponding faces of both polytopes so mixed volumes of
/// the restrictions are comparable.
struct FaceBasis {
    origin: Vec<Rat>,
    dirs: Vec<Vec<i128>>,
}

fn face_basis(p: &Polytope, face: &Face) -> Result<FaceBasis> {
    let n = p.dim;
    let pdim = n - face.codim;
    let verts: Vec<&Vec<Rat>> = face.vertex_ids.iter().map(|&i| &p.verts[i]).collect();
    let origin = verts[0].clone();
    match pdim {
        1 => {
            let other = verts
                .iter()
                .find(|v| ***v != origin)
                .ok_or_else(|| Error::domain("edge face has a single vertex"))?;
            let diff: Vec<Rat> = other.iter().zip(origin.iter()).map(|(a, b)| a - b).collect();
            let (d, _) = primitive_direction(&diff)?;
            Ok(FaceBasis { origin, dirs: vec![d] })
        }
        2 => {
            // facet of a 3-polytope: lattice basis of the kernel of the
            // primitive facet normal
            if face.key.len() != 1 {
                return Err(Error::domain("codim-1 face key must be a single normal"));
            }
            let [t1, t2] = exact::kernel_basis_3d(&face.key[0])?;
            Ok(FaceBasis { origin, dirs: vec![t1, t2] })
        }
        _ => Err(Error::domain("face restriction implemented for face dimensions 1 and 2")),
    }
}

fn restrict_to_face(p: &Polytope, face: &Face, basis: &FaceBasis) -> Result<Polytope> {
    let pdim = basis.dirs.len();
    let mut coords: Vec<Vec<Rat>> = Vec::with_capacity(face.vertex_ids.len());
    for &vi in &face.vertex_ids {
        let diff: Vec<Rat> = p.verts[vi]
            .iter()
            .zip(basis.origin.iter())
            .map(|(a, b)| a - b)
            .collect();
        coords.push(solve_in_basis(&diff, &basis.dirs, pdim)?);
    }
    Polytope::from_rational_vertices(coords, pdim)
}

/// Solve diff = Σ w_i · dirs_i exactly (the system is consistent by
/// construction; pick an invertible coordinate subset).
fn solve_in_basis(diff: &[Rat], dirs: &[Vec<i128>], pdim: usize) -> Result<Vec<Rat>> {
    let n = diff.len();
    match pdim {
        1 => {
            let d = &dirs[0];
            let i = (0..n)
                .find(|&i| d[i] != 0)
                .ok_or_else(|| Error::domain("zero direction"))?;
            let w = diff[i].clone() / Rat::from_integer(d[i].into());
            Ok(vec![w])
        }
        2 => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let det = dirs[0][i] * dirs[1][j] - dirs[0][j] * dirs[1][i];
                    if det != 0 {
                        let det = Rat::from_integer(det.into());
                        let w1 = (diff[i].clone() * Rat::from_integer(dirs[1][j].into())
                            - diff[j].clone() * Rat::from_integer(dirs[1][i].into()))
                            / det.clone();
                        let w2 = (diff[j].clone() * Rat::from_integer(dirs[0][i].into())
                            - diff[i].clone() * Rat::from_integer(dirs[0][j].into()))
                            / det;
                        return Ok(vec![w1, w2]);
                    }
                }
            }
            Err(Error::domain("face basis is singular"))
        }
        _ => Err(Error::domain("face dimension must be 1 or 2")),
    }
}

/// Per-face margin ∫_V cχ^p − pχ^{p−1}∧α.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FaceMargin {
    pub id: String,
    pub dim: usize,
    pub margin: f64,
}

/// Solvability verdict for the pair ([χ], [α]) at level c.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    /// Equality in the global integral and all face margins positive:
    /// the J-equation Λ_ω α = c is solvable.
    #[serde(rename = "solvable-J")]
    SolvableJ,
    /// Strict global inequality with positive face margins: the
    /// twisted equation Λ_ω α + d·αⁿ/ωⁿ = c is solvable for some d ≥ 0.
    #[serde(rename = "solvable-twisted")]
    SolvableTwisted,
    /// Some margin fails; `witness` names the offending face ("M" for
    /// the global integral itself).
    #[serde(rename = "unstable")]
    Unstable { witness: String },
}

/// Output of the face-wise stability test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    /// The level constant, either supplied or computed from the
    /// equality case of the global integral.
    pub c: f64,
    /// ∫_M cχⁿ − nχ^{n−1}∧α.
    pub global: f64,
    pub margins: Vec<FaceMargin>,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl StabilityReport {
    /// CSV table: face id, dimension, raw margin.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("face,dim,margin\n");
        for m in &self.margins {
            out.push_str(&format!("{},{},{:.16e}\n", m.id, m.dim, m.margin));
        }
        out
    }
}

/// Optional display names for facets, matched by primitive outward
/// normal.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetLabel {
    pub name: String,
    pub normal: Vec<f64>,
}

/// Margins are strictly positive only above this threshold.
const MARGIN_TOL: f64 = 1e-9;
/// Relative tolerance for "equality" of the global integral.
const GLOBAL_EQ_TOL: f64 = 1e-10;

/// Face-wise stability test for the classes encoded by (P_χ, P_α).
///
/// When `c` is `None` it is computed exactly from the equality case
/// c·∫χⁿ = n·∫χ^{n−1}∧α, making the global value identically zero; a
/// supplied `c` exercises the inequality branch.
pub fn stability_report(
    p_chi: &Polytope,
    p_alpha: &Polytope,
    c: Option<f64>,
    labels: &[FacetLabel],
) -> Result<StabilityReport> {
    let n = p_chi.dim;
    check_compatible_fans(p_chi, p_alpha)?;
    let vol_chi = p_chi.volume_exact()?;
    if vol_chi.is_zero() {
        return Err(Error::domain("χ-polytope must be full-dimensional"));
    }
    let chi_mixed = mixed_volume_exact(p_chi, p_alpha, n - 1)?;
    let n_rat = rat_from_u64(n as u64);
    let c_exact: Rat = match c {
        Some(v) => rat_from_f64(v)?,
        None => n_rat.clone() * chi_mixed.clone() / vol_chi.clone(),
    };
    let fact = rat_from_u64(factorial(n));
    let global =
        fact.clone() * (c_exact.clone() * vol_chi - n_rat * chi_mixed);

    // resolve labels to primitive normals once
    let mut label_map: Vec<(Vec<i128>, String)> = Vec::new();
    for l in labels {
        let n_rat: Vec<Rat> =
            l.normal.iter().map(|&x| rat_from_f64(x)).collect::<Result<Vec<_>>>()?;
        let (prim, _) = primitive_direction(&n_rat)?;
        label_map.push((prim, l.name.clone()));
    }
    let name_of = |key: &[Vec<i128>]| -> String {
        key.iter()
            .map(|normal| {
                label_map
                    .iter()
                    .find(|(n, _)| n == normal)
                    .map(|(_, name)| name.clone())
                    .unwrap_or_else(|| {
                        format!(
                            "f[{}]",
                            normal.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
                        )
                    })
            })
            .collect::<Vec<_>>()
            .join("&")
    };

    let chi_faces = proper_faces(p_chi);
    let alpha_faces = proper_faces(p_alpha);
    let mut margins = Vec::with_capacity(chi_faces.len());
    for cf in &chi_faces {
        let af = alpha_faces
            .iter()
            .find(|af| af.codim == cf.codim && af.key == cf.key)
            .ok_or_else(|| {
                Error::domain(format!(
                    "incompatible normal fans: no matching face for key {:?}",
                    cf.key
                ))
            })?;
        let p = n - cf.codim;
        let basis = face_basis(p_chi, cf)?;
        let chi_f = restrict_to_face(p_chi, cf, &basis)?;
        let alpha_f = restrict_to_face(p_alpha, af, &basis)?;
        let p_rat = rat_from_u64(p as u64);
        let pfact = rat_from_u64(factorial(p));
        // ∫_V cχ^p − pχ^{p−1}∧α = p!·(c·Vol(χ_F) − p·V(χ_F[p−1], α_F[1]))
        let margin = pfact
            * (c_exact.clone() * chi_f.volume_exact()?
                - p_rat * mixed_volume_exact(&chi_f, &alpha_f, p - 1)?);
        margins.push(FaceMargin {
            id: name_of(&cf.key),
            dim: p,
            margin: rat_to_f64(&margin),
        });
    }

    let global_f = rat_to_f64(&global);
    let c_f = rat_to_f64(&c_exact);
    let scale = 1.0 + global_f.abs().max(c_f.abs());
    let verdict = if let Some(worst) = margins
        .iter()
        .filter(|m| m.margin <= MARGIN_TOL)
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
    {
        Verdict::Unstable { witness: worst.id.clone() }
    } else if global_f < -GLOBAL_EQ_TOL * scale {
        Verdict::Unstable { witness: "M".to_string() }
    } else if global_f.abs() <= GLOBAL_EQ_TOL * scale {
        Verdict::SolvableJ
    } else {
        Verdict::SolvableTwisted
    };

    Ok(StabilityReport { c: c_f, global: global_f, margins, verdict })
}

/// Euclidean volume of the polytope.
pub fn volume(p: &Polytope) -> Result<f64> {
    Ok(rat_to_f64(&p.volume_exact()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use shapes;

    #[test]
    fn volumes_of_basic_shapes() {
        let square = shapes::unit_box(2).unwrap();
        assert_eq!(volume(&square).unwrap(), 1.0);
        let simplex = shapes::simplex2(3.0).unwrap();
        assert_eq!(volume(&simplex).unwrap(), 4.5);
        let doubled = square.minkowski_sum(&square).unwrap();
        assert_eq!(volume(&doubled).unwrap(), 4.0);
    }

    #[test]
    fn minkowski_sum_shapes() {
        let square = shapes::unit_box(2).unwrap();
        let point = Polytope::from_vertices(&[vec![2.0, 5.0]]);
        // a single point is not full-dimensional
        assert!(point.is_err());

        // translate: P + {pt} via a degenerate... use interval instead
        let tri = shapes::simplex2(1.0).unwrap();
        let pent = tri.minkowski_sum(&square).unwrap();
        assert_eq!(pent.vertex_count(), 5);
        assert_eq!(volume(&pent).unwrap(), 3.5);

        let sum = square.minkowski_sum(&square).unwrap();
        let verts = sum.vertices();
        assert!(verts.contains(&vec![2.0, 2.0]));
        assert!(verts.contains(&vec![0.0, 0.0]));
    }

    #[test]
    fn mixed_volume_oracle_cases() {
        let p = shapes::unit_box(2).unwrap();
        // diagonal case: V(P[k], P[n-k]) = Vol(P)
        for k in 0..=2 {
            assert!((mixed_volume(&p, &p, k).unwrap() - 1.0).abs() < 1e-14);
        }
        // Vol(s[0,1]² + t([0,2]×[0,1])) = (s+2t)(s+t): coefficient of
        // st is 3 = 2·V(P[1],Q[1])
        let q = shapes::rect2(2.0, 1.0).unwrap();
        assert!((mixed_volume(&p, &q, 1).unwrap() - 1.5).abs() < 1e-14);
        assert!((mixed_volume(&p, &q, 2).unwrap() - volume(&p).unwrap()).abs() < 1e-14);
        assert!((mixed_volume(&p, &q, 0).unwrap() - volume(&q).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn mixed_volume_symmetry_and_scaling() {
        let p = shapes::simplex2(2.0).unwrap();
        let q = shapes::rect2(1.0, 3.0).unwrap();
        let v1 = mixed_volume(&p, &q, 1).unwrap();
        let v1_swapped = mixed_volume(&q, &p, 1).unwrap();
        assert!((v1 - v1_swapped).abs() <= 1e-9 * v1.abs());
        // V((tP)[k], Q[n-k]) = t^k V(P[k], Q[n-k])
        let tp = p.scale(2.5).unwrap();
        for k in 0..=2 {
            let lhs = mixed_volume(&tp, &q, k).unwrap();
            let rhs = 2.5f64.powi(k as i32) * mixed_volume(&p, &q, k).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0), "k={k}");
        }
    }

    #[test]
    fn intersection_numbers_on_projective_plane() {
        // χ = a·H, α = H: ∫χ² = a², ∫χ∧α = a
        let a = 3.0;
        let chi = shapes::simplex2(a).unwrap();
        let alpha = shapes::simplex2(1.0).unwrap();
        assert!((intersection_number(&chi, &alpha, 2, 0).unwrap() - a * a).abs() < 1e-12);
        assert!((intersection_number(&chi, &alpha, 1, 1).unwrap() - a).abs() < 1e-12);
        // k = 0 case: n!·Vol(P_α)
        assert!((intersection_number(&chi, &alpha, 0, 2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn incompatible_fans_rejected() {
        let chi = shapes::simplex2(1.0).unwrap();
        let alpha = shapes::unit_box(2).unwrap();
        assert!(intersection_number(&chi, &alpha, 1, 1).is_err());
    }

    #[test]
    fn stability_on_projective_plane() {
        let a = 3.0;
        let chi = shapes::simplex2(a).unwrap();
        let alpha = shapes::simplex2(1.0).unwrap();
        let report = stability_report(&chi, &alpha, None, &[]).unwrap();
        assert!((report.c - 2.0 / a).abs() < 1e-12);
        assert_eq!(report.verdict, Verdict::SolvableJ);
        assert_eq!(report.margins.len(), 3);
        for m in &report.margins {
            // each line has χ-degree a: margin c·a − 1 = 1
            assert!((m.margin - 1.0).abs() < 1e-12);
            assert_eq!(m.dim, 1);
        }
        assert!(report.global.abs() < 1e-14);
    }

    #[test]
    fn stability_blowup_unstable_witness() {
        let chi = shapes::corner_cut_simplex(1.0, 0.1).unwrap();
        let alpha = shapes::corner_cut_simplex(1.0, 0.5).unwrap();
        let labels = vec![FacetLabel { name: "E".into(), normal: vec![-1.0, -1.0] }];
        let report = stability_report(&chi, &alpha, None, &labels).unwrap();
        // c = 2(1−be)/(1−b²) = 190/99, E-margin = c·b − e = −61/198
        assert!((report.c - 190.0 / 99.0).abs() < 1e-12);
        let e_margin = report.margins.iter().find(|m| m.id == "E").unwrap();
        assert!((e_margin.margin - (-61.0 / 198.0)).abs() < 1e-12);
        assert_eq!(report.verdict, Verdict::Unstable { witness: "E".into() });
    }

    #[test]
    fn stability_blowup_stable_case() {
        let chi = shapes::corner_cut_simplex(1.0, 0.1).unwrap();
        let report = stability_report(&chi, &chi, None, &[]).unwrap();
        assert!((report.c - 2.0).abs() < 1e-12);
        assert_eq!(report.verdict, Verdict::SolvableJ);
        let e_margin = report
            .margins
            .iter()
            .find(|m| m.id == "f[-1,-1]")
            .expect("cut-corner facet");
        assert!((e_margin.margin - 0.1).abs() < 1e-12);
    }

    #[test]
    fn supplied_c_moves_the_verdict() {
        let chi = shapes::simplex2(1.0).unwrap();
        // larger c: strict global inequality, positive margins
        let report = stability_report(&chi, &chi, Some(2.5), &[]).unwrap();
        assert_eq!(report.verdict, Verdict::SolvableTwisted);
        assert!(report.global > 0.0);
        // too-small c: the global integral itself fails
        let report = stability_report(&chi, &chi, Some(1.0), &[]).unwrap();
        assert!(matches!(report.verdict, Verdict::Unstable { .. }));
    }

    #[test]
    fn polytope_json_round_trip() {
        let p = shapes::corner_cut_simplex(1.0, 0.25).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let q: Polytope = serde_json::from_str(&text).unwrap();
        assert_eq!(p.vertices(), q.vertices());
        // halfspaces in the JSON are cross-validated on the way in
        let bad = r#"{"vertices": [[0,0],[1,0],[0,1]],
                      "halfspaces": [{"normal": [1,0], "offset": 0.5}]}"#;
        assert!(serde_json::from_str::<Polytope>(bad).is_err());
    }

    #[test]
    fn cube_faces_in_three_dimensions() {
        let cube = shapes::unit_box(3).unwrap();
        let faces = proper_faces(&cube);
        let facets = faces.iter().filter(|f| f.codim == 1).count();
        let edges = faces.iter().filter(|f| f.codim == 2).count();
        assert_eq!(facets, 6);
        assert_eq!(edges, 12);

        // self-pairing: c = 3·∫χ²∧χ/∫χ³ = 3, all margins positive
        let report = stability_report(&cube, &cube, None, &[]).unwrap();
        assert!((report.c - 3.0).abs() < 1e-12);
        assert_eq!(report.verdict, Verdict::SolvableJ);
        // facet margins: 2!(3·1 − 2·1) = 2; edge margins: 3·1 − 1 = 2
        for m in &report.margins {
            assert!((m.margin - 2.0).abs() < 1e-12, "{m:?}");
        }
    }
}
