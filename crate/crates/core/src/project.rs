//! Projection of a tropical type along a ray: the induced relative type on
//! the quotient complex, and the piecewise-linear lift function alpha whose
//! overgraph cone parameterizes lifts back to the original complex.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::basic_cone::basic_cone;
use crate::complex::{ConeComplex, ConeId};
use crate::cones::Cone;
use crate::error::{Error, Result};
use crate::lattice::{smith_normal_form, IntMatrix};
use crate::types::{DecoratedType, TropicalType};

/// The relative type induced by projecting along a ray, plus the quotient
/// bookkeeping needed to talk about lifts.
#[derive(Clone, Debug)]
pub struct ProjectedType {
    pub complex: ConeComplex,
    pub decorated: DecoratedType,
    /// Per leg: does the projected contact order lie in the projected cone?
    pub leg_positive: Vec<bool>,
    /// Per original cone id: the image of the ray generator.
    pub ray_vectors: BTreeMap<ConeId, Vec<BigInt>>,
    /// Per original cone id: quotient map `N -> N/Z v` as an (r-1) x r matrix.
    pub projections: BTreeMap<ConeId, IntMatrix>,
    /// Per original cone id: a section of the quotient, r x (r-1).
    pub sections: BTreeMap<ConeId, IntMatrix>,
}

impl ProjectedType {
    pub fn all_legs_positive(&self) -> bool {
        self.leg_positive.iter().all(|&b| b)
    }
}

/// Quotient data for one lattice: `pi * v = 0`, `pi` surjective,
/// `pi * s = id`.
pub fn quotient_by_primitive(v: &[BigInt]) -> (IntMatrix, IntMatrix) {
    let r = v.len();
    let col = IntMatrix::from_columns(r, &[v.to_vec()]);
    let snf = smith_normal_form(&col);
    debug_assert_eq!(snf.rank, 1);
    debug_assert!(snf.d.at(0, 0).is_one(), "ray generator must be primitive");
    // U v = e1: projection drops the first row of U, section keeps the
    // trailing columns of U^-1
    let mut pi = IntMatrix::zero(r - 1, r);
    let mut s = IntMatrix::zero(r, r - 1);
    for i in 1..r {
        for j in 0..r {
            pi.set(i - 1, j, snf.u.at(i, j).clone());
            s.set(j, i - 1, snf.u_inv.at(j, i).clone());
        }
    }
    (pi, s)
}

/// Project a decorated type along a one-dimensional cone `ray` that is a
/// face of every cone labeling the type. Produces the quotient complex on
/// the star of the ray, the induced relative type, and a positivity report
/// for the projected leg contact orders.
pub fn project_type_along_ray(
    complex: &ConeComplex,
    t: &DecoratedType,
    ray: &str,
) -> Result<ProjectedType> {
    let ray_cone = complex
        .cone(ray)
        .ok_or_else(|| Error::InvalidType(format!("unknown ray `{ray}`")))?;
    if ray_cone.ambient_rank() != 1 {
        return Err(Error::InvalidType(format!("`{ray}` is not a ray")));
    }
    let ray_gen = ray_cone.generators()[0].clone();
    // all labels must contain the ray as a face
    for id in t
        .base
        .sigma_v
        .iter()
        .chain(t.base.sigma_e.iter())
        .chain(t.base.sigma_l.iter())
    {
        if !complex.has_face_map(ray, id) {
            return Err(Error::MissingFaceMap { from: ray.into(), to: id.clone() });
        }
    }

    // the star of the ray becomes the quotient complex
    let mut ray_vectors = BTreeMap::new();
    let mut projections = BTreeMap::new();
    let mut sections = BTreeMap::new();
    let mut quotient = ConeComplex::new();
    let star: Vec<ConeId> = complex
        .cone_ids()
        .filter(|id| complex.has_face_map(ray, id))
        .cloned()
        .collect();
    for id in &star {
        let cone = complex.cone(id).unwrap();
        let v = complex.face_map(ray, id)?.mul_vec(&ray_gen);
        let (pi, s) = quotient_by_primitive(&v);
        let gens: Vec<Vec<BigInt>> = cone.generators().iter().map(|g| pi.mul_vec(g)).collect();
        quotient.add_cone(id.clone(), Cone::from_generators(pi.rows(), gens))?;
        ray_vectors.insert(id.clone(), v);
        projections.insert(id.clone(), pi);
        sections.insert(id.clone(), s);
    }
    for rel in complex.relations() {
        if !projections.contains_key(&rel.face) || !projections.contains_key(&rel.cone) {
            continue;
        }
        // induced quotient map: pi_cone . map . section_face; well-defined
        // when the face map matches the two ray images
        let vf = &ray_vectors[&rel.face];
        let vc = &ray_vectors[&rel.cone];
        if &rel.map.mul_vec(vf) != vc {
            return Err(Error::InvalidComplex(format!(
                "face map `{}` -> `{}` does not preserve the ray",
                rel.face, rel.cone
            )));
        }
        let induced = projections[&rel.cone].mul(&rel.map).mul(&sections[&rel.face]);
        quotient.add_face_relation(rel.face.clone(), rel.cone.clone(), induced)?;
    }

    // push the type through the quotient
    let mut u_e = Vec::new();
    for (i, u) in t.base.u_e.iter().enumerate() {
        u_e.push(projections[&t.base.sigma_e[i]].mul_vec(u));
    }
    let mut u_l = Vec::new();
    let mut leg_positive = Vec::new();
    for (i, u) in t.base.u_l.iter().enumerate() {
        let img = projections[&t.base.sigma_l[i]].mul_vec(u);
        leg_positive.push(quotient.cone(&t.base.sigma_l[i]).unwrap().contains(&img, false));
        u_l.push(img);
    }
    let base = TropicalType::new(
        t.base.graph.clone(),
        t.base.sigma_v.clone(),
        t.base.sigma_e.clone(),
        t.base.sigma_l.clone(),
        u_e,
        u_l,
        &quotient,
    )?;
    let decorated = DecoratedType::new(base, t.classes.clone())?;
    Ok(ProjectedType {
        complex: quotient,
        decorated,
        leg_positive,
        ray_vectors,
        projections,
        sections,
    })
}

/// The PL lift function and its overgraph cone.
#[derive(Clone, Debug)]
pub struct LiftCone {
    /// Linear functionals on the basis coordinates of the relative basic
    /// cone; alpha is their supremum clamped at zero.
    pub functionals: Vec<Vec<BigRational>>,
    /// `{(s, r) : s in tau-bar, r >= alpha(s)}` in `Z^{dim+1}`.
    pub cone: Cone,
    pub dim: usize,
}

impl LiftCone {
    pub fn alpha(&self, s: &[BigInt]) -> BigRational {
        let mut best = BigRational::zero();
        for f in &self.functionals {
            let val: BigRational = f
                .iter()
                .zip(s)
                .map(|(a, b)| a * BigRational::from(b.clone()))
                .sum();
            if val > best {
                best = val;
            }
        }
        best
    }
}

/// Build the lift function `alpha` of a projection: the supremum of the
/// normalized functionals `delta - n_F` over the vertices, pulled back
/// through the evaluation maps of the relative basic cone, together with
/// the cone of pairs `(s, r)` with `r >= alpha(s)`.
///
/// The original complex must carry `delta`; facets containing the ray or
/// lying in the central fibre are skipped per the normalization rule.
pub fn relative_lift_cone(
    complex: &ConeComplex,
    t: &DecoratedType,
    projected: &ProjectedType,
) -> Result<LiftCone> {
    if !complex.has_delta() {
        return Err(Error::DeltaMissing);
    }
    let relative = basic_cone(&projected.decorated.base, &projected.complex)?;
    let mut functionals: Vec<Vec<BigRational>> = Vec::new();
    for v in 0..t.base.graph.n_vertices() {
        let sigma = &t.base.sigma_v[v];
        let cone = complex.cone(sigma).unwrap();
        let delta = complex.delta(sigma).ok_or(Error::DeltaMissing)?;
        let vx = &projected.ray_vectors[sigma];
        let d_on_ray: BigInt = delta.iter().zip(vx).map(|(a, b)| a * b).sum();
        if d_on_ray.is_zero() {
            return Err(Error::NotOverBase(format!(
                "delta vanishes on the ray inside `{sigma}`"
            )));
        }
        for n in cone.facet_normals() {
            let n_on_ray: BigInt = n.iter().zip(vx).map(|(a, b)| a * b).sum();
            if n_on_ray.is_zero() {
                // facet contains the ray
                continue;
            }
            // delta restricted to the facet must be nonzero: some generator
            // tight on n has nonzero delta
            let surjective = cone.generators().iter().any(|g| {
                let ng: BigInt = n.iter().zip(g).map(|(a, b)| a * b).sum();
                let dg: BigInt = delta.iter().zip(g).map(|(a, b)| a * b).sum();
                ng.is_zero() && !dg.is_zero()
            });
            if !surjective {
                continue;
            }
            // normalize n so it agrees with delta on the ray:
            // g = delta - (d_on_ray / n_on_ray) n, vanishing on v_x
            let lambda = BigRational::new(d_on_ray.clone(), n_on_ray.clone());
            let g: Vec<BigRational> = delta
                .iter()
                .zip(n)
                .map(|(d, ni)| BigRational::from(d.clone()) - &lambda * BigRational::from(ni.clone()))
                .collect();
            // descend through the section and pull back through ev_v
            let s_mat = &projected.sections[sigma];
            let g_bar: Vec<BigRational> = (0..s_mat.cols())
                .map(|j| {
                    (0..s_mat.rows())
                        .map(|i| &g[i] * BigRational::from(s_mat.at(i, j).clone()))
                        .sum()
                })
                .collect();
            let ev = relative.ev_vertex(v);
            let functional: Vec<BigRational> = (0..relative.dim)
                .map(|j| {
                    (0..ev.rows())
                        .map(|i| &g_bar[i] * BigRational::from(ev.at(i, j).clone()))
                        .sum()
                })
                .collect();
            if !functionals.contains(&functional) {
                functionals.push(functional);
            }
        }
    }

    // overgraph cone in (s, r)
    let dim = relative.dim;
    let mut ineqs: Vec<Vec<BigInt>> = Vec::new();
    for row in relative.inequalities_on_basis() {
        let mut r = row.clone();
        r.push(BigInt::zero());
        ineqs.push(r);
    }
    let mut last = vec![BigInt::zero(); dim + 1];
    last[dim] = BigInt::one();
    ineqs.push(last);
    for f in &functionals {
        // r - f . s >= 0, cleared of denominators
        let mut lcm = BigInt::one();
        for x in f {
            lcm = lcm.lcm(x.denom());
        }
        let mut row: Vec<BigInt> = f
            .iter()
            .map(|x| -(x.numer() * (&lcm / x.denom())))
            .collect();
        row.push(lcm);
        ineqs.push(row);
    }
    let cone = Cone::from_inequalities(dim + 1, ineqs, vec![]);
    Ok(LiftCone { functionals, cone, dim })
}
