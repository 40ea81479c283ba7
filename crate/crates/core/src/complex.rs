//! Cone complexes: labeled cones, face relations with explicit lattice
//! inclusions, and an optional base map `delta` to the ray `Sigma(B)`.
//!
//! Each cone lives in its own intrinsic lattice `N_sigma` and is
//! full-dimensional there. Face relations carry the inclusion
//! `N_face -> N_cone` as an integer matrix; these must be saturated
//! embeddings and must commute with `delta` where present.

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::cones::Cone;
use crate::error::{Error, Result};
use crate::lattice::{kernel_lattice, smith_normal_form, IntMatrix};

pub type ConeId = String;

#[derive(Clone, Debug)]
pub struct FaceRelation {
    pub face: ConeId,
    pub cone: ConeId,
    pub map: IntMatrix,
}

#[derive(Clone, Debug, Default)]
pub struct ConeComplex {
    cones: BTreeMap<ConeId, Cone>,
    relations: Vec<FaceRelation>,
    /// Per-cone linear functional to `Z`, the tropicalized base map.
    delta: BTreeMap<ConeId, Vec<BigInt>>,
}

impl ConeComplex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_cone(&mut self, id: impl Into<ConeId>, cone: Cone) -> Result<()> {
        let id = id.into();
        if !cone.is_full_dimensional() {
            return Err(Error::InvalidComplex(format!(
                "cone `{id}` is not full-dimensional in its intrinsic lattice"
            )));
        }
        if self.cones.insert(id.clone(), cone).is_some() {
            return Err(Error::InvalidComplex(format!("duplicate cone id `{id}`")));
        }
        Ok(())
    }

    pub fn add_face_relation(
        &mut self,
        face: impl Into<ConeId>,
        cone: impl Into<ConeId>,
        map: IntMatrix,
    ) -> Result<()> {
        let face = face.into();
        let cone = cone.into();
        let f = self
            .cone(&face)
            .ok_or_else(|| Error::InvalidComplex(format!("unknown face id `{face}`")))?;
        let c = self
            .cone(&cone)
            .ok_or_else(|| Error::InvalidComplex(format!("unknown cone id `{cone}`")))?;
        if map.rows() != c.ambient_rank() || map.cols() != f.ambient_rank() {
            return Err(Error::InvalidComplex(format!(
                "face map `{face}` -> `{cone}` has shape {}x{}, expected {}x{}",
                map.rows(),
                map.cols(),
                c.ambient_rank(),
                f.ambient_rank()
            )));
        }
        // saturated embedding: all invariant factors are units
        let snf = smith_normal_form(&map);
        if snf.rank < map.cols() || snf.invariant_factors().iter().any(|d| d != &BigInt::from(1)) {
            return Err(Error::InvalidComplex(format!(
                "face map `{face}` -> `{cone}` is not a saturated lattice embedding"
            )));
        }
        for g in f.generators() {
            if !c.contains(&map.mul_vec(g), false) {
                return Err(Error::InvalidComplex(format!(
                    "face map `{face}` -> `{cone}` does not send the face into the cone"
                )));
            }
        }
        if let (Some(df), Some(dc)) = (self.delta.get(&face), self.delta.get(&cone)) {
            // delta must commute with the inclusion
            let df_m = IntMatrix::from_columns(map.cols(), std::slice::from_ref(df)).transpose();
            let dc_m = IntMatrix::from_columns(map.rows(), std::slice::from_ref(dc)).transpose();
            if dc_m.mul(&map) != df_m {
                return Err(Error::InvalidComplex(format!(
                    "delta does not commute with face map `{face}` -> `{cone}`"
                )));
            }
        }
        self.relations.push(FaceRelation { face, cone, map });
        Ok(())
    }

    pub fn set_delta(&mut self, id: impl Into<ConeId>, functional: Vec<BigInt>) -> Result<()> {
        let id = id.into();
        let c = self
            .cone(&id)
            .ok_or_else(|| Error::InvalidComplex(format!("unknown cone id `{id}`")))?;
        if functional.len() != c.ambient_rank() {
            return Err(Error::InvalidComplex(format!(
                "delta for `{id}` has wrong length"
            )));
        }
        self.delta.insert(id, functional);
        Ok(())
    }

    pub fn cone(&self, id: &str) -> Option<&Cone> {
        self.cones.get(id)
    }

    pub fn cone_ids(&self) -> impl Iterator<Item = &ConeId> {
        self.cones.keys()
    }

    pub fn relations(&self) -> &[FaceRelation] {
        &self.relations
    }

    pub fn has_delta(&self) -> bool {
        !self.delta.is_empty()
    }

    pub fn delta(&self, id: &str) -> Option<&Vec<BigInt>> {
        self.delta.get(id)
    }

    /// Maximal cone dimension, the dimension of the support.
    pub fn support_dim(&self) -> usize {
        self.cones.values().map(|c| c.ambient_rank()).max().unwrap_or(0)
    }

    /// The lattice inclusion `N_from -> N_to` obtained by composing face
    /// relations, BFS over the relation graph. Identity when `from == to`.
    pub fn face_map(&self, from: &str, to: &str) -> Result<IntMatrix> {
        let f = self.cone(from).ok_or_else(|| Error::MissingFaceMap {
            from: from.into(),
            to: to.into(),
        })?;
        if from == to {
            return Ok(IntMatrix::identity(f.ambient_rank()));
        }
        let mut queue: VecDeque<(ConeId, IntMatrix)> = VecDeque::new();
        let mut seen = std::collections::BTreeSet::new();
        queue.push_back((from.to_string(), IntMatrix::identity(f.ambient_rank())));
        seen.insert(from.to_string());
        while let Some((cur, acc)) = queue.pop_front() {
            for rel in &self.relations {
                if rel.face == cur && !seen.contains(&rel.cone) {
                    let next = rel.map.mul(&acc);
                    if rel.cone == to {
                        return Ok(next);
                    }
                    seen.insert(rel.cone.clone());
                    queue.push_back((rel.cone.clone(), next));
                }
            }
        }
        Err(Error::MissingFaceMap { from: from.into(), to: to.into() })
    }

    pub fn has_face_map(&self, from: &str, to: &str) -> bool {
        self.face_map(from, to).is_ok()
    }

    /// Smallest-rank cone into which all of `ids` admit face maps;
    /// ties broken by id. Errors when there is none.
    pub fn common_coface(&self, ids: &[&str]) -> Result<ConeId> {
        let mut best: Option<(usize, &ConeId)> = None;
        for (cid, cone) in &self.cones {
            if ids.iter().all(|id| self.has_face_map(id, cid)) {
                let key = (cone.ambient_rank(), cid);
                if best.map_or(true, |b| key < b) {
                    best = Some(key);
                }
            }
        }
        best.map(|(_, id)| id.clone())
            .ok_or_else(|| Error::NoCommonAmbient(format!("{:?}", ids)))
    }

    /// Basis of `ker(delta)` in the intrinsic lattice of `id`, as columns.
    pub fn fibre_lattice_basis(&self, id: &str) -> Result<IntMatrix> {
        let d = self.delta.get(id).ok_or(Error::DeltaMissing)?;
        let row = IntMatrix::from_columns(d.len(), std::slice::from_ref(d)).transpose();
        Ok(kernel_lattice(&row))
    }
}

/// Build a complex from a fan in a common ambient lattice.
///
/// Every input cone is re-coordinatized on a basis of its own span, and face
/// relations are found by testing which cones are faces of which. `delta`,
/// when given, is a functional on the common ambient and is restricted to
/// each span basis.
pub fn complex_from_fan(
    ambient: usize,
    cones: &[(&str, Vec<Vec<BigInt>>)],
    delta: Option<Vec<BigInt>>,
) -> Result<ConeComplex> {
    use crate::lattice::{saturate_sublattice, solve_matrix};

    let mut complex = ConeComplex::new();
    let mut span_bases: BTreeMap<ConeId, IntMatrix> = BTreeMap::new();
    let mut fan_cones: BTreeMap<ConeId, Cone> = BTreeMap::new();

    for (id, gens) in cones {
        for g in gens {
            if g.len() != ambient {
                return Err(Error::InvalidComplex(format!(
                    "generator of `{id}` has wrong length"
                )));
            }
        }
        let ambient_cone = Cone::from_generators(ambient, gens.clone());
        let basis = if gens.is_empty() {
            IntMatrix::zero(ambient, 0)
        } else {
            let b = saturate_sublattice(&IntMatrix::from_columns(
                ambient,
                ambient_cone.generators(),
            ));
            // full-dimensional cones keep the ambient coordinates
            if b.cols() == ambient {
                IntMatrix::identity(ambient)
            } else {
                b
            }
        };
        // intrinsic coordinates: solve basis * x = g for each generator
        let gen_mat = IntMatrix::from_columns(ambient, ambient_cone.generators());
        let coords = solve_matrix(&basis, &gen_mat)
            .ok_or_else(|| Error::InvalidComplex(format!("span basis failure for `{id}`")))?;
        let intrinsic = Cone::from_generators(basis.cols(), coords.columns());
        complex.add_cone(*id, intrinsic)?;
        if let Some(df) = &delta {
            // restrict: delta(basis * x) = (delta . basis) x
            let restricted: Vec<BigInt> = (0..basis.cols())
                .map(|j| {
                    df.iter()
                        .zip(basis.column(j))
                        .map(|(a, b)| a * b)
                        .sum::<BigInt>()
                })
                .collect();
            complex.set_delta(*id, restricted)?;
        }
        span_bases.insert((*id).to_string(), basis);
        fan_cones.insert((*id).to_string(), ambient_cone);
    }

    // face detection: sigma is a face of tau iff sigma is cut out of tau by
    // the tau-facet normals vanishing on sigma
    let ids: Vec<ConeId> = fan_cones.keys().cloned().collect();
    for fid in &ids {
        for cid in &ids {
            if fid == cid {
                continue;
            }
            let f = &fan_cones[fid];
            let c = &fan_cones[cid];
            if f.dim() >= c.dim() {
                continue;
            }
            if !f.generators().iter().all(|g| c.contains(g, false)) {
                continue;
            }
            // normals of c tight on all of f
            let tight: Vec<&Vec<BigInt>> = c
                .facet_normals()
                .iter()
                .filter(|n| {
                    f.generators()
                        .iter()
                        .all(|g| n.iter().zip(g).map(|(a, b)| a * b).sum::<BigInt>().is_zero())
                })
                .collect();
            let mut normals: Vec<Vec<BigInt>> = c.facet_normals().to_vec();
            let mut eqs: Vec<Vec<BigInt>> = c.equations().to_vec();
            for t in &tight {
                eqs.push((*t).clone());
            }
            normals.retain(|n| !tight.iter().any(|t| *t == n));
            let cut = Cone::from_inequalities(ambient, normals, eqs);
            if cut.generators() == f.generators() {
                // face map: express f's span basis in c's span basis
                let bf = &span_bases[fid];
                let bc = &span_bases[cid];
                let map = solve_matrix(bc, bf).ok_or_else(|| {
                    Error::InvalidComplex(format!("face map solve failed `{fid}` -> `{cid}`"))
                })?;
                complex.add_face_relation(fid.clone(), cid.clone(), map)?;
            }
        }
    }
    Ok(complex)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    /// The classical degeneration complex: two rays and a 2-cone,
    /// delta(x, y) = x + y on the common ambient.
    pub fn classical() -> ConeComplex {
        complex_from_fan(
            2,
            &[
                ("0", vec![]),
                ("ray1", vec![v(&[1, 0])]),
                ("ray2", vec![v(&[0, 1])]),
                ("quad", vec![v(&[1, 0]), v(&[0, 1])]),
            ],
            Some(v(&[1, 1])),
        )
        .unwrap()
    }

    #[test]
    fn fan_builder_classical() {
        let c = classical();
        assert_eq!(c.cone("ray1").unwrap().ambient_rank(), 1);
        assert_eq!(c.cone("quad").unwrap().ambient_rank(), 2);
        let m = c.face_map("ray1", "quad").unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.cols(), 1);
        // ray1's basis maps to (1, 0) or (-1, 0); the cone structure fixes +
        assert_eq!(m.mul_vec(&v(&[1]))[1], BigInt::zero());
        // delta on ray1 is inherited: value 1 on the primitive generator
        let d = c.delta("ray1").unwrap();
        let g = c.cone("ray1").unwrap().generators()[0].clone();
        let val: BigInt = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        assert_eq!(val, BigInt::from(1));
        // fibre lattice of the quadrant is rank 1
        assert_eq!(c.fibre_lattice_basis("quad").unwrap().cols(), 1);
        assert_eq!(c.fibre_lattice_basis("ray1").unwrap().cols(), 0);
    }

    #[test]
    fn face_map_composition() {
        let c = classical();
        let m = c.face_map("0", "quad").unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 0));
        assert!(c.has_face_map("ray1", "quad"));
        assert!(!c.has_face_map("quad", "ray1"));
        assert!(!c.has_face_map("ray1", "ray2"));
    }

    #[test]
    fn common_coface() {
        let c = classical();
        assert_eq!(c.common_coface(&["ray1", "ray2"]).unwrap(), "quad");
        assert_eq!(c.common_coface(&["ray1"]).unwrap(), "ray1");
    }

    #[test]
    fn rejects_non_full_dimensional() {
        let mut c = ConeComplex::new();
        let ray_in_plane = Cone::from_generators(2, vec![v(&[1, 0])]);
        assert!(c.add_cone("bad", ray_in_plane).is_err());
    }

    #[test]
    fn conifold_fan() {
        let c = complex_from_fan(
            3,
            &[
                ("v_xz", vec![v(&[0, 0, 1])]),
                ("v_yw", vec![v(&[1, 1, 1])]),
                ("big", vec![v(&[0, 0, 1]), v(&[1, 0, 1]), v(&[0, 1, 1]), v(&[1, 1, 1])]),
            ],
            None,
        )
        .unwrap();
        assert!(c.has_face_map("v_xz", "big"));
        assert!(c.has_face_map("v_yw", "big"));
        let m = c.face_map("v_yw", "big").unwrap();
        let img = m.mul_vec(&v(&[1]));
        assert!(img == v(&[1, 1, 1]) || img == v(&[-1, -1, -1]));
        // the cone structure forces the generator into the big cone
        assert!(c.cone("big").unwrap().contains(&img, false));
    }
}
