//! Rational polyhedral cones with integral structure.
//!
//! A cone is stored with both descriptions: generators (V-description) and
//! facet normals plus span equations (H-description). Conversion runs the
//! double description method in exact arithmetic. Desk-scale dimensions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{kernel_lattice, primitive_vector, rank, IntMatrix};
use crate::lp::{feasible, Constraint};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    ambient_rank: usize,
    /// Primitive, sorted, deduplicated. Lines appear as a +/- pair.
    generators: Vec<Vec<BigInt>>,
    /// Primitive normals, nonnegative on the cone, cutting facets within the span.
    facet_normals: Vec<Vec<BigInt>>,
    /// Primitive functionals vanishing on the cone; their kernel is the span.
    equations: Vec<Vec<BigInt>>,
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn canonical_rays(mut rays: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    for r in &mut rays {
        *r = primitive_vector(r);
    }
    rays.retain(|r| r.iter().any(|x| !x.is_zero()));
    rays.sort();
    rays.dedup();
    rays
}

/// Extreme rays and lineality of `{x : a.x >= 0 for a in ineqs}` in `Z^n`.
///
/// Incremental double description with the combinatorial adjacency test.
pub fn extreme_rays(ambient: usize, ineqs: &[Vec<BigInt>]) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let mut lineality: Vec<Vec<BigInt>> = (0..ambient)
        .map(|i| {
            let mut e = vec![BigInt::zero(); ambient];
            e[i] = BigInt::from(1);
            e
        })
        .collect();
    let mut rays: Vec<Vec<BigInt>> = Vec::new();
    let mut processed: Vec<Vec<BigInt>> = Vec::new();

    for a in ineqs {
        assert_eq!(a.len(), ambient);
        if a.iter().all(|x| x.is_zero()) {
            continue;
        }
        let pivot = lineality.iter().position(|l| !dot(a, l).is_zero());
        if let Some(p) = pivot {
            let l0 = lineality.remove(p);
            let al0 = dot(a, &l0);
            // make remaining lineality and rays orthogonal to a
            for l in &mut lineality {
                let al = dot(a, l);
                let new: Vec<BigInt> = l
                    .iter()
                    .zip(&l0)
                    .map(|(x, y)| x * &al0 - &al * y)
                    .collect();
                *l = primitive_vector(&new);
            }
            for r in &mut rays {
                let ar = dot(a, r);
                // keep a positive multiple: |al0| r - sign(al0) ar l0
                let s = if al0.is_negative() { BigInt::from(-1) } else { BigInt::from(1) };
                let abs = al0.abs();
                let new: Vec<BigInt> = r
                    .iter()
                    .zip(&l0)
                    .map(|(x, y)| x * &abs - &s * &ar * y)
                    .collect();
                *r = primitive_vector(&new);
            }
            // the pivot line folds into a ray on the feasible side
            let r0: Vec<BigInt> = if al0.is_negative() {
                l0.iter().map(|x| -x).collect()
            } else {
                l0
            };
            rays.push(primitive_vector(&r0));
            rays = canonical_rays(rays);
        } else {
            let mut keep: Vec<Vec<BigInt>> = Vec::new();
            let mut pos: Vec<Vec<BigInt>> = Vec::new();
            let mut neg: Vec<Vec<BigInt>> = Vec::new();
            for r in rays.drain(..) {
                let v = dot(a, &r);
                if v.is_zero() {
                    keep.push(r);
                } else if v.is_positive() {
                    pos.push(r);
                } else {
                    neg.push(r);
                }
            }
            // adjacency of p and n: no third ray is tight on all constraints
            // tight at both
            let tight_set = |r: &Vec<BigInt>| -> Vec<bool> {
                processed.iter().map(|c| dot(c, r).is_zero()).collect()
            };
            let all_rays: Vec<&Vec<BigInt>> = pos.iter().chain(neg.iter()).chain(keep.iter()).collect();
            let mut new_rays: Vec<Vec<BigInt>> = Vec::new();
            for p in &pos {
                let tp = tight_set(p);
                for n in &neg {
                    let tn = tight_set(n);
                    let common: Vec<usize> =
                        (0..tp.len()).filter(|&i| tp[i] && tn[i]).collect();
                    // combinatorial test: adjacent iff no third ray is tight
                    // on every constraint tight at both p and n
                    let adjacent = !all_rays.iter().any(|r| {
                        !std::ptr::eq(*r, p)
                            && !std::ptr::eq(*r, n)
                            && common.iter().all(|&i| dot(&processed[i], r).is_zero())
                    });
                    if adjacent {
                        let ap = dot(a, p);
                        let an = dot(a, n);
                        let comb: Vec<BigInt> = p
                            .iter()
                            .zip(n)
                            .map(|(x, y)| &ap * y - &an * x)
                            .collect();
                        debug_assert!(dot(a, &comb).is_zero());
                        new_rays.push(primitive_vector(&comb));
                    }
                }
            }
            rays = keep;
            rays.extend(pos);
            rays.extend(new_rays);
            rays = canonical_rays(rays);
        }
        processed.push(a.clone());
    }
    lineality = canonical_rays(lineality);
    (lineality, rays)
}

impl Cone {
    /// Build from generators; computes the H-description.
    pub fn from_generators(ambient_rank: usize, generators: Vec<Vec<BigInt>>) -> Self {
        for g in &generators {
            assert_eq!(g.len(), ambient_rank, "generator in wrong ambient");
        }
        let gens = canonical_rays(generators);
        // dual side: {y : <g, y> >= 0}
        let (dual_lin, dual_rays) = extreme_rays(ambient_rank, &gens);
        Cone {
            ambient_rank,
            generators: gens,
            facet_normals: dual_rays,
            equations: dual_lin,
        }
    }

    /// Build from an H-description; computes generators.
    pub fn from_inequalities(
        ambient_rank: usize,
        normals: Vec<Vec<BigInt>>,
        equations: Vec<Vec<BigInt>>,
    ) -> Self {
        let mut ineqs = normals.clone();
        for e in &equations {
            ineqs.push(e.clone());
            ineqs.push(e.iter().map(|x| -x).collect());
        }
        let (lin, rays) = extreme_rays(ambient_rank, &ineqs);
        let mut gens = rays;
        for l in lin {
            gens.push(l.iter().map(|x| -x).collect());
            gens.push(l);
        }
        Cone::from_generators(ambient_rank, gens)
    }

    pub fn zero(ambient_rank: usize) -> Self {
        Cone::from_generators(ambient_rank, Vec::new())
    }

    pub fn full_space(ambient_rank: usize) -> Self {
        let mut gens = Vec::new();
        for i in 0..ambient_rank {
            let mut e = vec![BigInt::zero(); ambient_rank];
            e[i] = BigInt::from(1);
            gens.push(e.clone());
            e[i] = BigInt::from(-1);
            gens.push(e);
        }
        Cone::from_generators(ambient_rank, gens)
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn generators(&self) -> &[Vec<BigInt>] {
        &self.generators
    }

    pub fn facet_normals(&self) -> &[Vec<BigInt>] {
        &self.facet_normals
    }

    pub fn equations(&self) -> &[Vec<BigInt>] {
        &self.equations
    }

    /// Dimension of the linear span.
    pub fn dim(&self) -> usize {
        if self.generators.is_empty() {
            return 0;
        }
        rank(&IntMatrix::from_columns(self.ambient_rank, &self.generators))
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.equations.is_empty()
    }

    /// Strictly convex: contains no line.
    pub fn is_strictly_convex(&self) -> bool {
        // lineality = kernel of all normals and equations
        let mut rows = self.facet_normals.clone();
        rows.extend(self.equations.iter().cloned());
        if rows.is_empty() {
            return self.ambient_rank == 0;
        }
        let m = IntMatrix::from_columns(self.ambient_rank, &rows).transpose();
        kernel_lattice(&m).cols() == 0
    }

    pub fn contains(&self, v: &[BigInt], strict: bool) -> bool {
        assert_eq!(v.len(), self.ambient_rank);
        if !self.equations.iter().all(|e| dot(e, v).is_zero()) {
            return false;
        }
        if strict {
            self.facet_normals.iter().all(|n| dot(n, v).is_positive())
        } else {
            self.facet_normals.iter().all(|n| !dot(n, v).is_negative())
        }
    }

    pub fn contains_rational(&self, v: &[BigRational], strict: bool) -> bool {
        assert_eq!(v.len(), self.ambient_rank);
        let ip = |a: &[BigInt]| -> BigRational {
            a.iter()
                .zip(v)
                .map(|(x, y)| BigRational::from(x.clone()) * y)
                .sum()
        };
        if !self.equations.iter().all(|e| ip(e).is_zero()) {
            return false;
        }
        if strict {
            self.facet_normals.iter().all(|n| ip(n).is_positive())
        } else {
            self.facet_normals.iter().all(|n| !ip(n).is_negative())
        }
    }

    /// An integral point of the relative interior: the sum of the stored
    /// generators. The zero cone yields the origin.
    pub fn relative_interior_point(&self) -> Vec<BigInt> {
        let mut p = vec![BigInt::zero(); self.ambient_rank];
        for g in &self.generators {
            for i in 0..self.ambient_rank {
                p[i] += &g[i];
            }
        }
        debug_assert!(self.contains(&p, self.facet_normals.is_empty() || !p.iter().all(|x| x.is_zero())));
        p
    }

    /// The dual cone `{y : <x, y> >= 0 for all x in self}`.
    pub fn dual(&self) -> Cone {
        let mut gens = self.facet_normals.clone();
        for e in &self.equations {
            gens.push(e.clone());
            gens.push(e.iter().map(|x| -x).collect());
        }
        Cone::from_generators(self.ambient_rank, gens)
    }

    /// Image under an integer linear map given by `m` (rows = target rank).
    pub fn map_through(&self, m: &IntMatrix) -> Cone {
        assert_eq!(m.cols(), self.ambient_rank);
        let gens: Vec<Vec<BigInt>> = self.generators.iter().map(|g| m.mul_vec(g)).collect();
        Cone::from_generators(m.rows(), gens)
    }

    /// Does an LP certify a point of `self` in the (full) interior of `other`?
    /// Both cones share an ambient. Used for local-homomorphism tests.
    pub fn meets_interior_of(&self, other: &Cone, map: Option<&IntMatrix>) -> Result<bool> {
        let n = self.ambient_rank;
        let target_rank = map.map_or(n, |m| m.rows());
        if other.ambient_rank != target_rank {
            return Err(Error::Dimension("cone ambients differ".into()));
        }
        if !other.is_full_dimensional() {
            return Ok(false);
        }
        // variables x in self's ambient: x in self, (map x) strictly inside other
        let mut cs: Vec<Constraint> = Vec::new();
        for e in &self.equations {
            let [a, b] = Constraint::eq_pair(
                e.iter().map(|x| BigRational::from(x.clone())).collect(),
                BigRational::zero(),
            );
            cs.push(a);
            cs.push(b);
        }
        for f in &self.facet_normals {
            cs.push(Constraint::from_int(f, 0));
        }
        for f in other.facet_normals() {
            let row: Vec<BigInt> = match map {
                Some(m) => {
                    // f . (M x) = (M^T f) . x
                    m.transpose().mul_vec(f)
                }
                None => f.clone(),
            };
            cs.push(Constraint::from_int(&row, 1));
        }
        if other.facet_normals().is_empty() {
            // interior of the full space: any point of self works
            return Ok(true);
        }
        Ok(feasible(n, &cs))
    }
}
