//! Fine saturated sharp monoids via their dual cones, and the four-point
//! decision procedures for fs fibre products of log points.
//!
//! A monoid `P` is never materialized element-by-element: we only keep
//! `P^vee` as a cone in `N_P = Hom(P^gp, Z)`. Component counts only need
//! the group `coker(theta)`, which reduces to Smith normal forms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::cones::Cone;
use crate::error::{Error, Result};
use crate::lattice::{
    cokernel, kernel_lattice, solve, torsion_order, FGAbelian, IntMatrix,
};
use crate::lp::{feasible, Constraint};

/// A sharp fs monoid `P`, stored through its dual cone `P^vee` in the
/// lattice `N = Hom(P^gp, Z)`. Sharpness means the dual cone is
/// full-dimensional; `P^gp` torsion-free means it is strictly convex.
#[derive(Clone, Debug)]
pub struct FsSharpMonoid {
    dual_cone: Cone,
}

impl FsSharpMonoid {
    pub fn from_dual_cone(dual_cone: Cone) -> Result<Self> {
        if !dual_cone.is_full_dimensional() {
            return Err(Error::InvalidType(
                "dual cone not full-dimensional: monoid not sharp".into(),
            ));
        }
        if !dual_cone.is_strictly_convex() {
            return Err(Error::InvalidType(
                "dual cone not strictly convex: monoid group has units".into(),
            ));
        }
        Ok(FsSharpMonoid { dual_cone })
    }

    /// The free monoid `N^r`.
    pub fn free(rank: usize) -> Self {
        let gens = (0..rank)
            .map(|i| {
                let mut e = vec![BigInt::zero(); rank];
                e[i] = BigInt::from(1);
                e
            })
            .collect();
        FsSharpMonoid { dual_cone: Cone::from_generators(rank, gens) }
    }

    /// The trivial monoid of `Spec k`.
    pub fn trivial() -> Self {
        FsSharpMonoid { dual_cone: Cone::from_generators(0, vec![]) }
    }

    pub fn dual_cone(&self) -> &Cone {
        &self.dual_cone
    }

    /// Rank of `P^gp`.
    pub fn rank(&self) -> usize {
        self.dual_cone.ambient_rank()
    }
}

/// Is the lattice map `theta: P^gp -> Q^gp` (a `rank(Q) x rank(P)` matrix
/// sending `P` into `Q`) a local homomorphism?
///
/// Dually: does `theta^t(Q^vee)` intersect the interior of `P^vee`? A fast
/// path maps one relative-interior point; the exact LP decides the rest.
pub fn is_local_hom(theta: &IntMatrix, p: &FsSharpMonoid, q: &FsSharpMonoid) -> Result<bool> {
    if theta.rows() != q.rank() || theta.cols() != p.rank() {
        return Err(Error::Dimension(format!(
            "theta is {}x{}, expected {}x{}",
            theta.rows(),
            theta.cols(),
            q.rank(),
            p.rank()
        )));
    }
    let theta_t = theta.transpose();
    // theta(P) in Q is equivalent to theta^t(Q^vee) in P^vee
    for g in q.dual_cone.generators() {
        if !p.dual_cone.contains(&theta_t.mul_vec(g), false) {
            return Err(Error::NotMonoidMap(
                "theta does not map the monoid into the target".into(),
            ));
        }
    }
    let probe = theta_t.mul_vec(&q.dual_cone.relative_interior_point());
    if p.dual_cone.contains(&probe, true) {
        return Ok(true);
    }
    q.dual_cone.meets_interior_of(&p.dual_cone, Some(&theta_t))
}

/// Number of connected components of the saturation of a fine log point:
/// the order of the torsion part of the monoid group.
pub fn saturation_components(qgp_torsion: &FGAbelian) -> BigInt {
    torsion_order(qgp_torsion)
}

/// A diagram of log points `W_i -> X` with monoids `Q_i`, `P` and
/// structure maps `theta_i: P -> Q_i`, optionally sitting over a primed
/// diagram through inclusions `g, g_1, g_2`.
#[derive(Clone, Debug)]
pub struct PointDiagram {
    pub p: FsSharpMonoid,
    pub q1: FsSharpMonoid,
    pub q2: FsSharpMonoid,
    /// `rank(Q_i) x rank(P)` matrices on the groups.
    pub theta1: IntMatrix,
    pub theta2: IntMatrix,
    pub primed: Option<PrimedDiagram>,
}

/// The primed sub-diagram of the non-emptiness criterion, together with the
/// inclusion maps upward.
#[derive(Clone, Debug)]
pub struct PrimedDiagram {
    pub p: FsSharpMonoid,
    pub q1: FsSharpMonoid,
    pub q2: FsSharpMonoid,
    pub theta1: IntMatrix,
    pub theta2: IntMatrix,
    /// `g: P'^gp -> P^gp`, `g_i: Q_i'^gp -> Q_i^gp`.
    pub g: IntMatrix,
    pub g1: IntMatrix,
    pub g2: IntMatrix,
    /// How to discharge condition (1), non-emptiness of the primed product.
    pub nonempty: PrimedNonempty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimedNonempty {
    /// Caller asserts the primed fibre product is non-empty.
    Given,
    /// Decide by running the sufficient criterion on the primed diagram.
    Recurse,
}

/// Verdict of the sufficient non-emptiness criterion. `Unknown` is
/// deliberately inconclusive: the criterion is one-sided.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NonemptyVerdict {
    GuaranteedNonempty,
    Unknown,
}

/// Per-condition outcome of the criterion, for reporting.
#[derive(Clone, Copy, Debug)]
pub struct NonemptyReport {
    pub primed_nonempty: bool,
    pub projections_interior: bool,
    pub inclusions_injective: bool,
    pub induced_injective: bool,
}

impl NonemptyReport {
    pub fn verdict(&self) -> NonemptyVerdict {
        if self.primed_nonempty
            && self.projections_interior
            && self.inclusions_injective
            && self.induced_injective
        {
            NonemptyVerdict::GuaranteedNonempty
        } else {
            NonemptyVerdict::Unknown
        }
    }
}

impl PointDiagram {
    pub fn new(
        p: FsSharpMonoid,
        q1: FsSharpMonoid,
        q2: FsSharpMonoid,
        theta1: IntMatrix,
        theta2: IntMatrix,
    ) -> Self {
        PointDiagram { p, q1, q2, theta1, theta2, primed: None }
    }

    /// The stacked group map `theta = (theta_1, -theta_2): P^gp -> Q_1^gp + Q_2^gp`.
    pub fn theta(&self) -> IntMatrix {
        self.theta1.vstack(&self.theta2.neg())
    }

    fn check_local(&self) -> Result<()> {
        if !is_local_hom(&self.theta1, &self.p, &self.q1)? {
            return Err(Error::NonLocalHom);
        }
        if !is_local_hom(&self.theta2, &self.p, &self.q2)? {
            return Err(Error::NonLocalHom);
        }
        Ok(())
    }
}

/// Number of connected components of the fs fibre product of the two log
/// points over `X`, when it is non-empty: `|coker(theta)_tors|`.
pub fn fs_point_fibre_components(d: &PointDiagram) -> Result<BigInt> {
    d.check_local()?;
    Ok(torsion_order(&cokernel(&d.theta())))
}

/// Exact LP: does the projection of the fibre-product cone
/// `Q_1^vee x_{P^vee} Q_2^vee` meet the interior of `Q_i^vee`, for i = 1, 2?
fn fibre_cone_projections_interior(d: &PointDiagram) -> bool {
    let (r1, r2) = (d.q1.rank(), d.q2.rank());
    let t1t = d.theta1.transpose();
    let t2t = d.theta2.transpose();
    let vars = r1 + r2;
    let base: Vec<Constraint> = {
        let mut cs = Vec::new();
        // matching in P^vee: theta1^t a - theta2^t b = 0
        for r in 0..d.p.rank() {
            let mut coeffs = vec![BigRational::zero(); vars];
            for c in 0..r1 {
                coeffs[c] = BigRational::from(t1t.at(r, c).clone());
            }
            for c in 0..r2 {
                coeffs[r1 + c] = BigRational::from(-t2t.at(r, c));
            }
            let [a, b] = Constraint::eq_pair(coeffs, BigRational::zero());
            cs.push(a);
            cs.push(b);
        }
        cs
    };
    let mut strict_each = true;
    for side in 0..2 {
        let mut cs = base.clone();
        for (offset, rank, q, strict) in [
            (0usize, r1, &d.q1, side == 0),
            (r1, r2, &d.q2, side == 1),
        ] {
            for f in q.dual_cone.facet_normals() {
                let mut coeffs = vec![BigRational::zero(); vars];
                for c in 0..rank {
                    coeffs[offset + c] = BigRational::from(f[c].clone());
                }
                cs.push(Constraint { coeffs, rhs: if strict { BigRational::from(BigInt::from(1)) } else { BigRational::zero() } });
            }
        }
        if !feasible(vars, &cs) {
            strict_each = false;
            break;
        }
    }
    strict_each
}

/// The sufficient non-emptiness criterion for the fs fibre product of log
/// points. Checks: (1) the primed fibre product is non-empty, (2) the
/// fibre-product cone projects into both interiors, (3) the inclusions are
/// injective and the map induced by `theta` on the quotient groups is
/// injective. `Unknown` does not mean empty.
pub fn nonempty_sufficient(d: &PointDiagram) -> Result<NonemptyReport> {
    // trivial primed diagram: everything is Spec k
    let trivial = PrimedDiagram {
        p: FsSharpMonoid::trivial(),
        q1: FsSharpMonoid::trivial(),
        q2: FsSharpMonoid::trivial(),
        theta1: IntMatrix::zero(0, 0),
        theta2: IntMatrix::zero(0, 0),
        g: IntMatrix::zero(d.p.rank(), 0),
        g1: IntMatrix::zero(d.q1.rank(), 0),
        g2: IntMatrix::zero(d.q2.rank(), 0),
        nonempty: PrimedNonempty::Given,
    };
    let primed = d.primed.as_ref().unwrap_or(&trivial);

    // shape and commutativity checks
    for (m, rows, cols, what) in [
        (&primed.g, d.p.rank(), primed.p.rank(), "g"),
        (&primed.g1, d.q1.rank(), primed.q1.rank(), "g1"),
        (&primed.g2, d.q2.rank(), primed.q2.rank(), "g2"),
    ] {
        if m.rows() != rows || m.cols() != cols {
            return Err(Error::MalformedDiagram(format!("inclusion `{what}` has wrong shape")));
        }
    }
    if d.theta1.mul(&primed.g) != primed.g1.mul(&primed.theta1)
        || d.theta2.mul(&primed.g) != primed.g2.mul(&primed.theta2)
    {
        return Err(Error::MalformedDiagram("squares do not commute".into()));
    }

    let primed_nonempty = match primed.nonempty {
        PrimedNonempty::Given => true,
        PrimedNonempty::Recurse => {
            let sub = PointDiagram {
                p: primed.p.clone(),
                q1: primed.q1.clone(),
                q2: primed.q2.clone(),
                theta1: primed.theta1.clone(),
                theta2: primed.theta2.clone(),
                primed: None,
            };
            nonempty_sufficient(&sub)?.verdict() == NonemptyVerdict::GuaranteedNonempty
        }
    };

    let projections_interior = fibre_cone_projections_interior(d);

    let inclusions_injective = kernel_lattice(&primed.g).cols() == 0
        && kernel_lattice(&primed.g1).cols() == 0
        && kernel_lattice(&primed.g2).cols() == 0;

    // induced map on quotients injective:
    // x with theta(x) in im(g1 + g2) must lie in im(g)
    let theta = d.theta();
    let g12 = {
        let mut m = IntMatrix::zero(d.q1.rank() + d.q2.rank(), primed.g1.cols() + primed.g2.cols());
        m.put_block(0, 0, &primed.g1);
        m.put_block(d.q1.rank(), primed.g1.cols(), &primed.g2);
        m
    };
    let stacked = theta.hstack(&g12.neg());
    let ker = kernel_lattice(&stacked);
    let mut induced_injective = true;
    for j in 0..ker.cols() {
        let x: Vec<BigInt> = (0..d.p.rank()).map(|i| ker.at(i, j).clone()).collect();
        if solve(&primed.g, &x).is_none() {
            induced_injective = false;
            break;
        }
    }

    Ok(NonemptyReport {
        primed_nonempty,
        projections_interior,
        inclusions_injective,
        induced_injective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn local_hom_examples() {
        let n1 = FsSharpMonoid::free(1);
        let n2 = FsSharpMonoid::free(2);
        // identity is local
        assert!(is_local_hom(&IntMatrix::identity(1), &n1, &n1).unwrap());
        // face projection N^2 -> N, (p1, p2) -> p1: theta^t(q) = (q, 0) on
        // the boundary, not local
        let proj = IntMatrix::from_rows_i64(&[vec![1, 0]]);
        assert!(!is_local_hom(&proj, &n2, &n1).unwrap());
        // diagonal N -> N^2 is local
        let diag = IntMatrix::from_rows_i64(&[vec![1], vec![1]]);
        assert!(is_local_hom(&diag, &n1, &n2).unwrap());
        // a map not respecting monoids errors
        let bad = IntMatrix::from_rows_i64(&[vec![-1]]);
        assert!(matches!(is_local_hom(&bad, &n1, &n1), Err(Error::NotMonoidMap(_))));
    }

    #[test]
    fn saturation_counts() {
        assert_eq!(saturation_components(&FGAbelian::new(2, vec![])), bi(1));
        assert_eq!(saturation_components(&FGAbelian::new(0, vec![bi(3)])), bi(3));
        // coker of [2, -2]: Z^2 -> Z... as stated: the map Z -> Z^2
        let m = IntMatrix::from_rows_i64(&[vec![2], vec![-2]]);
        assert_eq!(saturation_components(&cokernel(&m)), bi(2));
    }

    #[test]
    fn fibre_component_counts() {
        let n1 = FsSharpMonoid::free(1);
        let id = IntMatrix::identity(1);
        let d = PointDiagram::new(n1.clone(), n1.clone(), n1.clone(), id.clone(), id.clone());
        assert_eq!(fs_point_fibre_components(&d).unwrap(), bi(1));

        let two = IntMatrix::from_rows_i64(&[vec![2]]);
        let three = IntMatrix::from_rows_i64(&[vec![3]]);
        let d = PointDiagram::new(n1.clone(), n1.clone(), n1.clone(), two.clone(), three);
        assert_eq!(fs_point_fibre_components(&d).unwrap(), bi(1));

        let d = PointDiagram::new(n1.clone(), n1.clone(), n1.clone(), two.clone(), two.clone());
        assert_eq!(fs_point_fibre_components(&d).unwrap(), bi(2));
    }

    #[test]
    fn fibre_components_symmetric() {
        let n1 = FsSharpMonoid::free(1);
        for (a, b) in [(2i64, 3i64), (2, 2), (4, 6), (1, 5)] {
            let ta = IntMatrix::from_rows_i64(&[vec![a]]);
            let tb = IntMatrix::from_rows_i64(&[vec![b]]);
            let d1 = PointDiagram::new(n1.clone(), n1.clone(), n1.clone(), ta.clone(), tb.clone());
            let d2 = PointDiagram::new(n1.clone(), n1.clone(), n1.clone(), tb, ta);
            assert_eq!(
                fs_point_fibre_components(&d1).unwrap(),
                fs_point_fibre_components(&d2).unwrap()
            );
        }
    }

    #[test]
    fn nonempty_transverse_identity() {
        let n1 = FsSharpMonoid::free(1);
        let id = IntMatrix::identity(1);
        let d = PointDiagram::new(n1.clone(), n1.clone(), n1.clone(), id.clone(), id);
        let r = nonempty_sufficient(&d).unwrap();
        assert_eq!(r.verdict(), NonemptyVerdict::GuaranteedNonempty);
    }

    #[test]
    fn nonempty_condition_two_fails_on_facet() {
        // theta1^t(a1, a2) = (a2, a1 + a2), theta2^t(b) = (b, b):
        // matching forces a1 = 0, so the fibre cone projects into a facet.
        let p = FsSharpMonoid::free(2);
        let q1 = FsSharpMonoid::free(2);
        let q2 = FsSharpMonoid::free(1);
        let theta1 = IntMatrix::from_rows_i64(&[vec![0, 1], vec![1, 1]]).transpose();
        let theta2 = IntMatrix::from_rows_i64(&[vec![1, 1]]);
        assert!(is_local_hom(&theta1, &p, &q1).unwrap());
        assert!(is_local_hom(&theta2, &p, &q2).unwrap());
        let d = PointDiagram::new(p, q1, q2, theta1, theta2);
        let r = nonempty_sufficient(&d).unwrap();
        assert!(!r.projections_interior);
        assert_eq!(r.verdict(), NonemptyVerdict::Unknown);
    }

    #[test]
    fn nonempty_never_guaranteed_on_zero_fibre_cone() {
        // Q1^vee, Q2^vee nonzero but only matching at the origin.
        // theta1^t(a) = a (as the ray to the right), theta2^t(b) = -..
        // Use P = N^2, theta1^t(a1,a2) = (a1, 0)? that is not a local hom;
        // instead: theta_i local but transpose images meeting only at 0 in
        // P^vee is impossible for local homs, so emulate via mismatched
        // equations: theta1^t a = (a1, a2), theta2^t b = (b, 2b): matching
        // needs a2 = 2a1 - fibre cone is a ray, projections still interior.
        // The structural guard is exercised through condition (2) instead.
        let p = FsSharpMonoid::free(2);
        let q1 = FsSharpMonoid::free(2);
        let q2 = FsSharpMonoid::free(1);
        let theta1 = IntMatrix::identity(2);
        let theta2 = IntMatrix::from_rows_i64(&[vec![1, 2]]);
        let d = PointDiagram::new(p, q1, q2, theta1, theta2);
        let r = nonempty_sufficient(&d).unwrap();
        // fibre cone = {((b, 2b), b)}: interior of Q1^vee is met, so this
        // diagram is fine; the verdict is allowed to be Guaranteed here.
        assert!(r.projections_interior);
    }
}
