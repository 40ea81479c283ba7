//! The tropical gluing engine: assemble the gluing map Psi from split
//! types, compute the multiplicity mu and transversality, cross-validate
//! through the transpose route, run the rigid-type machinery over the base
//! ray, and evaluate the flatness criterion.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::basic_cone::{basic_cone, is_realizable, m_tau, BasicCone};
use crate::complex::ConeComplex;
use crate::cones::Cone;
use crate::error::{Error, Result};
use crate::lattice::{
    cokernel, is_cokernel_finite, kernel_lattice, solve_matrix, torsion_order, IntMatrix,
};
use crate::monoids::{
    fs_point_fibre_components, nonempty_sufficient, FsSharpMonoid, NonemptyVerdict, PointDiagram,
};
use crate::types::{split, Contraction, DecoratedType, SplitFlag, TropicalType};

/// A type together with a set of splitting edges and everything derived
/// from splitting it.
pub struct GluingProblem {
    pub complex: ConeComplex,
    pub decorated: DecoratedType,
    pub split_edges: BTreeSet<usize>,
    pub parts: Vec<DecoratedType>,
    pub flags: Vec<SplitFlag>,
    pub part_cones: Vec<BasicCone>,
    /// Rank of `N_{sigma(E)}` per splitting edge, in split-set order.
    pub edge_ranks: Vec<usize>,
}

/// The assembled verdict for one gluing problem.
#[derive(Clone, Debug)]
pub struct GluingReport {
    pub psi: IntMatrix,
    pub mu: BigInt,
    pub transverse: bool,
    pub kernel_rank: usize,
    pub nonempty: NonemptyVerdict,
}

impl GluingProblem {
    pub fn new(
        complex: ConeComplex,
        decorated: DecoratedType,
        split_edges: BTreeSet<usize>,
    ) -> Result<Self> {
        for &e in &split_edges {
            if e >= decorated.base.graph.edges.len() {
                return Err(Error::InvalidType(format!("splitting edge {e} out of range")));
            }
        }
        let (parts, flags) = split(&decorated, &split_edges);
        let mut part_cones = Vec::new();
        for (i, p) in parts.iter().enumerate() {
            if !is_realizable(&p.base, &complex)? {
                return Err(Error::UnrealizableComponent(i));
            }
            part_cones.push(basic_cone(&p.base, &complex)?);
        }
        let edge_ranks = split_edges
            .iter()
            .map(|&e| {
                complex
                    .cone(&decorated.base.sigma_e[e])
                    .map(|c| c.ambient_rank())
                    .ok_or_else(|| Error::InvalidType("unknown edge cone".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GluingProblem { complex, decorated, split_edges, parts, flags, part_cones, edge_ranks })
    }

    fn flag_of(&self, edge: usize, vertex: usize) -> &SplitFlag {
        self.flags
            .iter()
            .find(|f| f.edge == edge && f.vertex == vertex)
            .expect("flag exists for every splitting edge endpoint")
    }

    /// Evaluation of a split component at a flag leg, landing in
    /// `N_{sigma(E)}`: `face . ev_v` as a matrix on the basic-cone basis.
    fn flag_evaluation(&self, flag: &SplitFlag) -> Result<IntMatrix> {
        let part = &self.parts[flag.component];
        let bc = &self.part_cones[flag.component];
        let local_v = part.base.graph.legs[flag.leg].vertex;
        let target = &part.base.sigma_l[flag.leg];
        let face = self.complex.face_map(&part.base.sigma_v[local_v], target)?;
        Ok(face.mul(&bc.ev_vertex(local_v)))
    }

    /// Domain column layout of Psi: basic-cone coordinates of all parts,
    /// then one length per splitting edge.
    fn domain_dims(&self) -> (Vec<usize>, usize) {
        let mut offsets = Vec::new();
        let mut off = 0usize;
        for bc in &self.part_cones {
            offsets.push(off);
            off += bc.dim;
        }
        (offsets, off)
    }

    /// The tropical gluing map
    /// `Psi((q_i), (l_E)) = (ev_{v_E}(q) + l_E u(E) - ev_{v'_E}(q))_E`.
    pub fn build_psi(&self) -> Result<IntMatrix> {
        let (part_offsets, parts_dim) = self.domain_dims();
        let n_edges = self.split_edges.len();
        let total_rows: usize = self.edge_ranks.iter().sum();
        let mut psi = IntMatrix::zero(total_rows, parts_dim + n_edges);
        let mut row = 0usize;
        for (k, &e) in self.split_edges.iter().enumerate() {
            let edge = &self.decorated.base.graph.edges[e];
            let f1 = self.flag_of(e, edge.v1).clone();
            let f2 = self.flag_of(e, edge.v2).clone();
            let ev1 = self.flag_evaluation(&f1)?;
            let ev2 = self.flag_evaluation(&f2)?;
            psi.add_block(row, part_offsets[f1.component], &ev1);
            psi.add_block(row, part_offsets[f2.component], &ev2.neg());
            // u(E) on the canonical orientation sits on the flag at v1
            let u = &self.parts[f1.component].base.u_l[f1.leg];
            for (r, x) in u.iter().enumerate() {
                psi.set(row + r, parts_dim + k, x.clone());
            }
            row += self.edge_ranks[k];
        }
        Ok(psi)
    }

    pub fn mu(&self) -> Result<BigInt> {
        Ok(torsion_order(&cokernel(&self.build_psi()?)))
    }

    pub fn is_transverse(&self) -> Result<bool> {
        Ok(is_cokernel_finite(&self.build_psi()?))
    }

    pub fn glue_verdict(&self) -> Result<GluingReport> {
        let psi = self.build_psi()?;
        let transverse = is_cokernel_finite(&psi);
        let mu = torsion_order(&cokernel(&psi));
        let kernel_rank = kernel_lattice(&psi).cols();
        let nonempty = if transverse {
            NonemptyVerdict::GuaranteedNonempty
        } else {
            // the sufficient criterion with the trivial primed diagram;
            // inconclusive by design in the non-transverse case
            match self.point_diagram() {
                Ok(d) => nonempty_sufficient(&d)?.verdict(),
                Err(_) => NonemptyVerdict::Unknown,
            }
        };
        Ok(GluingReport { psi, mu, transverse, kernel_rank, nonempty })
    }

    /// The transpose-route map of the component-count computation:
    /// `theta^t((n_E), (s_i), (l_{E,v})) = (ev_v(s) + l_{E,v} u(E,v) - n_E)`
    /// over flags.
    pub fn build_theta_t(&self) -> Result<IntMatrix> {
        let (part_offsets, parts_dim) = self.domain_dims();
        let edge_dim: usize = self.edge_ranks.iter().sum();
        let n_flags = self.flags.len();
        let flag_rows: usize = self
            .flags
            .iter()
            .map(|f| {
                let k = self.split_edges.iter().position(|&e| e == f.edge).unwrap();
                self.edge_ranks[k]
            })
            .sum();
        // columns: n_E per split edge, then part coordinates, then one
        // puncture coordinate per flag
        let cols = edge_dim + parts_dim + n_flags;
        let mut theta_t = IntMatrix::zero(flag_rows, cols);
        let mut edge_offsets = Vec::new();
        {
            let mut off = 0;
            for r in &self.edge_ranks {
                edge_offsets.push(off);
                off += r;
            }
        }
        let mut row = 0usize;
        for (fi, flag) in self.flags.iter().enumerate() {
            let k = self.split_edges.iter().position(|&e| e == flag.edge).unwrap();
            let rank = self.edge_ranks[k];
            let ev = self.flag_evaluation(flag)?;
            theta_t.add_block(row, edge_dim + part_offsets[flag.component], &ev);
            let u = &self.parts[flag.component].base.u_l[flag.leg];
            for (r, x) in u.iter().enumerate() {
                theta_t.set(row + r, edge_dim + parts_dim + fi, x.clone());
            }
            for r in 0..rank {
                theta_t.set(row + r, edge_offsets[k] + r, BigInt::from(-1));
            }
            row += rank;
        }
        Ok(theta_t)
    }

    /// The snake-lemma cross-check: coker(theta^t) and coker(Psi) carry the
    /// same rank and torsion.
    pub fn theta_psi_consistency(&self) -> Result<bool> {
        let a = cokernel(&self.build_theta_t()?);
        let b = cokernel(&self.build_psi()?);
        Ok(a == b)
    }

    /// The fs-point diagram of the gluing: `W_1 = prod_i W~_i`,
    /// `W_2 = prod_E Spec(P_E -> k)`, `X = prod_{flags} Spec(P_E -> k)`.
    pub fn point_diagram(&self) -> Result<PointDiagram> {
        // Q1: product over parts of the puncture-extended basic monoid
        let mut q1_rank = 0usize;
        let mut q1_ineqs: Vec<Vec<BigInt>> = Vec::new();
        let mut part_offsets = Vec::new();
        let mut leg_offsets: Vec<Vec<usize>> = Vec::new();
        {
            // column layout per part: basic-cone coordinates then one
            // puncture length per split-flag leg of that part
            for (c, bc) in self.part_cones.iter().enumerate() {
                part_offsets.push(q1_rank);
                let legs: Vec<usize> = self
                    .flags
                    .iter()
                    .filter(|f| f.component == c)
                    .map(|f| f.leg)
                    .collect();
                let mut offs = vec![usize::MAX; self.parts[c].base.graph.legs.len()];
                for (j, &leg) in legs.iter().enumerate() {
                    offs[leg] = q1_rank + bc.dim + j;
                }
                leg_offsets.push(offs);
                q1_rank += bc.dim + legs.len();
            }
            for (c, bc) in self.part_cones.iter().enumerate() {
                // basic cone inequalities on its coordinates
                for ineq in bc.inequalities_on_basis() {
                    let mut row = vec![BigInt::zero(); q1_rank];
                    for (i, x) in ineq.into_iter().enumerate() {
                        row[part_offsets[c] + i] = x;
                    }
                    q1_ineqs.push(row);
                }
                // puncture coordinates: l >= 0 and leg point inside sigma(L)
                for flag in self.flags.iter().filter(|f| f.component == c) {
                    let lcol = leg_offsets[c][flag.leg];
                    let mut row = vec![BigInt::zero(); q1_rank];
                    row[lcol] = BigInt::from(1);
                    q1_ineqs.push(row);
                    let target = &self.parts[c].base.sigma_l[flag.leg];
                    let cone_l = self.complex.cone(target).unwrap();
                    let ev = self.flag_evaluation(flag)?;
                    let u = &self.parts[c].base.u_l[flag.leg];
                    for fct in cone_l.facet_normals() {
                        let mut row = vec![BigInt::zero(); q1_rank];
                        let fe = ev.transpose().mul_vec(fct);
                        for (i, x) in fe.into_iter().enumerate() {
                            row[part_offsets[c] + i] = x;
                        }
                        let fu: BigInt = fct.iter().zip(u).map(|(a, b)| a * b).sum();
                        row[lcol] = fu;
                        q1_ineqs.push(row);
                    }
                }
            }
        }
        let q1 = FsSharpMonoid::from_dual_cone(Cone::from_inequalities(q1_rank, q1_ineqs, vec![]))?;

        // Q2: product over splitting edges of P_E
        let edge_dim: usize = self.edge_ranks.iter().sum();
        let mut q2_gens: Vec<Vec<BigInt>> = Vec::new();
        {
            let mut off = 0usize;
            for (k, &e) in self.split_edges.iter().enumerate() {
                let cone = self.complex.cone(&self.decorated.base.sigma_e[e]).unwrap();
                for g in cone.generators() {
                    let mut v = vec![BigInt::zero(); edge_dim];
                    for (i, x) in g.iter().enumerate() {
                        v[off + i] = x.clone();
                    }
                    q2_gens.push(v);
                }
                off += self.edge_ranks[k];
            }
        }
        let q2 = FsSharpMonoid::from_dual_cone(Cone::from_generators(edge_dim, q2_gens))?;

        // P: product over flags of P_E
        let flag_dim: usize = self
            .flags
            .iter()
            .map(|f| {
                let k = self.split_edges.iter().position(|&e| e == f.edge).unwrap();
                self.edge_ranks[k]
            })
            .sum();
        let mut p_gens: Vec<Vec<BigInt>> = Vec::new();
        {
            let mut off = 0usize;
            for f in &self.flags {
                let cone = self.complex.cone(&self.decorated.base.sigma_e[f.edge]).unwrap();
                for g in cone.generators() {
                    let mut v = vec![BigInt::zero(); flag_dim];
                    for (i, x) in g.iter().enumerate() {
                        v[off + i] = x.clone();
                    }
                    p_gens.push(v);
                }
                off += cone.ambient_rank();
            }
        }
        let p = FsSharpMonoid::from_dual_cone(Cone::from_generators(flag_dim, p_gens))?;

        // theta1^t: flag evaluation (Q1 coords -> flag coords)
        let mut theta1_t = IntMatrix::zero(flag_dim, q1_rank);
        {
            let mut row = 0usize;
            for flag in &self.flags {
                let ev = self.flag_evaluation(flag)?;
                theta1_t.add_block(row, part_offsets[flag.component], &ev);
                let u = &self.parts[flag.component].base.u_l[flag.leg];
                let lcol = leg_offsets[flag.component][flag.leg];
                for (r, x) in u.iter().enumerate() {
                    theta1_t.set(row + r, lcol, x.clone());
                }
                row += ev.rows();
            }
        }
        // theta2^t: diagonal (Q2 coords -> flag coords)
        let mut theta2_t = IntMatrix::zero(flag_dim, edge_dim);
        {
            let mut edge_offsets = Vec::new();
            let mut off = 0usize;
            for r in &self.edge_ranks {
                edge_offsets.push(off);
                off += r;
            }
            let mut row = 0usize;
            for flag in &self.flags {
                let k = self.split_edges.iter().position(|&e| e == flag.edge).unwrap();
                let rank = self.edge_ranks[k];
                for r in 0..rank {
                    theta2_t.set(row + r, edge_offsets[k] + r, BigInt::from(1));
                }
                row += rank;
            }
        }
        Ok(PointDiagram::new(p, q1, q2, theta1_t.transpose(), theta2_t.transpose()))
    }

    /// The component count through the four-point lemma on the assembled
    /// diagram; agrees with `mu` by the gluing-count theorem.
    pub fn fibre_components(&self) -> Result<BigInt> {
        fs_point_fibre_components(&self.point_diagram()?)
    }
}

/// Report of the rigid-type analysis over the base ray.
#[derive(Clone, Debug)]
pub struct RigidReport {
    pub psi: IntMatrix,
    pub psi_bar: IntMatrix,
    /// `|coker(Psi)_tors|`, the gluing multiplicity at the `Sigma(X)` level.
    pub mu: BigInt,
    /// `|coker(Psi-bar)_tors|`, the rigid tropical multiplicity `mu(tau)`.
    pub mu_rigid: BigInt,
    pub m_tau: BigInt,
    /// `mu(tau) / m_tau`, the degree of the gluing map onto its image.
    pub degree: BigRational,
    /// Exactness of `0 -> Z/m -> coker(Psi-bar)_tors -> coker(Psi)_tors -> 0`
    /// at the level of orders.
    pub snake_ok: bool,
    pub ker_psi_rank: usize,
    pub ker_psi_bar_rank: usize,
}

/// Analyze a rigid type: build Psi by splitting at all edges, build
/// Psi-bar over the fibre lattices, compute `m_tau`, `mu(tau)` and the
/// degree `mu(tau)/m_tau`.
pub fn rigid_report(complex: &ConeComplex, decorated: &DecoratedType) -> Result<RigidReport> {
    if !complex.has_delta() {
        return Err(Error::DeltaMissing);
    }
    let t = &decorated.base;
    if !t.graph.is_connected() {
        return Err(Error::InvalidType("rigid analysis requires a connected graph".into()));
    }
    let bc = basic_cone(t, complex)?;
    if bc.dim != 1 {
        return Err(Error::NonRigid { dim: bc.dim });
    }
    let m = m_tau(t, &bc, complex)?;

    let all_edges: BTreeSet<usize> = (0..t.graph.edges.len()).collect();
    let problem = GluingProblem::new(complex.clone(), decorated.clone(), all_edges)?;
    let psi = problem.build_psi()?;
    let mu = torsion_order(&cokernel(&psi));
    let ker_psi_rank = kernel_lattice(&psi).cols();

    // Psi-bar over the fibre lattices ker(delta)
    let mut v_bases = Vec::new();
    for v in 0..t.graph.n_vertices() {
        v_bases.push(complex.fibre_lattice_basis(&t.sigma_v[v])?);
    }
    let mut e_bases = Vec::new();
    for e in 0..t.graph.edges.len() {
        e_bases.push(complex.fibre_lattice_basis(&t.sigma_e[e])?);
    }
    let mut col_offsets = Vec::new();
    let mut cols = 0usize;
    for b in &v_bases {
        col_offsets.push(cols);
        cols += b.cols();
    }
    let edge_col0 = cols;
    cols += t.graph.edges.len();
    let mut row_offsets = Vec::new();
    let mut rows = 0usize;
    for b in &e_bases {
        row_offsets.push(rows);
        rows += b.cols();
    }
    let mut psi_bar = IntMatrix::zero(rows, cols);
    for (i, e) in t.graph.edges.iter().enumerate() {
        let target = &t.sigma_e[i];
        let delta_e = complex.delta(target).ok_or(Error::DeltaMissing)?;
        let du: BigInt = delta_e.iter().zip(&t.u_e[i]).map(|(a, b)| a * b).sum();
        if !du.is_zero() {
            return Err(Error::NotOverBase(format!(
                "contact order on edge {i} does not lie in the fibre lattice"
            )));
        }
        let u_bar = solve_matrix(&e_bases[i], &IntMatrix::from_columns(delta_e.len(), &[t.u_e[i].clone()]))
            .ok_or_else(|| Error::NotOverBase(format!("u on edge {i} not in the fibre lattice")))?;
        for (sign, v) in [(1i64, e.v1), (-1i64, e.v2)] {
            let face = complex.face_map(&t.sigma_v[v], target)?;
            let img = face.mul(&v_bases[v]);
            let in_bar = solve_matrix(&e_bases[i], &img).ok_or_else(|| {
                Error::NotOverBase("vertex fibre lattice does not land in edge fibre".to_string())
            })?;
            let block = if sign > 0 { in_bar.neg() } else { in_bar };
            // orientation v1 -> v2 means n_{v2} - n_{v1}; signs flipped above
            psi_bar.add_block(row_offsets[i], col_offsets[v], &block);
        }
        for r in 0..e_bases[i].cols() {
            psi_bar.set(row_offsets[i] + r, edge_col0 + i, u_bar.at(r, 0).clone());
        }
    }
    let mu_rigid = torsion_order(&cokernel(&psi_bar));
    let ker_psi_bar_rank = kernel_lattice(&psi_bar).cols();
    let snake_ok = mu_rigid == (&m * &mu);
    let degree = BigRational::new(mu_rigid.clone(), m.clone());
    Ok(RigidReport {
        psi,
        psi_bar,
        mu,
        mu_rigid,
        m_tau: m,
        degree,
        snake_ok,
        ker_psi_rank,
        ker_psi_bar_rank,
    })
}

/// One violating candidate of the flatness criterion.
#[derive(Clone, Debug)]
pub struct FlatnessViolation {
    pub candidate: usize,
    pub dim_tau_prime: usize,
    pub required: i64,
}

#[derive(Clone, Debug)]
pub struct FlatnessReport {
    pub flat: bool,
    pub dim_tau: usize,
    pub violations: Vec<FlatnessViolation>,
}

/// Evaluate the tropical flatness criterion of the evaluation map at the
/// given legs over the supplied contraction candidates:
/// `dim tau' >= dim tau + sum_L (dim sigma'(L) - dim sigma(L))`.
pub fn flatness_check(
    complex: &ConeComplex,
    t: &TropicalType,
    legs: &[usize],
    candidates: &[(TropicalType, Contraction)],
) -> Result<FlatnessReport> {
    for &l in legs {
        if l >= t.graph.legs.len() {
            return Err(Error::OutOfRange(format!("leg {l} out of range")));
        }
    }
    let dim_tau = basic_cone(t, complex)?.dim;
    let mut violations = Vec::new();
    for (ci, (t_prime, phi)) in candidates.iter().enumerate() {
        if !crate::types::contraction_check(t_prime, t, phi, complex)? {
            return Err(Error::NotAContraction(format!(
                "candidate {ci} violates the contraction conditions"
            )));
        }
        let dim_prime = basic_cone(t_prime, complex)?.dim;
        let mut excess: i64 = 0;
        for &l in legs {
            let src_leg = phi
                .leg_map
                .iter()
                .position(|&j| j == l)
                .ok_or_else(|| Error::NotAContraction(format!("leg {l} has no preimage")))?;
            let d_prime = complex.cone(&t_prime.sigma_l[src_leg]).unwrap().ambient_rank() as i64;
            let d = complex.cone(&t.sigma_l[l]).unwrap().ambient_rank() as i64;
            excess += d_prime - d;
        }
        let required = dim_tau as i64 + excess;
        if (dim_prime as i64) < required {
            violations.push(FlatnessViolation { candidate: ci, dim_tau_prime: dim_prime, required });
        }
    }
    Ok(FlatnessReport { flat: violations.is_empty(), dim_tau, violations })
}
