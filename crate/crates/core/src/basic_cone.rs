//! The basic cone of a tropical type: the cone of tuples (vertex positions,
//! edge lengths) realizing the type, its saturated lattice span, and the
//! evaluation maps. Realizability is the strictified version of the same
//! system.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::complex::ConeComplex;
use crate::error::{Error, Result};
use crate::lattice::{kernel_lattice, vector_index, IntMatrix};
use crate::lp::{feasible, find_point, Constraint};
use crate::types::TropicalType;

/// The basic cone `tau` of a type, in ambient coordinates
/// `prod_v N_{sigma(v)} x prod_E Z`.
#[derive(Clone, Debug)]
pub struct BasicCone {
    pub ambient_dim: usize,
    pub vertex_offsets: Vec<usize>,
    pub vertex_ranks: Vec<usize>,
    pub edge_offset: usize,
    /// All equalities cutting the span, including implicit ones.
    pub equalities: Vec<Vec<BigInt>>,
    /// The remaining inequalities; each admits a strict solution.
    pub inequalities: Vec<Vec<BigInt>>,
    /// Basis of the saturated span `N_tau`, as columns (ambient x dim).
    pub basis: IntMatrix,
    pub dim: usize,
    /// An integral point of the relative interior.
    pub witness: Vec<BigInt>,
}

impl BasicCone {
    /// The projection `N_tau -> N_{sigma(v)}`: rows of the basis belonging
    /// to the vertex block.
    pub fn ev_vertex(&self, v: usize) -> IntMatrix {
        let mut m = IntMatrix::zero(self.vertex_ranks[v], self.dim);
        for r in 0..self.vertex_ranks[v] {
            for c in 0..self.dim {
                m.set(r, c, self.basis.at(self.vertex_offsets[v] + r, c).clone());
            }
        }
        m
    }

    /// Express a linear functional on the ambient in basis coordinates.
    pub fn restrict_row(&self, row: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(row.len(), self.ambient_dim);
        (0..self.dim)
            .map(|j| {
                (0..self.ambient_dim)
                    .map(|i| &row[i] * self.basis.at(i, j))
                    .sum()
            })
            .collect()
    }

    /// The inequalities in basis coordinates; together they cut `tau` out of
    /// the span.
    pub fn inequalities_on_basis(&self) -> Vec<Vec<BigInt>> {
        self.inequalities.iter().map(|row| self.restrict_row(row)).collect()
    }
}

struct System {
    n_vars: usize,
    vertex_offsets: Vec<usize>,
    vertex_ranks: Vec<usize>,
    edge_offset: usize,
    equalities: Vec<Vec<BigInt>>,
    inequalities: Vec<Vec<BigInt>>,
}

fn scaled_row(n: usize, pieces: &[(usize, &[BigInt], i64)]) -> Vec<BigInt> {
    let mut row = vec![BigInt::zero(); n];
    for (offset, coeffs, scale) in pieces {
        for (i, c) in coeffs.iter().enumerate() {
            row[offset + i] += c * BigInt::from(*scale);
        }
    }
    row
}

/// Assemble the homogeneous system of the basic cone: vertex membership,
/// edge relations inside `sigma(E)`, nonnegative edge lengths, and the
/// fibre constraint when the complex carries `delta`.
fn assemble(t: &TropicalType, complex: &ConeComplex) -> Result<System> {
    let nv = t.graph.n_vertices();
    let mut vertex_offsets = Vec::with_capacity(nv);
    let mut vertex_ranks = Vec::with_capacity(nv);
    let mut off = 0usize;
    for v in 0..nv {
        let cone = complex
            .cone(&t.sigma_v[v])
            .ok_or_else(|| Error::InvalidType(format!("unknown cone `{}`", t.sigma_v[v])))?;
        vertex_offsets.push(off);
        vertex_ranks.push(cone.ambient_rank());
        off += cone.ambient_rank();
    }
    let edge_offset = off;
    let n_vars = off + t.graph.edges.len();

    let mut equalities: Vec<Vec<BigInt>> = Vec::new();
    let mut inequalities: Vec<Vec<BigInt>> = Vec::new();

    for v in 0..nv {
        let cone = complex.cone(&t.sigma_v[v]).unwrap();
        for eq in cone.equations() {
            equalities.push(scaled_row(n_vars, &[(vertex_offsets[v], eq, 1)]));
        }
        for fct in cone.facet_normals() {
            inequalities.push(scaled_row(n_vars, &[(vertex_offsets[v], fct, 1)]));
        }
    }
    for (i, e) in t.graph.edges.iter().enumerate() {
        let target = &t.sigma_e[i];
        let rank_e = complex.cone(target).unwrap().ambient_rank();
        let m1 = complex.face_map(&t.sigma_v[e.v1], target)?;
        let m2 = complex.face_map(&t.sigma_v[e.v2], target)?;
        // map(n_{v2}) - map(n_{v1}) - l_E u(E) = 0, coordinatewise
        for r in 0..rank_e {
            let mut row = vec![BigInt::zero(); n_vars];
            for c in 0..vertex_ranks[e.v2] {
                row[vertex_offsets[e.v2] + c] += m2.at(r, c);
            }
            for c in 0..vertex_ranks[e.v1] {
                row[vertex_offsets[e.v1] + c] -= m1.at(r, c);
            }
            row[edge_offset + i] = -t.u_e[i][r].clone();
            equalities.push(row);
        }
        // l_E >= 0
        let mut row = vec![BigInt::zero(); n_vars];
        row[edge_offset + i] = BigInt::one();
        inequalities.push(row);
    }
    if complex.has_delta() {
        // all vertices map to the same base point
        for v in 0..nv {
            if complex.delta(&t.sigma_v[v]).is_none() {
                return Err(Error::NotOverBase(format!(
                    "cone `{}` has no delta",
                    t.sigma_v[v]
                )));
            }
        }
        if nv > 1 {
            let d0 = complex.delta(&t.sigma_v[0]).unwrap().clone();
            for v in 1..nv {
                let dv = complex.delta(&t.sigma_v[v]).unwrap().clone();
                equalities.push(scaled_row(
                    n_vars,
                    &[(vertex_offsets[0], &d0, 1), (vertex_offsets[v], &dv, -1)],
                ));
            }
        }
    }
    Ok(System { n_vars, vertex_offsets, vertex_ranks, edge_offset, equalities, inequalities })
}

fn eq_constraints(eqs: &[Vec<BigInt>]) -> Vec<Constraint> {
    let mut out = Vec::new();
    for row in eqs {
        let coeffs: Vec<BigRational> = row.iter().map(|x| BigRational::from(x.clone())).collect();
        let [a, b] = Constraint::eq_pair(coeffs, BigRational::zero());
        out.push(a);
        out.push(b);
    }
    out
}

/// Compute the basic cone of a type over a complex.
pub fn basic_cone(t: &TropicalType, complex: &ConeComplex) -> Result<BasicCone> {
    let mut sys = assemble(t, complex)?;
    // implicit equalities: inequalities with no strict solution inside the
    // current system migrate into the equality set until stable
    loop {
        let mut promoted = None;
        for (i, row) in sys.inequalities.iter().enumerate() {
            let mut cs = eq_constraints(&sys.equalities);
            for other in &sys.inequalities {
                cs.push(Constraint::from_int(other, 0));
            }
            cs.push(Constraint::from_int(row, 1));
            if !feasible(sys.n_vars, &cs) {
                promoted = Some(i);
                break;
            }
        }
        match promoted {
            Some(i) => {
                let row = sys.inequalities.remove(i);
                sys.equalities.push(row);
            }
            None => break,
        }
    }
    // span basis: kernel of the stacked equalities
    let basis = if sys.equalities.is_empty() {
        IntMatrix::identity(sys.n_vars)
    } else {
        let m = IntMatrix::from_columns(sys.n_vars, &sys.equalities).transpose();
        kernel_lattice(&m)
    };
    let dim = basis.cols();
    // relative interior point: all surviving inequalities strict
    let witness = if dim == 0 {
        vec![BigInt::zero(); sys.n_vars]
    } else {
        let mut cs = eq_constraints(&sys.equalities);
        for row in &sys.inequalities {
            cs.push(Constraint::from_int(row, 1));
        }
        let pt = find_point(sys.n_vars, &cs)
            .ok_or_else(|| Error::InvalidType("basic cone has no interior point".into()))?;
        rational_to_integral(&pt)
    };
    Ok(BasicCone {
        ambient_dim: sys.n_vars,
        vertex_offsets: sys.vertex_offsets,
        vertex_ranks: sys.vertex_ranks,
        edge_offset: sys.edge_offset,
        equalities: sys.equalities,
        inequalities: sys.inequalities,
        basis,
        dim,
        witness,
    })
}

fn rational_to_integral(pt: &[BigRational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for x in pt {
        lcm = num_integer::lcm(lcm, x.denom().clone());
    }
    pt.iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect()
}

/// Is the type realizable: does a family of tropical maps of exactly this
/// type exist? Strictified system: vertices in the relative interior of
/// their cones, edge midpoints in the relative interior of `sigma(E)`,
/// positive edge lengths, and for each leg some positive extension into the
/// relative interior of `sigma(L)`.
pub fn is_realizable(t: &TropicalType, complex: &ConeComplex) -> Result<bool> {
    let sys = assemble(t, complex)?;
    // extra variables: one extension parameter per leg
    let n_vars = sys.n_vars + t.graph.legs.len();
    let lift = |row: &[BigInt]| -> Vec<BigRational> {
        let mut out: Vec<BigRational> =
            row.iter().map(|x| BigRational::from(x.clone())).collect();
        out.resize(n_vars, BigRational::zero());
        out
    };
    let mut cs: Vec<Constraint> = Vec::new();
    for row in &sys.equalities {
        let [a, b] = Constraint::eq_pair(lift(row), BigRational::zero());
        cs.push(a);
        cs.push(b);
    }
    let one = BigRational::one;
    // vertex interiors
    for v in 0..t.graph.n_vertices() {
        let cone = complex.cone(&t.sigma_v[v]).unwrap();
        for fct in cone.facet_normals() {
            let row = scaled_row(sys.n_vars, &[(sys.vertex_offsets[v], fct, 1)]);
            cs.push(Constraint { coeffs: lift(&row), rhs: one() });
        }
    }
    // positive edge lengths and midpoints interior to sigma(E)
    for (i, e) in t.graph.edges.iter().enumerate() {
        let mut row = vec![BigInt::zero(); sys.n_vars];
        row[sys.edge_offset + i] = BigInt::one();
        cs.push(Constraint { coeffs: lift(&row), rhs: one() });

        let target = &t.sigma_e[i];
        let cone_e = complex.cone(target).unwrap();
        let m1 = complex.face_map(&t.sigma_v[e.v1], target)?;
        // midpoint m = map(n_{v1}) + (1/2) l_E u(E)
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        for (rows, strict) in [
            (cone_e.equations(), false),
            (cone_e.facet_normals(), true),
        ] {
            for fct in rows {
                // fct . m as a functional in the variables
                let mut coeffs = vec![BigRational::zero(); n_vars];
                let fm = m1.transpose().mul_vec(fct);
                for c in 0..sys.vertex_ranks[e.v1] {
                    coeffs[sys.vertex_offsets[e.v1] + c] = BigRational::from(fm[c].clone());
                }
                let fu: BigInt = fct.iter().zip(&t.u_e[i]).map(|(a, b)| a * b).sum();
                coeffs[sys.edge_offset + i] = &half * BigRational::from(fu);
                if strict {
                    cs.push(Constraint { coeffs, rhs: one() });
                } else {
                    let [a, b] = Constraint::eq_pair(coeffs, BigRational::zero());
                    cs.push(a);
                    cs.push(b);
                }
            }
        }
    }
    // legs: n_v + t_L u(L) in relint(sigma(L)) for some t_L > 0
    for (i, l) in t.graph.legs.iter().enumerate() {
        let target = &t.sigma_l[i];
        let cone_l = complex.cone(target).unwrap();
        let m = complex.face_map(&t.sigma_v[l.vertex], target)?;
        let t_var = sys.n_vars + i;
        let mut row = vec![BigRational::zero(); n_vars];
        row[t_var] = BigRational::one();
        cs.push(Constraint { coeffs: row, rhs: one() });
        for (rows, strict) in [
            (cone_l.equations(), false),
            (cone_l.facet_normals(), true),
        ] {
            for fct in rows {
                let mut coeffs = vec![BigRational::zero(); n_vars];
                let fm = m.transpose().mul_vec(fct);
                for c in 0..sys.vertex_ranks[l.vertex] {
                    coeffs[sys.vertex_offsets[l.vertex] + c] = BigRational::from(fm[c].clone());
                }
                let fu: BigInt = fct.iter().zip(&t.u_l[i]).map(|(a, b)| a * b).sum();
                coeffs[t_var] = BigRational::from(fu);
                if strict {
                    cs.push(Constraint { coeffs, rhs: one() });
                } else {
                    let [a, b] = Constraint::eq_pair(coeffs, BigRational::zero());
                    cs.push(a);
                    cs.push(b);
                }
            }
        }
    }
    Ok(feasible(n_vars, &cs))
}

/// `m_tau`: the index of `delta(N_tau)` in `Z`, i.e. the smallest positive
/// base scaling carrying integral representatives. Errors when the type is
/// not over the base or the family does not dominate the base direction.
pub fn m_tau(t: &TropicalType, cone: &BasicCone, complex: &ConeComplex) -> Result<BigInt> {
    if !complex.has_delta() {
        return Err(Error::DeltaMissing);
    }
    if t.graph.n_vertices() == 0 {
        return Err(Error::InvalidType("type has no vertices".into()));
    }
    // delta of the first vertex block expressed on the basis; the fibre
    // equalities make the choice of vertex irrelevant
    let d0 = complex
        .delta(&t.sigma_v[0])
        .ok_or(Error::DeltaMissing)?;
    let row = scaled_row(cone.ambient_dim, &[(cone.vertex_offsets[0], d0, 1)]);
    let on_basis = cone.restrict_row(&row);
    let idx = vector_index(&on_basis);
    if idx.is_zero() {
        return Err(Error::NotOverBase(
            "the family is contained in the central fibre".into(),
        ));
    }
    Ok(idx.abs())
}
