//! Arbitrary-precision integer linear algebra: Smith normal forms, kernels,
//! cokernels, torsion orders, lattice indices and saturations.
//!
//! Everything here is exact. Matrices are maps of free lattices
//! `Z^cols -> Z^rows`, stored row-major.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense integer matrix, row-major. Entries are arbitrary-precision.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl std::fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.at(r, c).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        Ok(IntMatrix { rows, cols, entries })
    }

    /// Convenience constructor from machine integers, mostly for tests.
    pub fn from_rows_i64(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend(row.iter().map(|&x| BigInt::from(x)));
        }
        IntMatrix { rows: r, cols: c, entries }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(ambient: usize, cols: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zero(ambient, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), ambient, "column length mismatch");
            for i in 0..ambient {
                m.set(i, j, col[i].clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> Vec<BigInt> {
        (0..self.cols).map(|c| self.at(r, c).clone()).collect()
    }

    pub fn column(&self, c: usize) -> Vec<BigInt> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<BigInt>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.at(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let add = a * other.at(k, c);
                    let cur = out.at(r, c) + add;
                    out.set(r, c, cur);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.at(r, c) * &v[c]).sum())
            .collect()
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| -e).collect(),
        }
    }

    /// Stack `self` on top of `other`.
    pub fn vstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        IntMatrix { rows: self.rows + other.rows, cols: self.cols, entries }
    }

    /// Place `other` to the right of `self`.
    pub fn hstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        let mut out = IntMatrix::zero(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.at(r, c).clone());
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.at(r, c).clone());
            }
        }
        out
    }

    /// Write `block` into `self` with upper-left corner at `(r0, c0)`.
    pub fn put_block(&mut self, r0: usize, c0: usize, block: &IntMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for r in 0..block.rows {
            for c in 0..block.cols {
                self.set(r0 + r, c0 + c, block.at(r, c).clone());
            }
        }
    }

    /// Add `block` into `self` at `(r0, c0)`.
    pub fn add_block(&mut self, r0: usize, c0: usize, block: &IntMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for r in 0..block.rows {
            for c in 0..block.cols {
                let v = self.at(r0 + r, c0 + c) + block.at(r, c);
                self.set(r0 + r, c0 + c, v);
            }
        }
    }

    pub fn to_i64_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| {
                        use num_traits::ToPrimitive;
                        self.at(r, c).to_i64().expect("entry does not fit in i64")
                    })
                    .collect()
            })
            .collect()
    }
}

/// `U * M * V = D` with `U`, `V` unimodular and `D` diagonal with a
/// divisibility chain `d_1 | d_2 | ...` of nonnegative entries.
#[derive(Clone, Debug)]
pub struct SNFDecomposition {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
    pub rank: usize,
}

impl SNFDecomposition {
    /// The nonzero diagonal entries, in chain order.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.d.at(i, i).clone()).collect()
    }
}

/// Deterministic Smith normal form.
///
/// Pivot selection: smallest absolute value in the working submatrix,
/// ties broken by (row, col). This makes `U`, `V` reproducible.
pub fn smith_normal_form(m: &IntMatrix) -> SNFDecomposition {
    let rows = m.rows();
    let cols = m.cols();
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut u_inv = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    // Row op on d: row_i += q * row_t, mirrored on u; u_inv gets the
    // inverse column op so that u * u_inv stays the identity.
    fn row_add(d: &mut IntMatrix, u: &mut IntMatrix, u_inv: &mut IntMatrix, i: usize, t: usize, q: &BigInt) {
        for c in 0..d.cols() {
            let val = d.at(i, c) + q * d.at(t, c);
            d.set(i, c, val);
        }
        for c in 0..u.cols() {
            let val = u.at(i, c) + q * u.at(t, c);
            u.set(i, c, val);
        }
        for r in 0..u_inv.rows() {
            let val = u_inv.at(r, t) - q * u_inv.at(r, i);
            u_inv.set(r, t, val);
        }
    }
    fn col_add(d: &mut IntMatrix, v: &mut IntMatrix, j: usize, t: usize, q: &BigInt) {
        for r in 0..d.rows() {
            let val = d.at(r, j) + q * d.at(r, t);
            d.set(r, j, val);
        }
        for r in 0..v.rows() {
            let val = v.at(r, j) + q * v.at(r, t);
            v.set(r, j, val);
        }
    }
    fn row_swap(d: &mut IntMatrix, u: &mut IntMatrix, u_inv: &mut IntMatrix, i: usize, t: usize) {
        if i == t {
            return;
        }
        for c in 0..d.cols() {
            let a = d.at(i, c).clone();
            let b = d.at(t, c).clone();
            d.set(i, c, b);
            d.set(t, c, a);
        }
        for c in 0..u.cols() {
            let a = u.at(i, c).clone();
            let b = u.at(t, c).clone();
            u.set(i, c, b);
            u.set(t, c, a);
        }
        for r in 0..u_inv.rows() {
            let a = u_inv.at(r, i).clone();
            let b = u_inv.at(r, t).clone();
            u_inv.set(r, i, b);
            u_inv.set(r, t, a);
        }
    }
    fn col_swap(d: &mut IntMatrix, v: &mut IntMatrix, j: usize, t: usize) {
        if j == t {
            return;
        }
        for r in 0..d.rows() {
            let a = d.at(r, j).clone();
            let b = d.at(r, t).clone();
            d.set(r, j, b);
            d.set(r, t, a);
        }
        for r in 0..v.rows() {
            let a = v.at(r, j).clone();
            let b = v.at(r, t).clone();
            v.set(r, j, b);
            v.set(r, t, a);
        }
    }
    fn row_negate(d: &mut IntMatrix, u: &mut IntMatrix, u_inv: &mut IntMatrix, i: usize) {
        for c in 0..d.cols() {
            let val = -d.at(i, c);
            d.set(i, c, val);
        }
        for c in 0..u.cols() {
            let val = -u.at(i, c);
            u.set(i, c, val);
        }
        for r in 0..u_inv.rows() {
            let val = -u_inv.at(r, i);
            u_inv.set(r, i, val);
        }
    }

    let mut t = 0;
    while t < rows && t < cols {
        // Smallest-absolute-value nonzero pivot in the submatrix, ties by (row, col).
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !d.at(i, j).is_zero() {
                    let better = match pivot {
                        None => true,
                        Some((pi, pj)) => {
                            let cur = d.at(i, j).abs();
                            let best = d.at(pi, pj).abs();
                            cur < best || (cur == best && (i, j) < (pi, pj))
                        }
                    };
                    if better {
                        pivot = Some((i, j));
                    }
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        row_swap(&mut d, &mut u, &mut u_inv, pi, t);
        col_swap(&mut d, &mut v, pj, t);

        'reduce: loop {
            // Clear column t below the pivot; leftover remainders shrink the pivot.
            let mut dirty = false;
            for i in t + 1..rows {
                if d.at(i, t).is_zero() {
                    continue;
                }
                let p = d.at(t, t).clone();
                let (q, r) = d.at(i, t).div_mod_floor(&p);
                row_add(&mut d, &mut u, &mut u_inv, i, t, &-q);
                if !r.is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                // Move a strictly smaller remainder into pivot position.
                let mut best: Option<usize> = None;
                for i in t + 1..rows {
                    if !d.at(i, t).is_zero() {
                        let better = match best {
                            None => true,
                            Some(b) => d.at(i, t).abs() < d.at(b, t).abs(),
                        };
                        if better {
                            best = Some(i);
                        }
                    }
                }
                if let Some(i) = best {
                    row_swap(&mut d, &mut u, &mut u_inv, i, t);
                }
                continue 'reduce;
            }
            let mut dirty = false;
            for j in t + 1..cols {
                if d.at(t, j).is_zero() {
                    continue;
                }
                let p = d.at(t, t).clone();
                let (q, r) = d.at(t, j).div_mod_floor(&p);
                col_add(&mut d, &mut v, j, t, &-q);
                if !r.is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                let mut best: Option<usize> = None;
                for j in t + 1..cols {
                    if !d.at(t, j).is_zero() {
                        let better = match best {
                            None => true,
                            Some(b) => d.at(t, j).abs() < d.at(t, b).abs(),
                        };
                        if better {
                            best = Some(j);
                        }
                    }
                }
                if let Some(j) = best {
                    col_swap(&mut d, &mut v, j, t);
                }
                continue 'reduce;
            }
            // Row and column are clear; force the pivot to divide the rest.
            let p = d.at(t, t).clone();
            let mut offender: Option<usize> = None;
            'scan: for i in t + 1..rows {
                for j in t + 1..cols {
                    if !d.at(i, j).mod_floor(&p).is_zero() {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    row_add(&mut d, &mut u, &mut u_inv, t, i, &BigInt::one());
                    continue 'reduce;
                }
                None => break 'reduce,
            }
        }

        if d.at(t, t).is_negative() {
            row_negate(&mut d, &mut u, &mut u_inv, t);
        }
        t += 1;
    }

    let rank = (0..rows.min(cols)).take_while(|&i| !d.at(i, i).is_zero()).count();
    debug_assert_eq!(u.mul(m).mul(&v), d, "U*M*V != D");
    debug_assert_eq!(u.mul(&u_inv), IntMatrix::identity(rows));
    SNFDecomposition { d, u, u_inv, v, rank }
}

/// Finitely generated abelian group `Z^rank + sum Z/d_i` with the `d_i`
/// forming a divisibility chain. Unit factors are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FGAbelian {
    pub rank: usize,
    pub invariant_factors: Vec<BigInt>,
}

impl FGAbelian {
    pub fn new(rank: usize, factors: Vec<BigInt>) -> Self {
        let invariant_factors: Vec<BigInt> =
            factors.into_iter().filter(|f| !f.is_one()).collect();
        for w in invariant_factors.windows(2) {
            debug_assert!(w[1].mod_floor(&w[0]).is_zero(), "factors must form a chain");
        }
        FGAbelian { rank, invariant_factors }
    }

    pub fn trivial() -> Self {
        FGAbelian { rank: 0, invariant_factors: Vec::new() }
    }

    pub fn is_finite(&self) -> bool {
        self.rank == 0
    }
}

/// Cokernel of `M: Z^cols -> Z^rows`.
pub fn cokernel(m: &IntMatrix) -> FGAbelian {
    let snf = smith_normal_form(m);
    FGAbelian::new(m.rows() - snf.rank, snf.invariant_factors())
}

/// Order of the torsion part; 1 when torsion-free.
pub fn torsion_order(g: &FGAbelian) -> BigInt {
    g.invariant_factors.iter().product()
}

/// Basis of the kernel lattice of `M`, as matrix columns. The kernel of a
/// lattice map is automatically saturated.
pub fn kernel_lattice(m: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(m);
    let mut out = IntMatrix::zero(m.cols(), m.cols() - snf.rank);
    for (k, j) in (snf.rank..m.cols()).enumerate() {
        for i in 0..m.cols() {
            out.set(i, k, snf.v.at(i, j).clone());
        }
    }
    out
}

/// True iff `coker(M)` is finite, i.e. `rank(M) = rows`.
pub fn is_cokernel_finite(m: &IntMatrix) -> bool {
    smith_normal_form(m).rank == m.rows()
}

pub fn rank(m: &IntMatrix) -> usize {
    smith_normal_form(m).rank
}

/// Basis (as columns) of the lattice generated by the columns of `m`.
pub fn image_basis(m: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(m);
    // im(M) = im(U^-1 D): basis d_i * (i-th column of U^-1).
    let mut out = IntMatrix::zero(m.rows(), snf.rank);
    for j in 0..snf.rank {
        let d = snf.d.at(j, j);
        for i in 0..m.rows() {
            out.set(i, j, snf.u_inv.at(i, j) * d);
        }
    }
    out
}

/// Basis (as columns) of the saturation of the column span of `m`:
/// the largest sublattice of `Z^rows` with the same rational span.
pub fn saturate_sublattice(m: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(m);
    let mut out = IntMatrix::zero(m.rows(), snf.rank);
    for j in 0..snf.rank {
        for i in 0..m.rows() {
            out.set(i, j, snf.u_inv.at(i, j).clone());
        }
    }
    out
}

/// Solve `M x = b` over the integers.
pub fn solve(m: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(b.len(), m.rows(), "rhs length mismatch");
    let snf = smith_normal_form(m);
    let ub = snf.u.mul_vec(b);
    let mut y = vec![BigInt::zero(); m.cols()];
    for i in 0..m.rows() {
        if i < snf.rank {
            let d = snf.d.at(i, i);
            let (q, r) = ub[i].div_mod_floor(d);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !ub[i].is_zero() {
            return None;
        }
    }
    Some(snf.v.mul_vec(&y))
}

/// Solve `M X = B` column by column over the integers.
pub fn solve_matrix(m: &IntMatrix, b: &IntMatrix) -> Option<IntMatrix> {
    let mut out = IntMatrix::zero(m.cols(), b.cols());
    for j in 0..b.cols() {
        let col = solve(m, &b.column(j))?;
        for i in 0..m.cols() {
            out.set(i, j, col[i].clone());
        }
    }
    Some(out)
}

/// Index `[L_sup : L_sub]` of one full-rank sublattice in another.
///
/// Both lattices are given by generating columns; they must have equal rank
/// and `L_sub` must be contained in `L_sup`.
pub fn lattice_index(l_sub: &IntMatrix, l_sup: &IntMatrix) -> Result<BigInt> {
    if l_sub.rows() != l_sup.rows() {
        return Err(Error::Dimension("lattices live in different ambients".into()));
    }
    let sub_basis = image_basis(l_sub);
    let sup_basis = image_basis(l_sup);
    if sub_basis.cols() != sup_basis.cols() {
        return Err(Error::Containment(format!(
            "ranks differ: {} vs {}",
            sub_basis.cols(),
            sup_basis.cols()
        )));
    }
    let coeffs = solve_matrix(&sup_basis, &sub_basis)
        .ok_or_else(|| Error::Containment("sublattice not contained in superlattice".into()))?;
    let snf = smith_normal_form(&coeffs);
    if snf.rank < coeffs.cols() {
        return Err(Error::Containment("sublattice has lower rank than expected".into()));
    }
    Ok(snf.invariant_factors().iter().product())
}

/// Index (degree of divisibility) of an integer vector: the gcd of its
/// entries, 0 for the zero vector.
pub fn vector_index(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x))
}

/// Divide a vector by its index, making it primitive. Zero stays zero.
pub fn primitive_vector(v: &[BigInt]) -> Vec<BigInt> {
    let g = vector_index(v);
    if g.is_zero() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}
