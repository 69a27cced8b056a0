//! Exact integer matrices, Smith normal form, and Hermite-basis utilities.
//!
//! Everything here runs on unbounded integers with no modular shortcuts:
//! entries can grow during elimination and the matrices involved (quadruple
//! relation lattices) stay small enough that exactness is affordable.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Dense integer matrix, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c));
        IntMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.at(i, j).clone();
            *self.at_mut(i, j) = v;
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -self.at(i, j).clone();
            *self.at_mut(i, j) = v;
        }
    }

    /// row[dst] += q * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = self.at(dst, j) + q * self.at(src, j);
            *self.at_mut(dst, j) = v;
        }
    }

    /// col[dst] += q * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = self.at(i, dst) + q * self.at(i, src);
            *self.at_mut(i, dst) = v;
        }
    }
}

/// Smith normal form restricted to what the model construction needs: the
/// diagonal `d₁ | d₂ | …` and the accumulated **right** transform `Q`
/// (unimodular, `cols × cols`) with `P·M·Q = D` for some unimodular `P` that
/// is not tracked.
///
/// Row operations on `M` do not change its row lattice, so
/// `rowlattice(M)·Q = rowlattice(D)`: the columns of `Q` give the coordinate
/// change under which the relation lattice becomes diagonal.
#[derive(Debug, Clone)]
pub struct Snf {
    pub diag: Vec<BigInt>,
    pub right: IntMat,
    pub rank: usize,
}

impl Snf {
    /// Diagonal entries that witness torsion: not 0 and not ±1.
    pub fn torsion_invariants(&self) -> Vec<BigInt> {
        self.diag
            .iter()
            .filter(|d| !d.is_zero() && !d.is_one())
            .cloned()
            .collect()
    }
}

fn find_pivot(m: &IntMat, from: usize) -> Option<(usize, usize)> {
    // Smallest nonzero entry in absolute value keeps growth in check.
    let mut best: Option<(usize, usize)> = None;
    for i in from..m.rows {
        for j in from..m.cols {
            let v = m.at(i, j);
            if v.is_zero() {
                continue;
            }
            match &best {
                None => best = Some((i, j)),
                Some(&(bi, bj)) => {
                    if v.abs() < m.at(bi, bj).abs() {
                        best = Some((i, j));
                    }
                }
            }
        }
    }
    best
}

/// Smith normal form by elimination with pivoting on the smallest nonzero
/// entry, tracking only the right transform.
pub fn smith_normal_form(mut m: IntMat) -> Snf {
    let cols = m.cols;
    let mut right = IntMat::identity(cols);
    let bound = m.rows.min(m.cols);
    let mut k = 0;

    while k < bound {
        let Some((pi, pj)) = find_pivot(&m, k) else {
            break;
        };
        m.swap_rows(k, pi);
        m.swap_cols(k, pj);
        right.swap_cols(k, pj);

        // Clear row k and column k; pivoting again whenever a remainder
        // appears keeps the pivot the gcd of its row and column.
        loop {
            let mut clean = true;
            for i in (k + 1)..m.rows {
                if !m.at(i, k).is_zero() {
                    let q = -(m.at(i, k) / m.at(k, k));
                    m.add_row_multiple(i, k, &q);
                    if !m.at(i, k).is_zero() {
                        m.swap_rows(k, i);
                        clean = false;
                    }
                }
            }
            for j in (k + 1)..m.cols {
                if !m.at(k, j).is_zero() {
                    let q = -(m.at(k, j) / m.at(k, k));
                    m.add_col_multiple(j, k, &q);
                    right.add_col_multiple(j, k, &q);
                    if !m.at(k, j).is_zero() {
                        m.swap_cols(k, j);
                        right.swap_cols(k, j);
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }

        if m.at(k, k).is_negative() {
            m.negate_col(k);
            right.negate_col(k);
        }
        k += 1;
    }

    // Enforce the divisibility chain d_k | d_{k+1}.
    let mut k = 0;
    while k + 1 < bound {
        if m.at(k, k).is_zero() {
            break;
        }
        let mut fixed = true;
        for j in (k + 1)..bound {
            if m.at(j, j).is_zero() {
                continue;
            }
            if !(m.at(j, j) % m.at(k, k)).is_zero() {
                // Fold column j into column k and rediagonalize the 2x2 block.
                m.add_col_multiple(k, j, &BigInt::one());
                right.add_col_multiple(k, j, &BigInt::one());
                fix_block(&mut m, &mut right, k, j);
                fixed = false;
            }
        }
        if fixed {
            k += 1;
        }
    }

    let diag: Vec<BigInt> = (0..bound).map(|i| m.at(i, i).clone()).collect();
    let rank = diag.iter().filter(|d| !d.is_zero()).count();
    Snf { diag, right, rank }
}

/// Rediagonalizes the 2x2 block at rows/cols {k, j} after a fold, leaving all
/// other diagonal entries untouched.
fn fix_block(m: &mut IntMat, right: &mut IntMat, k: usize, j: usize) {
    loop {
        // State: m[k][k], m[j][k] (just created by the fold), m[j][j].
        if m.at(j, k).is_zero() && m.at(k, j).is_zero() {
            break;
        }
        if !m.at(j, k).is_zero() {
            if m.at(j, k).abs() < m.at(k, k).abs() || m.at(k, k).is_zero() {
                m.swap_rows(k, j);
            }
            let q = -(m.at(j, k) / m.at(k, k));
            m.add_row_multiple(j, k, &q);
            if !m.at(j, k).is_zero() {
                continue;
            }
        }
        if !m.at(k, j).is_zero() {
            if m.at(k, j).abs() < m.at(k, k).abs() || m.at(k, k).is_zero() {
                m.swap_cols(k, j);
                right.swap_cols(k, j);
            }
            let q = -(m.at(k, j) / m.at(k, k));
            m.add_col_multiple(j, k, &q);
            right.add_col_multiple(j, k, &q);
        }
    }
    if m.at(k, k).is_negative() {
        m.negate_col(k);
        right.negate_col(k);
    }
    if m.at(j, j).is_negative() {
        m.negate_col(j);
        right.negate_col(j);
    }
}

/// Row-style Hermite basis: returns a matrix whose rows are a basis of the
/// row lattice of `m` (echelon form, pivots positive, entries above a pivot
/// reduced modulo it). The number of rows equals the rank.
pub fn hermite_basis(mut m: IntMat) -> IntMat {
    let mut pivot_row = 0;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for col in 0..m.cols {
        // Reduce all rows below pivot_row in this column to a single nonzero.
        loop {
            let mut best: Option<usize> = None;
            for i in pivot_row..m.rows {
                if !m.at(i, col).is_zero() {
                    best = match best {
                        None => Some(i),
                        Some(b) => {
                            if m.at(i, col).abs() < m.at(b, col).abs() {
                                Some(i)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            }
            let Some(b) = best else {
                break;
            };
            m.swap_rows(pivot_row, b);
            let mut again = false;
            for i in (pivot_row + 1)..m.rows {
                if !m.at(i, col).is_zero() {
                    let q = -(m.at(i, col) / m.at(pivot_row, col));
                    m.add_row_multiple(i, pivot_row, &q);
                    if !m.at(i, col).is_zero() {
                        again = true;
                    }
                }
            }
            if !again {
                break;
            }
        }
        if pivot_row < m.rows && !m.at(pivot_row, col).is_zero() {
            if m.at(pivot_row, col).is_negative() {
                m.negate_row(pivot_row);
            }
            pivots.push((pivot_row, col));
            pivot_row += 1;
        }
        if pivot_row == m.rows {
            break;
        }
    }
    // Reduce entries above each pivot.
    for &(r, c) in pivots.iter().rev() {
        for i in 0..r {
            let q = -(m.at(i, c).div_floor(m.at(r, c)));
            m.add_row_multiple(i, r, &q);
        }
    }
    let rank = pivots.len();
    IntMat::from_rows((0..rank).map(|i| m.row(i).to_vec()).collect())
}

/// Solves `z · H = v` over `ℤ` for `H` a Hermite basis (as produced by
/// [`hermite_basis`]); returns `None` when `v` is not in the row lattice.
pub fn solve_in_hermite_basis(h: &IntMat, v: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(h.cols, v.len());
    let mut residue = v.to_vec();
    let mut coeffs = vec![BigInt::zero(); h.rows];
    for i in 0..h.rows {
        let pivot_col = (0..h.cols).find(|&j| !h.at(i, j).is_zero())?;
        let (q, r) = residue[pivot_col].div_rem(h.at(i, pivot_col));
        if !r.is_zero() {
            return None;
        }
        for j in 0..h.cols {
            residue[j] -= &q * h.at(i, j);
        }
        coeffs[i] = q;
    }
    if residue.iter().all(BigInt::is_zero) {
        Some(coeffs)
    } else {
        None
    }
}
