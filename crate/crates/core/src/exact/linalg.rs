//! Exact Gauss-Jordan elimination over the rationals.

use num_traits::{One, Zero};

use super::rational::Rational;

/// Reduced row echelon form of a dense rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    /// Nonzero rows only, each normalized so its pivot entry is 1.
    pub rows: Vec<Vec<Rational>>,
    /// Pivot column of each row, strictly increasing.
    pub pivots: Vec<usize>,
    pub cols: usize,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Columns without a pivot.
    pub fn free_columns(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.cols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..self.cols).filter(|&j| !is_pivot[j]).collect()
    }

    /// Reduces `v` modulo the row space: the result is zero at every pivot
    /// column and differs from `v` by an element of the row space.
    pub fn reduce(&self, v: &mut [Rational]) {
        assert_eq!(v.len(), self.cols);
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p].is_zero() {
                continue;
            }
            let c = v[p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x -= &c * r;
                }
            }
        }
    }

    /// Basis of the null space `{x : A x = 0}`, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        self.free_columns()
            .into_iter()
            .map(|f| {
                let mut k = vec![Rational::zero(); self.cols];
                k[f] = Rational::one();
                for (row, &p) in self.rows.iter().zip(&self.pivots) {
                    k[p] = -row[f].clone();
                }
                k
            })
            .collect()
    }
}

/// Gauss-Jordan elimination. Pivots are taken left to right, choosing the
/// first row with a nonzero entry in the column.
pub fn rref(mut rows: Vec<Vec<Rational>>, cols: usize) -> Rref {
    for r in &rows {
        assert_eq!(r.len(), cols, "ragged matrix");
    }
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][c].recip();
        for x in rows[rank].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == rank || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *x -= &f * pv;
                }
            }
        }
        pivots.push(c);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    Rref { rows, pivots, cols }
}

/// Solution set of `A x = b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSolution {
    /// A particular solution (free variables set to zero), or `None` when
    /// the system is inconsistent.
    pub particular: Option<Vec<Rational>>,
    /// Basis of the null space of `A`.
    pub kernel: Vec<Vec<Rational>>,
}

/// Solves `A x = b` exactly, where `a` is given by rows with `cols` columns.
pub fn solve_linear(a: &[Vec<Rational>], cols: usize, b: &[Rational]) -> LinearSolution {
    assert_eq!(a.len(), b.len(), "right-hand side length");
    let augmented: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let full = rref(augmented, cols + 1);
    let inconsistent = full.pivots.last() == Some(&cols);
    let coeff = Rref {
        rows: full
            .rows
            .iter()
            .take(if inconsistent {
                full.rank() - 1
            } else {
                full.rank()
            })
            .map(|r| r[..cols].to_vec())
            .collect(),
        pivots: full.pivots.iter().copied().filter(|&p| p < cols).collect(),
        cols,
    };
    let particular = (!inconsistent).then(|| {
        let mut x = vec![Rational::zero(); cols];
        for (row, &p) in full.rows.iter().zip(&full.pivots) {
            x[p] = row[cols].clone();
        }
        x
    });
    LinearSolution {
        particular,
        kernel: coeff.kernel(),
    }
}

/// `A x` for a row-major `A`.
pub fn mat_vec(a: &[Vec<Rational>], x: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}
