//! Dense matrices over the integers: Smith and Hermite normal forms and
//! fraction-free determinants.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Panics on ragged input.
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, x) in row.iter().enumerate() {
                m[(i, j)] = x.clone().into();
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

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_slice(&self, start: usize, end: usize) -> IntMatrix {
        IntMatrix {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)].clone())
            .collect()
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

    /// row[dst] += k * row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        for j in 0..self.cols {
            let v = &self[(src, j)] * k;
            self[(dst, j)] += v;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        for i in 0..self.rows {
            let v = &self[(i, src)] * k;
            self[(i, dst)] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -&self[(i, j)];
            self[(i, j)] = v;
        }
    }

    /// Determinant by Bareiss fraction-free elimination. Panics if not square.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !m[(i, k)].is_zero()) {
                    Some(i) => {
                        m.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)]) / &prev;
                    m[(i, j)] = v;
                }
            }
            prev = m[(k, k)].clone();
        }
        sign * &m[(n - 1, n - 1)]
    }

    /// Smith normal form: returns `(U, D, V)` with `D = U * self * V`, `U`
    /// and `V` unimodular, `D` diagonal with non-negative entries
    /// `d1 | d2 | ...`. Pivots are chosen as the first entry of minimal
    /// absolute value in row-major order, so the output is deterministic.
    pub fn smith_normal_form(&self) -> (IntMatrix, IntMatrix, IntMatrix) {
        let (m, n) = (self.rows, self.cols);
        let mut d = self.clone();
        let mut u = IntMatrix::identity(m);
        let mut v = IntMatrix::identity(n);

        for t in 0..m.min(n) {
            loop {
                // Smallest nonzero entry of the trailing block becomes the pivot.
                let mut best: Option<(usize, usize)> = None;
                for i in t..m {
                    for j in t..n {
                        if d[(i, j)].is_zero() {
                            continue;
                        }
                        if best.is_none_or(|(bi, bj)| d[(i, j)].abs() < d[(bi, bj)].abs()) {
                            best = Some((i, j));
                        }
                    }
                }
                let Some((pi, pj)) = best else {
                    return (u, d, v);
                };
                d.swap_rows(t, pi);
                u.swap_rows(t, pi);
                d.swap_cols(t, pj);
                v.swap_cols(t, pj);

                let mut clean = true;
                for i in t + 1..m {
                    if d[(i, t)].is_zero() {
                        continue;
                    }
                    let q = -d[(i, t)].div_floor(&d[(t, t)]);
                    d.add_row(i, t, &q);
                    u.add_row(i, t, &q);
                    clean &= d[(i, t)].is_zero();
                }
                for j in t + 1..n {
                    if d[(t, j)].is_zero() {
                        continue;
                    }
                    let q = -d[(t, j)].div_floor(&d[(t, t)]);
                    d.add_col(j, t, &q);
                    v.add_col(j, t, &q);
                    clean &= d[(t, j)].is_zero();
                }
                if !clean {
                    continue;
                }
                // Enforce the divisibility chain on the trailing block.
                let bad = (t + 1..m)
                    .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !d[(i, j)].is_multiple_of(&d[(t, t)]));
                match bad {
                    Some((i, _)) => {
                        let one = BigInt::one();
                        d.add_row(t, i, &one);
                        u.add_row(t, i, &one);
                    }
                    None => break,
                }
            }
            if d[(t, t)].is_negative() {
                d.negate_row(t);
                u.negate_row(t);
            }
        }
        (u, d, v)
    }

    /// Row-style Hermite normal form: returns `(T, H)` with `H = T * self`,
    /// `T` unimodular, `H` in row echelon form with positive pivots and the
    /// entries above each pivot reduced into `[0, pivot)`.
    pub fn hermite_normal_form(&self) -> (IntMatrix, IntMatrix) {
        let (m, n) = (self.rows, self.cols);
        let mut h = self.clone();
        let mut t = IntMatrix::identity(m);
        let mut r = 0;
        for c in 0..n {
            if r == m {
                break;
            }
            loop {
                let mut best: Option<usize> = None;
                for i in r..m {
                    if !h[(i, c)].is_zero()
                        && best.is_none_or(|b| h[(i, c)].abs() < h[(b, c)].abs())
                    {
                        best = Some(i);
                    }
                }
                let Some(b) = best else { break };
                h.swap_rows(r, b);
                t.swap_rows(r, b);
                let mut clean = true;
                for i in r + 1..m {
                    if h[(i, c)].is_zero() {
                        continue;
                    }
                    let q = -h[(i, c)].div_floor(&h[(r, c)]);
                    h.add_row(i, r, &q);
                    t.add_row(i, r, &q);
                    clean &= h[(i, c)].is_zero();
                }
                if clean {
                    break;
                }
            }
            if h[(r, c)].is_zero() {
                continue;
            }
            if h[(r, c)].is_negative() {
                h.negate_row(r);
                t.negate_row(r);
            }
            for i in 0..r {
                let q = -h[(i, c)].div_floor(&h[(r, c)]);
                if !q.is_zero() {
                    h.add_row(i, r, &q);
                    t.add_row(i, r, &q);
                }
            }
            r += 1;
        }
        (t, h)
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;
    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * &rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    fn check_snf(a: &IntMatrix) -> IntMatrix {
        let (u, d, v) = a.smith_normal_form();
        assert_eq!(&(&u * a) * &v, d, "recomposition");
        assert!(d.is_diagonal());
        assert!(u.det().abs().is_one());
        assert!(v.det().abs().is_one());
        let diag = d.diagonal();
        for w in diag.windows(2) {
            assert!(
                w[0].is_zero() && w[1].is_zero() || (!w[0].is_zero() && w[1].is_multiple_of(&w[0]))
            );
        }
        assert!(diag.iter().all(|x| !x.is_negative()));
        d
    }

    #[test]
    fn snf_identity() {
        let a = IntMatrix::identity(3);
        assert_eq!(check_snf(&a), a);
    }

    #[test]
    fn snf_diag_4_6() {
        let d = check_snf(&m(&[vec![4, 0], vec![0, 6]]));
        assert_eq!(d, m(&[vec![2, 0], vec![0, 12]]));
    }

    #[test]
    fn snf_projective_plane_rays() {
        // rows are ray generators of P^2
        let a = m(&[vec![1, 0], vec![0, 1], vec![-1, -1]]);
        let d = check_snf(&a);
        assert_eq!(d.diagonal(), vec![BigInt::one(), BigInt::one()]);
        // cokernel Z^3 / im(A) has rank 3 - 2 = 1
        assert_eq!(
            d.rows() - d.diagonal().iter().filter(|x| !x.is_zero()).count(),
            1
        );
    }

    /// Invariant factors from determinantal divisors: `d1*...*dk` is the gcd
    /// of all k-by-k minors.
    fn invariant_factors_by_minors(a: &IntMatrix) -> Vec<BigInt> {
        let mut out = Vec::new();
        let mut prev = BigInt::one();
        for k in 1..=a.rows().min(a.cols()) {
            let mut g = BigInt::zero();
            for rs in (0..a.rows()).combinations(k) {
                for cs in (0..a.cols()).combinations(k) {
                    let minor: Vec<Vec<BigInt>> = rs
                        .iter()
                        .map(|&i| cs.iter().map(|&j| a[(i, j)].clone()).collect())
                        .collect();
                    g = g.gcd(&IntMatrix::from_rows(&minor).det());
                }
            }
            if g.is_zero() {
                out.push(BigInt::zero());
                prev = BigInt::zero();
            } else {
                out.push(&g / &prev);
                prev = g;
            }
        }
        out
    }

    #[test]
    fn snf_matches_determinantal_divisors() {
        for entries in (0..4)
            .map(|_| -2i64..=2)
            .multi_cartesian_product()
            .step_by(7)
        {
            let a = m(&[entries[0..2].to_vec(), entries[2..4].to_vec()]);
            assert_eq!(
                check_snf(&a).diagonal(),
                invariant_factors_by_minors(&a),
                "{a}"
            );
        }
        for a in [
            m(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]),
            m(&[vec![4, 0], vec![0, 6]]),
            m(&[vec![1, 0], vec![0, 1], vec![-1, 1], vec![0, -1]]),
            m(&[vec![6, 10, 15]]),
        ] {
            assert_eq!(
                check_snf(&a).diagonal(),
                invariant_factors_by_minors(&a),
                "{a}"
            );
        }
    }

    #[test]
    fn determinant() {
        assert_eq!(m(&[vec![1, 2], vec![3, 4]]).det(), BigInt::from(-2));
        assert_eq!(
            m(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 5]]).det(),
            BigInt::from(-5)
        );
        assert_eq!(m(&[vec![1, 2], vec![2, 4]]).det(), BigInt::zero());
    }

    #[test]
    fn hermite_form() {
        let g = m(&[vec![0, 1, 0, 1], vec![1, 1, 1, 2]]);
        let (t, h) = g.hermite_normal_form();
        assert_eq!(&t * &g, h);
        assert!(t.det().abs().is_one());
        assert_eq!(h, m(&[vec![1, 0, 1, 1], vec![0, 1, 0, 1]]));
    }
}
