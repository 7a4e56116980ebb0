//! Exact integer and rational matrices.
//!
//! Everything here is arbitrary precision. Rational elimination clears
//! denominators row by row and then runs fraction-free integer elimination,
//! dividing each row by its content after every step.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular")]
    Singular,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows*cols");
        IntMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix::new(rows, cols, vec![BigInt::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        IntMatrix::from_fn(n, n, |i, j| if i == j { BigInt::one() } else { BigInt::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntMatrix { rows, cols, data }
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        IntMatrix::from_fn(rows.len(), cols, |i, j| BigInt::from(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigInt) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        IntMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<IntMatrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut out = IntMatrix::identity(self.rows);
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = self.get(i, j);
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn determinant(&self) -> Result<BigInt, LinalgError> {
        let r = self.to_rational().determinant()?;
        Ok(r.to_integer())
    }

    pub fn to_rational(&self) -> RatMatrix {
        RatMatrix::from_fn(self.rows, self.cols, |i, j| {
            Rational::from_integer(self.get(i, j).clone())
        })
    }

    /// Diagonal entries `D[i][i]` for `i < min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).collect()
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

    /// row[target] += factor * row[source]
    fn add_row_multiple(&mut self, target: usize, source: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let s = self.data[source * self.cols + j].clone();
            if !s.is_zero() {
                self.data[target * self.cols + j] += factor * s;
            }
        }
    }

    /// col[target] += factor * col[source]
    fn add_col_multiple(&mut self, target: usize, source: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let s = self.data[i * self.cols + source].clone();
            if !s.is_zero() {
                self.data[i * self.cols + target] += factor * s;
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let e = &mut self.data[i * self.cols + j];
            *e = -std::mem::take(e);
        }
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

/// `U·A·V = D` with `U`, `V` unimodular and `D` in Smith normal form.
#[derive(Clone, Debug)]
pub struct SnfResult {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SnfResult {
    /// Nonzero diagonal entries (`d₁ | d₂ | …`).
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        self.d.diagonal().into_iter().filter(|x| !x.is_zero()).collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> SnfResult {
    let (m, n) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);

    for t in 0..m.min(n) {
        let Some((pi, pj)) = smallest_entry(&d, t..m, t..n) else {
            break;
        };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);

        loop {
            let pivot = d.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..m {
                if d.get(i, t).is_zero() {
                    continue;
                }
                let q = -d.get(i, t).div_floor(&pivot);
                d.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                clean &= d.get(i, t).is_zero();
            }
            for j in t + 1..n {
                if d.get(t, j).is_zero() {
                    continue;
                }
                let q = -d.get(t, j).div_floor(&pivot);
                d.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                clean &= d.get(t, j).is_zero();
            }
            if !clean {
                // a remainder smaller than the pivot survived; promote it
                let col = smallest_entry(&d, t..m, t..t + 1);
                let row = smallest_entry(&d, t..t + 1, t..n);
                let pick = match (col, row) {
                    (Some(c), Some(r)) => {
                        if d.get(c.0, c.1).abs() <= d.get(r.0, r.1).abs() {
                            c
                        } else {
                            r
                        }
                    }
                    (Some(c), None) => c,
                    (None, Some(r)) => r,
                    (None, None) => unreachable!("pivot is nonzero"),
                };
                d.swap_rows(t, pick.0);
                u.swap_rows(t, pick.0);
                d.swap_cols(t, pick.1);
                v.swap_cols(t, pick.1);
                continue;
            }
            // divisibility: fold a offending row into the pivot row
            let offending = (t + 1..m).find(|&i| (t + 1..n).any(|j| !d.get(i, j).is_multiple_of(&pivot)));
            match offending {
                Some(i) => {
                    let one = BigInt::one();
                    d.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    SnfResult { u, d, v }
}

fn smallest_entry(d: &IntMatrix, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), BigInt)> = None;
    for i in rows {
        for j in cols.clone() {
            let e = d.get(i, j);
            if e.is_zero() {
                continue;
            }
            let a = e.abs();
            if best.as_ref().is_none_or(|(_, b)| a < *b) {
                best = Some(((i, j), a));
            }
        }
    }
    best.map(|(pos, _)| pos)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows*cols");
        RatMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix::new(rows, cols, vec![Rational::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        RatMatrix::from_fn(n, n, |i, j| if i == j { Rational::one() } else { Rational::zero() })
    }

    pub fn scalar(n: usize, value: Rational) -> Self {
        RatMatrix::from_fn(n, n, |i, j| if i == j { value.clone() } else { Rational::zero() })
    }

    pub fn diagonal(values: &[Rational]) -> Self {
        let n = values.len();
        RatMatrix::from_fn(n, n, |i, j| if i == j { values[i].clone() } else { Rational::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RatMatrix { rows, cols, data }
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        RatMatrix::from_fn(rows.len(), cols, |i, j| rat_int(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        RatMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .fold(Rational::zero(), |acc, x| acc + x)
            })
            .collect()
    }

    pub fn add(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RatMatrix::new(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn sub(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RatMatrix::new(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        )
    }

    pub fn scale(&self, c: &Rational) -> RatMatrix {
        RatMatrix::new(self.rows, self.cols, self.data.iter().map(|a| a * c).collect())
    }

    pub fn trace(&self) -> Rational {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i).clone())
            .fold(Rational::zero(), |acc, x| acc + x)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = self.get(i, j);
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &RatMatrix) -> RatMatrix {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        RatMatrix::from_fn(r, c, |i, j| {
            let a = self.get(i / other.rows, j / other.cols);
            if a.is_zero() {
                return Rational::zero();
            }
            a * other.get(i % other.rows, j % other.cols)
        })
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &RatMatrix) -> RatMatrix {
        RatMatrix::from_fn(self.rows + other.rows, self.cols + other.cols, |i, j| {
            match (i < self.rows, j < self.cols) {
                (true, true) => self.get(i, j).clone(),
                (false, false) => other.get(i - self.rows, j - self.cols).clone(),
                _ => Rational::zero(),
            }
        })
    }

    pub fn inverse(&self) -> Result<RatMatrix, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RatMatrix::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a.get(r, col).is_zero())
                .ok_or(LinalgError::Singular)?;
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let p = a.get(col, col).recip();
            a.scale_row(col, &p);
            inv.scale_row(col, &p);
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let f = -a.get(r, col).clone();
                a.add_row_multiple(r, col, &f);
                inv.add_row_multiple(r, col, &f);
            }
        }
        Ok(inv)
    }

    pub fn determinant(&self) -> Result<Rational, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a.get(r, col).is_zero()) else {
                return Ok(Rational::zero());
            };
            if pivot != col {
                a.swap_rows(col, pivot);
                det = -det;
            }
            let p = a.get(col, col).clone();
            det *= &p;
            for r in col + 1..n {
                if a.get(r, col).is_zero() {
                    continue;
                }
                let f = -(a.get(r, col) / &p);
                a.add_row_multiple(r, col, &f);
            }
        }
        Ok(det)
    }

    /// Integer power; negative exponents use the inverse.
    pub fn pow(&self, k: i64) -> Result<RatMatrix, LinalgError> {
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut result = RatMatrix::identity(self.rows);
        let mut square = base;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&square);
            }
            e >>= 1;
            if e > 0 {
                square = square.mul(&square);
            }
        }
        Ok(result)
    }

    pub fn rank(&self) -> usize {
        rank_of_rows(&self.to_rows(), self.cols)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn scale_row(&mut self, i: usize, c: &Rational) {
        for j in 0..self.cols {
            let e = &mut self.data[i * self.cols + j];
            if !e.is_zero() {
                *e *= c;
            }
        }
    }

    fn add_row_multiple(&mut self, target: usize, source: usize, factor: &Rational) {
        for j in 0..self.cols {
            let s = self.data[source * self.cols + j].clone();
            if !s.is_zero() {
                self.data[target * self.cols + j] += factor * s;
            }
        }
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Multiplies a rational vector by the lcm of its denominators.
pub fn clear_denominators(v: &[Rational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    v.iter().map(|x| x.numer() * (&l / x.denom())).collect()
}

fn make_primitive(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in row.iter_mut() {
            *x /= &g;
        }
    }
}

/// Fraction-free row echelon form. Returns the nonzero echelon rows and their
/// pivot columns (strictly increasing).
pub fn integer_echelon(mut rows: Vec<Vec<BigInt>>, cols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    for r in rows.iter_mut() {
        make_primitive(r);
    }
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..cols {
        if top == rows.len() {
            break;
        }
        // smallest nonzero entry in this column limits growth
        let mut pick: Option<usize> = None;
        for r in top..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            if pick.is_none_or(|p| rows[r][col].abs() < rows[p][col].abs()) {
                pick = Some(r);
            }
        }
        let Some(p) = pick else { continue };
        rows.swap(top, p);
        let (head, tail) = rows.split_at_mut(top + 1);
        let pivot_row = &head[top];
        let pv = &pivot_row[col];
        for row in tail.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let g = pv.gcd(&row[col]);
            let a = pv / &g;
            let b = &row[col] / &g;
            for j in col..cols {
                let updated = &row[j] * &a - &pivot_row[j] * &b;
                row[j] = updated;
            }
            make_primitive(row);
        }
        pivots.push(col);
        top += 1;
    }
    rows.truncate(top);
    (rows, pivots)
}

pub fn rank_of_rows(rows: &[Vec<Rational>], cols: usize) -> usize {
    let int_rows: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| clear_denominators(r))
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    integer_echelon(int_rows, cols).1.len()
}

/// Normalizes a kernel vector: integer entries with gcd 1, first nonzero
/// entry positive.
fn normalize_kernel_vector(v: &[Rational]) -> Vec<Rational> {
    let mut ints = clear_denominators(v);
    make_primitive(&mut ints);
    if ints.iter().find(|x| !x.is_zero()).is_some_and(Signed::is_negative) {
        for x in ints.iter_mut() {
            *x = -std::mem::take(x);
        }
    }
    ints.into_iter().map(Rational::from_integer).collect()
}

/// Rank of `a` and a basis of its right kernel `{v : a·v = 0}`.
pub fn rank_and_kernel(a: &RatMatrix) -> (usize, Vec<Vec<Rational>>) {
    let n = a.cols();
    let int_rows: Vec<Vec<BigInt>> = a.to_rows().iter().map(|r| clear_denominators(r)).collect();
    let (ech, pivots) = integer_echelon(int_rows, n);
    let rank = pivots.len();
    let mut basis = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut x = vec![Rational::zero(); n];
        x[free] = Rational::one();
        for (row, &pc) in ech.iter().zip(&pivots).rev() {
            let mut s = Rational::zero();
            for j in pc + 1..n {
                if !row[j].is_zero() && !x[j].is_zero() {
                    s += Rational::from_integer(row[j].clone()) * &x[j];
                }
            }
            x[pc] = -s / Rational::from_integer(row[pc].clone());
        }
        basis.push(normalize_kernel_vector(&x));
    }
    (rank, basis)
}

/// Some `x` with `a·x = b`, or `None` when the system is inconsistent.
pub fn solve(a: &RatMatrix, b: &[Rational]) -> Result<Option<Vec<Rational>>, LinalgError> {
    if b.len() != a.rows() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.rows(),
            found: b.len(),
        });
    }
    let n = a.cols();
    let rows: Vec<Vec<BigInt>> = (0..a.rows())
        .map(|i| {
            let mut r = a.row(i).to_vec();
            r.push(b[i].clone());
            clear_denominators(&r)
        })
        .collect();
    let (ech, pivots) = integer_echelon(rows, n + 1);
    if pivots.last() == Some(&n) {
        return Ok(None);
    }
    let mut x = vec![Rational::zero(); n];
    for (row, &pc) in ech.iter().zip(&pivots).rev() {
        let mut s = Rational::from_integer(row[n].clone());
        for j in pc + 1..n {
            if !row[j].is_zero() && !x[j].is_zero() {
                s -= Rational::from_integer(row[j].clone()) * &x[j];
            }
        }
        x[pc] = s / Rational::from_integer(row[pc].clone());
    }
    Ok(Some(x))
}

/// Incrementally grown span of rational vectors, kept as primitive integer
/// echelon rows in insertion order.
#[derive(Clone, Debug, Default)]
pub struct Span {
    len: usize,
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

impl Span {
    pub fn new(len: usize) -> Self {
        Span {
            len,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[Rational]) -> Vec<BigInt> {
        let mut x = clear_denominators(v);
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if x[p].is_zero() {
                continue;
            }
            let g = row[p].gcd(&x[p]);
            let a = &row[p] / &g;
            let b = &x[p] / &g;
            for j in 0..self.len {
                if row[j].is_zero() && x[j].is_zero() {
                    continue;
                }
                let updated = &x[j] * &a - &row[j] * &b;
                x[j] = updated;
            }
            make_primitive(&mut x);
        }
        x
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Adds `v`; returns false when it was already in the span.
    pub fn insert(&mut self, v: &[Rational]) -> bool {
        assert_eq!(v.len(), self.len, "vector length mismatch");
        let x = self.reduce(v);
        match x.iter().position(|e| !e.is_zero()) {
            None => false,
            Some(p) => {
                self.rows.push(x);
                self.pivots.push(p);
                true
            }
        }
    }
}

/// The Mersenne prime `2^61 - 1`. Reduction modulo it is a ring map on
/// rationals whose denominators it does not divide, so linear independence
/// or a nonzero value mod `PRIME` certifies the same over `Q`.
pub const PRIME: u64 = (1 << 61) - 1;

fn mod_mul(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn mod_add(a: u64, b: u64) -> u64 {
    (a + b) % PRIME
}

fn mod_sub(a: u64, b: u64) -> u64 {
    (a + PRIME - b) % PRIME
}

fn mod_inv(a: u64) -> u64 {
    let (mut base, mut e, mut acc) = (a, PRIME - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = mod_mul(acc, base);
        }
        base = mod_mul(base, base);
        e >>= 1;
    }
    acc
}

/// Image of `q` in `F_p`; `None` when `PRIME` divides the denominator.
pub fn reduce_mod(q: &Rational) -> Option<u64> {
    let p = BigInt::from(PRIME);
    let d = q.denom().mod_floor(&p).to_u64()?;
    if d == 0 {
        return None;
    }
    let n = q.numer().mod_floor(&p).to_u64()?;
    Some(mod_mul(n, mod_inv(d)))
}

/// Square matrix over `F_p`, `p = PRIME`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMatrix {
    n: usize,
    data: Vec<u64>,
}

impl ModMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        ModMatrix { n, data }
    }

    pub fn reduce(m: &RatMatrix) -> Option<Self> {
        assert!(m.is_square(), "modular matrices are square");
        let data = m.entries().iter().map(reduce_mod).collect::<Option<Vec<_>>>()?;
        Some(ModMatrix { n: m.rows(), data })
    }

    pub fn entries(&self) -> &[u64] {
        &self.data
    }

    pub fn mul(&self, other: &ModMatrix) -> ModMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut data = vec![0u64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] = mod_add(data[i * n + j], mod_mul(a, other.data[k * n + j]));
                }
            }
        }
        ModMatrix { n, data }
    }

    pub fn trace(&self) -> u64 {
        (0..self.n).fold(0, |t, i| mod_add(t, self.data[i * self.n + i]))
    }
}

/// [`Span`] over `F_p`, rows normalized to pivot 1.
#[derive(Clone, Debug, Default)]
pub struct ModSpan {
    len: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl ModSpan {
    pub fn new(len: usize) -> Self {
        ModSpan {
            len,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn insert(&mut self, v: &[u64]) -> bool {
        assert_eq!(v.len(), self.len, "vector length mismatch");
        let mut x = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = x[p];
            if c == 0 {
                continue;
            }
            for j in p..self.len {
                if row[j] != 0 {
                    x[j] = mod_sub(x[j], mod_mul(c, row[j]));
                }
            }
        }
        let Some(p) = x.iter().position(|&e| e != 0) else {
            return false;
        };
        let inv = mod_inv(x[p]);
        for e in &mut x[p..] {
            *e = mod_mul(*e, inv);
        }
        self.rows.push(x);
        self.pivots.push(p);
        true
    }
}
