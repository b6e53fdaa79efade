//! Prime-field arithmetic and dense matrices over `F_q`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Canonical residue in `[0, q)`.
pub type FqElem = u16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("modulus {0} is not a prime below 2^16")]
    BadModulus(u32),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("element {value} out of range for q = {q}")]
    OutOfRange { value: u32, q: u32 },
    #[error("matrix is singular")]
    Singular,
}

/// The field `F_q` for a runtime prime `q < 2^16`.
///
/// Reduction uses a Barrett constant so row operations stay branch-light.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Field {
    q: u32,
    m: u64,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Field {
    pub fn new(q: u32) -> Result<Self, GfError> {
        if !(2..=u16::MAX as u32).contains(&q) || !is_prime(q) {
            return Err(GfError::BadModulus(q));
        }
        Ok(Self {
            q,
            m: (1u64 << 32) / q as u64,
        })
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Reduces any `a < 2^32`.
    #[inline(always)]
    pub fn reduce(&self, a: u32) -> FqElem {
        let qhat = ((a as u64 * self.m) >> 32) as u32;
        let mut r = a - qhat * self.q;
        if r >= self.q {
            r -= self.q;
        }
        r as FqElem
    }

    #[inline]
    pub fn elem(&self, v: u64) -> FqElem {
        (v % self.q as u64) as FqElem
    }

    #[inline]
    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        self.reduce(a as u32 + b as u32)
    }

    #[inline]
    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.reduce(a as u32 + self.q - b as u32)
    }

    #[inline]
    pub fn neg(&self, a: FqElem) -> FqElem {
        self.reduce(self.q - a as u32)
    }

    #[inline]
    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        self.reduce(a as u32 * b as u32)
    }

    pub fn pow(&self, a: FqElem, mut e: u64) -> FqElem {
        let mut base = a;
        let mut acc: FqElem = 1 % self.q as FqElem;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FqElem) -> Result<FqElem, GfError> {
        if a == 0 {
            return Err(GfError::ZeroInverse);
        }
        // Extended Euclid on small integers.
        let (mut r0, mut r1) = (self.q as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let quo = r0 / r1;
            (r0, r1) = (r1, r0 - quo * r1);
            (t0, t1) = (t1, t0 - quo * t1);
        }
        Ok(t0.rem_euclid(self.q as i64) as FqElem)
    }

    pub fn check(&self, v: u32) -> Result<FqElem, GfError> {
        if v < self.q {
            Ok(v as FqElem)
        } else {
            Err(GfError::OutOfRange {
                value: v,
                q: self.q,
            })
        }
    }
}

/// Inverse of `a` in `F_q`.
pub fn fq_inv(field: &Field, a: FqElem) -> Result<FqElem, GfError> {
    field.inv(a)
}

/// Dense row-major matrix over `F_q`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct FqMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<FqElem>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    q: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl TryFrom<MatrixRepr> for FqMatrix {
    type Error = GfError;

    fn try_from(r: MatrixRepr) -> Result<Self, GfError> {
        let field = Field::new(r.q)?;
        if r.data.len() != r.rows * r.cols {
            return Err(GfError::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                r.data.len(),
                r.rows,
                r.cols
            )));
        }
        let data = r
            .data
            .into_iter()
            .map(|v| field.check(v))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            field,
            rows: r.rows,
            cols: r.cols,
            data,
        })
    }
}

impl From<FqMatrix> for MatrixRepr {
    fn from(m: FqMatrix) -> Self {
        Self {
            q: m.field.q,
            rows: m.rows,
            cols: m.cols,
            data: m.data.into_iter().map(u32::from).collect(),
        }
    }
}

impl fmt::Debug for FqMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}x{} over {:?}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl FqMatrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: Field, k: usize) -> Self {
        let mut m = Self::zeros(field, k, k);
        for i in 0..k {
            m.data[i * k + i] = 1;
        }
        m
    }

    pub fn from_vec(
        field: Field,
        rows: usize,
        cols: usize,
        data: Vec<FqElem>,
    ) -> Result<Self, GfError> {
        if data.len() != rows * cols {
            return Err(GfError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        for &v in &data {
            field.check(v as u32)?;
        }
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
    }

    /// Builds from rows of arbitrary integers, reducing mod `q`.
    pub fn from_rows(field: Field, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let q = field.q as i64;
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().map(|&v| v.rem_euclid(q) as FqElem));
        }
        Self {
            field,
            rows: r,
            cols: c,
            data,
        }
    }

    /// Builds from a list of columns of equal length.
    pub fn from_columns(field: Field, rows: usize, columns: &[Vec<FqElem>]) -> Self {
        let cols = columns.len();
        let mut m = Self::zeros(field, rows, cols);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            for (i, &v) in col.iter().enumerate() {
                m.data[i * cols + j] = v;
            }
        }
        m
    }

    #[inline]
    pub fn field(&self) -> Field {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[FqElem] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FqElem {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FqElem) {
        debug_assert!((v as u32) < self.field.q);
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[FqElem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<FqElem> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<FqElem>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self, GfError> {
        if self.cols != other.rows || self.field != other.field {
            return Err(GfError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let mut out = Self::zeros(f, self.rows, other.cols);
        let mut acc = vec![0u32; other.cols];
        for r in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for (i, &a) in self.row(r).iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (slot, &b) in acc.iter_mut().zip(other.row(i)) {
                    *slot = f.reduce(*slot + a as u32 * b as u32) as u32;
                }
            }
            for (c, &v) in acc.iter().enumerate() {
                out.data[r * other.cols + c] = v as FqElem;
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `self · v`.
    pub fn mul_vec(&self, v: &[FqElem]) -> Vec<FqElem> {
        assert_eq!(v.len(), self.cols);
        let f = self.field;
        (0..self.rows)
            .map(|r| {
                self.row(r).iter().zip(v).fold(0u32, |acc, (&a, &b)| {
                    f.reduce(acc + a as u32 * b as u32) as u32
                }) as FqElem
            })
            .collect()
    }

    /// Keeps columns `idx` in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(self.field, self.rows, idx.len());
        for r in 0..self.rows {
            let src = self.row(r);
            for (j, &c) in idx.iter().enumerate() {
                out.data[r * idx.len() + j] = src[c];
            }
        }
        out
    }

    /// Horizontal concatenation `(self | other)`.
    pub fn hcat(&self, other: &Self) -> Result<Self, GfError> {
        if self.rows != other.rows {
            return Err(GfError::DimensionMismatch(format!(
                "hcat of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(Self {
            field: self.field,
            rows: self.rows,
            cols,
            data,
        })
    }

    pub fn is_zero_column(&self, c: usize) -> bool {
        (0..self.rows).all(|r| self.get(r, c) == 0)
    }

    pub fn rank(&self) -> usize {
        rref_with_pivots(self).pivot_cols.len()
    }

    /// Inverse of a square matrix.
    pub fn inverse(&self) -> Result<Self, GfError> {
        if self.rows != self.cols {
            return Err(GfError::DimensionMismatch(format!(
                "inverse of {}x{}",
                self.rows, self.cols
            )));
        }
        let k = self.rows;
        let aug = self.hcat(&Self::identity(self.field, k))?;
        let red = rref_with_pivots(&aug);
        if red.pivot_cols.len() < k || red.pivot_cols[k - 1] != k - 1 {
            return Err(GfError::Singular);
        }
        let right: Vec<usize> = (k..2 * k).collect();
        Ok(red.matrix.select_columns(&right))
    }

    /// Canonical byte encoding: dimensions as u32 LE, then entries as u16 LE.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 2 * self.data.len());
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        for &v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }
}

/// A matrix in reduced row-echelon form with its pivot columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RrefMatrix {
    pub matrix: FqMatrix,
    pub pivot_cols: Vec<usize>,
}

impl RrefMatrix {
    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }

    pub fn non_pivot_cols(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.matrix.cols];
        for &p in &self.pivot_cols {
            is_pivot[p] = true;
        }
        (0..self.matrix.cols).filter(|&c| !is_pivot[c]).collect()
    }
}

/// Gauss–Jordan elimination with leftmost-nonzero pivots, scanning rows top to bottom.
///
/// Rows are held as unreduced `u32` accumulators while the bound
/// `rows · (q-1)^2 + q` fits, so the inner update is a plain multiply-add.
pub fn rref_with_pivots(m: &FqMatrix) -> RrefMatrix {
    let f = m.field;
    let (rows, cols) = (m.rows, m.cols);
    let q = f.q as u64;
    let lazy = (rows as u64) * (q - 1) * (q - 1) + q < u32::MAX as u64;
    let mut a: Vec<u32> = m.data.iter().map(|&v| v as u32).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let mut found = None;
        for i in r..rows {
            let v = f.reduce(a[i * cols + c]) as u32;
            a[i * cols + c] = v;
            if v != 0 {
                found = Some(i);
                break;
            }
        }
        let Some(p) = found else {
            continue;
        };
        if p != r {
            for j in c..cols {
                a.swap(p * cols + j, r * cols + j);
            }
        }
        let inv = f.inv(a[r * cols + c] as FqElem).expect("pivot is nonzero") as u32;
        for v in &mut a[r * cols + c..(r + 1) * cols] {
            *v = f.reduce(f.reduce(*v) as u32 * inv) as u32;
        }
        let (before, rest) = a.split_at_mut(r * cols);
        let (prow, after) = rest.split_at_mut(cols);
        let psrc = &prow[c..];
        for other in before
            .chunks_exact_mut(cols)
            .chain(after.chunks_exact_mut(cols))
        {
            let e = f.reduce(other[c]) as u32;
            if e == 0 {
                other[c] = 0;
                continue;
            }
            let fac = f.q - e;
            if lazy {
                for (d, &s) in other[c..].iter_mut().zip(psrc) {
                    *d += fac * s;
                }
            } else {
                for (d, &s) in other[c..].iter_mut().zip(psrc) {
                    *d = f.reduce(f.reduce(*d) as u32 + fac * s) as u32;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let data = a.into_iter().map(|v| f.reduce(v)).collect();
    RrefMatrix {
        matrix: FqMatrix {
            field: f,
            rows,
            cols,
            data,
        },
        pivot_cols: pivots,
    }
}

/// Scales every nonzero column so that its first nonzero entry is 1.
pub fn lex_min_col(m: &FqMatrix) -> FqMatrix {
    let mut out = m.clone();
    let f = m.field;
    for c in 0..m.cols {
        let Some(lead) = (0..m.rows).map(|r| m.get(r, c)).find(|&v| v != 0) else {
            continue;
        };
        let inv = f.inv(lead).expect("nonzero");
        for r in 0..m.rows {
            out.set(r, c, f.mul(m.get(r, c), inv));
        }
    }
    out
}

/// Lexicographic comparison of two columns, position 0 first.
pub fn cmp_columns(a: &[FqElem], b: &[FqElem]) -> Ordering {
    a.cmp(b)
}

/// Sorts columns into non-decreasing lexicographic order.
pub fn lex_sort(m: &FqMatrix) -> FqMatrix {
    let mut cols = m.columns();
    cols.sort_unstable_by(|a, b| cmp_columns(a, b));
    FqMatrix::from_columns(m.field, m.rows, &cols)
}

/// Normalized copy of a single column (first nonzero entry scaled to 1).
pub fn normalize_column(f: &Field, col: &[FqElem]) -> Vec<FqElem> {
    match col.iter().find(|&&v| v != 0) {
        None => col.to_vec(),
        Some(&lead) => {
            let inv = f.inv(lead).expect("nonzero");
            col.iter().map(|&v| f.mul(v, inv)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f127() -> Field {
        Field::new(127).unwrap()
    }

    #[test]
    fn rejects_composite_modulus() {
        assert_eq!(Field::new(126), Err(GfError::BadModulus(126)));
        assert!(Field::new(1).is_err());
        assert!(Field::new(2).is_ok());
    }

    #[test]
    fn inverse_examples() {
        let f = f127();
        assert_eq!(fq_inv(&f, 1), Ok(1));
        assert_eq!(fq_inv(&f, 2), Ok(64));
        assert_eq!(fq_inv(&f, 126), Ok(126));
        assert_eq!(fq_inv(&f, 0), Err(GfError::ZeroInverse));
    }

    #[test]
    fn inverse_exhaustive_small_primes() {
        for q in [2u32, 3, 5, 7, 127, 251] {
            let f = Field::new(q).unwrap();
            for a in 1..q as u16 {
                let i = f.inv(a).unwrap();
                assert_eq!((a as u32 * i as u32) % q, 1, "q={q} a={a}");
            }
        }
    }

    #[test]
    fn reduce_matches_remainder() {
        for q in [2u32, 7, 127, 65521] {
            let f = Field::new(q).unwrap();
            for a in (0..u32::MAX - 1000)
                .step_by(9_999_991)
                .chain(u32::MAX - 1000..=u32::MAX)
            {
                assert_eq!(f.reduce(a) as u32, a % q, "q={q} a={a}");
            }
        }
    }

    #[test]
    fn rref_identity_fixed() {
        let f = f127();
        let id = FqMatrix::identity(f, 4);
        let r = rref_with_pivots(&id);
        assert_eq!(r.matrix, id);
        assert_eq!(r.pivot_cols, vec![0, 1, 2, 3]);
    }

    #[test]
    fn rref_hand_examples() {
        let f = f127();
        let m = FqMatrix::from_rows(f, &[vec![2, 4], vec![1, 2]]);
        let r = rref_with_pivots(&m);
        assert_eq!(r.matrix, FqMatrix::from_rows(f, &[vec![1, 2], vec![0, 0]]));
        assert_eq!(r.pivot_cols, vec![0]);

        let m = FqMatrix::from_rows(f, &[vec![0, 1, 3], vec![1, 0, 5]]);
        let r = rref_with_pivots(&m);
        assert_eq!(
            r.matrix,
            FqMatrix::from_rows(f, &[vec![1, 0, 5], vec![0, 1, 3]])
        );
        assert_eq!(r.pivot_cols, vec![0, 1]);
    }

    #[test]
    fn lex_min_examples() {
        let f = f127();
        assert_eq!(3u32 * 85 % 127, 1);
        let m = FqMatrix::from_rows(f, &[vec![0, 1, 0], vec![3, 9, 0], vec![5, 0, 0]]);
        let out = lex_min_col(&m);
        assert_eq!(out.column(0), vec![0, 1, 44]);
        assert_eq!(out.column(1), vec![1, 9, 0]);
        assert_eq!(out.column(2), vec![0, 0, 0]);
    }

    #[test]
    fn lex_sort_examples() {
        let f = f127();
        let m = FqMatrix::from_columns(f, 2, &[vec![1, 2], vec![0, 5]]);
        assert_eq!(lex_sort(&m).columns(), vec![vec![0, 5], vec![1, 2]]);
        let m = FqMatrix::from_columns(f, 2, &[vec![1, 3], vec![1, 2]]);
        assert_eq!(lex_sort(&m).columns(), vec![vec![1, 2], vec![1, 3]]);
        let sorted = FqMatrix::from_columns(f, 2, &[vec![0, 1], vec![0, 2], vec![4, 0]]);
        assert_eq!(lex_sort(&sorted), sorted);
    }

    #[test]
    fn inverse_round_trip() {
        let f = Field::new(7).unwrap();
        let m = FqMatrix::from_rows(f, &[vec![1, 2, 0], vec![0, 1, 4], vec![5, 0, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), FqMatrix::identity(f, 3));
        let sing = FqMatrix::from_rows(f, &[vec![1, 2], vec![2, 4]]);
        assert_eq!(sing.inverse(), Err(GfError::Singular));
    }

    #[test]
    fn serde_round_trip_and_validation() {
        let f = Field::new(7).unwrap();
        let m = FqMatrix::from_rows(f, &[vec![1, 2, 3], vec![4, 5, 6]]);
        let s = serde_json::to_string(&m).unwrap();
        let back: FqMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(
            serde_json::from_str::<FqMatrix>(r#"{"q":7,"rows":1,"cols":1,"data":[7]}"#).is_err()
        );
        assert!(
            serde_json::from_str::<FqMatrix>(r#"{"q":8,"rows":1,"cols":1,"data":[1]}"#).is_err()
        );
        assert!(
            serde_json::from_str::<FqMatrix>(r#"{"q":7,"rows":2,"cols":1,"data":[1]}"#).is_err()
        );
    }

    /// Checks Definition-style RREF conditions directly.
    fn is_rref(r: &RrefMatrix) -> bool {
        let m = &r.matrix;
        let mut last_lead: Option<usize> = None;
        let mut seen_zero_row = false;
        let mut leads = Vec::new();
        for i in 0..m.rows() {
            match (0..m.cols()).find(|&c| m.get(i, c) != 0) {
                None => seen_zero_row = true,
                Some(c) => {
                    if seen_zero_row || m.get(i, c) != 1 || last_lead.is_some_and(|l| l >= c) {
                        return false;
                    }
                    if (0..m.rows()).any(|k| k != i && m.get(k, c) != 0) {
                        return false;
                    }
                    last_lead = Some(c);
                    leads.push(c);
                }
            }
        }
        leads == r.pivot_cols
    }

    fn arb_matrix(q: u32, max_r: usize, max_c: usize) -> impl Strategy<Value = FqMatrix> {
        (1..=max_r, 1..=max_c).prop_flat_map(move |(r, c)| {
            proptest::collection::vec(0..q as u16, r * c)
                .prop_map(move |d| FqMatrix::from_vec(Field::new(q).unwrap(), r, c, d).unwrap())
        })
    }

    fn arb_invertible(q: u32, k: usize) -> impl Strategy<Value = FqMatrix> {
        proptest::collection::vec(0..q as u16, k * k)
            .prop_map(move |d| FqMatrix::from_vec(Field::new(q).unwrap(), k, k, d).unwrap())
            .prop_filter("invertible", |m| m.rank() == m.rows())
    }

    proptest! {
        #[test]
        fn rref_satisfies_definition(m in arb_matrix(7, 6, 9)) {
            let r = rref_with_pivots(&m);
            prop_assert!(is_rref(&r));
            prop_assert_eq!(r.rank(), r.pivot_cols.len());
        }

        #[test]
        fn rref_idempotent(m in arb_matrix(5, 5, 8)) {
            let r = rref_with_pivots(&m);
            prop_assert_eq!(rref_with_pivots(&r.matrix), r);
        }

        #[test]
        fn rref_invariant_under_row_mixing(m in arb_matrix(7, 4, 7).prop_filter("4 rows", |m| m.rows() == 4),
                                           s in arb_invertible(7, 4)) {
            let sm = s.mul(&m).unwrap();
            prop_assert_eq!(rref_with_pivots(&sm), rref_with_pivots(&m));
        }

        #[test]
        fn lex_sort_idempotent_and_multiset(m in arb_matrix(127, 4, 8)) {
            let s = lex_sort(&m);
            prop_assert_eq!(lex_sort(&s), s.clone());
            let mut a = m.columns();
            let mut b = s.columns();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
            let cols = s.columns();
            prop_assert!(cols.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn lex_min_leading_one(m in arb_matrix(127, 4, 8)) {
            let out = lex_min_col(&m);
            for c in 0..out.cols() {
                let col = out.column(c);
                if let Some(&lead) = col.iter().find(|&&v| v != 0) {
                    prop_assert_eq!(lead, 1);
                } else {
                    prop_assert!(m.is_zero_column(c));
                }
            }
        }

        #[test]
        fn ring_axioms(a in 0u16..127, b in 0u16..127, c in 0u16..127) {
            let f = Field::new(127).unwrap();
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.add(a, f.neg(a)), 0);
            prop_assert_eq!(f.sub(a, b), f.add(a, f.neg(b)));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        }
    }
}
