//! Prime-field arithmetic and the small dense linear algebra used by the
//! scheme, the decoders and the verifiers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest admissible modulus. Products of two residues fit in a `u64`.
pub const MAX_MODULUS: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds 2^31")]
    ModulusTooLarge(u64),
    #[error("operands belong to different fields (F_{left} vs F_{right})")]
    FieldMismatch { left: u32, right: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Deterministic trial division; every modulus used here is below 2^31.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime_above(n: u64) -> u64 {
    let mut c = n + 1;
    while !is_prime(c) {
        c += 1;
    }
    c
}

/// The field `F_q` for a prime `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeField {
    q: u32,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if q > MAX_MODULUS {
            return Err(FieldError::ModulusTooLarge(q));
        }
        if !is_prime(q) {
            return Err(FieldError::NotPrime(q));
        }
        Ok(Self { q: q as u32 })
    }

    pub fn modulus(&self) -> u64 {
        self.q as u64
    }

    /// Embeds an integer, reducing it modulo `q`.
    pub fn elem(&self, v: u64) -> FieldElement {
        FieldElement {
            value: (v % self.q as u64) as u32,
            q: self.q,
        }
    }

    /// Embeds a signed integer.
    pub fn elem_i64(&self, v: i64) -> FieldElement {
        let q = self.q as i64;
        self.elem(v.rem_euclid(q) as u64)
    }

    pub fn zero(&self) -> FieldElement {
        self.elem(0)
    }

    pub fn one(&self) -> FieldElement {
        self.elem(1)
    }

    /// All `q` elements in ascending order of representative.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q as u64).map(move |v| self.elem(v))
    }
}

impl TryFrom<u64> for PrimeField {
    type Error = FieldError;
    fn try_from(q: u64) -> Result<Self, Self::Error> {
        PrimeField::new(q)
    }
}

impl From<PrimeField> for u64 {
    fn from(f: PrimeField) -> u64 {
        f.q as u64
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

/// An element of some `F_q`, tagged with its modulus. Mixing fields is an
/// error in the `checked_*` methods and a panic in the operator impls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    value: u32,
    q: u32,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value as u64
    }

    pub fn field(&self) -> PrimeField {
        PrimeField { q: self.q }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.q == other.q {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch {
                left: self.q,
                right: other.q,
            })
        }
    }

    fn with(&self, v: u64) -> Self {
        Self {
            value: v as u32,
            q: self.q,
        }
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self, FieldError> {
        self.same_field(&rhs)?;
        Ok(self.with((self.value() + rhs.value()) % self.q as u64))
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self, FieldError> {
        self.same_field(&rhs)?;
        let q = self.q as u64;
        Ok(self.with((self.value() + q - rhs.value()) % q))
    }

    pub fn checked_mul(self, rhs: Self) -> Result<Self, FieldError> {
        self.same_field(&rhs)?;
        Ok(self.with(self.value() * rhs.value() % self.q as u64))
    }

    pub fn pow(self, mut k: u64) -> Self {
        let q = self.q as u64;
        let mut base = self.value();
        let mut acc = 1 % q;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base % q;
            }
            base = base * base % q;
            k >>= 1;
        }
        self.with(acc)
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(self.q as u64 - 2))
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self, FieldError> {
        self.same_field(&rhs)?;
        Ok(self * rhs.inv()?)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs).expect("field mismatch in add")
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(rhs).expect("field mismatch in sub")
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs).expect("field mismatch in mul")
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        let q = self.q as u64;
        self.with((q - self.value()) % q)
    }
}

impl std::iter::Sum for FieldElement {
    fn sum<I: Iterator<Item = Self>>(mut iter: I) -> Self {
        let first = iter.next().expect("sum of an empty iterator has no field");
        iter.fold(first, |a, b| a + b)
    }
}

/// Inner product of two equal-length vectors; `zero` fixes the field when
/// the vectors are empty.
pub fn dot(zero: FieldElement, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(zero, |acc, (x, y)| acc + *x * *y)
}

/// Dense row-major matrix over a prime field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FieldMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from integer rows, reducing entries modulo `q`.
    pub fn from_rows(field: PrimeField, rows: &[Vec<u64>]) -> Result<Self, FieldError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(FieldError::DimensionMismatch("ragged rows".into()));
        }
        let q = field.modulus();
        Ok(Self {
            field,
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().map(|v| (v % q) as u32).collect(),
        })
    }

    pub fn from_elements(
        field: PrimeField,
        rows: usize,
        cols: usize,
        entries: &[FieldElement],
    ) -> Result<Self, FieldError> {
        if entries.len() != rows * cols {
            return Err(FieldError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let mut data = Vec::with_capacity(entries.len());
        for e in entries {
            if e.q != field.q {
                return Err(FieldError::FieldMismatch {
                    left: field.q,
                    right: e.q,
                });
            }
            data.push(e.value);
        }
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.field.elem(self.data[r * self.cols + c] as u64)
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        assert_eq!(v.q, self.field.q, "field mismatch in set");
        self.data[r * self.cols + c] = v.value;
    }

    pub fn row(&self, r: usize) -> Vec<FieldElement> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    pub fn mul(&self, rhs: &FieldMatrix) -> Result<FieldMatrix, FieldError> {
        if self.field != rhs.field {
            return Err(FieldError::FieldMismatch {
                left: self.field.q,
                right: rhs.field.q,
            });
        }
        if self.cols != rhs.rows {
            return Err(FieldError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let q = self.field.modulus();
        let mut out = FieldMatrix::zeros(self.field, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k] as u64;
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let idx = i * rhs.cols + j;
                    let b = rhs.data[k * rhs.cols + j] as u64;
                    out.data[idx] = ((out.data[idx] as u64 + a * b) % q) as u32;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>, FieldError> {
        if v.len() != self.cols {
            return Err(FieldError::DimensionMismatch(format!(
                "vector of length {} for {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| dot(self.field.zero(), &self.row(r), v))
            .collect())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..self.cols).all(|j| self.data[i * self.cols + j] == (i == j) as u32))
    }

    /// Reduced row echelon form; pivots are the first nonzero entry found
    /// scanning down each column. Returns the pivot columns.
    fn reduce(&mut self, aug: &mut Option<&mut FieldMatrix>) -> Vec<usize> {
        let q = self.field.modulus();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.data[i * self.cols + c] != 0) else {
                continue;
            };
            self.swap_rows(r, p);
            if let Some(a) = aug.as_deref_mut() {
                a.swap_rows(r, p);
            }
            let inv = self.get(r, c).inv().expect("pivot is nonzero").value();
            self.scale_row(r, inv);
            if let Some(a) = aug.as_deref_mut() {
                a.scale_row(r, inv);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.data[i * self.cols + c] as u64;
                if f == 0 {
                    continue;
                }
                let factor = (q - f) % q;
                self.add_row_multiple(i, r, factor);
                if let Some(a) = aug.as_deref_mut() {
                    a.add_row_multiple(i, r, factor);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, k: u64) {
        let q = self.field.modulus();
        for c in 0..self.cols {
            let idx = r * self.cols + c;
            self.data[idx] = (self.data[idx] as u64 * k % q) as u32;
        }
    }

    // row[dst] += k * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, k: u64) {
        let q = self.field.modulus();
        for c in 0..self.cols {
            let s = self.data[src * self.cols + c] as u64;
            let idx = dst * self.cols + c;
            self.data[idx] = ((self.data[idx] as u64 + k * s) % q) as u32;
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().reduce(&mut None).len()
    }

    /// Gauss-Jordan inversion.
    pub fn invert(&self) -> Result<FieldMatrix, FieldError> {
        if self.rows != self.cols {
            return Err(FieldError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut work = self.clone();
        let mut inv = FieldMatrix::identity(self.field, self.rows);
        let pivots = work.reduce(&mut Some(&mut inv));
        if pivots.len() < self.rows {
            return Err(FieldError::Singular);
        }
        Ok(inv)
    }

    /// Solves `self · x = b` for square invertible `self`.
    pub fn solve(&self, b: &[FieldElement]) -> Result<Vec<FieldElement>, FieldError> {
        self.invert()?.mul_vec(b)
    }

    /// Vandermonde matrix with rows `points^0 .. points^(rows-1)`.
    pub fn vandermonde(field: PrimeField, points: &[FieldElement], rows: usize) -> Self {
        let mut m = FieldMatrix::zeros(field, rows, points.len());
        for (j, p) in points.iter().enumerate() {
            for i in 0..rows {
                m.set(i, j, p.pow(i as u64));
            }
        }
        m
    }

    /// Appends the rows of `other` below `self`.
    pub fn stack(&self, other: &FieldMatrix) -> Result<FieldMatrix, FieldError> {
        if self.cols != other.cols || self.field != other.field {
            return Err(FieldError::DimensionMismatch("stack".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(FieldMatrix {
            field: self.field,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }
}
