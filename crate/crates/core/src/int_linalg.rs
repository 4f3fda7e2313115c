//! Exact integer linear algebra for defining matrices.
//!
//! Entries are indexed as in the kernel formula: `entry(j, k) = b^j_k`, so
//! `row(j)` is the exponent vector of the `j`-th defining inequality and
//! `column(k)` collects the exponents of `z_k`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Default cap on the dimension accepted by [`normalize`].
pub const DEFAULT_MAX_N: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerMatrix {
    n: usize,
    entries: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 || rows.iter().any(|r| r.len() != n) {
            let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
            return Err(Error::InvalidDimension { rows: n, cols });
        }
        Ok(Self {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![BigInt::zero(); n * n];
        for j in 0..n {
            entries[j * n + j] = BigInt::one();
        }
        Self { n, entries }
    }

    fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                entries.push(f(j, k));
            }
        }
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> &BigInt {
        &self.entries[row * self.n + col]
    }

    pub fn row(&self, j: usize) -> &[BigInt] {
        &self.entries[j * self.n..(j + 1) * self.n]
    }

    pub fn column(&self, k: usize) -> Vec<BigInt> {
        (0..self.n).map(|j| self.entry(j, k).clone()).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[BigInt]> {
        self.entries.chunks(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        self.rows().map(<[BigInt]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |j, k| self.entry(k, j).clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "matrix dimensions differ");
        Self::from_fn(self.n, |j, k| {
            (0..self.n)
                .map(|i| self.entry(j, i) * other.entry(i, k))
                .sum()
        })
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|x| x * c).collect(),
        }
    }

    /// Elementwise absolute value `|B| = B_+ + B_-`.
    pub fn abs(&self) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(Signed::abs).collect(),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|x| !x.is_negative())
    }

    /// The row vector `1 |M|`: absolute column sums.
    pub fn abs_column_sums(&self) -> Vec<BigInt> {
        (0..self.n)
            .map(|k| (0..self.n).map(|j| self.entry(j, k).abs()).sum())
            .collect()
    }

    /// `1 M`: plain column sums.
    pub fn column_sums(&self) -> Vec<BigInt> {
        (0..self.n)
            .map(|k| (0..self.n).map(|j| self.entry(j, k)).sum())
            .collect()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.n {
            self.entries.swap(a * self.n + k, b * self.n + k);
        }
    }

    pub fn determinant(&self) -> BigInt {
        bareiss_determinant(self.to_rows())
    }

    /// `[adj M]^j_k = (-1)^{j+k} det M[k, j]`, where `M[k, j]` drops row `k`
    /// and column `j`.
    pub fn adjugate(&self) -> Self {
        let n = self.n;
        Self::from_fn(n, |j, k| {
            let minor: Vec<Vec<BigInt>> = (0..n)
                .filter(|&r| r != k)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != j)
                        .map(|c| self.entry(r, c).clone())
                        .collect()
                })
                .collect();
            let d = bareiss_determinant(minor);
            if (j + k) % 2 == 0 {
                d
            } else {
                -d
            }
        })
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        self.rows()
            .map(|r| r.iter().map(ToPrimitive::to_i64).collect())
            .collect()
    }

    /// Array-of-arrays JSON; entries outside the `i64` range become strings.
    pub fn to_json_value(&self) -> Value {
        Value::Array(
            self.rows()
                .map(|r| Value::Array(r.iter().map(bigint_to_json).collect()))
                .collect(),
        )
    }

    pub fn from_json_value(value: &Value) -> Result<Self> {
        let rows = value
            .as_array()
            .ok_or_else(|| Error::Parse("matrix JSON must be an array of arrays".into()))?;
        let rows = rows
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                    .iter()
                    .map(bigint_from_json)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    /// Accepts the JSON array-of-arrays form, or whitespace-separated rows
    /// split by newlines or `/`.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed.starts_with('[') {
            let value: Value =
                serde_json::from_str(trimmed).map_err(|e| Error::Parse(e.to_string()))?;
            return Self::from_json_value(&value);
        }
        let rows = trimmed
            .split(['\n', '/'])
            .map(str::trim)
            .filter(|line| !line.is_empty())
            .map(|line| {
                line.split_whitespace()
                    .map(|tok| {
                        tok.parse::<BigInt>()
                            .map_err(|_| Error::Parse(format!("not an integer: {tok:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, row) in self.rows().enumerate() {
            if j > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(BigInt::to_string).collect();
            write!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

pub(crate) fn bigint_to_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => Value::from(v),
        None => Value::String(x.to_string()),
    }
}

pub(crate) fn bigint_from_json(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(num) => num
            .as_i64()
            .map(BigInt::from)
            .or_else(|| num.as_u64().map(BigInt::from))
            .ok_or_else(|| Error::Parse(format!("not an integer: {num}"))),
        Value::String(s) => s
            .parse()
            .map_err(|_| Error::Parse(format!("not an integer: {s:?}"))),
        other => Err(Error::Parse(format!("not an integer: {other}"))),
    }
}

/// Fraction-free Gaussian elimination; every division is exact.
fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// gcd of the absolute values of `v`.
pub fn row_gcd(v: &[BigInt]) -> Result<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        Err(Error::AllZeroRow)
    } else {
        Ok(g)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignSplit {
    pub plus: IntegerMatrix,
    pub minus: IntegerMatrix,
}

/// `B_+ = max(B, 0)` and `B_- = max(-B, 0)`, elementwise.
pub fn sign_split(m: &IntegerMatrix) -> SignSplit {
    let zero = BigInt::zero();
    let plus = IntegerMatrix::from_fn(m.n, |j, k| m.entry(j, k).max(&zero).clone());
    let minus = IntegerMatrix::from_fn(m.n, |j, k| (-m.entry(j, k)).max(zero.clone()));
    SignSplit { plus, minus }
}

/// A matrix with `det > 0` whose rows each have gcd 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedDefiningMatrix {
    matrix: IntegerMatrix,
    det: BigInt,
}

impl NormalizedDefiningMatrix {
    pub fn matrix(&self) -> &IntegerMatrix {
        &self.matrix
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    pub fn dim(&self) -> usize {
        self.matrix.n
    }
}

pub fn normalize(m: &IntegerMatrix) -> Result<NormalizedDefiningMatrix> {
    normalize_with_max_n(m, DEFAULT_MAX_N)
}

/// Divides every row by its gcd and, if the determinant is negative, swaps
/// the last two rows. Neither step changes the domain.
pub fn normalize_with_max_n(m: &IntegerMatrix, max_n: usize) -> Result<NormalizedDefiningMatrix> {
    if m.n > max_n {
        return Err(Error::DimensionTooLarge { n: m.n, max: max_n });
    }
    let det = m.determinant();
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let mut matrix = m.clone();
    let mut det = det;
    for j in 0..m.n {
        let g = row_gcd(m.row(j))?;
        if !g.is_one() {
            for x in &mut matrix.entries[j * m.n..(j + 1) * m.n] {
                *x /= &g;
            }
            det /= &g;
        }
    }
    if det.is_negative() {
        matrix.swap_rows(m.n - 2, m.n - 1);
        det = -det;
    }
    Ok(NormalizedDefiningMatrix { matrix, det })
}

/// A normalized matrix with `adj B >= 0`, i.e. one that defines a bounded
/// monomial polyhedron. Carries the adjugate and the sign split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidDefiningMatrix {
    normalized: NormalizedDefiningMatrix,
    adj: IntegerMatrix,
    split: SignSplit,
}

impl ValidDefiningMatrix {
    pub fn matrix(&self) -> &IntegerMatrix {
        &self.normalized.matrix
    }

    pub fn det(&self) -> &BigInt {
        &self.normalized.det
    }

    pub fn dim(&self) -> usize {
        self.normalized.matrix.n
    }

    pub fn adjugate(&self) -> &IntegerMatrix {
        &self.adj
    }

    pub fn split(&self) -> &SignSplit {
        &self.split
    }

    pub fn normalized(&self) -> &NormalizedDefiningMatrix {
        &self.normalized
    }

    /// Normalizes and validates in one step.
    pub fn new(m: &IntegerMatrix) -> Result<Self> {
        Self::with_max_n(m, DEFAULT_MAX_N)
    }

    pub fn with_max_n(m: &IntegerMatrix, max_n: usize) -> Result<Self> {
        validate_defining(&normalize_with_max_n(m, max_n)?).into_result()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validation {
    Accept(ValidDefiningMatrix),
    UnboundedDomain {
        adjugate: IntegerMatrix,
        row: usize,
        col: usize,
    },
}

impl Validation {
    pub fn is_accept(&self) -> bool {
        matches!(self, Validation::Accept(_))
    }

    pub fn into_result(self) -> Result<ValidDefiningMatrix> {
        match self {
            Validation::Accept(v) => Ok(v),
            Validation::UnboundedDomain { row, col, .. } => {
                Err(Error::UnboundedDomain { row, col })
            }
        }
    }
}

/// Accepts exactly when every entry of `adj B = det B * B^{-1}` is
/// nonnegative.
pub fn validate_defining(m: &NormalizedDefiningMatrix) -> Validation {
    let adjugate = m.matrix.adjugate();
    let n = m.matrix.n;
    let negative = (0..n * n).find(|&i| adjugate.entries[i].is_negative());
    match negative {
        Some(i) => Validation::UnboundedDomain {
            adjugate,
            row: i / n,
            col: i % n,
        },
        None => Validation::Accept(ValidDefiningMatrix {
            split: sign_split(&m.matrix),
            normalized: m.clone(),
            adj: adjugate,
        }),
    }
}
