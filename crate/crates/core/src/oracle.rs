//! Independent ground truth from monomial `L^2` norms.
//!
//! With `A = adj B` the map `w -> z`, `z_k = prod_j w_j^{a^k_j}` carries the
//! unit polydisc `det A`-to-one onto `U_B` (off the coordinate hyperplanes),
//! and pulling `|z^m|^2` back gives
//!
//! ```text
//! ||z^m||^2 = det A * pi^n / prod_j ((m + 1) A)_j
//! ```
//!
//! whenever every `((m + 1) A)_j >= 1`; otherwise `z^m` is not square
//! integrable. The Laurent monomials are orthogonal on a Reinhardt domain,
//! so `pi^n K = sum_m prod_j ((m + 1) A)_j / det A * t^m`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{CheckedAdd, CheckedMul, One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::int_linalg::ValidDefiningMatrix;
use crate::kernel::{assemble_from_valid, BergmanKernelForm, eval_kernel, DEFAULT_EPSILON};
use crate::lattice::Window;
use crate::laurent::{ExponentVector, LaurentPolynomial};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MonomialNorm {
    /// `||z^m||^2 / pi^n`.
    SquareIntegrable(BigRational),
    NotSquareIntegrable,
}

/// `((m + 1) A)_j` for every column `j`.
fn shifted_image(b: &ValidDefiningMatrix, m: &[i64]) -> Vec<BigInt> {
    let a = b.adjugate();
    let n = b.dim();
    (0..n)
        .map(|j| (0..n).map(|i| BigInt::from(m[i] + 1) * a.entry(i, j)).sum())
        .collect()
}

fn det_adjugate(b: &ValidDefiningMatrix) -> BigInt {
    num_traits::pow(b.det().clone(), b.dim() - 1)
}

pub fn monomial_norm(b: &ValidDefiningMatrix, m: &ExponentVector) -> MonomialNorm {
    let image = shifted_image(b, m.as_slice());
    if image.iter().any(|v| v < &BigInt::one()) {
        return MonomialNorm::NotSquareIntegrable;
    }
    let product: BigInt = image.into_iter().product();
    MonomialNorm::SquareIntegrable(BigRational::new(det_adjugate(b), product))
}

/// Coefficients of `pi^n K` on a window of exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleSeries {
    pub window: Window,
    pub coeffs: BTreeMap<ExponentVector, BigRational>,
}

impl OracleSeries {
    pub fn coefficient(&self, m: &ExponentVector) -> BigRational {
        self.coeffs.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn to_polynomial(&self) -> LaurentPolynomial {
        LaurentPolynomial::from_terms(
            self.window.dim(),
            self.coeffs.iter().map(|(e, c)| (e.clone(), c.clone())),
        )
    }
}

pub fn oracle_series(b: &ValidDefiningMatrix, window: &Window) -> OracleSeries {
    let det_a = det_adjugate(b);
    let coeffs = window
        .points()
        .filter_map(|m| {
            let image = shifted_image(b, m.as_slice());
            if image.iter().any(|v| v < &BigInt::one()) {
                return None;
            }
            let product: BigInt = image.into_iter().product();
            Some((m, BigRational::new(product, det_a.clone())))
        })
        .collect();
    OracleSeries {
        window: window.clone(),
        coeffs,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub exponent: ExponentVector,
    pub closed_form: BigRational,
    pub oracle: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleReport {
    pub window: Window,
    pub checked: u64,
    pub matched: u64,
    pub mismatches: Vec<Mismatch>,
    /// Bounding box of the exponents whose comparison is free of truncation.
    pub safe_box: Window,
    pub numerator_terms: usize,
    /// Numerator terms that landed on a checked exponent.
    pub numerator_terms_checked: usize,
}

impl OracleReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty() && self.matched == self.checked
    }

    pub fn to_json_value(&self) -> Value {
        let q = |c: &BigRational| json!({"num": c.numer().to_string(), "den": c.denom().to_string()});
        json!({
            "checked": self.checked,
            "matched": self.matched,
            "mismatches": self.mismatches.iter().map(|m| json!({
                "exponent": m.exponent.as_slice(),
                "closedFormValue": q(&m.closed_form),
                "oracleValue": q(&m.oracle),
            })).collect::<Vec<_>>(),
            "safeBox": {"lower": self.safe_box.lower, "upper": self.safe_box.upper},
            "window": {"lower": self.window.lower, "upper": self.window.upper},
            "numeratorTerms": self.numerator_terms,
            "numeratorTermsChecked": self.numerator_terms_checked,
        })
    }
}

/// Integer arithmetic used by the comparison, tried first in `i128` and
/// repeated in `BigInt` on overflow.
trait Exact: Clone + Zero + One + PartialOrd + CheckedAdd + CheckedMul + Send + Sync {
    fn from_big(x: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn from_i64(x: i64) -> Self;
}

impl Exact for i128 {
    fn from_big(x: &BigInt) -> Option<Self> {
        x.to_i128()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn from_i64(x: i64) -> Self {
        x as i128
    }
}

impl Exact for BigInt {
    fn from_big(x: &BigInt) -> Option<Self> {
        Some(x.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn from_i64(x: i64) -> Self {
        BigInt::from(x)
    }
}

struct Comparison<'a> {
    n: usize,
    window: &'a Window,
    adj: Vec<Vec<BigInt>>,
    /// Terms `(e, c_e)` of `prod_j p_j^2`, all `e >= 0`.
    product: Vec<(Vec<i64>, BigInt)>,
    numerator: HashMap<Vec<i64>, BigInt>,
    det_b_power: BigInt,
    det_a: BigInt,
}

enum Outcome {
    Unsafe,
    Match,
    Mismatch { oracle: BigInt },
}

fn decode(window: &Window, mut idx: usize) -> Vec<i64> {
    let n = window.dim();
    let mut m = vec![0; n];
    for j in (0..n).rev() {
        let ext = window.extent(j) as usize;
        m[j] = window.lower[j] + (idx % ext) as i64;
        idx /= ext;
    }
    m
}

impl Comparison<'_> {
    /// `prod_j ((m + 1) A)_j` if admissible, else zero.
    fn scaled_coefficient<T: Exact>(&self, adj: &[Vec<T>], m: &[i64]) -> Option<T> {
        let mut product = T::one();
        for j in 0..self.n {
            let mut v = T::zero();
            for i in 0..self.n {
                v = v.checked_add(&T::from_i64(m[i] + 1).checked_mul(&adj[i][j])?)?;
            }
            if v < T::one() {
                return Some(T::zero());
            }
            product = product.checked_mul(&v)?;
        }
        Some(product)
    }

    fn run<T: Exact>(&self) -> Option<Vec<Outcome>> {
        let window = self.window;
        let len = usize::try_from(window.len()).ok()?;
        let adj: Vec<Vec<T>> = self
            .adj
            .iter()
            .map(|row| row.iter().map(T::from_big).collect::<Option<Vec<_>>>())
            .collect::<Option<_>>()?;
        let product: Vec<(Vec<i64>, T)> = self
            .product
            .iter()
            .map(|(e, c)| Some((e.clone(), T::from_big(c)?)))
            .collect::<Option<_>>()?;
        let det_b_power = T::from_big(&self.det_b_power)?;
        let det_a = T::from_big(&self.det_a)?;

        let series: Vec<T> = (0..len)
            .into_par_iter()
            .map(|idx| self.scaled_coefficient(&adj, &decode(window, idx)))
            .collect::<Option<_>>()?;

        (0..len)
            .into_par_iter()
            .map(|idx| {
                let m = decode(window, idx);
                let mut total = T::zero();
                let mut shifted = vec![0i64; self.n];
                for (e, c) in &product {
                    for j in 0..self.n {
                        shifted[j] = m[j] - e[j];
                    }
                    let value = match window.offset_of(&shifted) {
                        Some(k) => series[k].clone(),
                        None => {
                            if !self.scaled_coefficient(&adj, &shifted)?.is_zero() {
                                return Some(Outcome::Unsafe);
                            }
                            continue;
                        }
                    };
                    total = total.checked_add(&c.checked_mul(&value)?)?;
                }
                let closed = match self.numerator.get(&m) {
                    Some(c) => T::from_big(c)?.checked_mul(&det_a)?,
                    None => T::zero(),
                };
                if total.checked_mul(&det_b_power)? == closed {
                    Some(Outcome::Match)
                } else {
                    Some(Outcome::Mismatch {
                        oracle: total.to_big(),
                    })
                }
            })
            .collect()
    }
}

/// Multiplies the oracle series by `prod_j p_j^2` and compares the result
/// with `numerator / (det B)^(n-1)` at every exponent of the window whose
/// product coefficient uses no series term cut off by the window.
///
/// Since every exponent of `prod_j p_j^2` is nonnegative, only the lower
/// faces of the window can truncate; an exponent is also safe when each
/// term it would need from below the window is not square integrable.
pub fn compare_with_closed_form(b: &ValidDefiningMatrix, window: &Window) -> Result<OracleReport> {
    compare_form(b, &assemble_from_valid(b)?, window)
}

/// [`compare_with_closed_form`] against an arbitrary candidate form.
pub fn compare_form(
    b: &ValidDefiningMatrix,
    form: &BergmanKernelForm,
    window: &Window,
) -> Result<OracleReport> {
    let n = b.dim();
    if window.dim() != n || form.n() != n {
        return Err(Error::DimensionMismatch(n, window.dim()));
    }
    let mut denominator = LaurentPolynomial::one(n);
    for f in &form.denominator_factors {
        denominator = &denominator * &(f * f);
    }
    let product = denominator
        .sorted_terms()
        .into_iter()
        .map(|(e, c)| (e.as_slice().to_vec(), c.to_integer()))
        .collect();
    let numerator: HashMap<Vec<i64>, BigInt> = form
        .numerator
        .terms()
        .map(|(e, c)| (e.as_slice().to_vec(), c.to_integer()))
        .collect();
    let cmp = Comparison {
        n,
        window,
        adj: b.adjugate().to_rows(),
        product,
        numerator,
        det_b_power: num_traits::pow(b.det().clone(), n - 1),
        det_a: b.adjugate().determinant(),
    };
    let outcomes = match cmp.run::<i128>() {
        Some(o) => o,
        None => cmp.run::<BigInt>().ok_or(Error::BoxTooLarge(window.len()))?,
    };

    let mut report = OracleReport {
        window: window.clone(),
        checked: 0,
        matched: 0,
        mismatches: Vec::new(),
        safe_box: Window::new(vec![i64::MAX; n], vec![i64::MIN; n]),
        numerator_terms: cmp.numerator.len(),
        numerator_terms_checked: 0,
    };
    for (idx, outcome) in outcomes.into_iter().enumerate() {
        if matches!(outcome, Outcome::Unsafe) {
            continue;
        }
        let m = decode(window, idx);
        report.checked += 1;
        if cmp.numerator.contains_key(&m) {
            report.numerator_terms_checked += 1;
        }
        for j in 0..n {
            report.safe_box.lower[j] = report.safe_box.lower[j].min(m[j]);
            report.safe_box.upper[j] = report.safe_box.upper[j].max(m[j]);
        }
        match outcome {
            Outcome::Match => report.matched += 1,
            Outcome::Mismatch { oracle } => {
                let closed = cmp.numerator.get(&m).cloned().unwrap_or_default();
                report.mismatches.push(Mismatch {
                    exponent: ExponentVector::new(m),
                    closed_form: BigRational::new(closed, cmp.det_b_power.clone()),
                    oracle: BigRational::new(oracle, cmp.det_a.clone()),
                })
            }
            Outcome::Unsafe => unreachable!(),
        }
    }
    if report.checked == 0 {
        return Err(Error::WindowTooSmall);
    }
    Ok(report)
}

/// `|z^{b^j}|` for every row, from the moduli of the coordinates.
fn constraint_values(b: &ValidDefiningMatrix, z: &[Complex64]) -> Vec<f64> {
    let n = b.dim();
    (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    let e = b.matrix().entry(j, k).to_i32().unwrap_or(i32::MAX);
                    z[k].norm().powi(e)
                })
                .product()
        })
        .collect()
}

fn check_inside(b: &ValidDefiningMatrix, z: &[Complex64]) -> Result<()> {
    match constraint_values(b, z).iter().position(|v| !(*v < 1.0)) {
        Some(j) => Err(Error::PointOutsideDomain(j)),
        None => Ok(()),
    }
}

/// Partial sum of the orthonormal series over `k in [1, radius]^n`, where
/// `k = (m + 1) A` runs over the image lattice `{ k : k B = 0 mod det B }`
/// and `t^m = t^{k B / det B - 1}`.
fn series_partial_sum(b: &ValidDefiningMatrix, t: &[Complex64], radius: i64) -> Result<Complex64> {
    let n = b.dim();
    let det = b.det().to_i64().ok_or(Error::Overflow("determinant"))?;
    let rows = b
        .matrix()
        .to_i64_rows()
        .ok_or(Error::Overflow("matrix entries"))?;
    let logs: Vec<Complex64> = t.iter().map(|z| z.ln()).collect();
    let window = Window::cube(n, 1, radius);
    let firsts: Vec<i64> = (1..=radius).collect();
    let total = firsts
        .par_iter()
        .map(|&first| {
            let mut lower = window.lower.clone();
            let mut upper = window.upper.clone();
            lower[0] = first;
            upper[0] = first;
            let mut sum = Complex64::new(0.0, 0.0);
            let mut m = vec![0i64; n];
            for k in Window::new(lower, upper).points() {
                let k = k.as_slice();
                let mut ok = true;
                for c in 0..n {
                    let v: i64 = (0..n).map(|j| k[j] * rows[j][c]).sum();
                    if v % det != 0 {
                        ok = false;
                        break;
                    }
                    m[c] = v / det - 1;
                }
                if !ok {
                    continue;
                }
                // t^m in log space: single powers may leave the f64 range
                let mut exponent = Complex64::new(0.0, 0.0);
                for c in 0..n {
                    exponent += logs[c] * m[c] as f64;
                }
                let weight: f64 = k.iter().map(|&x| x as f64).product();
                sum += exponent.exp() * weight;
            }
            sum
        })
        .reduce(|| Complex64::new(0.0, 0.0), |a, b| a + b);
    let det_a = det_adjugate(b).to_f64().ok_or(Error::Overflow("det A"))?;
    Ok(total / (det_a * std::f64::consts::PI.powi(n as i32)))
}

/// Relative error between the closed form and the truncated orthonormal
/// series at `(p, q)`. The series radius doubles from 8 until two successive
/// partial sums agree to `1e-13` relative, failing past `terms`.
pub fn numeric_spot_check(
    b: &ValidDefiningMatrix,
    p: &[Complex64],
    q: &[Complex64],
    terms: usize,
) -> Result<f64> {
    let n = b.dim();
    if p.len() != n || q.len() != n {
        return Err(Error::DimensionMismatch(n, p.len().min(q.len())));
    }
    check_inside(b, p)?;
    check_inside(b, q)?;
    if p.iter().chain(q).any(|z| z.norm() == 0.0) {
        // negative powers of t are summed term by term
        return Err(Error::PoleAtZero(0));
    }
    let form = assemble_from_valid(b)?;
    let closed = eval_kernel(&form, p, q, DEFAULT_EPSILON)?;
    let t: Vec<Complex64> = p.iter().zip(q).map(|(a, b)| a * b.conj()).collect();

    let limit = terms.max(1) as i64;
    let mut radius = 8.min(limit);
    let mut previous = series_partial_sum(b, &t, radius)?;
    loop {
        if radius >= limit {
            return Err(Error::NonConvergent(terms));
        }
        radius = (2 * radius).min(limit);
        let current = series_partial_sum(b, &t, radius)?;
        if (current - previous).norm() <= 1e-13 * current.norm() {
            return Ok((closed - current).norm() / closed.norm());
        }
        previous = current;
    }
}

/// A random-looking interior point `z_k = prod_j w_j^{a^k_j}` built from
/// `w` inside the unit polydisc, so that `|z^{b^j}| = |w_j|^{det B}`.
pub fn interior_point(b: &ValidDefiningMatrix, w: &[Complex64]) -> Vec<Complex64> {
    let n = b.dim();
    let a = b.adjugate();
    (0..n)
        .map(|k| {
            (0..n).fold(Complex64::new(1.0, 0.0), |acc, j| {
                acc * w[j].powi(a.entry(k, j).to_i32().unwrap_or(i32::MAX))
            })
        })
        .collect()
}

/// `max_j |z^{b^j}|`; the point is interior iff this is below 1.
pub fn max_constraint(b: &ValidDefiningMatrix, z: &[Complex64]) -> f64 {
    constraint_values(b, z).into_iter().fold(0.0, f64::max)
}
