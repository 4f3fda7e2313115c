//! Sparse multivariate Laurent polynomials over the rationals.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer exponent row vector. The derived ordering is lexicographic with
/// the first coordinate most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentVector(Vec<i64>);

impl ExponentVector {
    pub fn new(components: Vec<i64>) -> Self {
        Self(components)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&e| e >= 0)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(i64, i64) -> i64) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }
}

impl Index<usize> for ExponentVector {
    type Output = i64;

    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl From<Vec<i64>> for ExponentVector {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentPolynomial {
    n: usize,
    terms: HashMap<ExponentVector, BigRational>,
}

impl LaurentPolynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: HashMap::new(),
        }
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, BigRational::one())
    }

    pub fn constant(n: usize, c: BigRational) -> Self {
        Self::monomial(c, ExponentVector::zeros(n))
    }

    pub fn monomial(c: BigRational, e: ExponentVector) -> Self {
        let mut p = Self::zero(e.len());
        if !c.is_zero() {
            p.terms.insert(e, c);
        }
        p
    }

    /// `t^plus - t^minus`-style binomials are built this way throughout.
    pub fn binomial(positive: ExponentVector, negative: ExponentVector) -> Self {
        let mut p = Self::monomial(BigRational::one(), positive);
        p.add_term(negative, -BigRational::one());
        p
    }

    /// Builds from `(exponent, coefficient)` pairs, merging duplicates.
    pub fn from_terms(
        n: usize,
        terms: impl IntoIterator<Item = (ExponentVector, BigRational)>,
    ) -> Self {
        let mut p = Self::zero(n);
        for (e, c) in terms {
            assert_eq!(e.len(), n, "exponent length differs from variable count");
            p.add_term(e, c);
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &ExponentVector) -> BigRational {
        self.terms.get(e).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Terms in ascending lexicographic order of exponents.
    pub fn sorted_terms(&self) -> Vec<(&ExponentVector, &BigRational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_unstable_by(|a, b| a.0.cmp(b.0));
        v
    }

    /// Lexicographically largest exponent and its coefficient.
    pub fn leading_term(&self) -> Option<(&ExponentVector, &BigRational)> {
        self.terms.iter().max_by(|a, b| a.0.cmp(b.0))
    }

    pub fn add_term(&mut self, e: ExponentVector, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.terms.entry(e) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(self.n, other.n))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.add(eb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(self.n), |acc, _| &acc * self)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    /// Multiplies by the monomial `t^shift`.
    pub fn shift(&self, shift: &ExponentVector) -> Self {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.add(shift), c.clone()))
                .collect(),
        }
    }

    /// Componentwise minimum exponent; `None` for the zero polynomial.
    pub fn min_exponents(&self) -> Option<ExponentVector> {
        self.fold_exponents(i64::min)
    }

    pub fn max_exponents(&self) -> Option<ExponentVector> {
        self.fold_exponents(i64::max)
    }

    fn fold_exponents(&self, f: impl Fn(i64, i64) -> i64) -> Option<ExponentVector> {
        let mut it = self.terms.keys();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, e| acc.zip_with(e, &f)))
    }

    /// True when every exponent is nonnegative.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(ExponentVector::is_nonnegative)
    }

    /// Splits `self = content * primitive` with `content > 0` and the
    /// primitive part having coprime integer coefficients.
    pub fn primitive_part(&self) -> (BigRational, Self) {
        if self.is_zero() {
            return (BigRational::one(), self.clone());
        }
        let (num_gcd, den_lcm) = self.terms.values().fold(
            (BigInt::zero(), BigInt::one()),
            |(g, l), c| (g.gcd(c.numer()), l.lcm(c.denom())),
        );
        let content = BigRational::new(num_gcd, den_lcm);
        let primitive = self.scale(&content.recip());
        (content, primitive)
    }

    /// Exact quotient `q` with `q * divisor = self`, or `None` when the
    /// divisor does not divide. Both sides are first shifted into the
    /// polynomial ring (the divisor so that no variable divides it), then
    /// reduced against the divisor's lexicographic leading term.
    pub fn try_exact_divide(&self, divisor: &Self) -> Result<Option<Self>> {
        self.check_dim(divisor)?;
        if divisor.is_zero() {
            return Err(Error::DivisionByZeroPolynomial);
        }
        if self.is_zero() {
            return Ok(Some(Self::zero(self.n)));
        }
        let d_shift = divisor.min_exponents().expect("nonzero divisor");
        let p_shift = self.min_exponents().expect("nonzero dividend");
        let d = divisor.shift(&ExponentVector::zeros(self.n).sub(&d_shift));
        let d_terms = d.sorted_terms();
        let (lead_e, lead_c) = *d_terms.last().expect("nonzero divisor");
        let lead_inv = lead_c.recip();

        let mut rem: BTreeMap<ExponentVector, BigRational> = self
            .terms
            .iter()
            .map(|(e, c)| (e.sub(&p_shift), c.clone()))
            .collect();
        let mut quotient = Self::zero(self.n);
        while let Some((e, c)) = rem.pop_last() {
            let step = e.sub(lead_e);
            if !step.is_nonnegative() {
                return Ok(None);
            }
            let factor = c * &lead_inv;
            for &(de, dc) in &d_terms[..d_terms.len() - 1] {
                let key = de.add(&step);
                let delta = -(&factor * dc);
                match rem.entry(key) {
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        *o.get_mut() += delta;
                        if o.get().is_zero() {
                            o.remove();
                        }
                    }
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(delta);
                    }
                }
            }
            quotient.add_term(step, factor);
        }
        Ok(Some(quotient.shift(&p_shift.sub(&d_shift))))
    }

    /// Double-precision value at `point`, summing terms in canonical order.
    pub fn evaluate(&self, point: &[Complex64]) -> Result<Complex64> {
        if point.len() != self.n {
            return Err(Error::DimensionMismatch(self.n, point.len()));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (e, c) in self.sorted_terms() {
            total += rational_to_f64(c) * monomial_value(e, point)?;
        }
        Ok(total)
    }

    /// Value as `(mantissa, s)` with `self(point) = mantissa * e^s`, formed
    /// in log space so that tiny or huge monomials neither underflow nor
    /// overflow. `s` is the largest `ln |term|`.
    pub fn evaluate_scaled(&self, point: &[Complex64]) -> Result<(Complex64, f64)> {
        if point.len() != self.n {
            return Err(Error::DimensionMismatch(self.n, point.len()));
        }
        let logs: Vec<Complex64> = point.iter().map(|z| z.ln()).collect();
        let mut terms = Vec::with_capacity(self.terms.len());
        'terms: for (e, c) in self.sorted_terms() {
            let mut z = Complex64::new(rational_to_f64(&c.abs()).ln(), 0.0);
            if c.is_negative() {
                z.im = std::f64::consts::PI;
            }
            for (i, &x) in e.as_slice().iter().enumerate() {
                if x == 0 {
                    continue;
                }
                if point[i].norm() == 0.0 {
                    if x < 0 {
                        return Err(Error::PoleAtZero(i));
                    }
                    continue 'terms;
                }
                z += logs[i] * x as f64;
            }
            terms.push(z);
        }
        let scale = terms.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        if !scale.is_finite() {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        }
        Ok((terms.iter().map(|z| (z - scale).exp()).sum(), scale))
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(PolynomialJson::from(self)).expect("serializable")
    }

    pub fn from_json_value(value: &serde_json::Value) -> Result<Self> {
        let raw: PolynomialJson =
            serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        raw.try_into()
    }

    /// LaTeX with variables `t_{1} .. t_{n}`, terms in canonical order.
    pub fn to_latex(&self) -> String {
        self.render(|i| format!("t_{{{}}}", i + 1), latex_power, latex_rational, "")
    }

    /// Plain text with variables `t1 .. tn`.
    pub fn to_text(&self) -> String {
        self.render(|i| format!("t{}", i + 1), text_power, |c| c.to_string(), "*")
    }

    fn render(
        &self,
        var: impl Fn(usize) -> String,
        power: fn(&str, i64) -> String,
        coeff: impl Fn(&BigRational) -> String,
        join: &str,
    ) -> String {
        let terms = self.sorted_terms();
        if terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (idx, (e, c)) in terms.into_iter().enumerate() {
            let negative = c.is_negative();
            match (idx, negative) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let mag = c.abs();
            let factors: Vec<String> = e
                .as_slice()
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(i, &x)| power(&var(i), x))
                .collect();
            if factors.is_empty() {
                out.push_str(&coeff(&mag));
            } else {
                if !mag.is_one() {
                    out.push_str(&coeff(&mag));
                    out.push_str(join);
                }
                out.push_str(&factors.join(join));
            }
        }
        out
    }
}

fn latex_power(var: &str, e: i64) -> String {
    if e == 1 {
        var.to_string()
    } else {
        format!("{var}^{{{e}}}")
    }
}

fn text_power(var: &str, e: i64) -> String {
    if e == 1 {
        var.to_string()
    } else {
        format!("{var}^{e}")
    }
}

pub(crate) fn latex_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom())
    }
}

pub(crate) fn rational_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn monomial_value(e: &ExponentVector, point: &[Complex64]) -> Result<Complex64> {
    let mut v = Complex64::new(1.0, 0.0);
    for (i, (&x, z)) in e.as_slice().iter().zip(point).enumerate() {
        if x == 0 {
            continue;
        }
        if x < 0 && z.norm() == 0.0 {
            return Err(Error::PoleAtZero(i));
        }
        let x = i32::try_from(x).map_err(|_| Error::Overflow("exponent"))?;
        v *= z.powi(x);
    }
    Ok(v)
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<i64>,
    num: String,
    den: String,
}

#[derive(Serialize, Deserialize)]
struct PolynomialJson {
    n: usize,
    terms: Vec<TermJson>,
}

impl From<&LaurentPolynomial> for PolynomialJson {
    fn from(p: &LaurentPolynomial) -> Self {
        Self {
            n: p.n,
            terms: p
                .sorted_terms()
                .into_iter()
                .map(|(e, c)| TermJson {
                    exp: e.as_slice().to_vec(),
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                })
                .collect(),
        }
    }
}

impl TryFrom<PolynomialJson> for LaurentPolynomial {
    type Error = Error;

    fn try_from(raw: PolynomialJson) -> Result<Self> {
        let mut p = LaurentPolynomial::zero(raw.n);
        for t in raw.terms {
            if t.exp.len() != raw.n {
                return Err(Error::Parse(format!(
                    "exponent of length {} in a {}-variable polynomial",
                    t.exp.len(),
                    raw.n
                )));
            }
            let num: BigInt = t
                .num
                .parse()
                .map_err(|_| Error::Parse(format!("bad numerator {:?}", t.num)))?;
            let den: BigInt = t
                .den
                .parse()
                .map_err(|_| Error::Parse(format!("bad denominator {:?}", t.den)))?;
            if den.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            p.add_term(ExponentVector::new(t.exp), BigRational::new(num, den));
        }
        Ok(p)
    }
}

impl Add for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn add(self, rhs: Self) -> LaurentPolynomial {
        self.try_add(rhs).expect("variable counts differ")
    }
}

impl Sub for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn sub(self, rhs: Self) -> LaurentPolynomial {
        self.try_sub(rhs).expect("variable counts differ")
    }
}

impl Mul for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn mul(self, rhs: Self) -> LaurentPolynomial {
        self.try_mul(rhs).expect("variable counts differ")
    }
}

impl Neg for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn neg(self) -> LaurentPolynomial {
        LaurentPolynomial {
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
