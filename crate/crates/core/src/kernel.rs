//! Assembly of the canonical rational form of the Bergman kernel.
//!
//! For a valid defining matrix `B` with `A = adj B` the kernel is
//!
//! ```text
//! K = 1 / (pi^n (det B)^(n-1)) * N(t) / prod_j (t^{(b_-)^j} - t^{(b_+)^j})^2
//! N(t) = sum_nu C_B(nu) t^nu
//! C_B(nu) = prod_j D_{det B}((nu - 2 * 1 B_- + 1) [adj B]_j - 1)
//! ```
//!
//! and `C_B` vanishes off the box `xi_j - 1 <= nu_j <= 2 s_j - 1 - xi_j`,
//! where `s_j = sum_k |b^k_j|` is the `j`-th **column** sum of `|B|` and
//! `xi_j = ceil(s_j / det B)`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dk::{dk_i128, dk_unchecked};
use crate::error::{Error, Result};
use crate::int_linalg::{row_gcd, IntegerMatrix, ValidDefiningMatrix};
use crate::lattice::Window;
use crate::laurent::{latex_rational, rational_to_f64, ExponentVector, LaurentPolynomial};

/// Default threshold below which a denominator factor counts as zero.
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Upper bound on the number of prefixes visited while enumerating the
/// nu-box (the last coordinate is solved in closed form).
pub const MAX_BOX_PREFIXES: u128 = 1 << 32;

/// `xi_j = ceil(s_j / det B)` with `s_j` the `j`-th absolute column sum.
pub fn xi(b: &ValidDefiningMatrix, j: usize) -> BigInt {
    let s: BigInt = b.matrix().column(j).iter().map(Signed::abs).sum();
    s.div_ceil(b.det())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NuBox {
    pub lower: ExponentVector,
    pub upper: ExponentVector,
    pub xi: Vec<i64>,
}

impl NuBox {
    pub fn window(&self) -> Window {
        Window::new(
            self.lower.as_slice().to_vec(),
            self.upper.as_slice().to_vec(),
        )
    }

    pub fn is_empty(&self) -> bool {
        self.window().is_empty()
    }

    pub fn contains(&self, nu: &ExponentVector) -> bool {
        self.window().contains(nu.as_slice())
    }
}

pub fn nu_box(b: &ValidDefiningMatrix) -> Result<NuBox> {
    let n = b.dim();
    let sums = b.matrix().abs_column_sums();
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut xis = Vec::with_capacity(n);
    for (j, s) in sums.iter().enumerate() {
        let x = xi(b, j);
        let lo = &x - 1;
        let hi = BigInt::from(2) * s - 1 - &x;
        let to_i64 = |v: &BigInt| v.to_i64().ok_or(Error::Overflow("nu-box bounds"));
        xis.push(to_i64(&x)?);
        lower.push(to_i64(&lo)?);
        upper.push(to_i64(&hi)?);
    }
    Ok(NuBox {
        lower: ExponentVector::new(lower),
        upper: ExponentVector::new(upper),
        xi: xis,
    })
}

/// `1 - 2 * 1 B_-`, the constant part of `nu - 2 * 1 B_- + 1`.
fn cb_offset(b: &ValidDefiningMatrix) -> Vec<BigInt> {
    b.split()
        .minus
        .column_sums()
        .into_iter()
        .map(|s| BigInt::one() - BigInt::from(2) * s)
        .collect()
}

/// `C_B(nu)`, evaluated in arbitrary precision.
pub fn coeff_cb(b: &ValidDefiningMatrix, nu: &ExponentVector) -> BigInt {
    let n = b.dim();
    assert_eq!(nu.len(), n, "exponent length differs from dimension");
    let shifted: Vec<BigInt> = cb_offset(b)
        .into_iter()
        .zip(nu.as_slice())
        .map(|(c, &v)| c + v)
        .collect();
    let adj = b.adjugate();
    let mut product = BigInt::one();
    for j in 0..n {
        let arg: BigInt = (0..n).map(|i| &shifted[i] * adj.entry(i, j)).sum::<BigInt>() - 1;
        let d = dk_unchecked(b.det(), &arg);
        if d.is_zero() {
            return d;
        }
        product *= d;
    }
    product
}

/// Machine-integer view of `C_B` as an affine function of `nu`:
/// `arg_j(nu) = sum_i nu_i a^i_j + offset_j`.
struct CbTable {
    n: usize,
    det: i128,
    /// `adj[i][j] = a^i_j`
    adj: Vec<Vec<i128>>,
    offset: Vec<i128>,
}

impl CbTable {
    fn new(b: &ValidDefiningMatrix, window: &Window) -> Option<Self> {
        let n = b.dim();
        let det = b.det().to_i64()? as i128;
        let adj: Vec<Vec<i128>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| b.adjugate().entry(i, j).to_i64().map(i128::from))
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<_>>()?;
        let c = cb_offset(b);
        let mut offset = Vec::with_capacity(n);
        for j in 0..n {
            let v: BigInt = (0..n).map(|i| &c[i] * b.adjugate().entry(i, j)).sum::<BigInt>() - 1;
            offset.push(v.to_i64()? as i128);
        }
        // every partial sum stays far inside i128 when these all fit in i64
        let reach = window
            .lower
            .iter()
            .chain(&window.upper)
            .map(|x| x.unsigned_abs())
            .max()
            .unwrap_or(0);
        if reach > i64::MAX as u64 / (4 * n as u64) {
            return None;
        }
        Some(Self {
            n,
            det,
            adj,
            offset,
        })
    }

    /// Nonzero `(nu, C_B(nu))` pairs with the given leading coordinates,
    /// solving the last coordinate's support interval directly.
    fn scan_prefix(&self, prefix: &[i64], lo: i64, hi: i64, out: &mut Vec<(ExponentVector, BigInt)>) {
        let last = self.n - 1;
        let top = 2 * self.det - 2;
        let mut base = self.offset.clone();
        for (i, &v) in prefix.iter().enumerate() {
            for j in 0..self.n {
                base[j] += v as i128 * self.adj[i][j];
            }
        }
        let mut from = lo as i128;
        let mut to = hi as i128;
        for j in 0..self.n {
            let s = self.adj[last][j];
            if s == 0 {
                if base[j] < 0 || base[j] > top {
                    return;
                }
            } else {
                from = from.max(Integer::div_ceil(&-base[j], &s));
                to = to.min(Integer::div_floor(&(top - base[j]), &s));
            }
        }
        let mut nu = prefix.to_vec();
        nu.push(0);
        for v in from..=to {
            let mut product: Option<i128> = Some(1);
            let mut big = BigInt::one();
            let mut zero = false;
            for j in 0..self.n {
                let d = dk_i128(self.det, base[j] + v * self.adj[last][j]);
                if d == 0 {
                    zero = true;
                    break;
                }
                product = match product {
                    Some(p) => p.checked_mul(d).or_else(|| {
                        big = BigInt::from(p);
                        None
                    }),
                    None => None,
                };
                if product.is_none() {
                    big *= BigInt::from(d);
                }
            }
            if zero {
                continue;
            }
            nu[last] = v as i64;
            let c = product.map(BigInt::from).unwrap_or(big);
            out.push((ExponentVector::new(nu.clone()), c));
        }
    }
}

/// `sum_{nu in box} C_B(nu) t^nu`, enumerated lexicographically.
pub fn numerator_polynomial(b: &ValidDefiningMatrix) -> Result<LaurentPolynomial> {
    let n = b.dim();
    let bx = nu_box(b)?;
    let window = bx.window();
    if window.is_empty() {
        return Ok(LaurentPolynomial::zero(n));
    }
    let prefix_window = Window::new(window.lower[..n - 1].to_vec(), window.upper[..n - 1].to_vec());
    let prefixes = prefix_window.len();
    if prefixes > MAX_BOX_PREFIXES {
        return Err(Error::BoxTooLarge(window.len()));
    }
    let (lo, hi) = (window.lower[n - 1], window.upper[n - 1]);
    let terms: Vec<(ExponentVector, BigInt)> = match CbTable::new(b, &window) {
        Some(table) => (window.lower[0]..=window.upper[0])
            .into_par_iter()
            .flat_map_iter(|first| {
                let mut out = Vec::new();
                let sub = Window::new(
                    std::iter::once(first)
                        .chain(prefix_window.lower[1..].iter().copied())
                        .collect(),
                    std::iter::once(first)
                        .chain(prefix_window.upper[1..].iter().copied())
                        .collect(),
                );
                for prefix in sub.points() {
                    table.scan_prefix(prefix.as_slice(), lo, hi, &mut out);
                }
                out
            })
            .collect(),
        None => window
            .points()
            .filter_map(|nu| {
                let c = coeff_cb(b, &nu);
                (!c.is_zero()).then_some((nu, c))
            })
            .collect(),
    };
    Ok(LaurentPolynomial::from_terms(
        n,
        terms
            .into_iter()
            .map(|(e, c)| (e, BigRational::from_integer(c))),
    ))
}

fn row_exponent(row: &[BigInt]) -> Result<ExponentVector> {
    row.iter()
        .map(|x| x.to_i64().ok_or(Error::Overflow("denominator exponent")))
        .collect::<Result<Vec<_>>>()
        .map(ExponentVector::new)
}

/// `p_j = t^{(b_-)^j} - t^{(b_+)^j}` for each row, unsquared.
pub fn denominator_factors(b: &ValidDefiningMatrix) -> Result<Vec<LaurentPolynomial>> {
    let split = b.split();
    (0..b.dim())
        .map(|j| {
            Ok(LaurentPolynomial::binomial(
                row_exponent(split.minus.row(j))?,
                row_exponent(split.plus.row(j))?,
            ))
        })
        .collect()
}

/// The hypothesis under which `t^{(b_-)^j} - t^{(b_+)^j}` is irreducible:
/// the combined exponents of the two monomials have gcd 1.
pub fn irreducibility_precondition(m: &IntegerMatrix, j: usize) -> bool {
    row_gcd(m.row(j)).map(|g| g.is_one()).unwrap_or(false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CanonicityVerdict {
    Pass,
    /// Factor at this (0-based) index divides the numerator.
    Fail { factor: usize },
}

pub fn canonicity_check(k: &BergmanKernelForm) -> CanonicityVerdict {
    for (j, f) in k.denominator_factors.iter().enumerate() {
        if !matches!(k.numerator.try_exact_divide(f), Ok(None)) {
            return CanonicityVerdict::Fail { factor: j };
        }
    }
    CanonicityVerdict::Pass
}

/// Canonical Bergman kernel of a monomial polyhedron:
/// `prefactor * pi^pi_exponent * numerator / prod_j denominator_factors[j]^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BergmanKernelForm {
    pub source: ValidDefiningMatrix,
    pub prefactor: BigRational,
    pub pi_exponent: i64,
    pub numerator: LaurentPolynomial,
    pub denominator_factors: Vec<LaurentPolynomial>,
}

/// Normalizes, validates, builds the form, and runs the canonicity check.
pub fn assemble_kernel(m: &IntegerMatrix) -> Result<BergmanKernelForm> {
    assemble_from_valid(&ValidDefiningMatrix::new(m)?)
}

pub fn assemble_from_valid(b: &ValidDefiningMatrix) -> Result<BergmanKernelForm> {
    let n = b.dim();
    for j in 0..n {
        if !irreducibility_precondition(b.matrix(), j) {
            return Err(Error::CanonicityViolation(format!(
                "row {j} of the defining matrix is not primitive"
            )));
        }
    }
    let numerator = numerator_polynomial(b)?;
    if numerator.is_zero() {
        return Err(Error::CanonicityViolation("numerator vanishes identically".into()));
    }
    let form = BergmanKernelForm {
        source: b.clone(),
        prefactor: BigRational::from_integer(num_traits::pow(b.det().clone(), n - 1)).recip(),
        pi_exponent: -(n as i64),
        numerator,
        denominator_factors: denominator_factors(b)?,
    };
    match canonicity_check(&form) {
        CanonicityVerdict::Pass => Ok(form),
        CanonicityVerdict::Fail { factor } => Err(Error::CanonicityViolation(format!(
            "denominator factor {factor} divides the numerator"
        ))),
    }
}

/// `K(p, q)` in double precision with `t_j = p_j * conj(q_j)`. A factor is
/// singular when its value is below `epsilon` times its larger monomial.
pub fn eval_kernel(
    k: &BergmanKernelForm,
    p: &[Complex64],
    q: &[Complex64],
    epsilon: f64,
) -> Result<Complex64> {
    let n = k.n();
    if p.len() != n || q.len() != n {
        return Err(Error::DimensionMismatch(n, p.len().min(q.len())));
    }
    let t: Vec<Complex64> = p.iter().zip(q).map(|(a, b)| a * b.conj()).collect();
    let mut log_scale = 0.0;
    let mut denominator = Complex64::new(1.0, 0.0);
    for (j, f) in k.denominator_factors.iter().enumerate() {
        // relative to the larger of the two monomials
        let (v, s) = f.evaluate_scaled(&t)?;
        if v.norm() < epsilon {
            return Err(Error::EvaluationAtSingularity {
                factor: j,
                modulus: v.norm(),
            });
        }
        denominator *= v * v;
        log_scale -= 2.0 * s;
    }
    let (numerator, s) = k.numerator.evaluate_scaled(&t)?;
    let scale = rational_to_f64(&k.prefactor) * std::f64::consts::PI.powi(k.pi_exponent as i32);
    Ok(numerator / denominator * scale * (log_scale + s).exp())
}

/// Orients a binomial so that its lexicographically leading coefficient is
/// positive.
fn orient_leading_positive(f: &LaurentPolynomial) -> LaurentPolynomial {
    match f.leading_term() {
        Some((_, c)) if c.is_negative() => -f,
        _ => f.clone(),
    }
}

fn factor_sort_key(f: &LaurentPolynomial) -> Vec<(ExponentVector, BigRational)> {
    f.sorted_terms()
        .into_iter()
        .map(|(e, c)| (e.clone(), c.clone()))
        .collect()
}

impl BergmanKernelForm {
    pub fn n(&self) -> usize {
        self.numerator.n()
    }

    pub fn nu_box(&self) -> Result<NuBox> {
        nu_box(&self.source)
    }

    pub fn canonicity(&self) -> CanonicityVerdict {
        canonicity_check(self)
    }

    pub fn evaluate(&self, p: &[Complex64], q: &[Complex64]) -> Result<Complex64> {
        eval_kernel(self, p, q, DEFAULT_EPSILON)
    }

    /// Integer content of the numerator moved into the prefactor, each
    /// factor oriented so its lexicographic leading coefficient is `+1`,
    /// factors sorted. Two forms of the same kernel normalize identically.
    pub fn normalized(&self) -> Self {
        let (content, numerator) = self.numerator.primitive_part();
        let mut factors: Vec<LaurentPolynomial> = self
            .denominator_factors
            .iter()
            .map(orient_leading_positive)
            .collect();
        factors.sort_by_cached_key(factor_sort_key);
        Self {
            source: self.source.clone(),
            prefactor: &self.prefactor * content,
            pi_exponent: self.pi_exponent,
            numerator,
            denominator_factors: factors,
        }
    }

    /// Equality of the represented rational functions up to the
    /// normalization of [`BergmanKernelForm::normalized`].
    pub fn equivalent(&self, other: &Self) -> bool {
        let a = self.normalized();
        let b = other.normalized();
        a.prefactor == b.prefactor
            && a.pi_exponent == b.pi_exponent
            && a.numerator == b.numerator
            && a.denominator_factors == b.denominator_factors
    }

    /// Re-expresses the form in the conventions of its source matrix:
    /// factor `j` becomes `t^{(b_-)^j} - t^{(b_+)^j}` and the prefactor
    /// becomes `1 / (det B)^(n-1)`, rescaling the numerator to compensate.
    pub fn aligned_to_source(&self) -> Result<Self> {
        let n = self.n();
        let targets = denominator_factors(&self.source)?;
        let mut used = vec![false; self.denominator_factors.len()];
        for target in &targets {
            let negated = -target;
            let hit = self
                .denominator_factors
                .iter()
                .enumerate()
                .find(|(i, f)| !used[*i] && (*f == target || **f == negated));
            match hit {
                Some((i, _)) => used[i] = true,
                None => {
                    return Err(Error::CanonicityViolation(format!(
                        "factor {target} of the source matrix is missing"
                    )))
                }
            }
        }
        let prefactor =
            BigRational::from_integer(num_traits::pow(self.source.det().clone(), n - 1)).recip();
        let ratio = &self.prefactor / &prefactor;
        Ok(Self {
            source: self.source.clone(),
            prefactor,
            pi_exponent: self.pi_exponent,
            numerator: self.numerator.scale(&ratio),
            denominator_factors: targets,
        })
    }

    pub fn to_json_value(&self) -> Value {
        let bx = self.nu_box().ok();
        serde_json::to_value(KernelJson {
            n: self.n(),
            det_b: self.source.det().to_string(),
            matrix: self.source.matrix().to_json_value(),
            prefactor: RationalJson::from(&self.prefactor),
            pi_exponent: self.pi_exponent,
            numerator: self.numerator.to_json_value(),
            denominator_factors: self
                .denominator_factors
                .iter()
                .map(LaurentPolynomial::to_json_value)
                .collect(),
            nu_box: bx.map(|b| NuBoxJson {
                lower: b.lower.into_vec(),
                upper: b.upper.into_vec(),
                xi: b.xi,
            }),
        })
        .expect("serializable")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serializable")
    }

    /// Rebuilds a form from its JSON, revalidating the embedded matrix.
    pub fn from_json_value(value: &Value) -> Result<Self> {
        let raw: KernelJson =
            serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let matrix = IntegerMatrix::from_json_value(&raw.matrix)?;
        let source = ValidDefiningMatrix::new(&matrix)?;
        if source.matrix() != &matrix {
            return Err(Error::Parse("embedded matrix is not normalized".into()));
        }
        let numerator = LaurentPolynomial::from_json_value(&raw.numerator)?;
        let denominator_factors = raw
            .denominator_factors
            .iter()
            .map(LaurentPolynomial::from_json_value)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            source,
            prefactor: raw.prefactor.try_into()?,
            pi_exponent: raw.pi_exponent,
            numerator,
            denominator_factors,
        })
    }

    fn prefactor_parts(&self) -> (String, String) {
        (self.prefactor.numer().to_string(), self.prefactor.denom().to_string())
    }

    pub fn to_latex(&self) -> String {
        let (num, den) = self.prefactor_parts();
        let pi = match -self.pi_exponent {
            0 => String::new(),
            1 => "\\pi".into(),
            e => format!("\\pi^{{{e}}}"),
        };
        let den = if den == "1" { pi } else { format!("{den}{pi}") };
        let factors: String = self
            .denominator_factors
            .iter()
            .map(|f| format!("\\left({}\\right)^{{2}}", factor_latex(f)))
            .collect();
        format!(
            "K(p,q) = \\frac{{{num}}}{{{den}}} \\cdot \\frac{{{}}}{{{factors}}}",
            self.numerator.to_latex()
        )
    }

    pub fn to_text(&self) -> String {
        let factors: Vec<String> = self
            .denominator_factors
            .iter()
            .map(|f| format!("({})^2", binomial_text(f)))
            .collect();
        format!(
            "K(p,q) = {} * pi^{} * ({}) / ({})",
            self.prefactor,
            self.pi_exponent,
            self.numerator.to_text(),
            factors.join(" * ")
        )
    }
}

/// Positive term first for binomials, canonical order otherwise.
fn split_binomial(f: &LaurentPolynomial) -> Option<(LaurentPolynomial, LaurentPolynomial)> {
    let terms = f.sorted_terms();
    if terms.len() != 2 {
        return None;
    }
    let (pos, neg): (Vec<_>, Vec<_>) = terms.into_iter().partition(|(_, c)| c.is_positive());
    if pos.len() != 1 {
        return None;
    }
    let mono = |(e, c): (&ExponentVector, &BigRational)| {
        LaurentPolynomial::monomial(c.abs(), e.clone())
    };
    Some((mono(pos[0]), mono(neg[0])))
}

fn factor_latex(f: &LaurentPolynomial) -> String {
    match split_binomial(f) {
        Some((a, b)) => format!("{} - {}", a.to_latex(), b.to_latex()),
        None => f.to_latex(),
    }
}

fn binomial_text(f: &LaurentPolynomial) -> String {
    match split_binomial(f) {
        Some((a, b)) => format!("{} - {}", a.to_text(), b.to_text()),
        None => f.to_text(),
    }
}

#[derive(Serialize, Deserialize)]
struct RationalJson {
    num: String,
    den: String,
}

impl From<&BigRational> for RationalJson {
    fn from(c: &BigRational) -> Self {
        Self {
            num: c.numer().to_string(),
            den: c.denom().to_string(),
        }
    }
}

impl TryFrom<RationalJson> for BigRational {
    type Error = Error;

    fn try_from(r: RationalJson) -> Result<Self> {
        let num: BigInt = r.num.parse().map_err(|_| Error::Parse(r.num.clone()))?;
        let den: BigInt = r.den.parse().map_err(|_| Error::Parse(r.den.clone()))?;
        if den.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(BigRational::new(num, den))
    }
}

#[derive(Serialize, Deserialize)]
struct NuBoxJson {
    lower: Vec<i64>,
    upper: Vec<i64>,
    xi: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct KernelJson {
    n: usize,
    #[serde(rename = "detB")]
    det_b: String,
    matrix: Value,
    prefactor: RationalJson,
    pi_exponent: i64,
    numerator: Value,
    denominator_factors: Vec<Value>,
    nu_box: Option<NuBoxJson>,
}

/// Rendering of a rational prefactor for callers assembling their own
/// displays.
pub fn prefactor_latex(c: &BigRational) -> String {
    latex_rational(c)
}
