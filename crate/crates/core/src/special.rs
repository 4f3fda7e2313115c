//! Closed formulas for four classical families of monomial polyhedra, each
//! written out from its own statement rather than through [`crate::kernel`]:
//! unimodular matrices, the plane (`n = 2`), the signature-one domains
//! `{ z in D^n : |z_1|^{k_1} < |z_2|^{k_2} ... |z_n|^{k_n} }` and the
//! generalized Hartogs triangles `{ |z_1|^{p_1} < ... < |z_n|^{p_n} < 1 }`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::dk::dk_unchecked;
use crate::error::{Error, Result};
use crate::int_linalg::{
    validate_defining, IntegerMatrix, NormalizedDefiningMatrix, ValidDefiningMatrix,
};
use crate::kernel::BergmanKernelForm;
use crate::lattice::Window;
use crate::laurent::{ExponentVector, LaurentPolynomial};

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn small(x: &BigInt, what: &'static str) -> Result<i64> {
    x.to_i64().ok_or(Error::Overflow(what))
}

fn check_positive_coprime(v: &[i64]) -> Result<()> {
    if v.len() < 2 {
        return Err(Error::InvalidDimension {
            rows: v.len(),
            cols: v.len(),
        });
    }
    if v.iter().any(|&x| x < 1) || v.iter().fold(0i64, |g, &x| g.gcd(&x)) != 1 {
        return Err(Error::GcdViolation);
    }
    Ok(())
}

/// Binomials `t^{minus} - t^{plus}` read off the signs of each row.
fn row_binomials(m: &IntegerMatrix) -> Result<Vec<LaurentPolynomial>> {
    let rows = m.to_i64_rows().ok_or(Error::Overflow("matrix entries"))?;
    Ok(rows
        .iter()
        .map(|row| {
            let minus = row.iter().map(|&x| (-x).max(0)).collect();
            let plus = row.iter().map(|&x| x.max(0)).collect();
            LaurentPolynomial::binomial(ExponentVector::new(minus), ExponentVector::new(plus))
        })
        .collect())
}

fn unit_exponent(n: usize, j: usize, power: i64) -> ExponentVector {
    let mut e = vec![0; n];
    e[j] = power;
    ExponentVector::new(e)
}

fn sum_over(
    n: usize,
    window: &Window,
    coefficient: impl Fn(&[i64]) -> BigInt,
) -> LaurentPolynomial {
    LaurentPolynomial::from_terms(
        n,
        window.points().filter_map(|nu| {
            let c = coefficient(nu.as_slice());
            (!c.is_zero()).then(|| (nu, BigRational::from_integer(c)))
        }),
    )
}

/// Unimodular case: the numerator collapses to the single monomial
/// `t^{1|B| - 1}`, `|B|` the entrywise absolute value.
pub fn kernel_det1(b: &NormalizedDefiningMatrix) -> Result<BergmanKernelForm> {
    if !b.det().is_one() {
        return Err(Error::NotUnimodular(b.det().to_string()));
    }
    let source = validate_defining(b).into_result()?;
    let n = b.dim();
    let exponent = b
        .matrix()
        .abs_column_sums()
        .iter()
        .map(|s| small(s, "column sum").map(|s| s - 1))
        .collect::<Result<Vec<_>>>()?;
    Ok(BergmanKernelForm {
        denominator_factors: row_binomials(b.matrix())?,
        source,
        prefactor: BigRational::one(),
        pi_exponent: -(n as i64),
        numerator: LaurentPolynomial::monomial(BigRational::one(), ExponentVector::new(exponent)),
    })
}

/// Plane case written in terms of `A = adj B = [[a11, a12], [a21, a22]]`.
pub fn kernel_dim2(b: &NormalizedDefiningMatrix) -> Result<BergmanKernelForm> {
    if b.dim() != 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            got: b.dim(),
        });
    }
    let source = validate_defining(b).into_result()?;
    let rows = source
        .adjugate()
        .to_i64_rows()
        .ok_or(Error::Overflow("adjugate entries"))?;
    // a[i][j] = a^{i+1}_{j+1}
    let a = [[rows[0][0], rows[0][1]], [rows[1][0], rows[1][1]]];
    let det_a = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let constant = |j: usize| -2 * (a[1][0] * a[0][j] + a[0][1] * a[1][j]) + (a[0][j] + a[1][j] - 1);
    let zeta = |j: usize, nu: &[i64]| a[0][j] * nu[0] + a[1][j] * nu[1] + constant(j);

    let top = 2 * det_a - 2;
    let mut upper = [0i64; 2];
    for (i, u) in upper.iter_mut().enumerate() {
        *u = (0..2)
            .filter(|&j| a[i][j] > 0)
            .map(|j| Integer::div_floor(&(top - constant(j)), &a[i][j]))
            .min()
            .expect("adjugate has no zero row");
    }
    let k = big(det_a);
    let numerator = sum_over(2, &Window::new(vec![0, 0], upper.to_vec()), |nu| {
        dk_unchecked(&k, &big(zeta(0, nu))) * dk_unchecked(&k, &big(zeta(1, nu)))
    });

    let factors = vec![
        LaurentPolynomial::binomial(unit_exponent(2, 1, a[0][1]), unit_exponent(2, 0, a[1][1])),
        LaurentPolynomial::binomial(unit_exponent(2, 0, a[1][0]), unit_exponent(2, 1, a[0][0])),
    ];
    Ok(BergmanKernelForm {
        source,
        prefactor: BigRational::from_integer(k).recip(),
        pi_exponent: -2,
        numerator,
        denominator_factors: factors,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignatureOneSpec {
    k: Vec<i64>,
}

impl SignatureOneSpec {
    pub fn new(k: Vec<i64>) -> Result<Self> {
        check_positive_coprime(&k)?;
        Ok(Self { k })
    }

    pub fn k(&self) -> &[i64] {
        &self.k
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }

    /// `K = lcm(k_1, ..., k_n)`.
    pub fn lcm(&self) -> i64 {
        self.k.iter().fold(1, |l, x| l.lcm(x))
    }

    /// `l_a = K / k_a`.
    pub fn ell(&self) -> Vec<i64> {
        let big_k = self.lcm();
        self.k.iter().map(|x| big_k / x).collect()
    }

    /// `L = prod_a l_a`.
    pub fn ell_product(&self) -> BigInt {
        self.ell().into_iter().map(BigInt::from).product()
    }

    /// First row `(k_1, -k_2, ..., -k_n)` over the last `n - 1` identity rows.
    pub fn matrix(&self) -> IntegerMatrix {
        let n = self.n();
        let mut rows = vec![vec![0i64; n]; n];
        rows[0][0] = self.k[0];
        for j in 1..n {
            rows[0][j] = -self.k[j];
            rows[j][j] = 1;
        }
        IntegerMatrix::from_i64(&rows).expect("square")
    }

    /// `E(nu)` for `nu` of length `n`.
    pub fn coefficient(&self, nu: &[i64]) -> BigInt {
        let big_k = self.lcm();
        let ell = self.ell();
        let first = ell[0] * (nu[0] + 1);
        let mut e = dk_unchecked(&big(big_k), &big(2 * big_k - first - 1));
        for j in 1..self.n() {
            if e.is_zero() {
                break;
            }
            e *= dk_unchecked(&big(ell[j]), &big(ell[j] * (nu[j] + 1) + first - 2 * big_k - 1));
        }
        e
    }

    /// Box in `N^n` outside of which `E` vanishes.
    pub fn support(&self) -> Window {
        let big_k = self.lcm();
        let ell = self.ell();
        let mut upper = vec![(2 * big_k - 1) / ell[0] - 1];
        for &l in &ell[1..] {
            upper.push(Integer::div_floor(&(2 * l + 2 * big_k - 1 - ell[0]), &l) - 1);
        }
        Window::new(vec![0; self.n()], upper)
    }
}

pub fn kernel_signature1(spec: &SignatureOneSpec) -> Result<BergmanKernelForm> {
    let n = spec.n();
    let source = ValidDefiningMatrix::new(&spec.matrix())?;
    let numerator = sum_over(n, &spec.support(), |nu| spec.coefficient(nu));

    let mut factors = Vec::with_capacity(n);
    let mut monomial = spec.k.clone();
    monomial[0] = 0;
    factors.push(LaurentPolynomial::binomial(
        ExponentVector::new(monomial),
        unit_exponent(n, 0, spec.k[0]),
    ));
    for j in 1..n {
        factors.push(LaurentPolynomial::binomial(
            ExponentVector::zeros(n),
            unit_exponent(n, j, 1),
        ));
    }
    Ok(BergmanKernelForm {
        source,
        prefactor: BigRational::from_integer(spec.ell_product()).recip(),
        pi_exponent: -(n as i64),
        numerator,
        denominator_factors: factors,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParkZhangSpec {
    p: Vec<i64>,
}

/// `nu(P)`: `P - 1` on `[2, m + 1]`, `2m - P + 1` on `[m + 2, 2m]`, else 0.
pub fn nu_of_p(m: &BigInt, p: &BigInt) -> BigInt {
    let two = big(2);
    if p < &two || p > &(&two * m) {
        BigInt::zero()
    } else if p <= &(m + 1) {
        p - 1
    } else {
        &two * m - p + 1
    }
}

impl ParkZhangSpec {
    pub fn new(p: Vec<i64>) -> Result<Self> {
        check_positive_coprime(&p)?;
        Ok(Self { p })
    }

    pub fn p(&self) -> &[i64] {
        &self.p
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    /// `P = prod_j p_j`.
    pub fn product(&self) -> BigInt {
        self.p.iter().map(|&x| big(x)).product()
    }

    /// `p'_j = P / p_j`.
    pub fn p_prime(&self) -> Vec<BigInt> {
        let total = self.product();
        self.p.iter().map(|&x| &total / x).collect()
    }

    /// `d_j = gcd(p_j, p_{j+1})`, `d_n = p_n`.
    pub fn d(&self) -> Vec<i64> {
        let n = self.n();
        (0..n)
            .map(|j| if j + 1 < n { self.p[j].gcd(&self.p[j + 1]) } else { self.p[j] })
            .collect()
    }

    /// `Lambda = prod_j d_j`.
    pub fn lambda(&self) -> BigInt {
        self.d().into_iter().map(BigInt::from).product()
    }

    /// `m_{j,j+1} = lcm(p'_j, p'_{j+1})`, `m_{n,n+1} = p'_n`.
    pub fn m(&self) -> Vec<BigInt> {
        let pp = self.p_prime();
        let n = self.n();
        (0..n)
            .map(|j| if j + 1 < n { pp[j].lcm(&pp[j + 1]) } else { pp[j].clone() })
            .collect()
    }

    /// Upper summation bounds `N_j`.
    pub fn bounds(&self) -> Vec<BigInt> {
        let pp = self.p_prime();
        let m = self.m();
        (0..self.n())
            .map(|j| {
                let num: BigInt = if j == 0 {
                    BigInt::from(2) * &m[0] - 1 - &pp[0]
                } else {
                    BigInt::from(2) * (&m[j - 1] + &m[j]) - &pp[j] - 2
                };
                num.div_floor(&pp[j])
            })
            .collect()
    }

    /// Bidiagonal matrix with diagonal `p_j / d_j` and superdiagonal
    /// `-p_{j+1} / d_j`.
    pub fn matrix(&self) -> IntegerMatrix {
        let n = self.n();
        let d = self.d();
        let mut rows = vec![vec![0i64; n]; n];
        for j in 0..n {
            rows[j][j] = self.p[j] / d[j];
            if j + 1 < n {
                rows[j][j + 1] = -self.p[j + 1] / d[j];
            }
        }
        IntegerMatrix::from_i64(&rows).expect("square")
    }

    /// `P_1, ..., P_n` for the multi-index `alpha`.
    pub fn recursion(&self, alpha: &[i64]) -> Vec<BigInt> {
        let pp = self.p_prime();
        let m = self.m();
        let mut out: Vec<BigInt> = Vec::with_capacity(self.n());
        for j in 0..self.n() {
            let step = BigInt::from(2) * &m[j] - &pp[j] - &pp[j] * alpha[j];
            let value = match out.last() {
                None => step + 1,
                Some(prev) => step + prev,
            };
            out.push(value);
        }
        out
    }

    /// `nu(P_1) ... nu(P_n)`.
    pub fn coefficient(&self, alpha: &[i64]) -> BigInt {
        let m = self.m();
        self.recursion(alpha)
            .iter()
            .zip(&m)
            .map(|(p, m)| nu_of_p(m, p))
            .product()
    }

    pub fn support(&self) -> Result<Window> {
        let upper = self
            .bounds()
            .iter()
            .map(|b| small(b, "summation bound"))
            .collect::<Result<Vec<_>>>()?;
        Ok(Window::new(vec![0; self.n()], upper))
    }
}

pub fn kernel_park_zhang(spec: &ParkZhangSpec) -> Result<BergmanKernelForm> {
    let n = spec.n();
    let source = ValidDefiningMatrix::new(&spec.matrix())?;
    let numerator = sum_over(n, &spec.support()?, |alpha| spec.coefficient(alpha));

    let d = spec.d();
    let mut factors = Vec::with_capacity(n);
    for j in 0..n - 1 {
        factors.push(LaurentPolynomial::binomial(
            unit_exponent(n, j, spec.p[j] / d[j]),
            unit_exponent(n, j + 1, spec.p[j + 1] / d[j]),
        ));
    }
    factors.push(LaurentPolynomial::binomial(
        ExponentVector::zeros(n),
        unit_exponent(n, n - 1, 1),
    ));
    Ok(BergmanKernelForm {
        source,
        prefactor: BigRational::from_integer(num_traits::pow(spec.product(), n - 1)).recip(),
        pi_exponent: -(n as i64),
        numerator,
        denominator_factors: factors,
    })
}
