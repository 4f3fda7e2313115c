//! The triangular coefficient sequence `D_k(r)`, the coefficient of `x^r`
//! in `((1 - x^k) / (1 - x))^2 = (1 + x + ... + x^{k-1})^2`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::laurent::{ExponentVector, LaurentPolynomial};

/// Closed-form branch evaluation of `D_k(r)`, generic over the integer type
/// so the same code serves the `BigInt` API and the `i128` enumeration loops.
pub fn dk<T>(k: &T, r: &T) -> Result<T>
where
    T: Integer + Signed + Clone,
{
    if *k < T::one() {
        return Err(Error::InvalidK);
    }
    Ok(dk_unchecked(k, r))
}

#[inline]
pub(crate) fn dk_unchecked<T>(k: &T, r: &T) -> T
where
    T: Integer + Signed + Clone,
{
    let one = T::one();
    if r.is_negative() {
        return T::zero();
    }
    let two_k = k.clone() + k.clone();
    if *r < *k {
        r.clone() + one
    } else if *r <= two_k.clone() - one.clone() - one.clone() {
        two_k - (one + r.clone())
    } else {
        T::zero()
    }
}

#[inline]
pub(crate) fn dk_i128(k: i128, r: i128) -> i128 {
    if r < 0 {
        0
    } else if r < k {
        r + 1
    } else if r <= 2 * k - 2 {
        2 * k - 1 - r
    } else {
        0
    }
}

/// Coefficients of `x^0 .. x^{2k-2}` obtained by multiplying out
/// `(1 + x + ... + x^{k-1})^2` as a one-variable polynomial.
pub fn dk_via_generating_polynomial(k: usize) -> Result<Vec<BigInt>> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    let mut base = LaurentPolynomial::zero(1);
    for e in 0..k as i64 {
        base = &base + &LaurentPolynomial::monomial(BigRational::one(), ExponentVector::new(vec![e]));
    }
    let square = &base * &base;
    (0..=(2 * k as i64 - 2))
        .map(|r| {
            let c = square.coefficient(&ExponentVector::new(vec![r]));
            if c.is_integer() {
                Ok(c.to_integer())
            } else {
                Err(Error::Parse("non-integer coefficient".into()))
            }
        })
        .collect()
}

/// Convenience for tests and callers holding small values.
pub fn dk_big(k: i64, r: i64) -> Result<BigInt> {
    dk(&BigInt::from(k), &BigInt::from(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_values() {
        assert_eq!(dk(&3i64, &2), Ok(3));
        assert_eq!(dk(&1i64, &0), Ok(1));
        assert_eq!(dk(&5i64, &-1), Ok(0));
        assert_eq!(dk(&5i64, &9), Ok(0));
        assert_eq!(dk(&4i64, &5), Ok(2));
        assert_eq!(dk_big(4, 5), Ok(BigInt::from(2)));
        assert_eq!(dk(&0i64, &0), Err(Error::InvalidK));
        assert_eq!(dk(&-2i64, &0), Err(Error::InvalidK));
    }

    #[test]
    fn generating_polynomial_small() {
        let to_big = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        assert_eq!(dk_via_generating_polynomial(1).unwrap(), to_big(&[1]));
        assert_eq!(dk_via_generating_polynomial(2).unwrap(), to_big(&[1, 2, 1]));
        assert_eq!(
            dk_via_generating_polynomial(3).unwrap(),
            to_big(&[1, 2, 3, 2, 1])
        );
        assert_eq!(dk_via_generating_polynomial(0), Err(Error::InvalidK));
    }

    #[test]
    fn i128_path_matches_generic() {
        for k in 1..12i128 {
            for r in -3..3 * k {
                assert_eq!(dk_i128(k, r), dk_unchecked(&k, &r));
            }
        }
    }

    #[test]
    fn peak_and_row_sum() {
        for k in 1..40i64 {
            assert_eq!(dk(&k, &(k - 1)).unwrap(), k);
            let total: i64 = (-2..2 * k + 2).map(|r| dk(&k, &r).unwrap()).sum();
            assert_eq!(total, k * k);
        }
    }
}
