//! The closed norm formula `||z^m||^2 = det A * pi^2 / prod_j ((m + 1) A)_j`
//! checked against direct integration over the Reinhardt shadow
//! `{ (r_1, r_2) in (0, 1)^2 : r^{b^j} < 1 }`, where
//! `||z^m||^2 = 4 pi^2 * iint r_1^{2 m_1 + 1} r_2^{2 m_2 + 1} dr_1 dr_2`.

use bergpoly::oracle::{monomial_norm, MonomialNorm};
use bergpoly::{ExponentVector, IntegerMatrix, ValidDefiningMatrix};
use num_traits::ToPrimitive;

/// Double-exponential (tanh-sinh) rule on `(a, b)`, tolerant of integrable
/// endpoint singularities.
fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = 1.0 / 32.0;
    let half = std::f64::consts::FRAC_PI_2;
    let rad = (b - a) / 2.0;
    let mut sum = 0.0;
    for i in -160..=160 {
        let s = i as f64 * h;
        let u = half * s.sinh();
        let x = u.tanh();
        // distance to the nearer endpoint, computed without cancellation
        let gap = 1.0 / (u.abs().exp() * u.cosh());
        if gap * rad == 0.0 {
            continue;
        }
        let point = if x < 0.0 { a + rad * gap } else { b - rad * gap };
        let w = half * s.cosh() / (u.cosh() * u.cosh());
        let v = f(point);
        if v.is_finite() {
            sum += w * v;
        }
    }
    sum * h * rad
}

/// `r_2` range allowed by every row constraint at fixed `r_1`.
fn r2_interval(rows: &[[i64; 2]; 2], r1: f64) -> (f64, f64) {
    let x1 = r1.ln();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, 0.0f64);
    for row in rows {
        let (b1, b2) = (row[0] as f64, row[1] as f64);
        if row[1] > 0 {
            hi = hi.min(-b1 * x1 / b2);
        } else if row[1] < 0 {
            lo = lo.max(-b1 * x1 / b2);
        } else if b1 * x1 >= 0.0 {
            return (0.0, 0.0);
        }
    }
    if lo >= hi {
        (0.0, 0.0)
    } else {
        (lo.exp(), hi.exp())
    }
}

fn integrated_norm(rows: [[i64; 2]; 2], m: [i64; 2]) -> f64 {
    let inner = |r1: f64| {
        let (lo, hi) = r2_interval(&rows, r1);
        let e2 = (2 * m[1] + 1) as f64;
        r1.powf((2 * m[0] + 1) as f64) * tanh_sinh(|r2| r2.powf(e2), lo, hi)
    };
    4.0 * std::f64::consts::PI.powi(2) * tanh_sinh(inner, 0.0, 1.0)
}

fn formula(rows: [[i64; 2]; 2], m: [i64; 2]) -> Option<f64> {
    let b = ValidDefiningMatrix::new(&IntegerMatrix::from_i64(&rows).unwrap()).unwrap();
    match monomial_norm(&b, &ExponentVector::new(m.to_vec())) {
        MonomialNorm::SquareIntegrable(c) => {
            Some(c.to_f64().unwrap() * std::f64::consts::PI.powi(2))
        }
        MonomialNorm::NotSquareIntegrable => None,
    }
}

#[test]
fn closed_norms_match_quadrature() {
    let cases: &[([[i64; 2]; 2], [i64; 2])] = &[
        ([[1, 0], [0, 1]], [0, 0]),
        ([[1, 0], [0, 1]], [2, 1]),
        ([[1, -1], [0, 1]], [0, 0]),
        ([[1, -1], [0, 1]], [0, -1]),
        ([[1, -1], [0, 1]], [3, -2]),
        ([[2, -1], [0, 1]], [0, 0]),
        ([[2, -1], [0, 1]], [1, 2]),
        ([[2, -1], [0, 1]], [1, -1]),
        ([[3, -2], [-1, 1]], [0, 0]),
        ([[3, -2], [-1, 1]], [2, 1]),
        ([[2, -1], [-1, 2]], [0, 0]),
        ([[2, -1], [-1, 2]], [1, 0]),
        ([[3, -1], [-2, 3]], [1, 1]),
        ([[1, -3], [0, 2]], [2, -1]),
    ];
    for &(rows, m) in cases {
        let exact = formula(rows, m).expect("admissible");
        let numeric = integrated_norm(rows, m);
        let rel = (exact - numeric).abs() / exact;
        assert!(rel < 1e-7, "{rows:?} m={m:?}: formula {exact}, quadrature {numeric}");
    }
}

#[test]
fn hand_computed_hartogs_norms() {
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((integrated_norm([[1, -1], [0, 1]], [0, 0]) - pi2 / 2.0).abs() < 1e-9);
    assert!((integrated_norm([[1, -1], [0, 1]], [0, -1]) - pi2).abs() < 1e-9);
    assert!((integrated_norm([[1, -1], [0, 1]], [1, 0]) - pi2 / 6.0).abs() < 1e-9);
}

/// A non-admissible exponent has a divergent integral: cutting the shadow
/// at `r_1 > eps` gives values that keep growing as `eps` shrinks.
#[test]
fn non_admissible_exponents_diverge() {
    let rows = [[1, -1], [0, 1]];
    assert!(formula(rows, [-1, 0]).is_none());
    let cut = |eps: f64| {
        let inner = |r1: f64| {
            let (lo, hi) = r2_interval(&rows, r1);
            r1.powi(-1) * tanh_sinh(|r2| r2, lo, hi)
        };
        tanh_sinh(inner, eps, 1.0)
    };
    let (a, b, c) = (cut(1e-2), cut(1e-4), cut(1e-6));
    assert!(b - a > 2.0 && c - b > 2.0, "{a} {b} {c}");
}
