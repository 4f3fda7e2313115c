#![allow(dead_code)]

use bergpoly::{IntegerMatrix, ValidDefiningMatrix, Window};
use num_traits::ToPrimitive;
use rand::Rng;

fn det3(m: &[i64]) -> i64 {
    m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
        + m[2] * (m[3] * m[7] - m[4] * m[6])
}

/// The matrix as a valid defining matrix, provided it is already in
/// normal form (primitive rows, positive determinant).
pub fn as_normalized_valid(rows: &[Vec<i64>]) -> Option<ValidDefiningMatrix> {
    let m = IntegerMatrix::from_i64(rows).ok()?;
    let v = ValidDefiningMatrix::new(&m).ok()?;
    (v.matrix() == &m).then_some(v)
}

/// Every valid normal-form 2x2 matrix with entries in `[-bound, bound]` and
/// `det <= max_det`.
pub fn enumerate_2x2(bound: i64, max_det: i64) -> Vec<ValidDefiningMatrix> {
    let mut out = Vec::new();
    let r = -bound..=bound;
    for a in r.clone() {
        for b in r.clone() {
            for c in r.clone() {
                for d in r.clone() {
                    let det = a * d - b * c;
                    // adj = [[d, -b], [-c, a]]
                    if det < 1 || det > max_det || d < 0 || b > 0 || c > 0 || a < 0 {
                        continue;
                    }
                    if let Some(v) = as_normalized_valid(&[vec![a, b], vec![c, d]]) {
                        out.push(v);
                    }
                }
            }
        }
    }
    out
}

/// Rejection sample of a valid normal-form `n x n` matrix.
pub fn sample_valid<R: Rng>(rng: &mut R, n: usize, bound: i64, max_det: i64) -> ValidDefiningMatrix {
    loop {
        let flat: Vec<i64> = (0..n * n).map(|_| rng.gen_range(-bound..=bound)).collect();
        if n == 3 {
            let d = det3(&flat);
            if d < 1 || d > max_det {
                continue;
            }
        }
        let rows: Vec<Vec<i64>> = flat.chunks(n).map(<[i64]>::to_vec).collect();
        if let Some(v) = as_normalized_valid(&rows) {
            if v.det().to_i64().is_some_and(|d| d <= max_det) {
                return v;
            }
        }
    }
}

/// Distinct samples, deduplicated by matrix.
pub fn sample_family<R: Rng>(
    rng: &mut R,
    n: usize,
    bound: i64,
    max_det: i64,
    count: usize,
) -> Vec<ValidDefiningMatrix> {
    let mut out: Vec<ValidDefiningMatrix> = Vec::with_capacity(count);
    let mut guard = 0;
    while out.len() < count && guard < 100 * count {
        guard += 1;
        let v = sample_valid(rng, n, bound, max_det);
        if out.iter().all(|w| w.matrix() != v.matrix()) {
            out.push(v);
        }
    }
    out
}

/// Spread of the exponents of `prod_j p_j^2` in coordinate `j`, which is
/// twice the `j`-th absolute column sum.
pub fn denominator_spread(b: &ValidDefiningMatrix) -> Vec<i64> {
    b.matrix()
        .abs_column_sums()
        .iter()
        .map(|s| 2 * s.to_i64().unwrap())
        .collect()
}

/// `[-3 s_j, 3 s_j]` in every coordinate.
pub fn oracle_window(b: &ValidDefiningMatrix) -> Window {
    let s = denominator_spread(b);
    Window::new(s.iter().map(|x| -3 * x).collect(), s.iter().map(|x| 3 * x).collect())
}

/// Unimodular matrices `P (I - N) P^T` with `N >= 0` strictly upper
/// triangular and `P` a permutation, possibly transposed. Always valid:
/// the inverse of `I - N` is the nonnegative series `I + N + N^2 + ...`.
pub fn unimodular<R: Rng>(rng: &mut R, n: usize, bound: i64) -> IntegerMatrix {
    let mut m = vec![vec![0i64; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
        for x in row.iter_mut().skip(i + 1) {
            *x = -rng.gen_range(0..=bound);
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let transpose = rng.gen_bool(0.5);
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let (a, b) = (perm[i], perm[j]);
                    if transpose {
                        m[b][a]
                    } else {
                        m[a][b]
                    }
                })
                .collect()
        })
        .collect();
    IntegerMatrix::from_i64(&rows).unwrap()
}
