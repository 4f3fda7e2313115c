//! Axis-aligned boxes of integer exponents.

use serde::{Deserialize, Serialize};

use crate::laurent::ExponentVector;

/// Closed box `[lower_j, upper_j]` in every coordinate. Empty when some
/// `lower_j > upper_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
}

impl Window {
    pub fn new(lower: Vec<i64>, upper: Vec<i64>) -> Self {
        assert_eq!(lower.len(), upper.len(), "window bounds differ in length");
        Self { lower, upper }
    }

    /// `[lo, hi]^n`.
    pub fn cube(n: usize, lo: i64, hi: i64) -> Self {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.iter().zip(&self.upper).any(|(l, u)| l > u)
    }

    pub fn extent(&self, j: usize) -> u64 {
        if self.upper[j] < self.lower[j] {
            0
        } else {
            (self.upper[j] - self.lower[j]) as u64 + 1
        }
    }

    /// Number of lattice points.
    pub fn len(&self) -> u128 {
        (0..self.dim()).map(|j| self.extent(j) as u128).product()
    }

    pub fn contains(&self, e: &[i64]) -> bool {
        e.len() == self.dim()
            && e
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| l <= x && x <= u)
    }

    /// Row-major offset with the last coordinate varying fastest, matching
    /// the order of [`Window::points`].
    pub fn offset_of(&self, e: &[i64]) -> Option<usize> {
        if !self.contains(e) {
            return None;
        }
        let mut idx = 0usize;
        for j in 0..self.dim() {
            idx = idx * self.extent(j) as usize + (e[j] - self.lower[j]) as usize;
        }
        Some(idx)
    }

    pub fn widened(&self, by: i64) -> Self {
        Self::new(
            self.lower.iter().map(|l| l - by).collect(),
            self.upper.iter().map(|u| u + by).collect(),
        )
    }

    /// Lattice points in lexicographic order.
    pub fn points(&self) -> Points<'_> {
        Points {
            window: self,
            next: if self.is_empty() || self.dim() == 0 {
                None
            } else {
                Some(self.lower.clone())
            },
        }
    }
}

pub struct Points<'a> {
    window: &'a Window,
    next: Option<Vec<i64>>,
}

impl Iterator for Points<'_> {
    type Item = ExponentVector;

    fn next(&mut self) -> Option<ExponentVector> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut j = succ.len();
        loop {
            if j == 0 {
                break;
            }
            j -= 1;
            if succ[j] < self.window.upper[j] {
                succ[j] += 1;
                self.next = Some(succ);
                break;
            }
            succ[j] = self.window.lower[j];
        }
        Some(ExponentVector::new(current))
    }
}
