//! Packed lower-triangular storage.
//!
//! Entry `(m, i)` with `i <= m` lives at `m * (m + 1) / 2 + i`. Rows are users,
//! columns are time slots, both zero-based.

use std::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
pub struct TriMatrix {
    n: usize,
    data: Vec<f64>,
}

#[inline]
pub(crate) fn packed_index(m: usize, i: usize) -> usize {
    debug_assert!(i <= m);
    m * (m + 1) / 2 + i
}

impl TriMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    /// Builds from row-major packed entries (`n(n+1)/2` values).
    pub fn from_packed(n: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == n * (n + 1) / 2).then_some(Self { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for m in 0..n {
            for i in 0..=m {
                data.push(f(m, i));
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, m: usize, i: usize) -> Option<f64> {
        (m < self.n && i <= m).then(|| self.data[packed_index(m, i)])
    }

    pub fn packed(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, m: usize) -> &[f64] {
        let start = packed_index(m, 0);
        &self.data[start..start + m + 1]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|m| self[(m, m)]).collect()
    }

    /// Iterates `(m, i, value)` in packed order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |m| (0..=m).map(move |i| (m, i, self[(m, i)])))
    }
}

impl Index<(usize, usize)> for TriMatrix {
    type Output = f64;

    fn index(&self, (m, i): (usize, usize)) -> &f64 {
        assert!(m < self.n && i <= m, "({m}, {i}) outside lower triangle");
        &self.data[packed_index(m, i)]
    }
}

impl IndexMut<(usize, usize)> for TriMatrix {
    fn index_mut(&mut self, (m, i): (usize, usize)) -> &mut f64 {
        assert!(m < self.n && i <= m, "({m}, {i}) outside lower triangle");
        &mut self.data[packed_index(m, i)]
    }
}
