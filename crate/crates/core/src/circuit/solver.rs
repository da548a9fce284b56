//! Envelope (skyline) Cholesky factorization for the symmetric
//! positive-definite nodal matrices of the crossbar.
//!
//! Row `i` stores the lower triangle from its first nonzero column up to the
//! diagonal. Cholesky fill never leaves that envelope, so with junction
//! nodes ordered row by row and the column electrodes last the factor stays
//! narrow except for the last `cols` rows.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotPositiveDefinite {
    pub pivot: usize,
}

impl fmt::Display for NotPositiveDefinite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "matrix is not positive definite at pivot {}", self.pivot)
    }
}

impl std::error::Error for NotPositiveDefinite {}

#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Builds the envelope of an `n x n` symmetric matrix from its
    /// lower-triangle entries `(i, j, value)` with `j <= i` and factors it.
    /// Repeated entries are summed.
    pub fn factor(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self, NotPositiveDefinite> {
        let mut first: Vec<usize> = (0..n).collect();
        for &(i, j, _) in entries {
            debug_assert!(j <= i && i < n);
            first[i] = first[i].min(j);
        }
        let mut offset = Vec::with_capacity(n + 1);
        let mut total = 0;
        for i in 0..n {
            offset.push(total);
            total += i - first[i] + 1;
        }
        offset.push(total);
        let mut data = vec![0.0; total];
        for &(i, j, v) in entries {
            data[offset[i] + j - first[i]] += v;
        }

        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = data[offset[i] + j - fi];
                let ri = offset[i] + k0 - fi;
                let rj = offset[j] + k0 - fj;
                for k in 0..(j - k0) {
                    s -= data[ri + k] * data[rj + k];
                }
                data[offset[i] + j - fi] = s / data[offset[j] + j - fj];
            }
            let row = &data[offset[i]..offset[i] + (i - fi)];
            let d = data[offset[i] + i - fi] - row.iter().map(|x| x * x).sum::<f64>();
            if !(d > 0.0) {
                return Err(NotPositiveDefinite { pivot: i });
            }
            data[offset[i] + i - fi] = d.sqrt();
        }
        Ok(Self {
            first,
            offset,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        for i in 0..n {
            let fi = self.first[i];
            let base = self.offset[i];
            let mut s = b[i];
            for (k, l) in self.data[base..base + (i - fi)].iter().enumerate() {
                s -= l * b[fi + k];
            }
            b[i] = s / self.data[base + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let base = self.offset[i];
            let x = b[i] / self.data[base + i - fi];
            b[i] = x;
            for (k, l) in self.data[base..base + (i - fi)].iter().enumerate() {
                b[fi + k] -= l * x;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
