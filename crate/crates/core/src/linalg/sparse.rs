use super::{CMat, C64};

/// Complex Hermitian matrix in compressed-row storage.
///
/// Both triangles are stored explicitly, so `apply` is a plain CSR product.
/// Construction only accepts one entry per unordered pair; the conjugate
/// partner is generated, which makes `H == H†` hold exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHermitianOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<C64>,
}

impl SparseHermitianOperator {
    /// Builds the operator from the diagonal and a list of off-diagonal
    /// entries `(row, col, value)`; the entry `(col, row, conj(value))` is
    /// implied. Duplicated pairs are summed.
    pub fn from_parts(diagonal: &[f64], off_diagonal: &[(usize, usize, C64)]) -> Self {
        let dim = diagonal.len();
        let mut triplets: Vec<(usize, usize, C64)> = Vec::with_capacity(dim + 2 * off_diagonal.len());
        for (i, &d) in diagonal.iter().enumerate() {
            triplets.push((i, i, C64::new(d, 0.0)));
        }
        for &(i, j, v) in off_diagonal {
            assert!(i < dim && j < dim, "entry ({i}, {j}) outside dimension {dim}");
            assert_ne!(i, j, "diagonal entries go through `diagonal`");
            triplets.push((i, j, v));
            triplets.push((j, i, v.conj()));
        }
        triplets.sort_by_key(|&(i, j, _)| (i, j));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            cols.push(j);
            values.push(v);
            row_ptr[i + 1] += 1;
            last = Some((i, j));
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { dim, row_ptr, cols, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of row `i` as `(col, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    /// Every stored entry, both triangles.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.row(i).find(|&(c, _)| c == j).map(|(_, v)| v).unwrap_or_default()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    /// `y = H x`
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    /// Returns a copy with `shift[i]` added to each diagonal element.
    pub fn with_diagonal_shift(&self, shift: &[f64]) -> Self {
        assert_eq!(shift.len(), self.dim);
        let mut out = self.clone();
        for (i, &s) in shift.iter().enumerate() {
            for k in out.row_ptr[i]..out.row_ptr[i + 1] {
                if out.cols[k] == i {
                    out.values[k] += s;
                }
            }
        }
        out
    }

    /// Largest |H_ij - conj(H_ji)| over stored entries.
    pub fn hermiticity_defect(&self) -> f64 {
        self.entries()
            .map(|(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Gershgorin bounds `(lower, upper)` on the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim {
            let mut radius = 0.0;
            let mut center = 0.0;
            for (j, v) in self.row(i) {
                if j == i {
                    center = v.re;
                } else {
                    radius += v.norm();
                }
            }
            lo = lo.min(center - radius);
            hi = hi.max(center + radius);
        }
        (lo, hi)
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SparseHermitianOperator {
        SparseHermitianOperator::from_parts(
            &[1.0, 2.0, 3.0],
            &[(0, 1, C64::new(0.5, 0.25)), (2, 1, C64::new(0.0, -1.0)), (0, 1, C64::new(0.5, 0.0))],
        )
    }

    #[test]
    fn duplicates_are_summed_and_closure_is_exact() {
        let h = sample();
        assert_eq!(h.get(0, 1), C64::new(1.0, 0.25));
        assert_eq!(h.get(1, 0), C64::new(1.0, -0.25));
        assert_eq!(h.get(1, 2), C64::new(0.0, 1.0));
        assert_eq!(h.hermiticity_defect(), 0.0);
        assert_eq!(h.nnz(), 7);
    }

    #[test]
    fn apply_matches_dense_product() {
        let h = sample();
        let x = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 2.0)];
        let mut y = [C64::default(); 3];
        h.apply(&x, &mut y);
        let d = h.to_dense();
        for i in 0..3 {
            let expect: C64 = (0..3).map(|j| d[(i, j)] * x[j]).sum();
            assert!((y[i] - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn gershgorin_contains_spectrum() {
        let h = sample();
        let (lo, hi) = h.spectral_bounds();
        let (w, _) = super::super::hermitian_eigen(&h.to_dense()).unwrap();
        assert!(w[0] >= lo && w[2] <= hi);
    }
}
