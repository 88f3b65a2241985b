/// Row-major dense matrix of `f64`. Small and deliberately boring; the
/// shapes involved here are a few hundred elements at most.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `out += self * x` where `x` has `cols` entries and `out` has `rows`.
    pub fn matvec_add(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            let mut acc = 0.0;
            for (w, xv) in row.iter().zip(x) {
                acc += w * xv;
            }
            out[r] += acc;
        }
    }

    /// `out += self^T * y` where `y` has `rows` entries and `out` has `cols`.
    pub fn matvec_t_add(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for r in 0..self.rows {
            let row = self.row(r);
            let yv = y[r];
            if yv == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(row) {
                *o += yv * w;
            }
        }
    }

    /// Rank-1 accumulation `self += u ⊗ v` (u indexes rows, v indexes cols).
    pub fn add_outer(&mut self, u: &[f64], v: &[f64]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for r in 0..self.rows {
            let uv = u[r];
            if uv == 0.0 {
                continue;
            }
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (w, vv) in row.iter_mut().zip(v) {
                *w += uv * vv;
            }
        }
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }
}

/// `sum_i a_i * b_i`.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `out += s * v`.
pub fn axpy(s: f64, v: &[f64], out: &mut [f64]) {
    debug_assert_eq!(v.len(), out.len());
    for (o, x) in out.iter_mut().zip(v) {
        *o += s * x;
    }
}
