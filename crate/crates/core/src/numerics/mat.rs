use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Largest supported dimension in either direction.
pub const MAX_DIM: usize = 4;

/// Small dense real matrix, row-major, at most 4×4.
///
/// Arithmetic operators panic on non-conforming dimensions, the same way
/// slice indexing panics out of bounds. Every matrix in this crate has a
/// dimension fixed by construction, so a mismatch is a programming error.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: [f64; MAX_DIM * MAX_DIM],
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&rows) && (1..=MAX_DIM).contains(&cols),
            "matrix dimensions {rows}x{cols} outside 1..={MAX_DIM}"
        );
        Self {
            rows,
            cols,
            data: [0.0; MAX_DIM * MAX_DIM],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn col_vector(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), 1);
        for (i, &v) in values.iter().enumerate() {
            m[(i, 0)] = v;
        }
        m
    }

    pub fn row_vector(values: &[f64]) -> Self {
        let mut m = Self::zeros(1, values.len());
        for (j, &v) in values.iter().enumerate() {
            m[(0, j)] = v;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(|v| v * k)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = *self;
        for v in out.entries_mut() {
            *v = f(*v);
        }
        out
    }

    pub fn trace(&self) -> f64 {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|v| v.is_finite())
    }

    /// Max-norm of `self - selfᵀ`.
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square(), "symmetry of non-square matrix");
        (*self - self.transpose()).max_abs()
    }

    pub fn row(&self, i: usize) -> Self {
        let mut r = Self::zeros(1, self.cols);
        for j in 0..self.cols {
            r[(0, j)] = self[(i, j)];
        }
        r
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> &[f64] {
        &self.data[..self.rows * self.cols]
    }

    fn entries_mut(&mut self) -> &mut [f64] {
        let n = self.rows * self.cols;
        &mut self.data[..n]
    }

    /// Scalar value of a 1×1 matrix.
    pub fn scalar(&self) -> f64 {
        assert!(self.rows == 1 && self.cols == 1, "not a 1x1 matrix");
        self.data[0]
    }

    /// Symmetric positive-definiteness via Cholesky.
    pub fn is_spd(&self, sym_tol: f64) -> bool {
        if !self.is_square() || self.asymmetry() > sym_tol * (1.0 + self.max_abs()) {
            return false;
        }
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) {
                return false;
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        true
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    /// `None` when a pivot falls below `1e-14` relative to the matrix scale.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square(), "inverse of non-square matrix");
        let n = self.rows;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut a = *self;
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
                .expect("non-empty range");
            if a[(pivot, col)].abs() <= 1e-14 * scale {
                return None;
            }
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= p;
                inv[(col, j)] /= p;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a[(i, col)];
                if f != 0.0 {
                    for j in 0..n {
                        a[(i, j)] -= f * a[(col, j)];
                        inv[(i, j)] -= f * inv[(col, j)];
                    }
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            let tmp = self[(a, j)];
            self[(a, j)] = self[(b, j)];
            self[(b, j)] = tmp;
        }
    }

    /// Vertical/horizontal block assembly `[[a, b], [c, d]]`.
    pub fn block(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Self {
        assert_eq!(a.rows, b.rows, "block row mismatch");
        assert_eq!(c.rows, d.rows, "block row mismatch");
        assert_eq!(a.cols, c.cols, "block column mismatch");
        assert_eq!(b.cols, d.cols, "block column mismatch");
        let mut m = Self::zeros(a.rows + c.rows, a.cols + b.cols);
        for (src, r0, c0) in [(a, 0, 0), (b, 0, a.cols), (c, a.rows, 0), (d, a.rows, a.cols)] {
            for i in 0..src.rows {
                for j in 0..src.cols {
                    m[(r0 + i, c0 + j)] = src[(i, j)];
                }
            }
        }
        m
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl Add for Mat {
    type Output = Mat;

    fn add(self, rhs: Mat) -> Mat {
        assert!(
            self.rows == rhs.rows && self.cols == rhs.cols,
            "add: {}x{} vs {}x{}",
            self.rows,
            self.cols,
            rhs.rows,
            rhs.cols
        );
        let mut out = self;
        for (o, r) in out.entries_mut().iter_mut().zip(rhs.entries()) {
            *o += r;
        }
        out
    }
}

impl Sub for Mat {
    type Output = Mat;

    fn sub(self, rhs: Mat) -> Mat {
        self + (-rhs)
    }
}

impl Neg for Mat {
    type Output = Mat;

    fn neg(self) -> Mat {
        self.map(|v| -v)
    }
}

impl Mul for Mat {
    type Output = Mat;

    fn mul(self, rhs: Mat) -> Mat {
        assert_eq!(
            self.cols, rhs.rows,
            "mul: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = 0.0;
                for k in 0..self.cols {
                    acc += self[(i, k)] * rhs[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

impl Mul<f64> for Mat {
    type Output = Mat;

    fn mul(self, k: f64) -> Mat {
        self.scale(k)
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat{}x{}", self.rows, self.cols)?;
        let rows: Vec<&[f64]> = (0..self.rows)
            .map(|i| &self.data[i * self.cols..(i + 1) * self.cols])
            .collect();
        f.debug_list().entries(rows).finish()
    }
}
