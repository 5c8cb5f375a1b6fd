use super::FieldError;

/// Uniform grid on the torus `[0,1)^d` together with the time sampling of `[0, t_end]`.
///
/// Spatial samples sit at `x_k = k/n` with `x_1` varying fastest in memory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub d: usize,
    pub n: usize,
    pub n_t: usize,
    pub t_end: f64,
}

impl GridSpec {
    pub fn new(d: usize, n: usize, n_t: usize) -> Result<Self, FieldError> {
        Self::with_t_end(d, n, n_t, 1.0)
    }

    pub fn with_t_end(d: usize, n: usize, n_t: usize, t_end: f64) -> Result<Self, FieldError> {
        if d < 2 || d % 2 != 0 {
            return Err(FieldError::OddDimension(d));
        }
        if d > 6 {
            return Err(FieldError::BadGrid(format!("d = {d} exceeds the supported maximum 6")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(FieldError::BadGrid(format!("n = {n} must be a power of two >= 8")));
        }
        if n_t < 2 {
            return Err(FieldError::BadGrid(format!("n_t = {n_t} must be >= 2")));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(FieldError::BadGrid(format!("t_end = {t_end} must be positive")));
        }
        Ok(Self { d, n, n_t, t_end })
    }

    /// Half the dimension, `d'`.
    pub fn half(&self) -> usize {
        self.d / 2
    }

    /// Number of spatial samples `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_end / (self.n_t - 1) as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_t).map(|j| self.time(j)).collect()
    }

    /// Memory stride of axis `a`.
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow(axis as u32)
    }

    /// Integer coordinates of a flat index.
    pub fn multi_index(&self, mut idx: usize, out: &mut [usize]) {
        for o in out.iter_mut().take(self.d) {
            *o = idx % self.n;
            idx /= self.n;
        }
    }

    /// Physical coordinates of a flat index.
    pub fn point(&self, mut idx: usize, out: &mut [f64]) {
        let h = self.spacing();
        for o in out.iter_mut().take(self.d) {
            *o = (idx % self.n) as f64 * h;
            idx /= self.n;
        }
    }

    /// Same spatial grid, different time sampling.
    pub fn with_times(&self, n_t: usize) -> Result<Self, FieldError> {
        Self::with_t_end(self.d, self.n, n_t, self.t_end)
    }

    /// Same grid with a different spatial resolution.
    pub fn with_n(&self, n: usize) -> Result<Self, FieldError> {
        Self::with_t_end(self.d, n, self.n_t, self.t_end)
    }

    pub fn same_space(&self, other: &GridSpec) -> bool {
        self.d == other.d && self.n == other.n
    }

    /// Signed wavenumber of FFT index `j`; the Nyquist index maps to `+n/2`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }
}

/// Signed distance on the unit circle, in `[-1/2, 1/2)`.
pub fn torus_delta(a: f64) -> f64 {
    a - (a + 0.5).floor()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(GridSpec::new(3, 16, 4), Err(FieldError::OddDimension(3))));
        assert!(GridSpec::new(2, 12, 4).is_err());
        assert!(GridSpec::new(2, 4, 4).is_err());
        assert!(GridSpec::new(2, 16, 1).is_err());
        assert!(GridSpec::new(8, 16, 4).is_err());
    }

    #[test]
    fn indexing_is_x1_fastest() {
        let g = GridSpec::new(4, 8, 2).unwrap();
        let mut m = [0usize; 4];
        g.multi_index(1 + 8 * 3 + 64 * 5 + 512 * 7, &mut m);
        assert_eq!(m, [1, 3, 5, 7]);
        let mut x = [0.0; 4];
        g.point(1, &mut x);
        assert_eq!(x, [0.125, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn time_axis() {
        let g = GridSpec::new(2, 8, 5).unwrap();
        assert_eq!(g.dt(), 0.25);
        assert_eq!(g.time(4), 1.0);
        assert_eq!(g.wavenumber(4), 4);
        assert_eq!(g.wavenumber(5), -3);
    }

    #[test]
    fn torus_delta_wraps() {
        assert!((torus_delta(0.9) + 0.1).abs() < 1e-15);
        assert!((torus_delta(-0.7) - 0.3).abs() < 1e-15);
        assert_eq!(torus_delta(0.0), 0.0);
    }
}
