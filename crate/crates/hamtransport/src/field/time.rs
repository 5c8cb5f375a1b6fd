use super::{FieldError, GridSpec, ScalarField, VectorField};

/// Linear structure shared by scalar and vector slices.
pub trait Slice: Clone {
    fn zeros_like(&self) -> Self;
    fn axpy_slice(&mut self, a: f64, other: &Self);
    fn slice_grid(&self) -> &GridSpec;
}

impl Slice for ScalarField {
    fn zeros_like(&self) -> Self {
        ScalarField::zeros(*self.grid())
    }
    fn axpy_slice(&mut self, a: f64, other: &Self) {
        self.axpy(a, other)
    }
    fn slice_grid(&self) -> &GridSpec {
        self.grid()
    }
}

impl Slice for VectorField {
    fn zeros_like(&self) -> Self {
        VectorField::zeros(*self.grid())
    }
    fn axpy_slice(&mut self, a: f64, other: &Self) {
        self.axpy(a, other)
    }
    fn slice_grid(&self) -> &GridSpec {
        self.grid()
    }
}

/// Fields sampled at `t_j = j t_end / (n_t - 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeField<F> {
    grid: GridSpec,
    slices: Vec<F>,
}

impl<F: Slice> TimeField<F> {
    pub fn new(grid: GridSpec, slices: Vec<F>) -> Result<Self, FieldError> {
        if slices.len() != grid.n_t || slices.iter().any(|s| !s.slice_grid().same_space(&grid)) {
            return Err(FieldError::GridMismatch);
        }
        Ok(Self { grid, slices })
    }

    /// Builds slice `j` from `f(j, t_j)`.
    pub fn from_fn(grid: GridSpec, f: impl FnMut(usize, f64) -> F) -> Result<Self, FieldError> {
        let mut f = f;
        let slices = (0..grid.n_t).map(|j| f(j, grid.time(j))).collect();
        Self::new(grid, slices)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn slices(&self) -> &[F] {
        &self.slices
    }

    pub fn slice(&self, j: usize) -> &F {
        &self.slices[j]
    }

    pub fn slice_mut(&mut self, j: usize) -> &mut F {
        &mut self.slices[j]
    }

    pub fn into_slices(self) -> Vec<F> {
        self.slices
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }
}

impl TimeField<ScalarField> {
    pub fn max_abs(&self) -> f64 {
        self.slices.iter().fold(0.0, |m, s| m.max(s.max_abs()))
    }
}

impl TimeField<VectorField> {
    pub fn max_abs(&self) -> f64 {
        self.slices.iter().fold(0.0, |m, s| m.max(s.max_abs()))
    }
}

const CENTER: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];

/// Fourth-order finite differences in time: centered in the interior,
/// one-sided at the two slices next to each end.
pub fn time_derivative<F: Slice>(f: &TimeField<F>) -> Result<TimeField<F>, FieldError> {
    let nt = f.len();
    if nt < 5 {
        return Err(FieldError::TooFewSlices(nt));
    }
    let scale = 1.0 / (12.0 * f.grid.dt());
    let combine = |start: usize, w: &[f64; 5], sign: f64, reversed: bool| {
        let mut out = f.slices[0].zeros_like();
        for (m, &c) in w.iter().enumerate() {
            if c != 0.0 {
                let j = if reversed { start - m } else { start + m };
                out.axpy_slice(sign * c * scale, &f.slices[j]);
            }
        }
        out
    };
    let slices = (0..nt)
        .map(|i| match i {
            0 => combine(0, &EDGE0, 1.0, false),
            1 => combine(0, &EDGE1, 1.0, false),
            _ if i == nt - 1 => combine(nt - 1, &EDGE0, -1.0, true),
            _ if i == nt - 2 => combine(nt - 1, &EDGE1, -1.0, true),
            _ => combine(i - 2, &CENTER, 1.0, false),
        })
        .collect();
    TimeField::new(f.grid, slices)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nt: usize) -> GridSpec {
        GridSpec::new(2, 8, nt).unwrap()
    }

    #[test]
    fn linear_in_time_is_exact() {
        let g = grid(9);
        let base = ScalarField::from_fn(g, |x| (x[0] * 6.0).sin() + x[1]);
        let f = TimeField::from_fn(g, |_, t| base.map(|v| t * v)).unwrap();
        let df = time_derivative(&f).unwrap();
        for s in df.slices() {
            for (a, b) in s.values().iter().zip(base.values()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quartic_is_exact() {
        let g = grid(11);
        let f = TimeField::from_fn(g, |_, t| ScalarField::constant(g, t.powi(4))).unwrap();
        let df = time_derivative(&f).unwrap();
        for (j, s) in df.slices().iter().enumerate() {
            let t = g.time(j);
            assert!((s.values()[0] - 4.0 * t.powi(3)).abs() < 1e-10, "slice {j}");
        }
    }

    #[test]
    fn constant_has_zero_derivative_and_short_series_fail() {
        let g = grid(6);
        let f = TimeField::from_fn(g, |_, _| ScalarField::constant(g, 2.5)).unwrap();
        assert!(time_derivative(&f).unwrap().max_abs() < 1e-12);
        let g = grid(4);
        let f = TimeField::from_fn(g, |_, _| ScalarField::constant(g, 1.0)).unwrap();
        assert!(matches!(time_derivative(&f), Err(FieldError::TooFewSlices(4))));
    }

    #[test]
    fn vector_slices() {
        let g = grid(7);
        let f = TimeField::from_fn(g, |_, t| VectorField::constant(g, &[t * t, -t])).unwrap();
        let df = time_derivative(&f).unwrap();
        let t = g.time(3);
        assert!((df.slice(3).comp(0).values()[5] - 2.0 * t).abs() < 1e-12);
        assert!((df.slice(3).comp(1).values()[5] + 1.0).abs() < 1e-12);
    }
}
