//! The direction set `Λ = {±e_i}`, its affine decomposition coefficients,
//! exact rational frames with `J ξ^⊥ = ξ`, and disjoint cylinder placement.

use crate::field::torus_delta;
use num_rational::Ratio;
use thiserror::Error;

pub type Rational = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension {0} is not even")]
    OddDimension(usize),
    #[error("rho = {0} must lie in (0, 1/4)")]
    BadRho(f64),
    #[error("no disjoint placement found on the lattice with spacing 1/{0}")]
    PlacementFailed(usize),
    #[error("vector has norm {0}, expected a unit vector")]
    NotUnitVector(f64),
    #[error("vector has length {got}, expected {want}")]
    WrongLength { got: usize, want: usize },
}

/// One element `ξ = sign · e_axis` of `Λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction {
    pub axis: usize,
    pub sign: i64,
    /// Orthonormal frame `(ξ, ξ^⊥, ξ_1, …, ξ_{d−2})`, exact.
    pub frame: Vec<Vec<Rational>>,
    /// Placement offset `v_ξ`, a lattice point.
    pub offset: Vec<Rational>,
}

impl Direction {
    pub fn xi(&self) -> &[Rational] {
        &self.frame[0]
    }

    pub fn xi_f64(&self) -> Vec<f64> {
        to_f64(&self.frame[0])
    }

    pub fn offset_f64(&self) -> Vec<f64> {
        to_f64(&self.offset)
    }

    /// The transverse frame vectors `ξ^⊥, ξ_1, …` as `(axis, sign)` pairs.
    pub fn transverse(&self) -> Vec<(usize, f64)> {
        self.frame[1..]
            .iter()
            .map(|v| {
                let (a, s) = v.iter().enumerate().find(|(_, c)| **c != Rational::from_integer(0)).expect("unit vector");
                (a, if *s > Rational::from_integer(0) { 1.0 } else { -1.0 })
            })
            .collect()
    }
}

/// `Λ` together with its placement data.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    pub d: usize,
    pub directions: Vec<Direction>,
    pub n_star: i64,
    pub rho: f64,
    /// Smallest admissible concentration: cylinders of radius `2ρ/μ` then use at most
    /// half of the minimal axis separation.
    pub mu0: f64,
    /// Minimal distance between the periodized axes of two distinct directions.
    pub min_separation: f64,
}

fn to_f64(v: &[Rational]) -> Vec<f64> {
    v.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect()
}

fn unit(d: usize, axis: usize, sign: i64) -> Vec<Rational> {
    (0..d).map(|k| Rational::from_integer(if k == axis { sign } else { 0 })).collect()
}

/// `J v` in exact arithmetic.
pub fn apply_j_exact(v: &[Rational]) -> Vec<Rational> {
    let h = v.len() / 2;
    (0..v.len()).map(|i| if i < h { v[i + h] } else { -v[i - h] }).collect()
}

fn frame_for(d: usize, axis: usize, sign: i64) -> Vec<Vec<Rational>> {
    let h = d / 2;
    let (perp_axis, perp_sign) = if axis < h { (axis + h, sign) } else { (axis - h, -sign) };
    let mut frame = vec![unit(d, axis, sign), unit(d, perp_axis, perp_sign)];
    for k in 0..d {
        if k != axis && k != perp_axis {
            frame.push(unit(d, k, 1));
        }
    }
    frame
}

/// Distance between two periodized axis-aligned lines.
fn axis_distance(a_axis: usize, a: &[f64], b_axis: usize, b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .filter(|(k, _)| *k != a_axis && *k != b_axis)
        .map(|(_, (x, y))| torus_delta(x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Builds `Λ = {±e_1, …, ±e_d}` (ordered `+e_1, −e_1, +e_2, …`) with offsets chosen by a
/// greedy max-min search over the lattice `{j/(4d)}^d`, candidates visited in lexicographic order.
pub fn build_direction_set(d: usize, rho: f64) -> Result<DirectionSet, GeometryError> {
    if d % 2 != 0 || d < 2 {
        return Err(GeometryError::OddDimension(d));
    }
    if !(rho > 0.0 && rho < 0.25) {
        return Err(GeometryError::BadRho(rho));
    }
    let l = 4 * d;
    let mut placed: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut directions = Vec::new();
    for axis in 0..d {
        for sign in [1i64, -1] {
            let free: Vec<usize> = (0..d).filter(|&k| k != axis).collect();
            let mut best: Option<(f64, Vec<usize>)> = None;
            let total = l.pow(free.len() as u32);
            let mut cand = vec![0usize; d];
            let mut cf = vec![0.0; d];
            for code in 0..total {
                let mut c = code;
                for &k in free.iter().rev() {
                    cand[k] = c % l;
                    c /= l;
                }
                for k in 0..d {
                    cf[k] = cand[k] as f64 / l as f64;
                }
                let score = placed
                    .iter()
                    .map(|(ax, v)| {
                        let vf: Vec<f64> = v.iter().map(|&j| j as f64 / l as f64).collect();
                        axis_distance(axis, &cf, *ax, &vf)
                    })
                    .fold(f64::INFINITY, f64::min);
                if best.as_ref().is_none_or(|(s, _)| score > *s + 1e-12) {
                    best = Some((score, cand.clone()));
                }
            }
            let (score, v) = best.expect("non-empty lattice");
            if score <= 0.0 {
                return Err(GeometryError::PlacementFailed(l));
            }
            let offset = v.iter().map(|&j| Rational::new(j as i64, l as i64)).collect();
            placed.push((axis, v));
            directions.push(Direction { axis, sign, frame: frame_for(d, axis, sign), offset });
        }
    }
    let mut min_sep = f64::INFINITY;
    for i in 0..directions.len() {
        for j in i + 1..directions.len() {
            let (a, b) = (&directions[i], &directions[j]);
            min_sep = min_sep.min(axis_distance(a.axis, &a.offset_f64(), b.axis, &b.offset_f64()));
        }
    }
    Ok(DirectionSet { d, directions, n_star: 1, rho, mu0: 8.0 * rho / min_sep, min_separation: min_sep })
}

/// Coefficients `a_ξ(R)` in the order of `ds.directions`:
/// `a_{±e_i}(R) = (1 ± R_i)/2`.
pub fn decompose(ds: &DirectionSet, r: &[f64]) -> Result<Vec<f64>, GeometryError> {
    if r.len() != ds.d {
        return Err(GeometryError::WrongLength { got: r.len(), want: ds.d });
    }
    let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(GeometryError::NotUnitVector(norm));
    }
    Ok(coefficients(ds, r))
}

/// The affine coefficient formula without the unit-norm check.
pub fn coefficients(ds: &DirectionSet, r: &[f64]) -> Vec<f64> {
    ds.directions.iter().map(|dir| 0.5 * (1.0 + dir.sign as f64 * r[dir.axis])).collect()
}

/// `Σ_ξ a_ξ ξ`.
pub fn reconstruct(ds: &DirectionSet, coeffs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; ds.d];
    for (dir, a) in ds.directions.iter().zip(coeffs) {
        out[dir.axis] += a * dir.sign as f64;
    }
    out
}

/// Exact frame checks: Gram matrix is the identity and `J ξ^⊥ = ξ`.
pub fn frame_is_exact(dir: &Direction) -> bool {
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    for (i, u) in dir.frame.iter().enumerate() {
        for (j, v) in dir.frame.iter().enumerate() {
            let dot = u.iter().zip(v).fold(zero, |acc, (a, b)| acc + a * b);
            if dot != if i == j { one } else { zero } {
                return false;
            }
        }
    }
    apply_j_exact(&dir.frame[1]) == dir.frame[0]
}

#[derive(Clone, Debug)]
pub struct PairMargin {
    pub first: usize,
    pub second: usize,
    /// `min_x max(dist_ξ(x), dist_ξ'(x)) − 2ρ/μ` over the sampling lattice.
    pub sampled: f64,
    /// Same quantity in closed form: half the axis distance minus `2ρ/μ`.
    pub exact: f64,
}

#[derive(Clone, Debug)]
pub struct DisjointReport {
    pub mu: f64,
    pub resolution: usize,
    pub pairs: Vec<PairMargin>,
    pub pass: bool,
}

/// Checks that the cylinders `v_ξ + B_{2ρ/μ} + ℝξ + ℤ^d` are pairwise disjoint.
///
/// The fundamental domain is sampled with `max(⌈4dμ⌉, 4d)` points per axis. For a pair of
/// directions only the coordinates transverse to both axes matter once the remaining ones
/// are placed on the other axis, so the sampled search runs over that reduced set.
pub fn verify_disjoint_supports(ds: &DirectionSet, mu: f64) -> DisjointReport {
    let d = ds.d;
    let r = 2.0 * ds.rho / mu;
    let res = ((4.0 * d as f64 * mu).ceil() as usize).max(4 * d);
    let mut pairs = Vec::new();
    for i in 0..ds.directions.len() {
        for j in i + 1..ds.directions.len() {
            let (a, b) = (&ds.directions[i], &ds.directions[j]);
            let (va, vb) = (a.offset_f64(), b.offset_f64());
            let exact = 0.5 * axis_distance(a.axis, &va, b.axis, &vb) - r;
            let coords: Vec<usize> = (0..d).filter(|&k| k != a.axis && k != b.axis).collect();
            let snap = |v: f64| (v * res as f64).round() / res as f64;
            let mut x = vec![0.0; d];
            if a.axis != b.axis {
                x[a.axis] = snap(vb[a.axis]);
                x[b.axis] = snap(va[b.axis]);
            }
            let total = res.pow(coords.len() as u32);
            let mut best = f64::INFINITY;
            for code in 0..total {
                let mut c = code;
                for &k in &coords {
                    x[k] = (c % res) as f64 / res as f64;
                    c /= res;
                }
                let da = axis_distance(a.axis, &x, a.axis, &va);
                let db = axis_distance(b.axis, &x, b.axis, &vb);
                best = best.min(da.max(db));
            }
            pairs.push(PairMargin { first: i, second: j, sampled: best - r, exact });
        }
    }
    let pass = pairs.iter().all(|p| p.sampled > 0.0 && p.exact > 0.0);
    DisjointReport { mu, resolution: res, pairs, pass }
}

impl DirectionSet {
    /// Restricts to a subset of directions (diagnostic use).
    pub fn subset(&self, keep: &[usize]) -> DirectionSet {
        let mut out = self.clone();
        out.directions = keep.iter().map(|&i| self.directions[i].clone()).collect();
        out
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ds4() -> DirectionSet {
        build_direction_set(4, 0.125).unwrap()
    }

    #[test]
    fn four_dimensional_set() {
        let ds = ds4();
        assert_eq!(ds.len(), 8);
        assert_eq!(ds.n_star, 1);
        assert!(ds.directions.iter().all(frame_is_exact));
        let e1 = &ds.directions[0];
        assert_eq!(apply_j_exact(&e1.frame[1]), unit(4, 0, 1));
        assert_eq!(e1.frame[1], unit(4, 2, 1));
        let e3 = &ds.directions[4];
        assert_eq!(e3.frame[1], unit(4, 0, -1));
        assert!(ds.min_separation >= 1.0 / 16.0);
        assert!(ds.min_separation > 4.0 * ds.rho / ds.mu0);
        assert!(ds.mu0 <= 4.0);
    }

    #[test]
    fn odd_and_bad_rho_rejected() {
        assert!(matches!(build_direction_set(3, 0.1), Err(GeometryError::OddDimension(3))));
        assert!(matches!(build_direction_set(4, 0.3), Err(GeometryError::BadRho(_))));
    }

    #[test]
    fn two_dimensional_lines_always_cross() {
        assert!(matches!(build_direction_set(2, 0.1), Err(GeometryError::PlacementFailed(8))));
    }

    #[test]
    fn decomposition_examples() {
        let ds = ds4();
        let a = decompose(&ds, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(a, vec![1.0, 0.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5]);
        assert_eq!(reconstruct(&ds, &a), vec![1.0, 0.0, 0.0, 0.0]);
        let a = decompose(&ds, &[0.5; 4]).unwrap();
        assert_eq!(a, vec![0.75, 0.25, 0.75, 0.25, 0.75, 0.25, 0.75, 0.25]);
        assert_eq!(reconstruct(&ds, &a), vec![0.5; 4]);
        assert!(matches!(decompose(&ds, &[1.0, 1.0, 0.0, 0.0]), Err(GeometryError::NotUnitVector(_))));
    }

    #[test]
    fn disjointness_thresholds() {
        let ds = ds4();
        let ok = verify_disjoint_supports(&ds, ds.mu0 * 1.01);
        assert!(ok.pass);
        assert!(verify_disjoint_supports(&ds, 4.0).pass);
        let fat = verify_disjoint_supports(&ds, ds.mu0 / 100.0);
        assert!(!fat.pass);
        let single = verify_disjoint_supports(&ds.subset(&[0]), 1.0);
        assert!(single.pass && single.pairs.is_empty());
    }

    proptest! {
        #[test]
        fn coefficients_reconstruct_and_stay_nonnegative(v in proptest::collection::vec(-1.0f64..1.0, 4)) {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assume!(n > 1e-3);
            let r: Vec<f64> = v.iter().map(|x| x / n).collect();
            let ds = ds4();
            let a = decompose(&ds, &r).unwrap();
            prop_assert!(a.iter().all(|&c| c >= 0.0));
            let back = reconstruct(&ds, &a);
            let err = back.iter().zip(&r).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-12);
            prop_assert!((a.iter().sum::<f64>() - 4.0).abs() < 1e-12);
        }
    }
}
