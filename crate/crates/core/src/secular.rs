//! Spectrum of a Gram matrix after appending one unit column.
//!
//! With `Y_r^t Y_r = V diag(lambda) V^t` and a new unit column `y`, the
//! Gram matrix of `[Y_r, y]` expressed in the basis `diag(V, 1)` is the
//! arrowhead matrix
//!
//! ```text
//! [ diag(lambda)  c ]
//! [ c^t           1 ]      c_k = v_k^t Y_r^t y
//! ```
//!
//! whose eigenvalues are the zeros of
//! `q(mu) = 1 - mu + sum_k c_k^2 / (mu - lambda_k)`.
//!
//! Coordinates of the arrowhead eigenbasis are ordered as the old
//! eigenvector coefficients `0..r` followed by the new column at index `r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix, SpectralState};

/// Couplings below `DEFLATION_TOL * max(1, lambda_1)` are treated as zero.
pub const DEFLATION_TOL: f64 = 1e-12;
/// Poles closer than this (scaled like `DEFLATION_TOL`) are merged.
pub const CLUSTER_TOL: f64 = 1e-12;
/// Tolerance used by [`check_interlacing`].
pub const INTERLACING_TOL: f64 = 1e-10;
/// Bisection runs until the bracket is this narrow, then Newton takes over.
pub const BISECTION_WIDTH: f64 = 1e-8;
pub const MAX_ROOT_ITERATIONS: usize = 100;
pub const MAX_BRACKET_EXPANSIONS: usize = 200;

/// Projections `c_k = v_k^t Y_r^t y` of an appended column onto the current
/// eigendirections, index-aligned with the eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub values: Vec<f64>,
}

impl Couplings {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Couplings of column `x` against the selection `y` whose Gram matrix is
    /// diagonalized by `spectral`.
    pub fn compute(spectral: &SpectralState, y: &DenseMatrix, x: &[f64]) -> Self {
        let w = y.tr_mul_vec(x);
        Self::from_projections(spectral, &w)
    }

    /// Couplings from precomputed `Y_r^t y`.
    pub fn from_projections(spectral: &SpectralState, w: &[f64]) -> Self {
        let values = (0..spectral.dim())
            .map(|k| dot(spectral.vectors.col(k), w))
            .collect();
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum_sq(&self) -> f64 {
        dot(&self.values, &self.values)
    }
}

/// Where an eigenvalue of the bordered matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootOrigin {
    /// Old eigenvalue `k` passed through unchanged (uncoupled or merged pole).
    Deflated(usize),
    /// Zero of the secular function.
    Secular,
}

/// The `r + 1` eigenvalues of the bordered Gram matrix, descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrowheadSpectrum {
    pub roots: Vec<f64>,
    pub origins: Vec<RootOrigin>,
    /// Orthonormal eigenvectors in the arrowhead basis, when requested.
    pub vectors_in_eigenbasis: Option<DenseMatrix>,
}

/// `q(lambda) = 1 - lambda + sum_k c_k^2 / (lambda - lambda_k)`.
///
/// Terms with zero coupling are skipped, so only poles with a nonzero
/// coupling are rejected.
pub fn secular_eval(lambda: f64, poles: &[f64], couplings: &Couplings) -> Result<f64> {
    if poles.len() != couplings.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} poles but {} couplings",
            poles.len(),
            couplings.len()
        )));
    }
    eval_terms(
        lambda,
        poles.iter().copied().zip(couplings.values.iter().copied()),
    )
}

fn eval_terms(lambda: f64, terms: impl Iterator<Item = (f64, f64)>) -> Result<f64> {
    let mut q = 1.0 - lambda;
    for (pole, c) in terms {
        if c == 0.0 {
            continue;
        }
        let gap = lambda - pole;
        if gap.abs() <= 1e-300 {
            return Err(Error::PoleEvaluation { pole });
        }
        q += c * c / gap;
    }
    Ok(q)
}

/// `q` and `q'` over the active (pole, coupling) pairs.
fn eval_with_derivative(lambda: f64, poles: &[f64], z: &[f64]) -> (f64, f64) {
    let mut q = 1.0 - lambda;
    let mut dq = -1.0;
    for (&d, &c) in poles.iter().zip(z) {
        let inv = 1.0 / (lambda - d);
        let t = c * c * inv;
        q += t;
        dq -= t * inv;
    }
    (q, dq)
}

/// Givens rotation `(keep, zeroed, cos, sin)` applied inside a pole cluster.
type Rotation = (usize, usize, f64, f64);

/// Reduced secular problem after deflation.
#[derive(Debug)]
struct Deflation {
    /// Couplings in the rotated eigenbasis; zero for deflated poles.
    z: Vec<f64>,
    /// Old indices with a nonzero coupling, in input (descending) order.
    active: Vec<usize>,
    rotations: Vec<Rotation>,
}

fn validate(values: &[f64], couplings: &Couplings) -> Result<()> {
    if values.len() != couplings.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} eigenvalues but {} couplings",
            values.len(),
            couplings.len()
        )));
    }
    if values.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::BadArguments(
            "eigenvalues must be sorted in descending order".into(),
        ));
    }
    if values
        .iter()
        .chain(&couplings.values)
        .any(|v| !v.is_finite())
    {
        return Err(Error::BadArguments(
            "non-finite eigenvalue or coupling".into(),
        ));
    }
    Ok(())
}

fn deflate(values: &[f64], couplings: &Couplings) -> Deflation {
    let scale = values.first().copied().unwrap_or(1.0).max(1.0);
    let mut z = couplings.values.clone();
    for zk in z.iter_mut() {
        if zk.abs() < DEFLATION_TOL * scale {
            *zk = 0.0;
        }
    }

    let mut rotations = Vec::new();
    let mut active: Vec<usize> = Vec::with_capacity(z.len());
    for k in 0..z.len() {
        if z[k] == 0.0 {
            continue;
        }
        match active.last() {
            Some(&rep) if values[rep] - values[k] <= CLUSTER_TOL * scale => {
                let rho = z[rep].hypot(z[k]);
                let (c, s) = (z[rep] / rho, z[k] / rho);
                z[rep] = rho;
                z[k] = 0.0;
                rotations.push((rep, k, c, s));
            }
            _ => active.push(k),
        }
    }
    Deflation {
        z,
        active,
        rotations,
    }
}

/// All `r + 1` eigenvalues of the bordered Gram matrix, without vectors.
pub fn append_column_spectrum(values: &[f64], couplings: &Couplings) -> Result<ArrowheadSpectrum> {
    validate(values, couplings)?;
    let defl = deflate(values, couplings);
    let poles: Vec<f64> = defl.active.iter().map(|&k| values[k]).collect();
    let z: Vec<f64> = defl.active.iter().map(|&k| defl.z[k]).collect();
    let secular = secular_roots(&poles, &z)?;

    let mut entries: Vec<(f64, RootOrigin)> = (0..values.len())
        .filter(|&k| defl.z[k] == 0.0)
        .map(|k| (values[k], RootOrigin::Deflated(k)))
        .chain(secular.into_iter().map(|mu| (mu, RootOrigin::Secular)))
        .collect();
    entries.sort_by(|a, b| b.0.total_cmp(&a.0));

    let (roots, origins) = entries.into_iter().unzip();
    Ok(ArrowheadSpectrum {
        roots,
        origins,
        vectors_in_eigenbasis: None,
    })
}

/// Eigenvalues and arrowhead-basis eigenvectors of the bordered matrix.
pub fn append_column_spectrum_with_vectors(
    values: &[f64],
    couplings: &Couplings,
) -> Result<ArrowheadSpectrum> {
    let mut spec = append_column_spectrum(values, couplings)?;
    spec.vectors_in_eigenbasis = Some(arrowhead_eigenvectors(values, couplings, &spec)?);
    Ok(spec)
}

/// Zeros of the secular function over active poles (descending, all with
/// nonzero coupling). Returns `poles.len() + 1` roots in descending order.
fn secular_roots(poles: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    let m = poles.len();
    if m == 0 {
        return Ok(vec![1.0]);
    }
    let zsq: f64 = dot(z, z);
    let mut roots = Vec::with_capacity(m + 1);

    // Above the largest pole.
    let base = poles[0].max(1.0);
    let mut step = zsq;
    let mut hi = base + step;
    let mut expansions = 0;
    while eval_with_derivative(hi, poles, z).0 >= 0.0 {
        if expansions == MAX_BRACKET_EXPANSIONS {
            return Err(Error::BracketFailure {
                index: 0,
                steps: expansions,
            });
        }
        step *= 2.0;
        hi = base + step;
        expansions += 1;
    }
    roots.push(solve_bracket(poles, z, poles[0], hi)?);

    for j in 1..m {
        roots.push(solve_bracket(poles, z, poles[j], poles[j - 1])?);
    }

    // Below the smallest pole.
    let base = poles[m - 1].min(1.0);
    let mut step = zsq;
    let mut lo = base - step;
    let mut expansions = 0;
    while eval_with_derivative(lo, poles, z).0 <= 0.0 {
        if expansions == MAX_BRACKET_EXPANSIONS {
            return Err(Error::BracketFailure {
                index: m,
                steps: expansions,
            });
        }
        step *= 2.0;
        lo = base - step;
        expansions += 1;
    }
    roots.push(solve_bracket(poles, z, lo, poles[m - 1])?);
    Ok(roots)
}

/// Root of the (strictly decreasing) secular function inside `(a, b)`,
/// where `q(a+) > 0 > q(b-)`. Endpoints may be poles and are never evaluated.
fn solve_bracket(poles: &[f64], z: &[f64], mut a: f64, mut b: f64) -> Result<f64> {
    let width = |a: f64, b: f64| b - a;
    let mut x = 0.5 * (a + b);

    let mut iterations = 0;
    while width(a, b) > BISECTION_WIDTH * x.abs().max(1.0) && iterations < 4 * MAX_ROOT_ITERATIONS {
        let (q, _) = eval_with_derivative(x, poles, z);
        if q == 0.0 {
            return Ok(x);
        }
        if q > 0.0 {
            a = x;
        } else {
            b = x;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            return Ok(x);
        }
        x = mid;
        iterations += 1;
    }

    for _ in 0..MAX_ROOT_ITERATIONS {
        let (q, dq) = eval_with_derivative(x, poles, z);
        if q == 0.0 {
            return Ok(x);
        }
        if q > 0.0 {
            a = x;
        } else {
            b = x;
        }
        let mut next = x - q / dq;
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
            if next <= a || next >= b {
                return Ok(x);
            }
        }
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(1.0) {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Orthonormal eigenvectors of the bordered matrix in the arrowhead basis
/// (old eigenvector coefficients first, new column last), column-aligned
/// with `spectrum.roots`.
///
/// Couplings are re-derived from the computed roots (Lowner's formula)
/// before the closed-form vectors `u_k = c_k / (mu - lambda_k)` are formed,
/// which keeps the columns orthogonal even for roots close to poles.
pub fn arrowhead_eigenvectors(
    values: &[f64],
    couplings: &Couplings,
    spectrum: &ArrowheadSpectrum,
) -> Result<DenseMatrix> {
    validate(values, couplings)?;
    let r = values.len();
    if spectrum.roots.len() != r + 1 || spectrum.origins.len() != r + 1 {
        return Err(Error::DimensionMismatch(format!(
            "expected {} roots, got {}",
            r + 1,
            spectrum.roots.len()
        )));
    }
    let defl = deflate(values, couplings);
    let poles: Vec<f64> = defl.active.iter().map(|&k| values[k]).collect();
    let secular: Vec<f64> = spectrum
        .roots
        .iter()
        .zip(&spectrum.origins)
        .filter(|(_, o)| **o == RootOrigin::Secular)
        .map(|(&mu, _)| mu)
        .collect();
    if secular.len() != poles.len() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "{} secular roots for {} active poles",
            secular.len(),
            poles.len()
        )));
    }
    let z = lowner_couplings(&poles, &secular, &defl);

    let mut out = DenseMatrix::zeros(r + 1, r + 1);
    for (col, (&mu, origin)) in spectrum.roots.iter().zip(&spectrum.origins).enumerate() {
        let v = out.col_mut(col);
        match *origin {
            RootOrigin::Deflated(k) => v[k] = 1.0,
            RootOrigin::Secular => {
                v[r] = 1.0;
                for (i, &k) in defl.active.iter().enumerate() {
                    let gap = mu - poles[i];
                    if gap == 0.0 {
                        return Err(Error::DegenerateRoot {
                            root: mu,
                            pole: poles[i],
                        });
                    }
                    v[k] = z[i] / gap;
                }
                let nrm = dot(v, v).sqrt();
                v.iter_mut().for_each(|e| *e /= nrm);
            }
        }
        // Undo the cluster rotations, last one first.
        for &(keep, zeroed, c, s) in defl.rotations.iter().rev() {
            let (a, b) = (v[keep], v[zeroed]);
            v[keep] = c * a - s * b;
            v[zeroed] = s * a + c * b;
        }
    }
    Ok(out)
}

/// Couplings of the arrowhead matrix whose exact spectrum is `roots`, for
/// the active poles. Falls back to the input coupling when rounding makes
/// the reconstructed square nonpositive.
fn lowner_couplings(poles: &[f64], roots: &[f64], defl: &Deflation) -> Vec<f64> {
    let m = poles.len();
    (0..m)
        .map(|i| {
            let d = poles[i];
            let original = defl.z[defl.active[i]];
            let mut sq = (roots[i] - d) * (d - roots[i + 1]);
            for l in 0..i {
                sq *= (roots[l] - d) / (poles[l] - d);
            }
            for l in (i + 1)..m {
                sq *= (roots[l + 1] - d) / (poles[l] - d);
            }
            if sq > 0.0 && sq.is_finite() {
                sq.sqrt().copysign(original)
            } else {
                original
            }
        })
        .collect()
}

/// Maps arrowhead-basis eigenvectors back to the coordinates of the
/// selected columns: `diag(V, 1) * U`.
pub fn lift_eigenvectors(old_vectors: &DenseMatrix, arrow: &DenseMatrix) -> DenseMatrix {
    let r = old_vectors.rows();
    debug_assert_eq!(arrow.rows(), r + 1);
    let mut out = DenseMatrix::zeros(r + 1, arrow.cols());
    for j in 0..arrow.cols() {
        let u = arrow.col(j);
        let lifted = old_vectors.mul_vec(&u[..r]);
        let dst = out.col_mut(j);
        dst[..r].copy_from_slice(&lifted);
        dst[r] = u[r];
    }
    out
}

/// Cauchy interlacing between the spectrum of `Y_r^t Y_r` (`old`, length r)
/// and that of the bordered matrix (`new`, length r + 1):
/// `new[k+1] <= old[k] <= new[k]` for every k, within [`INTERLACING_TOL`].
pub fn check_interlacing(old: &[f64], new: &[f64]) -> bool {
    if new.len() != old.len() + 1 {
        return false;
    }
    old.iter()
        .enumerate()
        .all(|(k, &lam)| new[k + 1] <= lam + INTERLACING_TOL && new[k] >= lam - INTERLACING_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eval_single_pole() {
        let q = secular_eval(2.0, &[1.0], &Couplings::new(vec![0.5])).unwrap();
        assert_abs_diff_eq!(q, -0.75, epsilon = 1e-15);
    }

    #[test]
    fn eval_without_coupling_is_linear() {
        let c = Couplings::new(vec![0.0, 0.0, 0.0]);
        for lam in [-3.0, 0.0, 0.9, 1.0, 2.5] {
            assert_eq!(secular_eval(lam, &[1.0, 0.9, 0.8], &c).unwrap(), 1.0 - lam);
        }
    }

    #[test]
    fn eval_at_pole_fails() {
        let c = Couplings::new(vec![0.3, 0.0]);
        assert!(matches!(
            secular_eval(1.2, &[1.2, 0.5], &c),
            Err(Error::PoleEvaluation { .. })
        ));
        // an uncoupled pole is harmless
        assert!(secular_eval(0.5, &[1.2, 0.5], &c).is_ok());
    }

    #[test]
    fn eval_is_decreasing_between_poles() {
        let poles = [1.4, 1.0, 0.6];
        let c = Couplings::new(vec![0.2, 0.3, 0.1]);
        let intervals = [(0.0, 0.6), (0.6, 1.0), (1.0, 1.4), (1.4, 3.0)];
        for (a, b) in intervals {
            let mut prev = f64::INFINITY;
            for i in 1..100 {
                let x = a + (b - a) * i as f64 / 100.0;
                let q = secular_eval(x, &poles, &c).unwrap();
                assert!(q < prev);
                prev = q;
            }
        }
    }

    #[test]
    fn zero_couplings_pass_poles_through() {
        let old = [1.3, 0.9, 0.8];
        let spec = append_column_spectrum(&old, &Couplings::new(vec![0.0; 3])).unwrap();
        assert_eq!(spec.roots, vec![1.3, 1.0, 0.9, 0.8]);
        let v = arrowhead_eigenvectors(&old, &Couplings::new(vec![0.0; 3]), &spec).unwrap();
        // permutation embedding: old directions keep their coordinates, the new one sits last
        let expected_cols = [0usize, 3, 1, 2];
        for (col, &coord) in expected_cols.iter().enumerate() {
            for i in 0..4 {
                assert_eq!(v[(i, col)], if i == coord { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn two_unit_vectors_at_angle() {
        for theta in [0.1_f64, 0.5, 1.0, std::f64::consts::FRAC_PI_3, 1.5] {
            let c = theta.cos();
            let spec = append_column_spectrum(&[1.0], &Couplings::new(vec![c])).unwrap();
            assert_abs_diff_eq!(spec.roots[0], 1.0 + c, epsilon = 1e-12);
            assert_abs_diff_eq!(spec.roots[1], 1.0 - c, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_by_two_eigenvectors_at_sixty_degrees() {
        let c = Couplings::new(vec![0.5]);
        let spec = append_column_spectrum_with_vectors(&[1.0], &c).unwrap();
        let v = spec.vectors_in_eigenbasis.unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(v[(0, 0)].abs(), h, epsilon = 1e-12);
        assert_abs_diff_eq!(v[(1, 0)], v[(0, 0)], epsilon = 1e-12);
        assert_abs_diff_eq!(v[(1, 1)], -v[(0, 1)], epsilon = 1e-12);
        assert_abs_diff_eq!(v[(1, 1)].abs(), h, epsilon = 1e-12);
    }

    #[test]
    fn deflated_values_are_bit_identical() {
        let old = [1.7, 1.1234567890123, 0.4];
        let c = Couplings::new(vec![0.3, 1e-14, 0.2]);
        let spec = append_column_spectrum(&old, &c).unwrap();
        let k = spec
            .origins
            .iter()
            .position(|o| *o == RootOrigin::Deflated(1))
            .unwrap();
        assert_eq!(spec.roots[k].to_bits(), old[1].to_bits());
    }

    #[test]
    fn clustered_poles_merge() {
        // Exactly repeated eigenvalue: the bordered matrix keeps one copy.
        let old = [1.5, 1.5, 0.5];
        let c = Couplings::new(vec![0.3, 0.4, 0.1]);
        let spec = append_column_spectrum_with_vectors(&old, &c).unwrap();
        assert_eq!(
            spec.origins
                .iter()
                .filter(|o| matches!(o, RootOrigin::Deflated(_)))
                .count(),
            1
        );
        assert!(spec.roots.contains(&1.5));
        // Same spectrum as the unmerged problem with coupling 0.5 on a single pole,
        // plus the passed-through copy.
        let merged = append_column_spectrum(&[1.5, 0.5], &Couplings::new(vec![0.5, 0.1])).unwrap();
        let mut expected = merged.roots.clone();
        expected.push(1.5);
        expected.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in spec.roots.iter().zip(&expected) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
        let v = spec.vectors_in_eigenbasis.unwrap();
        assert!(crate::linalg::orthonormality_error(&v) < 1e-12);
    }

    #[test]
    fn interlacing_examples() {
        assert!(check_interlacing(&[1.0], &[1.5, 0.5]));
        assert!(!check_interlacing(&[1.0], &[1.5, 1.2]));
        assert!(!check_interlacing(&[1.0], &[1.5]));
        assert!(check_interlacing(&[1.2, 0.8], &[1.5, 1.0, 0.5]));
        assert!(!check_interlacing(&[1.2, 0.8], &[1.1, 1.0, 0.5]));
    }

    #[test]
    fn rejects_unsorted_or_misaligned_input() {
        assert!(matches!(
            append_column_spectrum(&[0.5, 1.0], &Couplings::new(vec![0.1, 0.1])),
            Err(Error::BadArguments(_))
        ));
        assert!(matches!(
            append_column_spectrum(&[1.0], &Couplings::new(vec![0.1, 0.1])),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn large_coupling_needs_bracket_expansion() {
        // Not a unit-norm update, but the root finder must still bracket.
        let spec = append_column_spectrum(&[1.0], &Couplings::new(vec![0.01])).unwrap();
        let sum: f64 = spec.roots.iter().sum();
        assert_abs_diff_eq!(sum, 2.0, epsilon = 1e-12);
        let spec = append_column_spectrum(&[3.0, 2.0], &Couplings::new(vec![5.0, 4.0])).unwrap();
        let sum: f64 = spec.roots.iter().sum();
        assert_abs_diff_eq!(sum, 6.0, epsilon = 1e-10);
    }
}
