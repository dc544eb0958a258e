//! Greedy extraction of a well-conditioned column subset.
//!
//! The selection budget `R` is the largest integer with
//! `R ln R <= eps^2 / (4 (1 + eps)) * p / ||X||^2`, and the envelope scale is
//! `delta = sqrt((1 + eps) ||X||^2 ln R / p)`. At every step the candidate
//! minimizing `Q(x) = sum_k (v_k^t Y_r^t x)^2 / k` is appended (this is never
//! above the average score of the remaining candidates), and the spectrum
//! of the selection is required to stay inside
//!
//! ```text
//! 1 - delta (r + k - 1) / sqrt(r)  <=  lambda_{k,r}  <=  1 + delta (2r - k) / sqrt(r)
//! ```
//!
//! so that after `R` steps every singular value of `X_T` lies in `[1 - eps, 1 + eps]`.

use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, gram, normalize_columns, sym_eig, DenseMatrix, SpectralState};
use crate::secular::{self, check_interlacing, Couplings};

/// Input columns must have unit norm within this tolerance.
pub const COLUMN_NORM_TOL: f64 = 1e-8;
/// Default slack for certification and envelope checks.
pub const DEFAULT_CERT_TOL: f64 = 1e-8;
/// Slack used by [`verify_envelopes`].
pub const ENVELOPE_TOL: f64 = 1e-8;
/// Slack used by [`verify_average_bound`].
pub const AVERAGE_BOUND_TOL: f64 = 1e-10;
/// Schema version stamped into every report.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Scalars driving the selection loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetParams {
    pub epsilon: f64,
    pub p: usize,
    pub opnorm_sq: f64,
    /// Number of greedy steps `R`.
    pub budget: usize,
    pub delta: f64,
}

impl BudgetParams {
    /// Right-hand side of the budget inequality `R ln R <= rhs`.
    pub fn rhs(epsilon: f64, p: usize, opnorm_sq: f64) -> f64 {
        epsilon * epsilon / (4.0 * (1.0 + epsilon)) * p as f64 / opnorm_sq
    }
}

pub fn compute_budget(epsilon: f64, p: usize, opnorm_sq: f64) -> Result<BudgetParams> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    if p < 2 {
        return Err(Error::BudgetTooSmall { p });
    }
    // Unit columns force ||X||^2 >= 1; allow rounding below it.
    if !opnorm_sq.is_finite() || opnorm_sq < 1.0 - 1e-9 {
        return Err(Error::BadArguments(format!(
            "squared operator norm must be >= 1, got {opnorm_sq}"
        )));
    }
    let rhs = BudgetParams::rhs(epsilon, p, opnorm_sq);
    let cap = p / 2;
    let mut budget = 1usize;
    while budget < cap {
        let next = (budget + 1) as f64;
        if next * next.ln() > rhs {
            break;
        }
        budget += 1;
    }
    let delta = ((1.0 + epsilon) * opnorm_sq * (budget as f64).ln() / p as f64).sqrt();
    Ok(BudgetParams {
        epsilon,
        p,
        opnorm_sq,
        budget,
        delta,
    })
}

/// Eigenvalue envelope `(lower, upper)` for `lambda_{k,r}`, with `1 <= k <= r`.
pub fn envelope_bounds(k: usize, r: usize, delta: f64) -> Result<(f64, f64)> {
    if k == 0 || k > r {
        return Err(Error::IndexOrder { k, r });
    }
    let sr = (r as f64).sqrt();
    let lower = 1.0 - delta * (r + k - 1) as f64 / sr;
    let upper = 1.0 + delta * (2 * r - k) as f64 / sr;
    Ok((lower, upper))
}

/// `H_r = sum_{k <= r} 1/k`.
pub fn harmonic(r: usize) -> f64 {
    (1..=r).map(|k| 1.0 / k as f64).sum()
}

/// Upper bound on the score of the column picked at step `r + 1`:
/// `lambda_{1,r} ||X||^2 H_r / (p - r)`.
pub fn average_score_bound(lambda_max: f64, opnorm_sq: f64, r: usize, p: usize) -> f64 {
    lambda_max * opnorm_sq * harmonic(r) / (p - r) as f64
}

/// How the spectrum of `Y_r^t Y_r` is refreshed after each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralPath {
    /// Dense Jacobi recompute every step; the secular update is evaluated
    /// alongside as a cross-check.
    #[default]
    Dense,
    /// Secular-equation update with closed-form eigenvectors and periodic
    /// dense refreshes.
    Secular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectorConfig {
    pub auto_normalize: bool,
    pub spectral_path: SpectralPath,
    pub cert_tol: f64,
    /// Fast path: full dense recompute every this many steps.
    pub refresh_interval: usize,
    /// Fast path: dense recompute once `||V^t V - I||_max` exceeds this.
    pub drift_tol: f64,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        Self {
            auto_normalize: false,
            spectral_path: SpectralPath::Dense,
            cert_tol: DEFAULT_CERT_TOL,
            refresh_interval: 16,
            drift_tol: 1e-8,
        }
    }
}

/// Loop state: chosen indices `T`, candidates `V_r` and the spectrum of
/// `Y_r^t Y_r` (absent before the first step).
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionState {
    pub selected: Vec<usize>,
    /// Remaining candidate indices, ascending.
    pub remaining: Vec<usize>,
    pub spectral: Option<SpectralState>,
}

impl SelectionState {
    pub fn new(p: usize) -> Self {
        Self {
            selected: Vec::new(),
            remaining: (0..p).collect(),
            spectral: None,
        }
    }

    pub fn step(&self) -> usize {
        self.selected.len()
    }
}

/// Score `Q(x) = sum_k (v_k^t Y^t x)^2 / k`, with `k` counted from 1 in
/// descending eigenvalue order.
pub fn score_column(x: &[f64], spectral: &SpectralState, y: &DenseMatrix) -> f64 {
    let c = Couplings::compute(spectral, y, x);
    weighted_score(&c)
}

fn weighted_score(c: &Couplings) -> f64 {
    c.values
        .iter()
        .enumerate()
        .map(|(k, ck)| ck * ck / (k + 1) as f64)
        .sum()
}

/// Scores of every remaining candidate, in `state.remaining` order.
fn remaining_scores(state: &SelectionState, x: &DenseMatrix, y: Option<&DenseMatrix>) -> Vec<f64> {
    match (&state.spectral, y) {
        (Some(spectral), Some(y)) => state
            .remaining
            .par_iter()
            .map(|&j| score_column(x.col(j), spectral, y))
            .collect(),
        _ => vec![0.0; state.remaining.len()],
    }
}

/// Chosen candidate together with its score and the mean remaining score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Choice {
    pub index: usize,
    pub score: f64,
    pub mean_score: f64,
}

fn argmin_choice(remaining: &[usize], scores: &[f64]) -> Result<Choice> {
    let (pos, &score) = scores
        .iter()
        .enumerate()
        // `remaining` is ascending, so keeping the first minimum breaks ties
        // towards the smallest index.
        .fold(None, |best: Option<(usize, &f64)>, (i, s)| match best {
            Some((_, b)) if *b <= *s => best,
            _ => Some((i, s)),
        })
        .ok_or(Error::Exhausted)?;
    let mean_score = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok(Choice {
        index: remaining[pos],
        score,
        mean_score,
    })
}

/// Remaining index with the smallest score (ties to the smallest index).
pub fn select_next(
    state: &SelectionState,
    x: &DenseMatrix,
    y: Option<&DenseMatrix>,
) -> Result<Choice> {
    if state.remaining.is_empty() {
        return Err(Error::Exhausted);
    }
    let scores = remaining_scores(state, x, y);
    argmin_choice(&state.remaining, &scores)
}

/// Everything recorded about one greedy step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Selection size after the step.
    pub step: usize,
    pub choice: Choice,
    pub spectrum: Vec<f64>,
    /// Cauchy interlacing against the previous spectrum; `None` at step 1.
    pub interlaced: Option<bool>,
    /// Max deviation between the secular-equation roots and a dense
    /// recompute, when both were computed this step.
    pub secular_deviation: Option<f64>,
}

/// Drives the greedy loop one column at a time.
#[derive(Debug)]
pub struct Selector<'a> {
    x: Cow<'a, DenseMatrix>,
    config: SelectorConfig,
    state: SelectionState,
    y: Option<DenseMatrix>,
    since_refresh: usize,
}

impl<'a> Selector<'a> {
    /// Validates column norms (normalizing when configured to).
    pub fn new(x: &'a DenseMatrix, config: SelectorConfig) -> Result<Self> {
        let x = if config.auto_normalize {
            Cow::Owned(normalize_columns(x)?)
        } else {
            check_unit_columns(x)?;
            Cow::Borrowed(x)
        };
        let state = SelectionState::new(x.cols());
        Ok(Self {
            x,
            config,
            state,
            y: None,
            since_refresh: 0,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.x
    }

    pub fn state(&self) -> &SelectionState {
        &self.state
    }

    /// Current selected submatrix `Y_r`.
    pub fn selected_matrix(&self) -> Option<&DenseMatrix> {
        self.y.as_ref()
    }

    /// Greedy step: append the argmin-score candidate.
    pub fn step(&mut self) -> Result<StepRecord> {
        let choice = select_next(&self.state, &self.x, self.y.as_ref())?;
        self.apply(choice)
    }

    /// Append a caller-chosen column, recording its score the same way a
    /// greedy step would. Used to replay an existing selection.
    pub fn step_with(&mut self, index: usize) -> Result<StepRecord> {
        let pos = self.state.remaining.binary_search(&index).map_err(|_| {
            Error::BadArguments(format!("column {index} is not a remaining candidate"))
        })?;
        let scores = remaining_scores(&self.state, &self.x, self.y.as_ref());
        let mean_score = scores.iter().sum::<f64>() / scores.len() as f64;
        self.apply(Choice {
            index,
            score: scores[pos],
            mean_score,
        })
    }

    fn apply(&mut self, choice: Choice) -> Result<StepRecord> {
        let col = self.x.col(choice.index);
        let old = self.state.spectral.take();
        let (spectral, interlaced, secular_deviation) = match (&old, &self.y) {
            (Some(old), Some(y)) => {
                let c = Couplings::compute(old, y, col);
                let mut y_next = y.clone();
                y_next.push_column(col)?;
                let (spectral, dev) = self.update_spectrum(old, &c, &y_next)?;
                self.y = Some(y_next);
                let ok = check_interlacing(&old.values, &spectral.values);
                (spectral, Some(ok), dev)
            }
            _ => {
                let y1 = DenseMatrix::new(col.len(), 1, col.to_vec())?;
                let spectral = sym_eig(&gram(&y1))?;
                self.y = Some(y1);
                (spectral, None, None)
            }
        };
        let pos = self
            .state
            .remaining
            .binary_search(&choice.index)
            .map_err(|_| Error::Exhausted)?;
        self.state.remaining.remove(pos);
        self.state.selected.push(choice.index);
        let spectrum = spectral.values.clone();
        self.state.spectral = Some(spectral);
        Ok(StepRecord {
            step: self.state.step(),
            choice,
            spectrum,
            interlaced,
            secular_deviation,
        })
    }

    fn update_spectrum(
        &mut self,
        old: &SpectralState,
        c: &Couplings,
        y_next: &DenseMatrix,
    ) -> Result<(SpectralState, Option<f64>)> {
        match self.config.spectral_path {
            SpectralPath::Dense => {
                let dense = sym_eig(&gram(y_next))?;
                let roots = secular::append_column_spectrum(&old.values, c)?.roots;
                Ok((dense.clone(), Some(max_deviation(&roots, &dense.values))))
            }
            SpectralPath::Secular => {
                let arrow = secular::append_column_spectrum_with_vectors(&old.values, c)?;
                let vectors = secular::lift_eigenvectors(
                    &old.vectors,
                    arrow
                        .vectors_in_eigenbasis
                        .as_ref()
                        .expect("vectors requested"),
                );
                let fast = SpectralState {
                    values: arrow.roots,
                    vectors,
                };
                self.since_refresh += 1;
                if self.since_refresh >= self.config.refresh_interval
                    || fast.orthonormality_error() > self.config.drift_tol
                {
                    self.since_refresh = 0;
                    let dense = sym_eig(&gram(y_next))?;
                    let dev = max_deviation(&fast.values, &dense.values);
                    log::debug!(
                        "dense refresh at step {}, secular deviation {dev:e}",
                        y_next.cols()
                    );
                    Ok((dense, Some(dev)))
                } else {
                    Ok((fast, None))
                }
            }
        }
    }
}

fn max_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn check_unit_columns(x: &DenseMatrix) -> Result<()> {
    for j in 0..x.cols() {
        let norm = x.column_norm(j);
        if (norm - 1.0).abs() > COLUMN_NORM_TOL {
            return Err(Error::ColumnNormViolation { index: j, norm });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub step: usize,
    pub index: usize,
    pub score: f64,
    pub mean_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub k: usize,
    pub r: usize,
    pub lambda: f64,
    pub lower: f64,
    pub upper: f64,
    /// `lambda - lower`; negative means below the envelope.
    pub lower_margin: f64,
    /// `upper - lambda`; negative means above the envelope.
    pub upper_margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterlacingCheck {
    pub step: usize,
    pub interlaced: bool,
    pub secular_deviation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalExtremes {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub library: String,
    pub report_schema: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Self {
            library: env!("CARGO_PKG_VERSION").to_string(),
            report_schema: REPORT_SCHEMA_VERSION,
        }
    }
}

/// Machine-checkable record of a selection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub params: BudgetParams,
    /// Selected column indices (0-based) in selection order.
    pub selected: Vec<usize>,
    /// `trajectory[r - 1]` holds the descending spectrum of `Y_r^t Y_r`.
    pub trajectory: Vec<Vec<f64>>,
    pub scores: Vec<ScoreRecord>,
    pub envelope_checks: Vec<EnvelopeCheck>,
    /// One entry per step from the second on.
    pub interlacing_checks: Vec<InterlacingCheck>,
    pub final_extremes: FinalExtremes,
    pub certified: bool,
    pub versions: Versions,
}

fn envelope_checks(trajectory: &[Vec<f64>], delta: f64, tol: f64) -> Vec<EnvelopeCheck> {
    let mut out = Vec::new();
    for (ri, spectrum) in trajectory.iter().enumerate() {
        let r = ri + 1;
        for (ki, &lambda) in spectrum.iter().enumerate() {
            let k = ki + 1;
            // a spectrum longer than its step is itself a violation
            let (lower, upper) = envelope_bounds(k, r, delta).unwrap_or((f64::NAN, f64::NAN));
            let lower_margin = lambda - lower;
            let upper_margin = upper - lambda;
            out.push(EnvelopeCheck {
                k,
                r,
                lambda,
                lower,
                upper,
                lower_margin,
                upper_margin,
                pass: lower_margin >= -tol && upper_margin >= -tol,
            });
        }
    }
    out
}

fn assemble_report(
    x: &DenseMatrix,
    params: BudgetParams,
    records: Vec<StepRecord>,
    selected: Vec<usize>,
    cert_tol: f64,
) -> Result<SelectionReport> {
    let trajectory: Vec<Vec<f64>> = records.iter().map(|r| r.spectrum.clone()).collect();
    let scores = records
        .iter()
        .map(|r| ScoreRecord {
            step: r.step,
            index: r.choice.index,
            score: r.choice.score,
            mean_score: r.choice.mean_score,
        })
        .collect();
    let interlacing_checks = records
        .iter()
        .filter_map(|r| {
            r.interlaced.map(|interlaced| InterlacingCheck {
                step: r.step,
                interlaced,
                secular_deviation: r.secular_deviation,
            })
        })
        .collect();
    let envelope_checks = envelope_checks(&trajectory, params.delta, cert_tol);

    let final_eig = sym_eig(&gram(&x.select_columns(&selected)?))?;
    let final_extremes = FinalExtremes {
        lambda_max: final_eig.values[0],
        lambda_min: *final_eig.values.last().expect("nonempty spectrum"),
    };
    let eps = params.epsilon;
    let certified = envelope_checks.iter().all(|c| c.pass)
        && final_extremes.lambda_min >= 1.0 - eps - cert_tol
        && final_extremes.lambda_max <= 1.0 + eps + cert_tol;

    Ok(SelectionReport {
        params,
        selected,
        trajectory,
        scores,
        envelope_checks,
        interlacing_checks,
        final_extremes,
        certified,
        versions: Versions::default(),
    })
}

fn budget_for(x: &DenseMatrix, epsilon: f64) -> Result<BudgetParams> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    compute_budget(epsilon, x.cols(), linalg::operator_norm_sq(x)?)
}

/// Runs exactly `R` greedy steps and certifies the result.
pub fn run_selection(
    x: &DenseMatrix,
    epsilon: f64,
    config: &SelectorConfig,
) -> Result<SelectionReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let mut selector = Selector::new(x, config.clone())?;
    let params = budget_for(selector.matrix(), epsilon)?;
    let mut records = Vec::with_capacity(params.budget);
    for _ in 0..params.budget {
        records.push(selector.step()?);
    }
    let selected = selector.state().selected.clone();
    assemble_report(
        selector.matrix(),
        params,
        records,
        selected,
        config.cert_tol,
    )
}

/// Rebuilds a report for a given selection from scratch with the dense
/// eigensolver. The budget is recomputed from `x` and `epsilon`, so the
/// result can be compared field by field against a stored report.
pub fn replay_selection(
    x: &DenseMatrix,
    epsilon: f64,
    selected: &[usize],
    config: &SelectorConfig,
) -> Result<SelectionReport> {
    if selected.is_empty() {
        return Err(Error::BadArguments("empty selection".into()));
    }
    let config = SelectorConfig {
        spectral_path: SpectralPath::Dense,
        ..config.clone()
    };
    let mut selector = Selector::new(x, config.clone())?;
    let params = budget_for(selector.matrix(), epsilon)?;
    let records = selected
        .iter()
        .map(|&j| selector.step_with(j))
        .collect::<Result<Vec<_>>>()?;
    assemble_report(
        selector.matrix(),
        params,
        records,
        selected.to_vec(),
        config.cert_tol,
    )
}

/// An eigenvalue outside its envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeViolation {
    pub k: usize,
    pub r: usize,
    pub lambda: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Re-checks every `lambda_{k,r}` of the report's trajectory against its
/// envelope with slack [`ENVELOPE_TOL`]. Empty means the guarantee holds.
pub fn verify_envelopes(report: &SelectionReport) -> Vec<EnvelopeViolation> {
    envelope_checks(&report.trajectory, report.params.delta, ENVELOPE_TOL)
        .into_iter()
        .filter(|c| !c.pass)
        .map(|c| EnvelopeViolation {
            k: c.k,
            r: c.r,
            lambda: c.lambda,
            lower: c.lower,
            upper: c.upper,
        })
        .collect()
}

/// Step at which the chosen column's score exceeded the average-score bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageBoundViolation {
    /// Selection size before the pick (`r`); the pick is `y_{r+1}`.
    pub r: usize,
    pub score: f64,
    pub bound: f64,
}

/// Recomputes, from `x` and the report's selection alone, the score of each
/// pick `y_{r+1}` and checks `Q(y_{r+1}) <= lambda_{1,r} ||X||^2 H_r / (p - r)`.
pub fn verify_average_bound(
    report: &SelectionReport,
    x: &DenseMatrix,
) -> Result<Vec<AverageBoundViolation>> {
    let p = x.cols();
    if report.selected.iter().any(|&j| j >= p) {
        return Err(Error::DimensionMismatch(format!(
            "selection refers to columns beyond {p}"
        )));
    }
    let opnorm_sq = linalg::operator_norm_sq(x)?;
    let mut out = Vec::new();
    for r in 1..report.selected.len() {
        let y = x.select_columns(&report.selected[..r])?;
        let spectral = sym_eig(&gram(&y))?;
        let score = score_column(x.col(report.selected[r]), &spectral, &y);
        let bound = average_score_bound(spectral.values[0], opnorm_sq, r, p);
        if score > bound + AVERAGE_BOUND_TOL {
            out.push(AverageBoundViolation { r, score, bound });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn budget_reference_values() {
        let b = compute_budget(0.5, 1000, 10.0).unwrap();
        assert_eq!(b.budget, 3);
        // independent scalar evaluation
        let rhs = 0.25 / (4.0 * 1.5) * 100.0;
        assert!(3.0 * 3f64.ln() <= rhs && 4.0 * 4f64.ln() > rhs);
        assert_abs_diff_eq!(
            b.delta,
            (1.5 * 10.0 * 3f64.ln() / 1000.0).sqrt(),
            epsilon = 1e-15
        );
        // sqrt(0.015 ln 3) = 0.12837128 to eight places
        assert_abs_diff_eq!(b.delta, 0.128371275, epsilon = 1e-9);
    }

    #[test]
    fn budget_degenerates_to_one() {
        // rhs below 2 ln 2
        let b = compute_budget(0.1, 10, 5.0).unwrap();
        assert_eq!(b.budget, 1);
        assert_eq!(b.delta, 0.0);
    }

    #[test]
    fn budget_rejects_bad_input() {
        assert_eq!(
            compute_budget(1.5, 10, 1.0),
            Err(Error::InvalidEpsilon(1.5))
        );
        assert_eq!(
            compute_budget(0.0, 10, 1.0),
            Err(Error::InvalidEpsilon(0.0))
        );
        assert_eq!(
            compute_budget(0.5, 1, 1.0),
            Err(Error::BudgetTooSmall { p: 1 })
        );
        assert!(compute_budget(0.5, 10, 0.5).is_err());
    }

    #[test]
    fn envelope_examples() {
        let d = 0.37;
        let (lo, hi) = envelope_bounds(1, 1, d).unwrap();
        assert_abs_diff_eq!(lo, 1.0 - d, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 1.0 + d, epsilon = 1e-15);
        for r in 1..20 {
            for k in 1..=r {
                assert_eq!(envelope_bounds(k, r, 0.0).unwrap(), (1.0, 1.0));
            }
        }
        let (lo, hi) = envelope_bounds(1, 4, 0.1).unwrap();
        assert_abs_diff_eq!(lo, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 1.35, epsilon = 1e-15);
        assert_eq!(
            envelope_bounds(3, 2, 0.1),
            Err(Error::IndexOrder { k: 3, r: 2 })
        );
        assert_eq!(
            envelope_bounds(0, 2, 0.1),
            Err(Error::IndexOrder { k: 0, r: 2 })
        );
    }

    #[test]
    fn score_orthogonal_is_zero_and_single_term() {
        let y = DenseMatrix::new(3, 1, vec![1.0, 0.0, 0.0]).unwrap();
        let s = SpectralState::unit();
        assert_eq!(score_column(&[0.0, 1.0, 0.0], &s, &y), 0.0);
        let x = [0.6, 0.8, 0.0];
        assert_abs_diff_eq!(score_column(&x, &s, &y), 0.36, epsilon = 1e-15);
    }

    #[test]
    fn first_step_picks_smallest_index() {
        let x = DenseMatrix::identity(5);
        let state = SelectionState::new(5);
        let c = select_next(&state, &x, None).unwrap();
        assert_eq!(c.index, 0);
        assert_eq!(c.score, 0.0);
    }

    #[test]
    fn exhausted_when_no_candidates() {
        let x = DenseMatrix::identity(2);
        let mut sel = Selector::new(&x, SelectorConfig::default()).unwrap();
        sel.step().unwrap();
        sel.step().unwrap();
        assert_eq!(sel.step().unwrap_err(), Error::Exhausted);
    }

    #[test]
    fn identity_selects_in_order() {
        let x = DenseMatrix::identity(12);
        let mut sel = Selector::new(&x, SelectorConfig::default()).unwrap();
        for expected in 0..6 {
            let rec = sel.step().unwrap();
            assert_eq!(rec.choice.index, expected);
            assert!(rec.spectrum.iter().all(|&l| (l - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn rejects_non_unit_columns_unless_normalizing() {
        let x = DenseMatrix::new(2, 2, vec![2.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            Selector::new(&x, SelectorConfig::default()),
            Err(Error::ColumnNormViolation { index: 0, .. })
        ));
        let cfg = SelectorConfig {
            auto_normalize: true,
            ..Default::default()
        };
        assert!(Selector::new(&x, cfg).is_ok());
    }

    #[test]
    fn corrupted_trajectory_is_flagged() {
        let x = DenseMatrix::identity(64);
        let mut report = run_selection(&x, 0.5, &SelectorConfig::default()).unwrap();
        assert!(report.params.budget >= 2);
        assert!(verify_envelopes(&report).is_empty());
        report.trajectory[1][0] = 2.0;
        let v = verify_envelopes(&report);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].k, v[0].r), (1, 2));
    }

    #[test]
    fn duplicate_pair_stress_case() {
        // p = 2, both columns equal: the second pick has score 1 against a
        // bound of ||X||^2 H_1 / (p - 1) = 2.
        let col = vec![1.0, 0.0];
        let x = DenseMatrix::from_columns(&[col.clone(), col]).unwrap();
        let opn = linalg::operator_norm_sq(&x).unwrap();
        assert_abs_diff_eq!(opn, 2.0, epsilon = 1e-14);
        let y = x.select_columns(&[0]).unwrap();
        let lhs = score_column(x.col(1), &SpectralState::unit(), &y);
        assert_abs_diff_eq!(lhs, 1.0, epsilon = 1e-15);
        let rhs = average_score_bound(1.0, opn, 1, 2);
        assert_abs_diff_eq!(rhs, 2.0, epsilon = 1e-14);
        // the log(r) form would give 0 here and be violated
        assert!(lhs > 1.0 * opn * 1f64.ln() / 1.0);
    }

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic(0), 0.0);
        assert_eq!(harmonic(1), 1.0);
        assert_abs_diff_eq!(harmonic(4), 25.0 / 12.0, epsilon = 1e-15);
        for r in 1..200 {
            assert!(harmonic(r) <= 1.0 + (r as f64).ln() + 1e-12);
        }
    }
}
