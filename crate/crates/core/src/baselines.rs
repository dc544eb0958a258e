//! Naive reference selectors used for comparison tables.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram, sym_eig, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    UniformRandom,
    FirstR,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub method: BaselineMethod,
    pub selected: Vec<usize>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `lambda_max / lambda_min`, or `+inf` when `lambda_min <= 0`.
    pub condition_number: f64,
}

pub fn condition_number(lambda_min: f64, lambda_max: f64) -> f64 {
    if lambda_min > 0.0 {
        lambda_max / lambda_min
    } else {
        f64::INFINITY
    }
}

fn evaluate(
    x: &DenseMatrix,
    method: BaselineMethod,
    selected: Vec<usize>,
) -> Result<BaselineResult> {
    let eig = sym_eig(&gram(&x.select_columns(&selected)?))?;
    let lambda_max = eig.values[0];
    let lambda_min = *eig.values.last().expect("nonempty spectrum");
    Ok(BaselineResult {
        method,
        selected,
        lambda_min,
        lambda_max,
        condition_number: condition_number(lambda_min, lambda_max),
    })
}

fn check_size(x: &DenseMatrix, r: usize) -> Result<()> {
    if r == 0 || r > x.cols() {
        return Err(Error::BadArguments(format!(
            "subset size must be in 1..={}, got {r}",
            x.cols()
        )));
    }
    Ok(())
}

/// `trials` independent uniform draws of `r` distinct columns.
///
/// Trial `t` uses the Xoshiro256++ stream seeded with `seed` and advanced by
/// `t` jumps, so results do not depend on how trials are scheduled.
pub fn random_subset_select(
    x: &DenseMatrix,
    r: usize,
    seed: u64,
    trials: usize,
) -> Result<Vec<BaselineResult>> {
    check_size(x, r)?;
    if trials == 0 {
        return Err(Error::BadArguments("at least one trial is required".into()));
    }
    let mut streams = Vec::with_capacity(trials);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    for _ in 0..trials {
        streams.push(rng.clone());
        rng.jump();
    }
    streams
        .into_par_iter()
        .map(|mut rng| {
            let mut selected = sample(&mut rng, x.cols(), r).into_vec();
            selected.sort_unstable();
            evaluate(x, BaselineMethod::UniformRandom, selected)
        })
        .collect()
}

/// The first `r` columns.
pub fn first_r_select(x: &DenseMatrix, r: usize) -> Result<BaselineResult> {
    check_size(x, r)?;
    evaluate(x, BaselineMethod::FirstR, (0..r).collect())
}

/// Order statistics of condition numbers across trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub trials: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

pub fn summarize(results: &[BaselineResult]) -> Option<ConditionSummary> {
    if results.is_empty() {
        return None;
    }
    let mut conds: Vec<f64> = results.iter().map(|r| r.condition_number).collect();
    conds.sort_by(f64::total_cmp);
    let n = conds.len();
    let median = if n % 2 == 1 {
        conds[n / 2]
    } else {
        0.5 * (conds[n / 2 - 1] + conds[n / 2])
    };
    Some(ConditionSummary {
        trials: n,
        min: conds[0],
        median,
        max: conds[n - 1],
    })
}
