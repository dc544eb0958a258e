//! Deterministic synthetic matrices with unit-norm columns.
//!
//! All randomness comes from `Xoshiro256++` seeded through SplitMix64
//! (`rand_xoshiro`'s `seed_from_u64`). Gaussian samples use the Box-Muller
//! transform, consuming two uniforms per pair and emitting the cosine
//! branch first. Columns are filled in order, entry by entry, so a spec
//! reproduces the same matrix bit for bit on every platform.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// First `p` standard basis vectors of `R^n` (`n >= p`).
    Identity,
    /// Independent uniformly random unit vectors.
    RandomSphere,
    /// `p / n` independent random orthonormal bases side by side.
    UnionOrthobases,
    /// `distinct` random unit columns repeated cyclically.
    DuplicatedColumns,
    /// `e_1` and `cos(theta) e_1 + sin(theta) e_2` followed by random unit columns.
    NearParallelPair,
    /// Random columns pulled towards one shared direction.
    Spiked,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Identity,
        Family::RandomSphere,
        Family::UnionOrthobases,
        Family::DuplicatedColumns,
        Family::NearParallelPair,
        Family::Spiked,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Identity => "identity",
            Family::RandomSphere => "random_sphere",
            Family::UnionOrthobases => "union_orthobases",
            Family::DuplicatedColumns => "duplicated_columns",
            Family::NearParallelPair => "near_parallel_pair",
            Family::Spiked => "spiked",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::BadSpec(format!("unknown family `{s}`")))
    }
}

/// Family-specific knobs; unused ones are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    /// Angle between the pair in `near_parallel_pair` (radians).
    pub theta: f64,
    /// Number of distinct columns in `duplicated_columns`.
    pub distinct: usize,
    /// Weight of the shared direction in `spiked`.
    pub spike: f64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        Self {
            theta: 0.0,
            distinct: 1,
            spike: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    #[serde(default)]
    pub params: FamilyParams,
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize, p: usize, seed: u64) -> Self {
        Self {
            family,
            n,
            p,
            seed,
            params: FamilyParams::default(),
        }
    }

    pub fn with_params(mut self, params: FamilyParams) -> Self {
        self.params = params;
        self
    }
}

/// Standard normal stream (Box-Muller over Xoshiro256++).
pub struct GaussianStream {
    rng: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        self.spare = Some(radius * s);
        radius * c
    }

    pub fn unit_vector(&mut self, n: usize) -> Vec<f64> {
        loop {
            let mut v: Vec<f64> = (0..n).map(|_| self.sample()).collect();
            let nrm = norm(&v);
            if nrm > 0.0 {
                v.iter_mut().for_each(|e| *e /= nrm);
                return v;
            }
        }
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<DenseMatrix> {
    let (n, p) = (spec.n, spec.p);
    if n == 0 || p == 0 {
        return Err(Error::BadSpec(format!(
            "dimensions must be positive (n={n}, p={p})"
        )));
    }
    let mut g = GaussianStream::new(spec.seed);
    let columns: Vec<Vec<f64>> = match spec.family {
        Family::Identity => {
            if n < p {
                return Err(Error::BadSpec(format!(
                    "identity needs n >= p (n={n}, p={p})"
                )));
            }
            (0..p)
                .map(|j| {
                    let mut e = vec![0.0; n];
                    e[j] = 1.0;
                    e
                })
                .collect()
        }
        Family::RandomSphere => (0..p).map(|_| g.unit_vector(n)).collect(),
        Family::UnionOrthobases => {
            if p % n != 0 {
                return Err(Error::BadSpec(format!(
                    "union_orthobases needs p divisible by n (n={n}, p={p})"
                )));
            }
            let mut cols = Vec::with_capacity(p);
            for _ in 0..p / n {
                cols.extend(random_orthobasis(&mut g, n));
            }
            cols
        }
        Family::DuplicatedColumns => {
            let distinct = spec.params.distinct;
            if distinct == 0 || distinct > p {
                return Err(Error::BadSpec(format!(
                    "duplicated_columns needs 1 <= distinct <= p (distinct={distinct}, p={p})"
                )));
            }
            let base: Vec<Vec<f64>> = (0..distinct).map(|_| g.unit_vector(n)).collect();
            (0..p).map(|j| base[j % distinct].clone()).collect()
        }
        Family::NearParallelPair => {
            if n < 2 || p < 2 {
                return Err(Error::BadSpec(format!(
                    "near_parallel_pair needs n >= 2 and p >= 2 (n={n}, p={p})"
                )));
            }
            let theta = spec.params.theta;
            if !theta.is_finite() {
                return Err(Error::BadSpec("theta must be finite".into()));
            }
            let mut first = vec![0.0; n];
            first[0] = 1.0;
            let mut second = vec![0.0; n];
            second[0] = theta.cos();
            second[1] = theta.sin();
            let mut cols = vec![first, second];
            cols.extend((2..p).map(|_| g.unit_vector(n)));
            cols
        }
        Family::Spiked => {
            let spike = spec.params.spike;
            if !spike.is_finite() || spike < 0.0 {
                return Err(Error::BadSpec(format!(
                    "spike strength must be >= 0, got {spike}"
                )));
            }
            let u = g.unit_vector(n);
            (0..p)
                .map(|_| {
                    let w = g.unit_vector(n);
                    let mut v: Vec<f64> = w.iter().zip(&u).map(|(a, b)| a + spike * b).collect();
                    let mut nrm = norm(&v);
                    // w == -spike * u is measure zero; fall back to w
                    if nrm <= 1e-12 {
                        v = w;
                        nrm = 1.0;
                    }
                    v.iter_mut().for_each(|e| *e /= nrm);
                    v
                })
                .collect()
        }
    };
    DenseMatrix::from_columns(&columns)
}

/// Orthonormal basis from Gaussian columns via twice-iterated modified
/// Gram-Schmidt.
fn random_orthobasis(g: &mut GaussianStream, n: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| g.sample()).collect();
        for _ in 0..2 {
            for q in &basis {
                let proj: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(e, qe)| *e -= proj * qe);
            }
        }
        let nrm = norm(&v);
        if nrm > 1e-8 {
            v.iter_mut().for_each(|e| *e /= nrm);
            basis.push(v);
        }
    }
    basis
}
