//! Random-matrix baselines for complex and real spacing ratios.
//!
//! Every real entry is an independent standard normal. Symmetry classes are
//! imposed by averaging a matrix with its images under the class's symmetry
//! group, e.g. `(A + Aᵀ)/2` for AI†. Scale is irrelevant to spacing ratios so
//! no `1/sqrt(n)` normalization is applied.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, EigenBackend};
use crate::model::substream_rng;
use crate::stats::{clsr, RatioStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    /// Complex Ginibre: no symmetry.
    GinUE,
    /// Real Ginibre.
    GinOE,
    /// Complex symmetric, `M = Mᵀ`.
    AIdagger,
    /// Complex, commuting with `PT` where `P` reverses indices: `M = P M̄ P`.
    PTsymmetric,
    /// Real symmetric.
    GOE,
    /// Independent uniform levels on an interval.
    PoissonReal,
    /// Independent uniform points in the unit disk.
    Poisson2D,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 7] = [
        Self::GinUE,
        Self::GinOE,
        Self::AIdagger,
        Self::PTsymmetric,
        Self::GOE,
        Self::PoissonReal,
        Self::Poisson2D,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::GinUE => "ginue",
            Self::GinOE => "ginoe",
            Self::AIdagger => "aidagger",
            Self::PTsymmetric => "ptsymmetric",
            Self::GOE => "goe",
            Self::PoissonReal => "poissonreal",
            Self::Poisson2D => "poisson2d",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == key || (key == "ai†" && *k == Self::AIdagger) || (key == "pt" && *k == Self::PTsymmetric))
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown ensemble '{s}'; expected one of ginue, ginoe, aidagger, ptsymmetric, goe, poissonreal, poisson2d"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, dim: usize, trials: usize, seed: u64) -> Result<Self> {
        let spec = Self { kind, dim, trials, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 8 {
            return Err(Error::InvalidParameter(format!(
                "ensemble dimension must be at least 8, got {}",
                self.dim
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("at least one trial is required".into()));
        }
        Ok(())
    }
}

/// Mean and sample standard deviation of the ratio statistics over trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub kind: EnsembleKind,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub mean_r: f64,
    pub std_r: f64,
    pub mean_neg_cos: f64,
    pub std_neg_cos: f64,
    #[serde(skip)]
    pub per_trial: Vec<RatioStats>,
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng))
}

/// One sample of the ensemble. Poisson kinds return a diagonal matrix
/// holding the sampled points.
pub fn sample_matrix(spec: &EnsembleSpec, trial_index: usize) -> Result<CMatrix> {
    spec.validate()?;
    let n = spec.dim;
    let mut rng = substream_rng(spec.seed, trial_index as u64);
    let matrix = match spec.kind {
        EnsembleKind::GinUE => Mat::from_fn(n, n, |_, _| complex_gaussian(&mut rng)),
        EnsembleKind::GinOE => Mat::from_fn(n, n, |_, _| Complex64::new(gaussian(&mut rng), 0.0)),
        EnsembleKind::AIdagger => {
            let a = Mat::from_fn(n, n, |_, _| complex_gaussian(&mut rng));
            Mat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)]) * 0.5)
        }
        EnsembleKind::PTsymmetric => {
            let a = Mat::from_fn(n, n, |_, _| complex_gaussian(&mut rng));
            Mat::from_fn(n, n, |i, j| (a[(i, j)] + a[(n - 1 - i, n - 1 - j)].conj()) * 0.5)
        }
        EnsembleKind::GOE => {
            let a = Mat::from_fn(n, n, |_, _| gaussian(&mut rng));
            Mat::from_fn(n, n, |i, j| Complex64::new((a[(i, j)] + a[(j, i)]) * 0.5, 0.0))
        }
        EnsembleKind::PoissonReal | EnsembleKind::Poisson2D => {
            let points = sample_points(spec.kind, n, &mut rng);
            Mat::from_fn(n, n, |i, j| if i == j { points[i] } else { Complex64::new(0.0, 0.0) })
        }
    };
    Ok(matrix)
}

fn sample_points(kind: EnsembleKind, n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    match kind {
        EnsembleKind::PoissonReal => (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() * n as f64, 0.0))
            .collect(),
        _ => (0..n)
            .map(|_| Complex64::from_polar(rng.random::<f64>().sqrt(), rng.random::<f64>() * TAU))
            .collect(),
    }
}

/// Eigenvalues of one sample. Real-structured classes use the matching real
/// solver so real eigenvalues and conjugate pairs come out exact.
pub fn sample_spectrum(
    spec: &EnsembleSpec,
    trial_index: usize,
    backend: &dyn EigenBackend,
) -> Result<Vec<Complex64>> {
    spec.validate()?;
    match spec.kind {
        EnsembleKind::PoissonReal | EnsembleKind::Poisson2D => {
            let mut rng = substream_rng(spec.seed, trial_index as u64);
            Ok(sample_points(spec.kind, spec.dim, &mut rng))
        }
        EnsembleKind::GinOE => {
            let m = sample_matrix(spec, trial_index)?;
            let real = Mat::from_fn(spec.dim, spec.dim, |i, j| m[(i, j)].re);
            real.eigenvalues().map_err(|_| Error::EigenNonConvergence {
                backend: "faer",
                index: None,
            })
        }
        EnsembleKind::GOE => {
            let m = sample_matrix(spec, trial_index)?;
            let real = Mat::from_fn(spec.dim, spec.dim, |i, j| m[(i, j)].re);
            let ev = real
                .self_adjoint_eigenvalues(Side::Lower)
                .map_err(|_| Error::EigenNonConvergence {
                    backend: "faer",
                    index: None,
                })?;
            Ok(ev.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
        }
        _ => backend.eigenvalues(&sample_matrix(spec, trial_index)?),
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// CLSR statistics across `spec.trials` independent samples.
pub fn ensemble_clsr(spec: &EnsembleSpec, backend: &dyn EigenBackend) -> Result<EnsembleResult> {
    spec.validate()?;
    let per_trial = (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            sample_spectrum(spec, t, backend)
                .and_then(|z| clsr(&z))
                .map_err(|e| Error::Trial {
                    trial: t,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let rs: Vec<f64> = per_trial.iter().map(|s| s.mean_r).collect();
    let cs: Vec<f64> = per_trial.iter().map(|s| s.mean_neg_cos).collect();
    let (mean_r, std_r) = mean_std(&rs);
    let (mean_neg_cos, std_neg_cos) = mean_std(&cs);
    Ok(EnsembleResult {
        kind: spec.kind,
        dim: spec.dim,
        trials: spec.trials,
        seed: spec.seed,
        mean_r,
        std_r,
        mean_neg_cos,
        std_neg_cos,
        per_trial,
    })
}
