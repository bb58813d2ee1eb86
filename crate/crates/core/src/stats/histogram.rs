use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized histogram: `density` integrates to one over `[edges[0], edges[bins]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub count: usize,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// Histogram of unfolded spacings on `[0, max s]`.
pub fn spacing_histogram(spacings: &[f64], bins: usize) -> Result<Histogram> {
    if spacings.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    if bins == 0 {
        return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
    }
    let top = spacings.iter().cloned().fold(0.0, f64::max);
    let top = if top > 0.0 { top } else { 1.0 };
    let width = top / bins as f64;
    let mut counts = vec![0usize; bins];
    for &s in spacings {
        let b = ((s / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let n = spacings.len() as f64;
    Ok(Histogram {
        edges: (0..=bins).map(|i| i as f64 * width).collect(),
        density: counts.iter().map(|&c| c as f64 / (n * width)).collect(),
        count: spacings.len(),
    })
}

/// Wigner surmise for the GOE, `P(s) = (π s / 2) exp(-π s² / 4)`.
pub fn goe_surmise(s: f64) -> f64 {
    0.5 * PI * s * (-0.25 * PI * s * s).exp()
}

/// Cumulative distribution of [`goe_surmise`].
pub fn goe_surmise_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        1.0 - (-0.25 * PI * s * s).exp()
    }
}

/// Kolmogorov-Smirnov distance `sup |F_n(s) - F(s)|` between the empirical
/// CDF of `samples` and `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &s) in sorted.iter().enumerate() {
        let f = cdf(s);
        sup = sup.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    Ok(sup)
}
