use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::neighbors::GridIndex;
use crate::error::{Error, Result};

/// Points closer than this fraction of the spectrum's extent count as equal.
pub const DUPLICATE_TOLERANCE: f64 = 1e-13;

/// Complex spacing ratios `ξ_γ = (z_NN - z_γ) / (z_NNN - z_γ)` and their
/// aggregates `⟨r⟩ = ⟨|ξ|⟩` and `-⟨cos θ⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    #[serde(skip)]
    pub xis: Vec<Complex64>,
    pub mean_r: f64,
    pub mean_neg_cos: f64,
    pub count: usize,
}

fn extent(z: &[Complex64]) -> f64 {
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in z {
        lo_x = lo_x.min(p.re);
        hi_x = hi_x.max(p.re);
        lo_y = lo_y.min(p.im);
        hi_y = hi_y.max(p.im);
    }
    (hi_x - lo_x).hypot(hi_y - lo_y)
}

pub(crate) fn check_points(z: &[Complex64], needed: usize) -> Result<()> {
    if z.len() < needed {
        return Err(Error::TooFewPoints {
            needed,
            got: z.len(),
        });
    }
    if z.iter().any(|p| !(p.re.is_finite() && p.im.is_finite())) {
        return Err(Error::InvalidParameter("non-finite point in spectrum".into()));
    }
    Ok(())
}

pub(crate) fn degenerate_error(first: usize, second: usize, dist: f64) -> Error {
    let (first, second) = (first.min(second), first.max(second));
    Error::DegenerateSpectrum {
        first,
        second,
        distance: dist,
    }
}

/// Complex level-spacing ratio over every point of `z`, edge points included.
///
/// Nearest and next-nearest neighbours use Euclidean distance in the complex
/// plane.
pub fn clsr(z: &[Complex64]) -> Result<RatioStats> {
    check_points(z, 3)?;
    let scale = extent(z);
    let min_dist = DUPLICATE_TOLERANCE * scale;
    let index = GridIndex::new(z);
    let mut xis = Vec::with_capacity(z.len());
    for (g, zg) in z.iter().enumerate() {
        let nn = index.nearest(g, 2);
        let d = nn[0].distance();
        if d <= min_dist {
            return Err(degenerate_error(g, nn[0].index, d));
        }
        xis.push((z[nn[0].index] - zg) / (z[nn[1].index] - zg));
    }
    let count = xis.len();
    let mean_r = crate::linalg::pairwise_sum(&xis, |x| x.norm()) / count as f64;
    let mean_cos = crate::linalg::pairwise_sum(&xis, |x| x.re / x.norm()) / count as f64;
    Ok(RatioStats {
        xis,
        mean_r,
        mean_neg_cos: -mean_cos,
        count,
    })
}

/// Real level-spacing ratio `⟨min(s_β, s_β+1) / max(s_β, s_β+1)⟩` over
/// consecutive gaps of the sorted levels.
pub fn rlsr(levels: &[f64]) -> Result<f64> {
    if levels.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: levels.len(),
        });
    }
    if levels.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite level".into()));
    }
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| levels[a].total_cmp(&levels[b]).then(a.cmp(&b)));
    let gaps: Vec<f64> = order.windows(2).map(|w| levels[w[1]] - levels[w[0]]).collect();
    if let Some(pos) = gaps.iter().position(|&g| g == 0.0) {
        return Err(degenerate_error(order[pos], order[pos + 1], 0.0));
    }
    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[0].min(w[1]) / w[0].max(w[1])).collect();
    Ok(crate::linalg::pairwise_sum(&ratios, |r| *r) / ratios.len() as f64)
}
