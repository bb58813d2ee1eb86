use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::neighbors::GridIndex;
use super::ratios::{check_points, degenerate_error, DUPLICATE_TOLERANCE};
use crate::error::{Error, Result};

/// Neighbour order used for complex unfolding unless stated otherwise.
pub const DEFAULT_UNFOLD_ORDER: usize = 10;

/// Nearest-neighbour spacings rescaled by the local mean spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfoldedSpectrum {
    pub spacings: Vec<f64>,
    /// Local density estimate per point; empty for real unfolding.
    pub densities: Vec<f64>,
}

impl UnfoldedSpectrum {
    pub fn mean_spacing(&self) -> f64 {
        crate::linalg::pairwise_sum(&self.spacings, |s| *s) / self.spacings.len() as f64
    }
}

/// Unfolds a real spectrum.
///
/// Spacing `s_i = e_{i+1} - e_i` is divided by the mean of the spacings
/// between levels `i - window ..= i + window`, truncated at the spectrum
/// edges.
pub fn unfold_real(levels: &[f64], window: usize) -> Result<UnfoldedSpectrum> {
    if window == 0 {
        return Err(Error::InvalidParameter("unfolding window must be at least 1".into()));
    }
    if levels.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: levels.len(),
        });
    }
    let mut sorted = levels.to_vec();
    sorted.sort_by(f64::total_cmp);
    let gaps: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
    let m = gaps.len();
    // prefix sums for O(1) window means
    let mut prefix = vec![0.0; m + 1];
    for (i, g) in gaps.iter().enumerate() {
        prefix[i + 1] = prefix[i] + g;
    }
    let spacings = (0..m)
        .map(|i| {
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(m);
            let mean = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
            if mean > 0.0 {
                gaps[i] / mean
            } else {
                0.0
            }
        })
        .collect();
    Ok(UnfoldedSpectrum {
        spacings,
        densities: Vec::new(),
    })
}

/// Unfolds a complex spectrum with the local density
/// `ρ_k = 3n / (π (r²_{k,n-1} + r²_{k,n} + r²_{k,n+1}))`, where `r_{k,j}` is the
/// distance from `z_k` to its `j`-th nearest neighbour. The unfolded spacing
/// of point `k` is `r_{k,1} sqrt(ρ_k)`.
pub fn unfold_complex(z: &[Complex64], order: usize) -> Result<UnfoldedSpectrum> {
    if order < 2 {
        return Err(Error::InvalidParameter(format!(
            "unfolding order must be at least 2, got {order}"
        )));
    }
    check_points(z, order + 2)?;
    let scale = z.iter().map(|p| p.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let index = GridIndex::new(z);
    let mut spacings = Vec::with_capacity(z.len());
    let mut densities = Vec::with_capacity(z.len());
    for k in 0..z.len() {
        let nn = index.nearest(k, order + 1);
        let d = nn[0].distance();
        if d <= DUPLICATE_TOLERANCE * scale {
            return Err(degenerate_error(k, nn[0].index, d));
        }
        let denom = nn[order - 2].dist_sqr + nn[order - 1].dist_sqr + nn[order].dist_sqr;
        let rho = 3.0 * order as f64 / (std::f64::consts::PI * denom);
        densities.push(rho);
        spacings.push(d * rho.sqrt());
    }
    Ok(UnfoldedSpectrum { spacings, densities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::neighbors::brute_force_nearest;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equally_spaced_levels_unfold_to_one() {
        let levels: Vec<f64> = (0..50).map(|i| 0.3 * i as f64 - 2.0).collect();
        let u = unfold_real(&levels, 4).unwrap();
        assert_eq!(u.spacings.len(), 49);
        for s in &u.spacings {
            assert_close!(*s, 1.0, 1e-12);
        }
    }

    #[test]
    fn geometric_levels_local_means() {
        // spacings 1, 2, 4, 8; level 1 averages its two adjacent gaps
        let u = unfold_real(&[1.0, 2.0, 4.0, 8.0, 16.0], 1).unwrap();
        assert_close!(u.spacings[0], 1.0, 1e-15);
        assert_close!(u.spacings[1], 2.0 / ((1.0 + 2.0) / 2.0), 1e-15);
        assert_close!(u.spacings[1], 4.0 / 3.0, 1e-15);
        assert_close!(u.spacings[3], 8.0 / ((4.0 + 8.0) / 2.0), 1e-15);
        assert!(unfold_real(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn lattice_density_matches_count_in_disk() {
        let a = 0.01;
        let side = 41;
        let z: Vec<Complex64> = (0..side * side)
            .map(|i| Complex64::new((i % side) as f64 * a, (i / side) as f64 * a))
            .collect();
        let centre = (side / 2) * side + side / 2;
        let u = unfold_complex(&z, 20).unwrap();
        // count-in-disk density at a radius well inside the lattice
        let radius = 15.0 * a;
        let inside = z.iter().filter(|p| (*p - z[centre]).norm() <= radius).count();
        let reference = inside as f64 / (std::f64::consts::PI * radius * radius);
        assert_close!(reference, 1.0 / (a * a), 0.02 / (a * a));
        let rho = u.densities[centre];
        assert!((rho - reference).abs() <= 0.1 * reference, "{rho} vs {reference}");
    }

    #[test]
    fn disk_poisson_mean_spacing() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let z: Vec<Complex64> = (0..5000)
            .map(|_| {
                Complex64::from_polar(
                    rng.random::<f64>().sqrt(),
                    rng.random::<f64>() * std::f64::consts::TAU,
                )
            })
            .collect();
        let u = unfold_complex(&z, DEFAULT_UNFOLD_ORDER).unwrap();

        // independent reference: brute-force neighbour distances on a subsample
        for k in (0..5000).step_by(97) {
            let nn = brute_force_nearest(&z, k, 11);
            let rho = 30.0 / (std::f64::consts::PI * (nn[8].dist_sqr + nn[9].dist_sqr + nn[10].dist_sqr));
            assert_close!(u.densities[k], rho, 1e-9 * rho);
            assert_close!(u.spacings[k], nn[0].distance() * rho.sqrt(), 1e-12);
        }
        // 2D Poisson: NN distance at unit density has mean 1/2
        let mean = u.mean_spacing();
        assert!((mean - 0.5).abs() <= 0.05 * 0.5, "mean unfolded spacing {mean}");
    }

    #[test]
    fn thousand_levels_with_default_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z: Vec<Complex64> = (0..2001)
            .map(|_| Complex64::new(rng.random(), rng.random()))
            .collect();
        assert!(unfold_complex(&z, DEFAULT_UNFOLD_ORDER).is_ok());
        assert!(matches!(
            unfold_complex(&z[..11], DEFAULT_UNFOLD_ORDER),
            Err(Error::TooFewPoints { needed: 12, .. })
        ));
    }
}
