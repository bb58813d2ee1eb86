//! Level-spacing statistics: complex and real spacing ratios, unfolding,
//! spacing histograms and comparison with the GOE surmise.

pub mod histogram;
pub mod neighbors;
pub mod ratios;
pub mod unfold;

pub use histogram::{goe_surmise, goe_surmise_cdf, ks_distance, spacing_histogram, Histogram};
pub use ratios::{clsr, rlsr, RatioStats};
pub use unfold::{unfold_complex, unfold_real, UnfoldedSpectrum, DEFAULT_UNFOLD_ORDER};
