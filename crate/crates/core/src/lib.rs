//! Spectral statistics and out-of-time-order correlators for the
//! PT-symmetric quantum kicked rotor.
//!
//! The crate builds the one-period Floquet operator of a kicked rotor with a
//! complex kick `K (cos θ + iλ sin θ) / sqrt(1 + λ²)`, diagonalizes it, and
//! measures level-spacing ratios on the resulting complex quasienergies. It
//! also evolves Gaussian wavepackets matrix-free to compute OTOCs, their
//! norm-corrected counterparts and Lyapunov exponents, and orchestrates
//! `(K, λ)` phase-diagram sweeps with checkpointing.

#[cfg(test)]
macro_rules! assert_close {
    ($a:expr, $b:expr, $tol:expr) => {{
        let (a, b, tol): (f64, f64, f64) = ($a, $b, $tol);
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }};
}

pub mod error;
pub mod floquet;
pub mod io;
pub mod linalg;
pub mod model;
pub mod otoc;
pub mod rmt;
pub mod spectral;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
pub use floquet::{FloquetDense, SplitStepApplicator};
pub use model::{RotorParams, StateVector, WavepacketSpec};
pub use otoc::OtocSeries;
pub use spectral::QuasienergySpectrum;
pub use stats::RatioStats;
