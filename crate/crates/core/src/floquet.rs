//! One-period Floquet operator `F = D_kin U_kick D_kin`.
//!
//! `D_kin` is the half-period free propagator, diagonal in momentum:
//! `exp(-i ħ k² τ / (4 (m + Δm_k)))`. `U_kick = exp(-i V(θ)/ħ)` is diagonal in
//! angle; its momentum-basis elements come from quadrature on a uniform grid
//! of `N_θ` angles, which makes the dense and the FFT-based forms agree to
//! rounding.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, EigenBackend};
use crate::model::{potential, RotorParams, StateVector};

/// Largest admissible `K λ / (sqrt(1 + λ²) ħ)`; `exp` overflows just above 709.
pub const KICK_EXPONENT_LIMIT: f64 = 700.0;

fn check_jitter(params: &RotorParams, jitter: &[f64]) -> Result<()> {
    params.validate()?;
    if jitter.len() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            actual: jitter.len(),
        });
    }
    Ok(())
}

/// Diagonal of the half-period kinetic propagator.
pub fn kinetic_phases(params: &RotorParams, jitter: &[f64]) -> Result<Vec<Complex64>> {
    check_jitter(params, jitter)?;
    Ok(jitter
        .iter()
        .enumerate()
        .map(|(i, dm)| {
            let k = params.momentum_index(i) as f64;
            let phase = -params.hbar_eff * k * k * params.tau / (4.0 * (params.mass + dm));
            Complex64::from_polar(1.0, phase)
        })
        .collect())
}

/// Kick propagator `exp(-i V(θ_j)/ħ)` on `θ_j = 2πj/grid_size`.
pub fn kick_phases(params: &RotorParams, grid_size: usize) -> Result<Vec<Complex64>> {
    params.validate()?;
    if grid_size < params.dim() {
        return Err(Error::InvalidParameter(format!(
            "angle grid of {grid_size} points is smaller than the basis dimension {}",
            params.dim()
        )));
    }
    let lambda = params.lambda;
    let exponent = params.kick_strength * lambda / ((1.0 + lambda * lambda).sqrt() * params.hbar_eff);
    if exponent > KICK_EXPONENT_LIMIT {
        return Err(Error::KickOverflow {
            exponent,
            limit: KICK_EXPONENT_LIMIT,
        });
    }
    let minus_i_over_h = Complex64::new(0.0, -1.0 / params.hbar_eff);
    Ok((0..grid_size)
        .map(|j| {
            let theta = 2.0 * PI * j as f64 / grid_size as f64;
            (minus_i_over_h * potential(theta, params)).exp()
        })
        .collect())
}

/// Angle-grid size used for a given basis; equal to the basis dimension.
pub fn default_grid_size(params: &RotorParams) -> usize {
    params.dim()
}

/// Momentum-basis kick matrix `(U_kick)_{k'k} = c[(k' - k) mod N_θ]`.
pub fn kick_matrix(params: &RotorParams, grid_size: usize) -> Result<CMatrix> {
    let kick = kick_phases(params, grid_size)?;
    let coeffs = kick_fourier_coefficients(&kick);
    let n = params.dim();
    let ng = grid_size as i64;
    Ok(Mat::from_fn(n, n, |row, col| {
        let m = (row as i64 - col as i64).rem_euclid(ng);
        coeffs[m as usize]
    }))
}

/// `c[m] = (1/N_θ) Σ_j kick_j e^{-i m θ_j}`.
fn kick_fourier_coefficients(kick: &[Complex64]) -> Vec<Complex64> {
    let mut buf = kick.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    let scale = 1.0 / kick.len() as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Dense Floquet matrix in the momentum basis.
#[derive(Debug, Clone)]
pub struct FloquetDense {
    pub matrix: CMatrix,
    pub params: RotorParams,
    pub jitter: Vec<f64>,
}

/// Builds `F = D_kin U_kick D_kin` as a dense `2N × 2N` matrix.
pub fn build_dense(params: &RotorParams, jitter: &[f64]) -> Result<FloquetDense> {
    let kinetic = kinetic_phases(params, jitter)?;
    let grid = default_grid_size(params);
    let kick = kick_phases(params, grid)?;
    let coeffs = kick_fourier_coefficients(&kick);
    let n = params.dim();
    let ng = grid as i64;
    let matrix = Mat::from_fn(n, n, |row, col| {
        let m = (row as i64 - col as i64).rem_euclid(ng);
        kinetic[row] * coeffs[m as usize] * kinetic[col]
    });
    Ok(FloquetDense {
        matrix,
        params: *params,
        jitter: jitter.to_vec(),
    })
}

impl FloquetDense {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self, backend: &dyn EigenBackend) -> Result<Vec<Complex64>> {
        backend.eigenvalues(&self.matrix)
    }

    /// Dense matrix-vector product, for validation at small sizes.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        let n = self.dim();
        if state.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: state.len(),
            });
        }
        let out = (0..n)
            .map(|i| (0..n).map(|j| self.matrix[(i, j)] * state.0[j]).sum())
            .collect();
        Ok(StateVector(out))
    }
}

/// Matrix-free Floquet operator: diagonal multiplies and FFT basis changes.
#[derive(Clone)]
pub struct SplitStepApplicator {
    pub kinetic_phases: Vec<Complex64>,
    pub kick_phases: Vec<Complex64>,
    pub grid_size: usize,
    pub params: RotorParams,
    pub jitter: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SplitStepApplicator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SplitStepApplicator")
            .field("grid_size", &self.grid_size)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl SplitStepApplicator {
    pub fn new(params: &RotorParams, jitter: &[f64]) -> Result<Self> {
        Self::with_grid(params, jitter, default_grid_size(params))
    }

    pub fn with_grid(params: &RotorParams, jitter: &[f64], grid_size: usize) -> Result<Self> {
        let kinetic = kinetic_phases(params, jitter)?;
        let kick = kick_phases(params, grid_size)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            kinetic_phases: kinetic,
            kick_phases: kick,
            grid_size,
            params: *params,
            jitter: jitter.to_vec(),
            forward: planner.plan_fft_forward(grid_size),
            inverse: planner.plan_fft_inverse(grid_size),
        })
    }

    pub fn dim(&self) -> usize {
        self.kinetic_phases.len()
    }

    /// `F|ψ⟩`, or `F†|ψ⟩` when `adjoint` is set.
    pub fn apply(&self, state: &StateVector, adjoint: bool) -> Result<StateVector> {
        let mut out = state.clone();
        self.apply_in_place(&mut out.0, adjoint)?;
        Ok(out)
    }

    pub fn apply_in_place(&self, amps: &mut [Complex64], adjoint: bool) -> Result<()> {
        let n = self.dim();
        if amps.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: amps.len(),
            });
        }
        let phase = |z: Complex64| if adjoint { z.conj() } else { z };
        let half = self.params.half_size as i64;
        let ng = self.grid_size as i64;
        let slot = |i: usize| (i as i64 - half).rem_euclid(ng) as usize;

        let zero = Complex64::new(0.0, 0.0);
        let mut grid = vec![zero; self.grid_size];
        let mut scratch = vec![zero; self.forward.get_inplace_scratch_len()];
        for (i, (a, d)) in amps.iter().zip(&self.kinetic_phases).enumerate() {
            grid[slot(i)] = a * phase(*d);
        }
        self.inverse.process_with_scratch(&mut grid, &mut scratch);
        for (g, kick) in grid.iter_mut().zip(&self.kick_phases) {
            *g *= phase(*kick);
        }
        self.forward.process_with_scratch(&mut grid, &mut scratch);
        let scale = 1.0 / self.grid_size as f64;
        for (i, (a, d)) in amps.iter_mut().zip(&self.kinetic_phases).enumerate() {
            *a = grid[slot(i)] * scale * phase(*d);
        }
        Ok(())
    }
}

/// Fraction of `⟨ψ|ψ⟩` carried by the outermost `width` momentum states on
/// each side of the basis.
pub fn edge_occupation(state: &StateVector, width: usize) -> f64 {
    let n = state.len();
    let width = width.min(n / 2);
    let total = state.norm_sqr();
    if total == 0.0 {
        return 0.0;
    }
    let a = state.amplitudes();
    let edge: f64 = a[..width]
        .iter()
        .chain(&a[n - width..])
        .map(|z| z.norm_sqr())
        .sum();
    edge / total
}
