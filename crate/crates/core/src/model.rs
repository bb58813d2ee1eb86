//! Rotor parameters, the normalized kick potential, Gaussian wavepackets and
//! the random mass perturbation used to lift spectral degeneracies.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical and numerical parameters of the PT-symmetric kicked rotor.
///
/// The momentum basis is `k = -N, ..., N-1` with `N = half_size`, so every
/// operator acts on a space of dimension `2N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotorParams {
    /// Kicking strength `K`.
    #[serde(rename = "K")]
    pub kick_strength: f64,
    /// Non-Hermiticity `λ`; zero gives the Hermitian rotor.
    pub lambda: f64,
    pub hbar_eff: f64,
    /// Moment of inertia `m`.
    pub mass: f64,
    /// Kick period `τ`.
    pub tau: f64,
    pub half_size: usize,
    /// Upper bound of the uniform mass perturbation.
    pub jitter_amplitude: f64,
    pub seed: u64,
}

impl Default for RotorParams {
    fn default() -> Self {
        Self {
            kick_strength: 1.0,
            lambda: 0.0,
            hbar_eff: 0.2,
            mass: 1.0,
            tau: 1.0,
            half_size: 2001,
            jitter_amplitude: 1e-3,
            seed: 0,
        }
    }
}

impl RotorParams {
    pub fn new(kick_strength: f64, lambda: f64, hbar_eff: f64, half_size: usize) -> Result<Self> {
        let params = Self {
            kick_strength,
            lambda,
            hbar_eff,
            half_size,
            ..Self::default()
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_jitter(mut self, amplitude: f64) -> Self {
        self.jitter_amplitude = amplitude;
        self
    }

    /// Dimension `2N` of the truncated momentum space.
    pub fn dim(&self) -> usize {
        2 * self.half_size
    }

    /// Momentum index stored at array position `index`.
    pub fn momentum_index(&self, index: usize) -> i64 {
        index as i64 - self.half_size as i64
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.kick_strength,
            self.lambda,
            self.hbar_eff,
            self.mass,
            self.tau,
            self.jitter_amplitude,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        if self.hbar_eff <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "hbar_eff must be positive, got {}",
                self.hbar_eff
            )));
        }
        if self.half_size < 2 {
            return Err(Error::InvalidParameter(format!(
                "half_size must be at least 2, got {}",
                self.half_size
            )));
        }
        if self.jitter_amplitude < 0.0 {
            return Err(Error::InvalidParameter(
                "jitter_amplitude must be non-negative".into(),
            ));
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        if self.kick_strength < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "K must be non-negative, got {}",
                self.kick_strength
            )));
        }
        if self.mass <= 0.0 || self.tau <= 0.0 {
            return Err(Error::InvalidParameter(
                "mass and tau must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Gaussian wavepacket centred on momentum index `k0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavepacketSpec {
    pub k0: i64,
    pub sigma: f64,
}

impl Default for WavepacketSpec {
    fn default() -> Self {
        Self { k0: 0, sigma: 4.0 }
    }
}

impl WavepacketSpec {
    pub fn validate(&self, params: &RotorParams) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        let p0 = params.hbar_eff * self.k0 as f64;
        if p0.abs() > PI {
            return Err(Error::InvalidParameter(format!(
                "p0 = hbar_eff*k0 = {p0} lies outside [-pi, pi]"
            )));
        }
        Ok(())
    }
}

/// Amplitudes in the momentum basis, position `i` holding `k = i - N`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(pub Vec<Complex64>);

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); dim])
    }

    /// Momentum eigenstate `|k⟩`.
    pub fn basis(params: &RotorParams, k: i64) -> Result<Self> {
        let index = k + params.half_size as i64;
        if index < 0 || index >= params.dim() as i64 {
            return Err(Error::InvalidParameter(format!(
                "momentum index {k} outside the basis"
            )));
        }
        let mut state = Self::zeros(params.dim());
        state.0[index as usize] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    /// `⟨ψ|ψ⟩`.
    pub fn norm_sqr(&self) -> f64 {
        crate::linalg::pairwise_sum(&self.0, |a| a.norm_sqr())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

/// Normalized complex kick potential `K (cos θ + iλ sin θ) / sqrt(1 + λ²)`.
pub fn potential(theta: f64, params: &RotorParams) -> Complex64 {
    let scale = params.kick_strength / (1.0 + params.lambda * params.lambda).sqrt();
    Complex64::new(scale * theta.cos(), scale * params.lambda * theta.sin())
}

/// Gaussian wavepacket `a_k ∝ exp(-ħ²(k - k0)² / 2σ²)`, truncated to the
/// basis and normalized to unit norm.
pub fn gaussian_state(spec: &WavepacketSpec, params: &RotorParams) -> Result<StateVector> {
    params.validate()?;
    spec.validate(params)?;
    let h = params.hbar_eff;
    let mut amps: Vec<Complex64> = (0..params.dim())
        .map(|i| {
            let dk = (params.momentum_index(i) - spec.k0) as f64;
            Complex64::new((-(h * h) * dk * dk / (2.0 * spec.sigma * spec.sigma)).exp(), 0.0)
        })
        .collect();
    let occupied = amps.iter().filter(|a| a.re > 0.0).count();
    if occupied <= 1 {
        log::warn!(
            "wavepacket with sigma = {} occupies a single momentum state",
            spec.sigma
        );
    }
    let norm = crate::linalg::pairwise_sum(&amps, |a| a.norm_sqr()).sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    Ok(StateVector(amps))
}

/// Deterministic ChaCha8 generator for substream `stream` of `seed`.
///
/// Every consumer of randomness (one sweep cell, one ensemble trial) draws
/// from its own stream so results do not depend on scheduling.
pub fn substream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mass perturbations `Δm_k`, i.i.d. uniform on `[0, jitter_amplitude]`.
pub fn sample_mass_jitter(params: &RotorParams) -> Vec<f64> {
    let n = params.dim();
    if params.jitter_amplitude == 0.0 {
        return vec![0.0; n];
    }
    let mut rng = substream_rng(params.seed, 0);
    (0..n)
        .map(|_| rng.random_range(0.0..=params.jitter_amplitude))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: f64, lambda: f64) -> RotorParams {
        RotorParams {
            kick_strength: k,
            lambda,
            ..RotorParams::default()
        }
    }

    #[test]
    fn potential_examples() {
        let v = potential(0.0, &params(2.0, 0.0));
        assert_close!(v.re, 2.0, 1e-15);
        assert_close!(v.im, 0.0, 1e-15);

        let v = potential(PI / 2.0, &params(1.0, 1.0));
        assert_close!(v.re, 0.0, 1e-15);
        assert_close!(v.im, 0.5f64.sqrt(), 1e-15);

        let v = potential(PI / 2.0, &params(2.0, 1e6));
        assert!((v.im - 2.0).abs() / 2.0 < 1e-12);
        assert!(v.re.abs() < 1e-12);
    }

    #[test]
    fn potential_bounded_and_pt_symmetric() {
        for &(k, lambda) in &[(0.5, 0.0), (3.0, 0.3), (30.0, 5.0), (1.0, 1e4)] {
            let p = params(k, lambda);
            for j in 0..2000 {
                let theta = 2.0 * PI * j as f64 / 2000.0;
                let v = potential(theta, &p);
                assert!(v.norm() <= k * (1.0 + 1e-14));
                let mirrored = potential(-theta, &p);
                assert_close!(mirrored.re, v.re, 1e-14 * k);
                assert_close!(mirrored.im, -v.im, 1e-14 * k);
            }
        }
    }

    #[test]
    fn gaussian_state_normalized_and_symmetric() {
        for &(k0, sigma, n) in &[(0, 4.0, 64), (5, 2.0, 32), (-10, 0.5, 16), (3, 40.0, 128)] {
            let p = RotorParams {
                half_size: n,
                ..RotorParams::default()
            };
            let spec = WavepacketSpec { k0, sigma };
            let psi = gaussian_state(&spec, &p).unwrap();
            assert_eq!(psi.len(), 2 * n);
            assert_close!(psi.norm_sqr(), 1.0, 1e-12);
            let peak = psi
                .amplitudes()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.re.partial_cmp(&b.1.re).unwrap())
                .unwrap()
                .0;
            assert_eq!(p.momentum_index(peak), k0);
            assert!(psi.amplitudes().iter().all(|a| a.im == 0.0 && a.re > 0.0));
        }

        let p = RotorParams {
            half_size: 64,
            ..RotorParams::default()
        };
        let psi = gaussian_state(&WavepacketSpec::default(), &p).unwrap();
        let a = psi.amplitudes();
        for j in 1..64 {
            assert_close!(a[64 + j].re, a[64 - j].re, 1e-15);
        }
        // hbar = 0.2, sigma = 4: a_1/a_0 = exp(-0.04/32)
        assert_close!(a[65].re / a[64].re, (-0.04f64 / 32.0).exp(), 1e-14);
        assert_close!(a[65].re / a[64].re, 0.99875, 1e-5);
    }

    #[test]
    fn wavepacket_rejects_bad_input() {
        let p = RotorParams::default();
        assert!(gaussian_state(&WavepacketSpec { k0: 0, sigma: 0.0 }, &p).is_err());
        // p0 = 0.2 * 16 > pi
        assert!(gaussian_state(&WavepacketSpec { k0: 16, sigma: 4.0 }, &p).is_err());
    }

    #[test]
    fn jitter_range_and_determinism() {
        let p = RotorParams {
            half_size: 500,
            seed: 42,
            ..RotorParams::default()
        };
        let a = sample_mass_jitter(&p);
        assert_eq!(a.len(), 1000);
        assert!(a.iter().all(|&x| (0.0..=1e-3).contains(&x)));
        assert_eq!(a, sample_mass_jitter(&p));
        assert_ne!(a, sample_mass_jitter(&p.with_seed(43)));

        let zero = sample_mass_jitter(&p.with_jitter(0.0));
        assert!(zero.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn params_validation() {
        assert!(RotorParams::new(1.0, 0.0, 0.0, 10).is_err());
        assert!(RotorParams::new(1.0, -0.1, 0.2, 10).is_err());
        assert!(RotorParams::new(1.0, 0.1, 0.2, 1).is_err());
        assert!(RotorParams::new(-1.0, 0.1, 0.2, 10).is_err());
        assert!(RotorParams::default().with_jitter(-1.0).validate().is_err());
        assert!(RotorParams::new(1.0, 0.1, 0.2, 10).is_ok());
    }
}
