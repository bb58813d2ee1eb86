//! Floquet eigenvalues, complex quasienergies and PT-breaking detection.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{build_dense, FloquetDense};
use crate::linalg::EigenBackend;
use crate::model::{sample_mass_jitter, RotorParams};

/// `α` above which PT symmetry counts as broken. Rounding noise in `α` from
/// dense eigensolves sits near `1e-12`.
pub const PT_BREAKING_THRESHOLD: f64 = 1e-10;

/// Quasienergies `ε = i ln μ` of a Floquet operator.
///
/// `Re ε = -arg μ` lies in `[-π, π)` and `Im ε = ln |μ|`, so a state with
/// quasienergy `ε` grows as `e^{t Im ε}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasienergySpectrum {
    pub epsilons: Vec<Complex64>,
    pub mus: Vec<Complex64>,
    /// `max Im ε`.
    pub alpha: f64,
}

impl QuasienergySpectrum {
    pub fn len(&self) -> usize {
        self.epsilons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epsilons.is_empty()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.epsilons.iter().map(|e| e.re).collect()
    }
}

pub fn eigenvalues(floquet: &FloquetDense, backend: &dyn EigenBackend) -> Result<Vec<Complex64>> {
    floquet.eigenvalues(backend)
}

pub fn quasienergies(mus: &[Complex64]) -> Result<QuasienergySpectrum> {
    let mut epsilons = Vec::with_capacity(mus.len());
    for (index, mu) in mus.iter().enumerate() {
        if mu.norm() == 0.0 {
            return Err(Error::ZeroEigenvalue { index });
        }
        epsilons.push(quasienergy(*mu));
    }
    let alpha = epsilons
        .iter()
        .map(|e| e.im)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(QuasienergySpectrum {
        epsilons,
        mus: mus.to_vec(),
        alpha,
    })
}

fn quasienergy(mu: Complex64) -> Complex64 {
    let arg = mu.arg();
    // arg ∈ (-π, π] so -arg ∈ [-π, π)
    Complex64::new(-arg, mu.norm().ln())
}

pub fn pt_broken(spectrum: &QuasienergySpectrum, threshold: f64) -> bool {
    spectrum.alpha > threshold
}

/// Jitter, build, diagonalize: the full spectrum of one rotor configuration.
pub fn rotor_spectrum(params: &RotorParams, backend: &dyn EigenBackend) -> Result<QuasienergySpectrum> {
    let jitter = sample_mass_jitter(params);
    let floquet = build_dense(params, &jitter)?;
    let mus = floquet.eigenvalues(backend)?;
    quasienergies(&mus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::kinetic_phases;
    use crate::linalg::{FaerBackend, HessenbergQr};

    fn params(k: f64, lambda: f64, half_size: usize) -> RotorParams {
        RotorParams {
            kick_strength: k,
            lambda,
            half_size,
            seed: 5,
            ..RotorParams::default()
        }
    }

    #[test]
    fn quasienergy_examples() {
        let s = quasienergies(&[Complex64::new(1.0, 0.0)]).unwrap();
        assert_eq!(s.epsilons[0], Complex64::new(0.0, 0.0));

        let s = quasienergies(&[Complex64::new(std::f64::consts::E, 0.0)]).unwrap();
        assert_close!(s.epsilons[0].re, 0.0, 1e-15);
        assert_close!(s.epsilons[0].im, 1.0, 1e-15);

        let mu = Complex64::from_polar(0.05f64.exp(), -0.3);
        let s = quasienergies(&[mu]).unwrap();
        assert_close!(s.epsilons[0].re, 0.3, 1e-12);
        assert_close!(s.epsilons[0].im, 0.05, 1e-12);
        assert_close!(s.alpha, 0.05, 1e-12);

        // μ = -1 sits on the branch cut; folding puts it at -π
        let s = quasienergies(&[Complex64::new(-1.0, 0.0)]).unwrap();
        assert_close!(s.epsilons[0].re, -std::f64::consts::PI, 1e-15);

        assert!(matches!(
            quasienergies(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]),
            Err(Error::ZeroEigenvalue { index: 1 })
        ));
    }

    #[test]
    fn free_rotor_eigenvalues_are_squared_kinetic_phases() {
        let p = params(0.0, 0.3, 10);
        let jitter = sample_mass_jitter(&p);
        let d = kinetic_phases(&p, &jitter).unwrap();
        let f = build_dense(&p, &jitter).unwrap();
        let mut ev = eigenvalues(&f, &FaerBackend).unwrap();
        for mu in &ev {
            assert_close!(mu.norm(), 1.0, 1e-12);
        }
        let mut expected: Vec<Complex64> = d.iter().map(|z| z * z).collect();
        let key = |z: &Complex64| (z.arg(), z.norm());
        ev.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        expected.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (a, b) in ev.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn hermitian_limit_spectrum_is_real() {
        let p = params(4.0, 0.0, 64);
        let s = rotor_spectrum(&p, &FaerBackend).unwrap();
        for mu in &s.mus {
            assert_close!(mu.norm(), 1.0, 1e-8);
        }
        assert!(!pt_broken(&s, PT_BREAKING_THRESHOLD));
    }

    #[test]
    fn spectral_radius_matches_alpha() {
        let p = params(15.0, 0.05, 32);
        let s = rotor_spectrum(&p, &FaerBackend).unwrap();
        let radius = s.mus.iter().map(|m| m.norm()).fold(0.0, f64::max);
        assert_close!(radius, s.alpha.exp(), 1e-12 * radius);
    }

    #[test]
    fn pt_pairing_without_jitter() {
        for &(k, lambda) in &[(15.0, 0.05), (3.0, 0.4), (30.0, 0.01)] {
            let p = params(k, lambda, 48).with_jitter(0.0);
            let s = rotor_spectrum(&p, &FaerBackend).unwrap();
            for mu in &s.mus {
                // μ → 1/μ̄ maps the spectrum onto itself
                let partner = 1.0 / mu.conj();
                let d = s.mus.iter().map(|m| (m - partner).norm()).fold(f64::INFINITY, f64::min);
                assert!(d < 1e-8, "K={k} λ={lambda}: {d}");
            }
            for e in s.epsilons.iter().filter(|e| e.im > 1e-8) {
                let d = s
                    .epsilons
                    .iter()
                    .map(|x| (x - e.conj()).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(d < 1e-6);
            }
        }
    }

    #[test]
    fn determinant_matches_eigenvalue_product() {
        let p = params(6.0, 0.2, 12);
        let jitter = sample_mass_jitter(&p);
        let f = build_dense(&p, &jitter).unwrap();
        let ev = eigenvalues(&f, &HessenbergQr).unwrap();
        let product: Complex64 = ev.iter().product();
        let det = f.matrix.determinant();
        assert!((product - det).norm() <= 1e-6 * det.norm());
    }

    #[test]
    fn pt_broken_threshold() {
        let real = QuasienergySpectrum {
            epsilons: vec![Complex64::new(0.1, 0.0), Complex64::new(-2.0, 0.0)],
            mus: vec![],
            alpha: 0.0,
        };
        assert!(!pt_broken(&real, PT_BREAKING_THRESHOLD));
        let complex = QuasienergySpectrum { alpha: 1e-6, ..real };
        assert!(pt_broken(&complex, PT_BREAKING_THRESHOLD));
    }
}
