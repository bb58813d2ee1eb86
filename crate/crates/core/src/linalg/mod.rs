//! Dense complex linear algebra: the eigensolver interface and its backends.

mod cayley;
mod hqr;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use cayley::{is_unitary, AutoBackend, CayleyBackend, UNITARITY_TOLERANCE};
pub use hqr::HessenbergQr;

/// Dense complex matrix, column-major.
pub type CMatrix = Mat<Complex64>;

/// Eigenvalues of a general (non-normal) square complex matrix.
pub trait EigenBackend: Send + Sync {
    fn name(&self) -> &'static str;

    /// All eigenvalues, in no particular order.
    fn eigenvalues(&self, matrix: &CMatrix) -> Result<Vec<Complex64>>;
}

/// Blocked Hessenberg reduction and multishift QR from `faer`.
#[derive(Debug, Default, Clone, Copy)]
pub struct FaerBackend;

impl EigenBackend for FaerBackend {
    fn name(&self) -> &'static str {
        "faer"
    }

    fn eigenvalues(&self, matrix: &CMatrix) -> Result<Vec<Complex64>> {
        check_square(matrix)?;
        matrix.eigenvalues().map_err(|_| Error::EigenNonConvergence {
            backend: "faer",
            index: None,
        })
    }
}

/// Backend used when the caller does not choose one.
pub fn default_backend() -> &'static dyn EigenBackend {
    &AutoBackend
}

/// Looks a backend up by name: `auto`, `faer`, `cayley` or `hqr`.
pub fn backend_by_name(name: &str) -> Option<&'static dyn EigenBackend> {
    match name {
        "auto" => Some(&AutoBackend),
        "faer" => Some(&FaerBackend),
        "cayley" => Some(&CayleyBackend),
        "hqr" | "native" => Some(&HessenbergQr),
        _ => None,
    }
}

pub(crate) fn check_square(matrix: &CMatrix) -> Result<()> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::DimensionMismatch {
            expected: matrix.nrows(),
            actual: matrix.ncols(),
        });
    }
    let finite = (0..matrix.ncols()).all(|j| {
        (0..matrix.nrows()).all(|i| {
            let z = matrix[(i, j)];
            z.re.is_finite() && z.im.is_finite()
        })
    });
    if !finite {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Sum of `f(x)` over `items` with a fixed pairwise reduction tree, so the
/// result does not depend on how callers schedule the work.
pub fn pairwise_sum<T>(items: &[T], f: impl Fn(&T) -> f64 + Copy) -> f64 {
    const LEAF: usize = 32;
    if items.len() <= LEAF {
        return items.iter().map(f).sum();
    }
    let mid = items.len() / 2;
    pairwise_sum(&items[..mid], f) + pairwise_sum(&items[mid..], f)
}

/// Complex analogue of [`pairwise_sum`].
pub fn pairwise_sum_complex<T>(items: &[T], f: impl Fn(&T) -> Complex64 + Copy) -> Complex64 {
    const LEAF: usize = 32;
    if items.len() <= LEAF {
        return items.iter().map(f).sum();
    }
    let mid = items.len() / 2;
    pairwise_sum_complex(&items[..mid], f) + pairwise_sum_complex(&items[mid..], f)
}

/// Largest absolute entry.
pub fn max_abs(matrix: &CMatrix) -> f64 {
    let mut m = 0.0f64;
    for j in 0..matrix.ncols() {
        for i in 0..matrix.nrows() {
            m = m.max(matrix[(i, j)].norm());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    pub(crate) fn random_matrix(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Mat::from_fn(n, n, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })
    }

    /// Characteristic polynomial coefficients via Faddeev-LeVerrier,
    /// highest degree first (monic).
    fn char_poly(a: &CMatrix) -> Vec<Complex64> {
        let n = a.nrows();
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        let mut m = Mat::<Complex64>::zeros(n, n);
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{k-1} I
            let mut next = a * &m;
            for i in 0..n {
                next[(i, i)] += coeffs[k - 1];
            }
            m = next;
            let am = a * &m;
            let trace: Complex64 = (0..n).map(|i| am[(i, i)]).sum();
            coeffs.push(-trace / k as f64);
        }
        coeffs
    }

    /// Durand-Kerner simultaneous root iteration.
    fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
        let n = coeffs.len() - 1;
        let eval = |z: Complex64| coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
        let seed = Complex64::new(0.4, 0.9);
        let radius = 1.0 + coeffs.iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max);
        let mut roots: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32) * radius).collect();
        for _ in 0..5000 {
            let mut delta = 0.0f64;
            for i in 0..n {
                let mut denom = Complex64::new(1.0, 0.0);
                for j in 0..n {
                    if i != j {
                        denom *= roots[i] - roots[j];
                    }
                }
                let step = eval(roots[i]) / denom;
                roots[i] -= step;
                delta = delta.max(step.norm());
            }
            if delta < 1e-15 {
                break;
            }
        }
        // polish with Newton on the polynomial
        for r in &mut roots {
            for _ in 0..5 {
                let (mut p, mut dp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for c in coeffs {
                    dp = dp * *r + p;
                    p = p * *r + c;
                }
                if dp.norm() > 0.0 {
                    *r -= p / dp;
                }
            }
        }
        roots
    }

    fn matching_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
        let mut used = vec![false; b.len()];
        let mut worst = 0.0f64;
        for x in a {
            let (j, d) = b
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, y)| (j, (x - y).norm()))
                .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
                .unwrap();
            used[j] = true;
            worst = worst.max(d);
        }
        worst
    }

    #[test]
    fn small_matrix_matches_polynomial_roots() {
        for seed in 0..5 {
            let a = random_matrix(6, seed);
            let roots = poly_roots(&char_poly(&a));
            for backend in [&FaerBackend as &dyn EigenBackend, &HessenbergQr] {
                let ev = backend.eigenvalues(&a).unwrap();
                assert_eq!(ev.len(), 6);
                let d = matching_distance(&ev, &roots);
                assert!(d < 1e-8, "{} seed {seed}: {d}", backend.name());
            }
        }
    }

    #[test]
    fn backends_agree_on_medium_matrix() {
        let a = random_matrix(120, 11);
        let x = FaerBackend.eigenvalues(&a).unwrap();
        let y = HessenbergQr.eigenvalues(&a).unwrap();
        assert!(matching_distance(&x, &y) < 1e-9);
    }

    #[test]
    fn eigenpair_residuals_within_contract() {
        let a = random_matrix(80, 3);
        let evd = a.eigen().unwrap();
        let (u, s) = (evd.U(), evd.S());
        let scale = max_abs(&a) * 80.0;
        for j in 0..80 {
            let v = u.col(j);
            let av = &a * v;
            let mu = s.column_vector()[j];
            let r: f64 = (0..80).map(|i| (av[i] - mu * v[i]).norm_sqr()).sum::<f64>().sqrt();
            let vn: f64 = (0..80).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
            assert!(r <= 1e-8 * scale * vn, "residual {r}");
        }
    }

    #[test]
    fn triangular_and_diagonal_inputs() {
        let n = 7;
        let d = Mat::<Complex64>::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, i as f64)
            } else if j > i {
                Complex64::new(0.3, -0.1)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let ev = HessenbergQr.eigenvalues(&d).unwrap();
        let expected: Vec<_> = (0..n).map(|i| Complex64::from_polar(1.0, i as f64)).collect();
        assert!(matching_distance(&ev, &expected) < 1e-12);
    }

    #[test]
    fn rejects_non_square() {
        let a = Mat::<Complex64>::zeros(3, 4);
        assert!(FaerBackend.eigenvalues(&a).is_err());
        assert!(HessenbergQr.eigenvalues(&a).is_err());
    }

    #[test]
    fn pairwise_sum_is_exact_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v, |x| *x), 499500.0);
        assert!(backend_by_name("faer").is_some());
        assert!(backend_by_name("lapack").is_none());
    }
}
