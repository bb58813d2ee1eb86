use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_square, CMatrix, EigenBackend, FaerBackend};
use crate::error::{Error, Result};

/// Relative norm change tolerated by [`is_unitary`].
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// Fixed rotation applied before the transform so an eigenvalue at exactly
/// `-1` cannot make `I + U` singular.
const ROTATION: f64 = 0.618_033_988_749_895;

/// Checks `‖U v‖ = ‖v‖` on two fixed pseudo-random probe vectors.
pub fn is_unitary(matrix: &CMatrix, tol: f64) -> bool {
    if matrix.nrows() != matrix.ncols() {
        return false;
    }
    let n = matrix.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..2).all(|_| {
        let v = Mat::<Complex64>::from_fn(n, 1, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let w = matrix * &v;
        let before = v.norm_l2().powi(2);
        let after = w.norm_l2().powi(2);
        (after - before).abs() <= tol * before
    })
}

/// Eigenvalues of a unitary matrix from the Hermitian matrix
/// `H = i (I - G)(I + G)⁻¹`, `G = e^{iβ} U`. Each real eigenvalue `h` of `H`
/// maps back to `μ = e^{-iβ} (i - h)/(i + h)`, which lies on the unit circle.
#[derive(Debug, Default, Clone, Copy)]
pub struct CayleyBackend;

impl EigenBackend for CayleyBackend {
    fn name(&self) -> &'static str {
        "cayley"
    }

    fn eigenvalues(&self, matrix: &CMatrix) -> Result<Vec<Complex64>> {
        check_square(matrix)?;
        if !is_unitary(matrix, UNITARITY_TOLERANCE) {
            return Err(Error::InvalidParameter("cayley backend needs a unitary matrix".into()));
        }
        let n = matrix.nrows();
        let phase = Complex64::from_polar(1.0, ROTATION);
        let g = Mat::<Complex64>::from_fn(n, n, |i, j| phase * matrix[(i, j)]);
        let id = Mat::<Complex64>::identity(n, n);
        let x = (&id + &g).partial_piv_lu().solve(&id - &g);
        let i_unit = Complex64::new(0.0, 1.0);
        let h = Mat::<Complex64>::from_fn(n, n, |r, c| 0.5 * i_unit * (x[(r, c)] - x[(c, r)].conj()));
        let hs = h.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::EigenNonConvergence {
            backend: "cayley",
            index: None,
        })?;
        let back = phase.conj();
        Ok(hs
            .into_iter()
            .map(|h| back * (i_unit - h) / (i_unit + h))
            .collect())
    }
}

/// Uses [`CayleyBackend`] for unitary input and [`FaerBackend`] otherwise.
#[derive(Debug, Default, Clone, Copy)]
pub struct AutoBackend;

impl EigenBackend for AutoBackend {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn eigenvalues(&self, matrix: &CMatrix) -> Result<Vec<Complex64>> {
        check_square(matrix)?;
        if is_unitary(matrix, UNITARITY_TOLERANCE) {
            CayleyBackend.eigenvalues(matrix)
        } else {
            FaerBackend.eigenvalues(matrix)
        }
    }
}
