use num_complex::Complex64;

use super::{check_square, CMatrix, EigenBackend};
use crate::error::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Unblocked Householder reduction to upper Hessenberg form followed by
/// single-shift complex QR iteration with Wilkinson shifts.
///
/// Plain `O(n³)` reference implementation. Fine up to a few hundred rows and
/// used to cross-check the default backend.
#[derive(Debug, Default, Clone, Copy)]
pub struct HessenbergQr;

impl EigenBackend for HessenbergQr {
    fn name(&self) -> &'static str {
        "hqr"
    }

    fn eigenvalues(&self, matrix: &CMatrix) -> Result<Vec<Complex64>> {
        check_square(matrix)?;
        let n = matrix.nrows();
        let mut h = Dense {
            n,
            data: (0..n * n).map(|idx| matrix[(idx % n, idx / n)]).collect(),
        };
        hessenberg(&mut h);
        hessenberg_eigenvalues(&mut h)
    }
}

struct Dense {
    n: usize,
    data: Vec<Complex64>,
}

impl Dense {
    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i + j * self.n]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.data[i + j * self.n]
    }
}

fn hessenberg(a: &mut Dense) {
    let n = a.n;
    if n < 3 {
        return;
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    for k in 0..n - 2 {
        let alpha_norm: f64 = (k + 1..n).map(|i| a.at(i, k).norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = a.at(k + 1, k);
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        // v = x + e^{i arg x0} |x| e1, H = I - 2 v v^H / (v^H v)
        for i in k + 1..n {
            v[i] = a.at(i, k);
        }
        v[k + 1] += phase * alpha_norm;
        let vnorm2: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;

        // left: A[k+1.., k..] -= beta v (v^H A)
        for j in k..n {
            let mut s = zero;
            for i in k + 1..n {
                s += v[i].conj() * a.at(i, j);
            }
            s *= beta;
            for i in k + 1..n {
                *a.at_mut(i, j) -= v[i] * s;
            }
        }
        // right: A[.., k+1..] -= beta (A v) v^H
        for i in 0..n {
            let mut s = zero;
            for j in k + 1..n {
                s += a.at(i, j) * v[j];
            }
            s *= beta;
            for j in k + 1..n {
                *a.at_mut(i, j) -= s * v[j].conj();
            }
        }
        for i in k + 2..n {
            *a.at_mut(i, k) = zero;
        }
    }
}

#[inline]
fn l1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Eigenvalue of the 2x2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let (s1, s2) = (mean + disc, mean - disc);
    if (s1 - d).norm() <= (s2 - d).norm() {
        s1
    } else {
        s2
    }
}

/// Givens rotation `G = [[c, s], [-conj(s), c]]` with `G [x; y] = [r; 0]`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let nx = x.norm();
    let ny = y.norm();
    if ny == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if nx == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let r = nx.hypot(ny);
    (nx / r, (x / nx) * y.conj() / r)
}

fn hessenberg_eigenvalues(h: &mut Dense) -> Result<Vec<Complex64>> {
    let n = h.n;
    let zero = Complex64::new(0.0, 0.0);
    let mut eig = vec![zero; n];
    if n == 0 {
        return Ok(eig);
    }
    let eps = f64::EPSILON;
    let tiny = f64::MIN_POSITIVE * (n as f64) / eps;

    let mut hi = n - 1;
    let mut iterations = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h.at(0, 0);
            break;
        }
        // find the top of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let sub = l1(h.at(lo, lo - 1));
            let diag = l1(h.at(lo - 1, lo - 1)) + l1(h.at(lo, lo));
            if sub <= eps * diag || sub <= tiny {
                *h.at_mut(lo, lo - 1) = zero;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h.at(hi, hi);
            hi -= 1;
            iterations = 0;
            continue;
        }

        iterations += 1;
        if iterations > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(Error::EigenNonConvergence {
                backend: "hqr",
                index: Some(hi),
            });
        }
        let shift = if iterations % 11 == 0 {
            // exceptional shift to break cycles
            h.at(hi, hi) + Complex64::new(0.75 * l1(h.at(hi, hi - 1)), 0.0)
        } else {
            wilkinson_shift(
                h.at(hi - 1, hi - 1),
                h.at(hi - 1, hi),
                h.at(hi, hi - 1),
                h.at(hi, hi),
            )
        };

        // implicit single-shift QR sweep on rows/cols lo..=hi
        let mut x = h.at(lo, lo) - shift;
        let mut y = h.at(lo + 1, lo);
        for k in lo..hi {
            if k > lo {
                x = h.at(k, k - 1);
                y = h.at(k + 1, k - 1);
            }
            let (c, s) = givens(x, y);
            let first_col = if k > lo { k - 1 } else { lo };
            for j in first_col..=hi {
                let a = h.at(k, j);
                let b = h.at(k + 1, j);
                *h.at_mut(k, j) = a * c + s * b;
                *h.at_mut(k + 1, j) = -s.conj() * a + b * c;
            }
            if k > lo {
                *h.at_mut(k + 1, k - 1) = zero;
            }
            let last_row = (k + 2).min(hi);
            for i in lo..=last_row {
                let a = h.at(i, k);
                let b = h.at(i, k + 1);
                *h.at_mut(i, k) = a * c + s.conj() * b;
                *h.at_mut(i, k + 1) = -s * a + b * c;
            }
        }
    }
    Ok(eig)
}
