//! Out-of-time-order correlator `C(t) = -⟨[p̂(t), p̂]²⟩` for a Gaussian
//! wavepacket, with norm tracking and growth-rate fits.
//!
//! Heisenberg operators use the adjoint, `p̂(t) = F†ᵗ p̂ Fᵗ`, which keeps
//! `p̂(t)` Hermitian for non-unitary `F`. Each of the four propagator factors
//! in the squared commutator then contributes `e^{αt}` at late times, giving
//! `C ∝ e^{4αt}` and `𝒩 ∝ e^{2αt}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{edge_occupation, SplitStepApplicator};
use crate::linalg::pairwise_sum_complex;
use crate::model::{gaussian_state, RotorParams, StateVector, WavepacketSpec};

/// Amplitude magnitude treated as overflow.
pub const OVERFLOW_AMPLITUDE: f64 = 1e300;

/// Edge occupation above which the finite basis is reported as too small.
pub const EDGE_OCCUPATION_LIMIT: f64 = 1e-8;

/// Time series of one OTOC run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtocSeries {
    pub times: Vec<usize>,
    pub c_raw: Vec<f64>,
    /// `⟨Ψ(t)|Ψ(t)⟩` with `|Ψ(t)⟩ = Fᵗ|Ψ⟩`.
    pub norm: Vec<f64>,
    pub c_norm: Vec<f64>,
    pub alpha_fit: f64,
    /// Set when the fitted late-time slope was negative and `alpha_fit` was
    /// clamped to zero.
    pub alpha_clamped: bool,
    pub lambda_fit: Option<f64>,
    pub fit_window: Option<(usize, usize)>,
    /// Largest `|Im C| / |Re C|` seen; nonzero only through rounding.
    pub max_imag_ratio: f64,
    pub max_edge_occupation: f64,
    pub params: RotorParams,
    pub wavepacket: WavepacketSpec,
}

impl OtocSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `p̂|k⟩ = ħ k |k⟩`.
pub fn apply_momentum(params: &RotorParams, state: &mut [Complex64]) {
    for (i, a) in state.iter_mut().enumerate() {
        *a *= params.hbar_eff * params.momentum_index(i) as f64;
    }
}

fn check_overflow(state: &[Complex64], step: usize) -> Result<()> {
    let ok = state
        .iter()
        .all(|a| a.re.is_finite() && a.im.is_finite() && a.norm() < OVERFLOW_AMPLITUDE);
    if ok {
        Ok(())
    } else {
        Err(Error::NormOverflow { step })
    }
}

fn evolve_in_place(
    applicator: &SplitStepApplicator,
    state: &mut [Complex64],
    steps: usize,
    adjoint: bool,
) -> Result<()> {
    for step in 1..=steps {
        applicator.apply_in_place(state, adjoint)?;
        check_overflow(state, step)?;
    }
    Ok(())
}

/// `Fˢ|ψ⟩`, or `(F†)ˢ|ψ⟩` when `adjoint` is set. The norm is left alone.
pub fn evolve(
    applicator: &SplitStepApplicator,
    state: &StateVector,
    steps: usize,
    adjoint: bool,
) -> Result<StateVector> {
    let mut out = state.clone();
    evolve_in_place(applicator, &mut out.0, steps, adjoint)?;
    Ok(out)
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let pairs: Vec<(Complex64, Complex64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairwise_sum_complex(&pairs, |(x, y)| x.conj() * y)
}

/// `p̂(t)|v⟩ = F†ᵗ p̂ Fᵗ |v⟩`.
fn heisenberg_momentum(
    applicator: &SplitStepApplicator,
    v: &[Complex64],
    t: usize,
) -> Result<Vec<Complex64>> {
    let mut w = v.to_vec();
    evolve_in_place(applicator, &mut w, t, false)?;
    apply_momentum(&applicator.params, &mut w);
    evolve_in_place(applicator, &mut w, t, true)?;
    Ok(w)
}

struct Point {
    c: Complex64,
    norm: f64,
    edge: f64,
}

/// Evaluates `C(t)` from the precomputed forward states `Fᵗ p̂|Ψ⟩`, `Fᵗ|Ψ⟩`.
fn otoc_point(
    applicator: &SplitStepApplicator,
    psi: &[Complex64],
    p_psi: &[Complex64],
    fwd_p_psi: &[Complex64],
    fwd_psi: &[Complex64],
    t: usize,
) -> Result<Point> {
    let params = &applicator.params;
    let edge_width = (applicator.dim() / 32).max(1);

    // p̂(t) p̂ |Ψ⟩
    let mut term1 = fwd_p_psi.to_vec();
    apply_momentum(params, &mut term1);
    evolve_in_place(applicator, &mut term1, t, true)?;

    // y = p̂(t)|Ψ⟩, then p̂ p̂(t) |Ψ⟩
    let mut y = fwd_psi.to_vec();
    apply_momentum(params, &mut y);
    evolve_in_place(applicator, &mut y, t, true)?;
    let mut term2 = y.clone();
    apply_momentum(params, &mut term2);

    // u = [p̂(t), p̂]|Ψ⟩
    let u: Vec<Complex64> = term1.iter().zip(&term2).map(|(a, b)| a - b).collect();

    // ⟨Ψ|[p̂(t), p̂] u⟩ = ⟨y| p̂ u⟩ - ⟨p̂Ψ| p̂(t) u⟩
    let mut pu = u.clone();
    apply_momentum(params, &mut pu);
    let pt_u = heisenberg_momentum(applicator, &u, t)?;
    let expectation = inner(&y, &pu) - inner(p_psi, &pt_u);

    let fwd_state = StateVector(fwd_psi.to_vec());
    let edge = edge_occupation(&fwd_state, edge_width)
        .max(edge_occupation(&StateVector(fwd_p_psi.to_vec()), edge_width));
    let _ = psi;
    Ok(Point {
        c: -expectation,
        norm: fwd_state.norm_sqr(),
        edge,
    })
}

/// OTOC series `t = 0..=steps` for a Gaussian wavepacket, using zero mass
/// jitter.
pub fn otoc_series(params: &RotorParams, wavepacket: &WavepacketSpec, steps: usize) -> Result<OtocSeries> {
    let params = RotorParams {
        jitter_amplitude: 0.0,
        ..*params
    };
    let applicator = SplitStepApplicator::new(&params, &vec![0.0; params.dim()])?;
    otoc_series_with(&applicator, wavepacket, steps)
}

/// OTOC series for an arbitrary (possibly jittered) applicator.
pub fn otoc_series_with(
    applicator: &SplitStepApplicator,
    wavepacket: &WavepacketSpec,
    steps: usize,
) -> Result<OtocSeries> {
    if steps < 1 {
        return Err(Error::InvalidParameter("OTOC needs at least one step".into()));
    }
    let params = applicator.params;
    let psi = gaussian_state(wavepacket, &params)?;
    let mut p_psi = psi.0.clone();
    apply_momentum(&params, &mut p_psi);

    // forward states for every t, computed incrementally
    let mut fwd_p = Vec::with_capacity(steps);
    let mut fwd = Vec::with_capacity(steps);
    let (mut a, mut b) = (p_psi.clone(), psi.0.clone());
    for t in 1..=steps {
        applicator.apply_in_place(&mut a, false)?;
        applicator.apply_in_place(&mut b, false)?;
        check_overflow(&a, t)?;
        check_overflow(&b, t)?;
        fwd_p.push(a.clone());
        fwd.push(b.clone());
    }

    let points = (1..=steps)
        .into_par_iter()
        .map(|t| otoc_point(applicator, &psi.0, &p_psi, &fwd_p[t - 1], &fwd[t - 1], t))
        .collect::<Result<Vec<_>>>()?;

    let mut c_raw = vec![0.0];
    let mut norm = vec![psi.norm_sqr()];
    let mut max_imag_ratio = 0.0f64;
    let mut max_edge = edge_occupation(&psi, (params.dim() / 32).max(1));
    for p in &points {
        c_raw.push(p.c.re);
        norm.push(p.norm);
        if p.c.re != 0.0 {
            max_imag_ratio = max_imag_ratio.max(p.c.im.abs() / p.c.re.abs());
        }
        max_edge = max_edge.max(p.edge);
    }
    if max_imag_ratio > 1e-6 {
        log::info!("OTOC imaginary part reached {max_imag_ratio:.3e} of the real part");
    }
    if max_edge > EDGE_OCCUPATION_LIMIT {
        log::warn!(
            "edge occupation {max_edge:.3e} exceeds {EDGE_OCCUPATION_LIMIT:e}; increase the basis size N"
        );
    }

    let mut series = OtocSeries {
        times: (0..=steps).collect(),
        c_norm: c_raw.clone(),
        c_raw,
        norm,
        alpha_fit: 0.0,
        alpha_clamped: false,
        lambda_fit: None,
        fit_window: None,
        max_imag_ratio,
        max_edge_occupation: max_edge,
        params,
        wavepacket: *wavepacket,
    };
    if let Ok(fit) = fit_alpha(&series) {
        series.alpha_fit = fit.alpha;
        series.alpha_clamped = fit.clamped;
    }
    let alpha = series.alpha_fit;
    normalize(&mut series, alpha);
    if let Ok(fit) = lyapunov(&series) {
        series.lambda_fit = Some(fit.lambda);
        series.fit_window = Some(fit.window);
    }
    Ok(series)
}

/// Ordinary least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Late-time growth rate of a log-linear quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// Fitted rate; the slope of `ln C` divided by four.
    pub alpha: f64,
    /// Raw slope of the logarithm.
    pub slope: f64,
    pub clamped: bool,
    pub window: (usize, usize),
}

/// Slope of `ln values[t]` over the last quartile of the times with finite,
/// positive values (`t ≥ 1`).
pub fn late_time_slope(times: &[usize], values: &[f64]) -> Result<(f64, (usize, usize))> {
    let finite: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, v)| **t >= 1 && v.is_finite() && **v > 0.0)
        .map(|(t, v)| (*t as f64, v.ln()))
        .collect();
    let take = finite.len().div_ceil(4);
    if take < 4 {
        return Err(Error::TooFewPoints { needed: 4, got: take });
    }
    let tail = &finite[finite.len() - take..];
    let (x, y): (Vec<f64>, Vec<f64>) = tail.iter().copied().unzip();
    let (slope, _) = linear_fit(&x, &y);
    Ok((slope, (tail[0].0 as usize, tail[take - 1].0 as usize)))
}

/// Normalization rate from the late-time growth `C ∝ e^{4αt}`, clamped at
/// zero.
pub fn fit_alpha(series: &OtocSeries) -> Result<GrowthFit> {
    let (slope, window) = late_time_slope(&series.times, &series.c_raw)?;
    let alpha = slope / 4.0;
    Ok(GrowthFit {
        alpha: alpha.max(0.0),
        slope,
        clamped: alpha < 0.0,
        window,
    })
}

/// `C̃(t) = e^{-4αt} C(t)`.
pub fn normalize(series: &mut OtocSeries, alpha: f64) {
    series.c_norm = series
        .times
        .iter()
        .zip(&series.c_raw)
        .map(|(&t, &c)| (-4.0 * alpha * t as f64).exp() * c)
        .collect();
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovFit {
    pub lambda: f64,
    /// Prefactor `a` of `a e^{2Λ(t-1)}`.
    pub amplitude: f64,
    pub window: (usize, usize),
}

/// End of the early exponential regime of `C̃`.
///
/// With `δ_t = ln C̃(t+1) - ln C̃(t)`, growth counts as slowed at the first
/// `t ≥ 2` where `δ_t < δ_1 / 2`; that `t` is returned. If growth never
/// slows, the last time is returned. `None` when `C̃` does not grow at `t = 1`.
pub fn slowdown_time(times: &[usize], c_norm: &[f64]) -> Option<usize> {
    let log_at = |t: usize| -> Option<f64> {
        let i = times.iter().position(|&x| x == t)?;
        let v = c_norm[i];
        (v.is_finite() && v > 0.0).then(|| v.ln())
    };
    let first = log_at(2)? - log_at(1)?;
    if !(first > 0.0) {
        return None;
    }
    let last = *times.iter().max()?;
    let mut t = 2;
    while t < last {
        match (log_at(t), log_at(t + 1)) {
            (Some(a), Some(b)) if b - a >= 0.5 * first => t += 1,
            _ => return Some(t),
        }
    }
    Some(last)
}

/// Lyapunov exponent from `ln C̃(t) = ln a + 2Λ(t - 1)` over
/// `t = 1..=t_slow`.
pub fn lyapunov(series: &OtocSeries) -> Result<LyapunovFit> {
    let end = slowdown_time(&series.times, &series.c_norm).unwrap_or(0);
    let window: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.c_norm)
        .filter(|(t, v)| **t >= 1 && **t <= end && v.is_finite() && **v > 0.0)
        .map(|(t, v)| (*t as f64 - 1.0, v.ln()))
        .collect();
    if window.len() < 3 {
        return Err(Error::NoExponentialRegime {
            points: window.len(),
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = window.iter().copied().unzip();
    let (slope, intercept) = linear_fit(&x, &y);
    Ok(LyapunovFit {
        lambda: slope / 2.0,
        amplitude: intercept.exp(),
        window: (1, end),
    })
}
