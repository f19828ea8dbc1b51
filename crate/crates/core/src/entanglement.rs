//! Concurrence and the analysis of entanglement beats.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{pauli, sqrt_psd, ComplexMatrix};
use crate::model::SystemParams;
use crate::states::{QubitState, TwoQubitState, DENSITY_TOL, NORM_TOL};

/// Concurrence below which the pair counts as disentangled.
pub const DEAD_THRESHOLD: f64 = 1e-3;

/// Tolerance on series values outside `[0, 1]` before clipping.
pub const SERIES_TOL: f64 = 1e-12;

/// Grid points per `2π` of τ for beat studies.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 2000;

/// Bisection rounds applied to each half-maximum crossing.
pub const DEFAULT_REFINE_ROUNDS: usize = 3;

/// A beat must span at least this many grid spacings at half maximum.
pub const MIN_SAMPLES_PER_FWHM: f64 = 5.0;

/// `2|a₀₀a₁₁ − a₀₁a₁₀|`.
pub fn concurrence_pure(amps: &[C64; 4]) -> Result<f64> {
    let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm_sqr });
    }
    Ok((2.0 * (amps[0] * amps[3] - amps[1] * amps[2]).norm()).min(1.0))
}

/// Wootters concurrence of a two-qubit density matrix.
///
/// The square roots `√λᵢ` of the eigenvalues of `ρ(σy⊗σy)ρ*(σy⊗σy)` are the
/// singular values of `√ρ (σy⊗σy) √ρ*`. Taking them from an SVD avoids square
/// roots of round-off sized eigenvalues, which would cost half the digits on
/// nearly pure states.
pub fn concurrence_mixed(rho: &ComplexMatrix) -> Result<f64> {
    TwoQubitState::Mixed(rho.clone()).validate(DENSITY_TOL)?;
    let yy = pauli::sigma_y().kron(&pauli::sigma_y());
    let root = sqrt_psd(rho).map_err(|e| Error::NotDensity(e.to_string()))?;
    let m = &(&root * &yy) * &root.conj();
    let mut s: Vec<f64> = m
        .into_nalgebra()
        .singular_values()
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok((s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0))
}

/// Concurrence of either representation.
pub fn concurrence(state: &TwoQubitState) -> Result<f64> {
    match state {
        TwoQubitState::Pure(amps) => concurrence_pure(amps),
        TwoQubitState::Mixed(rho) => concurrence_mixed(rho),
    }
}

fn chi_t(p: &SystemParams, t: f64) -> f64 {
    p.g_a * p.g_a / p.delta_a() * t
}

fn exchange_terms(psi: &QubitState, phi: &QubitState, p: &SystemParams, t: f64) -> (C64, C64, C64) {
    let (c, s) = (chi_t(p, t).cos(), chi_t(p, t).sin());
    let i = C64::new(0.0, 1.0);
    let c01 = psi.amp0() * phi.amp1();
    let c10 = psi.amp1() * phi.amp0();
    let l0 = c01 * c - i * c10 * s;
    let l1 = c10 * c - i * c01 * s;
    (l0, l1, psi.amp0() * phi.amp0() * psi.amp1() * phi.amp1())
}

/// `2|L₀L₁ − ⟨0|ψ⟩⟨0|φ⟩⟨1|ψ⟩⟨1|φ⟩|` for a Fock field. Independent of the photon number.
pub fn concurrence_c1(psi: &QubitState, phi: &QubitState, p: &SystemParams, t: f64) -> f64 {
    let (l0, l1, prod) = exchange_terms(psi, phi, p, t);
    (2.0 * (l0 * l1 - prod).norm()).min(1.0)
}

/// `max{0, 2(|L₀L₁| − |⟨0|ψ⟩⟨0|φ⟩⟨1|ψ⟩⟨1|φ⟩|)}`, the high-intensity limit.
pub fn concurrence_c2(psi: &QubitState, phi: &QubitState, p: &SystemParams, t: f64) -> f64 {
    let (l0, l1, prod) = exchange_terms(psi, phi, p, t);
    (2.0 * ((l0 * l1).norm() - prod.norm())).clamp(0.0, 1.0)
}

fn werner_from_overlap(gamma: f64, overlap_modulus: f64) -> f64 {
    (((1.0 + 2.0 * overlap_modulus) * gamma - 1.0) / 2.0).max(0.0)
}

/// `max{0, ((1 + 2e^{−2|α|² sin²(2g²t/Δ)})γ − 1)/2}`.
pub fn concurrence_werner_coherent(gamma: f64, alpha: C64, p: &SystemParams, t: f64) -> f64 {
    let s = (2.0 * chi_t(p, t)).sin();
    werner_from_overlap(gamma, (-2.0 * alpha.norm_sqr() * s * s).exp())
}

/// `max{0, ((1 + 2/|1 + ⟨n⟩(1 − e^{−4ig²t/Δ})|)γ − 1)/2}`.
pub fn concurrence_werner_thermal(gamma: f64, mean_n: f64, p: &SystemParams, t: f64) -> f64 {
    let z = C64::new(1.0, 0.0) - C64::from_polar(1.0, -4.0 * chi_t(p, t));
    werner_from_overlap(gamma, 1.0 / (C64::new(1.0, 0.0) + z * mean_n).norm())
}

/// Concurrence sampled on a sorted τ grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcurrenceSeries {
    taus: Vec<f64>,
    values: Vec<f64>,
}

impl ConcurrenceSeries {
    pub fn new(taus: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if taus.len() != values.len() {
            return Err(Error::InvalidSeries(format!(
                "{} taus but {} values",
                taus.len(),
                values.len()
            )));
        }
        if taus.len() < 2 {
            return Err(Error::InvalidSeries("fewer than two samples".into()));
        }
        if taus.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSeries("taus not strictly increasing".into()));
        }
        if let Some(v) = values
            .iter()
            .find(|v| !(**v >= -SERIES_TOL && **v <= 1.0 + SERIES_TOL))
        {
            return Err(Error::InvalidSeries(format!(
                "concurrence {v} outside [0, 1]"
            )));
        }
        let values = values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Ok(Self { taus, values })
    }

    /// Samples `f` on `steps` evenly spaced points of `[tau_min, tau_max]`.
    pub fn sample(
        tau_min: f64,
        tau_max: f64,
        steps: usize,
        f: impl Fn(f64) -> Result<f64>,
    ) -> Result<Self> {
        let taus = linspace(tau_min, tau_max, steps)?;
        let values = taus.iter().map(|&tau| f(tau)).collect::<Result<Vec<_>>>()?;
        Self::new(taus, values)
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }
}

/// `steps` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 || !(b > a) {
        return Err(Error::InvalidSeries(format!(
            "need at least two points on a non-empty range, got {steps} on [{a}, {b}]"
        )));
    }
    let h = (b - a) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| if k + 1 == steps { b } else { a + h * k as f64 })
        .collect())
}

/// Grid size giving [`DEFAULT_STEPS_PER_PERIOD`] points per `2π` of τ.
pub fn default_steps(tau_min: f64, tau_max: f64) -> usize {
    let periods = (tau_max - tau_min) / std::f64::consts::TAU;
    ((periods * DEFAULT_STEPS_PER_PERIOD as f64).ceil() as usize).max(2) + 1
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeatReport {
    /// Beat centers in τ.
    pub beat_centers: Vec<f64>,
    /// Full width at half maximum per beat, in τ.
    pub beat_fwhm: Vec<f64>,
    /// Beat centers converted to time.
    pub beat_center_times: Vec<f64>,
    /// Maximal τ intervals with concurrence below [`DEAD_THRESHOLD`].
    pub valleys: Vec<(f64, f64)>,
    /// Half the series maximum.
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BeatAnalysis {
    NoBeats,
    Beats(BeatReport),
}

impl BeatAnalysis {
    pub fn report(&self) -> Option<&BeatReport> {
        match self {
            BeatAnalysis::NoBeats => None,
            BeatAnalysis::Beats(r) => Some(r),
        }
    }
}

/// Where `f` crosses `level` between samples `k` and `k + 1`, by linear interpolation.
fn crossing(taus: &[f64], values: &[f64], k: usize, level: f64) -> f64 {
    let (x0, x1, y0, y1) = (taus[k], taus[k + 1], values[k], values[k + 1]);
    if y1 == y0 {
        return 0.5 * (x0 + x1);
    }
    x0 + (level - y0) * (x1 - x0) / (y1 - y0)
}

/// Brackets `(k, k + 1)` of the half-maximum crossings around each beat.
struct Beat {
    rise: usize,
    fall: usize,
}

fn find_beats(s: &ConcurrenceSeries, threshold: f64) -> Vec<Beat> {
    let v = &s.values;
    let mut beats = Vec::new();
    let mut k = 0;
    while k < v.len() {
        if v[k] >= threshold {
            let start = k;
            while k < v.len() && v[k] >= threshold {
                k += 1;
            }
            // Beats cut off by either end of the grid are dropped.
            if start > 0 && k < v.len() {
                beats.push(Beat {
                    rise: start - 1,
                    fall: k - 1,
                });
            }
        } else {
            k += 1;
        }
    }
    beats
}

fn find_valleys(s: &ConcurrenceSeries) -> Vec<(f64, f64)> {
    let (t, v) = (&s.taus, &s.values);
    let mut valleys = Vec::new();
    let mut k = 0;
    while k < v.len() {
        if v[k] < DEAD_THRESHOLD {
            let start = k;
            while k < v.len() && v[k] < DEAD_THRESHOLD {
                k += 1;
            }
            let lo = if start == 0 {
                t[0]
            } else {
                crossing(t, v, start - 1, DEAD_THRESHOLD)
            };
            let hi = if k == v.len() {
                t[v.len() - 1]
            } else {
                crossing(t, v, k - 1, DEAD_THRESHOLD)
            };
            valleys.push((lo, hi));
        } else {
            k += 1;
        }
    }
    valleys
}

fn max_spacing(taus: &[f64], lo: usize, hi: usize) -> f64 {
    taus[lo..=hi]
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max)
}

fn too_coarse(s: &ConcurrenceSeries, spacing: f64, fwhm: f64) -> Error {
    let span = s.taus[s.len() - 1] - s.taus[0];
    Error::ResolutionTooCoarse {
        spacing,
        // The width of an under-resolved beat is itself unreliable, hence the factor 2.
        suggested_steps: (2.0 * span * MIN_SAMPLES_PER_FWHM / fwhm).ceil() as usize + 1,
    }
}

fn is_flat(s: &ConcurrenceSeries) -> bool {
    let (lo, hi) = s
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    hi - lo <= DEAD_THRESHOLD
}

/// Detects complete beats (half-maximum above the series maximum / 2) and dead valleys.
///
/// Beats are centered at the midpoint of their two half-maximum crossings.
/// Constant and monotone series, and series whose only beats touch the ends of
/// the grid, give [`BeatAnalysis::NoBeats`].
pub fn analyze_beats(series: &ConcurrenceSeries, p: &SystemParams) -> Result<BeatAnalysis> {
    analyze_with(series, p, |k, level| {
        Ok(crossing(&series.taus, &series.values, k, level))
    })
}

/// As [`analyze_beats`], sampling `f` on a uniform grid and then refining each
/// half-maximum crossing by `rounds` bisections of its bracketing interval.
pub fn analyze_beats_refined(
    f: impl Fn(f64) -> Result<f64>,
    tau_min: f64,
    tau_max: f64,
    steps: usize,
    rounds: usize,
    p: &SystemParams,
) -> Result<BeatAnalysis> {
    let series = ConcurrenceSeries::sample(tau_min, tau_max, steps, &f)?;
    analyze_with(&series, p, |k, level| {
        let (mut a, mut b) = (series.taus[k], series.taus[k + 1]);
        let (mut fa, mut fb) = (series.values[k], series.values[k + 1]);
        for _ in 0..rounds {
            let m = 0.5 * (a + b);
            let fm = f(m)?.clamp(0.0, 1.0);
            if (fa >= level) == (fm >= level) {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
        }
        Ok(crossing(&[a, b], &[fa, fb], 0, level))
    })
}

/// `locate(k, level)` places the crossing of `level` inside bracket `[τ_k, τ_{k+1}]`.
fn analyze_with(
    series: &ConcurrenceSeries,
    p: &SystemParams,
    mut locate: impl FnMut(usize, f64) -> Result<f64>,
) -> Result<BeatAnalysis> {
    if is_flat(series) {
        return Ok(BeatAnalysis::NoBeats);
    }
    let peak = series.values.iter().copied().fold(0.0, f64::max);
    let threshold = 0.5 * peak;
    let beats = find_beats(series, threshold);
    if beats.is_empty() {
        return Ok(BeatAnalysis::NoBeats);
    }
    let t = &series.taus;
    let mut report = BeatReport {
        beat_centers: Vec::with_capacity(beats.len()),
        beat_fwhm: Vec::with_capacity(beats.len()),
        beat_center_times: Vec::with_capacity(beats.len()),
        valleys: find_valleys(series),
        threshold,
    };
    for b in &beats {
        let left = locate(b.rise, threshold)?;
        let right = locate(b.fall, threshold)?;
        let fwhm = right - left;
        let spacing = max_spacing(t, b.rise, b.fall + 1);
        if !(fwhm > 0.0) || fwhm < MIN_SAMPLES_PER_FWHM * spacing {
            return Err(too_coarse(series, spacing, fwhm.max(spacing)));
        }
        let center = 0.5 * (left + right);
        report.beat_centers.push(center);
        report.beat_fwhm.push(fwhm);
        report.beat_center_times.push(p.time_from_tau(center));
    }
    Ok(BeatAnalysis::Beats(report))
}
