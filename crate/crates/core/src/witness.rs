//! The witness spectrum `c_{w,n}` and the quasiprobability `P_w(α)`.
//!
//! `P_w(α) = Σ_k c_{w,k} |⟨k|D̂_{−α}|ψ⟩|²`, so `P_w` of a coherent state
//! `|γ⟩` depends only on `γ − α` and peaks at `α = γ`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fock::{displaced_amplitudes, CoherentSuperposition, FockVector};
use crate::special::{dd_cos_sq_pi_ratio, j1_ratio_rel_error, jinc_sq, Dd, DD_EPS, DD_FRAC_1_PI};

/// Diagonal of the witness operator in the Fock basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSpectrum {
    w: f64,
    coefficients: Vec<f64>,
    errors: Vec<f64>,
}

impl WitnessSpectrum {
    /// Coefficients whose estimated absolute error exceeds this fraction of
    /// `w²/π` are rejected.
    pub const INSTABILITY_TOL: f64 = 1e-9;

    pub fn new(w: f64, cutoff: usize) -> Result<Self> {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "w must be positive, got {w}"
            )));
        }
        let scale = w * w / PI;
        let (quad, quad_err) = quadrature_route(w, cutoff);
        let mut coefficients = Vec::with_capacity(cutoff + 1);
        let mut errors = Vec::with_capacity(cutoff + 1);
        for n in 0..=cutoff {
            let (direct, direct_err) = direct_route(w, n);
            let (value, err) = if direct_err <= quad_err[n] {
                (direct, direct_err)
            } else {
                (quad[n], quad_err[n])
            };
            if !value.is_finite() || err > Self::INSTABILITY_TOL * scale {
                return Err(Error::Instability {
                    w,
                    n,
                    estimate: err,
                });
            }
            coefficients.push(value);
            errors.push(err);
        }
        Ok(Self {
            w,
            coefficients,
            errors,
        })
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn cutoff(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient(&self, n: usize) -> Option<f64> {
        self.coefficients.get(n).copied()
    }

    /// Estimated absolute error of each coefficient.
    pub fn error_estimates(&self) -> &[f64] {
        &self.errors
    }

    /// `(n, c_n)` of the largest coefficient; ties go to the lower index.
    pub fn argmax(&self) -> (usize, f64) {
        self.coefficients.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (n, c)| if c > best.1 { (n, c) } else { best },
        )
    }

    pub fn argmin(&self) -> (usize, f64) {
        self.coefficients
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (n, c)| if c < best.1 { (n, c) } else { best },
            )
    }
}

/// `c_{w,n}` for `n = 0..=cutoff`.
pub fn witness_coefficients(w: f64, cutoff: usize) -> Result<WitnessSpectrum> {
    WitnessSpectrum::new(w, cutoff)
}

/// Alternating finite sum with Neumaier compensation.
///
/// Returns the value and an error estimate proportional to the sum of term
/// magnitudes, which is what the cancellation costs.
fn direct_route(w: f64, n: usize) -> (f64, f64) {
    let x = w * w;
    let mut term = 1.0f64;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut magnitude = 0.0f64;
    for m in 0..=n {
        if m > 0 {
            let k = (m - 1) as f64;
            term *= -x * (n - m + 1) as f64 / ((k + 2.0) * (k + 2.0));
            term *= (2.0 * k + 4.0) * (2.0 * k + 3.0) / ((k + 1.0) * (k + 3.0));
        }
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        magnitude += term.abs() * (m + 3) as f64;
    }
    let scale = x / PI;
    (scale * (sum + comp), scale * magnitude * f64::EPSILON)
}

/// Exact trapezoidal quadrature of
/// `c_{w,n} = 8w²/(π²(n+1)(n+2)) ∫₀^{π/2} cos²θ L_n^{(2)}(4w² cos²θ) dθ`.
///
/// The integrand is a trigonometric polynomial of degree `n + 1` in `2θ`,
/// so `cutoff + 2` equispaced nodes on `[0, π)` integrate every order up to
/// the cutoff without error. The node sum cancels heavily for large `w²n`,
/// so nodes, recurrence and sums are carried in double-double.
fn quadrature_route(w: f64, cutoff: usize) -> (Vec<f64>, Vec<f64>) {
    let nodes = cutoff + 2;
    let x = Dd::square(w) * 4.0;
    let mut sums = vec![Dd::ZERO; cutoff + 1];
    let mut magnitude = vec![0.0; cutoff + 1];
    let mut lag = vec![Dd::ZERO; cutoff + 1];
    // nodes i and K − i coincide in cos²
    for i in 0..=nodes / 2 {
        let weight = if i == 0 || 2 * i == nodes { 1.0 } else { 2.0 };
        let c2 = dd_cos_sq_pi_ratio(i, nodes);
        if c2.hi == 0.0 {
            continue;
        }
        let y = x * c2;
        lag[0] = Dd::new(1.0);
        if cutoff >= 1 {
            lag[1] = Dd::new(3.0) - y;
        }
        for k in 1..cutoff {
            let kf = k as f64;
            lag[k + 1] =
                ((Dd::new(2.0 * kf + 3.0) - y) * lag[k] - lag[k - 1] * (kf + 2.0)) / (kf + 1.0);
        }
        let c2w = c2 * weight;
        for n in 0..=cutoff {
            let t = c2w * lag[n];
            sums[n] = sums[n] + t;
            magnitude[n] += t.hi.abs();
        }
    }
    let base = x * DD_FRAC_1_PI / nodes as f64;
    let mut values = Vec::with_capacity(cutoff + 1);
    let mut errors = Vec::with_capacity(cutoff + 1);
    for n in 0..=cutoff {
        let pre = base / ((n + 1) * (n + 2)) as f64;
        let v = (pre * sums[n]).to_f64();
        values.push(v);
        errors.push(2.0 * f64::EPSILON * v.abs() + pre.hi * magnitude[n] * DD_EPS * (n + 4) as f64);
    }
    (values, errors)
}

/// Probability mass tolerated beyond the rows used to evaluate `P_w`.
pub const HEADROOM_TOL: f64 = 1e-11;

/// Number of extra rows the displaced state needs.
pub fn displacement_headroom(support: usize, alpha: Complex64) -> usize {
    let a = alpha.norm();
    (4.0 * (a * a + a * (support as f64).sqrt())).ceil() as usize + 12
}

/// Highest level carrying non-negligible amplitude, and the relative mass
/// dropped above it.
fn effective_support(state: &FockVector) -> (usize, f64) {
    let amps = state.amplitudes();
    let total = state.norm_sqr();
    let mut tail = 0.0;
    for n in (0..amps.len()).rev() {
        let next = tail + amps[n].norm_sqr();
        if next > 1e-32 * total {
            return (n, tail / total);
        }
        tail = next;
    }
    (0, 0.0)
}

/// `P_w(α)` together with an estimate of its absolute numerical error.
pub fn quasiprobability_point_with_error(
    state: &FockVector,
    spectrum: &WitnessSpectrum,
    alpha: Complex64,
) -> Result<(f64, f64)> {
    let (support, dropped) = effective_support(state);
    let required = support + displacement_headroom(support, alpha);
    let rows = required.min(spectrum.cutoff());
    let trimmed = state.resized(support);
    let phi = displaced_amplitudes(&trimmed, -alpha, rows);
    let norm = trimmed.norm_sqr();
    let kept: f64 = phi.iter().map(|a| a.norm_sqr()).sum();
    let tail = (norm - kept).max(0.0) / norm;
    if tail > HEADROOM_TOL {
        return Err(Error::HeadroomInsufficient {
            required,
            available: spectrum.cutoff(),
            tail,
        });
    }
    let coeffs = spectrum.coefficients();
    let errs = spectrum.error_estimates();
    let mut value = 0.0;
    let mut err = 0.0;
    let mut magnitude = 0.0;
    for (k, a) in phi.iter().enumerate() {
        let p = a.norm_sqr() / norm;
        value += coeffs[k] * p;
        err += errs[k] * p;
        magnitude += coeffs[k].abs() * p;
    }
    let c_max = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    err += tail * c_max + 2.0 * dropped.sqrt() * c_max + magnitude * 1e-13;
    Ok((value, err))
}

/// `P_w(α)` of a Fock-space state, via displaced amplitudes.
pub fn quasiprobability_point(
    state: &FockVector,
    spectrum: &WitnessSpectrum,
    alpha: Complex64,
) -> Result<f64> {
    quasiprobability_point_with_error(state, spectrum, alpha).map(|(v, _)| v)
}

/// Closed form for a coherent state: `[J₁(2w|γ−α|)]² / (π|γ−α|²)`.
pub fn coherent_point(gamma: Complex64, w: f64, alpha: Complex64) -> f64 {
    let d2 = (gamma - alpha).norm_sqr();
    jinc_sq(w, Complex64::new(d2, 0.0)).re / PI
}

/// `P_w(0)` of a normalized coherent superposition from pairwise overlaps.
///
/// Fails with `IllConditioned` when the pairwise terms are so large that
/// their cancellation leaves an absolute error above `1e-8`.
pub fn superposition_expectation(psi: &CoherentSuperposition, w: f64) -> Result<f64> {
    let (value, estimate) = superposition_terms(psi, w);
    if !(estimate <= 1e-8) {
        return Err(Error::IllConditioned { estimate });
    }
    if value.im.abs() > 1e-8 {
        return Err(Error::NonReal { imag: value.im });
    }
    Ok(value.re)
}

/// Raw double sum and its estimated absolute error, both divided by `π`.
pub(crate) fn superposition_terms(psi: &CoherentSuperposition, w: f64) -> (Complex64, f64) {
    let mu = psi.mu();
    let gamma = psi.gamma();
    let mut total = Complex64::default();
    let mut magnitude = 0.0;
    for l in 0..mu.len() {
        let gl = gamma[l].conj();
        for j in 0..mu.len() {
            let z = gl * gamma[j];
            let overlap = (z - 0.5 * (gamma[l].norm_sqr() + gamma[j].norm_sqr())).exp();
            let t = mu[l].conj() * mu[j] * jinc_sq(w, z) * overlap;
            total += t;
            let rel = 2.0 * j1_ratio_rel_error(2.0 * w * z.sqrt()) + 8.0 * f64::EPSILON;
            magnitude += t.norm() * rel;
        }
    }
    (total / PI, magnitude / PI)
}

/// Symmetric evaluation of the superposition objective for unnormalized
/// `μ`: returns `(⟨ψ|Ŵ|ψ⟩/⟨ψ|ψ⟩, error estimate, ⟨ψ|ψ⟩)`, or `None` when the
/// norm is not resolved by the overlap sum.
pub(crate) fn superposition_ratio(
    mu: &[Complex64],
    gamma: &[Complex64],
    w: f64,
) -> Option<(f64, f64, f64)> {
    let mut value = 0.0;
    let mut err = 0.0;
    let mut norm = 0.0;
    let mut norm_mag = 0.0;
    for l in 0..mu.len() {
        let gl = gamma[l].conj();
        for j in l..mu.len() {
            let z = gl * gamma[j];
            let overlap = (z - 0.5 * (gamma[l].norm_sqr() + gamma[j].norm_sqr())).exp();
            let weight = mu[l].conj() * mu[j] * overlap;
            let t = weight * jinc_sq(w, z);
            let k = if j == l { 1.0 } else { 2.0 };
            value += k * t.re;
            norm += k * weight.re;
            norm_mag += k * weight.norm();
            let rel = 2.0 * j1_ratio_rel_error(2.0 * w * z.sqrt()) + 8.0 * f64::EPSILON;
            err += k * t.norm() * rel;
        }
    }
    if !(norm > 0.0) || norm_mag * 1e-16 > 1e-12 * norm {
        return None;
    }
    Some((value / (PI * norm), err / (PI * norm), norm))
}

/// Axis-aligned rectangle of phase-space points with a uniform step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn square(half_width: f64, step: f64) -> Self {
        Self {
            re_min: -half_width,
            re_max: half_width,
            im_min: -half_width,
            im_max: half_width,
            step,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [
            self.re_min,
            self.re_max,
            self.im_min,
            self.im_max,
            self.step,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !ok || !(self.step > 0.0) || self.re_max < self.re_min || self.im_max < self.im_min {
            return Err(Error::InvalidParameter(format!("invalid grid {self:?}")));
        }
        if self.len_re() * self.len_im() > 50_000_000 {
            return Err(Error::InvalidParameter("grid too large".into()));
        }
        Ok(())
    }

    fn count(lo: f64, hi: f64, step: f64) -> usize {
        ((hi - lo) / step + 1e-9).floor() as usize + 1
    }

    pub fn len_re(&self) -> usize {
        Self::count(self.re_min, self.re_max, self.step)
    }

    pub fn len_im(&self) -> usize {
        Self::count(self.im_min, self.im_max, self.step)
    }

    pub fn point(&self, i_re: usize, i_im: usize) -> Complex64 {
        Complex64::new(
            self.re_min + i_re as f64 * self.step,
            self.im_min + i_im as f64 * self.step,
        )
    }
}

/// Values of `P_w` on a [`GridSpec`], stored raw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiprobabilityGrid {
    pub w: f64,
    pub spec: GridSpec,
    /// Row-major with the real part as the slow index.
    pub values: Vec<f64>,
    /// Largest per-point error estimate.
    pub max_error: f64,
    pub warnings: Vec<String>,
}

impl QuasiprobabilityGrid {
    pub fn value(&self, i_re: usize, i_im: usize) -> f64 {
        self.values[i_re * self.spec.len_im() + i_im]
    }

    /// `Σ P_w(α) · step²`.
    pub fn riemann_integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.step * self.spec.step
    }

    /// Smallest value and where it occurs.
    pub fn min(&self) -> (Complex64, f64) {
        self.extremum(|a, b| a < b)
    }

    pub fn max(&self) -> (Complex64, f64) {
        self.extremum(|a, b| a > b)
    }

    fn extremum(&self, better: impl Fn(f64, f64) -> bool) -> (Complex64, f64) {
        let n_im = self.spec.len_im();
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if better(v, self.values[best]) {
                best = i;
            }
        }
        (self.spec.point(best / n_im, best % n_im), self.values[best])
    }

    /// Largest `|P_w|` on the rectangle's edge.
    pub fn boundary_magnitude(&self) -> f64 {
        let (nr, ni) = (self.spec.len_re(), self.spec.len_im());
        let mut m: f64 = 0.0;
        for i in 0..nr {
            for j in 0..ni {
                if i == 0 || j == 0 || i + 1 == nr || j + 1 == ni {
                    m = m.max(self.value(i, j).abs());
                }
            }
        }
        m
    }
}

/// Relative edge magnitude above which a grid is reported as not covering
/// the state.
pub const COVERAGE_WARN: f64 = 1e-2;

/// Evaluates `P_w` on every grid point in parallel; the output order is the
/// grid order regardless of scheduling.
pub fn quasiprobability_grid(
    state: &FockVector,
    spectrum: &WitnessSpectrum,
    spec: &GridSpec,
) -> Result<QuasiprobabilityGrid> {
    spec.validate()?;
    let (nr, ni) = (spec.len_re(), spec.len_im());
    let results: Vec<Result<(f64, f64)>> = (0..nr * ni)
        .into_par_iter()
        .map(|idx| {
            quasiprobability_point_with_error(state, spectrum, spec.point(idx / ni, idx % ni))
        })
        .collect();
    let mut values = Vec::with_capacity(nr * ni);
    let mut max_error: f64 = 0.0;
    for r in results {
        let (v, e) = r?;
        values.push(v);
        max_error = max_error.max(e);
    }
    let mut grid = QuasiprobabilityGrid {
        w: spectrum.w(),
        spec: *spec,
        values,
        max_error,
        warnings: Vec::new(),
    };
    let peak = grid.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let edge = grid.boundary_magnitude();
    if edge > COVERAGE_WARN * peak {
        let msg = format!(
            "grid edge carries |P| = {edge:.3e} ({:.1}% of peak); the rectangle may not cover the state",
            100.0 * edge / peak
        );
        log::warn!("{msg}");
        grid.warnings.push(msg);
    }
    Ok(grid)
}
