//! Truncated Fock-basis representations of the states used throughout the
//! crate, and matrix elements of the displacement operator.
//!
//! Every constructor expands its state until the neglected amplitudes are
//! far below double precision, then cuts at the requested level (or the
//! smallest level whose tail mass is below `eps`) and renormalizes.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::ln_factorials;

/// Cutoff policy for Fock expansions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    /// Highest retained level; `None` selects it from the tail mass.
    pub cutoff: Option<usize>,
    /// Largest probability mass allowed beyond the cutoff.
    pub eps: f64,
}

impl Truncation {
    pub const DEFAULT_EPS: f64 = 1e-10;
    /// Hard ceiling on any expansion length.
    pub const MAX_LEVEL: usize = 400_000;

    pub fn auto() -> Self {
        Self {
            cutoff: None,
            eps: Self::DEFAULT_EPS,
        }
    }

    pub fn fixed(cutoff: usize) -> Self {
        Self {
            cutoff: Some(cutoff),
            eps: Self::DEFAULT_EPS,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Self::auto()
    }
}

impl From<usize> for Truncation {
    fn from(cutoff: usize) -> Self {
        Self::fixed(cutoff)
    }
}

/// Pure state as amplitudes `⟨n|ψ⟩` for `n = 0..=cutoff`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockVector {
    amplitudes: Vec<Complex64>,
}

impl FockVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter("empty amplitude vector".into()));
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::InvalidParameter("non-finite amplitude".into()));
        }
        Ok(Self { amplitudes })
    }

    /// Builds and normalizes.
    pub fn normalized_from(amplitudes: Vec<Complex64>) -> Result<Self> {
        let mut v = Self::new(amplitudes)?;
        v.normalize()?;
        Ok(v)
    }

    pub fn vacuum() -> Self {
        Self {
            amplitudes: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn cutoff(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, n: usize) -> Complex64 {
        self.amplitudes.get(n).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateInput("zero-norm state".into()));
        }
        for a in &mut self.amplitudes {
            *a /= norm;
        }
        Ok(())
    }

    /// `⟨self|other⟩`, padding the shorter vector with zeros.
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &FockVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Highest level with a nonzero amplitude.
    pub fn support(&self) -> usize {
        self.amplitudes
            .iter()
            .rposition(|a| a.norm_sqr() > 0.0)
            .unwrap_or(0)
    }

    pub fn mean_photon_number(&self) -> f64 {
        let n: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| k as f64 * a.norm_sqr())
            .sum();
        n / self.norm_sqr()
    }

    /// `⟨a⟩`.
    pub fn mean_amplitude(&self) -> Complex64 {
        let s: Complex64 = self
            .amplitudes
            .windows(2)
            .enumerate()
            .map(|(k, w)| w[0].conj() * w[1] * ((k + 1) as f64).sqrt())
            .sum();
        s / self.norm_sqr()
    }

    /// `e^{iθn̂}|ψ⟩`, which maps `|γ⟩` to `|γe^{iθ}⟩`.
    pub fn phase_rotated(&self, theta: f64) -> FockVector {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(n, a)| a * Complex64::from_polar(1.0, theta * n as f64))
            .collect();
        FockVector { amplitudes }
    }

    /// Copy zero-padded or cut to `cutoff` (no renormalization).
    pub fn resized(&self, cutoff: usize) -> FockVector {
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.resize(cutoff + 1, Complex64::default());
        FockVector { amplitudes }
    }

    /// Probability mass on levels of the given parity (`true` for odd).
    pub fn parity_mass(&self, odd: bool) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(n, _)| (n % 2 == 1) == odd)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Generates amplitudes until a full window of trailing terms is negligible
/// against the mass accumulated so far.
fn expand<F>(mut next: F) -> Result<Vec<Complex64>>
where
    F: FnMut(usize) -> Complex64,
{
    const WINDOW: usize = 8;
    const NEGLIGIBLE: f64 = 1e-40;
    let mut out = Vec::new();
    let mut mass = 0.0;
    let mut quiet = 0usize;
    for n in 0..=Truncation::MAX_LEVEL {
        let a = next(n);
        if !a.re.is_finite() || !a.im.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite amplitude at level {n}"
            )));
        }
        let p = a.norm_sqr();
        mass += p;
        out.push(a);
        if mass > 0.0 && p <= NEGLIGIBLE * mass {
            quiet += 1;
            if quiet >= WINDOW {
                return Ok(out);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::TruncationInsufficient {
        cutoff: Truncation::MAX_LEVEL,
        tail: f64::NAN,
        eps: 0.0,
    })
}

/// Applies the truncation policy to a fully expanded amplitude list.
fn truncate(full: Vec<Complex64>, trunc: Truncation) -> Result<FockVector> {
    let total: f64 = full.iter().map(|a| a.norm_sqr()).sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateInput(
            "state has no representable amplitude".into(),
        ));
    }
    // tail[n] = relative mass strictly above level n
    let mut tail = vec![0.0; full.len()];
    let mut acc = 0.0;
    for n in (0..full.len()).rev() {
        tail[n] = acc / total;
        acc += full[n].norm_sqr();
    }
    let cutoff = match trunc.cutoff {
        Some(c) => {
            let t = if c < full.len() { tail[c] } else { 0.0 };
            if t > trunc.eps {
                return Err(Error::TruncationInsufficient {
                    cutoff: c,
                    tail: t,
                    eps: trunc.eps,
                });
            }
            c
        }
        None => tail
            .iter()
            .position(|&t| t <= trunc.eps)
            .unwrap_or(full.len() - 1),
    };
    let mut amplitudes = full;
    amplitudes.resize(cutoff + 1, Complex64::default());
    FockVector::normalized_from(amplitudes)
}

/// Unnormalized-by-construction coherent amplitudes, in log space so large
/// `|γ|` does not underflow the prefactor.
fn coherent_amplitude_fn(gamma: Complex64) -> impl FnMut(usize) -> Complex64 {
    let ln_abs = gamma.norm().ln();
    let phase = gamma.arg();
    let mut log_mag = -0.5 * gamma.norm_sqr();
    move |n| {
        if n > 0 {
            log_mag += ln_abs - 0.5 * (n as f64).ln();
        }
        Complex64::from_polar(log_mag.exp(), phase * n as f64)
    }
}

/// Coherent amplitudes `e^{-|γ|²/2} γⁿ/√n!` for `n < len`, untruncated.
pub(crate) fn coherent_amplitudes(gamma: Complex64, len: usize) -> Vec<Complex64> {
    let mut f = coherent_amplitude_fn(gamma);
    (0..len).map(&mut f).collect()
}

/// `|γ⟩`.
pub fn coherent_state(gamma: Complex64, trunc: impl Into<Truncation>) -> Result<FockVector> {
    check_finite(gamma, "gamma")?;
    truncate(expand(coherent_amplitude_fn(gamma))?, trunc.into())
}

/// `|n⟩` embedded in a space with the given cutoff.
pub fn fock_state(n: usize, cutoff: usize) -> Result<FockVector> {
    if n > cutoff {
        return Err(Error::IndexOutOfRange { index: n, cutoff });
    }
    let mut amplitudes = vec![Complex64::default(); cutoff + 1];
    amplitudes[n] = Complex64::new(1.0, 0.0);
    Ok(FockVector { amplitudes })
}

/// Pure Gaussian state `D̂_α Ŝ(ξ)|0⟩` with
/// `Ŝ(ξ) = exp[(ξ*â² − ξâ†²)/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianPureState {
    pub xi: Complex64,
    pub alpha: Complex64,
}

impl GaussianPureState {
    pub const DEFAULT_XI_MAX: f64 = 5.0;

    pub fn new(xi: Complex64, alpha: Complex64) -> Result<Self> {
        Self::with_xi_max(xi, alpha, Self::DEFAULT_XI_MAX)
    }

    pub fn with_xi_max(xi: Complex64, alpha: Complex64, xi_max: f64) -> Result<Self> {
        check_finite(xi, "xi")?;
        check_finite(alpha, "alpha")?;
        if xi.norm() >= xi_max {
            return Err(Error::InvalidParameter(format!(
                "|xi| = {} not below {xi_max}",
                xi.norm()
            )));
        }
        Ok(Self { xi, alpha })
    }

    pub fn squeezed_vacuum(xi: Complex64) -> Result<Self> {
        Self::new(xi, Complex64::default())
    }
}

pub(crate) fn squeezed_amplitude_fn(state: &GaussianPureState) -> impl FnMut(usize) -> Complex64 {
    let r = state.xi.norm();
    let t = Complex64::from_polar(r.tanh(), state.xi.arg());
    let alpha = state.alpha;
    let beta = alpha + alpha.conj() * t;
    let first =
        (-(0.5 * alpha.norm_sqr()) - 0.5 * alpha.conj() * alpha.conj() * t).exp() / r.cosh().sqrt();
    let mut prev = Complex64::default();
    let mut cur = first;
    move |n| {
        if n == 0 {
            return cur;
        }
        // ψ_n from ψ_{n-1}, ψ_{n-2}
        let k = (n - 1) as f64;
        let next = (beta * cur - t * k.sqrt() * prev) / (n as f64).sqrt();
        prev = cur;
        cur = next;
        cur
    }
}

/// Fock expansion of `D̂_α Ŝ(ξ)|0⟩`.
pub fn squeezed_coherent(
    state: &GaussianPureState,
    trunc: impl Into<Truncation>,
) -> Result<FockVector> {
    truncate(expand(squeezed_amplitude_fn(state))?, trunc.into())
}

/// `N (â†)^m Ŝ(ξ)|0⟩`.
pub fn photon_added_squeezed(
    m: usize,
    xi: Complex64,
    trunc: impl Into<Truncation>,
) -> Result<FockVector> {
    let sq = GaussianPureState::squeezed_vacuum(xi)?;
    let mut base = squeezed_amplitude_fn(&sq);
    // sqrt((n+1)(n+2)...(n+m)) tracked incrementally
    let mut weight = (1..=m).map(|k| k as f64).product::<f64>();
    let full = expand(|level| {
        if level < m {
            return Complex64::default();
        }
        let n = level - m;
        if n > 0 {
            weight *= (n + m) as f64 / n as f64;
        }
        base(n) * weight.sqrt()
    })?;
    truncate(full, trunc.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CatParity {
    Even,
    Odd,
}

/// `(|γ⟩ ± |−γ⟩)/√(2(1 ± e^{−2|γ|²}))`.
///
/// The odd cat at `γ = 0` is 0/0 and is rejected; see
/// [`cat_state_or_limit`].
pub fn cat_state(
    gamma: Complex64,
    parity: CatParity,
    trunc: impl Into<Truncation>,
) -> Result<FockVector> {
    check_finite(gamma, "gamma")?;
    let x = gamma.norm_sqr();
    let norm_sq = match parity {
        CatParity::Even => 2.0 * (1.0 + (-2.0 * x).exp()),
        CatParity::Odd => -2.0 * (-2.0 * x).exp_m1(),
    };
    if !(norm_sq > 0.0) {
        return Err(Error::DegenerateInput(
            "odd cat state with gamma = 0 (request the single-photon limit explicitly)".into(),
        ));
    }
    let scale = 2.0 / norm_sq.sqrt();
    let odd = parity == CatParity::Odd;
    let mut coh = coherent_amplitude_fn(gamma);
    let full = expand(|n| {
        let a = coh(n);
        if (n % 2 == 1) == odd {
            a * scale
        } else {
            Complex64::default()
        }
    })?;
    truncate(full, trunc.into())
}

/// Like [`cat_state`], but returns the `γ → 0` limit (`|0⟩` or `|1⟩`)
/// instead of failing.
pub fn cat_state_or_limit(
    gamma: Complex64,
    parity: CatParity,
    trunc: impl Into<Truncation>,
) -> Result<FockVector> {
    let trunc = trunc.into();
    if gamma.norm() == 0.0 {
        let n = match parity {
            CatParity::Even => 0,
            CatParity::Odd => 1,
        };
        return fock_state(n, trunc.cutoff.unwrap_or(n).max(n));
    }
    cat_state(gamma, parity, trunc)
}

/// `⟨γ_a|γ_b⟩ = exp(−|γ_a|²/2 − |γ_b|²/2 + γ_a* γ_b)`.
pub fn coherent_overlap(gamma_a: Complex64, gamma_b: Complex64) -> Complex64 {
    (gamma_a.conj() * gamma_b - 0.5 * (gamma_a.norm_sqr() + gamma_b.norm_sqr())).exp()
}

/// Superposition `Σ_j μ_j |γ_j⟩` of `r` distinct coherent states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherentSuperposition {
    mu: Vec<Complex64>,
    gamma: Vec<Complex64>,
}

impl CoherentSuperposition {
    /// Minimal separation between amplitudes.
    pub const DISTINCT_TOL: f64 = 1e-9;

    pub fn new(mu: Vec<Complex64>, gamma: Vec<Complex64>) -> Result<Self> {
        if mu.is_empty() || mu.len() != gamma.len() {
            return Err(Error::InvalidParameter(format!(
                "need r >= 1 matching coefficients and amplitudes (got {} and {})",
                mu.len(),
                gamma.len()
            )));
        }
        for (j, (m, g)) in mu.iter().zip(&gamma).enumerate() {
            check_finite(*m, "mu")?;
            check_finite(*g, "gamma")?;
            if m.norm() == 0.0 {
                return Err(Error::InvalidParameter(format!("mu[{j}] is zero")));
            }
        }
        for a in 0..gamma.len() {
            for b in a + 1..gamma.len() {
                if (gamma[a] - gamma[b]).norm() < Self::DISTINCT_TOL {
                    return Err(Error::DegenerateInput(format!(
                        "gamma[{a}] and gamma[{b}] coincide"
                    )));
                }
            }
        }
        Ok(Self { mu, gamma })
    }

    /// Skips validation; used by the optimizer's hot path.
    pub(crate) fn from_parts_unchecked(mu: Vec<Complex64>, gamma: Vec<Complex64>) -> Self {
        Self { mu, gamma }
    }

    pub fn r(&self) -> usize {
        self.mu.len()
    }

    /// `κ = r − 1`.
    pub fn degree(&self) -> usize {
        self.r() - 1
    }

    pub fn mu(&self) -> &[Complex64] {
        &self.mu
    }

    pub fn gamma(&self) -> &[Complex64] {
        &self.gamma
    }

    /// `⟨ψ|ψ⟩` from coherent overlaps, and the sum of moduli of its terms.
    pub fn gram_norm_sqr(&self) -> (f64, f64) {
        let mut total = 0.0;
        let mut magnitude = 0.0;
        for (l, (ml, gl)) in self.mu.iter().zip(&self.gamma).enumerate() {
            total += ml.norm_sqr();
            magnitude += ml.norm_sqr();
            for (mj, gj) in self.mu.iter().zip(&self.gamma).skip(l + 1) {
                let t = ml.conj() * mj * coherent_overlap(*gl, *gj);
                total += 2.0 * t.re;
                magnitude += 2.0 * t.norm();
            }
        }
        (total, magnitude)
    }

    /// Rescales `μ` to unit norm. The overlap sum is used when it is well
    /// conditioned; nearly coincident amplitudes fall back to the Fock
    /// expansion.
    pub fn normalize(&mut self) -> Result<()> {
        let (gram, magnitude) = self.gram_norm_sqr();
        let norm_sq = if gram > 0.0 && magnitude * 1e-16 <= 1e-12 * gram {
            gram
        } else {
            self.fock_norm_sqr()?
        };
        if !(norm_sq > 0.0) || !norm_sq.is_finite() {
            return Err(Error::DegenerateInput("superposition has zero norm".into()));
        }
        let s = norm_sq.sqrt();
        for m in &mut self.mu {
            *m /= s;
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    fn fock_amplitudes(&self, eps: f64) -> Result<Vec<Complex64>> {
        let weight: f64 = self.mu.iter().map(|m| m.norm()).sum();
        // each coherent tail must stay below eps / weight² so the sum does
        let per_term = eps / (weight * weight).max(1.0);
        let mut len = 1;
        for g in &self.gamma {
            let v = coherent_state(*g, Truncation::auto().with_eps(per_term))?;
            len = len.max(v.cutoff() + 1);
        }
        let mut amps = vec![Complex64::default(); len];
        for (m, g) in self.mu.iter().zip(&self.gamma) {
            for (a, c) in amps.iter_mut().zip(coherent_amplitudes(*g, len)) {
                *a += m * c;
            }
        }
        Ok(amps)
    }

    fn fock_norm_sqr(&self) -> Result<f64> {
        Ok(self
            .fock_amplitudes(1e-14)?
            .iter()
            .map(|a| a.norm_sqr())
            .sum())
    }

    /// Fock expansion, renormalized after truncation.
    pub fn to_fock(&self, trunc: impl Into<Truncation>) -> Result<FockVector> {
        let trunc = trunc.into();
        let mut amps = self.fock_amplitudes(trunc.eps)?;
        if let Some(c) = trunc.cutoff {
            if c + 1 < amps.len() {
                let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
                let tail: f64 = amps[c + 1..].iter().map(|a| a.norm_sqr()).sum::<f64>() / total;
                if tail > trunc.eps {
                    return Err(Error::TruncationInsufficient {
                        cutoff: c,
                        tail,
                        eps: trunc.eps,
                    });
                }
            }
            amps.resize(c + 1, Complex64::default());
        }
        FockVector::normalized_from(amps)
    }
}

/// `n+1` coherent states on a ring of radius `ε` whose normalized
/// superposition tends to `|n⟩` as `ε → 0`.
///
/// The normalization is evaluated from its closed-form series: the overlap
/// sum cancels to `O(ε^{2n})` and cannot be used for small `ε`.
pub fn fock_via_coherent_ring(n: usize, eps: f64) -> Result<CoherentSuperposition> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "ring radius must be positive, got {eps}"
        )));
    }
    let terms = n + 1;
    let step = 2.0 * PI / terms as f64;
    // ln Σ_j ε^{2m}/m!, m = n + j(n+1)
    let lnf = ln_factorials(n + 64 * terms);
    let ln_eps = eps.ln();
    let mut logs = Vec::new();
    for j in 0..64 {
        let m = n + j * terms;
        let l = 2.0 * m as f64 * ln_eps - lnf[m];
        if !logs.is_empty() && l < logs[0] - 80.0 {
            break;
        }
        logs.push(l);
    }
    let lead = logs[0];
    let ln_series = lead + logs.iter().map(|l| (l - lead).exp()).sum::<f64>().ln();
    let ln_norm_sq = 2.0 * (terms as f64).ln() - eps * eps + ln_series;
    let c = (-0.5 * ln_norm_sq).exp();
    if !c.is_finite() {
        return Err(Error::IllConditioned {
            estimate: f64::INFINITY,
        });
    }
    let mut mu = Vec::with_capacity(terms);
    let mut gamma = Vec::with_capacity(terms);
    for k in 0..terms {
        let phi = step * k as f64;
        gamma.push(Complex64::from_polar(eps, phi));
        mu.push(Complex64::from_polar(c, -phi * n as f64));
    }
    CoherentSuperposition::new(mu, gamma)
}

/// Visits every element `⟨m|D̂_α|n⟩` for `m < rows`, `n < cols`.
///
/// Elements come from the associated-Laguerre closed form, evaluated along
/// each diagonal `|m − n| = d` with a forward Laguerre recurrence and an
/// incrementally updated `√(j!/(j+d)!) |α|^d e^{−|α|²/2}` prefactor.
fn for_each_displacement_element<F>(alpha: Complex64, rows: usize, cols: usize, mut visit: F)
where
    F: FnMut(usize, usize, Complex64),
{
    let x = alpha.norm_sqr();
    let abs = alpha.norm();
    let phi = if abs > 0.0 { alpha.arg() } else { 0.0 };
    let max_d = rows.max(cols);
    let mut lag = Vec::with_capacity(max_d + 1);
    // |α|^d e^{−x/2} / √d!
    let mut head = (-0.5 * x).exp();
    for d in 0..max_d {
        if d > 0 {
            head *= abs / (d as f64).sqrt();
        }
        let lower_len = if d < rows { (rows - d).min(cols) } else { 0 };
        let upper_len = if d > 0 && d < cols {
            (cols - d).min(rows)
        } else {
            0
        };
        let len = lower_len.max(upper_len);
        if len == 0 {
            continue;
        }
        crate::special::laguerre_fill(len - 1, d as f64, x, &mut lag);
        let below = Complex64::from_polar(1.0, d as f64 * phi);
        let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
        let above = Complex64::from_polar(sign, -(d as f64) * phi);
        let mut pre = head;
        for (j, l) in lag.iter().enumerate().take(len) {
            if j > 0 {
                pre *= (j as f64 / (j + d) as f64).sqrt();
            }
            let mag = pre * l;
            if j < lower_len {
                visit(j + d, j, below * mag);
            }
            if j < upper_len {
                visit(j, j + d, above * mag);
            }
        }
    }
}

/// Dense `⟨m|D̂_α|n⟩`, `m, n = 0..=cutoff`, with
/// `D̂_α = exp(αâ† − α*â)`.
pub fn displacement_matrix(alpha: Complex64, cutoff: usize) -> Array2<Complex64> {
    displacement_block(alpha, cutoff + 1, cutoff + 1)
}

/// Rectangular block of displacement matrix elements.
pub fn displacement_block(alpha: Complex64, rows: usize, cols: usize) -> Array2<Complex64> {
    let mut out = Array2::zeros((rows, cols));
    for_each_displacement_element(alpha, rows, cols, |m, n, v| out[[m, n]] = v);
    out
}

/// `⟨k|D̂_α|ψ⟩` for `k = 0..=cutoff`, touching only the populated columns.
pub fn displaced_amplitudes(state: &FockVector, alpha: Complex64, cutoff: usize) -> Vec<Complex64> {
    let cols = state.support() + 1;
    let amps = state.amplitudes();
    let mut out = vec![Complex64::default(); cutoff + 1];
    for_each_displacement_element(alpha, cutoff + 1, cols, |m, n, v| out[m] += v * amps[n]);
    out
}

fn check_finite(z: Complex64, name: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} is not finite")))
    }
}
