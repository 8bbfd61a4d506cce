//! Certificates of a minimal nonclassicality degree and of quantum
//! non-Gaussianity from the extrema of `P_w` and a bounds table.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundEntry, BoundsTable, Direction, Family, Source};
use crate::error::{Error, Result};
use crate::fock::{fock_state, FockVector};
use crate::optim::nelder_mead;
use crate::witness::{
    displacement_headroom, quasiprobability_grid, quasiprobability_point_with_error, GridSpec,
    WitnessSpectrum,
};

/// Where to look for the extrema of `P_w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSpec {
    /// Scan rectangle; chosen from the state's mean amplitude and photon
    /// number when absent.
    pub region: Option<GridSpec>,
    /// Grid step of the automatic region.
    pub step: f64,
    /// Simplex tolerance in `α` for the local polish.
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            region: None,
            step: 0.05,
            xtol: 1e-10,
            max_iter: 4000,
        }
    }
}

impl SearchSpec {
    pub fn with_region(region: GridSpec) -> Self {
        Self {
            region: Some(region),
            ..Self::default()
        }
    }

    /// The scan rectangle used for `state`.
    pub fn region_for(&self, state: &FockVector) -> GridSpec {
        if let Some(r) = self.region {
            return r;
        }
        let step = self.step;
        let snap = |x: f64| (x / step).round() * step;
        let center = state.mean_amplitude();
        let half = snap(2.0 + 1.5 * (state.mean_photon_number() + 1.0).sqrt() + step / 2.0);
        GridSpec {
            re_min: snap(center.re) - half,
            re_max: snap(center.re) + half,
            im_min: snap(center.im) - half,
            im_max: snap(center.im) + half,
            step,
        }
    }
}

/// Bound taken into account by a certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRef {
    pub family: Family,
    pub direction: Direction,
    pub w: f64,
    pub value: f64,
    pub margin_tol: f64,
    pub source: Source,
    pub heuristic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub state: String,
    pub w: f64,
    pub sup: f64,
    pub inf: f64,
    pub kappa_min: usize,
    /// Quantum non-Gaussian.
    pub qng: bool,
    /// Distance past each violated bound, aligned with `bounds_refs`.
    pub margins: Vec<f64>,
    pub bounds_refs: Vec<BoundRef>,
    pub tool_version: String,
}

impl Certificate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A certificate with the located extrema and diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Certification {
    pub certificate: Certificate,
    pub sup_at: Complex64,
    pub inf_at: Complex64,
    pub sup_error: f64,
    pub inf_error: f64,
    pub region: GridSpec,
    pub warnings: Vec<String>,
}

/// How far a heuristic bound may sit inside the true one.
pub fn one_sided_slack(entry: &BoundEntry) -> f64 {
    if !entry.heuristic {
        0.0
    } else if entry.converged {
        1e-6 * (1.0 + entry.value.abs())
    } else {
        1e-4 * (1.0 + entry.value.abs())
    }
}

struct Extremum {
    at: Complex64,
    value: f64,
    error: f64,
}

fn locate(
    state: &FockVector,
    spectrum: &WitnessSpectrum,
    region: &GridSpec,
    values: &[f64],
    direction: Direction,
    search: &SearchSpec,
) -> Result<Extremum> {
    let ni = region.len_im();
    let mut best = 0;
    for (idx, &v) in values.iter().enumerate() {
        if direction.better(v, values[best]) {
            best = idx;
        }
    }
    let start = region.point(best / ni, best % ni);
    let sign = match direction {
        Direction::Max => -1.0,
        Direction::Min => 1.0,
    };
    let inside = |a: &[f64]| {
        a[0] >= region.re_min
            && a[0] <= region.re_max
            && a[1] >= region.im_min
            && a[1] <= region.im_max
    };
    let objective = |a: &[f64]| {
        if !inside(a) {
            return f64::INFINITY;
        }
        match quasiprobability_point_with_error(state, spectrum, Complex64::new(a[0], a[1])) {
            Ok((v, _)) => sign * v,
            Err(_) => f64::INFINITY,
        }
    };
    let (x, _) = nelder_mead(
        objective,
        &[start.re, start.im],
        region.step / 2.0,
        search.xtol,
        search.max_iter,
    );
    let at = Complex64::new(x[0], x[1]);
    let (mut value, mut error) = quasiprobability_point_with_error(state, spectrum, at)?;
    let mut at = at;
    if direction.better(values[best], value) {
        at = start;
        (value, error) = quasiprobability_point_with_error(state, spectrum, start)?;
    }
    Ok(Extremum { at, value, error })
}

fn on_edge(region: &GridSpec, at: Complex64) -> bool {
    let tol = region.step;
    at.re - region.re_min < tol
        || region.re_max - at.re < tol
        || at.im - region.im_min < tol
        || region.im_max - at.im < tol
}

fn spectrum_for(state: &FockVector, w: f64, region: &GridSpec) -> Result<WitnessSpectrum> {
    let support = state.support();
    let corner = [region.re_min, region.re_max]
        .iter()
        .flat_map(|&re| [region.im_min, region.im_max].map(|im| Complex64::new(re, im).norm()))
        .fold(0.0f64, f64::max);
    let cutoff = support + displacement_headroom(support, Complex64::new(corner, 0.0)) + 8;
    crate::witness::witness_coefficients(w, cutoff)
}

/// Full certification with diagnostics.
pub fn certify_state_detailed(
    label: &str,
    state: &FockVector,
    w: f64,
    bounds: &BoundsTable,
    search: &SearchSpec,
) -> Result<Certification> {
    let missing = |what: String| Error::BoundsMissing(format!("{what} at w = {w}"));
    let mut ladder = Vec::with_capacity(bounds.r_max);
    for r in 1..=bounds.r_max {
        let rec = bounds
            .lookup(w, Family::Superposition { r })
            .ok_or_else(|| missing(format!("M{r}")))?;
        ladder.push(rec);
    }
    if ladder.is_empty() {
        return Err(missing("superposition bounds".into()));
    }
    let gaussian = bounds
        .lookup(w, Family::Gaussian)
        .ok_or_else(|| missing("Gaussian bounds".into()))?;

    let region = search.region_for(state);
    let spectrum = spectrum_for(state, w, &region)?;
    let grid = quasiprobability_grid(state, &spectrum, &region)?;
    let mut warnings = grid.warnings.clone();
    let hi = locate(
        state,
        &spectrum,
        &region,
        &grid.values,
        Direction::Max,
        search,
    )?;
    let lo = locate(
        state,
        &spectrum,
        &region,
        &grid.values,
        Direction::Min,
        search,
    )?;
    for (name, ext) in [("sup", &hi), ("inf", &lo)] {
        if on_edge(&region, ext.at) {
            let msg = format!(
                "{name} of P_w found at {} on the search boundary; enlarge the region",
                ext.at
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }

    let mut margins = Vec::new();
    let mut refs = Vec::new();
    let mut kappa_min = 0;
    let mut qng = false;
    let mut check = |family: Family, entry: &BoundEntry| -> bool {
        let (error, excess) = match entry.direction {
            Direction::Max => (hi.error, hi.value - entry.value),
            Direction::Min => (lo.error, entry.value - lo.value),
        };
        let margin_tol = 10.0 * (error + one_sided_slack(entry));
        if excess > margin_tol {
            margins.push(excess);
            refs.push(BoundRef {
                family,
                direction: entry.direction,
                w,
                value: entry.value,
                margin_tol,
                source: entry.source,
                heuristic: entry.heuristic,
            });
            true
        } else {
            false
        }
    };
    for rec in &ladder {
        let upper = check(rec.family, &rec.upper);
        let lower = check(rec.family, &rec.lower);
        if upper || lower {
            if let Family::Superposition { r } = rec.family {
                kappa_min = kappa_min.max(r);
            }
        }
    }
    let g_upper = check(Family::Gaussian, &gaussian.upper);
    let g_lower = check(Family::Gaussian, &gaussian.lower);
    if g_upper || g_lower {
        qng = true;
    }
    if qng && kappa_min == 0 {
        // every classical state is Gaussian; a Gaussian-hull violation
        // without an M₁ violation means the bounds are inconsistent
        let msg = "Gaussian bound violated while the classical bound holds; check the bounds table"
            .to_string();
        log::warn!("{msg}");
        warnings.push(msg);
        kappa_min = 1;
    }

    Ok(Certification {
        certificate: Certificate {
            state: label.to_string(),
            w,
            sup: hi.value,
            inf: lo.value,
            kappa_min,
            qng,
            margins,
            bounds_refs: refs,
            tool_version: crate::TOOL_VERSION.to_string(),
        },
        sup_at: hi.at,
        inf_at: lo.at,
        sup_error: hi.error,
        inf_error: lo.error,
        region,
        warnings,
    })
}

/// Scans `P_w` over the search region, polishes the extrema and compares
/// them with every bound at `w`.
pub fn certify_state(
    label: &str,
    state: &FockVector,
    w: f64,
    bounds: &BoundsTable,
    search: &SearchSpec,
) -> Result<Certificate> {
    certify_state_detailed(label, state, w, bounds, search).map(|c| c.certificate)
}

/// Certificate for the Fock state `|n⟩`.
pub fn certify_fock(
    n: usize,
    w: f64,
    bounds: &BoundsTable,
    search: &SearchSpec,
) -> Result<Certificate> {
    certify_state(&format!("fock:{n}"), &fock_state(n, n)?, w, bounds, search)
}
