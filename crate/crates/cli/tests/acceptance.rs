//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if the outcome differs from `EXPECTED_FAILURES`.
//!
//! `cargo test -p nqp-cli --test acceptance`

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nqp_cli::{cmd_bounds, cmd_table1, BoundsArgs, Format, RunConfig, Table1Args};
use nqp_core::certify::certify_state_detailed;
use nqp_core::io::data_rows;
use nqp_core::optim::GeneticConfig;
use nqp_core::{
    bounds_table, cat_scan_bounds, coherent_point, coherent_state, critical_table, extrema_cutoff,
    fock_state, fock_via_coherent_ring, optimize_gaussian_bounds, optimize_superposition_bounds,
    overall_extrema, quasiprobability_grid, quasiprobability_point, superposition_expectation,
    witness_coefficients, BoundsConfig, Direction, Error, FockVector, GaussianSearch, GridSpec,
    SearchSpec, StateDescriptor, Truncation, Witness,
};

/// Criteria known to fail when implemented as stated. On a square of
/// half-width 4 the `|α|⁻³` tail of `P_w` holds about `2√2/(π²wR)` of the
/// mass (0.045 at w = 1.6), so the raw Riemann sums land near 0.93–0.97.
const EXPECTED_FAILURES: &[u32] = &[4];

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn table_transitions() -> Outcome {
    let t = Instant::now();
    let args = Table1Args {
        w_lo: 1.001,
        w_hi: 2.7,
        all_rows: false,
    };
    let art = cmd_table1(&args, Format::Csv, 0).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let rows = data_rows(&art.text);
    let closed: Vec<&Vec<&str>> = rows.iter().filter(|r| r[5] == "true").collect();
    let want_w = [1.550, 1.795, 2.027, 2.239, 2.436, 2.619];
    let want_sup = [0, 2, 2, 4, 4, 6];
    let want_inf = [1, 1, 3, 3, 5, 5];
    check(closed.len() == 6, || {
        format!("{} closed rows", closed.len())
    })?;
    let mut worst: f64 = 0.0;
    for (i, row) in closed.iter().enumerate() {
        let w_max: f64 = row[1].parse().unwrap();
        let (ns, ni): (usize, usize) = (row[2].parse().unwrap(), row[3].parse().unwrap());
        worst = worst.max((w_max - want_w[i]).abs());
        check((w_max - want_w[i]).abs() <= 0.005, || {
            format!("transition {w_max} vs {}", want_w[i])
        })?;
        check(ns == want_sup[i] && ni == want_inf[i], || {
            format!(
                "row {i}: ({ns}, {ni}) vs ({}, {})",
                want_sup[i], want_inf[i]
            )
        })?;
    }
    check(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("max deviation {worst:.4}, {elapsed:.2?}"))
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut b = BigInt::one();
    for i in 0..k {
        b = b * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    b
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

/// Exact `c_{w,n}` for the binary value of `w`.
fn exact_coefficient(n: u64, w: f64) -> f64 {
    let wr = BigRational::from_float(w).unwrap();
    let w2 = &wr * &wr;
    let mut sum = BigRational::zero();
    let mut power = BigRational::one();
    let mut falling = BigInt::one();
    for m in 0..=n {
        let f = factorial(m + 1);
        sum += &power * BigRational::new(&falling * binomial(2 * m + 2, m), &f * &f);
        power *= -w2.clone();
        falling *= BigInt::from(n - m);
    }
    w * w / PI * sum.to_f64().unwrap()
}

fn coefficient_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let w = 3.0 * (1.0 - rng.random::<f64>());
        let c0 = witness_coefficients(w, 0).unwrap().coefficients()[0];
        check((c0 - w * w / PI).abs() < 1e-14, || {
            format!("c_0 at w={w}: {c0}")
        })?;
    }
    let c11 = witness_coefficients(1.0, 1).unwrap().coefficients()[1];
    check(c11.abs() < 1e-14, || format!("c_{{1,1}} = {c11}"))?;
    let mut worst: f64 = 0.0;
    for w in [0.35, 1.0, 1.6, 2.2, 2.7] {
        let s = witness_coefficients(w, 100).unwrap();
        for n in 0..=100u64 {
            let exact = exact_coefficient(n, w);
            let got = s.coefficients()[n as usize];
            let rel = if exact == 0.0 {
                got.abs()
            } else {
                ((got - exact) / exact).abs()
            };
            worst = worst.max(rel);
            check(rel <= 1e-12, || {
                format!("w={w} n={n}: {got:e} vs {exact:e}")
            })?;
        }
    }
    Ok(format!("oracle max relative error {worst:.1e}"))
}

fn in_disc(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let r = radius * rng.random::<f64>().sqrt();
    Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
}

fn closed_form_equivalence() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let gamma = in_disc(&mut rng, 3.0);
        let alpha = in_disc(&mut rng, 3.0);
        let w = 2.7 * (1.0 - rng.random::<f64>());
        let s = witness_coefficients(w, 100).unwrap();
        let psi = coherent_state(gamma, Truncation::fixed(100)).unwrap();
        let a = quasiprobability_point(&psi, &s, alpha).map_err(|e| e.to_string())?;
        let b = coherent_point(gamma, w, alpha);
        worst = worst.max((a - b).abs());
        check((a - b).abs() < 1e-8, || {
            format!("γ={gamma} α={alpha} w={w}: {a} vs {b}")
        })?;
    }
    let elapsed = t.elapsed();
    check(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("max difference {worst:.1e}, {elapsed:.2?}"))
}

fn normalization() -> Outcome {
    let w = 1.6;
    let s = witness_coefficients(w, 400).unwrap();
    let spec = GridSpec::square(4.0, 0.1);
    let mut report = Vec::new();
    let mut ok = true;
    for desc in [
        "fock:0",
        "fock:1",
        "cat:even:1",
        "pasv:1",
        "pasv:2",
        "pasv:3",
        "pasv:4",
    ] {
        let state = desc.parse::<StateDescriptor>().unwrap().build().unwrap();
        let total = quasiprobability_grid(&state, &s, &spec)
            .unwrap()
            .riemann_integral();
        ok &= (total - 1.0).abs() <= 1e-2;
        report.push(format!("{desc} {total:.4}"));
    }
    let report = report.join(", ");
    if ok {
        Ok(report)
    } else {
        Err(report)
    }
}

fn kappa_at(w: f64) -> usize {
    let t = critical_table(1.001, 2.7).unwrap();
    t.rows
        .iter()
        .find(|r| r.w_min <= w && w <= r.w_max)
        .map(|r| r.kappa)
        .unwrap()
}

fn pasv_certifications() -> Outcome {
    let t = Instant::now();
    let config = BoundsConfig::default();
    let mut report = Vec::new();
    // (m, w, κ lower limit, exact)
    for (m, w, kappa, exact) in [
        (1, 1.6, 1, true),
        (2, 1.8, 2, false),
        (3, 2.0, 3, false),
        (4, 2.2, 4, false),
    ] {
        let r_max = kappa_at(w) + 1;
        let table = bounds_table(&[w], r_max, &config).map_err(|e| e.to_string())?;
        let desc: StateDescriptor = format!("pasv:{m}:0.1").parse().unwrap();
        let state = desc.build().unwrap();
        let c =
            certify_state_detailed(&desc.to_string(), &state, w, &table, &SearchSpec::default())
                .map_err(|e| e.to_string())?;
        let k = c.certificate.kappa_min;
        check(if exact { k == kappa } else { k >= kappa }, || {
            format!(
                "m={m} w={w}: κ_min {k}, want {}{kappa}",
                if exact { "" } else { ">=" }
            )
        })?;
        check(c.certificate.qng, || {
            format!("m={m} w={w}: not certified non-Gaussian")
        })?;
        report.push(format!("m={m} κ={k}"));
    }
    let elapsed = t.elapsed();
    check(elapsed < Duration::from_secs(1800), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("{}, {elapsed:.0?}", report.join(", ")))
}

fn cat_oracle() -> Outcome {
    let config = BoundsConfig::default();
    let mut worst: f64 = 0.0;
    for w in [1.4, 1.7, 2.0, 2.4] {
        for d in [Direction::Max, Direction::Min] {
            let opt = optimize_superposition_bounds(2, w, d, &config).map_err(|e| e.to_string())?;
            let cat = cat_scan_bounds(w, d).map_err(|e| e.to_string())?;
            worst = worst.max((opt.value - cat.value).abs());
            check((opt.value - cat.value).abs() <= 1e-4, || {
                format!("w={w} {d}: optimizer {} vs cat {}", opt.value, cat.value)
            })?;
        }
    }
    // the even cat sits at the vacuum before the first transition, the odd
    // cat at |1⟩ before the second
    for (ws, d) in [
        (&[1.2, 1.4, 1.5][..], Direction::Max),
        (&[1.2, 1.5, 1.7, 1.78][..], Direction::Min),
    ] {
        for &w in ws {
            let g = cat_scan_bounds(w, d).unwrap().gamma;
            check(g < 1e-6, || format!("w={w} {d}: optimal γ = {g}"))?;
        }
    }
    for (w, d) in [(1.6, Direction::Max), (1.82, Direction::Min)] {
        let g = cat_scan_bounds(w, d).unwrap().gamma;
        check(g > 0.1, || {
            format!("w={w} {d}: optimal γ = {g} past the transition")
        })?;
    }
    Ok(format!("max |optimizer − cat| {worst:.1e}"))
}

fn gaussian_hull() -> Outcome {
    let config = BoundsConfig::default();
    let squeeze = |w: &Witness| match w {
        Witness::Gaussian(g) => (g.xi.norm(), g.alpha.norm()),
        other => panic!("non-Gaussian witness {other:?}"),
    };
    let mut report = Vec::new();
    for w in [1.2, 1.4, 1.5, 1.8, 2.0, 2.4] {
        let hi = optimize_gaussian_bounds(w, Direction::Max, &config).map_err(|e| e.to_string())?;
        let lo = optimize_gaussian_bounds(w, Direction::Min, &config).map_err(|e| e.to_string())?;
        // coherent states peak at their own amplitude with value w²/π
        let g1 = w * w / PI;
        check(lo.value < 0.0, || {
            format!("w={w}: Gaussian inf {}", lo.value)
        })?;
        check(hi.value >= g1 - 1e-9, || {
            format!("w={w}: Gaussian sup {} < {g1}", hi.value)
        })?;
        let (xi_hi, a_hi) = squeeze(&hi.witness);
        let (xi_lo, _) = squeeze(&lo.witness);
        if w < 1.55 {
            check(
                (hi.value - g1).abs() < 1e-9 && xi_hi < 1e-4 && a_hi < 1e-4,
                || {
                    format!(
                        "w={w}: sup {} at |ξ|={xi_hi}, expected vacuum {g1}",
                        hi.value
                    )
                },
            )?;
        } else {
            check(xi_lo > xi_hi, || {
                format!("w={w}: |ξ| at min {xi_lo} vs at max {xi_hi}")
            })?;
            report.push(format!("w={w} |ξ| {xi_lo:.3}>{xi_hi:.3}"));
        }
    }
    Ok(report.join(", "))
}

fn random_vector(rng: &mut ChaCha8Rng, cutoff: usize) -> FockVector {
    let amps = (0..=cutoff)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    FockVector::normalized_from(amps).unwrap()
}

fn spectral_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut closest: f64 = f64::INFINITY;
    for w in [1.6, 2.0, 2.4] {
        let overall = overall_extrema(w, extrema_cutoff(w)).unwrap();
        let s = witness_coefficients(w, 220).unwrap();
        for _ in 0..100_000 {
            let psi = random_vector(&mut rng, 40);
            let alpha = in_disc(&mut rng, 3.0);
            let v = quasiprobability_point(&psi, &s, alpha).map_err(|e| e.to_string())?;
            closest = closest.min(overall.sup - v).min(v - overall.inf);
            check(v <= overall.sup + 1e-8 && v >= overall.inf - 1e-8, || {
                format!(
                    "w={w} α={alpha}: {v} outside [{}, {}]",
                    overall.inf, overall.sup
                )
            })?;
        }
    }
    Ok(format!(
        "3×10⁵ samples, closest approach to a bound {closest:.3}"
    ))
}

fn ring_limit() -> Outcome {
    let mut worst_fid: f64 = 1.0;
    for n in 0..=4 {
        let ring = fock_via_coherent_ring(n, 0.01).map_err(|e| e.to_string())?;
        let psi = ring.to_fock(Truncation::auto().with_eps(1e-20)).unwrap();
        let f = psi.fidelity(&fock_state(n, n).unwrap());
        worst_fid = worst_fid.min(f);
        check(f > 0.999, || format!("n={n}: fidelity {f}"))?;
    }
    let mut worst_err: f64 = 0.0;
    for w in [1.6, 2.0] {
        let c = witness_coefficients(w, 4).unwrap();
        for n in 0..=4 {
            let exact = c.coefficients()[n];
            let mut errors = Vec::new();
            let mut eps = 0.5;
            loop {
                let ring = fock_via_coherent_ring(n, eps).map_err(|e| e.to_string())?;
                match superposition_expectation(&ring, w) {
                    Ok(v) => errors.push((v - exact).abs()),
                    Err(Error::IllConditioned { .. }) => break,
                    Err(e) => return Err(e.to_string()),
                }
                eps *= 0.7;
                if eps < 1e-8 {
                    break;
                }
            }
            let last = *errors.last().ok_or("no well-conditioned radius")?;
            worst_err = worst_err.max(last);
            check(last < 1e-4, || {
                format!("w={w} n={n}: final error {last:e} ({} radii)", errors.len())
            })?;
            // below 1e-8 the pairwise cancellation leaves only rounding noise
            check(
                errors.windows(2).all(|p| p[1] <= p[0] || p[1] < 1e-8),
                || format!("w={w} n={n}: errors not decreasing {errors:?}"),
            )?;
        }
    }
    Ok(format!(
        "min fidelity {worst_fid:.6}, worst final error {worst_err:.1e}"
    ))
}

fn determinism() -> Outcome {
    let cfg = RunConfig {
        bounds: BoundsConfig {
            genetic: GeneticConfig {
                population: 40,
                generations: 40,
                restarts: 2,
                ..GeneticConfig::default()
            },
            gaussian: GaussianSearch {
                random_starts: 4,
                ..GaussianSearch::default()
            },
            include_gaussian: true,
        },
        ..RunConfig::default()
    };
    let args = BoundsArgs {
        w: "1.5,1.9".into(),
        r_max: 2,
        no_gaussian: false,
        population: None,
        generations: None,
        restarts: None,
        save_table: None,
    };
    let a = cmd_bounds(&args, &cfg, Format::Csv, 42).map_err(|e| e.to_string())?;
    let b = cmd_bounds(&args, &cfg, Format::Csv, 42).map_err(|e| e.to_string())?;
    let ja = cmd_bounds(&args, &cfg, Format::Json, 42).map_err(|e| e.to_string())?;
    let jb = cmd_bounds(&args, &cfg, Format::Json, 42).map_err(|e| e.to_string())?;
    check(a.text == b.text, || {
        "CSV output differs between runs".into()
    })?;
    check(ja.text == jb.text, || {
        "JSON output differs between runs".into()
    })?;
    Ok(format!(
        "{} + {} bytes identical",
        a.text.len(),
        ja.text.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "critical w table", table_transitions),
        (
            2,
            "coefficient identities and oracle",
            coefficient_identities,
        ),
        (3, "closed form vs Fock basis", closed_form_equivalence),
        (4, "normalization on finite grids", normalization),
        (
            5,
            "photon-added squeezed certifications",
            pasv_certifications,
        ),
        (6, "r = 2 bounds vs cat scan", cat_oracle),
        (7, "Gaussian hull", gaussian_hull),
        (8, "spectral bounds on random states", spectral_bounds),
        (9, "coherent ring limit", ring_limit),
        (10, "deterministic bounds output", determinism),
    ];
    let only: Option<u32> = std::env::var("NQP_CRITERION")
        .ok()
        .and_then(|s| s.parse().ok());
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(format!(
                "panic: {:?}",
                p.downcast_ref::<String>()
                    .map(|s| s.as_str())
                    .or(p.downcast_ref::<&str>().copied())
            ))
        });
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        let expected_fail = EXPECTED_FAILURES.contains(&id);
        let note = if expected_fail {
            " (known unattainable)"
        } else {
            ""
        };
        println!(
            "criterion {id:>2} {tag}{note}: {name}: {detail} [{:.1?}]",
            t.elapsed()
        );
        if outcome.is_ok() == expected_fail {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: outcomes as expected");
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
