//! Box-constrained minimization: a real-coded genetic search whose best
//! candidates are polished with projected BFGS, and small helpers for one-
//! and two-dimensional problems.
//!
//! Everything is deterministic for a fixed seed. Population fitness is
//! evaluated with rayon but collected in population order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An objective on a box. `eval` returns `None` for infeasible points.
pub trait Problem: Sync {
    fn dim(&self) -> usize;

    /// Sampling and clamping box, one `(lo, hi)` per coordinate.
    fn bounds(&self) -> Vec<(f64, f64)>;

    fn eval(&self, x: &[f64]) -> Option<f64>;

    /// Maps a point back onto the feasible set. Default: clamp to the box.
    fn project(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.bounds()) {
            *v = v.clamp(lo, hi);
        }
    }

    /// Points injected into the first restart's initial population.
    fn seeds(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneticConfig {
    pub seed: u64,
    pub population: usize,
    pub generations: usize,
    pub restarts: usize,
    pub tournament: usize,
    pub elite: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Mutation width as a fraction of each box side, first generation.
    pub sigma_start: f64,
    /// Same, last generation; annealed geometrically in between.
    pub sigma_end: f64,
    /// Candidates handed to the quasi-Newton stage.
    pub polish: usize,
    pub bfgs_iterations: usize,
    pub gradient_step: f64,
}

impl Default for GeneticConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            population: 200,
            generations: 500,
            restarts: 8,
            tournament: 3,
            elite: 4,
            crossover_rate: 0.9,
            mutation_rate: 0.15,
            sigma_start: 0.15,
            sigma_end: 1e-4,
            polish: 5,
            bfgs_iterations: 300,
            gradient_step: 1e-6,
        }
    }
}

impl GeneticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 || self.restarts == 0 || self.tournament == 0 {
            return Err(Error::InvalidParameter(
                "population must be >= 2, restarts and tournament >= 1".into(),
            ));
        }
        if self.elite >= self.population {
            return Err(Error::InvalidParameter(
                "elite must be smaller than population".into(),
            ));
        }
        let rates = [self.crossover_rate, self.mutation_rate];
        if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::InvalidParameter("rates must lie in [0, 1]".into()));
        }
        if !(self.sigma_start > 0.0 && self.sigma_end > 0.0 && self.gradient_step > 0.0) {
            return Err(Error::InvalidParameter(
                "mutation widths and gradient step must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: u64,
    /// The polished optimum met the gradient tolerance.
    pub converged: bool,
    /// Best value reached by each genetic restart.
    pub restart_values: Vec<f64>,
}

/// SplitMix64 step, used to derive independent per-restart seeds.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fitness<P: Problem + ?Sized>(problem: &P, x: &[f64]) -> f64 {
    match problem.eval(x) {
        Some(v) if v.is_finite() => v,
        _ => f64::INFINITY,
    }
}

struct Restart {
    population: Vec<(Vec<f64>, f64)>,
    evaluations: u64,
}

fn run_restart<P: Problem + ?Sized>(problem: &P, config: &GeneticConfig, index: usize) -> Restart {
    let dim = problem.dim();
    let bounds = problem.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(config.seed ^ splitmix64(index as u64)));
    let mut pop: Vec<Vec<f64>> = Vec::with_capacity(config.population);
    if index == 0 {
        for mut s in problem.seeds().into_iter().take(config.population / 2) {
            s.resize(dim, 0.0);
            problem.project(&mut s);
            pop.push(s);
        }
    }
    while pop.len() < config.population {
        let mut x: Vec<f64> = bounds
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..=hi))
            .collect();
        problem.project(&mut x);
        pop.push(x);
    }
    let mut scores: Vec<f64> = pop.par_iter().map(|x| fitness(problem, x)).collect();
    let mut evaluations = pop.len() as u64;

    let gens = config.generations.max(1);
    let decay = (config.sigma_end / config.sigma_start).powf(1.0 / gens as f64);
    let mut sigma = config.sigma_start;
    for _ in 0..config.generations {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        let mut next: Vec<Vec<f64>> = order
            .iter()
            .take(config.elite)
            .map(|&i| pop[i].clone())
            .collect();
        let mut next_scores: Vec<f64> = order
            .iter()
            .take(config.elite)
            .map(|&i| scores[i])
            .collect();
        let mut children = Vec::with_capacity(config.population - next.len());
        while next.len() + children.len() < config.population {
            let a = tournament(&scores, config.tournament, &mut rng);
            let b = tournament(&scores, config.tournament, &mut rng);
            let mut child = if rng.random::<f64>() < config.crossover_rate {
                blend(&pop[a], &pop[b], &mut rng)
            } else {
                pop[a].clone()
            };
            for (g, &(lo, hi)) in child.iter_mut().zip(&bounds) {
                if rng.random::<f64>() < config.mutation_rate {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *g += z * sigma * (hi - lo);
                }
            }
            problem.project(&mut child);
            children.push(child);
        }
        let child_scores: Vec<f64> = children.par_iter().map(|x| fitness(problem, x)).collect();
        evaluations += children.len() as u64;
        next.extend(children);
        next_scores.extend(child_scores);
        pop = next;
        scores = next_scores;
        sigma *= decay;
    }
    let mut population: Vec<(Vec<f64>, f64)> = pop.into_iter().zip(scores).collect();
    population.sort_by(|a, b| a.1.total_cmp(&b.1));
    Restart {
        population,
        evaluations,
    }
}

fn tournament(scores: &[f64], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut best = rng.random_range(0..scores.len());
    for _ in 1..size {
        let c = rng.random_range(0..scores.len());
        if scores[c] < scores[best] {
            best = c;
        }
    }
    best
}

/// BLX-0.5 crossover.
fn blend(a: &[f64], b: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let (lo, hi) = if x < y { (x, y) } else { (y, x) };
            let span = hi - lo;
            lo - 0.5 * span + rng.random::<f64>() * 2.0 * span
        })
        .collect()
}

/// Genetic search followed by BFGS polish of the best distinct candidates.
pub fn minimize<P: Problem + ?Sized>(problem: &P, config: &GeneticConfig) -> Result<Outcome> {
    config.validate()?;
    if problem.dim() == 0 {
        return Err(Error::InvalidParameter("problem has no parameters".into()));
    }
    let restarts: Vec<Restart> = (0..config.restarts)
        .map(|i| run_restart(problem, config, i))
        .collect();
    let mut evaluations: u64 = restarts.iter().map(|r| r.evaluations).sum();
    let restart_values: Vec<f64> = restarts.iter().map(|r| r.population[0].1).collect();

    let mut pool: Vec<(Vec<f64>, f64)> = restarts
        .into_iter()
        .flat_map(|r| r.population.into_iter().take(config.polish.max(1)))
        .filter(|(_, v)| v.is_finite())
        .collect();
    pool.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut picked: Vec<(Vec<f64>, f64)> = Vec::new();
    for cand in pool {
        if picked.len() >= config.polish.max(1) {
            break;
        }
        if picked.iter().all(|(p, _)| distance(p, &cand.0) > 1e-6) {
            picked.push(cand);
        }
    }
    if picked.is_empty() {
        return Err(Error::DegenerateInput("no feasible point found".into()));
    }
    let polished: Vec<(LocalResult, u64)> = picked
        .par_iter()
        .map(|(x, _)| bfgs(problem, x, config.bfgs_iterations, config.gradient_step))
        .collect();
    let mut best: Option<LocalResult> = None;
    for (res, evals) in polished {
        evaluations += evals;
        if best.as_ref().is_none_or(|b| res.value < b.value) {
            best = Some(res);
        }
    }
    let best = best.expect("at least one candidate");
    Ok(Outcome {
        x: best.x,
        value: best.value,
        evaluations,
        converged: best.converged,
        restart_values,
    })
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Debug)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
}

fn gradient<P: Problem + ?Sized>(problem: &P, x: &[f64], h: f64, evals: &mut u64) -> Vec<f64> {
    let f0 = fitness(problem, x);
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let step = h * (1.0 + x[i].abs());
        probe[i] = x[i] + step;
        let fp = fitness(problem, &probe);
        probe[i] = x[i] - step;
        let fm = fitness(problem, &probe);
        probe[i] = x[i];
        *evals += 2;
        g[i] = match (fp.is_finite(), fm.is_finite()) {
            (true, true) => (fp - fm) / (2.0 * step),
            (true, false) => (fp - f0) / step,
            (false, true) => (f0 - fm) / step,
            _ => 0.0,
        };
    }
    *evals += 1;
    g
}

/// Projected BFGS with central-difference gradients and Armijo
/// backtracking. Returns the result and the number of evaluations.
pub fn bfgs<P: Problem + ?Sized>(
    problem: &P,
    start: &[f64],
    max_iter: usize,
    h: f64,
) -> (LocalResult, u64) {
    let n = start.len();
    let mut evals = 0u64;
    let mut x = start.to_vec();
    problem.project(&mut x);
    let mut f = fitness(problem, &x);
    evals += 1;
    if !f.is_finite() {
        return (
            LocalResult {
                x,
                value: f,
                converged: false,
            },
            evals,
        );
    }
    let mut g = gradient(problem, &x, h, &mut evals);
    let mut hinv = identity(n);
    let mut converged = false;
    for _ in 0..max_iter {
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm < 1e-9 * (1.0 + f.abs()) {
            converged = true;
            break;
        }
        let mut dir: Vec<f64> = (0..n)
            .map(|i| -(0..n).map(|j| hinv[i][j] * g[j]).sum::<f64>())
            .collect();
        let mut slope: f64 = dir.iter().zip(&g).map(|(d, gi)| d * gi).sum();
        if slope >= 0.0 {
            hinv = identity(n);
            dir = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, d)| xi + t * d).collect();
            problem.project(&mut trial);
            let ft = fitness(problem, &trial);
            evals += 1;
            if ft.is_finite() && ft <= f + 1e-4 * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // no descent along the quasi-Newton or steepest direction
            converged = gnorm < 1e-6 * (1.0 + f.abs());
            break;
        };
        let g_new = gradient(problem, &x_new, h, &mut evals);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let small_step = s.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-14;
        let small_gain = (f - f_new).abs() <= 1e-16 * (1.0 + f.abs());
        x = x_new;
        f = f_new;
        g = g_new;
        if small_step && small_gain {
            converged = true;
            break;
        }
        if sy > 1e-14 {
            bfgs_update(&mut hinv, &s, &y, sy);
        }
    }
    (
        LocalResult {
            x,
            value: f,
            converged,
        },
        evals,
    )
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| h[i][j] * y[j]).sum())
        .collect();
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Nelder–Mead on an unconstrained function; stops when the simplex
/// diameter falls below `xtol` or after `max_iter` iterations.
pub fn nelder_mead<F>(
    f: F,
    start: &[f64],
    scale: f64,
    xtol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), eval(start)));
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += scale;
        let v = eval(&p);
        simplex.push((p, v));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .map(|(p, _)| distance(p, &simplex[0].0))
            .fold(0.0, f64::max);
        if diameter < xtol {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|(p, _)| p[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(1.0);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for (p, v) in simplex.iter_mut().skip(1) {
                    for (pi, bi) in p.iter_mut().zip(&best) {
                        *pi = bi + 0.5 * (*pi - bi);
                    }
                    *v = eval(p);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
pub fn golden_section<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        }
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x);
    [(a, fa), (b, fb), (x, fx)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap()
}

/// Root of `f` on a sign-changing bracket, by bisection to `tol`.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::RootBracketing { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
