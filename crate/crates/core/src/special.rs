//! Special functions used by the witness: log-factorials, generalized
//! Laguerre polynomials and the squared first-order Bessel ratio
//! `[J₁(2w√z)]² / z` for complex `z`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

/// `ln(k!)` for `k = 0..=n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(acc);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Generalized Laguerre polynomials `L_j^{(a)}(x)` for `j = 0..=n` by the
/// forward three-term recurrence.
pub fn laguerre_sequence(n: usize, a: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    laguerre_fill(n, a, x, &mut out);
    out
}

/// Same as [`laguerre_sequence`] but reuses the caller's buffer.
pub fn laguerre_fill(n: usize, a: f64, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if n == 0 {
        return;
    }
    out.push(1.0 + a - x);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * out[k] - (kf + a) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
}

/// `[J₁(2w√z)]² / z`, an entire function of `z` with value `w²` at the
/// origin. Independent of the branch of `√z`.
pub fn jinc_sq(w: f64, z: Complex64) -> Complex64 {
    if z.norm() < SINGULAR_Z {
        return Complex64::new(w * w, 0.0);
    }
    let h = j1_ratio(2.0 * w * z.sqrt());
    h * h * (w * w)
}

/// Below this modulus `jinc_sq` returns its limit value.
pub const SINGULAR_Z: f64 = 1e-12;

/// `J₁(x) / (x/2)` for complex `x` with `Re x ≥ 0`.
///
/// Three routes: the power series in `u = -x²/4` where it does not cancel,
/// the Hankel expansion for large `|x|`, and Miller's backward recurrence in
/// between.
pub fn j1_ratio(x: Complex64) -> Complex64 {
    let ax = x.norm();
    let loss = ax - x.im.abs();
    if ax <= SERIES_RADIUS || loss <= SERIES_LOSS {
        j1_ratio_series(x)
    } else if ax >= HANKEL_RADIUS {
        j1_hankel(x) / (x * 0.5)
    } else {
        j1_miller(x) / (x * 0.5)
    }
}

/// Relative error model for [`j1_ratio`]: the power series loses
/// `e^{|x| − |Im x|}` to cancellation, the other routes hold about `1e-14`.
pub fn j1_ratio_rel_error(x: Complex64) -> f64 {
    let ax = x.norm();
    let loss = ax - x.im.abs();
    if ax <= SERIES_RADIUS || loss <= SERIES_LOSS {
        4.0 * f64::EPSILON * loss.exp()
    } else {
        1e-14
    }
}

/// Double-double real: an unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`,
/// good to about 32 significant digits.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub(crate) const DD_PI: Dd = Dd {
    hi: std::f64::consts::PI,
    lo: 1.2246467991473532e-16,
};
pub(crate) const DD_FRAC_1_PI: Dd = Dd {
    hi: std::f64::consts::FRAC_1_PI,
    lo: -1.9678676675182486e-17,
};
/// Unit roundoff of [`Dd`] arithmetic, with a little slack.
pub(crate) const DD_EPS: f64 = 1e-31;

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

fn split(a: f64) -> (f64, f64) {
    let t = 134_217_729.0 * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

/// Dekker's exact product, avoiding a software `fma` on targets without one.
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn square(x: f64) -> Self {
        let (p, e) = two_prod(x, x);
        Dd { hi: p, lo: e }
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;
    fn add(self, y: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, y.hi);
        let (t, f) = two_sum(self.lo, y.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }
}

impl std::ops::Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    fn sub(self, y: Dd) -> Dd {
        self + -y
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    fn mul(self, y: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, y.hi);
        quick_two_sum(p, e + (self.hi * y.lo + self.lo * y.hi))
    }
}

impl std::ops::Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        quick_two_sum(p, e + self.lo * b)
    }
}

impl std::ops::Div<f64> for Dd {
    type Output = Dd;
    fn div(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let q2 = ((self.hi - p) - e + self.lo) / b;
        quick_two_sum(q1, q2)
    }
}

/// `cos²(π i / k)` in double-double, for `0 ≤ i ≤ k/2`.
pub(crate) fn dd_cos_sq_pi_ratio(i: usize, k: usize) -> Dd {
    debug_assert!(2 * i <= k);
    // cos θ for θ ≤ π/4, otherwise sin(π/2 − θ)
    let (num, den, use_sin) = if 4 * i <= k {
        (i, k, false)
    } else {
        (k - 2 * i, 2 * k, true)
    };
    let y = DD_PI * num as f64 / den as f64;
    let y2 = -(y * y);
    let (mut term, mut sum, first) = if use_sin {
        (y, y, 1usize)
    } else {
        (Dd::new(1.0), Dd::new(1.0), 0)
    };
    for j in 1..20 {
        let a = (2 * j + first - 1) as f64;
        let b = (2 * j + first) as f64;
        term = term * y2 / (a * b);
        sum = sum + term;
        if term.hi.abs() < 1e-34 {
            break;
        }
    }
    sum * sum
}

const SERIES_RADIUS: f64 = 8.0;
const SERIES_LOSS: f64 = 7.0;
const HANKEL_RADIUS: f64 = 17.0;

/// `Σ_k u^k / (k! (k+1)!)` with `u = -x²/4`.
pub fn j1_ratio_series(x: Complex64) -> Complex64 {
    let u = -(x * x) * 0.25;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        term *= u / ((kf + 1.0) * (kf + 2.0));
        sum += term;
        k += 1;
        if term.norm() <= 1e-18 * sum.norm().max(1e-300) && kf * kf > u.norm() {
            break;
        }
        if k > 500 {
            break;
        }
    }
    sum
}

/// Hankel asymptotic expansion of `J₁(x)`, truncated at the smallest term.
pub fn j1_hankel(x: Complex64) -> Complex64 {
    let mu = 4.0;
    let mut p = Complex64::new(1.0, 0.0);
    let mut q = Complex64::new(0.0, 0.0);
    let inv = x.inv();
    let mut term = Complex64::new(1.0, 0.0);
    let mut prev = f64::INFINITY;
    for k in 1..200usize {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term = term * inv * ((mu - odd * odd) / (8.0 * kf));
        let mag = term.norm();
        if mag >= prev || mag < 1e-18 {
            break;
        }
        prev = mag;
        // Even orders feed P with alternating sign, odd orders feed Q.
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
    }
    let chi = x - 3.0 * FRAC_PI_4;
    (Complex64::new(2.0 / PI, 0.0) / x).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Miller's backward recurrence for `J₁(x)`, normalized with
/// `J₀ + 2 Σ J₂ₖ = 1`.
pub fn j1_miller(x: Complex64) -> Complex64 {
    let start = (x.norm() as usize) + 40;
    let start = start + (start & 1);
    let two_over_x = 2.0 / x;
    let mut next = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1e-30, 0.0);
    let mut norm = Complex64::new(0.0, 0.0);
    let mut j1 = Complex64::new(0.0, 0.0);
    // cur holds J_k, next holds J_{k+1}
    for k in (1..=start).rev() {
        let prev = two_over_x * (k as f64) * cur - next;
        next = cur;
        cur = prev;
        let order = k - 1;
        if order == 1 {
            j1 = cur;
        }
        if order % 2 == 0 && order > 0 {
            norm += 2.0 * cur;
        }
        if cur.norm() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += cur;
    j1 / norm
}

/// Real `J₁(x)` through the complex routes.
pub fn bessel_j1(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ax = x.abs();
    let v = (j1_ratio(Complex64::new(ax, 0.0)) * (ax * 0.5)).re;
    if x < 0.0 {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_double() {
        // (1 + 2⁻⁴⁰)² = 1 + 2⁻³⁹ + 2⁻⁸⁰ exactly
        let a = Dd::new(1.0 + 2f64.powi(-40));
        let sq = a * a;
        assert_eq!(sq.hi, 1.0 + 2f64.powi(-39));
        assert_eq!(sq.lo, 2f64.powi(-80));
        let third = Dd::new(1.0) / 3.0;
        let back = third * 3.0 - Dd::new(1.0);
        assert!(back.to_f64().abs() < 1e-31);
        assert!((DD_PI * DD_FRAC_1_PI - Dd::new(1.0)).to_f64().abs() < 1e-31);
        for (i, k, want) in [
            (1, 4, 0.5),
            (1, 3, 0.25),
            (1, 6, 0.75),
            (0, 5, 1.0),
            (2, 4, 0.0),
        ] {
            let c = dd_cos_sq_pi_ratio(i, k);
            assert!((c - Dd::new(want)).to_f64().abs() < 1e-31, "{i}/{k}: {c:?}");
        }
        // cos²(3π/17) to 32 digits
        let want = Dd {
            hi: 0.7228691778882691,
            lo: 3.488983511017719e-17,
        };
        assert!((dd_cos_sq_pi_ratio(3, 17) - want).to_f64().abs() < 1e-31);
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Reference values from 40-digit evaluation of J₁(2w√z)²/z.
    const REFERENCE: &[(f64, (f64, f64), (f64, f64))] = &[
        (
            1.6,
            (0.3, 0.2),
            (0.96434488283275515433, -0.64528532878924935585),
        ),
        (1.6, (4.0, 0.0), (0.0082480461711275624733, 0.0)),
        (2.7, (36.0, 0.0), (0.000023780920753657729272, 0.0)),
        (
            2.7,
            (-30.0, 5.0),
            (-4.6673465167966284716e20, 1.0280085812563232459e22),
        ),
        (
            2.0,
            (10.0, 10.0),
            (49.867158872780695556, 53.989551130881287501),
        ),
        (
            2.0,
            (3.0, -0.5),
            (-0.011098530706983708179, -0.000045939596878779786796),
        ),
        (
            1.3,
            (-0.7, -2.2),
            (-8.5821945380221165467, 2.0274057740864494035),
        ),
        (
            2.5,
            (20.0, -3.0),
            (-0.0082441028926330815409, 0.0044557867703317986021),
        ),
        (2.2, (-36.0, 0.0), (13870196536876157849.0, 0.0)),
        (
            1.8,
            (0.0, 25.0),
            (-16319651.577864105929, 35431122.065858261322),
        ),
    ];

    #[test]
    fn jinc_sq_matches_reference() {
        for &(w, (zr, zi), (er, ei)) in REFERENCE {
            let got = jinc_sq(w, c(zr, zi));
            let expect = c(er, ei);
            let err = (got - expect).norm() / expect.norm();
            assert!(
                err < 1e-11,
                "w={w} z=({zr},{zi}): got {got}, want {expect}, rel {err:.2e}"
            );
        }
    }

    #[test]
    fn jinc_sq_limit_at_origin() {
        assert_eq!(jinc_sq(1.7, c(0.0, 0.0)), c(1.7 * 1.7, 0.0));
        let near = jinc_sq(1.7, c(1e-9, 1e-9));
        assert!((near - c(1.7 * 1.7, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn routes_agree_on_overlap() {
        // |x| in the band where two routes are both valid.
        for &(r, phase) in &[
            (9.0, 0.1),
            (12.0, 0.3),
            (15.0, -0.2),
            (17.5, 0.05),
            (20.0, 0.6),
        ] {
            let x = Complex64::from_polar(r, phase);
            let miller = j1_miller(x);
            let hankel = j1_hankel(x);
            let scale = miller.norm().max(x.im.abs().exp() / r.sqrt());
            if r >= 15.0 {
                assert!(
                    (miller - hankel).norm() / scale < 1e-11,
                    "r={r}: {miller} vs {hankel}"
                );
            }
            if r <= 10.0 {
                let series = j1_ratio_series(x) * (x * 0.5);
                assert!(
                    (miller - series).norm() / scale < 1e-10,
                    "r={r}: {miller} vs {series}"
                );
            }
        }
    }

    #[test]
    fn real_j1_first_zero() {
        let j11 = 3.831705970207512315614435886308160766565;
        assert!(bessel_j1(j11).abs() < 1e-15);
        assert!((bessel_j1(1.0) - 0.44005058574493351596).abs() < 1e-15);
        assert!((bessel_j1(-1.0) + 0.44005058574493351596).abs() < 1e-15);
        assert_eq!(bessel_j1(0.0), 0.0);
    }

    #[test]
    fn laguerre_small_cases() {
        let l = laguerre_sequence(3, 2.0, 0.5);
        assert_eq!(l[0], 1.0);
        assert!((l[1] - 2.5).abs() < 1e-15);
        // L_2^{(2)}(x) = (x² - 8x + 12)/2
        assert!((l[2] - (0.25 - 4.0 + 12.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn ln_factorials_match_direct() {
        let t = ln_factorials(20);
        assert_eq!(t[0], 0.0);
        assert!((t[5] - 120f64.ln()).abs() < 1e-14);
        assert!((t[20] - 2432902008176640000f64.ln()).abs() < 1e-12);
    }
}
