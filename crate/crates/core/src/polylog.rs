//! Bernoulli numbers, integer zeta values and polylogarithms on the unit circle.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::mp::{self, Precision};

/// Exact `B_0, B_1, …` (with `B_1 = -1/2`), grown on demand and shared process-wide.
pub struct BernoulliCache {
    values: Mutex<Vec<Rational>>,
}

impl BernoulliCache {
    pub fn global() -> &'static BernoulliCache {
        static CACHE: OnceLock<BernoulliCache> = OnceLock::new();
        CACHE.get_or_init(|| BernoulliCache { values: Mutex::new(vec![Rational::from(1)]) })
    }

    pub fn get(&self, m: usize) -> Rational {
        let mut v = self.values.lock().expect("bernoulli cache poisoned");
        while v.len() <= m {
            let k = v.len();
            if k > 1 && k % 2 == 1 {
                v.push(Rational::new());
                continue;
            }
            // Σ_{i<k} C(k+1, i) B_i + (k+1) B_k = 0
            let mut acc = Rational::new();
            let mut binom = Integer::from(1);
            for (i, b) in v.iter().enumerate() {
                if *b != 0 {
                    acc += Rational::from(b * &binom);
                }
                binom = binom * (k + 1 - i) as u64 / (i + 1) as u64;
            }
            v.push(-acc / Integer::from(k + 1));
        }
        v[m].clone()
    }
}

/// `B_m`.
pub fn bernoulli(m: usize) -> Rational {
    BernoulliCache::global().get(m)
}

/// Bernoulli polynomial `B_n(x) = Σ C(n,k) B_k x^{n-k}`.
pub fn bernoulli_poly(n: usize, x: &Float) -> Float {
    let bits = x.prec();
    let mut acc = Float::new(bits);
    let mut binom = Integer::from(1);
    for k in 0..=n {
        let b = bernoulli(k);
        if b != 0 {
            let term = Float::with_val(bits, x.clone().pow((n - k) as u32)) * Float::with_val(bits, Rational::from(&b * &binom));
            acc += term;
        }
        binom = binom * (n - k) as u64 / (k + 1) as u64;
    }
    acc
}

fn zeta_cache() -> &'static Mutex<HashMap<(u32, u32), Float>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Float>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `ζ(s)` for integer `s ≥ 2` by Euler–Maclaurin summation.
pub fn zeta_int(s: u32, prec: Precision) -> Result<Float> {
    if s < 2 {
        return Err(Error::Invalid(format!("zeta_int needs s >= 2, got {s}")));
    }
    let bits = prec.bits();
    if let Some(v) = zeta_cache().lock().expect("zeta cache poisoned").get(&(s, bits)) {
        return Ok(v.clone());
    }
    let work = bits + 32;
    let n = (2 * (prec.digits() + mp::GUARD_DIGITS)).max(20);
    let mut acc = Float::new(work);
    for k in 1..n {
        acc += Float::with_val(work, Float::with_val(work, k).pow(s)).recip();
    }
    let nf = Float::with_val(work, n);
    let n_pow = nf.clone().pow(s);
    acc += Float::with_val(work, &nf / &n_pow) / (s - 1);
    acc += Float::with_val(work, n_pow.recip_ref()) / 2u32;
    let eps = Float::with_val(work, Float::with_val(work, 1) >> (work as i32));
    // term_m = B_2m/(2m)! · s(s+1)…(s+2m-2) · N^{-s-2m+1}
    let mut rising = Float::with_val(work, s);
    let mut npow = Float::with_val(work, &n_pow * &nf).recip();
    let n2 = Float::with_val(work, nf.square_ref());
    let mut fact = Integer::from(2);
    for m in 1..10_000u32 {
        let b = bernoulli(2 * m as usize);
        let coeff = Float::with_val(work, &b / Rational::from(fact.clone()));
        let term = coeff * &rising * &npow;
        let small = Float::with_val(work, term.abs_ref()) < eps;
        acc += term;
        if small {
            break;
        }
        rising *= (s + 2 * m - 1) as u64;
        rising *= (s + 2 * m) as u64;
        npow /= &n2;
        fact *= (2 * m + 1) as u64;
        fact *= (2 * m + 2) as u64;
    }
    let out = Float::with_val(bits, acc);
    zeta_cache().lock().expect("zeta cache poisoned").insert((s, bits), out.clone());
    Ok(out)
}

/// `ζ(s)` for any integer `s ≠ 1`, using `ζ(-m) = -B_{m+1}/(m+1)` for `m ≥ 0`
/// (with `ζ(0) = -1/2`).
fn zeta_any(s: i64, prec: Precision) -> Result<Float> {
    if s >= 2 {
        return zeta_int(s as u32, prec);
    }
    if s == 1 {
        return Err(Error::Invalid("zeta has a pole at 1".into()));
    }
    let m = (-s) as usize;
    if m == 0 {
        return Ok(prec.rational(&Rational::from((-1, 2))));
    }
    let b = bernoulli(m + 1);
    Ok(prec.rational(&(-b / Integer::from(m + 1))))
}

/// `H_m = 1 + 1/2 + … + 1/m`.
fn harmonic(m: u32) -> Rational {
    (1..=m).fold(Rational::new(), |acc, k| acc + Rational::from((1, k)))
}

/// `Li_n(e^{iθ})` for `n ≥ 1` and `θ ∈ (0, 2π)`.
pub fn polylog_circle(n: u32, theta: &Float, prec: Precision) -> Result<Complex> {
    if n == 0 {
        return Err(Error::Invalid("polylog order must be at least 1".into()));
    }
    let bits = prec.bits();
    let two_pi = prec.two_pi();
    if !theta.is_finite() || *theta <= 0 || *theta >= two_pi {
        return Err(Error::ThetaOutOfRange(format!("theta = {} not in (0, 2π)", mp::fmt_float(theta, 12))));
    }
    let conj = *theta > prec.pi();
    let t = if conj { Float::with_val(bits, &two_pi - theta) } else { Float::with_val(bits, theta) };
    let ratio = Float::with_val(bits, &t / &two_pi);
    if ratio > 0.95 {
        return Err(Error::ThetaOutOfRange(format!("theta = {} too close to the branch point", mp::fmt_float(theta, 12))));
    }
    let z = if n == 1 {
        let e = Complex::with_val(bits, (t.clone().cos(), t.clone().sin()));
        let one_minus = Complex::with_val(bits, 1) - e;
        -(one_minus.ln())
    } else {
        let mu = Complex::with_val(bits, (0, &t));
        // ln(-μ) = ln θ - iπ/2
        let log_neg_mu = Complex::with_val(bits, (t.clone().ln(), -(prec.pi() / 2u32)));
        let eps = Float::with_val(bits, Float::with_val(bits, 1) >> (bits as i32 + 8));
        let mut acc = prec.czero();
        let mut power = Complex::with_val(bits, 1); // μ^k / k!
        let mut quiet = 0;
        for k in 0..100_000u32 {
            let kk = k as i64;
            if k + 1 == n {
                let h = prec.rational(&harmonic(n - 1));
                let bracket = Complex::with_val(bits, &h - &log_neg_mu);
                acc += Complex::with_val(bits, &power * &bracket);
            } else {
                let zv = zeta_any(n as i64 - kk, prec)?;
                let term = Complex::with_val(bits, &power * &zv);
                let size = Float::with_val(bits, term.abs_ref());
                acc += term;
                if k >= n {
                    let bound = Float::with_val(bits, power.abs_ref());
                    if size < eps && bound < 1 {
                        quiet += 1;
                        if quiet >= 2 {
                            break;
                        }
                    } else {
                        quiet = 0;
                    }
                }
            }
            power *= &mu;
            power /= k + 1;
        }
        acc
    };
    Ok(if conj { z.conj() } else { z })
}

/// Adaptive Gauss–Legendre value of `∫₀¹ (x² − x)^{j−1} dx` next to its exact value.
#[derive(Clone, Debug)]
pub struct BetaCheck {
    pub j: u32,
    pub numeric: Float,
    pub exact: Rational,
    pub error: Float,
}

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(m: usize, bits: u32) -> Vec<(Float, Float)> {
    let pi = Float::with_val(bits, rug::float::Constant::Pi);
    let eps = Float::with_val(bits, Float::with_val(bits, 1) >> (bits as i32 - 8));
    let mut out = Vec::with_capacity(m);
    for i in 1..=m {
        let guess = (Float::with_val(bits, &pi * (4 * i - 1) as u32) / (4 * m + 2) as u32).cos();
        let mut x = guess;
        let mut dp = Float::new(bits);
        for _ in 0..200 {
            // Legendre recurrence for P_m and P_{m-1}
            let (mut p0, mut p1) = (Float::with_val(bits, 1), x.clone());
            for k in 2..=m {
                let p2 = (Float::with_val(bits, &x * &p1) * (2 * k - 1) as u32 - Float::with_val(bits, &p0 * (k - 1) as u32))
                    / k as u32;
                p0 = p1;
                p1 = p2;
            }
            let one_minus = Float::with_val(bits, 1) - Float::with_val(bits, x.square_ref());
            dp = (Float::with_val(bits, &p0 - Float::with_val(bits, &x * &p1)) * m as u32) / &one_minus;
            let dx = Float::with_val(bits, &p1 / &dp);
            x -= &dx;
            if dx.abs() < eps {
                break;
            }
        }
        let one_minus = Float::with_val(bits, 1) - Float::with_val(bits, x.square_ref());
        let w = Float::with_val(bits, 2) / (one_minus * Float::with_val(bits, dp.square_ref()));
        out.push((x, w));
    }
    out
}

fn gl_interval(f: &dyn Fn(&Float) -> Float, a: &Float, b: &Float, rule: &[(Float, Float)], bits: u32) -> Float {
    let half = Float::with_val(bits, b - a) / 2u32;
    let mid = Float::with_val(bits, b + a) / 2u32;
    let mut acc = Float::new(bits);
    for (x, w) in rule {
        let pt = Float::with_val(bits, &half * x) + &mid;
        acc += Float::with_val(bits, w * f(&pt));
    }
    acc * half
}

fn adaptive(
    f: &dyn Fn(&Float) -> Float,
    a: &Float,
    b: &Float,
    whole: Float,
    rule: &[(Float, Float)],
    tol: &Float,
    depth: u32,
    bits: u32,
) -> Float {
    let mid = Float::with_val(bits, a + b) / 2u32;
    let left = gl_interval(f, a, &mid, rule, bits);
    let right = gl_interval(f, &mid, b, rule, bits);
    let both = Float::with_val(bits, &left + &right);
    let diff = Float::with_val(bits, &both - &whole).abs();
    if diff <= *tol || depth == 0 {
        return both;
    }
    let half_tol = Float::with_val(bits, tol / 2u32);
    adaptive(f, a, &mid, left, rule, &half_tol, depth - 1, bits) + adaptive(f, &mid, b, right, rule, &half_tol, depth - 1, bits)
}

/// Adaptive Gauss–Legendre quadrature on `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(&Float) -> Float, a: &Float, b: &Float, tol: &Float, prec: Precision) -> Float {
    let bits = prec.bits();
    let rule = gauss_legendre(10, bits);
    let whole = gl_interval(f, a, b, &rule, bits);
    adaptive(f, a, b, whole, &rule, tol, 30, bits)
}

pub fn beta_integral_check(j: u32, prec: Precision) -> Result<BetaCheck> {
    if j == 0 {
        return Err(Error::Invalid("beta integral needs j >= 1".into()));
    }
    let bits = prec.bits();
    let f = move |x: &Float| -> Float {
        let base = Float::with_val(bits, x.square_ref()) - x;
        base.pow(j - 1)
    };
    let numeric = integrate(&f, &prec.zero(), &prec.one(), &prec.residual_tol(), prec);
    let fj = mp::factorial(j - 1);
    let mut exact = Rational::from((Integer::from(fj.square_ref()), mp::factorial(2 * j - 1)));
    if j.is_multiple_of(2) {
        exact = -exact;
    }
    let error = Float::with_val(bits, &numeric - &exact).abs();
    Ok(BetaCheck { j, numeric, exact, error })
}
