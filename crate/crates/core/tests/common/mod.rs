//! Independent numerical references for the integration tests. Nothing here
//! calls into the library: integrals use adaptive Simpson quadrature and
//! the gamma-distribution CDFs use elementary closed forms.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Γ(a) for `a` a positive multiple of 1/2, from the factorial identities.
pub fn gamma_half_integer(a: f64) -> f64 {
    let twice = (2.0 * a).round();
    assert!((twice - 2.0 * a).abs() < 1e-12 && twice >= 1.0, "a = {a}");
    if (twice as u64).is_multiple_of(2) {
        (1..a as u64).map(|k| k as f64).product()
    } else {
        // Γ(n + 1/2) = (2n)! / (4^n n!) · √π
        let n = (a - 0.5) as u64;
        (1..=n).map(|k| (2 * k - 1) as f64 / 2.0).product::<f64>() * PI.sqrt()
    }
}

/// Regularized lower incomplete gamma `P(a, x)` for half-integer `a`:
/// `∫_0^{x^a} exp(-u^{1/a}) du / Γ(a + 1)`, which has a bounded integrand.
pub fn lower_gamma_p(a: f64, x: f64) -> f64 {
    let gamma_a1 = a * gamma_half_integer(a);
    let f = |u: f64| (-u.powf(1.0 / a)).exp();
    simpson(&f, 0.0, x.powf(a), 1e-13) / gamma_a1
}

/// `P(m, x)` for integer `m`: the tail `e^{-x} Σ_{k>=m} x^k / k!` for small
/// `x` (no cancellation), else `1 - e^{-x} Σ_{k<m} x^k / k!`.
pub fn lower_gamma_p_int(m: u32, x: f64) -> f64 {
    if x < m as f64 + 1.0 {
        let mut term: f64 = (-x).exp();
        for k in 1..=m {
            term *= x / k as f64;
        }
        let mut sum = 0.0;
        let mut k = m;
        while term > 1e-18 * sum || sum == 0.0 {
            sum += term;
            k += 1;
            term *= x / k as f64;
            if term == 0.0 {
                break;
            }
        }
        return sum;
    }
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 0..m {
        if k > 0 {
            term *= x / k as f64;
        }
        sum += term;
    }
    1.0 - (-x).exp() * sum
}

/// Gamma density with shape `m` (integer) and mean `mean`.
pub fn gamma_pdf_int(m: u32, mean: f64, x: f64) -> f64 {
    let rate = m as f64 / mean;
    let fact: f64 = (1..m).map(|k| k as f64).product();
    rate.powi(m as i32) * x.powi(m as i32 - 1) * (-rate * x).exp() / fact
}

/// `K_n(x) = ∫_0^∞ exp(-x cosh t) cosh(n t) dt`, to relative accuracy ~1e-11.
pub fn bessel_k(n: i32, x: f64) -> f64 {
    let nf = n.abs() as f64;
    // The log-integrand -x cosh t + n t peaks at asinh(n / x).
    let log_f = |t: f64| -x * t.cosh() + nf * t;
    let t_peak = (nf / x).asinh();
    let peak = log_f(t_peak);
    let mut upper = t_peak + 1.0;
    while log_f(upper) > peak - 60.0 {
        upper += 0.5;
    }
    let f = |t: f64| (-x * t.cosh()).exp() * (nf * t).cosh();
    let tol = 1e-14 * peak.exp();
    // Split at the peak so the initial Simpson panels cannot straddle it.
    let pieces = [0.0, 0.5 * t_peak, t_peak, 0.5 * (t_peak + upper), upper];
    pieces.windows(2).map(|w| simpson(&f, w[0], w[1], tol)).sum()
}

/// CDF of `γ1 γ2 / (γ1 + γ2 + 1)` for integer shapes, from
/// `F1(y) + ∫_y^∞ f1(x) F2(y (x + 1) / (x - y)) dx` with elementary CDFs.
pub fn af_path_cdf(m1: u32, mean1: f64, m2: u32, mean2: f64, y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let rate2 = m2 as f64 / mean2;
    let theta = mean1 / m1 as f64;
    // x = y + θ s / (1 - s) maps s ∈ [0, 1) onto [y, ∞).
    let f = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let d = theta * s / (1.0 - s);
        let x = y + d;
        let jac = theta / ((1.0 - s) * (1.0 - s));
        let inner = if d == 0.0 {
            1.0
        } else {
            lower_gamma_p_int(m2, rate2 * y * (x + 1.0) / d)
        };
        gamma_pdf_int(m1, mean1, x) * inner * jac
    };
    lower_gamma_p_int(m1, m1 as f64 * y / mean1) + simpson(&f, 0.0, 1.0, 1e-13)
}

/// Rayleigh special case: `1 - 2 β e^{-y(1/γ̄1 + 1/γ̄2)} K_1(2β)` with
/// `β = √(y (y + 1) / (γ̄1 γ̄2))`.
pub fn af_path_cdf_rayleigh(mean1: f64, mean2: f64, y: f64) -> f64 {
    let beta = (y * (y + 1.0) / (mean1 * mean2)).sqrt();
    1.0 - 2.0 * beta * (-y * (1.0 / mean1 + 1.0 / mean2)).exp() * bessel_k(1, 2.0 * beta)
}

/// One relay of an integer-shape network: `(m1, m2)`.
pub type IntRelay = (u32, u32);

/// DF-AF / DF outage under SC for integer shapes, unit spreads and equal
/// transmit SNR `snr`: `F0(γ_th) Π [(1 - F1(Δ)) F2(γ_th) + F1(Δ)]`.
pub fn outage_dfaf_int(m0: u32, relays: &[IntRelay], snr: f64, delta: f64, gamma_th: f64) -> f64 {
    let cdf = |m: u32, y: f64| lower_gamma_p_int(m, m as f64 * y / snr);
    relays.iter().fold(cdf(m0, gamma_th), |acc, &(m1, m2)| {
        let f1 = cdf(m1, delta);
        acc * ((1.0 - f1) * cdf(m2, gamma_th) + f1)
    })
}

/// Opportunistic AF outage under SC for integer shapes and unit spreads.
pub fn outage_af_int(m0: u32, relays: &[IntRelay], snr: f64, gamma_th: f64) -> f64 {
    let direct = lower_gamma_p_int(m0, m0 as f64 * gamma_th / snr);
    relays
        .iter()
        .fold(direct, |acc, &(m1, m2)| acc * af_path_cdf(m1, snr, m2, snr, gamma_th))
}

/// Least-squares slope of `log10 y` against `log10 x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

/// Two-sided binomial band half-width: `z √(p (1 - p) / n)`.
pub fn binomial_halfwidth(p: f64, n: u64, z: f64) -> f64 {
    z * (p * (1.0 - p) / n as f64).sqrt()
}

/// Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// KS critical value at the 1% level for `n` samples.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}
