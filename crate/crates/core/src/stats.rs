//! Summary statistics, Kolmogorov-Smirnov tests, least-squares slopes and
//! the Gamma/Erlang closed forms used by the Monte-Carlo checks.

use alloc::vec::Vec;

/// Mean and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (0 for fewer than two values).
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn mean_estimate(xs: &[f64]) -> MeanEstimate {
    MeanEstimate {
        mean: mean(xs),
        stderr: libm::sqrt(variance(xs) / xs.len() as f64),
        n: xs.len(),
    }
}

/// Pearson correlation; 0 when either sample is constant.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / libm::sqrt(sxx * syy)
    }
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// One-sample KS statistic `sup |F_n - F|` against a continuous `cdf`.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let v = sorted(xs);
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Two-sample KS statistic. Ties are handled by comparing the empirical
/// distribution functions only after each distinct value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Kolmogorov survival function `Q(t) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 t^2}`.
pub fn kolmogorov_survival(t: f64) -> f64 {
    if t < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = libm::exp(-2.0 * kf * kf * t * t);
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Asymptotic p-value of a one-sample KS statistic.
pub fn ks_one_sample_pvalue(d: f64, n: usize) -> f64 {
    let sn = libm::sqrt(n as f64);
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}

/// Asymptotic p-value of a two-sample KS statistic.
pub fn ks_two_sample_pvalue(d: f64, n: usize, m: usize) -> f64 {
    let ne = (n * m) as f64 / (n + m) as f64;
    let se = libm::sqrt(ne);
    kolmogorov_survival((se + 0.12 + 0.11 / se) * d)
}

/// `c(alpha)` with `Q(c) = alpha`, from `c = sqrt(-ln(alpha/2) / 2)`.
pub fn ks_c_alpha(alpha: f64) -> f64 {
    libm::sqrt(-libm::log(alpha / 2.0) / 2.0)
}

/// Asymptotic two-sample critical value at level `alpha`.
pub fn ks_two_sample_critical(alpha: f64, n: usize, m: usize) -> f64 {
    ks_c_alpha(alpha) * libm::sqrt((n + m) as f64 / (n * m) as f64)
}

/// Asymptotic one-sample critical value at level `alpha`.
pub fn ks_one_sample_critical(alpha: f64, n: usize) -> f64 {
    ks_c_alpha(alpha) / libm::sqrt(n as f64)
}

/// Ordinary least squares fit `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

pub fn ols(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let slope_stderr = if xs.len() > 2 {
        libm::sqrt(rss / (n - 2.0) / sxx)
    } else {
        0.0
    };
    LineFit {
        slope,
        intercept,
        slope_stderr,
    }
}

/// CDF of Gamma(shape 2, rate `r`): `1 - e^{-r x}(1 + r x)`.
pub fn gamma2_cdf(x: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let rx = rate * x;
    1.0 - libm::exp(-rx) * (1.0 + rx)
}

/// CDF of Exponential(rate).
pub fn exponential_cdf(x: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -libm::expm1(-rate * x)
    }
}

/// `Gamma(a + k) / Gamma(a)`.
pub fn gamma_ratio(a: f64, k: f64) -> f64 {
    libm::exp(libm::lgamma(a + k) - libm::lgamma(a))
}

/// `sum_{n < count} x^n e^{-x} / n!`, the Poisson(x) mass below `count`.
pub fn poisson_lower_mass(x: f64, count: usize) -> f64 {
    let mut term = libm::exp(-x);
    let mut s = 0.0;
    for n in 0..count {
        if n > 0 {
            term *= x / n as f64;
        }
        s += term;
    }
    s
}

/// `E[T^k 1{T >= x}]` for `T ~ Erlang(a, 1)` with integer `a` and `k`:
/// `Gamma(a+k)/Gamma(a) * sum_{n < a+k} x^n e^{-x} / n!`.
pub fn erlang_tail_moment(a: usize, k: usize, x: f64) -> f64 {
    gamma_ratio(a as f64, k as f64) * poisson_lower_mass(x.max(0.0), a + k)
}
