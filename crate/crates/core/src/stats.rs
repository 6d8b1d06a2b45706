//! Special functions and test statistics used by the analysis layer and the
//! acceptance suites: log-gamma, regularized incomplete gamma, exact Poisson
//! pmf/cdf, chi-square goodness of fit, and the DKW empirical-CDF band.

/// Natural log of the gamma function (Lanczos approximation, g = 7, n = 9).
/// Accurate to ~1e-13 relative over the positive reals.
pub fn ln_gamma(x: f64) -> f64 {
    #[allow(clippy::excessive_precision)]
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    assert!(x > 0.0, "ln_gamma requires a positive argument");
    if x < 0.5 {
        // reflection formula
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma `P(a, x)`; series expansion for
/// `x < a + 1`, Lentz continued fraction otherwise.
pub fn regularized_gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        // series: P(a,x) = x^a e^-x / Γ(a) · Σ x^n / (a (a+1) ... (a+n))
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut n = a;
        for _ in 0..500 {
            n += 1.0;
            term *= x / n;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        sum * (a * x.ln() - x - ln_gamma(a)).exp()
    } else {
        1.0 - regularized_gamma_q_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - regularized_gamma_p(a, x)
    } else {
        regularized_gamma_q_cf(a, x)
    }
}

fn regularized_gamma_q_cf(a: f64, x: f64) -> f64 {
    // modified Lentz on the standard continued fraction for Q
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (a * x.ln() - x - ln_gamma(a)).exp()
}

/// Survival function of the chi-square distribution with `dof` degrees of
/// freedom: `P[X >= x]`.
pub fn chi_square_sf(x: f64, dof: u32) -> f64 {
    assert!(dof > 0);
    if x <= 0.0 {
        return 1.0;
    }
    regularized_gamma_q(dof as f64 / 2.0, x / 2.0)
}

/// Exact Poisson probability mass `P[X = k]` for `X ~ Poisson(mu)`.
pub fn poisson_pmf(mu: f64, k: u32) -> f64 {
    assert!(mu >= 0.0);
    if mu == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * mu.ln() - mu - ln_gamma(k as f64 + 1.0)).exp()
}

/// Exact Poisson cumulative probability `P[X <= k]` by stable summation.
pub fn poisson_cdf(mu: f64, k: u32) -> f64 {
    assert!(mu >= 0.0);
    if mu == 0.0 {
        return 1.0;
    }
    let mut total = 0.0;
    for i in 0..=k {
        total += poisson_pmf(mu, i);
    }
    total.min(1.0)
}

/// Result of a chi-square goodness-of-fit test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareFit {
    pub statistic: f64,
    pub dof: u32,
    pub p_value: f64,
}

/// Chi-square goodness of fit of integer-valued observations against a
/// Poisson(mu) reference. Cells with expected count below `min_expected` are
/// pooled into the tails.
pub fn poisson_chi_square(observed: &[u32], mu: f64, min_expected: f64) -> ChiSquareFit {
    let n = observed.len() as f64;
    assert!(n >= 2.0, "need at least two observations");
    let max_val = observed.iter().copied().max().unwrap_or(0);

    let mut counts = vec![0u64; max_val as usize + 1];
    for &v in observed {
        counts[v as usize] += 1;
    }

    // expected per value, with an explicit right-tail bucket
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut tail_prob = 1.0;
    for (v, &c) in counts.iter().enumerate() {
        let p = poisson_pmf(mu, v as u32);
        tail_prob -= p;
        cells.push((c as f64, n * p));
    }
    cells.push((0.0, n * tail_prob.max(0.0)));

    // pool left to right until every cell has enough expected mass
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (o, e) in cells {
        acc.0 += o;
        acc.1 += e;
        if acc.1 >= min_expected {
            pooled.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0.0 {
        if let Some(last) = pooled.last_mut() {
            last.0 += acc.0;
            last.1 += acc.1;
        } else {
            pooled.push(acc);
        }
    }

    let mut statistic = 0.0;
    for &(o, e) in &pooled {
        if e > 0.0 {
            statistic += (o - e) * (o - e) / e;
        }
    }
    let dof = (pooled.len().saturating_sub(1)).max(1) as u32;
    ChiSquareFit {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof),
    }
}

/// Half-width of the Dvoretzky–Kiefer–Wolfowitz confidence band for an
/// empirical CDF of `n` samples at significance level `alpha`:
/// `P[sup |F_n - F| > eps] <= alpha` with `eps = sqrt(ln(2/alpha) / (2n))`.
pub fn dkw_epsilon(n: usize, alpha: f64) -> f64 {
    assert!(n > 0 && alpha > 0.0 && alpha < 1.0);
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Ordinary least squares `y ≈ x · coef` for a small fixed number of
/// regressors, via normal equations with partial pivoting. Returns `None`
/// when the system is numerically singular.
#[allow(clippy::needless_range_loop)] // elimination mixes two rows of `a`
pub fn solve_least_squares<const N: usize>(rows: &[([f64; N], f64)]) -> Option<[f64; N]> {
    let mut ata = [[0.0f64; N]; N];
    let mut atb = [0.0f64; N];
    for (x, y) in rows {
        for i in 0..N {
            atb[i] += x[i] * y;
            for j in 0..N {
                ata[i][j] += x[i] * x[j];
            }
        }
    }
    let mut a = ata;
    let mut b = atb;
    for col in 0..N {
        let piv = (col..N).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..N {
            let factor = a[row][col] / a[col][col];
            for j in col..N {
                a[row][j] -= factor * a[col][j];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut out = [0.0f64; N];
    for col in (0..N).rev() {
        let mut acc = b[col];
        for j in (col + 1)..N {
            acc -= a[col][j] * out[j];
        }
        out[col] = acc / a[col][col];
    }
    if out.iter().all(|c| c.is_finite()) {
        Some(out)
    } else {
        None
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_and_std_error(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    assert!(n >= 2, "need at least two samples");
    let mean = samples.iter().sum::<f64>() / n as f64;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    let std = (ss / (n as f64 - 1.0)).sqrt();
    (mean, std / (n as f64).sqrt())
}
