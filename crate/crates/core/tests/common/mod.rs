//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the incomplete gamma code it is used to check.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// erf via the positive-term series
/// `erf(z) = 2/√π · e^{-z²} · Σ 2ⁿ z^{2n+1} / (1·3·…·(2n+1))`.
pub fn erf_series(z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= 2.0 * z2 / (2.0 * n + 1.0);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    2.0 / std::f64::consts::PI.sqrt() * (-z2).exp() * sum
}

/// ln Γ(a) by shifting `a` above 30 and applying the Stirling series.
pub fn ln_gamma_stirling(a: f64) -> f64 {
    let mut x = a;
    let mut shift = 0.0;
    while x < 30.0 {
        shift += x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series - shift
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// `P(a, x)` by quadrature of the standardized Gamma density. For `a < 1`
/// the substitution `t = u^{1/a}` removes the endpoint singularity:
/// `∫₀ˣ t^{a-1} e^{-t} dt = (1/a) ∫₀^{x^a} e^{-u^{1/a}} du`.
pub fn reg_lower_inc_gamma_quadrature(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ln_gamma_a = ln_gamma_stirling(a);
    if a < 1.0 {
        let g = |u: f64| (-(u.powf(1.0 / a))).exp();
        adaptive_simpson(&g, 0.0, x.powf(a), 1e-13) / a / ln_gamma_a.exp()
    } else {
        let g = |t: f64| {
            if t == 0.0 {
                if a == 1.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                ((a - 1.0) * t.ln() - t - ln_gamma_a).exp()
            }
        };
        adaptive_simpson(&g, 0.0, x, 1e-13)
    }
}

/// Exceedance probability after each of `k = 0..=m` reclassifications,
/// evaluated directly from the closed form `P(α' + k, β' ln 2 / t0)`.
pub fn exhaustive_k_trajectory(
    prior_shape: f64,
    prior_rate: f64,
    events: usize,
    censored: usize,
    total_time: f64,
    t0: f64,
) -> Vec<f64> {
    let cfg = bfi_core::SpecFunConfig::default();
    let shape = prior_shape + events as f64;
    let x = (prior_rate + total_time) * std::f64::consts::LN_2 / t0;
    (0..=censored)
        .map(|k| bfi_core::reg_lower_inc_gamma(shape + k as f64, x, &cfg).unwrap())
        .collect()
}

/// Brute-force fragility index: `None` when baseline is not above `p0`,
/// `Some(None)` when no `k` crosses, `Some(Some(k))` otherwise.
pub fn exhaustive_k_fi(trajectory: &[f64], p0: f64) -> Option<Option<usize>> {
    if !(trajectory[0] > p0) {
        return None;
    }
    Some(trajectory.iter().position(|&p| p < p0))
}

pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Kaplan-Meier by recounting the risk set at every distinct event time,
/// in exact rational arithmetic. Returns `(time, at_risk, events, S)`.
pub fn km_recount(obs: &[(f64, bool)]) -> Vec<(f64, usize, usize, BigRational)> {
    let mut times: Vec<f64> = obs.iter().filter(|o| o.1).map(|o| o.0).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut out = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let mut s = BigRational::one();
        for &u in &times[..=i] {
            let at_risk = obs.iter().filter(|o| o.0 >= u).count();
            let events = obs.iter().filter(|o| o.0 == u && o.1).count();
            s *= BigRational::new(BigInt::from(at_risk - events), BigInt::from(at_risk));
        }
        let at_risk = obs.iter().filter(|o| o.0 >= t).count();
        let events = obs.iter().filter(|o| o.0 == t && o.1).count();
        out.push((t, at_risk, events, s));
    }
    out
}

/// `1 − ECDF(t)` for uncensored data, exactly.
pub fn empirical_survival(times: &[f64], t: f64) -> BigRational {
    let n = times.len();
    let below = times.iter().filter(|&&u| u <= t).count();
    BigRational::new(BigInt::from(n - below), BigInt::from(n))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        0.0
    } else {
        r.to_f64().expect("representable")
    }
}

/// Small deterministic generator for test inputs (64-bit LCG, Knuth MMIX).
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0
    }

    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() >> 33) as usize) % n
    }
}

/// Largest pointwise discrepancy (relative, floored at 1) between the
/// numerically normalized likelihood × prior and the closed-form posterior
/// density, over `points` evaluation points spread across the posterior mass.
pub fn conjugacy_discrepancy(
    data: &bfi_core::SurvivalDataset,
    prior: &bfi_core::GammaParams,
    points: usize,
) -> f64 {
    let (alpha, beta) = (prior.shape(), prior.rate());
    // ln of the likelihood as a literal product over subjects
    let ln_lik = |lambda: f64| -> f64 {
        data.observations()
            .iter()
            .map(|o| {
                let t = o.time();
                if o.is_event() {
                    (lambda * (-lambda * t).exp()).ln()
                } else {
                    (-lambda * t).exp().ln()
                }
            })
            .sum()
    };
    let ln_prior = |lambda: f64| {
        alpha * beta.ln() - ln_gamma_stirling(alpha) + (alpha - 1.0) * lambda.ln() - beta * lambda
    };
    let ln_unnorm = |lambda: f64| ln_lik(lambda) + ln_prior(lambda);

    // scale for numerical stability; any constant cancels on normalization
    let events = data.observations().iter().filter(|o| o.is_event()).count() as f64;
    let total: f64 = data.observations().iter().map(|o| o.time()).sum();
    let (a_post, b_post) = (alpha + events, beta + total);
    let centre = a_post / b_post;
    let offset = ln_unnorm(centre);
    let upper = (a_post + 40.0 * a_post.sqrt() + 40.0) / b_post;
    // λ = u² removes the λ^{α'-1} singularity at 0 when α' < 1
    let integrand = |u: f64| {
        if u == 0.0 {
            0.0
        } else {
            (ln_unnorm(u * u) - offset).exp() * 2.0 * u
        }
    };
    let z = adaptive_simpson(&integrand, 0.0, upper.sqrt(), 1e-12);

    let posterior = bfi_core::posterior_update(prior, data);
    let sd = a_post.sqrt() / b_post;
    let mut worst: f64 = 0.0;
    for j in 0..points {
        let lambda =
            (centre + sd * (-2.5 + 6.0 * j as f64 / (points - 1) as f64)).max(centre * 0.02);
        let numeric = (ln_unnorm(lambda) - offset).exp() / z;
        let closed = posterior.pdf(lambda);
        worst = worst.max((numeric - closed).abs() / closed.abs().max(1.0));
    }
    worst
}
