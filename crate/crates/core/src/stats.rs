//! Binomial tail probabilities via the regularized incomplete beta function.

use libm::{exp, fabs, lgamma, log, log1p};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum DomainError {
    #[error("k = {k} exceeds n = {n}")]
    CountExceedsTrials { k: u64, n: u64 },
    #[error("number of trials must be positive")]
    NoTrials,
    #[error("probability {0} is outside [0, 1]")]
    Probability(f64),
}

fn check(k: u64, n: u64, p: f64) -> Result<(), DomainError> {
    if n == 0 {
        return Err(DomainError::NoTrials);
    }
    if k > n {
        return Err(DomainError::CountExceedsTrials { k, n });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(DomainError::Probability(p));
    }
    Ok(())
}

/// P(X ≤ k) for X ~ Binomial(n, p).
pub fn bcdf(k: u64, n: u64, p: f64) -> Result<f64, DomainError> {
    check(k, n, p)?;
    if k == n || p == 0.0 {
        return Ok(1.0);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    Ok(beta_reg((n - k) as f64, (k + 1) as f64, 1.0 - p, p))
}

/// P(X ≥ k) for X ~ Binomial(n, p).
pub fn sf(k: u64, n: u64, p: f64) -> Result<f64, DomainError> {
    check(k, n, p)?;
    if k == 0 || p == 1.0 {
        return Ok(1.0);
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok(beta_reg(k as f64, (n - k + 1) as f64, p, 1.0 - p))
}

/// I_x(a, b), with `y = 1 - x` passed separately to avoid cancellation.
fn beta_reg(a: f64, b: f64, x: f64, y: f64) -> f64 {
    let ln_front = lgamma(a + b) - lgamma(a) - lgamma(b) + a * ln_unit(x, y) + b * ln_unit(y, x);
    let front = exp(ln_front);
    let value =
        if x < (a + 1.0) / (a + b + 2.0) { front * beta_cf(a, b, x) / a } else { 1.0 - front * beta_cf(b, a, y) / b };
    value.clamp(0.0, 1.0)
}

/// ln(x) where `y = 1 - x`, accurate for x near 1.
fn ln_unit(x: f64, y: f64) -> f64 {
    if x > 0.5 {
        log1p(-y)
    } else {
        log(x)
    }
}

/// Continued fraction for I_x(a, b), modified Lentz evaluation.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    const MAX_ITER: u32 = 100_000;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // Even step.
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // Odd step.
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < EPS {
            break;
        }
    }
    h
}
