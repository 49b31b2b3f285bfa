use num_bigint::BigUint;

pub const SCALE_BITS: u32 = 20;

/// Exact P(X ≤ k) for X ~ Binomial(n, m / 2^20), rounded once to f64.
pub fn exact_bcdf(k: u64, n: u64, m: u64) -> f64 {
    let scale = 1u64 << SCALE_BITS;
    let p = BigUint::from(m);
    let q = BigUint::from(scale - m);
    let mut binom = BigUint::from(1u32);
    let mut total = BigUint::from(0u32);
    for i in 0..=k {
        if i > 0 {
            binom = binom * BigUint::from(n - i + 1) / BigUint::from(i);
        }
        total += &binom * p.pow(i as u32) * q.pow((n - i) as u32);
    }
    ratio_to_f64(&total, SCALE_BITS as u64 * n)
}

/// `num / 2^shift` as the nearest-below f64.
fn ratio_to_f64(num: &BigUint, shift: u64) -> f64 {
    let bits = num.bits();
    if bits == 0 {
        return 0.0;
    }
    let drop = bits.saturating_sub(64);
    let top: u64 = (num >> drop).try_into().unwrap();
    top as f64 * 2f64.powi(drop as i32 - shift as i32)
}

pub fn grid_probability(m: u64) -> f64 {
    m as f64 / (1u64 << SCALE_BITS) as f64
}
