//! Hard-decision BCH reference: a bounded-distance decoder fails exactly
//! when more than `t` of the `n` bits are in error.

use crate::scalar::{log_add_exp, Scalar};

/// `P(more than t errors among n)` for i.i.d. bit errors with probability
/// `p`, summed in the log domain.
pub fn bch_theory_fer<T: Scalar>(n: usize, t: usize, p: T) -> T {
    if t >= n || p <= T::zero() {
        return T::zero();
    }
    if p >= T::one() {
        return T::one();
    }
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let nf = T::from_usize(n).unwrap();
    let term = |i: usize, ln_binom: T| {
        let fi = T::from_usize(i).unwrap();
        ln_binom + fi * ln_p + (nf - fi) * ln_q
    };
    let next_binom = |i: usize, ln_binom: T| {
        let fi = T::from_usize(i).unwrap();
        ln_binom + ((nf - fi) / (fi + T::one())).ln()
    };

    // Success probability: the t + 1 terms at or below t.
    let mut ln_binom = T::zero();
    let mut ln_ok = T::neg_infinity();
    for i in 0..=t {
        ln_ok = log_add_exp(ln_ok, term(i, ln_binom));
        ln_binom = next_binom(i, ln_binom);
    }
    if ln_ok < T::lit(0.5).ln() {
        return (-ln_ok.exp()).ln_1p().exp().max(T::zero());
    }

    // Otherwise sum the upper tail directly. Terms peak near i = np and fall
    // off on both sides; stop once they are negligible past the peak.
    let mut acc = T::neg_infinity();
    for i in (t + 1)..=n {
        let x = term(i, ln_binom);
        acc = log_add_exp(acc, x);
        if T::from_usize(i).unwrap() > nf * p && x < acc - T::lit(80.0) {
            break;
        }
        if i < n {
            ln_binom = next_binom(i, ln_binom);
        }
    }
    acc.exp().min(T::one())
}

/// Correctable errors of a binary BCH code with length `n` and dimension
/// `k`: `⌊(n - k) / ⌈log2(n + 1)⌉⌋`.
pub fn bch_t_for(n: usize, k: usize) -> usize {
    assert!(k <= n && n > 0, "need 0 < n and k <= n");
    let mut m = 0;
    while (1usize << m) < n + 1 {
        m += 1;
    }
    (n - k) / m
}
