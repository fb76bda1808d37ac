//! Photon-number distribution behind a beam splitter fed with Fock states.
//!
//! The amplitude `⟨k, N−k|U(η)|m, n⟩` is a Wigner small-d matrix element with
//! `cos²(β/2) = η`. Written through a Jacobi polynomial it needs no
//! alternating sum, so the probabilities keep full relative precision where
//! the textbook binomial double sum cancels catastrophically.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{unit_interval, Error, Result};

/// Default limit on `m + n`.
pub const DEFAULT_PHOTON_CAP: u64 = 4096;

/// Table of `ln k!` for `k = 0..=cap`.
#[derive(Debug, Clone)]
pub struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn new(cap: u64) -> Self {
        let mut table = Vec::with_capacity(cap as usize + 1);
        table.push(0.0);
        // Neumaier summation of ln i keeps the table accurate to ~1 ulp.
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for i in 1..=cap {
            let x = (i as f64).ln();
            let t = sum + x;
            comp += if sum.abs() >= x.abs() {
                (sum - t) + x
            } else {
                (x - t) + sum
            };
            sum = t;
            table.push(sum + comp);
        }
        LnFactorials { table }
    }

    /// Shared table up to [`DEFAULT_PHOTON_CAP`].
    pub fn shared() -> &'static LnFactorials {
        static SHARED: OnceLock<LnFactorials> = OnceLock::new();
        SHARED.get_or_init(|| LnFactorials::new(DEFAULT_PHOTON_CAP))
    }

    pub fn cap(&self) -> u64 {
        self.table.len() as u64 - 1
    }

    /// `ln k!`; panics beyond the table.
    pub fn get(&self, k: u64) -> f64 {
        self.table[k as usize]
    }
}

/// Distribution of the photon number `k` in the transmitted port.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockDistribution {
    /// `probs[k]` for `k = 0..=m+n`.
    pub probs: Vec<f64>,
    /// Photons `(m, n)` in the transmitted and reflected input.
    pub inputs: (u64, u64),
    pub eta: f64,
}

impl FockDistribution {
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - mean).powi(2) * p)
            .sum()
    }

    /// Running sums `P(K ≤ k)`, with the last entry forced to 1.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = self
            .probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        cdf
    }
}

/// Output distribution for `|m, n⟩` on a beam splitter of transmittance `eta`.
///
/// `k` counts photons in the mode `b = √η a_m + √(1−η) a_n`.
pub fn bs_output_distribution(m: u64, n: u64, eta: f64) -> Result<FockDistribution> {
    bs_output_distribution_capped(m, n, eta, DEFAULT_PHOTON_CAP)
}

/// As [`bs_output_distribution`] with an explicit cap on `m + n`.
pub fn bs_output_distribution_capped(
    m: u64,
    n: u64,
    eta: f64,
    cap: u64,
) -> Result<FockDistribution> {
    unit_interval("eta", eta)?;
    let total = m + n;
    if total > cap {
        return Err(Error::PhotonCap { total, cap });
    }
    let owned;
    let lf = if cap <= DEFAULT_PHOTON_CAP {
        LnFactorials::shared()
    } else {
        owned = LnFactorials::new(cap);
        &owned
    };
    Ok(FockDistribution {
        probs: (0..=total)
            .map(|k| transition_probability(lf, m, n, k, eta))
            .collect(),
        inputs: (m, n),
        eta,
    })
}

/// `|⟨k, N−k|U(η)|m, n⟩|²` with `N = m + n`.
fn transition_probability(lf: &LnFactorials, m: u64, n: u64, k: u64, eta: f64) -> f64 {
    let total = m + n;
    if eta == 1.0 {
        return if k == m { 1.0 } else { 0.0 };
    }
    if eta == 0.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    // Symmetries of the d-matrix map the largest of m, n, k, N−k to r, with
    // p + q = N. The Jacobi degree N − r is then the smallest index.
    let l = total - k;
    let r = m.max(n).max(k).max(l);
    let (p, q) = if r == k {
        (m, n)
    } else if r == l {
        (n, m)
    } else if r == m {
        (k, l)
    } else {
        (l, k)
    };
    let degree = total - r;
    let (a, b) = (r - p, r - q);
    let ln_prefactor = lf.get(r) + lf.get(degree) - lf.get(p) - lf.get(q)
        + a as f64 * (1.0 - eta).ln()
        + b as f64 * eta.ln();
    let (value, ln_scale) = jacobi(degree, a as f64, b as f64, 2.0 * eta - 1.0);
    if value == 0.0 {
        return 0.0;
    }
    (ln_prefactor + 2.0 * (value.abs().ln() + ln_scale)).exp()
}

/// `P_n^{(a,b)}(x)` as `value · exp(ln_scale)`, by forward recurrence.
fn jacobi(n: u64, a: f64, b: f64, x: f64) -> (f64, f64) {
    const RESCALE: f64 = 1e150;
    let mut prev = 1.0;
    if n == 0 {
        return (prev, 0.0);
    }
    let mut cur = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0);
    let mut ln_scale = 0.0;
    let ab = a + b;
    for i in 2..=n {
        let i = i as f64;
        let c = 2.0 * i + ab;
        let denom = 2.0 * i * (i + ab) * (c - 2.0);
        let next = ((c - 1.0) * (c * (c - 2.0) * x + a * a - b * b) * cur
            - 2.0 * (i + a - 1.0) * (i + b - 1.0) * c * prev)
            / denom;
        prev = cur;
        cur = next;
        let mag = cur.abs();
        if mag > RESCALE {
            prev /= mag;
            cur /= mag;
            ln_scale += mag.ln();
        }
    }
    (cur, ln_scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::{BigInt, BigRational, One, ToPrimitive, Zero};
    use proptest::prelude::*;

    fn factorial(k: u64) -> BigInt {
        (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
    }

    fn binom(n: u64, k: u64) -> BigInt {
        if k > n {
            BigInt::zero()
        } else {
            factorial(n) / (factorial(k) * factorial(n - k))
        }
    }

    /// Exact probabilities from the binomial expansion of
    /// `(√η b† + …)^m (… )^n |0⟩`, in rationals for rational `η`.
    fn exact(m: u64, n: u64, eta: &BigRational) -> Vec<BigRational> {
        let total = m + n;
        let one_minus = BigRational::one() - eta;
        let pow = |x: &BigRational, e: u64| (0..e).fold(BigRational::one(), |acc, _| acc * x);
        (0..=total)
            .map(|k| {
                let mut sum = BigRational::zero();
                let t = |i: u64| -> Option<BigInt> {
                    if i > m || k < i || k - i > n {
                        return None;
                    }
                    let sign = if (m - i).is_multiple_of(2) { 1 } else { -1 };
                    Some(BigInt::from(sign) * binom(m, i) * binom(n, k - i))
                };
                for i in 0..=m {
                    for j in 0..=m {
                        let (Some(ti), Some(tj)) = (t(i), t(j)) else {
                            continue;
                        };
                        let e_eta = n + i + j - k;
                        let e_one = m + k - i - j;
                        sum += BigRational::from_integer(ti * tj)
                            * pow(eta, e_eta)
                            * pow(&one_minus, e_one);
                    }
                }
                sum * BigRational::from_integer(factorial(k) * factorial(total - k))
                    / BigRational::from_integer(factorial(m) * factorial(n))
            })
            .collect()
    }

    #[test]
    fn matches_exact_enumeration_for_small_inputs() {
        let etas = [(1, 2), (1, 3), (7, 10), (1, 100), (99, 100)];
        for total in 0..=10u64 {
            for m in 0..=total {
                let n = total - m;
                for &(num, den) in &etas {
                    let eta_q = BigRational::new(BigInt::from(num), BigInt::from(den));
                    let eta = num as f64 / den as f64;
                    let want = exact(m, n, &eta_q);
                    let got = bs_output_distribution(m, n, eta).unwrap();
                    let norm: BigRational = want.iter().cloned().sum();
                    assert!(norm.is_one(), "exact oracle not normalised");
                    for (k, (w, g)) in want.iter().zip(&got.probs).enumerate() {
                        let w = w.to_f64().unwrap();
                        // Exact zeros of the Jacobi factor are only reached to
                        // absolute roundoff.
                        assert!(
                            (w - g).abs() <= 1e-13 * w + 1e-16,
                            "m={m} n={n} eta={eta} k={k}: {g} vs {w}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn single_photon_transmission() {
        let d = bs_output_distribution(1, 0, 0.3).unwrap();
        assert!((d.probs[0] - 0.7).abs() < 1e-15 && (d.probs[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn two_photon_interference_cancels_coincidences() {
        let d = bs_output_distribution(1, 1, 0.5).unwrap();
        assert!((d.probs[0] - 0.5).abs() < 1e-15);
        assert!(d.probs[1].abs() < 1e-15);
        assert!((d.probs[2] - 0.5).abs() < 1e-15);
        let eta = 0.2;
        let d = bs_output_distribution(1, 1, eta).unwrap();
        assert!((d.probs[1] - (2.0 * eta - 1.0).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn single_input_is_binomial() {
        let (m, eta) = (40u64, 0.35f64);
        let d = bs_output_distribution(m, 0, eta).unwrap();
        let lf = LnFactorials::shared();
        for (k, p) in d.probs.iter().enumerate() {
            let k = k as u64;
            let want = (lf.get(m) - lf.get(k) - lf.get(m - k)
                + k as f64 * eta.ln()
                + (m - k) as f64 * (1.0 - eta).ln())
            .exp();
            assert!((p - want).abs() <= 1e-12 * want + 1e-300);
        }
        let d = bs_output_distribution(0, 25, 0.6).unwrap();
        assert!((d.mean() - 25.0 * 0.4).abs() < 1e-12);
    }

    #[test]
    fn trivial_transmittances() {
        let d = bs_output_distribution(3, 5, 1.0).unwrap();
        assert_eq!(d.probs[3], 1.0);
        assert_eq!(d.probs.iter().sum::<f64>(), 1.0);
        let d = bs_output_distribution(3, 5, 0.0).unwrap();
        assert_eq!(d.probs[5], 1.0);
    }

    #[test]
    fn fock_moments_for_all_small_inputs() {
        for m in 0..=30u64 {
            for n in 0..=30u64 {
                for eta in [0.1, 0.5, 0.77] {
                    let d = bs_output_distribution(m, n, eta).unwrap();
                    let (mf, nf) = (m as f64, n as f64);
                    let norm: f64 = d.probs.iter().sum();
                    assert!(
                        (norm - 1.0).abs() < 1e-12,
                        "norm {norm} at ({m}, {n}, {eta})"
                    );
                    assert!(d.probs.iter().all(|&p| p >= 0.0));
                    assert!((d.mean() - (eta * mf + (1.0 - eta) * nf)).abs() < 1e-10);
                    let var = eta * (1.0 - eta) * (mf + nf + 2.0 * mf * nf);
                    assert!((d.variance() - var).abs() < 1e-10 * var.max(1.0));
                }
            }
        }
    }

    #[test]
    fn large_inputs_stay_normalised() {
        for (m, n) in [(4000, 96), (2048, 2048), (1, 4095), (300, 700)] {
            let d = bs_output_distribution(m, n, 0.37).unwrap();
            let norm: f64 = d.probs.iter().sum();
            assert!((norm - 1.0).abs() < 1e-11, "norm {norm} at ({m}, {n})");
            let want = 0.37 * m as f64 + 0.63 * n as f64;
            assert!((d.mean() - want).abs() < 1e-9 * want);
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(
            bs_output_distribution(4000, 97, 0.5),
            Err(Error::PhotonCap {
                total: 4097,
                cap: 4096
            })
        );
        assert!(bs_output_distribution_capped(5000, 0, 0.5, 6000).is_ok());
        assert!(bs_output_distribution(1, 1, 1.5).is_err());
    }

    #[test]
    fn cdf_ends_at_one() {
        let cdf = bs_output_distribution(7, 3, 0.4).unwrap().cdf();
        assert_eq!(cdf.len(), 11);
        assert_eq!(*cdf.last().unwrap(), 1.0);
        assert!(cdf.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn ln_factorials() {
        let lf = LnFactorials::new(170);
        assert_eq!(lf.get(0), 0.0);
        assert!((lf.get(10) - 3_628_800f64.ln()).abs() < 1e-14);
        let direct: f64 = (1..=170).map(|i| (i as f64).ln()).sum();
        assert!((lf.get(170) - direct).abs() < 1e-11);
    }

    proptest! {
        #[test]
        fn mirror_symmetry(m in 0u64..60, n in 0u64..60, eta in 0.01f64..0.99) {
            // Swapping inputs and exchanging η ↔ 1 − η relabels the ports.
            let d = bs_output_distribution(m, n, eta).unwrap();
            let e = bs_output_distribution(n, m, 1.0 - eta).unwrap();
            for (p, q) in d.probs.iter().zip(&e.probs) {
                prop_assert!((p - q).abs() <= 1e-12 * p.max(*q) + 1e-16);
            }
        }
    }
}
