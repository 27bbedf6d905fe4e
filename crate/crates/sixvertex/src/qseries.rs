//! q-series primitives and the two shift distributions.
//!
//! Provides q-Pochhammer products, the product form of the q-Laplace
//! kernel `prod_{i>=0} 1/(1 + z q^{x+i})`, the Theta-type law
//! `P(S = k) ∝ q^{k(k-1)/2}` on the integers and the q-geometric law
//! `P(X = k) = q^k (q^{k+1}; q)_inf` on the nonnegative integers, and the
//! identity `P(X + S <= n) = prod_{i>=0} 1/(1 + q^{n+i})` tying the
//! q-Laplace transform of the corner height to a genuine shifted tail
//! probability.
//!
//! Truncations are certified: terms are dropped only when a geometric (or
//! super-geometric) tail bound falls below the tolerance.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{height_law, ModelParams};

/// `eta_q = log(1/q)`, the curvature scale of every Gaussian-type bound
/// in the q-world.
pub fn eta_q(q: f64) -> f64 {
    (1.0 / q).ln()
}

/// Truncation policy for the q-series tables.
#[derive(Clone, Copy, Debug)]
pub struct QTruncation {
    pub max_terms: usize,
    /// Absolute tolerance below which a certified tail may be dropped.
    pub tail_tol: f64,
}

impl Default for QTruncation {
    fn default() -> Self {
        QTruncation {
            max_terms: 100_000,
            tail_tol: 1e-14,
        }
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::ParamRange {
            name: "q",
            value: q,
        });
    }
    Ok(())
}

/// `log(1 + z q^e)` stable for any real exponent, including very
/// negative `e` where `z q^e` overflows.
pub fn log1p_q_power(z: f64, q: f64, e: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let w = z.ln() + e * q.ln();
    if w > 0.0 {
        w + (-w).exp().ln_1p()
    } else {
        w.exp().ln_1p()
    }
}

/// q-Pochhammer symbol `(x; q)_n = prod_{j=0}^{n-1} (1 - x q^j)`;
/// `n = None` evaluates the infinite product, truncated once the dropped
/// tail is below machine precision.
pub fn q_pochhammer(x: f64, q: f64, n: Option<usize>) -> Result<f64> {
    check_q(q)?;
    match n {
        Some(n) => {
            let mut prod = 1.0;
            let mut xq = x;
            for _ in 0..n {
                prod *= 1.0 - xq;
                xq *= q;
            }
            Ok(prod)
        }
        None => {
            let mut prod = 1.0;
            let mut xq = x;
            for _ in 0..100_000 {
                if xq.abs() < 1e-18 {
                    break;
                }
                prod *= 1.0 - xq;
                xq *= q;
            }
            Ok(prod)
        }
    }
}

/// `prod_{i>=0} 1/(1 + zeta q^{offset + i})`, the q-Laplace kernel.
/// Increasing in `offset`, decreasing in `zeta`; equals 1 at `zeta = 0`.
pub fn qlaplace_product(zeta: f64, q: f64, offset: f64) -> Result<f64> {
    check_q(q)?;
    if zeta < 0.0 {
        return Err(Error::ParamRange {
            name: "zeta",
            value: zeta,
        });
    }
    if zeta == 0.0 {
        return Ok(1.0);
    }
    let mut log_sum = 0.0;
    let mut i = 0usize;
    loop {
        let e = offset + i as f64;
        let term = log1p_q_power(zeta, q, e);
        log_sum -= term;
        i += 1;
        // once past the crossover the terms decay geometrically
        if term < 1e-18 && zeta * q.powf(e) < 1.0 {
            break;
        }
        if i > 1_000_000 {
            break;
        }
    }
    Ok(log_sum.exp())
}

/// Truncated tables of the two shift laws for a fixed `q`:
/// `S` with `P(S = k) = q^{k(k-1)/2} / Z_S` on the integers, and the
/// q-geometric `X` with `P(X = k) = q^k (q^{k+1}; q)_inf` on `k >= 0`.
#[derive(Clone, Debug)]
pub struct ShiftDistributions {
    pub q: f64,
    trunc: QTruncation,
    /// `P(S = k)` for `k = s_min..=s_max`.
    s_pmf: Vec<f64>,
    s_min: i64,
    /// `P(X = k)` for `k = 0..chi_pmf.len()`.
    chi_pmf: Vec<f64>,
    /// Bilateral normalizer `Z_S = sum_k q^{k(k-1)/2}`.
    pub z_s: f64,
}

impl ShiftDistributions {
    pub fn new(q: f64, trunc: QTruncation) -> Result<Self> {
        check_q(q)?;
        // S: super-geometric decay; keep k with q^{k(k-1)/2} >= 1e-18
        let mut k_hi = 2i64;
        while q.powf((k_hi * (k_hi - 1)) as f64 / 2.0) >= 1e-18 {
            k_hi += 1;
        }
        let s_min = 1 - k_hi; // symmetry: k(k-1)/2 at 1-k equals at k
        let mut s_pmf: Vec<f64> = (s_min..=k_hi)
            .map(|k| q.powf((k * (k - 1)) as f64 / 2.0))
            .collect();
        let z_s: f64 = s_pmf.iter().sum();
        for w in &mut s_pmf {
            *w /= z_s;
        }
        // X: tail mass beyond K is below q^{K+1}/(1-q)
        let mut k_max = 1usize;
        while q.powi(k_max as i32 + 1) / (1.0 - q) >= trunc.tail_tol && k_max < trunc.max_terms {
            k_max += 1;
        }
        // P(X = k) = q^k * prod_{j >= k+1} (1 - q^j), built backwards from
        // the stable infinite tail product.
        let mut tail = q_pochhammer(q.powi(k_max as i32 + 2), q, None)?;
        let mut chi_pmf = vec![0.0; k_max + 1];
        for k in (0..=k_max).rev() {
            tail *= 1.0 - q.powi(k as i32 + 1);
            chi_pmf[k] = q.powi(k as i32) * tail;
        }
        Ok(ShiftDistributions {
            q,
            trunc,
            s_pmf,
            s_min,
            chi_pmf,
            z_s,
        })
    }

    pub fn pmf_s(&self, k: i64) -> f64 {
        if k < self.s_min || k - self.s_min >= self.s_pmf.len() as i64 {
            0.0
        } else {
            self.s_pmf[(k - self.s_min) as usize]
        }
    }

    /// Exact `log P(S = k) = -(k(k-1)/2) eta_q - log Z_S`, valid far
    /// beyond the truncated table.
    pub fn log_pmf_s(&self, k: i64) -> f64 {
        -((k * (k - 1)) as f64 / 2.0) * eta_q(self.q) - self.z_s.ln()
    }

    pub fn pmf_chi(&self, k: i64) -> f64 {
        if k < 0 || k as usize >= self.chi_pmf.len() {
            0.0
        } else {
            self.chi_pmf[k as usize]
        }
    }

    pub fn s_support(&self) -> (i64, i64) {
        (self.s_min, self.s_min + self.s_pmf.len() as i64 - 1)
    }

    pub fn chi_support_max(&self) -> i64 {
        self.chi_pmf.len() as i64 - 1
    }

    pub fn tail_tol(&self) -> f64 {
        self.trunc.tail_tol
    }

    pub fn sample_s<R: Rng>(&self, rng: &mut R) -> i64 {
        let mut u: f64 = rng.gen();
        for (idx, &w) in self.s_pmf.iter().enumerate() {
            u -= w;
            if u <= 0.0 {
                return self.s_min + idx as i64;
            }
        }
        self.s_min + self.s_pmf.len() as i64 - 1
    }

    pub fn sample_chi<R: Rng>(&self, rng: &mut R) -> i64 {
        let mut u: f64 = rng.gen();
        for (idx, &w) in self.chi_pmf.iter().enumerate() {
            u -= w;
            if u <= 0.0 {
                return idx as i64;
            }
        }
        self.chi_pmf.len() as i64 - 1
    }

    /// pmf of `X + S` by direct convolution of the truncated tables,
    /// returned with the value of its smallest support point.
    pub fn convolved_shift(&self) -> (i64, Vec<f64>) {
        let lo = self.s_min;
        let len = self.s_pmf.len() + self.chi_pmf.len() - 1;
        let mut pmf = vec![0.0; len];
        for (i, &ws) in self.s_pmf.iter().enumerate() {
            for (j, &wc) in self.chi_pmf.iter().enumerate() {
                pmf[i + j] += ws * wc;
            }
        }
        (lo, pmf)
    }

    /// `P(X + S <= n)` summed from the convolved tables.
    pub fn cdf_shift_convolved(&self, n: i64) -> f64 {
        let (lo, pmf) = self.convolved_shift();
        pmf.iter()
            .enumerate()
            .filter(|&(i, _)| lo + i as i64 <= n)
            .map(|(_, &w)| w)
            .sum()
    }

    /// `P(X + S <= n)` in closed form: `prod_{i>=0} 1/(1 + q^{n+i})`.
    pub fn cdf_shift_closed(&self, n: i64) -> Result<f64> {
        qlaplace_product(1.0, self.q, n as f64)
    }
}

/// `E[prod_{i>=0} 1/(1 + zeta q^{h(M,N)+i})]` over the exactly enumerated
/// height law.
pub fn q_laplace_of_height(params: &ModelParams, m: usize, n: usize, zeta: f64) -> Result<f64> {
    let law = height_law(params, m, n)?;
    let mut total = 0.0;
    for (r, &p) in law.iter().enumerate() {
        if p > 0.0 {
            total += p * qlaplace_product(zeta, params.q, r as f64)?;
        }
    }
    Ok(total)
}

/// `P(h(M,N) - X - S >= s N)` by convolving the height law with the
/// shift laws. For `s N` integer this equals the q-Laplace transform at
/// `zeta = q^{-sN}`.
pub fn shifted_tail(params: &ModelParams, m: usize, n: usize, s: f64) -> Result<f64> {
    let law = height_law(params, m, n)?;
    let shift = ShiftDistributions::new(params.q, QTruncation::default())?;
    let mut total = 0.0;
    for (r, &p) in law.iter().enumerate() {
        if p > 0.0 {
            // h - X - S >= sN  <=>  X + S <= h - sN
            let bound = (r as f64 - s * n as f64).floor() as i64;
            total += p * shift.cdf_shift_convolved(bound);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn pochhammer_edge_cases() {
        assert_eq!(q_pochhammer(0.7, 0.3, Some(0)).unwrap(), 1.0);
        assert_eq!(q_pochhammer(0.0, 0.5, None).unwrap(), 1.0);
        // (1/2; 1/2)_inf = (q; q)_inf at q = 1/2
        let v = q_pochhammer(0.5, 0.5, None).unwrap();
        assert!((v - 0.2887880950866024).abs() < 1e-12);
        assert!(q_pochhammer(0.5, 1.5, None).is_err());
    }

    #[test]
    fn qlaplace_product_reference_values() {
        assert_eq!(qlaplace_product(0.0, 0.5, 3.0).unwrap(), 1.0);
        let v = qlaplace_product(1.0, 0.5, 0.0).unwrap();
        assert!((v - 0.20971122089755384).abs() < 1e-12, "{v}");
        // telescoping: f(offset+1)/f(offset) = 1 + zeta q^offset
        for offset in [-2.0, 0.0, 1.5] {
            let ratio = qlaplace_product(0.8, 0.5, offset + 1.0).unwrap()
                / qlaplace_product(0.8, 0.5, offset).unwrap();
            assert!((ratio - (1.0 + 0.8 * 0.5f64.powf(offset))).abs() < 1e-12);
        }
        // monotone in offset, antitone in zeta
        assert!(
            qlaplace_product(1.0, 0.5, 1.0).unwrap() > qlaplace_product(1.0, 0.5, 0.0).unwrap()
        );
        assert!(
            qlaplace_product(2.0, 0.5, 0.0).unwrap() < qlaplace_product(1.0, 0.5, 0.0).unwrap()
        );
    }

    #[test]
    fn shift_distributions_normalize() {
        let d = ShiftDistributions::new(0.5, QTruncation::default()).unwrap();
        assert!((d.z_s - 3.2832651213103077).abs() < 1e-10);
        assert!((d.pmf_s(0) - 0.3045748555331143).abs() < 1e-12);
        assert_eq!(d.pmf_s(0), d.pmf_s(1));
        assert!((d.pmf_chi(0) - 0.2887880950866024).abs() < 1e-12);
        let s_mass: f64 = (d.s_support().0..=d.s_support().1)
            .map(|k| d.pmf_s(k))
            .sum();
        assert!((s_mass - 1.0).abs() < 1e-14);
        let chi_mass: f64 = (0..=d.chi_support_max()).map(|k| d.pmf_chi(k)).sum();
        assert!((chi_mass - 1.0).abs() < d.tail_tol());
        assert!((0..=d.chi_support_max()).all(|k| d.pmf_chi(k) >= 0.0));
    }

    #[test]
    fn normalizer_is_stable_under_truncation_doubling() {
        let d1 = ShiftDistributions::new(
            0.5,
            QTruncation {
                max_terms: 50_000,
                tail_tol: 1e-14,
            },
        )
        .unwrap();
        let d2 = ShiftDistributions::new(
            0.5,
            QTruncation {
                max_terms: 100_000,
                tail_tol: 1e-28,
            },
        )
        .unwrap();
        assert!((d1.z_s - d2.z_s).abs() < 1e-12);
    }

    #[test]
    fn chi_partial_sums_telescope() {
        // sum_{k<=K} P(X = k) = prod_{j>=K+1}(1 - q^j)
        let q = 0.5;
        let d = ShiftDistributions::new(q, QTruncation::default()).unwrap();
        for cap in [0i64, 1, 3, 7] {
            let partial: f64 = (0..=cap).map(|k| d.pmf_chi(k)).sum();
            let product = q_pochhammer(q.powi(cap as i32 + 1), q, None).unwrap();
            assert!((partial - product).abs() < 1e-12);
        }
    }

    #[test]
    fn cdf_identity_two_ways() {
        let d = ShiftDistributions::new(0.5, QTruncation::default()).unwrap();
        for n in -5..=10i64 {
            let a = d.cdf_shift_convolved(n);
            let b = d.cdf_shift_closed(n).unwrap();
            assert!((a - b).abs() < 1e-10, "n = {n}: {a} vs {b}");
        }
        // monotone, saturating at 1
        let mut prev = 0.0;
        for n in -5..=25i64 {
            let c = d.cdf_shift_convolved(n);
            assert!(c + 1e-13 >= prev);
            prev = c;
        }
        assert!((d.cdf_shift_closed(40).unwrap() - 1.0).abs() < 1e-10);
        assert!((d.cdf_shift_convolved(0) - 0.20971122089755384).abs() < 1e-10);
    }

    #[test]
    fn gaussian_tail_scaling_of_s() {
        // -log P(S = -vN) / N^2 approaches eta_q v^2 / 2
        let q = 0.5;
        let d = ShiftDistributions::new(q, QTruncation::default()).unwrap();
        let n = 100.0f64;
        for v in [0.5f64, 1.0] {
            let k = -(v * n).floor() as i64;
            let rate = -d.log_pmf_s(k) / (n * n);
            let target = eta_q(q) * v * v / 2.0;
            let ratio = rate / target;
            assert!((0.9..=1.1).contains(&ratio), "v = {v}: ratio {ratio}");
        }
    }

    #[test]
    fn samplers_follow_the_tables() {
        let d = ShiftDistributions::new(0.5, QTruncation::default()).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        let n = 50_000;
        let mut s0 = 0usize;
        let mut chi0 = 0usize;
        for _ in 0..n {
            if d.sample_s(&mut rng) == 0 {
                s0 += 1;
            }
            if d.sample_chi(&mut rng) == 0 {
                chi0 += 1;
            }
        }
        assert!((s0 as f64 / n as f64 - d.pmf_s(0)).abs() < 0.01);
        assert!((chi0 as f64 / n as f64 - d.pmf_chi(0)).abs() < 0.01);
    }

    #[test]
    fn q_laplace_of_height_reference() {
        let p = ModelParams::new(0.5, 0.5).unwrap();
        // zeta -> 0 gives 1
        assert!((q_laplace_of_height(&p, 2, 2, 0.0).unwrap() - 1.0).abs() < 1e-15);
        // worked 2x1 value: (2/3) F(1) + (1/3) F(0) = (5/3) F(0)
        let v = q_laplace_of_height(&p, 2, 1, 1.0).unwrap();
        assert!((v - 0.349518701496).abs() < 1e-9, "{v}");
    }

    #[test]
    fn shifted_tail_equals_q_laplace_on_the_lattice() {
        // with sN integer the two routes agree to convolution accuracy
        let p = ModelParams::new(0.5, 0.5).unwrap();
        let (m, n) = (3, 3);
        for k in -5..15i64 {
            let s = k as f64 / n as f64;
            let a = shifted_tail(&p, m, n, s).unwrap();
            let zeta = 0.5f64.powf(-s * n as f64);
            let b = q_laplace_of_height(&p, m, n, zeta).unwrap();
            assert!((a - b).abs() < 1e-10, "s = {s}: {a} vs {b}");
        }
    }
}
