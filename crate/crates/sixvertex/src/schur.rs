//! Partitions, z-measures, and the discrete log-gas.
//!
//! The z-measure with parameters `(a; z, z')` puts weight
//! `(1-a)^{z z'} a^{|λ|} s_λ(1^z) s_λ(1^{z'})` on partitions with at most
//! `min(z, z')` parts. Its multiplicative functional
//! `E[prod_{j=0}^{N-1} (1 + ζ q^{λ_{N-j}+j})]`, prefixed by
//! `prod_{j>=0} 1/(1+ζ q^j)`, reproduces the q-Laplace transform of the
//! six-vertex corner height with `(z, z') = (N, M-1)` — the exact
//! moment-matching identity this module cross-checks against the
//! enumerator at desk scale.
//!
//! In shifted coordinates `ℓ_i = λ_i + N - i` the measure is a discrete
//! log-gas: the module also evaluates the explicit external field
//! `V_{s,N}`, its deterministic prefactor `R_N`, the logarithmic energy of
//! atomic and block-smoothed empirical measures, and the per-partition
//! bookkeeping gap of the gas decomposition.

use crate::error::{Error, Result};
use crate::model::{height_law, ModelParams};
use crate::qseries::{self, log1p_q_power, qlaplace_product};

/// Integer partition: weakly decreasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) || parts.contains(&0) {
            return Err(Error::Config(format!("not a partition: {parts:?}")));
        }
        Ok(Partition { parts })
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    /// Total size `|λ|`.
    pub fn size(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `λ_i` with 1-based `i`, zero beyond the last part.
    pub fn part(&self, i: usize) -> u32 {
        if i == 0 || i > self.parts.len() {
            0
        } else {
            self.parts[i - 1]
        }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// The staircase `(n-1, n-2, ..., 1)` used by the decomposition
    /// benchmarks; its shifted coordinates are `ℓ_i = 2(n-i)`.
    pub fn staircase(n: usize) -> Self {
        Partition {
            parts: (1..n as u32).rev().collect(),
        }
    }
}

/// Every partition with at most `max_parts` parts and `λ_1 <= max_part`,
/// exhaustive and duplicate-free.
pub fn partitions_bounded(max_parts: usize, max_part: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut stack = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        let bound = prefix.last().copied().unwrap_or(max_part);
        out.push(Partition {
            parts: prefix.clone(),
        });
        if prefix.len() < max_parts {
            for v in 1..=bound {
                let mut next = prefix.clone();
                next.push(v);
                stack.push(next);
            }
        }
    }
    out.sort();
    out
}

/// Strictly decreasing shifted coordinates `ℓ_i = λ_i + n - i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftedCoords {
    ell: Vec<i64>,
}

impl ShiftedCoords {
    pub fn from_partition(lambda: &Partition, n: usize) -> Result<Self> {
        if lambda.len() > n {
            return Err(Error::Config(format!(
                "partition has {} parts, more than n = {n}",
                lambda.len()
            )));
        }
        let ell = (1..=n)
            .map(|i| lambda.part(i) as i64 + (n - i) as i64)
            .collect();
        Ok(ShiftedCoords { ell })
    }

    pub fn new(ell: Vec<i64>) -> Result<Self> {
        if ell.windows(2).any(|w| w[0] <= w[1]) || ell.last().is_some_and(|&l| l < 0) {
            return Err(Error::Config(format!(
                "not strictly decreasing >= 0: {ell:?}"
            )));
        }
        Ok(ShiftedCoords { ell })
    }

    pub fn to_partition(&self) -> Partition {
        let n = self.ell.len();
        let parts: Vec<u32> = self
            .ell
            .iter()
            .enumerate()
            .map(|(idx, &l)| (l - (n - (idx + 1)) as i64) as u32)
            .filter(|&p| p > 0)
            .collect();
        Partition { parts }
    }

    pub fn values(&self) -> &[i64] {
        &self.ell
    }

    pub fn len(&self) -> usize {
        self.ell.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ell.is_empty()
    }
}

/// Number of semistandard fillings with entries in `1..=k`:
/// `s_λ(1^k) = prod_{i<j} (λ_i - i - λ_j + j) / (j - i)`. Returns 0 when
/// the partition has more than `k` parts.
pub fn schur_dim(lambda: &Partition, k: usize) -> f64 {
    if lambda.len() > k {
        return 0.0;
    }
    let mut prod = 1.0;
    for i in 1..=k {
        for j in (i + 1)..=k {
            let num = lambda.part(i) as i64 - i as i64 - lambda.part(j) as i64 + j as i64;
            prod *= num as f64 / (j - i) as f64;
        }
    }
    prod
}

/// `log s_λ(1^k)` for windows where the product overflows.
pub fn log_schur_dim(lambda: &Partition, k: usize) -> f64 {
    if lambda.len() > k {
        return f64::NEG_INFINITY;
    }
    let mut sum = 0.0;
    for i in 1..=k {
        for j in (i + 1)..=k {
            let num = lambda.part(i) as i64 - i as i64 - lambda.part(j) as i64 + j as i64;
            sum += (num as f64).ln() - ((j - i) as f64).ln();
        }
    }
    sum
}

/// Parameters of the z-measure on partitions with at most
/// `min(z, z')` parts.
#[derive(Clone, Copy, Debug)]
pub struct ZMeasureParams {
    pub a: f64,
    pub z: usize,
    pub z_prime: usize,
}

impl ZMeasureParams {
    pub fn new(a: f64, z: usize, z_prime: usize) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::ParamRange {
                name: "a",
                value: a,
            });
        }
        Ok(ZMeasureParams { a, z, z_prime })
    }

    pub fn max_parts(&self) -> usize {
        self.z.min(self.z_prime)
    }
}

/// Weight `(1-a)^{z z'} a^{|λ|} s_λ(1^z) s_λ(1^{z'})`.
pub fn zmeasure_weight(p: &ZMeasureParams, lambda: &Partition) -> f64 {
    (1.0 - p.a).powi((p.z * p.z_prime) as i32)
        * p.a.powi(lambda.size() as i32)
        * schur_dim(lambda, p.z)
        * schur_dim(lambda, p.z_prime)
}

/// Report of the size-law cross-check: the law of `|λ|` under the
/// truncated z-measure against the `z z'`-fold convolution of
/// Geometric(a).
#[derive(Clone, Debug)]
pub struct SizeLawReport {
    pub max_abs_dev: f64,
    pub values_checked: usize,
    pub truncated_mass: f64,
}

/// The size of a z-measure partition is distributed as a sum of `z z'`
/// independent Geometric(a) variables; checks the first `max_value + 1`
/// probabilities pointwise.
pub fn size_law_check(
    p: &ZMeasureParams,
    max_part: u32,
    max_value: usize,
) -> Result<SizeLawReport> {
    let mut law = vec![0.0; max_value + 1];
    let mut mass = 0.0;
    for lambda in partitions_bounded(p.max_parts(), max_part) {
        let w = zmeasure_weight(p, &lambda);
        mass += w;
        let s = lambda.size() as usize;
        if s <= max_value {
            law[s] += w;
        }
    }
    // z z'-fold convolution of P(g = k) = (1-a) a^k
    let folds = p.z * p.z_prime;
    let mut geo = vec![0.0; max_value + 1];
    geo[0] = 1.0;
    for _ in 0..folds {
        let mut next = vec![0.0; max_value + 1];
        for v in 0..=max_value {
            if geo[v] == 0.0 {
                continue;
            }
            for k in 0..=(max_value - v) {
                next[v + k] += geo[v] * (1.0 - p.a) * p.a.powi(k as i32);
            }
        }
        geo = next;
    }
    let max_abs_dev = law
        .iter()
        .zip(&geo)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    Ok(SizeLawReport {
        max_abs_dev,
        values_checked: max_value + 1,
        truncated_mass: mass,
    })
}

/// Right-hand side of the moment-matching identity together with a
/// certified truncation bound.
#[derive(Clone, Debug)]
pub struct MultiplicativeExpectation {
    pub value: f64,
    /// Chernoff bound on the weight of the discarded partitions times the
    /// largest possible multiplicative factor.
    pub tail_bound: f64,
}

/// `[prod_{j>=0} 1/(1+ζ q^j)] E_{M(a;N,M-1)}[prod_{j=0}^{N-1}
/// (1 + ζ q^{λ_{N-j}+j})]`, truncated to `λ_1 <= max_part`.
pub fn multiplicative_expectation(
    a: f64,
    q: f64,
    n: usize,
    m: usize,
    zeta: f64,
    max_part: u32,
) -> Result<MultiplicativeExpectation> {
    if m < 1 {
        return Err(Error::ParamRange {
            name: "M",
            value: m as f64,
        });
    }
    let zp = m - 1;
    let zm = ZMeasureParams::new(a, n, zp)?;
    let prefix = qlaplace_product(zeta, q, 0.0)?;
    let mut expectation = 0.0;
    for lambda in partitions_bounded(zm.max_parts(), max_part) {
        let w = zmeasure_weight(&zm, &lambda);
        if w == 0.0 {
            continue;
        }
        let mut factor = 1.0;
        for j in 0..n {
            factor *= 1.0 + zeta * q.powf(lambda.part(n - j) as f64 + j as f64);
        }
        expectation += w * factor;
    }
    // Chernoff certificate: P(|λ| > L) <= theta^{-L} ((1-a)/(1-theta a))^{zz'}
    // for 1 < theta < 1/a, and each multiplicative factor is at most (1+ζ)^N.
    let theta = (1.0 + 1.0 / a) / 2.0;
    let chernoff =
        theta.powi(-(max_part as i32)) * ((1.0 - a) / (1.0 - theta * a)).powi((n * zp) as i32);
    let tail_bound = prefix * (1.0 + zeta).powi(n as i32) * chernoff;
    Ok(MultiplicativeExpectation {
        value: prefix * expectation,
        tail_bound,
    })
}

/// Both sides of the moment-matching identity at one `(M, N, ζ)`.
#[derive(Clone, Debug)]
pub struct MomentMatchReport {
    pub m: usize,
    pub n: usize,
    pub zeta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub trunc_bound: f64,
}

/// `|LHS - RHS|` of the identity: q-Laplace transform of the enumerated
/// corner height against the z-measure multiplicative expectation.
pub fn moment_match_gap(
    params: &ModelParams,
    m: usize,
    n: usize,
    zeta: f64,
    max_part: u32,
) -> Result<MomentMatchReport> {
    let lhs = {
        let law = height_law(params, m, n)?;
        let mut total = 0.0;
        for (r, &p) in law.iter().enumerate() {
            if p > 0.0 {
                total += p * qlaplace_product(zeta, params.q, r as f64)?;
            }
        }
        total
    };
    let rhs = multiplicative_expectation(params.a, params.q, n, m, zeta, max_part)?;
    Ok(MomentMatchReport {
        m,
        n,
        zeta,
        lhs,
        rhs: rhs.value,
        gap: (lhs - rhs.value).abs(),
        trunc_bound: rhs.tail_bound,
    })
}

/// The external field `V_{s,N}(x)` of the log-gas rewrite:
/// `x log(1/a) - (1/N) sum_{j=1}^{(α-1)N} log|x + j/N|
///  - (1/N) log(1 + q^{N(x-s)}) + s log(1/q)`.
pub fn potential_v_n(a: f64, q: f64, alpha: f64, s: f64, n: usize, x: f64) -> f64 {
    let big_n = n as f64;
    let extra = (alpha * big_n).round() as i64 - n as i64;
    let mut v = x * (1.0 / a).ln();
    for j in 1..=extra {
        v -= (x + j as f64 / big_n).abs().ln() / big_n;
    }
    v -= log1p_q_power(1.0, q, big_n * (x - s)) / big_n;
    v + qseries::eta_q(q) * s
}

/// The limiting field `V_s(x)` the previous one brackets:
/// `x log(1/a) + min(x, s) log(1/q) - (α-1)[log(x+α-1) - 1]
///  + x log(x / (x+α-1))`.
pub fn potential_v_limit(a: f64, q: f64, alpha: f64, s: f64, x: f64) -> f64 {
    let mut v = x * (1.0 / a).ln() + x.min(s) * (1.0 / q).ln();
    if alpha > 1.0 {
        v -= (alpha - 1.0) * ((x + alpha - 1.0).ln() - 1.0);
        if x > 0.0 {
            v += x * (x / (x + alpha - 1.0)).ln();
        }
    }
    v
}

/// Deterministic log-gas prefactor `R_N(s)`.
pub fn r_n(a: f64, q: f64, alpha: f64, s: f64, n: usize) -> f64 {
    let big_n = n as f64;
    let a_n = (alpha * big_n).round() as usize;
    let mut r = -alpha * (1.0 - a).ln() + 0.5 * a.ln() * (1.0 - 1.0 / big_n);
    for i in 0..n {
        for j in (i + 1)..n {
            r += 2.0 * (((j - i) as f64) / big_n).ln() / (big_n * big_n);
        }
    }
    for j in 1..=(a_n.saturating_sub(n)) {
        for i in 0..n {
            r += (((j + i) as f64) / big_n).ln() / (big_n * big_n);
        }
    }
    let mut j = 0f64;
    loop {
        let t = log1p_q_power(1.0, q, j - s * big_n);
        r += t / (big_n * big_n);
        if t < 1e-18 && j > s * big_n {
            break;
        }
        j += 1.0;
        if j > 1e6 {
            break;
        }
    }
    r - qseries::eta_q(q) * s
}

/// Logarithmic energy of the atomic empirical measure
/// `N^{-1} sum_i δ(ℓ_i/N)` under field `v`, off-diagonal pairs only.
pub fn empirical_energy<F: Fn(f64) -> f64>(v: F, ell: &ShiftedCoords, n: usize) -> Result<f64> {
    if ell.len() != n {
        return Err(Error::Config(format!(
            "need {n} coordinates, got {}",
            ell.len()
        )));
    }
    let big_n = n as f64;
    let xs: Vec<f64> = ell.values().iter().map(|&l| l as f64 / big_n).collect();
    let mut log_part = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            log_part -= 2.0 * (xs[i] - xs[j]).abs().ln();
        }
    }
    let field_part: f64 = xs.iter().map(|&x| v(x)).sum();
    Ok((log_part + (big_n - 1.0) * field_part) / (big_n * big_n))
}

/// Second antiderivative of `log|u|` used for exact block interactions.
fn log_l2(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        0.5 * u * u * u.abs().ln() - 0.75 * u * u
    }
}

/// Exact `-∫∫ log|x - y|` over two width-`w` blocks whose left edges are
/// `t` apart.
fn block_log_interaction(t: f64, w: f64) -> f64 {
    -(log_l2(t + w) - 2.0 * log_l2(t) + log_l2(t - w))
}

/// Logarithmic energy of the block-smoothed measure: each atom becomes a
/// width-`1/N` block of mass `1/N`. Log interactions between blocks are
/// exact; the field is sampled at block midpoints.
pub fn smoothed_energy<F: Fn(f64) -> f64>(v: F, ell: &ShiftedCoords, n: usize) -> Result<f64> {
    if ell.len() != n {
        return Err(Error::Config(format!(
            "need {n} coordinates, got {}",
            ell.len()
        )));
    }
    let big_n = n as f64;
    let w = 1.0 / big_n;
    let lefts: Vec<f64> = ell.values().iter().map(|&l| l as f64 / big_n).collect();
    let mut log_part = 0.0;
    for i in 0..n {
        for j in 0..n {
            log_part += block_log_interaction(lefts[i] - lefts[j], w);
        }
    }
    let field_part: f64 = lefts.iter().map(|&x| v(x + 0.5 * w)).sum();
    Ok(log_part + field_part / big_n)
}

/// `(1/N^2) |log W_prod - log W_exp|` for one partition: the explicit
/// product of the gas rewrite against `exp(-N^2 [R_N + I_{V_N}])`. The
/// identity holds only up to `O(1/N)` single-particle bookkeeping, so the
/// gap is reported rather than asserted to vanish.
pub fn loggas_decomposition_gap(
    a: f64,
    q: f64,
    n: usize,
    alpha: f64,
    s: f64,
    lambda: &Partition,
) -> Result<f64> {
    let big_n = n as f64;
    let a_n = (alpha * big_n).round();
    if (alpha * big_n - a_n).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "alpha * N = {} is not an integer",
            alpha * big_n
        )));
    }
    let a_n = a_n as usize;
    if a_n < n {
        return Err(Error::Config("alpha >= 1 required".into()));
    }
    let ell = ShiftedCoords::from_partition(lambda, n)?;
    // log W_prod: z-measure weight x multiplicative factor x q-products
    let mut log_w = alpha * big_n * big_n * (1.0 - a).ln() + lambda.size() as f64 * a.ln();
    log_w += 2.0 * log_schur_dim(lambda, n);
    // cross product of s_lambda(1^{alpha N}) over the extra columns
    for i in 1..=n {
        for j in (n + 1)..=a_n {
            let l_i = ell.values()[i - 1];
            log_w += ((l_i + j as i64 - n as i64) as f64).ln() - ((j - i) as f64).ln();
        }
    }
    for &l in ell.values() {
        log_w += log1p_q_power(1.0, q, l as f64 - s * big_n);
    }
    let mut j = 0f64;
    loop {
        let t = log1p_q_power(1.0, q, j - s * big_n);
        log_w -= t;
        if t < 1e-18 && j > s * big_n {
            break;
        }
        j += 1.0;
        if j > 1e6 {
            break;
        }
    }
    // log W_exp = -N^2 (R_N + I_{V_N}(mu_N))
    let energy = empirical_energy(|x| potential_v_n(a, q, alpha, s, n, x), &ell, n)?;
    let log_w_exp = -(big_n * big_n) * (r_n(a, q, alpha, s, n) + energy);
    Ok((log_w - log_w_exp).abs() / (big_n * big_n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Signed};

    #[test]
    fn partition_basics() {
        assert!(Partition::new(vec![3, 1, 1]).is_ok());
        assert!(Partition::new(vec![1, 3]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
        let p = Partition::new(vec![4, 2]).unwrap();
        assert_eq!(p.size(), 6);
        assert_eq!(p.part(1), 4);
        assert_eq!(p.part(3), 0);
    }

    #[test]
    fn bounded_enumeration_is_exhaustive_and_duplicate_free() {
        // #{λ : at most n parts, λ_1 <= L} = C(n + L, n)
        let choose = |n: u64, k: u64| -> u64 {
            let mut r = 1u64;
            for i in 0..k {
                r = r * (n - i) / (i + 1);
            }
            r
        };
        for (n, l) in [(2usize, 3u32), (3, 4), (4, 5)] {
            let all = partitions_bounded(n, l);
            let expected = choose((n as u64) + (l as u64), n as u64);
            assert_eq!(all.len() as u64, expected, "n={n}, L={l}");
            let mut dedup = all.clone();
            dedup.dedup();
            assert_eq!(dedup.len(), all.len());
        }
    }

    #[test]
    fn shifted_coords_round_trip() {
        for lambda in partitions_bounded(3, 5) {
            let sc = ShiftedCoords::from_partition(&lambda, 3).unwrap();
            let back = sc.to_partition();
            assert_eq!(back, lambda);
            let vals = sc.values();
            assert!(vals.windows(2).all(|w| w[0] > w[1]));
        }
        assert!(ShiftedCoords::new(vec![3, 3, 1]).is_err());
    }

    /// Exact rational Schur dimension, the independent oracle for the
    /// floating product formula.
    fn schur_dim_exact(lambda: &Partition, k: usize) -> BigRational {
        let mut prod = BigRational::one();
        for i in 1..=k {
            for j in (i + 1)..=k {
                let num = lambda.part(i) as i64 - i as i64 - lambda.part(j) as i64 + j as i64;
                prod *= BigRational::new(BigInt::from(num), BigInt::from((j - i) as i64));
            }
        }
        prod
    }

    #[test]
    fn schur_dimension_values() {
        assert_eq!(schur_dim(&Partition::empty(), 3), 1.0);
        assert_eq!(schur_dim(&Partition::new(vec![1]).unwrap(), 2), 2.0);
        assert_eq!(schur_dim(&Partition::new(vec![2, 1]).unwrap(), 3), 8.0);
        assert_eq!(schur_dim(&Partition::new(vec![1, 1, 1]).unwrap(), 2), 0.0);
        // positive integers, matching the exact rational product
        for lambda in partitions_bounded(3, 6) {
            for k in 3..=5usize {
                let f = schur_dim(&lambda, k);
                let exact = schur_dim_exact(&lambda, k);
                assert!(exact.is_integer() && exact.is_positive());
                let e: f64 = exact.to_integer().to_string().parse().unwrap();
                assert!((f - e).abs() < 1e-6 * e.max(1.0));
                assert!((log_schur_dim(&lambda, k) - e.ln()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zmeasure_geometric_at_z_one() {
        // z = z' = 1: weight of (k) is (1-a) a^k
        let p = ZMeasureParams::new(0.5, 1, 1).unwrap();
        for k in 0..6u32 {
            let lambda = if k == 0 {
                Partition::empty()
            } else {
                Partition::new(vec![k]).unwrap()
            };
            let w = zmeasure_weight(&p, &lambda);
            assert!((w - 0.5 * 0.5f64.powi(k as i32)).abs() < 1e-15);
        }
        let l2 = Partition::new(vec![2]).unwrap();
        assert!((zmeasure_weight(&p, &l2) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn zmeasure_truncated_mass_approaches_one() {
        let p = ZMeasureParams::new(0.5, 2, 2).unwrap();
        let mass = |cap: u32| -> f64 {
            partitions_bounded(2, cap)
                .iter()
                .map(|l| zmeasure_weight(&p, l))
                .sum()
        };
        assert!(mass(20) < mass(40));
        assert!((mass(60) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn size_law_matches_geometric_convolution() {
        let p = ZMeasureParams::new(0.5, 2, 2).unwrap();
        let rep = size_law_check(&p, 80, 10).unwrap();
        assert!(rep.max_abs_dev < 1e-10, "{rep:?}");
        // mean of |λ| is z z' a/(1-a)
        let mean: f64 = partitions_bounded(2, 80)
            .iter()
            .map(|l| l.size() as f64 * zmeasure_weight(&p, l))
            .sum();
        assert!((mean - 4.0 * 1.0).abs() < 1e-8);
    }

    #[test]
    fn forced_empty_partition_reduction() {
        // M = 1 forces λ = ∅: the expectation collapses to
        // prod_{j>=N} 1/(1+ζ q^j); at N = 1 that is prod_{j>=1}.
        let v = multiplicative_expectation(0.5, 0.5, 1, 1, 1.0, 10).unwrap();
        let expect = qlaplace_product(1.0, 0.5, 1.0).unwrap();
        assert!((v.value - expect).abs() < 1e-14);
        // and for N = 3: prod_{j>=3}
        let v3 = multiplicative_expectation(0.5, 0.5, 3, 1, 1.0, 10).unwrap();
        let expect3 = qlaplace_product(1.0, 0.5, 3.0).unwrap();
        assert!((v3.value - expect3).abs() < 1e-14);
    }

    #[test]
    fn multiplicative_expectation_reference_and_monotone() {
        let v = multiplicative_expectation(0.5, 0.5, 1, 2, 1.0, 60).unwrap();
        assert!((v.value - 0.349518701496).abs() < 1e-9, "{}", v.value);
        let lo = multiplicative_expectation(0.5, 0.5, 2, 2, 2.0, 60).unwrap();
        let hi = multiplicative_expectation(0.5, 0.5, 2, 2, 0.5, 60).unwrap();
        assert!(lo.value < hi.value);
    }

    #[test]
    fn moment_match_small_windows() {
        let params = ModelParams::new(0.5, 0.5).unwrap();
        for (m, n) in [(1usize, 1usize), (2, 1), (2, 2), (3, 2)] {
            for zeta in [0.1, 1.0, 10.0] {
                let rep = moment_match_gap(&params, m, n, zeta, 60).unwrap();
                assert!(
                    rep.gap < 1e-10,
                    "(M,N)=({m},{n}), zeta={zeta}: gap {}",
                    rep.gap
                );
            }
        }
    }

    #[test]
    fn field_bracketing_and_pointwise_convergence() {
        // |V_N - V| <= C/N + (1/N) log((x+α-1)/x); the log-sum and
        // q-smoothing terms push V_N slightly below V.
        for alpha in [1.0, 2.0] {
            for n in [10usize, 100] {
                for x in [0.2, 0.7, 1.3, 2.5] {
                    let vn = potential_v_n(0.5, 0.5, alpha, 0.5, n, x);
                    let v = potential_v_limit(0.5, 0.5, alpha, 0.5, x);
                    let slack = 1.0 / n as f64 + ((x + alpha - 1.0) / x).ln() / n as f64;
                    assert!(vn - v <= 1e-12, "V_N should not exceed V: {}", vn - v);
                    assert!(v - vn <= slack, "alpha={alpha}, n={n}, x={x}: {}", v - vn);
                }
            }
        }
        let d10 = (potential_v_n(0.5, 0.5, 2.0, 0.5, 10, 1.0)
            - potential_v_limit(0.5, 0.5, 2.0, 0.5, 1.0))
        .abs();
        let d100 = (potential_v_n(0.5, 0.5, 2.0, 0.5, 100, 1.0)
            - potential_v_limit(0.5, 0.5, 2.0, 0.5, 1.0))
        .abs();
        assert!(d100 < d10 / 5.0);
    }

    #[test]
    fn r_n_converges_to_its_limit() {
        // R_N - R = (log N + log 2π)/N + O(1/N): about 0.037 at N = 200.
        let rs0 = -1.1534264097200273; // eta(0-0)/2 - log(1-a) + log(a)/2 + C_1
        let diffs: Vec<f64> = [50usize, 100, 200]
            .iter()
            .map(|&n| (r_n(0.5, 0.5, 1.0, 0.0, n) - rs0).abs())
            .collect();
        assert!(diffs[0] > diffs[1] && diffs[1] > diffs[2]);
        assert!(diffs[2] < 0.04, "{diffs:?}");
    }

    #[test]
    fn empirical_and_smoothed_energies_approach_each_other() {
        let v = |x: f64| x * 2.0f64.ln();
        let gap = |n: usize| -> f64 {
            let lambda = Partition::staircase(n);
            let ell = ShiftedCoords::from_partition(&lambda, n).unwrap();
            (empirical_energy(v, &ell, n).unwrap() - smoothed_energy(v, &ell, n).unwrap()).abs()
        };
        let gaps: Vec<f64> = [8usize, 16, 32].iter().map(|&n| gap(n)).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    }

    #[test]
    fn decomposition_gap_decays_on_the_staircase() {
        let mut prev = f64::INFINITY;
        for n in [4usize, 8, 16, 32] {
            let d =
                loggas_decomposition_gap(0.5, 0.5, n, 1.0, 0.0, &Partition::staircase(n)).unwrap();
            assert!(d < prev, "D_{n} = {d} vs previous {prev}");
            prev = d;
        }
        assert!(prev < 0.1, "D_32 = {prev}");
    }

    #[test]
    fn decomposition_shifts_consistently_in_s() {
        // moving s by 1/N moves both sides together: the gap stays small
        // and close to its s = 0 value
        let n = 16;
        let lambda = Partition::staircase(n);
        let d0 = loggas_decomposition_gap(0.5, 0.5, n, 1.0, 0.0, &lambda).unwrap();
        let d1 = loggas_decomposition_gap(0.5, 0.5, n, 1.0, 1.0 / n as f64, &lambda).unwrap();
        assert!((d0 - d1).abs() < 0.05, "{d0} vs {d1}");
        // alpha = 2 smoke: finite and small-ish
        let d2 = loggas_decomposition_gap(0.5, 0.5, 8, 2.0, 0.0, &Partition::staircase(8)).unwrap();
        assert!(d2.is_finite() && d2 < 1.0);
    }
}
