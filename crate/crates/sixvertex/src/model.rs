//! The stochastic six-vertex model with step initial condition.
//!
//! Vertex weights, Markovian sampling along anti-diagonals, exact Boltzmann
//! enumeration of every step-boundary surface on a finite window, the corner
//! height observable, tail tables, and the weight inequalities driving the
//! weak log-concavity of the height distribution.
//!
//! Two arithmetic modes coexist: `f64` log-space weights for windows up to
//! `M*N <= 26`, and exact rationals (guarded at `M*N <= 16`) when the
//! inequalities must be certified without rounding doubt.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::height::{boundary_count_in, region_neq, upsilon, Face, HeightField, VertexSite};

/// Guard for the `f64` enumerator: number of window vertices.
pub const ENUMERATION_GUARD: usize = 26;
/// Guard for the exact-rational enumerator.
pub const EXACT_GUARD: usize = 16;

/// Model parameters `(a, q)` in the open unit square, with the derived
/// continuation probabilities: `b1` for an isolated vertical arrow to keep
/// moving up, `b2` for an isolated horizontal arrow to keep moving right.
#[derive(Clone, Copy, Debug)]
pub struct ModelParams {
    pub a: f64,
    pub q: f64,
    pub b1: f64,
    pub b2: f64,
}

impl ModelParams {
    pub fn new(a: f64, q: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::ParamRange {
                name: "a",
                value: a,
            });
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::ParamRange {
                name: "q",
                value: q,
            });
        }
        Ok(ModelParams {
            a,
            q,
            b1: q * (1.0 - a) / (1.0 - a * q),
            b2: (1.0 - a) / (1.0 - a * q),
        })
    }

    /// The constant `C = 1 / (a q (1-a)^2 (1-q)^2)` meant to bound any
    /// ratio of two vertex-weight products against two others.
    pub fn weight_ratio_bound(&self) -> f64 {
        1.0 / (self.a * self.q * (1.0 - self.a).powi(2) * (1.0 - self.q).powi(2))
    }

    /// Whether `C` really dominates every ratio `w1 w2 / (w3 w4)` of table
    /// weights, i.e. `min(b1, 1-b2)^2 >= 1/C`. This fails for lopsided
    /// parameters such as `(a, q) = (0.9, 0.2)`; both reference parameter
    /// sets `(1/2, 1/2)` and `(0.3, 0.7)` satisfy it.
    pub fn cineq_holds(&self) -> bool {
        let min_w = self.b1.min(1.0 - self.b2);
        min_w * min_w * self.weight_ratio_bound() >= 1.0 - 1e-12
    }
}

/// Local arrow configuration `(i1, j1; i2, j2)`: incoming vertical and
/// horizontal occupations, then outgoing. Admissible configurations
/// conserve arrows, `i1 + j1 = i2 + j2`, leaving the six familiar cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexConfig {
    pub i1: u8,
    pub j1: u8,
    pub i2: u8,
    pub j2: u8,
}

impl VertexConfig {
    pub fn new(i1: u8, j1: u8, i2: u8, j2: u8) -> Self {
        VertexConfig { i1, j1, i2, j2 }
    }

    pub fn is_admissible(&self) -> bool {
        self.i1 <= 1
            && self.j1 <= 1
            && self.i2 <= 1
            && self.j2 <= 1
            && self.i1 + self.j1 == self.i2 + self.j2
    }
}

/// Stochastic weight of a single vertex configuration.
pub fn vertex_weight(params: &ModelParams, cfg: VertexConfig) -> Result<f64> {
    if !cfg.is_admissible() {
        return Err(Error::NonConserving {
            i1: cfg.i1,
            j1: cfg.j1,
            i2: cfg.i2,
            j2: cfg.j2,
        });
    }
    Ok(match (cfg.i1, cfg.j1, cfg.i2, cfg.j2) {
        (0, 0, 0, 0) | (1, 1, 1, 1) => 1.0,
        (1, 0, 1, 0) => params.b1,
        (1, 0, 0, 1) => 1.0 - params.b1,
        (0, 1, 0, 1) => params.b2,
        (0, 1, 1, 0) => 1.0 - params.b2,
        _ => unreachable!("admissible binary configurations are the six above"),
    })
}

/// Exact-rational parameters for the certified arithmetic mode.
#[derive(Clone, Debug)]
pub struct ExactParams {
    pub a: BigRational,
    pub q: BigRational,
    pub b1: BigRational,
    pub b2: BigRational,
}

impl ExactParams {
    pub fn new(a: BigRational, q: BigRational) -> Result<Self> {
        let zero = BigRational::zero();
        let one = BigRational::one();
        if a <= zero || a >= one {
            return Err(Error::ParamRange {
                name: "a",
                value: rational_to_f64(&a),
            });
        }
        if q <= zero || q >= one {
            return Err(Error::ParamRange {
                name: "q",
                value: rational_to_f64(&q),
            });
        }
        let denom = &one - &a * &q;
        Ok(ExactParams {
            b1: &q * (&one - &a) / denom.clone(),
            b2: (&one - &a) / denom,
            a,
            q,
        })
    }

    pub fn from_ratios(a: (i64, i64), q: (i64, i64)) -> Result<Self> {
        ExactParams::new(
            BigRational::new(BigInt::from(a.0), BigInt::from(a.1)),
            BigRational::new(BigInt::from(q.0), BigInt::from(q.1)),
        )
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    let digits = 18u32;
    let scale = BigInt::from(10u64.pow(digits));
    let scaled = (r.numer() * &scale) / r.denom();
    let mut x = 0.0f64;
    let mut rest = scaled.abs();
    let base = BigInt::from(u64::MAX);
    let mut mult = 1.0f64;
    while !rest.is_zero() {
        let digit = &rest % &base;
        x += mult * digit.to_string().parse::<f64>().unwrap_or(0.0);
        mult *= u64::MAX as f64 + 1.0;
        rest /= &base;
    }
    let x = x / 10f64.powi(digits as i32);
    if r.is_negative() {
        -x
    } else {
        x
    }
}

pub fn vertex_weight_exact(params: &ExactParams, cfg: VertexConfig) -> Result<BigRational> {
    if !cfg.is_admissible() {
        return Err(Error::NonConserving {
            i1: cfg.i1,
            j1: cfg.j1,
            i2: cfg.i2,
            j2: cfg.j2,
        });
    }
    let one = BigRational::one();
    Ok(match (cfg.i1, cfg.j1, cfg.i2, cfg.j2) {
        (0, 0, 0, 0) | (1, 1, 1, 1) => one,
        (1, 0, 1, 0) => params.b1.clone(),
        (1, 0, 0, 1) => one - &params.b1,
        (0, 1, 0, 1) => params.b2.clone(),
        (0, 1, 1, 0) => one - &params.b2,
        _ => unreachable!(),
    })
}

/// Reads the local configuration of `h` around vertex `v` from the four
/// adjacent faces.
pub fn vertex_config_at(h: &HeightField, v: VertexSite) -> Result<VertexConfig> {
    let i1 = h.get(v.sw()) - h.get(v.se());
    let j1 = h.get(v.nw()) - h.get(v.sw());
    let i2 = h.get(v.nw()) - h.get(v.ne());
    let j2 = h.get(v.ne()) - h.get(v.se());
    let ok = [i1, j1, i2, j2].iter().all(|&d| d == 0 || d == 1);
    if !ok {
        return Err(Error::NonConserving {
            i1: i1.rem_euclid(2) as u8,
            j1: j1.rem_euclid(2) as u8,
            i2: i2.rem_euclid(2) as u8,
            j2: j2.rem_euclid(2) as u8,
        });
    }
    Ok(VertexConfig::new(i1 as u8, j1 as u8, i2 as u8, j2 as u8))
}

/// Vertices of the window in nondecreasing `x + y` order, left to right
/// within each anti-diagonal. Outcomes on an anti-diagonal are independent
/// given the previous shell, so the within-shell order is immaterial; it is
/// fixed for determinism.
fn sweep_order(m: usize, n: usize) -> Vec<VertexSite> {
    let mut order = Vec::with_capacity(m * n);
    for s in 2..=(m + n) {
        let x_lo = if s > n { s - n } else { 1 };
        let x_hi = s.saturating_sub(1).min(m);
        for x in x_lo..=x_hi {
            order.push(VertexSite::new(x, s - x));
        }
    }
    order
}

/// Samples one step-boundary surface on the `m x n` window. Deterministic
/// in `(params, m, n, seed)`; stream 0 of the seed.
pub fn sample_height(params: &ModelParams, m: usize, n: usize, seed: u64) -> HeightField {
    sample_height_stream(params, m, n, seed, 0)
}

/// As [`sample_height`] but on an independent RNG stream, one per replica;
/// results do not depend on scheduling when replicas run in parallel.
pub fn sample_height_stream(
    params: &ModelParams,
    m: usize,
    n: usize,
    seed: u64,
    replica: u64,
) -> HeightField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    let mut h = HeightField::step(m, n);
    for v in sweep_order(m, n) {
        let i1 = h.get(v.sw()) - h.get(v.se());
        let j1 = h.get(v.nw()) - h.get(v.sw());
        let i2 = match (i1, j1) {
            (0, 0) => 0,
            (1, 1) => 1,
            (1, 0) => i64::from(rng.gen::<f64>() < params.b1),
            (0, 1) => i64::from(rng.gen::<f64>() >= params.b2),
            _ => unreachable!("gradient constraints keep occupations binary"),
        };
        h.set(v.ne(), h.get(v.nw()) - i2);
    }
    h
}

/// Log-probability of observing `h` on the vertex rectangle
/// `{1..m_lim} x {1..n_lim}`: the sum of log vertex weights there. For a
/// step-boundary surface this is the log of its exact probability.
pub fn boltzmann_log_weight(
    params: &ModelParams,
    h: &HeightField,
    m_lim: usize,
    n_lim: usize,
) -> Result<f64> {
    let mut total = 0.0;
    for x in 1..=m_lim {
        for y in 1..=n_lim {
            let w = vertex_weight(params, vertex_config_at(h, VertexSite::new(x, y))?)?;
            total += w.ln();
        }
    }
    Ok(total)
}

/// Exact-rational Boltzmann weight on the vertex rectangle.
pub fn boltzmann_weight_exact(
    params: &ExactParams,
    h: &HeightField,
    m_lim: usize,
    n_lim: usize,
) -> Result<BigRational> {
    let mut total = BigRational::one();
    for x in 1..=m_lim {
        for y in 1..=n_lim {
            total *= vertex_weight_exact(params, vertex_config_at(h, VertexSite::new(x, y))?)?;
        }
    }
    Ok(total)
}

fn check_guard(m: usize, n: usize, guard: usize) -> Result<()> {
    if m * n > guard {
        return Err(Error::EnumerationGuard { mn: m * n, guard });
    }
    Ok(())
}

/// Depth-first walk over every step-boundary surface of the window,
/// calling `visit` with each completed surface and its probability.
fn enumerate_fold<F: FnMut(&HeightField, f64)>(
    params: &ModelParams,
    m: usize,
    n: usize,
    visit: &mut F,
) {
    let order = sweep_order(m, n);
    let mut h = HeightField::step(m, n);
    fn rec<F: FnMut(&HeightField, f64)>(
        params: &ModelParams,
        order: &[VertexSite],
        k: usize,
        h: &mut HeightField,
        prob: f64,
        visit: &mut F,
    ) {
        if k == order.len() {
            visit(h, prob);
            return;
        }
        let v = order[k];
        let i1 = h.get(v.sw()) - h.get(v.se());
        let j1 = h.get(v.nw()) - h.get(v.sw());
        let outcomes: &[(i64, f64)] = match (i1, j1) {
            (0, 0) => &[(0, 1.0)],
            (1, 1) => &[(1, 1.0)],
            (1, 0) => &[(1, params.b1), (0, 1.0 - params.b1)],
            (0, 1) => &[(0, params.b2), (1, 1.0 - params.b2)],
            _ => unreachable!(),
        };
        for &(i2, w) in outcomes {
            h.set(v.ne(), h.get(v.nw()) - i2);
            rec(params, order, k + 1, h, prob * w, visit);
        }
    }
    rec(params, &order, 0, &mut h, 1.0, visit);
}

/// Exact distribution over all step-boundary surfaces of the window.
/// Probabilities are positive and sum to 1 up to rounding.
pub fn enumerate_distribution(
    params: &ModelParams,
    m: usize,
    n: usize,
) -> Result<Vec<(HeightField, f64)>> {
    check_guard(m, n, ENUMERATION_GUARD)?;
    let mut out = Vec::new();
    enumerate_fold(params, m, n, &mut |h, p| out.push((h.clone(), p)));
    Ok(out)
}

/// Exact-rational distribution; probabilities sum to 1 exactly.
pub fn enumerate_distribution_exact(
    params: &ExactParams,
    m: usize,
    n: usize,
) -> Result<Vec<(HeightField, BigRational)>> {
    check_guard(m, n, EXACT_GUARD)?;
    let order = sweep_order(m, n);
    let mut h = HeightField::step(m, n);
    let mut out = Vec::new();
    fn rec(
        params: &ExactParams,
        order: &[VertexSite],
        k: usize,
        h: &mut HeightField,
        prob: BigRational,
        out: &mut Vec<(HeightField, BigRational)>,
    ) {
        if k == order.len() {
            out.push((h.clone(), prob));
            return;
        }
        let v = order[k];
        let i1 = h.get(v.sw()) - h.get(v.se());
        let j1 = h.get(v.nw()) - h.get(v.sw());
        let one = BigRational::one();
        let outcomes: Vec<(i64, BigRational)> = match (i1, j1) {
            (0, 0) => vec![(0, one)],
            (1, 1) => vec![(1, one)],
            (1, 0) => vec![(1, params.b1.clone()), (0, &one - &params.b1)],
            (0, 1) => vec![(0, params.b2.clone()), (1, &one - &params.b2)],
            _ => unreachable!(),
        };
        for (i2, w) in outcomes {
            h.set(v.ne(), h.get(v.nw()) - i2);
            rec(params, order, k + 1, h, &prob * w, out);
        }
    }
    rec(params, &order, 0, &mut h, BigRational::one(), &mut out);
    Ok(out)
}

/// The corner height observable: the value of `h` on the face
/// `(M - 1/2, N + 1/2)`, i.e. the number of paths entering the quadrant
/// `{x >= M, y <= N}`. Always in `[0, N]` for step-boundary surfaces.
pub fn height_observable(h: &HeightField, m: usize, n: usize) -> Result<i64> {
    let (wm, wn) = h.window();
    if m < 1 || m > wm || n > wn {
        return Err(Error::FaceOutOfWindow {
            i: m.wrapping_sub(1),
            j: n,
            m: wm,
            n: wn,
        });
    }
    Ok(h.get(Face::new(m - 1, n)))
}

/// Face carrying the observable at `(M, N)`.
pub fn observable_face(m: usize, n: usize) -> Face {
    Face::new(m - 1, n)
}

/// Exact law of the observable at the window corner: entry `r` is
/// `P(h(M, N) = r)` for `r = 0..=N`.
pub fn height_law(params: &ModelParams, m: usize, n: usize) -> Result<Vec<f64>> {
    check_guard(m, n, ENUMERATION_GUARD)?;
    let mut law = vec![0.0; n + 1];
    let face = observable_face(m, n);
    enumerate_fold(params, m, n, &mut |h, p| {
        law[h.get(face) as usize] += p;
    });
    Ok(law)
}

/// How a tail table is produced.
#[derive(Clone, Copy, Debug)]
pub enum TailMode {
    Exact,
    MonteCarlo { samples: usize },
}

/// Table of `P(h(M, N) >= r)` for `r = 0..=N`, exact or empirical.
#[derive(Clone, Debug)]
pub struct TailTable {
    pub m: usize,
    pub n: usize,
    pub prob: Vec<f64>,
    /// Binomial standard errors; zero in exact mode.
    pub stderr: Vec<f64>,
    pub exact: bool,
}

impl TailTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,prob,stderr\n");
        for r in 0..self.prob.len() {
            s.push_str(&format!("{},{},{}\n", r, self.prob[r], self.stderr[r]));
        }
        s
    }
}

/// Samples the corner observable over independent replica streams.
pub fn sample_observables(
    params: &ModelParams,
    m: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Vec<i64> {
    (0..samples as u64)
        .into_par_iter()
        .map(|replica| {
            let h = sample_height_stream(params, m, n, seed, replica);
            height_observable(&h, m, n).expect("corner is in the window")
        })
        .collect()
}

/// Builds the tail table of the corner observable.
pub fn tail_probability(
    params: &ModelParams,
    m: usize,
    n: usize,
    mode: TailMode,
    seed: u64,
) -> Result<TailTable> {
    match mode {
        TailMode::Exact => {
            let law = height_law(params, m, n)?;
            let mut prob = vec![0.0; n + 1];
            let mut acc = 0.0;
            for r in (0..=n).rev() {
                acc += law[r];
                prob[r] = acc;
            }
            Ok(TailTable {
                m,
                n,
                prob,
                stderr: vec![0.0; n + 1],
                exact: true,
            })
        }
        TailMode::MonteCarlo { samples } => {
            let obs = sample_observables(params, m, n, samples, seed);
            let mut counts = vec![0usize; n + 2];
            for &o in &obs {
                counts[o as usize] += 1;
            }
            let mut prob = vec![0.0; n + 1];
            let mut stderr = vec![0.0; n + 1];
            let mut acc = 0usize;
            for r in (0..=n).rev() {
                acc += counts[r];
                let p = acc as f64 / samples as f64;
                prob[r] = p;
                stderr[r] = (p * (1.0 - p) / samples as f64).sqrt();
            }
            Ok(TailTable {
                m,
                n,
                prob,
                stderr,
                exact: false,
            })
        }
    }
}

/// Outcome of checking the contraction weight inequality on one pair.
#[derive(Clone, Debug)]
pub struct WeightInequalityReport {
    /// `|boundary of the lifted disagreement region inside the window|`.
    pub boundary_size: usize,
    pub lhs_log: f64,
    pub rhs_log: f64,
    /// `rhs_log - lhs_log`; the inequality passes when this is above the
    /// rounding allowance.
    pub slack: f64,
    /// Whether per-vertex weight products match exactly off the boundary.
    pub off_boundary_products_equal: bool,
    pub pass: bool,
}

/// Rounding allowance for the log-space weight inequality.
pub const WEIGHT_SLACK_TOL: f64 = -1e-9;

/// Checks `w(h) w(h') <= C^{|∂R ∩ window|} w(ht) w(ht')` for the
/// contraction at `(p, k)`, and that the per-vertex products agree exactly
/// away from the boundary.
pub fn verify_weight_inequality(
    params: &ModelParams,
    h: &HeightField,
    hp: &HeightField,
    p: Face,
    k: i64,
) -> Result<WeightInequalityReport> {
    let (m, n) = h.window();
    let (ht, htp) = upsilon(h, hp, p, k)?;
    let region = region_neq(&h.shift(k), hp, p)?;
    let boundary: std::collections::BTreeSet<VertexSite> =
        crate::height::boundary(&region).into_iter().collect();
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    let mut off_equal = true;
    for x in 1..=m {
        for y in 1..=n {
            let v = VertexSite::new(x, y);
            let w1 = vertex_weight(params, vertex_config_at(h, v)?)?;
            let w2 = vertex_weight(params, vertex_config_at(hp, v)?)?;
            let w3 = vertex_weight(params, vertex_config_at(&ht, v)?)?;
            let w4 = vertex_weight(params, vertex_config_at(&htp, v)?)?;
            lhs += w1.ln() + w2.ln();
            rhs += w3.ln() + w4.ln();
            if !boundary.contains(&v) && w1 * w2 != w3 * w4 {
                off_equal = false;
            }
        }
    }
    let boundary_size = boundary.len();
    let rhs_log = rhs + boundary_size as f64 * params.weight_ratio_bound().ln();
    let slack = rhs_log - lhs;
    Ok(WeightInequalityReport {
        boundary_size,
        lhs_log: lhs,
        rhs_log,
        slack,
        off_boundary_products_equal: off_equal,
        pass: slack >= WEIGHT_SLACK_TOL && off_equal,
    })
}

/// Exhaustive check of the weak log-concavity inequalities on a window.
#[derive(Clone, Debug)]
pub struct LogConcavityReport {
    pub m: usize,
    pub n: usize,
    pub pairs_checked: usize,
    pub violations: usize,
    /// Smallest `log RHS - log LHS` over the density-form pairs.
    pub min_log_margin_density: f64,
    /// Smallest margin over the tail-form pairs.
    pub min_log_margin_tail: f64,
}

/// Verifies, over all `r, r'` in `{0..N}`, both
/// `P(h=r) P(h=r') <= C^{(MN)^{7/8}} P(|h - (r+r')/2| <= 4 (MN)^{2/5})^2`
/// and the tail form with its `N^2` prefactor, using the exact enumerator.
pub fn verify_log_concavity(
    params: &ModelParams,
    m: usize,
    n: usize,
) -> Result<LogConcavityReport> {
    let law = height_law(params, m, n)?;
    let mut tail = vec![0.0; n + 2];
    for r in (0..=n).rev() {
        tail[r] = tail[r + 1] + law[r];
    }
    let mn = (m * n) as f64;
    let log_c_term = mn.powf(7.0 / 8.0) * params.weight_ratio_bound().ln();
    let spread = 4.0 * mn.powf(2.0 / 5.0);
    let tail_at = |t: f64| -> f64 {
        if t <= 0.0 {
            1.0
        } else {
            let r = t.ceil() as usize;
            if r > n {
                0.0
            } else {
                tail[r]
            }
        }
    };
    let mut pairs = 0usize;
    let mut violations = 0usize;
    let mut min_density = f64::INFINITY;
    let mut min_tail = f64::INFINITY;
    for r in 0..=n {
        for rp in 0..=n {
            pairs += 1;
            let mid = (r + rp) as f64 / 2.0;
            // density form
            let lhs = law[r] * law[rp];
            let window_mass: f64 = (0..=n)
                .filter(|&s| (s as f64 - mid).abs() <= spread)
                .map(|s| law[s])
                .sum();
            let margin_d = log_c_term + 2.0 * window_mass.ln() - lhs.ln();
            if lhs > 0.0 {
                min_density = min_density.min(margin_d);
                if margin_d < WEIGHT_SLACK_TOL {
                    violations += 1;
                }
            }
            // tail form with the N^2 prefactor
            let lhs_t = tail[r] * tail[rp];
            let rhs_t = tail_at(mid - spread);
            let margin_t = 2.0 * (n as f64).ln() + log_c_term + 2.0 * rhs_t.ln() - lhs_t.ln();
            if lhs_t > 0.0 {
                min_tail = min_tail.min(margin_t);
                if margin_t < WEIGHT_SLACK_TOL {
                    violations += 1;
                }
            }
        }
    }
    Ok(LogConcavityReport {
        m,
        n,
        pairs_checked: pairs,
        violations,
        min_log_margin_density: min_density,
        min_log_margin_tail: min_tail,
    })
}

/// Minimal lift for an ordered pair, taking the window itself as the
/// vertex rectangle; forwards to [`crate::height::k_star`].
pub fn k_star_window(h: &HeightField, hp: &HeightField, p: Face) -> Result<i64> {
    let (m, n) = h.window();
    crate::height::k_star(h, hp, p, m, n)
}

/// Boundary size used by the weight inequality for a lifted pair.
pub fn lifted_boundary_size(h: &HeightField, hp: &HeightField, p: Face, k: i64) -> Result<usize> {
    let (m, n) = h.window();
    let region = region_neq(&h.shift(k), hp, p)?;
    Ok(boundary_count_in(&region, m, n))
}
