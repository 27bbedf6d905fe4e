//! Rate functions of the corner height and their transforms.
//!
//! Assembles the energy-based rate function
//! `F_α(y) = η_q (y^2 - 2y)/2 - α log(1-a) + log(a)/2 + C_α + F_{V_y}`
//! (with the `α < 1` case routed through the rescaling to `α^{-1}`),
//! detects where it straightens into the parabola
//! `η_q (y-1)^2/2 + α log((1-aq)/(1-a))`, and strips the Gaussian shift
//! by infimal deconvolution against `g(x) = η_q x^2/2` to produce the
//! lower-tail rate `Φ(s) = sup_y [F_α(y) - g(s-y)]`, finite on
//! `(-∞, 1]` and `+∞ beyond`.
//!
//! Grid functions carry a `+∞` sentinel with absorbing arithmetic in the
//! transforms.

use crate::error::{Error, Result};
use crate::potential::{equilibrium_energy_f, GridDensity, SolverOptions};
use crate::qseries::eta_q;

/// Parameters of the rate-function pipeline.
#[derive(Clone, Copy, Debug)]
pub struct RateParams {
    pub a: f64,
    pub q: f64,
    pub alpha: f64,
}

impl RateParams {
    pub fn new(a: f64, q: f64, alpha: f64) -> Result<Self> {
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
        if alpha <= 0.0 {
            return Err(Error::ParamRange {
                name: "alpha",
                value: alpha,
            });
        }
        Ok(RateParams { a, q, alpha })
    }

    pub fn eta_q(&self) -> f64 {
        eta_q(self.q)
    }

    /// Value of the rate function at the right endpoint `s = 1`:
    /// `α log((1-aq)/(1-a))`.
    pub fn phi_at_one(&self) -> f64 {
        self.alpha * ((1.0 - self.a * self.q) / (1.0 - self.a)).ln()
    }
}

/// The limit-shape constant: `1-α` in the low frozen phase, the curved
/// `(1-sqrt(aα))^2/(1-a)` on the liquid region `(a, 1/a)`, `0` beyond.
pub fn mu_alpha(a: f64, alpha: f64) -> f64 {
    if alpha <= a {
        1.0 - alpha
    } else if alpha < 1.0 / a {
        let r = 1.0 - (a * alpha).sqrt();
        r * r / (1.0 - a)
    } else {
        0.0
    }
}

/// `C_α = -((α-1)^2 log(α-1) - α^2 log α + 3α)/2` for `α >= 1`, with the
/// `0 log 0 = 0` convention at `α = 1`.
pub fn c_alpha(alpha: f64) -> Result<f64> {
    if alpha < 1.0 {
        return Err(Error::ParamRange {
            name: "alpha",
            value: alpha,
        });
    }
    let sq_log = |u: f64| if u <= 0.0 { 0.0 } else { u * u * u.ln() };
    Ok(-(sq_log(alpha - 1.0) - sq_log(alpha) + 3.0 * alpha) / 2.0)
}

/// `R(s) = η_q (s^2 - 2s)/2 - α log(1-a) + log(a)/2 + C_α`.
pub fn r_s(p: &RateParams, s: f64) -> Result<f64> {
    Ok(
        p.eta_q() * (s * s - 2.0 * s) / 2.0 - p.alpha * (1.0 - p.a).ln()
            + p.a.ln() / 2.0
            + c_alpha(p.alpha)?,
    )
}

/// The Gaussian-shift parabola `g(x) = η_q x^2 / 2`.
pub fn g_parabola(p: &RateParams, x: f64) -> f64 {
    p.eta_q() * x * x / 2.0
}

/// Sampled real function on a uniform grid; `f64::INFINITY` marks points
/// outside the effective domain.
#[derive(Clone, Debug)]
pub struct GridFunction {
    pub lo: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(lo: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if step <= 0.0 || values.is_empty() {
            return Err(Error::GridMismatch("need a positive step and data".into()));
        }
        Ok(GridFunction { lo, step, values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(lo: f64, step: f64, n: usize, f: F) -> Result<Self> {
        GridFunction::new(lo, step, (0..n).map(|i| f(lo + i as f64 * step)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }

    pub fn hi(&self) -> f64 {
        self.x(self.len() - 1)
    }

    /// Value at the nearest grid point.
    pub fn eval_nearest(&self, x: f64) -> f64 {
        let i = ((x - self.lo) / self.step).round();
        if i < 0.0 || i >= self.len() as f64 {
            f64::INFINITY
        } else {
            self.values[i as usize]
        }
    }

    /// Index of `x` when it lies on the grid.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let t = (x - self.lo) / self.step;
        let i = t.round();
        if (t - i).abs() > 1e-6 || i < 0.0 || i >= self.len() as f64 {
            None
        } else {
            Some(i as usize)
        }
    }

    fn offset_to(&self, other: &GridFunction) -> Result<i64> {
        if (self.step - other.step).abs() > 1e-12 * self.step {
            return Err(Error::GridMismatch(format!(
                "steps differ: {} vs {}",
                self.step, other.step
            )));
        }
        let t = other.lo / self.step;
        if (t - t.round()).abs() > 1e-6 {
            return Err(Error::GridMismatch(format!(
                "grid of the kernel is not aligned to multiples of the step: lo = {}",
                other.lo
            )));
        }
        Ok(t.round() as i64)
    }
}

/// `(f ⊕ g)(x) = min_y f(y) + g(x - y)` over the grids; the result lives
/// on `f`'s grid. `g` must share the step and sit on multiples of it.
pub fn inf_convolution(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    let m = f.offset_to(g)?;
    let values = (0..f.len())
        .map(|i| {
            let mut best = f64::INFINITY;
            for (j, &fj) in f.values.iter().enumerate() {
                if fj.is_infinite() {
                    continue;
                }
                let k = i as i64 - j as i64 - m;
                if k < 0 || k >= g.len() as i64 {
                    continue;
                }
                let gv = g.values[k as usize];
                if gv.is_infinite() {
                    continue;
                }
                best = best.min(fj + gv);
            }
            best
        })
        .collect();
    GridFunction::new(f.lo, f.step, values)
}

/// `(f ⊖ g)(x) = sup_y f(y) - g(x - y)`, the infimal deconvolution.
pub fn inf_deconvolution(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    let m = f.offset_to(g)?;
    let values = (0..f.len())
        .map(|i| {
            let mut best = f64::NEG_INFINITY;
            for (j, &fj) in f.values.iter().enumerate() {
                let k = i as i64 - j as i64 - m;
                if k < 0 || k >= g.len() as i64 {
                    continue;
                }
                let gv = g.values[k as usize];
                if gv.is_infinite() {
                    continue;
                }
                best = best.max(fj - gv);
            }
            best
        })
        .collect();
    GridFunction::new(f.lo, f.step, values)
}

/// Legendre transform `f*(p) = max_x p x - f(x)`, with `p` running over
/// the same grid.
pub fn legendre(f: &GridFunction) -> Result<GridFunction> {
    let values = (0..f.len())
        .map(|i| {
            let p = f.x(i);
            let mut best = f64::NEG_INFINITY;
            for (j, &fj) in f.values.iter().enumerate() {
                if fj.is_infinite() {
                    continue;
                }
                best = best.max(p * f.x(j) - fj);
            }
            best
        })
        .collect();
    GridFunction::new(f.lo, f.step, values)
}

/// Tuning of the rate-function tabulation.
#[derive(Clone, Debug)]
pub struct RateOptions {
    pub solver: SolverOptions,
    /// y grid for the energy rate function: `[y_lo, y_big + 2]`.
    pub y_lo: f64,
    pub y_step: f64,
    /// s grid for the deconvolved rate function.
    pub s_lo: f64,
    pub s_hi: f64,
    pub s_step: f64,
    /// Stabilization tolerance: `y_big` is the first probe with the
    /// parabola residual under twice this.
    pub stab_tol: f64,
}

impl Default for RateOptions {
    fn default() -> Self {
        RateOptions {
            solver: SolverOptions {
                n: 500,
                tol: 3e-4,
                max_iter: 60_000,
            },
            y_lo: -0.5,
            y_step: 0.02,
            s_lo: -0.5,
            s_hi: 1.5,
            s_step: 2e-3,
            stab_tol: 2.5e-3,
        }
    }
}

/// The assembled tables: the energy rate function on its y grid, the
/// detected stabilization point, and the deconvolved lower-tail rate.
#[derive(Clone, Debug)]
pub struct RateTables {
    pub params: RateParams,
    pub f: GridFunction,
    pub phi: GridFunction,
    pub y_big: f64,
}

/// `F_α(y)` at a single point (one equilibrium solve for finite `y`).
pub fn f_alpha(p: &RateParams, y: f64, solver: &SolverOptions) -> Result<f64> {
    let mut cache = SolveCache::new(p.a, p.q, p.alpha.max(1.0 / p.alpha).max(1.0), *solver);
    f_alpha_cached(p, y, &mut cache)
}

/// Sequential equilibrium solves with warm starts, keyed by increasing y.
struct SolveCache {
    a: f64,
    q: f64,
    /// The `α >= 1` value actually handed to the solver.
    alpha_star: f64,
    solver: SolverOptions,
    last: Option<GridDensity>,
}

impl SolveCache {
    fn new(a: f64, q: f64, alpha_star: f64, solver: SolverOptions) -> Self {
        SolveCache {
            a,
            q,
            alpha_star,
            solver,
            last: None,
        }
    }

    /// Equilibrium energy of `V_y` at `α* >= 1`.
    fn energy(&mut self, y: f64) -> Result<f64> {
        let rep = equilibrium_energy_f(
            self.a,
            self.q,
            self.alpha_star,
            y,
            &self.solver,
            self.last.as_ref(),
        )?;
        let energy = rep.energy;
        self.last = Some(rep.density);
        Ok(energy)
    }
}

fn f_alpha_cached(p: &RateParams, y: f64, cache: &mut SolveCache) -> Result<f64> {
    if p.alpha >= 1.0 {
        Ok(r_s(p, y)? + cache.energy(y)?)
    } else {
        f_alpha_small(p, y, cache)
    }
}

/// The `α < 1` route through the rescaling to `α^{-1}`.
fn f_alpha_small(p: &RateParams, y: f64, cache: &mut SolveCache) -> Result<f64> {
    let alpha = p.alpha;
    let eta = p.eta_q();
    let inv = 1.0 / alpha;
    // ∫_α^1 (y + x - 1)_+ dx in closed form
    let kink_integral = if y <= 0.0 {
        0.0
    } else if y < 1.0 - alpha {
        y * y / 2.0
    } else {
        (y - 1.0) * (1.0 - alpha) + (1.0 - alpha * alpha) / 2.0
    };
    let transformed = y * inv - inv + 1.0;
    Ok(
        eta * (y * y - 2.0 * y * alpha + 2.0 * alpha - 2.0 * alpha * alpha) / 2.0
            - eta * kink_integral
            - alpha * (1.0 - p.a).ln()
            + alpha * alpha * p.a.ln() / 2.0
            + alpha * alpha * c_alpha(inv)?
            + alpha * alpha * cache.energy(transformed)?,
    )
}

/// The large-y parabola `η_q (y-1)^2/2 + α log((1-aq)/(1-a))`.
pub fn f_parabola(p: &RateParams, y: f64) -> f64 {
    p.eta_q() * (y - 1.0) * (y - 1.0) / 2.0 + p.phi_at_one()
}

/// Tabulates `F_α` on `[y_lo, y_big + 2]`, detecting `y_big` by probing
/// the parabola residual, then deconvolves the parabola to produce
/// `Φ(s) = sup_y [F_α(y) - g(s-y)]` on the s grid. Beyond `y_big` the
/// tabulation short-circuits to the parabola.
pub fn tabulate_rate(p: &RateParams, opts: &RateOptions) -> Result<RateTables> {
    let alpha_star = if p.alpha >= 1.0 {
        p.alpha
    } else {
        1.0 / p.alpha
    };
    let mut cache = SolveCache::new(p.a, p.q, alpha_star, opts.solver);
    // probe upward for stabilization onto the parabola
    let mut y_big = f64::NAN;
    let mut probe = 1.0;
    let mut hits = 0;
    let mut probe_cache = SolveCache::new(p.a, p.q, alpha_star, opts.solver);
    while probe < 24.0 {
        let f = f_alpha_cached(p, probe, &mut probe_cache)?;
        if (f - f_parabola(p, probe)).abs() < 2.0 * opts.stab_tol {
            hits += 1;
            if hits == 1 {
                y_big = probe;
            }
            if hits >= 2 {
                break;
            }
        } else {
            hits = 0;
            y_big = f64::NAN;
        }
        probe += 0.5;
    }
    if y_big.is_nan() {
        return Err(Error::NoConvergence(
            "rate function never stabilized onto its parabola".into(),
        ));
    }
    // fine tabulation; solves only below y_big, parabola beyond
    let y_hi = y_big + 2.0;
    let n_y = ((y_hi - opts.y_lo) / opts.y_step).round() as usize + 1;
    let mut values = Vec::with_capacity(n_y);
    for i in 0..n_y {
        let y = opts.y_lo + i as f64 * opts.y_step;
        if y <= y_big {
            values.push(f_alpha_cached(p, y, &mut cache)?);
        } else {
            values.push(f_parabola(p, y));
        }
    }
    let f = GridFunction::new(opts.y_lo, opts.y_step, values)?;
    let phi = deconvolve_rate(p, &f, opts)?;
    Ok(RateTables {
        params: *p,
        f,
        phi,
        y_big,
    })
}

/// `Φ(s) = sup_y [F(y) - g(s - y)]` over the tabulated grid, `+∞` for
/// `s > 1`; errors when the sup is actively climbing at the top of the y
/// grid for an interior `s`.
pub fn deconvolve_rate(
    p: &RateParams,
    f: &GridFunction,
    opts: &RateOptions,
) -> Result<GridFunction> {
    let eta = p.eta_q();
    let n_s = ((opts.s_hi - opts.s_lo) / opts.s_step).round() as usize + 1;
    let mut values = Vec::with_capacity(n_s);
    for i in 0..n_s {
        let s = opts.s_lo + i as f64 * opts.s_step;
        if s > 1.0 + 1e-12 {
            values.push(f64::INFINITY);
            continue;
        }
        let mut best = f64::NEG_INFINITY;
        let mut best_j = 0;
        for (j, &fj) in f.values.iter().enumerate() {
            if fj.is_infinite() {
                continue;
            }
            let y = f.x(j);
            let v = fj - eta * (s - y) * (s - y) / 2.0;
            if v > best {
                best = v;
                best_j = j;
            }
        }
        if best_j + 1 == f.len() && s < 1.0 - 1e-9 {
            let edge_slope = f.values[f.len() - 1]
                - eta * (s - f.x(f.len() - 1)).powi(2) / 2.0
                - (f.values[f.len() - 2] - eta * (s - f.x(f.len() - 2)).powi(2) / 2.0);
            if edge_slope > 1e-7 {
                return Err(Error::ArgmaxAtEdge { s });
            }
        }
        values.push(best);
    }
    GridFunction::new(opts.s_lo, opts.s_step, values)
}

/// Shape report of the tabulated rate functions.
#[derive(Clone, Debug)]
pub struct RateReport {
    pub phi_at_one: f64,
    pub phi_at_one_target: f64,
    pub phi_at_mu: f64,
    pub mu: f64,
    /// Violations of discrete convexity of Φ on `[μ_α, 1]` beyond the
    /// grid tolerance.
    pub convexity_violations: usize,
    pub monotonicity_violations: usize,
    /// Largest `|F(y) - parabola(y)|` over the requested window.
    pub parabola_residual: f64,
    /// Largest increment of the discrete derivative of F beyond
    /// `(η_q + slack) Δy`.
    pub lipschitz_excess: f64,
    /// `sup |(g ⊕ Φ) - F|` over the y grid where the reconstruction is
    /// determined.
    pub roundtrip_sup: f64,
}

/// Per-point energy noise to allow for in the shape checks; the solver
/// certificate tolerance is the right scale.
fn opts_noise(_tables: &RateTables) -> f64 {
    3e-4
}

/// Verifies the convexity/monotonicity/Lipschitz/parabola/round-trip
/// properties of the tabulated pair.
pub fn rate_properties_report(tables: &RateTables, parabola_window: (f64, f64)) -> RateReport {
    let p = &tables.params;
    let eta = p.eta_q();
    let phi = &tables.phi;
    let f = &tables.f;
    let mu = mu_alpha(p.a, p.alpha);
    let phi_at_one = phi.eval_nearest(1.0);
    let phi_at_mu = phi.eval_nearest(mu);
    // discrete convexity and monotonicity of Φ on [μ, 1]; the solver
    // noise carried into the sup allows decreases up to ~1e-4
    let grid_tol = 1e-9 + eta * phi.step * phi.step;
    let monotone_tol = grid_tol + opts_noise(tables) / 3.0;
    let mut convexity_violations = 0;
    let mut monotonicity_violations = 0;
    for i in 1..phi.len().saturating_sub(1) {
        let x = phi.x(i);
        if x < mu || phi.x(i + 1) > 1.0 {
            continue;
        }
        let (a, b, c) = (phi.values[i - 1], phi.values[i], phi.values[i + 1]);
        if a.is_finite() && b.is_finite() && c.is_finite() {
            if c - 2.0 * b + a < -grid_tol {
                convexity_violations += 1;
            }
            if c < b - monotone_tol {
                monotonicity_violations += 1;
            }
        }
    }
    // parabola residual of F over the requested window
    let mut parabola_residual = 0.0f64;
    for j in 0..f.len() {
        let y = f.x(j);
        if y >= parabola_window.0 && y <= parabola_window.1 && y <= tables.y_big {
            parabola_residual = parabola_residual.max((f.values[j] - f_parabola(p, y)).abs());
        }
    }
    // derivative increments of F bounded by (η_q + 10% slack) Δy, with an
    // allowance for solver noise on the four stencil values; stencils
    // straddling the solver/parabola splice at y_big are excluded
    let mut lipschitz_excess = 0.0f64;
    let noise = 4.0 * opts_noise(tables);
    for j in 2..f.len() {
        if f.x(j) > tables.y_big - f.step && f.x(j - 2) < tables.y_big + f.step {
            continue;
        }
        let d1 = (f.values[j - 1] - f.values[j - 2]) / f.step;
        let d2 = (f.values[j] - f.values[j - 1]) / f.step;
        let allowed = 1.1 * eta * f.step + noise / f.step;
        lipschitz_excess = lipschitz_excess.max(((d2 - d1).abs() - allowed).max(0.0));
    }
    // round trip g ⊕ Φ = F on the y grid
    let mut roundtrip_sup = 0.0f64;
    for j in 0..f.len() {
        let y = f.x(j);
        let mut best = f64::INFINITY;
        for i in 0..phi.len() {
            let s = phi.x(i);
            let pv = phi.values[i];
            if pv.is_infinite() {
                continue;
            }
            best = best.min(pv + eta * (y - s) * (y - s) / 2.0);
        }
        if best.is_finite() && f.values[j].is_finite() {
            roundtrip_sup = roundtrip_sup.max((best - f.values[j]).abs());
        }
    }
    RateReport {
        phi_at_one,
        phi_at_one_target: p.phi_at_one(),
        phi_at_mu,
        mu,
        convexity_violations,
        monotonicity_violations,
        parabola_residual,
        lipschitz_excess,
        roundtrip_sup,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_alpha_branches_and_continuity() {
        assert!((mu_alpha(0.5, 0.25) - 0.75).abs() < 1e-15);
        assert!((mu_alpha(0.5, 1.0) - (3.0 - 2.0 * 2.0f64.sqrt())).abs() < 1e-12);
        assert_eq!(mu_alpha(0.5, 3.0), 0.0);
        // continuity at both junctions
        let a = 0.4;
        assert!((mu_alpha(a, a - 1e-9) - mu_alpha(a, a + 1e-9)).abs() < 1e-6);
        assert!((mu_alpha(a, 1.0 / a - 1e-9) - mu_alpha(a, 1.0 / a + 1e-9)).abs() < 1e-6);
    }

    #[test]
    fn c_alpha_values() {
        assert!((c_alpha(1.0).unwrap() + 1.5).abs() < 1e-15);
        let c2 = c_alpha(2.0).unwrap();
        assert!(
            (c2 - (-(6.0 - 4.0 * 2.0f64.ln()) / 2.0)).abs() < 1e-12,
            "{c2}"
        );
        // the general formula tends to -3/2 as α drops to 1
        assert!((c_alpha(1.0 + 1e-8).unwrap() + 1.5).abs() < 1e-6);
        assert!(c_alpha(0.5).is_err());
    }

    #[test]
    fn r_s_reference_and_quadratic_shape() {
        let p = RateParams::new(0.5, 0.5, 1.0).unwrap();
        let r0 = r_s(&p, 0.0).unwrap();
        assert!((r0 - (-1.1534264097200273)).abs() < 1e-12, "{r0}");
        // quadratic in s with leading coefficient η_q/2
        let (r1, r2, r3) = (
            r_s(&p, 1.0).unwrap(),
            r_s(&p, 2.0).unwrap(),
            r_s(&p, 3.0).unwrap(),
        );
        let second_diff = r3 - 2.0 * r2 + r1;
        assert!((second_diff - p.eta_q()).abs() < 1e-12);
    }

    #[test]
    fn parabola_basics() {
        let p = RateParams::new(0.5, 0.5, 1.0).unwrap();
        assert_eq!(g_parabola(&p, 0.0), 0.0);
        assert!((g_parabola(&p, 1.0) - 0.5f64.ln().abs() / 2.0).abs() < 1e-15);
        assert_eq!(g_parabola(&p, -2.0), g_parabola(&p, 2.0));
        // reference endpoint value at y = 4: 0.693147 * 4.5 + log(1.5)
        let v = f_parabola(&p, 4.0);
        assert!((v - 3.524628).abs() < 1e-5);
    }

    #[test]
    fn grid_transforms_on_parabolas() {
        let p = RateParams::new(0.5, 0.5, 1.0).unwrap();
        let eta = p.eta_q();
        let g = GridFunction::from_fn(-6.0, 0.01, 1201, |x| eta * x * x / 2.0).unwrap();
        // g ⊕ g = η s^2 / 4
        let conv = inf_convolution(&g, &g).unwrap();
        for i in (0..conv.len()).step_by(40) {
            let x = conv.x(i);
            if x.abs() > 2.5 {
                continue; // truncation of the min near the grid edge
            }
            assert!(
                (conv.values[i] - eta * x * x / 4.0).abs() < 1e-4,
                "x = {x}: {} vs {}",
                conv.values[i],
                eta * x * x / 4.0
            );
        }
        // legendre of x^2/2 is p^2/2
        let h = GridFunction::from_fn(-4.0, 0.01, 801, |x| x * x / 2.0).unwrap();
        let star = legendre(&h).unwrap();
        for i in (0..star.len()).step_by(25) {
            let x = star.x(i);
            if x.abs() > 3.0 {
                continue;
            }
            assert!((star.values[i] - x * x / 2.0).abs() < 1e-3);
        }
    }

    #[test]
    fn indicator_round_trip() {
        let p = RateParams::new(0.5, 0.5, 1.0).unwrap();
        let eta = p.eta_q();
        let g = GridFunction::from_fn(-4.0, 0.01, 801, |x| eta * x * x / 2.0).unwrap();
        let f = GridFunction::from_fn(-2.0, 0.01, 401, |x| {
            if x <= 1e-12 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .unwrap();
        let smoothed = inf_convolution(&f, &g).unwrap();
        let back = inf_deconvolution(&smoothed, &g).unwrap();
        for i in 0..back.len() {
            let x = back.x(i);
            if x <= -1e-9 && x > -1.5 {
                assert!(back.values[i].abs() < 1e-9, "x = {x}: {}", back.values[i]);
            }
            if x > 0.3 && x < 1.5 {
                // climbs toward the grid-range cap on the positive side,
                // far above the smoothed profile it came from
                assert!(
                    back.values[i] > smoothed.values[i] + 0.25,
                    "x = {x}: {} vs smoothed {}",
                    back.values[i],
                    smoothed.values[i]
                );
            }
        }
    }

    #[test]
    fn transforms_reject_misaligned_grids() {
        let f = GridFunction::from_fn(0.0, 0.01, 100, |x| x).unwrap();
        let g_bad_step = GridFunction::from_fn(0.0, 0.02, 100, |x| x).unwrap();
        assert!(inf_convolution(&f, &g_bad_step).is_err());
        let g_bad_lo = GridFunction::from_fn(0.005, 0.01, 100, |x| x).unwrap();
        assert!(inf_deconvolution(&f, &g_bad_lo).is_err());
    }

    #[test]
    fn f_alpha_definitions_agree_at_alpha_one() {
        // the α < 1 route evaluated at α = 1 collapses term by term onto
        // the α >= 1 definition
        let p = RateParams::new(0.5, 0.5, 1.0).unwrap();
        let solver = SolverOptions {
            n: 300,
            tol: 1e-3,
            max_iter: 30_000,
        };
        for y in [0.5, 1.0, 2.0] {
            let big = f_alpha(&p, y, &solver).unwrap();
            let mut cache = SolveCache::new(p.a, p.q, 1.0, solver);
            let small = f_alpha_small(&p, y, &mut cache).unwrap();
            assert!((big - small).abs() < 2e-3, "y = {y}: {big} vs {small}");
        }
    }

    #[test]
    fn f_alpha_vanishes_below_mu_and_follows_parabola_far_out() {
        let p = RateParams::new(0.5, 0.5, 1.0).unwrap();
        let solver = SolverOptions {
            n: 500,
            tol: 3e-4,
            max_iter: 60_000,
        };
        let mu = mu_alpha(0.5, 1.0);
        for y in [0.0, mu - 0.05] {
            let f = f_alpha(&p, y, &solver).unwrap();
            assert!(f.abs() < 5e-3, "y = {y}: {f}");
        }
        let f4 = f_alpha(&p, 4.0, &solver).unwrap();
        assert!((f4 - f_parabola(&p, 4.0)).abs() < 5e-3, "{f4}");
    }
}
