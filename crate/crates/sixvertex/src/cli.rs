//! Command-line front end.
//!
//! Long-form flags only; an optional flat `key=value` config file is read
//! first and individual flags override it. All randomness flows from a
//! single `--seed`. Subcommands:
//!
//! - `sample`      height field CSV (`i,j,h`)
//! - `tail`        tail table CSV (`r,prob,stderr`), exact or Monte Carlo
//! - `moment-match` JSON `{M, N, zeta, lhs, rhs, gap, trunc_bound}`
//! - `equilibrium` density CSV (`x,phi_solver,phi_closed`) + JSON energy report
//! - `rate`        rate CSV (`s,F,Phi,parabola_gap`) + JSON endpoints
//! - `verify`      pass/fail JSON for a named suite; nonzero exit on failure

use std::fs;
use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::height::{k_star, upsilon};
use crate::model::{
    self, sample_height, sample_height_stream, tail_probability, verify_log_concavity,
    verify_weight_inequality, ModelParams, TailMode,
};
use crate::potential::{
    self, equilibrium_energy_f, integral_identity, log_potential_u, log_potential_u_quadrature,
    phi_closed_form, potential_integral_closed, potential_integral_quadrature,
    variational_constant, Field, IntegralKind, SolverOptions,
};
use crate::qseries::{QTruncation, ShiftDistributions};
use crate::rate::{f_parabola, rate_properties_report, tabulate_rate, RateOptions, RateParams};
use crate::schur::moment_match_gap;

/// Resolved configuration shared by all subcommands.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub a: f64,
    pub q: f64,
    pub alpha: f64,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
    pub zeta: f64,
    pub max_part: u32,
    pub grid_n: usize,
    pub tol: f64,
    pub y: f64,
    pub pairs: usize,
    pub mode: String,
    pub format: String,
    pub suite: String,
    pub threads: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            a: 0.5,
            q: 0.5,
            alpha: 1.0,
            m: 3,
            n: 3,
            seed: 42,
            samples: 10_000,
            zeta: 1.0,
            max_part: 60,
            grid_n: 800,
            tol: 1e-4,
            y: f64::INFINITY,
            pairs: 10_000,
            mode: "exact".into(),
            format: "csv".into(),
            suite: "all".into(),
            threads: 0,
            out: None,
        }
    }
}

impl RunConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |k: &str, v: &str| Error::Config(format!("invalid value for {k}: {v}"));
        match key {
            "a" => self.a = value.parse().map_err(|_| bad(key, value))?,
            "q" => self.q = value.parse().map_err(|_| bad(key, value))?,
            "alpha" => self.alpha = value.parse().map_err(|_| bad(key, value))?,
            "M" | "m" => self.m = value.parse().map_err(|_| bad(key, value))?,
            "N" | "n" => self.n = value.parse().map_err(|_| bad(key, value))?,
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value))?,
            "samples" => self.samples = value.parse().map_err(|_| bad(key, value))?,
            "zeta" => self.zeta = value.parse().map_err(|_| bad(key, value))?,
            "max-part" => self.max_part = value.parse().map_err(|_| bad(key, value))?,
            "grid-n" => self.grid_n = value.parse().map_err(|_| bad(key, value))?,
            "tol" => self.tol = value.parse().map_err(|_| bad(key, value))?,
            "y" => {
                self.y = if value == "inf" {
                    f64::INFINITY
                } else {
                    value.parse().map_err(|_| bad(key, value))?
                }
            }
            "pairs" => self.pairs = value.parse().map_err(|_| bad(key, value))?,
            "mode" => self.mode = value.into(),
            "format" => self.format = value.into(),
            "suite" => self.suite = value.into(),
            "threads" => self.threads = value.parse().map_err(|_| bad(key, value))?,
            "out" => self.out = Some(PathBuf::from(value)),
            "config" => {}
            _ => return Err(Error::Config(format!("unknown option --{key}"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(Error::ParamRange {
                name: "a",
                value: self.a,
            });
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::ParamRange {
                name: "q",
                value: self.q,
            });
        }
        if self.alpha <= 0.0 {
            return Err(Error::ParamRange {
                name: "alpha",
                value: self.alpha,
            });
        }
        if self.m < 1 || self.n < 1 {
            return Err(Error::Config("M and N must be at least 1".into()));
        }
        if !matches!(self.mode.as_str(), "exact" | "mc") {
            return Err(Error::Config(format!(
                "mode must be exact or mc, got {}",
                self.mode
            )));
        }
        if !matches!(self.format.as_str(), "csv" | "json") {
            return Err(Error::Config(format!(
                "format must be csv or json, got {}",
                self.format
            )));
        }
        Ok(())
    }

    fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.a, self.q)
    }
}

/// Parses `--key value` flags after the subcommand; `--config FILE` loads
/// flat `key=value` lines first, with flags taking precedence.
pub fn parse_config(args: &[String]) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    // first pass: config file only
    let mut i = 0;
    while i < args.len() {
        if args[i] == "--config" {
            let path = args
                .get(i + 1)
                .ok_or_else(|| Error::Config("--config needs a file".into()))?;
            let text = fs::read_to_string(path)?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| Error::Csv {
                    line: lineno + 1,
                    msg: format!("expected key=value, got {line}"),
                })?;
                cfg.set(k.trim(), v.trim())?;
            }
        }
        i += 1;
    }
    // second pass: flags override
    let mut i = 0;
    while i < args.len() {
        let arg = &args[i];
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| Error::Config(format!("expected --flag, got {arg}")))?;
        let value = args
            .get(i + 1)
            .ok_or_else(|| Error::Config(format!("--{key} needs a value")))?;
        cfg.set(key, value)?;
        i += 2;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// One named check inside a suite report.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn abs_check(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            pass: value.abs() <= tolerance,
            value,
            tolerance,
            detail: detail.into(),
        }
    }

    fn count_check(name: &str, count: usize, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            pass: count == 0,
            value: count as f64,
            tolerance: 0.0,
            detail: detail.into(),
        }
    }
}

/// Suite output in the `{config, results[], pass}` shape.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub config: RunConfig,
    pub results: Vec<CheckResult>,
    pub pass: bool,
}

impl SuiteReport {
    fn new(config: &RunConfig, results: Vec<CheckResult>) -> Self {
        let pass = results.iter().all(|r| r.pass);
        SuiteReport {
            config: config.clone(),
            results,
            pass,
        }
    }
}

pub fn cmd_sample(cfg: &RunConfig) -> Result<i32> {
    let h = sample_height(&cfg.params()?, cfg.m, cfg.n, cfg.seed);
    write_or_print(&cfg.out, &h.to_csv())?;
    Ok(0)
}

pub fn cmd_tail(cfg: &RunConfig) -> Result<i32> {
    let mode = match cfg.mode.as_str() {
        "exact" => TailMode::Exact,
        _ => TailMode::MonteCarlo {
            samples: cfg.samples,
        },
    };
    let table = tail_probability(&cfg.params()?, cfg.m, cfg.n, mode, cfg.seed)?;
    write_or_print(&cfg.out, &table.to_csv())?;
    Ok(0)
}

#[derive(Serialize)]
struct MomentMatchJson {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    zeta: f64,
    lhs: f64,
    rhs: f64,
    gap: f64,
    trunc_bound: f64,
}

pub fn cmd_moment_match(cfg: &RunConfig) -> Result<i32> {
    let rep = moment_match_gap(&cfg.params()?, cfg.m, cfg.n, cfg.zeta, cfg.max_part)?;
    let json = MomentMatchJson {
        m: rep.m,
        n: rep.n,
        zeta: rep.zeta,
        lhs: rep.lhs,
        rhs: rep.rhs,
        gap: rep.gap,
        trunc_bound: rep.trunc_bound,
    };
    write_or_print(
        &cfg.out,
        &format!("{}\n", serde_json::to_string_pretty(&json)?),
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct EquilibriumJson {
    config: RunConfig,
    energy: f64,
    closed_form_energy: Option<f64>,
    lagrange_constant: f64,
    bulk_residual: f64,
    low_violation: f64,
    high_violation: f64,
    iterations: usize,
    support_edges: (f64, f64),
}

pub fn cmd_equilibrium(cfg: &RunConfig) -> Result<i32> {
    if cfg.alpha < 1.0 {
        return Err(Error::ParamRange {
            name: "alpha",
            value: cfg.alpha,
        });
    }
    let opts = SolverOptions {
        n: cfg.grid_n,
        tol: cfg.tol,
        max_iter: 200_000,
    };
    let rep = equilibrium_energy_f(cfg.a, cfg.q, cfg.alpha, cfg.y, &opts, None)?;
    let cf = phi_closed_form(cfg.a, cfg.q, cfg.alpha)?;
    let mut csv = String::from("x,phi_solver,phi_closed\n");
    for i in 0..rep.density.n() {
        let x = rep.density.center(i);
        csv.push_str(&format!("{},{},{}\n", x, rep.density.values[i], cf.eval(x)));
    }
    let json = EquilibriumJson {
        config: cfg.clone(),
        energy: rep.energy,
        closed_form_energy: if cfg.y.is_infinite() {
            Some(potential::f_inf_closed_form(cfg.a, cfg.q, cfg.alpha)?)
        } else {
            None
        },
        lagrange_constant: rep.lagrange_constant,
        bulk_residual: rep.bulk_residual,
        low_violation: rep.low_violation,
        high_violation: rep.high_violation,
        iterations: rep.iterations,
        support_edges: rep.support_edges(),
    };
    let json_text = format!("{}\n", serde_json::to_string_pretty(&json)?);
    if cfg.out.is_some() {
        write_or_print(&cfg.out, &csv)?;
        print!("{json_text}");
    } else if cfg.format == "json" {
        print!("{json_text}");
    } else {
        print!("{csv}");
    }
    Ok(0)
}

#[derive(Serialize)]
struct RateJson {
    config: RunConfig,
    phi_at_1: f64,
    phi_at_1_target: f64,
    phi_at_mu: f64,
    mu: f64,
    y_big: f64,
    parabola_residual: f64,
    roundtrip_sup: f64,
    convexity_violations: usize,
    monotonicity_violations: usize,
}

pub fn cmd_rate(cfg: &RunConfig) -> Result<i32> {
    let p = RateParams::new(cfg.a, cfg.q, cfg.alpha)?;
    let opts = RateOptions::default();
    let tables = tabulate_rate(&p, &opts)?;
    let report = rate_properties_report(&tables, (tables.y_big, tables.y_big + 2.0));
    let mut csv = String::from("s,F,Phi,parabola_gap\n");
    for i in 0..tables.phi.len() {
        let s = tables.phi.x(i);
        let f_here = tables.f.eval_nearest(s);
        let gap = if f_here.is_finite() {
            f_here - f_parabola(&p, s)
        } else {
            f64::NAN
        };
        csv.push_str(&format!(
            "{},{},{},{}\n",
            s, f_here, tables.phi.values[i], gap
        ));
    }
    let json = RateJson {
        config: cfg.clone(),
        phi_at_1: report.phi_at_one,
        phi_at_1_target: report.phi_at_one_target,
        phi_at_mu: report.phi_at_mu,
        mu: report.mu,
        y_big: tables.y_big,
        parabola_residual: report.parabola_residual,
        roundtrip_sup: report.roundtrip_sup,
        convexity_violations: report.convexity_violations,
        monotonicity_violations: report.monotonicity_violations,
    };
    let json_text = format!("{}\n", serde_json::to_string_pretty(&json)?);
    if cfg.out.is_some() {
        write_or_print(&cfg.out, &csv)?;
        print!("{json_text}");
    } else if cfg.format == "json" {
        print!("{json_text}");
    } else {
        print!("{csv}");
    }
    Ok(0)
}

/// The q-identity suite: the two-way CDF identity, telescoping chi mass,
/// and truncation-stable normalizer.
pub fn suite_qidentities(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let q = cfg.q;
    let d = ShiftDistributions::new(q, QTruncation::default())?;
    let mut results = Vec::new();
    let mut worst = 0.0f64;
    for n in -5..=10i64 {
        let gap = (d.cdf_shift_convolved(n) - d.cdf_shift_closed(n)?).abs();
        worst = worst.max(gap);
    }
    results.push(CheckResult::abs_check(
        "cdf_identity_two_ways",
        worst,
        1e-10,
        "max |convolved - closed| over n in -5..=10",
    ));
    let chi_mass: f64 = (0..=d.chi_support_max()).map(|k| d.pmf_chi(k)).sum();
    results.push(CheckResult::abs_check(
        "chi_mass_telescopes",
        chi_mass - 1.0,
        d.tail_tol(),
        "truncated q-geometric mass vs 1",
    ));
    let tight = ShiftDistributions::new(
        q,
        QTruncation {
            max_terms: 200_000,
            tail_tol: 1e-28,
        },
    )?;
    results.push(CheckResult::abs_check(
        "normalizer_truncation_stable",
        d.z_s - tight.z_s,
        1e-12,
        format!("Z_S = {}", d.z_s),
    ));
    Ok(results)
}

/// The appendix suite: every closed form against adaptive quadrature.
pub fn suite_appendix(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let mut results = Vec::new();
    let tol = 1e-6;
    // six integral identities
    let cases = [
        ("integral_J_1", IntegralKind::J, 0.0, 0.0, 1.0, 1.0, 1),
        ("integral_J_2", IntegralKind::J, 0.0, 0.0, 1.0, 1.0, 2),
        (
            "integral_I_minus_1",
            IntegralKind::IMinus,
            1.3,
            0.7,
            1.1,
            0.9,
            1,
        ),
        (
            "integral_I_plus_1",
            IntegralKind::IPlus,
            1.3,
            0.7,
            1.1,
            0.9,
            1,
        ),
        (
            "integral_I_minus_2",
            IntegralKind::IMinus,
            1.2,
            0.8,
            1.0,
            1.0,
            2,
        ),
        (
            "integral_I_plus_2",
            IntegralKind::IPlus,
            1.2,
            0.8,
            1.0,
            1.0,
            2,
        ),
    ];
    for (name, kind, a, b, c, d, n) in cases {
        let (closed, residual) = integral_identity(kind, a, b, c, d, n, 1e-10)?;
        results.push(CheckResult::abs_check(
            name,
            residual,
            tol,
            format!("closed = {closed}"),
        ));
    }
    // U(y) on both branches, both saturation regimes
    for (tag, a, q, alpha) in [
        ("sat", cfg.a, cfg.q, cfg.alpha.max(1.0)),
        ("unsat", 0.9, 0.9, 2.0),
    ] {
        let cf = phi_closed_form(a, q, alpha)?;
        for (branch, y) in [("outside", cf.d + 2.0), ("bulk", 0.5 * (cf.c + cf.d))] {
            let gap = log_potential_u(a, q, alpha, y)?
                - log_potential_u_quadrature(a, q, alpha, y, 1e-9)?;
            results.push(CheckResult::abs_check(
                &format!("log_potential_{tag}_{branch}"),
                gap,
                tol,
                format!("y = {y}"),
            ));
        }
        // field integral on this branch
        let gap = potential_integral_closed(a, q, alpha)?
            - potential_integral_quadrature(a, q, alpha, 1e-9)?;
        results.push(CheckResult::abs_check(
            &format!("potential_integral_{tag}"),
            gap,
            tol,
            "∫ V φ closed vs quadrature",
        ));
    }
    // variational constant at the reference point, against quadrature
    let (a, q, alpha) = (0.5, 0.5, 1.0);
    let cf = phi_closed_form(a, q, alpha)?;
    let field = Field::VInf { a, q, alpha };
    let y_mid = 0.5 * (cf.c + cf.d);
    let quad_field =
        quadcheck::full_potential_by_quadrature(&cf, y_mid, 1e-9) + 0.5 * field.eval(y_mid);
    let v_const = variational_constant(a, q, alpha);
    results.push(CheckResult::abs_check(
        "variational_constant",
        quad_field - v_const,
        tol,
        format!("level = {v_const}"),
    ));
    results.push(CheckResult::abs_check(
        "variational_constant_reference",
        v_const - 1.4054651081081644,
        1e-9,
        "closed-form value at a = q = 1/2, alpha = 1",
    ));
    Ok(results)
}

mod quadcheck {
    use crate::potential::ClosedFormDensity;

    /// `-∫_0^d log|x-y| φ(x) dx` by quadrature, plateau included.
    pub fn full_potential_by_quadrature(cf: &ClosedFormDensity, y: f64, tol: f64) -> f64 {
        crate::quad::integrate_split(
            &|x: f64| {
                if x == y {
                    0.0
                } else {
                    -(x - y).abs().ln() * cf.eval(x)
                }
            },
            0.0,
            cf.d,
            &[cf.c, y],
            tol,
        )
    }
}

/// The log-concavity suite: exhaustive pairs on the enumerable windows.
pub fn suite_logconcavity(_cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let mut results = Vec::new();
    for (a, q) in [(0.5, 0.5), (0.3, 0.7)] {
        for (m, n) in [(4usize, 4usize), (5, 5)] {
            let params = ModelParams::new(a, q)?;
            let rep = verify_log_concavity(&params, m, n)?;
            results.push(CheckResult::count_check(
                &format!("log_concavity_a{a}_q{q}_{m}x{n}"),
                rep.violations,
                format!(
                    "margins: density {:.3}, tail {:.3}",
                    rep.min_log_margin_density, rep.min_log_margin_tail
                ),
            ));
        }
    }
    Ok(results)
}

/// The injection suite: contraction bijectivity, shrinkage, boundary
/// preservation, lift bounds and the weight inequality on random step
/// pairs.
pub fn suite_injection(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let params = cfg.params()?;
    let (m, n) = (9usize, 9usize);
    let face = model::observable_face(m, n);
    let mn = (m * n) as f64;
    let k_slack = mn.powf(2.0 / 5.0);
    let mut round_trip_failures = 0usize;
    let mut shrinkage_failures = 0usize;
    let mut boundary_failures = 0usize;
    let mut k_bound_failures = 0usize;
    let mut weight_failures = 0usize;
    let mut contracted_pairs = 0usize;
    for idx in 0..cfg.pairs as u64 {
        let h1 = sample_height_stream(&params, m, n, cfg.seed, 2 * idx);
        let h2 = sample_height_stream(&params, m, n, cfg.seed, 2 * idx + 1);
        let (lo, hi) = if h1.get(face) <= h2.get(face) {
            (h1, h2)
        } else {
            (h2, h1)
        };
        let (r, rp) = (lo.get(face), hi.get(face));
        let k = if r == rp {
            1
        } else {
            let ks = k_star(&lo, &hi, face, m, n)?;
            let floor = (rp - r + 1) / 2;
            if !(ks >= floor && (ks as f64) <= floor as f64 + k_slack) {
                k_bound_failures += 1;
            }
            contracted_pairs += 1;
            ks
        };
        let (t1, t2) = upsilon(&lo, &hi, face, k)?;
        let (b1, b2) = upsilon(&t1, &t2, face, k)?;
        if b1 != lo || b2 != hi {
            round_trip_failures += 1;
        }
        if rp >= r + k && (t1.get(face) != rp - k || t2.get(face) != r + k) {
            shrinkage_failures += 1;
        }
        if k <= rp - r && !(t1.is_step_boundary() && t2.is_step_boundary()) {
            boundary_failures += 1;
        }
        let wrep = verify_weight_inequality(&params, &lo, &hi, face, k)?;
        if !wrep.pass {
            weight_failures += 1;
        }
    }
    Ok(vec![
        CheckResult::count_check(
            "contraction_round_trip",
            round_trip_failures,
            format!(
                "{} pairs, {} with distinct corner values",
                cfg.pairs, contracted_pairs
            ),
        ),
        CheckResult::count_check("contraction_shrinkage", shrinkage_failures, ""),
        CheckResult::count_check("step_boundary_preserved", boundary_failures, ""),
        CheckResult::count_check("k_star_bounds", k_bound_failures, ""),
        CheckResult::count_check("weight_inequality", weight_failures, ""),
    ])
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let mut results = Vec::new();
    let suites: Vec<&str> = match cfg.suite.as_str() {
        "all" => vec!["injection", "logconcavity", "qidentities", "appendix"],
        s => vec![s],
    };
    for suite in suites {
        let mut part = match suite {
            "injection" => suite_injection(cfg)?,
            "logconcavity" => suite_logconcavity(cfg)?,
            "qidentities" => suite_qidentities(cfg)?,
            "appendix" => suite_appendix(cfg)?,
            other => return Err(Error::Config(format!("unknown suite {other}"))),
        };
        results.append(&mut part);
    }
    let report = SuiteReport::new(cfg, results);
    let code = if report.pass { 0 } else { 1 };
    write_or_print(
        &cfg.out,
        &format!("{}\n", serde_json::to_string_pretty(&report)?),
    )?;
    Ok(code)
}

const USAGE: &str = "usage: sixvertex <command> [--flag value]...

commands:
  sample        emit one sampled height field as CSV (i,j,h)
  tail          emit the tail table P(h(M,N) >= r) as CSV (r,prob,stderr)
  moment-match  emit the moment-matching report as JSON
  equilibrium   solve the constrained equilibrium measure; CSV + JSON
  rate          tabulate the rate functions; CSV + JSON endpoints
  verify        run a verification suite (injection | logconcavity |
                qidentities | appendix | all); nonzero exit on failure

common flags (long form only):
  --a --q --alpha     model parameters
  --M --N             window extents
  --seed              RNG seed (all randomness derives from it)
  --samples           Monte Carlo sample count (tail --mode mc)
  --mode              exact | mc (tail)
  --zeta              q-Laplace argument (moment-match)
  --max-part          partition truncation (moment-match)
  --grid-n --tol --y  equilibrium solver controls
  --pairs             injection suite pair count
  --suite             verify suite name
  --format            csv | json (when a command emits both)
  --out               write the primary output to a file
  --threads           cap worker threads (0 = all cores)
  --config FILE       flat key=value file; flags override
";

/// Entry point: parses the subcommand, dispatches, and returns the exit
/// code.
pub fn run(args: &[String]) -> i32 {
    if args.is_empty() || args[0] == "--help" || args[0] == "help" {
        print!("{USAGE}");
        return if args.is_empty() { 2 } else { 0 };
    }
    let command = args[0].clone();
    let cfg = match parse_config(&args[1..]) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            eprint!("{USAGE}");
            return 2;
        }
    };
    if cfg.threads > 0 {
        // ignore failure when a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }
    let result = match command.as_str() {
        "sample" => cmd_sample(&cfg),
        "tail" => cmd_tail(&cfg),
        "moment-match" => cmd_moment_match(&cfg),
        "equilibrium" => cmd_equilibrium(&cfg),
        "rate" => cmd_rate(&cfg),
        "verify" => cmd_verify(&cfg),
        other => {
            eprintln!("error: unknown command {other}");
            eprint!("{USAGE}");
            return 2;
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::height::HeightField;

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "a=0.3\nq=0.7\nseed=9\n# comment\n").unwrap();
        let args: Vec<String> = ["--config", path.to_str().unwrap(), "--a", "0.4"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let cfg = parse_config(&args).unwrap();
        assert_eq!(cfg.a, 0.4);
        assert_eq!(cfg.q, 0.7);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn invalid_flags_are_rejected() {
        let args = vec!["--bogus".to_string(), "1".to_string()];
        assert!(parse_config(&args).is_err());
        let args = vec!["--a".to_string(), "1.5".to_string()];
        assert!(parse_config(&args).is_err());
        let args = vec!["--mode".to_string(), "fancy".to_string()];
        assert!(parse_config(&args).is_err());
    }

    #[test]
    fn sample_command_is_deterministic() {
        let cfg = RunConfig::default();
        let h1 = sample_height(&cfg.params().unwrap(), cfg.m, cfg.n, cfg.seed);
        let h2 = sample_height(&cfg.params().unwrap(), cfg.m, cfg.n, cfg.seed);
        assert_eq!(h1.to_csv(), h2.to_csv());
    }

    #[test]
    fn qidentity_suite_passes() {
        let cfg = RunConfig::default();
        let results = suite_qidentities(&cfg).unwrap();
        assert!(results.iter().all(|r| r.pass), "{results:?}");
    }

    #[test]
    fn injection_suite_small_run_passes() {
        let cfg = RunConfig {
            pairs: 300,
            ..RunConfig::default()
        };
        let results = suite_injection(&cfg).unwrap();
        assert!(results.iter().all(|r| r.pass), "{results:?}");
    }

    #[test]
    fn sampled_csv_round_trips() {
        let cfg = RunConfig::default();
        let h = sample_height(&cfg.params().unwrap(), 4, 5, 7);
        let parsed = HeightField::from_csv(&h.to_csv()).unwrap();
        assert_eq!(parsed, h);
    }
}
