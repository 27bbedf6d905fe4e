//! The lower-tail rate function: tabulate the energy rate F_alpha,
//! detect its parabolic regime, and strip the Gaussian shift by infimal
//! deconvolution.
//!
//! Run: cargo run --release --example rate_function

use sixvertex::potential::SolverOptions;
use sixvertex::rate::{mu_alpha, rate_properties_report, tabulate_rate, RateOptions, RateParams};

fn main() -> sixvertex::Result<()> {
    let p = RateParams::new(0.5, 0.5, 1.0)?;
    // a coarser grid than the defaults keeps this example quick
    let opts = RateOptions {
        solver: SolverOptions {
            n: 400,
            tol: 5e-4,
            max_iter: 60_000,
        },
        y_step: 0.05,
        s_step: 5e-3,
        ..RateOptions::default()
    };
    let tables = tabulate_rate(&p, &opts)?;
    println!("stabilization point y_big = {}", tables.y_big);

    let mu = mu_alpha(p.a, p.alpha);
    println!("\n{:>6} {:>10} {:>10}", "s", "F", "Phi");
    for s in [0.0, mu, 0.3, 0.5, 0.7, 0.9, 1.0] {
        println!(
            "{:>6.3} {:>10.6} {:>10.6}",
            s,
            tables.f.eval_nearest(s),
            tables.phi.eval_nearest(s)
        );
    }

    let rep = rate_properties_report(&tables, (tables.y_big, tables.y_big + 2.0));
    println!("\nendpoints:");
    println!(
        "  Phi(1)  = {:.6}  target alpha log((1-aq)/(1-a)) = {:.6}",
        rep.phi_at_one, rep.phi_at_one_target
    );
    println!("  Phi(mu) = {:.6}  (mu = {:.6})", rep.phi_at_mu, rep.mu);
    println!("shape:");
    println!("  convexity violations    = {}", rep.convexity_violations);
    println!(
        "  monotonicity violations = {}",
        rep.monotonicity_violations
    );
    println!("  parabola residual       = {:.2e}", rep.parabola_residual);
    println!("  round trip sup          = {:.2e}", rep.roundtrip_sup);
    Ok(())
}
