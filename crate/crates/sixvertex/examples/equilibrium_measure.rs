//! The box-constrained equilibrium measure: projected-gradient solver
//! against the closed-form density with its saturated plateau.
//!
//! Run: cargo run --release --example equilibrium_measure

use sixvertex::potential::{
    equilibrium_energy_f, f_inf_closed_form, phi_closed_form, variational_constant, SolverOptions,
};

fn main() -> sixvertex::Result<()> {
    let (a, q, alpha) = (0.5, 0.5, 1.0);
    let cf = phi_closed_form(a, q, alpha)?;
    println!(
        "closed form: p = {}, edges (c, d) = ({:.6}, {:.6}), saturated = {}",
        cf.p, cf.c, cf.d, cf.saturated
    );

    let opts = SolverOptions {
        n: 2000,
        tol: 1e-4,
        max_iter: 100_000,
    };
    let rep = equilibrium_energy_f(a, q, alpha, f64::INFINITY, &opts, None)?;
    let (c_edge, d_edge) = rep.support_edges();
    println!(
        "\nsolver ({} cells, {} iterations):",
        opts.n, rep.iterations
    );
    println!(
        "  energy          = {:.6}  (closed form {:.6})",
        rep.energy,
        f_inf_closed_form(a, q, alpha)?
    );
    println!("  support edges   = ({c_edge:.4}, {d_edge:.4})");
    println!(
        "  bulk level      = {:.6}  (variational constant {:.6})",
        rep.lagrange_constant,
        variational_constant(a, q, alpha)
    );
    println!("  bulk residual   = {:.2e}", rep.bulk_residual);
    println!("  low violation   = {:.2e}", rep.low_violation);
    println!("  high violation  = {:.2e}", rep.high_violation);
    println!(
        "  L1 density error = {:.5}",
        rep.density.l1_distance_to(|x| cf.eval(x))
    );

    // a few profile values
    println!("\n{:>6} {:>10} {:>10}", "x", "solver", "closed");
    for x in [0.2, 0.5, 1.0, 2.0, 2.8] {
        let i = ((x - rep.density.x0) / rep.density.dx()) as usize;
        println!(
            "{:>6.2} {:>10.5} {:>10.5}",
            x,
            rep.density.values[i],
            cf.eval(x)
        );
    }
    Ok(())
}
