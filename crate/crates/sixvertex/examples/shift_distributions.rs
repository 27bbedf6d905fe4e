//! The Theta and q-geometric shift laws and the identity
//! P(X + S <= n) = prod_{i>=0} 1/(1 + q^{n+i}), which turns the
//! q-Laplace transform of the height into a genuine shifted tail.
//!
//! Run: cargo run --release --example shift_distributions

use sixvertex::model::ModelParams;
use sixvertex::qseries::{q_laplace_of_height, shifted_tail, QTruncation, ShiftDistributions};

fn main() -> sixvertex::Result<()> {
    let q = 0.5;
    let d = ShiftDistributions::new(q, QTruncation::default())?;
    println!("q = {q}: Z_S = {:.6}", d.z_s);
    println!("P(S = 0) = P(S = 1) = {:.6}", d.pmf_s(0));
    println!("P(X = 0) = (q; q)_inf = {:.6}\n", d.pmf_chi(0));

    println!("{:>4} {:>14} {:>14}", "n", "convolved", "closed form");
    for n in -4..=6i64 {
        println!(
            "{:>4} {:>14.10} {:>14.10}",
            n,
            d.cdf_shift_convolved(n),
            d.cdf_shift_closed(n)?
        );
    }

    // shifted tail of the height equals the q-Laplace transform on the
    // integer lattice of s N
    let params = ModelParams::new(0.5, q)?;
    let (m, n) = (3, 3);
    println!("\nP(h({m},{n}) - X - S >= sN) two ways:");
    println!("{:>8} {:>14} {:>14}", "s", "convolution", "q-Laplace");
    for k in [-3i64, 0, 3, 6] {
        let s = k as f64 / n as f64;
        let a = shifted_tail(&params, m, n, s)?;
        let b = q_laplace_of_height(&params, m, n, q.powf(-s * n as f64))?;
        println!("{:>8.4} {:>14.10} {:>14.10}", s, a, b);
    }
    Ok(())
}
