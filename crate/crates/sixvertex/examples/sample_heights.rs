//! Sample a height field with step boundary and inspect it.
//!
//! Run: cargo run --release --example sample_heights

use sixvertex::height::HeightField;
use sixvertex::model::{height_observable, sample_height, ModelParams};

fn main() -> sixvertex::Result<()> {
    let params = ModelParams::new(0.5, 0.5)?;
    println!(
        "params: a = {}, q = {}  (b1 = {:.4}, b2 = {:.4})",
        params.a, params.q, params.b1, params.b2
    );

    let (m, n) = (7, 7);
    let h = sample_height(&params, m, n, 2024);
    assert!(h.validate().is_empty());
    assert!(h.is_step_boundary());

    println!("\nface heights (rows j = N..0, columns i = 0..M):");
    for j in (0..=n).rev() {
        let row: Vec<String> = (0..=m)
            .map(|i| format!("{:2}", h.get(sixvertex::height::Face::new(i, j))))
            .collect();
        println!("  {}", row.join(" "));
    }

    println!("\ncorner observables:");
    for (mm, nn) in [(1, 1), (4, 4), (7, 7)] {
        println!("  h({mm},{nn}) = {}", height_observable(&h, mm, nn)?);
    }

    // CSV round trip is exact
    let csv = h.to_csv();
    let back = HeightField::from_csv(&csv)?;
    assert_eq!(back, h);
    println!("\nCSV round trip: exact ({} bytes)", csv.len());
    Ok(())
}
