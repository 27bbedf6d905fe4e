//! The surface contraction machinery: disagreement regions, boundaries,
//! the minimal lift k*, and the weight inequality it certifies.
//!
//! Run: cargo run --release --example contraction_maps

use sixvertex::height::{boundary, k_star, region_neq, upsilon};
use sixvertex::model::{
    observable_face, sample_height_stream, verify_weight_inequality, ModelParams,
};

fn main() -> sixvertex::Result<()> {
    let params = ModelParams::new(0.5, 0.5)?;
    let (m, n) = (9, 9);
    let p = observable_face(m, n);

    // find a pair with well-separated corner values
    let (mut lo, mut hi) = (None, None);
    for replica in 0.. {
        let h = sample_height_stream(&params, m, n, 5, replica);
        let v = h.get(p);
        if v <= 2 && lo.is_none() {
            lo = Some(h);
        } else if v >= 6 && hi.is_none() {
            hi = Some(h);
        }
        if lo.is_some() && hi.is_some() {
            break;
        }
    }
    let (lo, hi) = (lo.unwrap(), hi.unwrap());
    let (r, rp) = (lo.get(p), hi.get(p));
    println!("pair with corner values ({r}, {rp})");

    let region = region_neq(&lo, &hi, p)?;
    println!(
        "disagreement component at the corner: {} faces, boundary {} vertices",
        region.len(),
        boundary(&region).len()
    );

    let k = k_star(&lo, &hi, p, m, n)?;
    let floor = (rp - r + 1) / 2;
    let slack = ((m * n) as f64).powf(2.0 / 5.0);
    println!(
        "k* = {k}  (floor {floor}, upper bound {:.2})",
        floor as f64 + slack
    );

    let (t1, t2) = upsilon(&lo, &hi, p, k)?;
    println!(
        "contracted corner values: ({}, {})  [midpoint {}]",
        t1.get(p),
        t2.get(p),
        (r + rp) as f64 / 2.0
    );
    assert!(t1.is_step_boundary() && t2.is_step_boundary());

    // applying the same contraction again restores the pair
    let (b1, b2) = upsilon(&t1, &t2, p, k)?;
    assert_eq!(b1, lo);
    assert_eq!(b2, hi);
    println!("contraction is an involution: round trip exact");

    let rep = verify_weight_inequality(&params, &lo, &hi, p, k)?;
    println!(
        "weight inequality: log lhs = {:.4}, log rhs = {:.4}, boundary {} vertices -> {}",
        rep.lhs_log,
        rep.rhs_log,
        rep.boundary_size,
        if rep.pass { "holds" } else { "violated" }
    );
    Ok(())
}
