//! Resonance set and coupling function of the step profile, checked
//! against the closed forms.

use deltaprime::profiles::named;
use deltaprime::resonance::{resonance_scan, step_theta, ScanOptions};

fn main() -> deltaprime::Result<()> {
    let p = named("step")?;
    let scan = resonance_scan(&p, -60.0, 60.0, &ScanOptions::default())?;
    println!("{:>14} {:>16} {:>16} {:>10}", "alpha", "theta", "closed form", "residual");
    for r in &scan.points {
        println!(
            "{:>14.9} {:>16.9e} {:>16.9e} {:>10.1e}",
            r.alpha,
            r.theta,
            step_theta(r.alpha)?,
            r.residual
        );
    }
    println!("grid refinement consistent: {}", scan.rescan_consistent);

    let w = &scan.points.iter().find(|r| r.alpha > 0.0).unwrap().eigenfunction;
    println!("first positive resonant shape: w(-1) = {}, w(0) = {:.6}, w(1) = {:.6}", w[0].1, w[w.len() / 2].1, w[w.len() - 1].1);
    Ok(())
}
