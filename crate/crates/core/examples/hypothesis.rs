//! Size of the coupling function on each side of the resonance set.

use deltaprime::experiments::hypothesis_scan;
use deltaprime::profiles::named;
use deltaprime::resonance::ScanOptions;

fn main() -> deltaprime::Result<()> {
    let profiles = [named("step")?, named("odd_cubic")?, named("asymmetric_bump")?];
    let even = named("even_parabola")?;
    let r = hypothesis_scan(&profiles, Some(&even), (-100.0, 100.0), &ScanOptions::default())?;
    for p in &r.profiles {
        println!("{}", p.profile);
        for row in &p.rows {
            println!("  alpha = {:>12.6}  |theta| = {:>12.6e}  {:?} {:?}", row.alpha, row.abs_theta, row.side, row.satisfies);
        }
    }
    if let Some(e) = &r.even {
        println!("{}: {} resonances, max ||theta| - 1| = {:.1e}", e.profile, e.rows.len(), e.max_deviation);
    }
    Ok(())
}
