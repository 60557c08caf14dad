//! Convergence of the bounded spectrum to the limit operator along an ε
//! ladder, written as JSON and CSV.

use deltaprime::experiments::{convergence_study, write_json, ConvergenceOptions};
use deltaprime::profiles::named;
use deltaprime::resonance::{default_solver, refine};
use deltaprime::spectra::ConfiningPotential;

fn main() -> deltaprime::Result<()> {
    let u = ConfiningPotential::polynomial(&[0.0, 1.0, 1.0], 8.0)?;
    let p = named("step")?;
    let a1 = refine(&p, 15.0, 16.0, &default_solver())?;
    let ladder = [0.04, 0.02, 0.01, 0.005];
    let out = std::env::temp_dir().join("deltaprime-convergence");
    std::fs::create_dir_all(&out)?;
    for alpha in [5.0, a1] {
        let r = convergence_study(&u, &p, alpha, &ladder, 3, &ConvergenceOptions::default())?;
        println!("alpha = {alpha:.6} resonant = {} diving = {:?}", r.resonant, r.diving_counts);
        for row in &r.rows {
            println!(
                "  k = {} limit = {:.8} order = {:.3} slope = {:.6} corrector = {:.6} distances = {:?}",
                row.k,
                row.lambda_limit,
                row.order.unwrap_or(f64::NAN),
                row.slope.unwrap_or(f64::NAN),
                row.corrector.unwrap_or(f64::NAN),
                row.distances
            );
        }
        let tag = if r.resonant { "open" } else { "closed" };
        write_json(&r, &out.join(format!("{tag}.json")))?;
        for t in r.tables() {
            t.write_csv(&out.join(format!("{tag}_{}.csv", t.name)))?;
        }
    }
    println!("reports in {}", out.display());
    Ok(())
}
