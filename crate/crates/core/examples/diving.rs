//! `ε² λ₁^ε` against the ground state of the rescaled operator.

use deltaprime::experiments::{diving_study, DivingOptions};
use deltaprime::profiles::named;
use deltaprime::spectra::ConfiningPotential;

fn main() -> deltaprime::Result<()> {
    let u = ConfiningPotential::polynomial(&[0.0, 0.0, 1.0], 8.0)?;
    for name in ["step", "odd_cubic", "asymmetric_bump"] {
        let p = named(name)?;
        for alpha in [-2.0, 1.0] {
            let r = diving_study(&u, &p, alpha, &[0.1, 0.03, 0.01], &DivingOptions::default())?;
            let scaled: Vec<String> = r.rows.iter().map(|x| format!("{:.6}", x.scaled)).collect();
            println!("{name:<16} alpha = {alpha:+}  mu = {:.6}  eps^2 lambda_1: {}", r.mu, scaled.join(" "));
        }
    }
    Ok(())
}
