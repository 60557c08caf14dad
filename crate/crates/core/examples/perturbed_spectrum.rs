//! Spectrum of `-y'' + (U + α ε⁻² Ψ(x/ε)) y`: diving levels below the
//! bounded ones.

use deltaprime::profiles::named;
use deltaprime::spectra::{eigen_perturbed, rescaled_spectrum, ConfiningPotential, SpectrumOptions};

fn main() -> deltaprime::Result<()> {
    let u = ConfiningPotential::polynomial(&[0.0, 1.0, 1.0], 8.0)?;
    let p = named("step")?;
    let opts = SpectrumOptions::default();
    let alpha = 5.0;
    let mu = rescaled_spectrum(&p, alpha, 30.0, 1, &opts)?.eigenvalues[0];
    println!("rescaled ground state mu = {mu:.10}");
    for eps in [0.1, 0.03, 0.01] {
        let s = eigen_perturbed(&u, &p, alpha, eps, (1, 4), &opts)?;
        println!(
            "eps = {eps:<5} eps^2 lambda_1 = {:.8}  bounded: {:.6?}",
            s.eigenvalues[0] * eps * eps,
            &s.eigenvalues[1..]
        );
    }
    Ok(())
}
