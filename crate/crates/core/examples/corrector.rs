//! First-order eigenvalue corrector against finite-ε slopes, for a closed
//! and an open barrier.

use deltaprime::profiles::named;
use deltaprime::resonance::{coupling_theta, default_solver, refine};
use deltaprime::spectra::{
    corrector_lambda1, eigen_limit, eigen_perturbed, BoundaryCoupling, ConfiningPotential, SpectrumOptions,
};

fn main() -> deltaprime::Result<()> {
    let u = ConfiningPotential::polynomial(&[0.0, 1.0, 1.0], 8.0)?;
    let p = named("step")?;
    let cfg = default_solver();
    let a1 = refine(&p, 15.0, 16.0, &cfg)?;
    let opts = SpectrumOptions::default().with_eigenfunctions();
    for (alpha, resonant) in [(5.0, false), (a1, true)] {
        let bc = if resonant {
            BoundaryCoupling::theta(coupling_theta(&p, alpha, &cfg, 1e-9)?)?
        } else {
            BoundaryCoupling::DirichletSplit
        };
        let limit = eigen_limit(&u, &bc, 1, &opts)?;
        let lambda = limit.eigenvalues[0];
        let l1 = corrector_lambda1(&u, &p, alpha, lambda, &limit.eigenfunctions.unwrap()[0].trace, resonant, &cfg, 1e-9)?;
        println!("alpha = {alpha:.6}  lambda = {lambda:.10}  lambda_1 = {l1:.8}");
        for eps in [0.02, 0.01, 0.005] {
            // one diving level sits below the bounded spectrum for both values of alpha
            let l = eigen_perturbed(&u, &p, alpha, eps, (2, 2), &SpectrumOptions::default())?.eigenvalues[0];
            println!("  eps = {eps:<6} (lambda^eps - lambda)/eps = {:.8}", (l - lambda) / eps);
        }
    }
    Ok(())
}
