//! Dirichlet problem on `(a, b)` with the squeezed barrier: eigenfrequencies
//! at small ε against the limit equations.

use deltaprime::profiles::named;
use deltaprime::resonance::{coupling_theta, default_solver, refine};
use deltaprime::spectra::{interval_limit_frequencies, interval_spectrum, interval_split_frequencies, SpectrumOptions};

fn main() -> deltaprime::Result<()> {
    let (a, b) = (-1.0, 2.0);
    let p = named("step")?;
    let cfg = default_solver();
    let a1 = refine(&p, 15.0, 16.0, &cfg)?;
    let theta = coupling_theta(&p, a1, &cfg, 1e-9)?;
    let opts = SpectrumOptions::default();

    let open = interval_limit_frequencies(a, b, theta, 5)?;
    let closed = interval_split_frequencies(a, b, 5)?;
    for (alpha, limit, label) in [(a1, open, "open"), (5.0, closed, "closed")] {
        let s = interval_spectrum(a, b, &p, alpha, 1e-3, 5, &opts)?;
        println!("{label} barrier, alpha = {alpha:.6}");
        for (l, w) in s.eigenvalues.iter().zip(&limit) {
            println!("  omega_eps = {:.8}  limit = {w:.8}", l.sqrt());
        }
    }
    Ok(())
}
