//! Transmission through the squeezed barrier: decay off resonance, the
//! plateau on resonance, and the closed form for the step.

use deltaprime::profiles::named;
use deltaprime::resonance::{coupling_theta, default_solver, refine};
use deltaprime::scattering::{scatter, step_scatter_exact, transmission_limit};

fn main() -> deltaprime::Result<()> {
    let p = named("step")?;
    let cfg = default_solver();
    let a1 = refine(&p, 15.0, 16.0, &cfg)?;
    let limit = transmission_limit(coupling_theta(&p, a1, &cfg, 1e-9)?);
    println!("{:>8} {:>14} {:>14} {:>10}", "eps", "|T|^2 a=4", "|T|^2 a=a1", "unitarity");
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let off = scatter(&p, 4.0, eps, 1.0, &cfg)?;
        let on = scatter(&p, a1, eps, 1.0, &cfg)?;
        println!(
            "{eps:>8.0e} {:>14.6e} {:>14.6e} {:>10.1e}",
            off.transmittance(),
            on.transmittance(),
            on.unitarity_defect()
        );
    }
    println!("limit 4θ²/(1+θ²)² = {limit:.6e}");

    let n = scatter(&p, 4.0, 0.05, 1.0, &cfg)?;
    let e = step_scatter_exact(2.0, 0.05, 1.0)?;
    println!("numerical T = {:.12}, exact T = {:.12}", n.t, e.t);
    Ok(())
}
