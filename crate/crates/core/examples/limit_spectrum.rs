//! Eigenvalues of the limit operator `-v'' + U v` under the different
//! point interactions at the origin.

use deltaprime::spectra::{eigen_limit, BoundaryCoupling, ConfiningPotential, SpectrumOptions};

fn main() -> deltaprime::Result<()> {
    let u = ConfiningPotential::polynomial(&[0.0, 1.0, 1.0], 8.0)?;
    let opts = SpectrumOptions::default();
    let couplings = [
        ("split", BoundaryCoupling::DirichletSplit),
        ("theta = 1", BoundaryCoupling::theta(1.0)?),
        ("theta = -35.9", BoundaryCoupling::theta(-35.9)?),
        ("Kurasov-Nizhnik a = 1", BoundaryCoupling::kurasov_nizhnik(1.0)),
        ("delta, c = -2", BoundaryCoupling::connected(0.0, [[1.0, 0.0], [-2.0, 1.0]])?),
    ];
    for (name, bc) in couplings {
        let s = eigen_limit(&u, &bc, 4, &opts)?;
        let levels: Vec<String> = s.eigenvalues.iter().map(|l| format!("{l:.8}")).collect();
        println!("{name:<22} {}", levels.join("  "));
    }

    let s = eigen_limit(&u, &BoundaryCoupling::theta(-2.0)?, 1, &opts.with_eigenfunctions())?;
    let v = &s.eigenfunctions.unwrap()[0];
    println!("ground state norm {:.10}, trace {:?}", v.norm_squared(), v.trace);
    Ok(())
}
