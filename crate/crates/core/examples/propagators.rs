//! Adaptive integration of `-u'' + q u = f` and transfer matrices across
//! a discontinuous coefficient.

use deltaprime::ivp::{constant_propagator, LinearOde, SolverConfig, StateVector};

fn main() -> deltaprime::Result<()> {
    let cfg = SolverConfig::with_tolerances(1e-12, 1e-14);

    // piecewise constant q with a jump at 0
    let q = |x: f64| if x < 0.0 { 9.0 } else { -4.0 };
    let ode = LinearOde::new(q).with_breakpoints([0.0]);
    let m = ode.propagator(-1.0, 1.0, &cfg)?;
    let exact = constant_propagator(-4.0, 1.0) * constant_propagator(9.0, 1.0);
    println!("propagator  {:?}", m.0);
    println!("det = {:.15}, max |M - exact| = {:.2e}", m.det(), m.max_abs_diff(&exact));

    // forced problem: -u'' = 1 with u(0) = u'(0) = 0 gives u = -x²/2
    let forced = LinearOde::new(|_| 0.0).with_forcing(|_| 1.0);
    let end = forced.integrate(0.0, 2.0, StateVector::new(0.0, 0.0), &cfg)?;
    println!("u(2) = {:.12} (exact -2), u'(2) = {:.12} (exact -2)", end.u, end.du);

    let grid: Vec<f64> = (0..=4).map(|i| i as f64 * 0.25).collect();
    let samples = LinearOde::new(|_| -1.0).sample(0.0, &grid, StateVector::new(0.0, 1.0), &cfg)?;
    for (x, s) in grid.iter().zip(&samples) {
        println!("sin({x:.2}) = {:.12}  sampled {:.12}", x.sin(), s.u);
    }
    Ok(())
}
