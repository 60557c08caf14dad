//! Moment classification of the builtin profiles and of a profile read
//! from JSON.

use deltaprime::profiles::{builtin, classify, Profile, BUILTIN_NAMES, DEFAULT_MOMENT_TOL};

fn main() -> deltaprime::Result<()> {
    for name in BUILTIN_NAMES.iter().filter(|n| **n != "custom") {
        let p = builtin(name, &serde_json::Value::Null)?;
        let c = classify(&p, DEFAULT_MOMENT_TOL);
        println!("{name:<16} m0 = {:+.6}  m1 = {:+.6}  {:?}", c.m0, c.m1, c.kind);
    }

    let json = r#"{"label": "ramp", "segments": [
        {"interval": [-1, 0], "coeffs": [0, -1.5]},
        {"interval": [0, 1], "coeffs": [0, -1.5]}
    ]}"#;
    let ramp = Profile::from_json(json)?;
    let c = classify(&ramp, DEFAULT_MOMENT_TOL);
    println!("ramp             m1 = {:+.6}, normalized: {}", c.m1, c.is_normalized_delta_prime(1e-12));
    println!("{}", ramp.scaled(-1.0 / c.m1).to_json());
    Ok(())
}
