//! Compactly supported profiles on `[-1, 1]`.
//!
//! A profile is stored as a piecewise polynomial over a partition of
//! `[-1, 1]`, which keeps moments exact and lets the integrators stop at
//! every discontinuity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance used by [`classify`] on the zeroth and first moments.
pub const DEFAULT_MOMENT_TOL: f64 = 1e-10;

const PARTITION_TOL: f64 = 1e-12;

/// One polynomial piece, `coeffs` in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub interval: [f64; 2],
    pub coeffs: Vec<f64>,
}

impl Segment {
    fn eval(&self, xi: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * xi + c)
    }

    /// Exact integral of `xi^k * p(xi)` over the segment.
    fn weighted_integral(&self, k: u32) -> f64 {
        let [a, b] = self.interval;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let n = k as i32 + j as i32 + 1;
                c * (b.powi(n) - a.powi(n)) / n as f64
            })
            .sum()
    }
}

#[derive(Deserialize)]
struct RawProfile {
    label: String,
    segments: Vec<Segment>,
}

/// A piecewise-polynomial profile whose segments partition `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile")]
pub struct Profile {
    label: String,
    segments: Vec<Segment>,
}

impl TryFrom<RawProfile> for Profile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        Profile::new(raw.label, raw.segments)
    }
}

impl Profile {
    /// Validates the partition and builds the profile. Interior endpoints
    /// that agree within `1e-12` are snapped together.
    pub fn new(label: impl Into<String>, mut segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidProfile("no segments".into()));
        }
        for (i, s) in segments.iter().enumerate() {
            let [a, b] = s.interval;
            if !a.is_finite() || !b.is_finite() || b - a <= 0.0 {
                return Err(Error::InvalidProfile(format!(
                    "segment {i} has non-positive length [{a}, {b}]"
                )));
            }
            if s.coeffs.is_empty() || s.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidProfile(format!(
                    "segment {i} needs at least one finite coefficient"
                )));
            }
        }
        if (segments[0].interval[0] + 1.0).abs() > PARTITION_TOL {
            return Err(Error::InvalidProfile("partition must start at -1".into()));
        }
        if (segments.last().unwrap().interval[1] - 1.0).abs() > PARTITION_TOL {
            return Err(Error::InvalidProfile("partition must end at 1".into()));
        }
        segments[0].interval[0] = -1.0;
        segments.last_mut().unwrap().interval[1] = 1.0;
        for i in 1..segments.len() {
            let prev = segments[i - 1].interval[1];
            let next = segments[i].interval[0];
            if (prev - next).abs() > PARTITION_TOL {
                return Err(Error::InvalidProfile(format!(
                    "gap or overlap between segments {} and {i} ({prev} vs {next})",
                    i - 1
                )));
            }
            segments[i].interval[0] = prev;
        }
        Ok(Profile {
            label: label.into(),
            segments,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Interior breakpoints in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments[1..].iter().map(|s| s.interval[0]).collect()
    }

    /// Value at `xi`; zero outside `[-1, 1]`, right-continuous at breakpoints.
    pub fn evaluate(&self, xi: f64) -> f64 {
        if !(-1.0..=1.0).contains(&xi) {
            return 0.0;
        }
        let idx = self
            .segments
            .partition_point(|s| s.interval[0] <= xi)
            .saturating_sub(1);
        self.segments[idx].eval(xi)
    }

    /// `m_k = ∫ xi^k Ψ(xi) dxi`, integrated exactly piece by piece.
    pub fn moment(&self, k: u32) -> f64 {
        self.segments.iter().map(|s| s.weighted_integral(k)).sum()
    }

    /// `α ε⁻² Ψ(x / ε)`.
    pub fn scaled_potential(&self, alpha: f64, eps: f64, x: f64) -> f64 {
        alpha / (eps * eps) * self.evaluate(x / eps)
    }

    /// Upper bound on `sup |Ψ|` from the coefficient magnitudes. Exact for
    /// piecewise constant profiles.
    pub fn abs_bound(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| {
                let r = s.interval[0].abs().max(s.interval[1].abs());
                s.coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c.abs() * r.powi(j as i32))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// The profile `c·Ψ`.
    pub fn scaled(&self, c: f64) -> Profile {
        let segments = self
            .segments
            .iter()
            .map(|s| Segment {
                interval: s.interval,
                coeffs: s.coeffs.iter().map(|x| x * c).collect(),
            })
            .collect();
        Profile {
            label: format!("{}*{c}", self.label),
            segments,
        }
    }

    /// The mirror image `Ψ(-xi)`.
    pub fn reflected(&self) -> Profile {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| Segment {
                interval: [-s.interval[1], -s.interval[0]],
                coeffs: s
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| if j % 2 == 1 { -c } else { c })
                    .collect(),
            })
            .collect();
        Profile {
            label: format!("{}~reflected", self.label),
            segments,
        }
    }

    pub fn from_json(text: &str) -> Result<Profile> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }
}

/// Moment-based classification of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileClass {
    #[serde(flatten)]
    pub kind: ClassKind,
    pub m0: f64,
    pub m1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ClassKind {
    /// `ε⁻²Ψ(x/ε) → c δ'(x)` with `c = -m1`.
    DeltaPrimeLike { c: f64 },
    ZeroMeanOnly,
    General,
}

impl ProfileClass {
    /// Membership in the normalized class `m0 = 0`, `m1 = -1`.
    pub fn is_normalized_delta_prime(&self, tol: f64) -> bool {
        matches!(self.kind, ClassKind::DeltaPrimeLike { .. }) && (self.m1 + 1.0).abs() <= tol
    }
}

pub fn classify(p: &Profile, moment_tol: f64) -> ProfileClass {
    let m0 = p.moment(0);
    let m1 = p.moment(1);
    let kind = if m0.abs() <= moment_tol {
        if m1.abs() > moment_tol {
            ClassKind::DeltaPrimeLike { c: -m1 }
        } else {
            ClassKind::ZeroMeanOnly
        }
    } else {
        ClassKind::General
    };
    ProfileClass { kind, m0, m1 }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &["step", "odd_cubic", "asymmetric_bump", "even_parabola", "custom"];

/// Builds a named profile.
///
/// * `step`: `1` on `(-1, 0)`, `-1` on `(0, 1)`.
/// * `odd_cubic`: `(15/4)(xi³ - xi)`, odd with `m1 = -1`.
/// * `asymmetric_bump`: `(1 - xi²)(1 - 15xi/4 - 5xi²)`, `m0 = 0`, `m1 = -1`, not odd.
/// * `even_parabola`: `1 - xi²`.
/// * `custom`: `params` must hold `{"segments": [...]}` and optionally `"label"`.
///
/// Every builtin except `custom` accepts an optional `"scale"` multiplier.
pub fn builtin(name: &str, params: &serde_json::Value) -> Result<Profile> {
    let seg = |a: f64, b: f64, coeffs: &[f64]| Segment {
        interval: [a, b],
        coeffs: coeffs.to_vec(),
    };
    let profile = match name {
        "step" => Profile::new("step", vec![seg(-1.0, 0.0, &[1.0]), seg(0.0, 1.0, &[-1.0])])?,
        "odd_cubic" => Profile::new("odd_cubic", vec![seg(-1.0, 1.0, &[0.0, -3.75, 0.0, 3.75])])?,
        // (1 - x²)(1 - 15x/4 - 5x²) = 1 - 15x/4 - 6x² + 15x³/4 + 5x⁴
        "asymmetric_bump" => Profile::new(
            "asymmetric_bump",
            vec![seg(-1.0, 1.0, &[1.0, -3.75, -6.0, 3.75, 5.0])],
        )?,
        "even_parabola" => Profile::new("even_parabola", vec![seg(-1.0, 1.0, &[1.0, 0.0, -1.0])])?,
        "custom" => {
            let segments = params
                .get("segments")
                .ok_or_else(|| Error::InvalidProfile("custom profile needs `segments`".into()))?;
            let segments: Vec<Segment> = serde_json::from_value(segments.clone())
                .map_err(|e| Error::InvalidProfile(format!("malformed segments: {e}")))?;
            let label = params
                .get("label")
                .and_then(|l| l.as_str())
                .unwrap_or("custom");
            return Profile::new(label, segments);
        }
        other => return Err(Error::UnknownBuiltin(other.to_string())),
    };
    match params.get("scale").and_then(|s| s.as_f64()) {
        Some(c) => Ok(profile.scaled(c)),
        None => Ok(profile),
    }
}

/// Shorthand for a parameterless builtin.
pub fn named(name: &str) -> Result<Profile> {
    builtin(name, &serde_json::Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn step() -> Profile {
        named("step").unwrap()
    }

    #[test]
    fn step_values() {
        let p = step();
        assert_eq!(p.evaluate(-0.5), 1.0);
        assert_eq!(p.evaluate(0.5), -1.0);
        assert_eq!(p.evaluate(2.0), 0.0);
        assert_eq!(p.evaluate(-1.0000001), 0.0);
        // right-continuous at the breakpoint
        assert_eq!(p.evaluate(0.0), -1.0);
    }

    #[test]
    fn step_moments() {
        let p = step();
        assert_eq!(p.moment(0), 0.0);
        assert_eq!(p.moment(1), -1.0);
        let one = Profile::new("one", vec![Segment { interval: [-1.0, 1.0], coeffs: vec![1.0] }]).unwrap();
        assert_eq!(one.moment(0), 2.0);
    }

    #[test]
    fn classification() {
        let c = classify(&step(), DEFAULT_MOMENT_TOL);
        assert_eq!(c.kind, ClassKind::DeltaPrimeLike { c: 1.0 });
        assert!(c.is_normalized_delta_prime(1e-12));

        let even = named("even_parabola").unwrap();
        let c = classify(&even, DEFAULT_MOMENT_TOL);
        assert_eq!(c.kind, ClassKind::General);
        assert!((c.m0 - 4.0 / 3.0).abs() < 1e-15);

        // 5xi³ - 3xi: odd with m1 = ∫(5xi⁴ - 3xi²) = 2 - 2 = 0
        let p3 = Profile::new("p3", vec![Segment { interval: [-1.0, 1.0], coeffs: vec![0.0, -3.0, 0.0, 5.0] }]).unwrap();
        let c = classify(&p3, DEFAULT_MOMENT_TOL);
        assert_eq!(c.kind, ClassKind::ZeroMeanOnly);
        assert!(c.m0.abs() < 1e-15 && c.m1.abs() < 1e-15);
    }

    #[test]
    fn builtins_are_normalized() {
        for name in ["step", "odd_cubic", "asymmetric_bump"] {
            let p = named(name).unwrap();
            assert!(p.moment(0).abs() < 1e-14, "{name}");
            assert!((p.moment(1) + 1.0).abs() < 1e-14, "{name}");
        }
        assert_eq!(named("step").unwrap().segments().len(), 2);
        let bump = named("asymmetric_bump").unwrap();
        assert!((bump.evaluate(0.3) + bump.evaluate(-0.3)).abs() > 0.1);
    }

    #[test]
    fn scaled_potential_values() {
        let p = step();
        assert!((p.scaled_potential(1.0, 0.1, -0.05) - 100.0).abs() < 1e-12);
        assert_eq!(p.scaled_potential(2.0, 0.5, 0.25), -8.0);
        assert_eq!(p.scaled_potential(3.0, 0.1, 0.2), 0.0);
    }

    #[test]
    fn builtin_errors() {
        assert!(matches!(named("nope"), Err(Error::UnknownBuiltin(_))));
        let bad = json!({"segments": [{"interval": [-1.0, 0.2], "coeffs": [1.0]}, {"interval": [0.3, 1.0], "coeffs": [1.0]}]});
        assert!(matches!(builtin("custom", &bad), Err(Error::InvalidProfile(_))));
        let bad = json!({"segments": [{"interval": [-1.0, 1.0]}]});
        assert!(builtin("custom", &bad).is_err());
        assert!(builtin("custom", &json!({})).is_err());
        let flipped = json!({"segments": [{"interval": [1.0, -1.0], "coeffs": [1.0]}]});
        assert!(builtin("custom", &flipped).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = named("asymmetric_bump").unwrap();
        let back = Profile::from_json(&p.to_json()).unwrap();
        assert_eq!(p, back);
        let text = r#"{"label": "x", "segments": [{"interval": [-1, 0.5], "coeffs": [1]}, {"interval": [0.5, 0.9], "coeffs": [2]}]}"#;
        assert!(Profile::from_json(text).is_err());
    }

    #[test]
    fn reflection_and_scaling() {
        let p = named("asymmetric_bump").unwrap();
        let r = p.reflected();
        for xi in [-0.9, -0.3, 0.1, 0.77] {
            assert!((r.evaluate(xi) - p.evaluate(-xi)).abs() < 1e-14);
        }
        assert!((r.moment(1) - 1.0).abs() < 1e-14);
        let s = p.scaled(-2.5);
        assert!((s.moment(1) - 2.5).abs() < 1e-14);
        assert!(step().abs_bound() == 1.0);
    }
}
