//! Observables on the solid torus and a small catalogue used by configs.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::systems::Point;

pub trait Observable: Sync {
    fn eval(&self, x: &Point) -> f64;
}

impl<F> Observable for F
where
    F: Fn(&Point) -> f64 + Sync,
{
    fn eval(&self, x: &Point) -> f64 {
        self(x)
    }
}

/// Named observables for configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ObservableSpec {
    Constant { value: f64 },
    /// cos(2π k θ)
    Cos { freq: u32 },
    /// Σ_{k=1}^{modes} 2^{-k} cos(2π 2^k θ)
    Dyadic { modes: u32 },
    /// cos(4πθ) − cos(2πθ) = u∘f − u for u = cos(2πθ) on a doubling base
    Coboundary,
    /// first fiber coordinate
    FiberX,
    /// sin(2πθ)·(1 + z_x/2)
    Mixed,
    /// exp(−(dist(θ, c))²/(2w²)), a smooth base bump
    Bump { center: f64, width: f64 },
}

impl ObservableSpec {
    pub fn label(&self) -> String {
        match self {
            ObservableSpec::Constant { value } => format!("constant({value})"),
            ObservableSpec::Cos { freq } => format!("cos(2pi*{freq}*theta)"),
            ObservableSpec::Dyadic { modes } => format!("dyadic({modes})"),
            ObservableSpec::Coboundary => "coboundary".into(),
            ObservableSpec::FiberX => "fiber_x".into(),
            ObservableSpec::Mixed => "mixed".into(),
            ObservableSpec::Bump { center, width } => format!("bump({center},{width})"),
        }
    }

    /// True when the value only depends on the base coordinate.
    pub fn base_only(&self) -> bool {
        !matches!(self, ObservableSpec::FiberX | ObservableSpec::Mixed)
    }
}

impl Observable for ObservableSpec {
    fn eval(&self, x: &Point) -> f64 {
        let th = x.base;
        match *self {
            ObservableSpec::Constant { value } => value,
            ObservableSpec::Cos { freq } => (TAU * freq as f64 * th).cos(),
            ObservableSpec::Dyadic { modes } => {
                let mut s = 0.0;
                let mut w = 1.0;
                let mut f = 1.0;
                for _ in 0..modes {
                    w *= 0.5;
                    f *= 2.0;
                    s += w * (TAU * (f * th).fract()).cos();
                }
                s
            }
            ObservableSpec::Coboundary => (2.0 * TAU * th).cos() - (TAU * th).cos(),
            ObservableSpec::FiberX => x.fiber[0],
            ObservableSpec::Mixed => (TAU * th).sin() * (1.0 + 0.5 * x.fiber[0]),
            ObservableSpec::Bump { center, width } => {
                let d = crate::numerics::circle_dist(th, center);
                (-(d * d) / (2.0 * width * width)).exp()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_values() {
        let x = Point::new(0.25, [0.4, 0.0]);
        assert!(ObservableSpec::Cos { freq: 1 }.eval(&x).abs() < 1e-15);
        assert_eq!(ObservableSpec::FiberX.eval(&x), 0.4);
        assert!((ObservableSpec::Coboundary.eval(&x) - (-1.0)).abs() < 1e-15);
        let d = ObservableSpec::Dyadic { modes: 2 }.eval(&Point::new(0.0, [0.0; 2]));
        assert!((d - 0.75).abs() < 1e-15);
    }

    #[test]
    fn toml_like_roundtrip() {
        let s: ObservableSpec = serde_json::from_str(r#"{"name":"dyadic","modes":10}"#).unwrap();
        assert_eq!(s, ObservableSpec::Dyadic { modes: 10 });
    }
}
