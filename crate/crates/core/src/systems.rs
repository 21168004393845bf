//! Base maps, fiber contractions, skew products and itinerary-coded points.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{circle_dist, monotone_inverse};

/// Default fiber offset amplitude of the solenoid.
pub const DEFAULT_AMPLITUDE: f64 = 0.5;
/// Half-width of the neutral neighbourhood Ω of the MP map.
pub const MP_OMEGA: f64 = 0.1;
/// Bump location and width for the perturbed family.
pub const BUMP_START: f64 = 0.2;
pub const BUMP_WIDTH: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BaseKind {
    Doubling,
    MannevillePomeau { alpha: f64 },
    /// Doubling map plus `t·(w/2π)(1 − cos(2π(θ−a)/w))` on `[a, a+w]`.
    Perturbed { t: f64, start: f64, width: f64 },
}

/// Degree-two circle map with monotone full branches on `[0,1/2)` and `[1/2,1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseMap {
    pub kind: BaseKind,
    /// Ω as a list of half-open intervals in [0,1).
    pub omega: Vec<(f64, f64)>,
    /// Number of injectivity domains covering Ω.
    pub q: usize,
    /// Declared bound of the inverse-branch Lipschitz profile on Ω.
    pub big_l: f64,
    /// Declared bound of the profile off Ω.
    pub lambda_u: f64,
}

impl BaseMap {
    pub fn doubling() -> Self {
        Self {
            kind: BaseKind::Doubling,
            omega: Vec::new(),
            q: 0,
            big_l: 0.5,
            lambda_u: 0.5,
        }
    }

    pub fn manneville_pomeau(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("mp_alpha must lie in (0,1), got {alpha}")));
        }
        let kind = BaseKind::MannevillePomeau { alpha };
        let mut m = Self {
            kind,
            omega: vec![(0.0, MP_OMEGA), (1.0 - MP_OMEGA, 1.0)],
            q: 1,
            big_l: 1.0,
            lambda_u: 0.0,
        };
        m.lambda_u = 1.0 / m.derivative(MP_OMEGA);
        Ok(m)
    }

    pub fn perturbed(t: f64) -> Result<Self> {
        if t == 0.0 {
            return Ok(Self::doubling());
        }
        if !t.is_finite() || t.abs() >= 1.0 {
            return Err(Error::Config(format!(
                "perturbation t = {t} leaves the uniformly expanding range |t| < 1"
            )));
        }
        Ok(Self {
            kind: BaseKind::Perturbed {
                t,
                start: BUMP_START,
                width: BUMP_WIDTH,
            },
            omega: Vec::new(),
            q: 0,
            big_l: 1.0 / (2.0 - t.abs()),
            lambda_u: 1.0 / (2.0 - t.abs()),
        })
    }

    pub fn degree(&self) -> usize {
        2
    }

    pub fn branch_domain(&self, j: usize) -> (f64, f64) {
        if j == 0 {
            (0.0, 0.5)
        } else {
            (0.5, 1.0)
        }
    }

    pub fn branch_of(&self, x: f64) -> usize {
        usize::from(x >= 0.5)
    }

    /// Branch `j` as a monotone map from its domain onto [0,1].
    pub fn lift(&self, j: usize, x: f64) -> f64 {
        match self.kind {
            BaseKind::Doubling => 2.0 * x - j as f64,
            BaseKind::MannevillePomeau { alpha } => {
                if j == 0 {
                    mp_left(alpha, x)
                } else {
                    1.0 - mp_left(alpha, 1.0 - x)
                }
            }
            BaseKind::Perturbed { t, start, width } => {
                if j == 0 {
                    2.0 * x + t * bump(x, start, width)
                } else {
                    2.0 * x - 1.0
                }
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let y = self.lift(self.branch_of(x), x);
        if y >= 1.0 {
            y - 1.0
        } else if y < 0.0 {
            y + 1.0
        } else {
            y
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self.kind {
            BaseKind::Doubling => 2.0,
            BaseKind::MannevillePomeau { alpha } => {
                let s = if x <= 0.5 { x } else { 1.0 - x };
                1.0 + (1.0 + alpha) * 2f64.powf(alpha) * s.powf(alpha)
            }
            BaseKind::Perturbed { t, start, width } => {
                if x >= start && x <= start + width {
                    2.0 + t * (TAU * (x - start) / width).sin()
                } else {
                    2.0
                }
            }
        }
    }

    /// Pointwise Lipschitz constant of the local inverse branch at `x`.
    pub fn lipschitz_profile(&self, x: f64) -> f64 {
        1.0 / self.derivative(x)
    }

    /// Inverse branch `h_j`: the unique preimage of `y` in branch `j`.
    pub fn inverse(&self, j: usize, y: f64) -> f64 {
        match self.kind {
            BaseKind::Doubling => 0.5 * (y + j as f64),
            BaseKind::MannevillePomeau { alpha } => {
                let left = |u: f64| {
                    monotone_inverse(
                        |x| mp_left(alpha, x),
                        |x| 1.0 + (1.0 + alpha) * 2f64.powf(alpha) * x.powf(alpha),
                        u,
                        0.0,
                        0.5,
                    )
                };
                if j == 0 {
                    left(y)
                } else {
                    1.0 - left(1.0 - y)
                }
            }
            BaseKind::Perturbed { .. } => {
                if j == 0 {
                    monotone_inverse(|x| self.lift(0, x), |x| self.derivative(x), y, 0.0, 0.5)
                } else {
                    0.5 * (y + 1.0)
                }
            }
        }
    }

    pub fn in_omega(&self, x: f64) -> bool {
        self.omega.iter().any(|&(a, b)| x >= a && x < b)
    }

    /// Largest Lipschitz constant of each inverse branch, sampled on a grid.
    pub fn branch_lipschitz(&self, grid: usize) -> Vec<f64> {
        (0..self.degree())
            .map(|j| {
                let (a, b) = self.branch_domain(j);
                (0..=grid)
                    .map(|k| self.lipschitz_profile(a + (b - a) * k as f64 / grid as f64))
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// Checks the expansion hypotheses on a uniform grid; returns the worst
    /// profile values (on Ω, off Ω).
    pub fn check_hypotheses(&self, grid: usize) -> Result<(f64, f64)> {
        let mut on: f64 = 0.0;
        let mut off: f64 = 0.0;
        for k in 0..grid {
            let x = (k as f64 + 0.5) / grid as f64;
            let l = self.lipschitz_profile(x);
            if self.in_omega(x) {
                on = on.max(l);
            } else {
                off = off.max(l);
            }
        }
        if on > self.big_l * (1.0 + 1e-12) {
            return Err(Error::Config(format!("profile {on} exceeds L = {} on Ω", self.big_l)));
        }
        if off > self.lambda_u * (1.0 + 1e-12) || self.lambda_u >= 1.0 {
            return Err(Error::Config(format!(
                "profile {off} off Ω violates λ_u = {} < 1",
                self.lambda_u
            )));
        }
        if self.q >= self.degree() {
            return Err(Error::Config(format!("q = {} is not below the degree", self.q)));
        }
        Ok((on, off))
    }
}

fn mp_left(alpha: f64, x: f64) -> f64 {
    x * (1.0 + 2f64.powf(alpha) * x.powf(alpha))
}

fn bump(x: f64, start: f64, width: f64) -> f64 {
    if x >= start && x <= start + width {
        width / TAU * (1.0 - (TAU * (x - start) / width).cos())
    } else {
        0.0
    }
}

/// Point of the solid torus S¹ × D.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub base: f64,
    pub fiber: [f64; 2],
}

impl Point {
    pub fn new(base: f64, fiber: [f64; 2]) -> Self {
        Self { base, fiber }
    }
}

pub fn fiber_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Max of circle distance on the base and Euclidean distance on the fiber.
pub fn distance(a: &Point, b: &Point) -> f64 {
    circle_dist(a.base, b.base).max(fiber_dist(a.fiber, b.fiber))
}

/// Fiber map z ↦ a·e^{2πiθ} + λ_s·z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberContraction {
    pub lambda_s: f64,
    pub amplitude: f64,
}

impl FiberContraction {
    #[inline]
    pub fn offset(&self, theta: f64) -> [f64; 2] {
        let (s, c) = (TAU * theta).sin_cos();
        [self.amplitude * c, self.amplitude * s]
    }

    #[inline]
    pub fn eval(&self, theta: f64, z: [f64; 2]) -> [f64; 2] {
        let o = self.offset(theta);
        [o[0] + self.lambda_s * z[0], o[1] + self.lambda_s * z[1]]
    }

    /// Radius of the invariant fiber disk.
    pub fn radius(&self) -> f64 {
        self.amplitude / (1.0 - self.lambda_s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewProduct {
    pub base: BaseMap,
    pub fiber: FiberContraction,
    pub holonomy_c: f64,
    pub diam: f64,
}

/// Attractor point coded by its base coordinate and `depth` backward branch
/// choices; `itinerary[0]` is the branch of the first preimage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItineraryPoint {
    pub base: f64,
    pub itinerary: Vec<u8>,
    pub fiber: [f64; 2],
    pub depth: usize,
}

impl ItineraryPoint {
    pub fn point(&self) -> Point {
        Point::new(self.base, self.fiber)
    }
}

impl SkewProduct {
    pub fn new(base: BaseMap, lambda_s: f64, amplitude: f64) -> Result<Self> {
        if !(lambda_s > 0.0 && lambda_s <= 0.5) {
            return Err(Error::Config(format!(
                "lambda_s must lie in (0, 1/2] for an injective solenoid, got {lambda_s}"
            )));
        }
        if !(amplitude > 0.0) {
            return Err(Error::Config("fiber amplitude must be positive".into()));
        }
        let fiber = FiberContraction { lambda_s, amplitude };
        let diam = (0.5f64).max(2.0 * fiber.radius());
        Ok(Self {
            base,
            fiber,
            holonomy_c: 1.0,
            diam,
        })
    }

    pub fn degree(&self) -> usize {
        self.base.degree()
    }

    pub fn lambda_s(&self) -> f64 {
        self.fiber.lambda_s
    }

    pub fn map(&self, x: &Point) -> Point {
        Point::new(self.base.eval(x.base), self.fiber.eval(x.base, x.fiber))
    }

    /// Forward image of an itinerary-coded point: the branch of the base
    /// coordinate becomes the first backward symbol.
    pub fn map_itinerary(&self, x: &ItineraryPoint) -> ItineraryPoint {
        let mut itinerary = Vec::with_capacity(x.itinerary.len() + 1);
        itinerary.push(self.base.branch_of(x.base) as u8);
        itinerary.extend_from_slice(&x.itinerary);
        ItineraryPoint {
            base: self.base.eval(x.base),
            itinerary,
            fiber: self.fiber.eval(x.base, x.fiber),
            depth: x.depth + 1,
        }
    }

    /// f⁻¹ by shifting the itinerary and reconstructing one level shallower.
    pub fn preimage(&self, x: &ItineraryPoint) -> Result<ItineraryPoint> {
        if x.depth == 0 {
            return Err(Error::Depth { need: 1, have: 0 });
        }
        let j = x.itinerary[0] as usize;
        let y = self.base.inverse(j, x.base);
        reconstruct_point(self, y, &x.itinerary[1..], x.depth - 1)
    }

    /// Fiber coordinate over `y` with backward itinerary `itin[..n]`, seeded at `anchor`.
    pub fn fiber_over(&self, y: f64, itin: &[u8], n: usize, anchor: [f64; 2]) -> [f64; 2] {
        let mut bases = Vec::with_capacity(n);
        let mut b = y;
        for &s in &itin[..n] {
            b = self.base.inverse(s as usize, b);
            bases.push(b);
        }
        let mut z = anchor;
        for &b in bases.iter().rev() {
            z = self.fiber.eval(b, z);
        }
        z
    }
}

pub fn make_doubling_solenoid(lambda_s: f64, amplitude: f64) -> Result<SkewProduct> {
    SkewProduct::new(BaseMap::doubling(), lambda_s, amplitude)
}

pub fn make_mp_solenoid(mp_alpha: f64, lambda_s: f64) -> Result<SkewProduct> {
    SkewProduct::new(BaseMap::manneville_pomeau(mp_alpha)?, lambda_s, DEFAULT_AMPLITUDE)
}

pub fn make_perturbed_family(t: f64, lambda_s: f64) -> Result<SkewProduct> {
    let base = BaseMap::perturbed(t)?;
    base.check_hypotheses(10_000)?;
    SkewProduct::new(base, lambda_s, DEFAULT_AMPLITUDE)
}

pub fn reconstruct_point(sys: &SkewProduct, y: f64, itin: &[u8], n: usize) -> Result<ItineraryPoint> {
    reconstruct_with_anchor(sys, y, itin, n, [0.0, 0.0])
}

pub fn reconstruct_with_anchor(
    sys: &SkewProduct,
    y: f64,
    itin: &[u8],
    n: usize,
    anchor: [f64; 2],
) -> Result<ItineraryPoint> {
    if itin.len() < n {
        return Err(Error::Depth { need: n, have: itin.len() });
    }
    let p = sys.degree();
    if let Some(&s) = itin[..n].iter().find(|&&s| s as usize >= p) {
        return Err(Error::Precondition(format!("branch index {s} out of range for degree {p}")));
    }
    Ok(ItineraryPoint {
        base: y,
        itinerary: itin[..n].to_vec(),
        fiber: sys.fiber_over(y, itin, n, anchor),
        depth: n,
    })
}

/// Declarative system description used by configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    Doubling {
        #[serde(default = "default_lambda_s")]
        lambda_s: f64,
    },
    Mp {
        #[serde(default = "default_mp_alpha")]
        mp_alpha: f64,
        #[serde(default = "default_lambda_s")]
        lambda_s: f64,
    },
    Perturbed {
        #[serde(default)]
        t: f64,
        #[serde(default = "default_lambda_s")]
        lambda_s: f64,
    },
}

fn default_lambda_s() -> f64 {
    0.05
}

fn default_mp_alpha() -> f64 {
    0.5
}

impl Default for SystemSpec {
    fn default() -> Self {
        SystemSpec::Doubling { lambda_s: default_lambda_s() }
    }
}

impl SystemSpec {
    pub fn build(&self) -> Result<SkewProduct> {
        match *self {
            SystemSpec::Doubling { lambda_s } => make_doubling_solenoid(lambda_s, DEFAULT_AMPLITUDE),
            SystemSpec::Mp { mp_alpha, lambda_s } => make_mp_solenoid(mp_alpha, lambda_s),
            SystemSpec::Perturbed { t, lambda_s } => make_perturbed_family(t, lambda_s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_metadata() {
        let s = make_doubling_solenoid(0.05, 0.5).unwrap();
        assert_eq!(s.degree(), 2);
        assert_eq!(s.base.q, 0);
        assert!(s.base.omega.is_empty());
        assert!(make_doubling_solenoid(0.7, 0.5).is_err());
    }

    #[test]
    fn mp_formula_values() {
        let g = BaseMap::manneville_pomeau(0.5).unwrap();
        assert_eq!(g.eval(0.0), 0.0);
        let h = 1e-8;
        assert!(((g.eval(h) - g.eval(0.0)) / h - 1.0).abs() < 1e-3);
        // both branch formulas meet at 1/2
        assert!((g.lift(0, 0.5) - 1.0).abs() < 1e-12);
        assert!(g.lift(1, 0.5).abs() < 1e-12);
    }

    #[test]
    fn perturbed_zero_is_doubling() {
        assert_eq!(
            make_perturbed_family(0.0, 0.05).unwrap(),
            make_doubling_solenoid(0.05, DEFAULT_AMPLITUDE).unwrap()
        );
        assert!(make_perturbed_family(1.5, 0.05).is_err());
    }

    #[test]
    fn depth_zero_reconstruction() {
        let s = make_doubling_solenoid(0.05, 0.5).unwrap();
        let x = reconstruct_point(&s, 0.3, &[], 0).unwrap();
        assert_eq!(x.fiber, [0.0, 0.0]);
        assert_eq!(x.base, 0.3);
        assert!(reconstruct_point(&s, 0.3, &[0, 2], 2).is_err());
        assert!(matches!(
            reconstruct_point(&s, 0.3, &[0], 2),
            Err(Error::Depth { need: 2, have: 1 })
        ));
    }

    #[test]
    fn preimage_needs_depth() {
        let s = make_doubling_solenoid(0.05, 0.5).unwrap();
        let x = reconstruct_point(&s, 0.3, &[], 0).unwrap();
        assert!(s.preimage(&x).is_err());
    }

    #[test]
    fn spec_roundtrip() {
        let spec: SystemSpec = serde_json::from_str(r#"{"kind":"mp","mp_alpha":0.3}"#).unwrap();
        assert_eq!(spec, SystemSpec::Mp { mp_alpha: 0.3, lambda_s: 0.05 });
        assert!(spec.build().is_ok());
    }
}
