//! Convex cones of sampled densities and their Hilbert projective metric.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BISECTION_TOL: f64 = 1e-10;
const FEASIBILITY_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ConeKind {
    PositivityOnly,
    Hoelder { kappa: f64, alpha: f64 },
}

/// A cone over functions sampled on `n` nodes.
#[derive(Clone, Debug)]
pub struct ConeSpec {
    kind: ConeKind,
    n: usize,
    dist: Vec<f64>,
    // (i, j, 1/d(i,j)^alpha) for i < j, only for Hölder cones
    pairs: Vec<(u32, u32, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafDensity {
    pub values: Vec<f64>,
    pub alpha: f64,
}

impl LeafDensity {
    pub fn new(values: Vec<f64>, alpha: f64) -> Self {
        Self { values, alpha }
    }

    pub fn constant(n: usize, c: f64, alpha: f64) -> Self {
        Self::new(vec![c; n], alpha)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self::new(self.values.iter().map(|v| v * t).collect(), self.alpha)
    }
}

/// α or β coefficient; `+∞` encodes "inf ∅".
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ProjectiveValue(pub f64);

impl ProjectiveValue {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl ConeSpec {
    pub fn positivity(n: usize) -> Self {
        Self {
            kind: ConeKind::PositivityOnly,
            n,
            dist: Vec::new(),
            pairs: Vec::new(),
        }
    }

    /// Hölder cone `D(κ)` on nodes with the given row-major distance matrix.
    pub fn hoelder(kappa: f64, alpha: f64, n: usize, dist: Vec<f64>) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0,1], got {alpha}")));
        }
        if dist.len() != n * n {
            return Err(Error::Degenerate(format!(
                "distance matrix has {} entries for {n} nodes",
                dist.len()
            )));
        }
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(Error::Degenerate("nonzero diagonal distance".into()));
            }
            for j in i + 1..n {
                let d = dist[i * n + j];
                if (d - dist[j * n + i]).abs() > 1e-14 * d.abs().max(1.0) {
                    return Err(Error::Degenerate("distance matrix is not symmetric".into()));
                }
                if !(d > 0.0) {
                    return Err(Error::Degenerate(format!("nodes {i} and {j} coincide")));
                }
                pairs.push((i as u32, j as u32, d.powf(-alpha)));
            }
        }
        Ok(Self {
            kind: ConeKind::Hoelder { kappa, alpha },
            n,
            dist,
            pairs,
        })
    }

    /// Hölder cone on points of a metric space given by a distance closure.
    pub fn hoelder_from_points<P, D>(kappa: f64, alpha: f64, pts: &[P], d: D) -> Result<Self>
    where
        D: Fn(&P, &P) -> f64,
    {
        let n = pts.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = d(&pts[i], &pts[j]);
                dist[i * n + j] = v;
                dist[j * n + i] = v;
            }
        }
        Self::hoelder(kappa, alpha, n, dist)
    }

    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Same nodes, different κ.
    pub fn with_kappa(&self, kappa: f64) -> Self {
        let mut s = self.clone();
        if let ConeKind::Hoelder { alpha, .. } = self.kind {
            s.kind = ConeKind::Hoelder { kappa, alpha };
        }
        s
    }

    fn seminorm_values(&self, v: &[f64], alpha: f64) -> f64 {
        match self.kind {
            ConeKind::Hoelder { alpha: a, .. } if a == alpha => self
                .pairs
                .iter()
                .map(|&(i, j, w)| (v[i as usize] - v[j as usize]).abs() * w)
                .fold(0.0, f64::max),
            _ => {
                let mut m: f64 = 0.0;
                for i in 0..self.n {
                    for j in i + 1..self.n {
                        let d = self.dist[i * self.n + j];
                        m = m.max((v[i] - v[j]).abs() / d.powf(alpha));
                    }
                }
                m
            }
        }
    }

    // closure of the cone, with a relative slack on the Hölder constraint
    fn feasible(&self, u: &[f64]) -> bool {
        let m = u.iter().copied().fold(f64::INFINITY, f64::min);
        if !(m > 0.0) {
            return false;
        }
        match self.kind {
            ConeKind::PositivityOnly => true,
            ConeKind::Hoelder { kappa, alpha } => {
                self.seminorm_values(u, alpha) <= kappa * m * (1.0 + FEASIBILITY_SLACK)
            }
        }
    }

    fn check_len(&self, v: &LeafDensity) -> Result<()> {
        if v.values.len() != self.n {
            return Err(Error::NodeMismatch(format!(
                "density has {} values, cone has {} nodes",
                v.values.len(),
                self.n
            )));
        }
        Ok(())
    }
}

/// Sampled α-Hölder seminorm: max over node pairs of |ρ(x)−ρ(y)|/d(x,y)^α.
pub fn hoelder_seminorm(rho: &LeafDensity, spec: &ConeSpec) -> Result<f64> {
    if rho.values.len() < 2 {
        return Err(Error::Degenerate("seminorm needs at least two nodes".into()));
    }
    spec.check_len(rho)?;
    if matches!(spec.kind, ConeKind::PositivityOnly) {
        return Err(Error::Degenerate("positivity-only cone carries no metric".into()));
    }
    Ok(spec.seminorm_values(&rho.values, rho.alpha))
}

pub fn in_cone(v: &LeafDensity, spec: &ConeSpec) -> bool {
    if v.values.len() != spec.n {
        return false;
    }
    let m = v.min();
    if !(m > 0.0) {
        return false;
    }
    match spec.kind {
        ConeKind::PositivityOnly => true,
        ConeKind::Hoelder { kappa, alpha } => {
            v.values.len() < 2 || spec.seminorm_values(&v.values, alpha) < kappa * m
        }
    }
}

fn check_pair(v: &LeafDensity, w: &LeafDensity, spec: &ConeSpec) -> Result<()> {
    spec.check_len(v)?;
    spec.check_len(w)?;
    if !in_cone(v, spec) || !in_cone(w, spec) {
        return Err(Error::Precondition("arguments must lie in the cone".into()));
    }
    Ok(())
}

fn positive_multiple(v: &[f64], w: &[f64]) -> Option<f64> {
    let r = w[0] / v[0];
    v.iter()
        .zip(w)
        .all(|(a, b)| (b - r * a).abs() <= 1e-14 * b.abs())
        .then_some(r)
}

fn ratio_bounds(v: &[f64], w: &[f64]) -> (f64, f64) {
    v.iter()
        .zip(w)
        .map(|(a, b)| b / a)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r), hi.max(r))
        })
}

/// α_C(v,w) = sup{t > 0 : w − t v ∈ C}.
pub fn alpha_coeff(v: &LeafDensity, w: &LeafDensity, spec: &ConeSpec) -> Result<ProjectiveValue> {
    check_pair(v, w, spec)?;
    if let Some(r) = positive_multiple(&v.values, &w.values) {
        return Ok(ProjectiveValue(r));
    }
    let (rmin, _) = ratio_bounds(&v.values, &w.values);
    if matches!(spec.kind, ConeKind::PositivityOnly) {
        return Ok(ProjectiveValue(rmin));
    }
    let mut buf = vec![0.0; spec.n];
    let mut feasible_at = |t: f64| {
        for ((b, a), c) in buf.iter_mut().zip(&v.values).zip(&w.values) {
            *b = c - t * a;
        }
        spec.feasible(&buf)
    };
    let (mut lo, mut hi) = (0.0, rmin);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if feasible_at(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ProjectiveValue(lo))
}

/// β_C(v,w) = inf{s > 0 : s v − w ∈ C}.
pub fn beta_coeff(v: &LeafDensity, w: &LeafDensity, spec: &ConeSpec) -> Result<ProjectiveValue> {
    check_pair(v, w, spec)?;
    if let Some(r) = positive_multiple(&v.values, &w.values) {
        return Ok(ProjectiveValue(r));
    }
    let (_, rmax) = ratio_bounds(&v.values, &w.values);
    if matches!(spec.kind, ConeKind::PositivityOnly) {
        return Ok(ProjectiveValue(rmax));
    }
    let mut buf = vec![0.0; spec.n];
    let mut feasible_at = |s: f64| {
        for ((b, a), c) in buf.iter_mut().zip(&v.values).zip(&w.values) {
            *b = s * a - c;
        }
        spec.feasible(&buf)
    };
    let mut lo = rmax;
    let mut hi = 2.0 * rmax;
    while !feasible_at(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(ProjectiveValue(f64::INFINITY));
        }
    }
    while hi - lo > BISECTION_TOL * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if feasible_at(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ProjectiveValue(hi))
}

/// Hilbert projective distance log(β/α).
pub fn theta(v: &LeafDensity, w: &LeafDensity, spec: &ConeSpec) -> Result<f64> {
    check_pair(v, w, spec)?;
    if positive_multiple(&v.values, &w.values).is_some() {
        return Ok(0.0);
    }
    let a = alpha_coeff(v, w, spec)?.value();
    let b = beta_coeff(v, w, spec)?.value();
    if a <= 0.0 || !b.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok((b / a).ln().max(0.0))
}

/// Birkhoff contraction factor of a map whose image has θ-diameter `d`.
pub fn birkhoff_bound(d: f64) -> f64 {
    if d.is_infinite() {
        return 1.0;
    }
    -(-d).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_nodes(kappa: f64) -> ConeSpec {
        ConeSpec::hoelder(kappa, 1.0, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn seminorm_two_nodes() {
        let s = two_nodes(1.0);
        let rho = LeafDensity::new(vec![1.0, 1.4], 1.0);
        assert!((hoelder_seminorm(&rho, &s).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(hoelder_seminorm(&LeafDensity::constant(2, 3.0, 1.0), &s).unwrap(), 0.0);
    }

    #[test]
    fn seminorm_needs_two_nodes() {
        let s = ConeSpec::hoelder(1.0, 1.0, 1, vec![0.0]).unwrap();
        let r = hoelder_seminorm(&LeafDensity::constant(1, 1.0, 1.0), &s);
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn strict_membership() {
        let s = two_nodes(1.0);
        assert!(in_cone(&LeafDensity::constant(2, 1.0, 1.0), &s));
        assert!(!in_cone(&LeafDensity::new(vec![1.0, 2.0], 1.0), &s));
        assert!(!in_cone(&LeafDensity::new(vec![0.0, 0.1], 1.0), &ConeSpec::positivity(2)));
    }

    #[test]
    fn hand_solved_coefficients() {
        let s = two_nodes(1.0);
        let v = LeafDensity::constant(2, 1.0, 1.0);
        let w = LeafDensity::new(vec![1.0, 1.4], 1.0);
        assert!((alpha_coeff(&v, &w, &s).unwrap().value() - 0.6).abs() < 1e-9);
        assert!((beta_coeff(&v, &w, &s).unwrap().value() - 1.8).abs() < 1e-9);
        assert!((theta(&v, &w, &s).unwrap() - 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn positivity_closed_forms() {
        let s = ConeSpec::positivity(2);
        let v = LeafDensity::constant(2, 1.0, 1.0);
        let w = LeafDensity::new(vec![0.5, 2.0], 1.0);
        assert_eq!(alpha_coeff(&v, &w, &s).unwrap().value(), 0.5);
        assert_eq!(beta_coeff(&v, &w, &s).unwrap().value(), 2.0);
    }

    #[test]
    fn equal_and_proportional_rays() {
        let s = two_nodes(1.0);
        let v = LeafDensity::new(vec![1.0, 1.2], 1.0);
        assert_eq!(alpha_coeff(&v, &v, &s).unwrap().value(), 1.0);
        assert_eq!(beta_coeff(&v, &v, &s).unwrap().value(), 1.0);
        let one = LeafDensity::constant(2, 1.0, 1.0);
        assert_eq!(theta(&one, &LeafDensity::constant(2, 5.0, 1.0), &s).unwrap(), 0.0);
    }

    #[test]
    fn outside_cone_is_rejected() {
        let s = two_nodes(1.0);
        let v = LeafDensity::constant(2, 1.0, 1.0);
        let w = LeafDensity::new(vec![1.0, 3.0], 1.0);
        assert!(matches!(alpha_coeff(&v, &w, &s), Err(Error::Precondition(_))));
    }

    #[test]
    fn birkhoff_values() {
        assert_eq!(birkhoff_bound(0.0), 0.0);
        assert!((birkhoff_bound(9f64.ln()) - 8.0 / 9.0).abs() < 1e-15);
        assert!(birkhoff_bound(50.0) <= 1.0 && birkhoff_bound(50.0) > birkhoff_bound(5.0));
        assert_eq!(birkhoff_bound(f64::INFINITY), 1.0);
    }
}
