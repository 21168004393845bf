//! Transfer operator, density pushes, cone conditions and diameter estimates.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cones::{self, ConeSpec, LeafDensity};
use crate::error::{Error, Result};
use crate::leafmeasure::{build_quadrature, integrate_values, LeafPair, LeafQuadrature};
use crate::numerics::CompensatedSum;
use crate::rng::{stream, TAG_CONE};
use crate::systems::{distance, fiber_dist, ItineraryPoint, Point, SkewProduct};

/// Potential φ_pot with declared variation bound ε.
#[derive(Clone)]
pub enum Potential {
    Constant(f64),
    Variable {
        f: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
        epsilon: f64,
    },
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Constant(c) => write!(f, "Constant({c})"),
            Potential::Variable { epsilon, .. } => write!(f, "Variable(ε={epsilon})"),
        }
    }
}

impl Default for Potential {
    fn default() -> Self {
        Potential::Constant(0.0)
    }
}

impl Potential {
    pub fn eval(&self, x: &Point) -> f64 {
        match self {
            Potential::Constant(c) => *c,
            Potential::Variable { f, .. } => f(x),
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            Potential::Constant(_) => 0.0,
            Potential::Variable { epsilon, .. } => *epsilon,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Potential::Constant(_))
    }
}

/// Lφ(x) = φ(f⁻¹x)·e^{φ_pot(f⁻¹x)}.
pub fn apply_transfer<F>(sys: &SkewProduct, phi: F, x: &ItineraryPoint, pot: &Potential) -> Result<f64>
where
    F: Fn(&Point) -> f64,
{
    apply_transfer_n(sys, phi, x, 1, pot)
}

/// Lⁿφ(x) = φ(f⁻ⁿx)·exp(Σ_{k=1}^{n} φ_pot(f⁻ᵏx)).
pub fn apply_transfer_n<F>(sys: &SkewProduct, phi: F, x: &ItineraryPoint, n: usize, pot: &Potential) -> Result<f64>
where
    F: Fn(&Point) -> f64,
{
    if x.depth < n {
        return Err(Error::Depth { need: n, have: x.depth });
    }
    let mut y = x.clone();
    let mut weight = 0.0;
    for _ in 0..n {
        y = sys.preimage(&y)?;
        weight += pot.eval(&y.point());
    }
    Ok(phi(&y.point()) * weight.exp())
}

/// Leaf quadrature of γ_j matched with the `j`-block of `quad`.
pub fn branch_quadrature(sys: &SkewProduct, quad: &LeafQuadrature, j: usize) -> Result<LeafQuadrature> {
    if j >= sys.degree() {
        return Err(Error::Precondition(format!("branch {j} out of range")));
    }
    if quad.depth == 0 {
        return Err(Error::Depth { need: 1, have: 0 });
    }
    build_quadrature(sys, sys.base.inverse(j, quad.base), quad.depth - 1)
}

/// ρ_j = (1/p)·ρ∘f·e^{φ_pot} on the quadrature of γ_j.
pub fn push_density(
    sys: &SkewProduct,
    quad: &LeafQuadrature,
    rho: &LeafDensity,
    j: usize,
    pot: &Potential,
) -> Result<(LeafQuadrature, LeafDensity)> {
    if rho.values.len() != quad.len() {
        return Err(Error::NodeMismatch(format!(
            "density has {} values, leaf has {} nodes",
            rho.values.len(),
            quad.len()
        )));
    }
    let sub = branch_quadrature(sys, quad, j)?;
    let p = sys.degree() as f64;
    let block = quad.branch_block(j);
    let values = sub
        .nodes
        .iter()
        .zip(&rho.values[block])
        .map(|(x, r)| r / p * pot.eval(&x.point()).exp())
        .collect();
    Ok((sub, LeafDensity::new(values, rho.alpha)))
}

/// Σ_j ∫_{γ_j} φ ρ_j dμ_{γ_j}.
pub fn transfer_leaf_integral<F>(
    sys: &SkewProduct,
    phi: F,
    rho: &LeafDensity,
    quad: &LeafQuadrature,
    pot: &Potential,
) -> Result<f64>
where
    F: Fn(&Point) -> f64,
{
    let mut total = CompensatedSum::new();
    for j in 0..sys.degree() {
        let (sub, rho_j) = push_density(sys, quad, rho, j, pot)?;
        let vals: Vec<f64> = sub.nodes.iter().map(|x| phi(&x.point())).collect();
        total.add(integrate_values(&vals, &rho_j.values, &sub));
    }
    Ok(total.value())
}

/// ∫_γ L(φ) ρ dμ_γ evaluated node by node.
pub fn transfer_leaf_integral_direct<F>(
    sys: &SkewProduct,
    phi: F,
    rho: &LeafDensity,
    quad: &LeafQuadrature,
    pot: &Potential,
) -> Result<f64>
where
    F: Fn(&Point) -> f64,
{
    let vals = transfer_values(sys, &phi, quad, pot)?;
    Ok(integrate_values(&vals, &rho.values, quad))
}

/// Values of Lφ on the nodes of a leaf.
pub fn transfer_values<F>(sys: &SkewProduct, phi: &F, quad: &LeafQuadrature, pot: &Potential) -> Result<Vec<f64>>
where
    F: Fn(&Point) -> f64,
{
    quad.nodes.iter().map(|x| apply_transfer(sys, phi, x, pot)).collect()
}

/// Λ₁ = 1 − ((1−λ)/(1+λ))².
pub fn lambda1(lambda: f64) -> f64 {
    let r = (1.0 - lambda) / (1.0 + lambda);
    1.0 - r * r
}

/// Λ₁ + 2·log(((1+λ)/(1−λ))²).
pub fn main_cone_factor(lambda: f64) -> f64 {
    lambda1(lambda) + 4.0 * ((1.0 + lambda) / (1.0 - lambda)).ln()
}

/// Data needed to choose cone parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeInputs {
    pub lambda_s: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub diam: f64,
    pub degree: usize,
    /// Lipschitz constant of the best inverse branch.
    pub lambda_u_tilde: f64,
    /// Lipschitz constant of the worst inverse branch.
    pub l_tilde: f64,
}

impl ConeInputs {
    pub fn for_system(sys: &SkewProduct, alpha: f64, epsilon: f64) -> Self {
        let lips = sys.base.branch_lipschitz(10_000);
        let lo = lips.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = lips.iter().copied().fold(0.0, f64::max);
        Self {
            lambda_s: sys.lambda_s(),
            alpha,
            epsilon,
            diam: sys.diam,
            degree: sys.degree(),
            lambda_u_tilde: lo,
            l_tilde: hi,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeParams {
    pub alpha: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub b: f64,
    pub c: f64,
    pub epsilon: f64,
    pub lambda_s: f64,
    pub diam: f64,
    pub lambda1: f64,
    pub factor_f: f64,
    pub b_min: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma: f64,
    /// Closed-form bound of Θ₊(Lφ, Lψ) on the cone.
    pub theta_plus_bound: f64,
    /// Closed-form bound of the projective diameter of L(C).
    pub delta_bound: f64,
}

fn sigma2(inputs: &ConeInputs) -> f64 {
    let p = inputs.degree as f64;
    let a = inputs.alpha;
    let excess = (inputs.l_tilde - 1.0).max(0.0);
    (inputs.lambda_u_tilde.powf(a) + (p - 1.0) * (1.0 + excess.powf(a)) * inputs.l_tilde.powf(a)) / p
}

impl ConeParams {
    /// Recomputes σ and the bounds for the current (κ, λ, b, c).
    pub fn from_parts(inputs: &ConeInputs, kappa: f64, lambda: f64, b: f64, c: f64) -> Self {
        let da = inputs.diam.powf(inputs.alpha);
        let m = (1.0 + kappa * da).powi(2);
        let f = main_cone_factor(lambda);
        let b_min = 2.0 * m / (1.0 - f * m);
        let sigma1 = f * m + 2.0 * m / b;
        let sigma2 = sigma2(inputs);
        let sigma = sigma1.max(sigma2);
        let r = ((1.0 + lambda) / (1.0 - lambda)).ln();
        let big = (1.0 + b * r).powi(2) * (1.0 + kappa.max(c).max(inputs.epsilon) * da).powi(4);
        let theta_plus_bound = 2.0 * big.ln();
        let delta_bound = theta_plus_bound + 2.0 * ((1.0 + sigma) / (1.0 - sigma)).ln();
        Self {
            alpha: inputs.alpha,
            kappa,
            lambda,
            b,
            c,
            epsilon: inputs.epsilon,
            lambda_s: inputs.lambda_s,
            diam: inputs.diam,
            lambda1: lambda1(lambda),
            factor_f: f,
            b_min,
            sigma1,
            sigma2,
            sigma,
            theta_plus_bound,
            delta_bound,
        }
    }

    pub fn with_b(&self, inputs: &ConeInputs, b: f64) -> Self {
        Self::from_parts(inputs, self.kappa, self.lambda, b, self.c)
    }

    /// Re-checks every admissibility inequality; names the first failure.
    pub fn validate(&self) -> Result<()> {
        let da = self.diam.powf(self.alpha);
        let eps = self.epsilon;
        let a0 = self.lambda_s.powf(self.alpha) * eps.exp() + da * eps;
        if !(self.kappa > 0.0 && self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::Infeasible("κ > 0 and 0 < λ < 1".into()));
        }
        if !(a0 < 1.0 && self.kappa > eps / (1.0 - a0)) {
            return Err(Error::Infeasible("κ > ε/(1 − (λ_s^α e^ε + diam^α ε))".into()));
        }
        let need = a0 + if eps > 0.0 { eps / self.kappa } else { 0.0 };
        if !(self.lambda > need) {
            return Err(Error::Infeasible(format!(
                "λ > λ_s^α e^ε + diam^α ε + ε/κ (λ = {}, bound {need})",
                self.lambda
            )));
        }
        if !(self.kappa * da < self.lambda) {
            return Err(Error::Infeasible("κ·diam^α < λ".into()));
        }
        let lhs = self.factor_f * (1.0 + self.kappa * da).powi(2);
        if !(lhs < 1.0) {
            return Err(Error::Infeasible(format!(
                "(Λ₁ + 2log(((1+λ)/(1−λ))²))(1+κ diam^α)² < 1 (value {lhs})"
            )));
        }
        if !(self.b > 0.0 && self.c > 0.0) {
            return Err(Error::Infeasible("b, c > 0".into()));
        }
        if !(self.sigma1 < 1.0) {
            return Err(Error::Infeasible(format!("σ₁ < 1 (value {}, b below {})", self.sigma1, self.b_min)));
        }
        if !(self.sigma2 < 1.0) {
            return Err(Error::Infeasible(format!(
                "(λ̃_u^α + (p−1)(1+(L̃−1)^α)L̃^α)/p < 1 (value {})",
                self.sigma2
            )));
        }
        Ok(())
    }
}

/// Grid search over λ; κ is the midpoint of its feasible interval, b = c = 10·b_min.
pub fn choose_cone_params(inputs: &ConeInputs) -> Result<ConeParams> {
    let ConeInputs { lambda_s, alpha, epsilon: eps, diam, .. } = *inputs;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0,1], got {alpha}")));
    }
    if !(lambda_s > 0.0 && lambda_s < 1.0) || eps < 0.0 {
        return Err(Error::Config("need 0 < λ_s < 1 and ε ≥ 0".into()));
    }
    let da = diam.powf(alpha);
    let a0 = lambda_s.powf(alpha) * eps.exp() + da * eps;
    if a0 >= 1.0 {
        return Err(Error::Infeasible(
            "κ > ε/(1 − (λ_s^α e^ε + diam^α ε)): denominator is not positive".into(),
        ));
    }
    let s2 = sigma2(inputs);
    if s2 >= 1.0 {
        return Err(Error::Infeasible(format!(
            "(λ̃_u^α + (p−1)(1+(L̃−1)^α)L̃^α)/p < 1 (value {s2})"
        )));
    }
    let mut best: Option<(f64, f64, f64)> = None;
    let mut f_fail = true;
    const GRID: usize = 20_000;
    for k in 1..GRID {
        let lambda = a0 + (1.0 - a0) * k as f64 / GRID as f64;
        let f = main_cone_factor(lambda);
        if f >= 1.0 {
            continue;
        }
        f_fail = false;
        let kmax = (lambda / da).min((1.0 / f.sqrt() - 1.0) / da);
        let kmin = if eps > 0.0 { eps / (lambda - a0) } else { 0.0 };
        if kmin >= kmax {
            continue;
        }
        let score = ((lambda - a0) / lambda).min(1.0 - f);
        if best.is_none_or(|(s, _, _)| score > s) {
            best = Some((score, lambda, 0.5 * (kmin + kmax)));
        }
    }
    let Some((_, lambda, kappa)) = best else {
        return Err(Error::Infeasible(if f_fail {
            format!(
                "(Λ₁ + 2log(((1+λ)/(1−λ))²))(1+κ diam^α)² < 1 has no λ above λ_s^α e^ε + diam^α ε = {a0}"
            )
        } else {
            "λ > λ_s^α e^ε + diam^α ε + ε/κ is incompatible with κ·diam^α < λ".into()
        }));
    };
    let probe = ConeParams::from_parts(inputs, kappa, lambda, 1.0, 1.0);
    let b = 10.0 * probe.b_min;
    let params = ConeParams::from_parts(inputs, kappa, lambda, b, b);
    params.validate()?;
    Ok(params)
}

/// Hölder density cone on a leaf, built from its fiber coordinates.
pub fn leaf_cone(quad: &LeafQuadrature, kappa: f64, alpha: f64) -> Result<ConeSpec> {
    ConeSpec::hoelder_from_points(kappa, alpha, &quad.fiber_points(), |a, b| fiber_dist(*a, *b))
}

fn leaf_diameter(quad: &LeafQuadrature) -> f64 {
    let pts = quad.fiber_points();
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max(fiber_dist(pts[i], pts[j]));
        }
    }
    d
}

/// Random density in D(γ, κ): 1 + Σ a_k cos(ω_k·z + φ_k), normalized to ∫ρ dμ_γ = 1.
///
/// The Lipschitz constant is kept at `s·κ·(1 − Σ|a_k|)/D^{1−α}` with `s < 1`,
/// which puts ρ strictly inside the cone.
pub fn random_density<R: Rng>(quad: &LeafQuadrature, kappa: f64, alpha: f64, rng: &mut R) -> LeafDensity {
    let d = leaf_diameter(quad).max(1e-300);
    let modes = rng.gen_range(1..=3);
    let mut waves = Vec::with_capacity(modes);
    let mut sa = 0.0;
    let mut saw = 0.0;
    for _ in 0..modes {
        let a: f64 = rng.gen_range(0.1..1.0);
        let norm = rng.gen_range(1.0..10.0) / d;
        let dir = rng.gen_range(0.0..TAU);
        let w = [norm * dir.cos(), norm * dir.sin()];
        let ph = rng.gen_range(0.0..TAU);
        sa += a;
        saw += a * norm;
        waves.push((a, w, ph));
    }
    let s = rng.gen_range(0.2..0.95);
    let lip_scale = d.powf(1.0 - alpha);
    let c = s * kappa / (saw * lip_scale + s * kappa * sa);
    let raw: Vec<f64> = quad
        .nodes
        .iter()
        .map(|x| {
            let z = x.fiber;
            1.0 + waves
                .iter()
                .map(|(a, w, ph)| c * a * (w[0] * z[0] + w[1] * z[1] + ph).cos())
                .sum::<f64>()
        })
        .collect();
    let mass = integrate_values(&raw, &vec![1.0; raw.len()], quad);
    LeafDensity::new(raw.iter().map(|v| v / mass).collect(), alpha)
}

/// A leaf with a fixed family of normalized densities and their pairwise θ.
#[derive(Clone, Debug)]
pub struct DensitySet {
    pub quad: LeafQuadrature,
    pub cone: ConeSpec,
    pub densities: Vec<LeafDensity>,
    /// Row-major θ(ρ_i, ρ_k).
    pub theta: Vec<f64>,
}

impl DensitySet {
    pub fn build<R: Rng>(quad: LeafQuadrature, params: &ConeParams, count: usize, rng: &mut R) -> Result<Self> {
        let cone = leaf_cone(&quad, params.kappa, params.alpha)?;
        let mut densities = vec![LeafDensity::constant(quad.len(), 1.0, params.alpha)];
        while densities.len() < count.max(2) {
            densities.push(random_density(&quad, params.kappa, params.alpha, rng));
        }
        let k = densities.len();
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
        let vals: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| cones::theta(&densities[i], &densities[j], &cone))
            .collect::<Result<_>>()?;
        let mut theta = vec![0.0; k * k];
        for (&(i, j), v) in pairs.iter().zip(vals) {
            theta[i * k + j] = v;
            theta[j * k + i] = v;
        }
        Ok(Self { quad, cone, densities, theta })
    }

    /// ∫_γ φ ρ for every density, given φ on the nodes.
    pub fn integrals(&self, values: &[f64]) -> Vec<f64> {
        self.densities
            .iter()
            .map(|r| integrate_values(values, &r.values, &self.quad))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub max_ratio: f64,
    pub inf_estimate: f64,
    pub threshold: f64,
    pub evaluated: usize,
    pub skipped: usize,
    pub holds: bool,
}

impl MarginReport {
    fn new(max_ratio: f64, inf_estimate: f64, threshold: f64, evaluated: usize, skipped: usize) -> Self {
        let holds = inf_estimate > 0.0 && max_ratio < threshold;
        Self { max_ratio, inf_estimate, threshold, evaluated, skipped, holds }
    }

    /// Combines reports over several leaves.
    pub fn merge(reports: &[MarginReport]) -> Self {
        let max_ratio = reports.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
        let inf = reports.iter().map(|r| r.inf_estimate).fold(f64::INFINITY, f64::min);
        let threshold = reports.first().map_or(0.0, |r| r.threshold);
        let evaluated = reports.iter().map(|r| r.evaluated).sum();
        let skipped = reports.iter().map(|r| r.skipped).sum();
        let mut m = Self::new(max_ratio, inf, threshold, evaluated, skipped);
        m.holds = reports.iter().all(|r| r.holds);
        m
    }
}

/// Condition (B) on one leaf for φ given by its node values.
pub fn check_condition_b_values(values: &[f64], set: &DensitySet, threshold: f64) -> MarginReport {
    let ints = set.integrals(values);
    let inf = ints.iter().copied().fold(f64::INFINITY, f64::min);
    let k = ints.len();
    let mut worst: f64 = 0.0;
    let mut evaluated = 0;
    let mut skipped = 0;
    for i in 0..k {
        for j in i + 1..k {
            let th = set.theta[i * k + j];
            if !(th > 0.0) || !th.is_finite() {
                skipped += 1;
                continue;
            }
            evaluated += 1;
            worst = worst.max((ints[i] - ints[j]).abs() / (th * inf));
        }
    }
    MarginReport::new(worst, inf, threshold, evaluated, skipped)
}

pub fn check_condition_b<F>(phi: F, set: &DensitySet, threshold: f64) -> MarginReport
where
    F: Fn(&ItineraryPoint) -> f64,
{
    let values: Vec<f64> = set.quad.nodes.iter().map(phi).collect();
    check_condition_b_values(&values, set, threshold)
}

/// Condition (C) over a family of leaf pairs; the infimum runs over all leaves in the family.
pub fn check_condition_c<F>(phi: F, pairs: &[LeafPair], alpha: f64, threshold: f64) -> MarginReport
where
    F: Fn(&ItineraryPoint) -> f64,
{
    let ints: Vec<(f64, f64)> = pairs
        .iter()
        .map(|pr| {
            let a: Vec<f64> = pr.first.nodes.iter().map(&phi).collect();
            let b: Vec<f64> = pr.second.nodes.iter().map(&phi).collect();
            let ones = vec![1.0; a.len()];
            (integrate_values(&a, &ones, &pr.first), integrate_values(&b, &ones, &pr.second))
        })
        .collect();
    margin_c(&ints, pairs, alpha, threshold)
}

fn margin_c(ints: &[(f64, f64)], pairs: &[LeafPair], alpha: f64, threshold: f64) -> MarginReport {
    let inf = ints.iter().flat_map(|&(a, b)| [a, b]).fold(f64::INFINITY, f64::min);
    let mut worst: f64 = 0.0;
    let mut evaluated = 0;
    let mut skipped = 0;
    for (&(a, b), pr) in ints.iter().zip(pairs) {
        if !(pr.distance > 0.0) {
            skipped += 1;
            continue;
        }
        evaluated += 1;
        worst = worst.max((a - b).abs() / (pr.distance.powf(alpha) * inf));
    }
    MarginReport::new(worst, inf, threshold, evaluated, skipped)
}

/// Cone element `scale·(1 + Σ a cos(2π m θ + ω·z + φ))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeElement {
    pub scale: f64,
    pub bumps: Vec<Bump>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub amp: f64,
    pub freq: i32,
    pub wave: [f64; 2],
    pub phase: f64,
}

impl ConeElement {
    pub fn constant(scale: f64) -> Self {
        Self { scale, bumps: Vec::new() }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        let mut s = 1.0;
        for b in &self.bumps {
            let arg = TAU * b.freq as f64 * x.base + b.wave[0] * x.fiber[0] + b.wave[1] * x.fiber[1] + b.phase;
            s += b.amp * arg.cos();
        }
        self.scale * s
    }
}

/// Draws a cone element whose leafwise seminorm stays below κ/2·inf and whose
/// Lipschitz constant stays below c/2·inf, so it lies in C(b, c, α).
pub fn random_cone_element<R: Rng>(params: &ConeParams, rng: &mut R) -> ConeElement {
    let scale = rng.gen_range(0.5..2.0);
    let nb = rng.gen_range(1..=3);
    let total: f64 = rng.gen_range(0.05..0.5);
    let raw: Vec<f64> = (0..nb).map(|_| rng.gen_range(0.2..1.0)).collect();
    let rs: f64 = raw.iter().sum();
    let spread = params.diam.powf(1.0 - params.alpha);
    let wmax = 0.9 * 0.5 * params.kappa * (1.0 - total) / (total * spread);
    let mut bumps: Vec<Bump> = raw
        .iter()
        .map(|a| {
            let norm = rng.gen_range(0.0..1.0) * wmax;
            let dir = rng.gen_range(0.0..TAU);
            Bump {
                amp: a / rs * total,
                freq: rng.gen_range(-3..=3),
                wave: [norm * dir.cos(), norm * dir.sin()],
                phase: rng.gen_range(0.0..TAU),
            }
        })
        .collect();
    loop {
        let s: f64 = bumps.iter().map(|b| b.amp).sum();
        let lip: f64 = bumps
            .iter()
            .map(|b| b.amp * (TAU * b.freq.abs() as f64 + b.wave[0].hypot(b.wave[1])))
            .sum();
        if lip * spread <= 0.45 * params.c * (1.0 - s) {
            break;
        }
        for b in &mut bumps {
            b.amp *= 0.5;
        }
    }
    ConeElement { scale, bumps }
}

/// Sampling sizes for the cone experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeSampling {
    pub depth: usize,
    pub leaves: usize,
    pub densities: usize,
    pub leaf_pairs: usize,
    pub elements: usize,
}

impl Default for ConeSampling {
    fn default() -> Self {
        Self { depth: 6, leaves: 6, densities: 10, leaf_pairs: 12, elements: 50 }
    }
}

/// Leaves with density families and matched leaf pairs shared by all checks.
#[derive(Clone, Debug)]
pub struct ConeProbe {
    pub sets: Vec<DensitySet>,
    pub pairs: Vec<LeafPair>,
}

impl ConeProbe {
    pub fn build(sys: &SkewProduct, params: &ConeParams, cfg: &ConeSampling, seed: u64) -> Result<Self> {
        let sets = (0..cfg.leaves)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream(seed, TAG_CONE, k as u64);
                let y: f64 = rng.gen_range(0.0..1.0);
                let quad = build_quadrature(sys, y, cfg.depth)?;
                DensitySet::build(quad, params, cfg.densities, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        let pairs = (0..cfg.leaf_pairs)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream(seed, TAG_CONE, (1 << 32) + k as u64);
                let y: f64 = rng.gen_range(0.0..0.9);
                let dy: f64 = rng.gen_range(1e-3..0.1);
                LeafPair::new(
                    build_quadrature(sys, y, cfg.depth)?,
                    build_quadrature(sys, y + dy, cfg.depth)?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { sets, pairs })
    }

    pub fn condition_b<F>(&self, phi: &F, threshold: f64) -> MarginReport
    where
        F: Fn(&ItineraryPoint) -> f64 + Sync,
    {
        let reps: Vec<MarginReport> = self
            .sets
            .par_iter()
            .map(|s| check_condition_b(phi, s, threshold))
            .collect();
        MarginReport::merge(&reps)
    }

    pub fn condition_c<F>(&self, phi: &F, alpha: f64, threshold: f64) -> MarginReport
    where
        F: Fn(&ItineraryPoint) -> f64 + Sync,
    {
        check_condition_c(phi, &self.pairs, alpha, threshold)
    }

    /// Θ₊(φ, ψ) = log(sup R / inf R), R = ∫φρ / ∫ψρ over all sampled leaves and densities.
    pub fn theta_plus<F, G>(&self, phi: &F, psi: &G) -> f64
    where
        F: Fn(&ItineraryPoint) -> f64 + Sync,
        G: Fn(&ItineraryPoint) -> f64 + Sync,
    {
        let (lo, hi) = self
            .sets
            .par_iter()
            .map(|s| {
                let a: Vec<f64> = s.quad.nodes.iter().map(phi).collect();
                let b: Vec<f64> = s.quad.nodes.iter().map(psi).collect();
                s.integrals(&a)
                    .iter()
                    .zip(s.integrals(&b))
                    .map(|(x, y)| x / y)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| (l.min(r), h.max(r)))
            })
            .reduce(
                || (f64::INFINITY, f64::NEG_INFINITY),
                |(a, b), (c, d)| (a.min(c), b.max(d)),
            );
        if lo <= 0.0 {
            return f64::INFINITY;
        }
        (hi / lo).ln().max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementMargins {
    pub b_before: f64,
    pub b_after: f64,
    pub c_before: f64,
    pub c_after: f64,
    pub in_cone: bool,
    pub image_in_cone: bool,
}

/// Draws cone elements and checks that their images satisfy (B), (C) at σb, σc.
pub fn check_invariance(
    sys: &SkewProduct,
    params: &ConeParams,
    pot: &Potential,
    probe: &ConeProbe,
    elements: usize,
    seed: u64,
) -> Result<Vec<ElementMargins>> {
    if !pot.is_constant() {
        return Err(Error::NonConstantPotential);
    }
    (0..elements)
        .map(|k| {
            let mut rng = stream(seed, TAG_CONE, (2 << 32) + k as u64);
            let el = random_cone_element(params, &mut rng);
            let phi = |x: &ItineraryPoint| el.eval(&x.point());
            let lphi = |x: &ItineraryPoint| apply_transfer(sys, |p: &Point| el.eval(p), x, pot).unwrap_or(f64::NAN);
            let bb = probe.condition_b(&phi, params.b);
            let cb = probe.condition_c(&phi, params.alpha, params.c);
            let ba = probe.condition_b(&lphi, params.sigma * params.b);
            let ca = probe.condition_c(&lphi, params.alpha, params.sigma * params.c);
            Ok(ElementMargins {
                b_before: bb.max_ratio,
                b_after: ba.max_ratio,
                c_before: cb.max_ratio,
                c_after: ca.max_ratio,
                in_cone: bb.holds && cb.holds,
                image_in_cone: ba.holds && ca.holds,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiameterReport {
    pub pairs: usize,
    pub theta_plus_max: f64,
    pub delta_est: f64,
    pub tau_est: f64,
    pub theta_plus_bound: f64,
    pub delta_bound: f64,
    pub tau_bound: f64,
    /// e^{−Δ_bound}, i.e. 1 − τ_bound without cancellation.
    pub gap_bound: f64,
    pub certified: bool,
}

/// Sampled Θ₊(Lφ, Lψ) over random cone pairs, with the closed-form certificate.
pub fn estimate_diameter(
    sys: &SkewProduct,
    params: &ConeParams,
    pot: &Potential,
    probe: &ConeProbe,
    pairs: usize,
    seed: u64,
) -> Result<DiameterReport> {
    if !pot.is_constant() {
        return Err(Error::NonConstantPotential);
    }
    let mut worst: f64 = 0.0;
    for k in 0..pairs {
        let mut rng = stream(seed, TAG_CONE, (3 << 32) + k as u64);
        let a = random_cone_element(params, &mut rng);
        let b = if k == 0 { a.clone() } else { random_cone_element(params, &mut rng) };
        let la = |x: &ItineraryPoint| apply_transfer(sys, |p: &Point| a.eval(p), x, pot).unwrap_or(f64::NAN);
        let lb = |x: &ItineraryPoint| apply_transfer(sys, |p: &Point| b.eval(p), x, pot).unwrap_or(f64::NAN);
        worst = worst.max(probe.theta_plus(&la, &lb));
    }
    let corr = 2.0 * ((1.0 + params.sigma) / (1.0 - params.sigma)).ln();
    let delta_est = worst + corr;
    Ok(DiameterReport {
        pairs,
        theta_plus_max: worst,
        delta_est,
        tau_est: cones::birkhoff_bound(delta_est),
        theta_plus_bound: params.theta_plus_bound,
        delta_bound: params.delta_bound,
        tau_bound: cones::birkhoff_bound(params.delta_bound),
        gap_bound: (-params.delta_bound).exp(),
        certified: worst <= params.theta_plus_bound,
    })
}

/// One trial of the density-cone contraction: θ before and the worst θ_j after.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionTrial {
    pub theta_before: f64,
    pub theta_after: f64,
    pub bound: f64,
    pub pushed_in_cone: bool,
}

pub fn density_contraction_trials(
    sys: &SkewProduct,
    params: &ConeParams,
    pot: &Potential,
    depth: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<ContractionTrial>> {
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, TAG_CONE, (4 << 32) + k as u64);
            let y: f64 = rng.gen_range(0.0..1.0);
            let quad = build_quadrature(sys, y, depth)?;
            let cone = leaf_cone(&quad, params.kappa, params.alpha)?;
            let r1 = random_density(&quad, params.kappa, params.alpha, &mut rng);
            let r2 = random_density(&quad, params.kappa, params.alpha, &mut rng);
            let before = cones::theta(&r1, &r2, &cone)?;
            let mut after: f64 = 0.0;
            let mut inside = true;
            for j in 0..sys.degree() {
                let (sub, p1) = push_density(sys, &quad, &r1, j, pot)?;
                let (_, p2) = push_density(sys, &quad, &r2, j, pot)?;
                let sub_cone = leaf_cone(&sub, params.lambda * params.kappa, params.alpha)?;
                inside &= cones::in_cone(&p1, &sub_cone) && cones::in_cone(&p2, &sub_cone);
                let wide = sub_cone.with_kappa(params.kappa);
                after = after.max(cones::theta(&p1, &p2, &wide)?);
            }
            Ok(ContractionTrial {
                theta_before: before,
                theta_after: after,
                bound: params.lambda1 * before,
                pushed_in_cone: inside,
            })
        })
        .collect()
}

/// Result of shifting an observable into the main cone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftReport {
    /// Shift applied to the observable.
    pub k: f64,
    /// sup_γ |φ|_γ|_α / κ − inf φ.
    pub k_density: f64,
    pub inf: f64,
    pub sup: f64,
    pub seminorm: f64,
    pub leaf_seminorm: f64,
}

/// φ + K as an observable.
#[derive(Clone, Copy, Debug)]
pub struct Lifted<O> {
    pub inner: O,
    pub k: f64,
}

impl<O: crate::Observable> crate::Observable for Lifted<O> {
    fn eval(&self, x: &Point) -> f64 {
        self.inner.eval(x) + self.k
    }
}

/// Shifts φ by the largest of the (A), (B), (C) thresholds, with a 1% margin.
///
/// Sup, inf and the seminorms are estimated on `probe` points and on small
/// displacements of them in the base and fiber directions.
pub fn lift_to_cone<O: crate::Observable + Clone>(
    phi: &O,
    params: &ConeParams,
    probe: &[Point],
) -> (Lifted<O>, LiftReport) {
    let a = params.alpha;
    let h = 1e-4;
    let mut inf = f64::INFINITY;
    let mut sup = f64::NEG_INFINITY;
    let mut semi: f64 = 0.0;
    let mut leaf: f64 = 0.0;
    for x in probe {
        let v = phi.eval(x);
        inf = inf.min(v);
        sup = sup.max(v);
        let shifted = Point::new((x.base + h).rem_euclid(1.0), x.fiber);
        semi = semi.max((phi.eval(&shifted) - v).abs() / h.powf(a));
        for dz in [[h, 0.0], [0.0, h]] {
            let y = Point::new(x.base, [x.fiber[0] + dz[0], x.fiber[1] + dz[1]]);
            let s = (phi.eval(&y) - v).abs() / h.powf(a);
            leaf = leaf.max(s);
            semi = semi.max(s);
        }
    }
    for (i, x) in probe.iter().enumerate().take(200) {
        for y in probe.iter().skip(i + 1).take(200) {
            let d = distance(x, y);
            if d > 0.0 {
                semi = semi.max((phi.eval(x) - phi.eval(y)).abs() / d.powf(a));
            }
        }
    }
    let osc = sup - inf;
    let da = params.diam.powf(a);
    let k1 = -inf;
    let k2 = 2.0 * (1.0 + params.kappa * da) * osc / params.b - inf;
    let k3 = semi / params.c - inf;
    let kmax = k1.max(k2).max(k3);
    let k = if kmax > 0.0 { 1.01 * kmax + 1e-12 } else { 0.0 };
    let k_density = leaf / params.kappa - inf;
    (
        Lifted { inner: phi.clone(), k },
        LiftReport { k, k_density, inf, sup, seminorm: semi, leaf_seminorm: leaf },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::make_doubling_solenoid;

    #[test]
    fn lambda1_at_half() {
        assert!((lambda1(0.5) - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn transfer_of_one_is_one() {
        let s = make_doubling_solenoid(0.05, 0.5).unwrap();
        let q = build_quadrature(&s, 0.37, 5).unwrap();
        for x in &q.nodes {
            assert_eq!(apply_transfer(&s, |_: &Point| 1.0, x, &Potential::default()).unwrap(), 1.0);
        }
    }

    #[test]
    fn transfer_needs_depth() {
        let s = make_doubling_solenoid(0.05, 0.5).unwrap();
        let q = build_quadrature(&s, 0.37, 0).unwrap();
        let r = apply_transfer(&s, |_: &Point| 1.0, &q.nodes[0], &Potential::default());
        assert!(matches!(r, Err(Error::Depth { .. })));
    }

    #[test]
    fn push_of_constant_density() {
        let s = make_doubling_solenoid(0.05, 0.5).unwrap();
        let q = build_quadrature(&s, 0.6, 4).unwrap();
        let rho = LeafDensity::constant(q.len(), 1.0, 1.0);
        let (_, r) = push_density(&s, &q, &rho, 1, &Potential::default()).unwrap();
        assert!(r.values.iter().all(|&v| v == 0.5));
        let bad = LeafDensity::constant(3, 1.0, 1.0);
        assert!(matches!(
            push_density(&s, &q, &bad, 0, &Potential::default()),
            Err(Error::NodeMismatch(_))
        ));
    }

    #[test]
    fn doubling_params_are_feasible() {
        let s = make_doubling_solenoid(0.05, 0.5).unwrap();
        let p = choose_cone_params(&ConeInputs::for_system(&s, 1.0, 0.0)).unwrap();
        p.validate().unwrap();
        assert!(p.sigma < 1.0);
        assert!(p.kappa * p.diam < p.lambda);
    }

    #[test]
    fn lambda_s_close_to_one_is_infeasible() {
        let inputs = ConeInputs {
            lambda_s: 0.999,
            alpha: 1.0,
            epsilon: 0.01,
            diam: 1.0,
            degree: 2,
            lambda_u_tilde: 0.5,
            l_tilde: 0.5,
        };
        assert!(matches!(choose_cone_params(&inputs), Err(Error::Infeasible(_))));
    }
}
