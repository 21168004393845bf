//! Symbolic model of the Markov-partition setting.
//!
//! Rectangles are the vertices of a transition multigraph whose entry
//! `counts[i][j]` is the number of edges `i → j`. A point is coded by a
//! two-sided edge path: the forward edges give the centre-unstable
//! coordinate `u = Σ e_k·|E|^{-(k+1)}`, the backward edges give the fiber
//! coordinate `z = Σ_{k≥1} λ_s^{k-1} o(e_{-k})`. The number of preimage leaves
//! of a leaf in rectangle `r` is the in-degree of `r`.

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leafmeasure::{integrate_values, LeafQuadrature, DEFAULT_NODE_BUDGET};
use crate::numerics::CompensatedSum;
use crate::observable::Observable;
use crate::rng::{stream, StreamRng, TAG_DFA};
use crate::statistics::{correlation_data, fit_decay, DecayReport, Estimate, OrbitSampler};
use crate::systems::{ItineraryPoint, Point};
use crate::transfer::{random_cone_element, ConeInputs, ConeParams, ConeProbe, DensitySet, Potential};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarkovSpec {
    pub counts: Vec<Vec<u32>>,
    pub good: Vec<bool>,
    pub zeta: f64,
    pub big_l: f64,
    pub lambda_s: f64,
    pub amplitude: f64,
}

impl Default for MarkovSpec {
    fn default() -> Self {
        Self {
            counts: vec![vec![2, 1], vec![1, 3]],
            good: vec![true, false],
            zeta: 0.5,
            big_l: 1.1,
            lambda_s: 0.05,
            amplitude: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovSystem {
    pub spec: MarkovSpec,
    pub edges: Vec<Edge>,
    pub out_edges: Vec<Vec<usize>>,
    pub in_edges: Vec<Vec<usize>>,
    pub offsets: Vec<[f64; 2]>,
    /// Stationary law of the rectangle chain with uniform out-edges.
    pub stationary: Vec<f64>,
    /// First n with a positive power of the transition matrix.
    pub mixing_power: usize,
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

impl MarkovSystem {
    pub fn new(spec: MarkovSpec) -> Result<Self> {
        let p = spec.counts.len();
        if p < 2 {
            return Err(Error::Config("need at least two rectangles".into()));
        }
        if spec.counts.iter().any(|r| r.len() != p) || spec.good.len() != p {
            return Err(Error::Config("transition matrix and flags must be p × p and p".into()));
        }
        if !spec.good.iter().any(|&g| g) {
            return Err(Error::Config("at least one rectangle must be good".into()));
        }
        if !(spec.zeta > 0.0 && spec.zeta < 1.0) || spec.big_l < 1.0 {
            return Err(Error::Config("need 0 < ζ < 1 and L ≥ 1".into()));
        }
        if !(spec.lambda_s > 0.0 && spec.lambda_s < 1.0) || !(spec.amplitude > 0.0) {
            return Err(Error::Config("need 0 < λ_s < 1 and a positive amplitude".into()));
        }
        let mut edges = Vec::new();
        for (i, row) in spec.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                for _ in 0..c {
                    edges.push(Edge { source: i, target: j });
                }
            }
        }
        if edges.len() > 255 {
            return Err(Error::Config("at most 255 edges are supported".into()));
        }
        let mut out_edges = vec![Vec::new(); p];
        let mut in_edges = vec![Vec::new(); p];
        for (k, e) in edges.iter().enumerate() {
            out_edges[e.source].push(k);
            in_edges[e.target].push(k);
        }
        if out_edges.iter().chain(&in_edges).any(|v| v.is_empty()) {
            return Err(Error::Config("every rectangle needs incoming and outgoing transitions".into()));
        }
        let adj: Vec<Vec<f64>> = spec
            .counts
            .iter()
            .map(|r| r.iter().map(|&c| f64::from(u8::from(c > 0))).collect())
            .collect();
        let mut pow = adj.clone();
        let bound = (p - 1) * (p - 1) + 1;
        let mut mixing_power = 0;
        for n in 1..=bound {
            if pow.iter().flatten().all(|&v| v > 0.0) {
                mixing_power = n;
                break;
            }
            pow = mat_mul(&pow, &adj);
            for v in pow.iter_mut().flatten() {
                *v = v.min(1.0);
            }
        }
        if mixing_power == 0 {
            return Err(Error::Config("transition matrix is not mixing (no positive power)".into()));
        }
        let m = edges.len();
        let offsets = (0..m)
            .map(|k| {
                let a = TAU * k as f64 / m as f64;
                [spec.amplitude * a.cos(), spec.amplitude * a.sin()]
            })
            .collect();
        let mut ms = Self {
            spec,
            edges,
            out_edges,
            in_edges,
            offsets,
            stationary: Vec::new(),
            mixing_power,
        };
        ms.stationary = ms.compute_stationary();
        Ok(ms)
    }

    pub fn rectangles(&self) -> usize {
        self.spec.counts.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of preimage leaves of a leaf in rectangle `r`.
    pub fn branch_count(&self, r: usize) -> usize {
        self.in_edges[r].len()
    }

    pub fn p_max(&self) -> usize {
        (0..self.rectangles()).map(|r| self.branch_count(r)).max().unwrap_or(0)
    }

    pub fn lambda_s(&self) -> f64 {
        self.spec.lambda_s
    }

    pub fn fiber_radius(&self) -> f64 {
        self.spec.amplitude / (1.0 - self.spec.lambda_s)
    }

    pub fn diam(&self) -> f64 {
        1f64.max(2.0 * self.fiber_radius())
    }

    pub fn is_balanced(&self) -> bool {
        (0..self.rectangles()).all(|r| self.in_edges[r].len() == self.out_edges[r].len())
    }

    /// Row-stochastic rectangle chain P[i][j] = counts[i][j]/outdeg(i).
    pub fn transition(&self) -> Vec<Vec<f64>> {
        self.spec
            .counts
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let d = self.out_edges[i].len() as f64;
                row.iter().map(|&c| f64::from(c) / d).collect()
            })
            .collect()
    }

    fn compute_stationary(&self) -> Vec<f64> {
        let p = self.rectangles();
        let t = self.transition();
        let mut pi = vec![1.0 / p as f64; p];
        for _ in 0..100_000 {
            let next: Vec<f64> = (0..p).map(|j| (0..p).map(|i| pi[i] * t[i][j]).sum()).collect();
            let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            pi = next;
            if diff < 1e-16 {
                break;
            }
        }
        let s: f64 = pi.iter().sum();
        pi.iter().map(|v| v / s).collect()
    }

    /// Rectangle containing the point with centre-unstable coordinate `u`.
    pub fn rectangle_of(&self, u: f64) -> usize {
        let m = self.edge_count();
        let e = ((u * m as f64) as usize).min(m - 1);
        self.edges[e].source
    }

    /// Fiber coordinate from a backward edge word, `backward[0]` being e_{-1}.
    pub fn fiber_of(&self, backward: &[u8]) -> [f64; 2] {
        let lam = self.spec.lambda_s;
        let mut z = [0.0, 0.0];
        for &e in backward.iter().rev() {
            let o = self.offsets[e as usize];
            z = [o[0] + lam * z[0], o[1] + lam * z[1]];
        }
        z
    }

    /// Centre-unstable coordinate from a forward edge word.
    pub fn u_of(&self, forward: &[usize]) -> f64 {
        let m = self.edge_count() as f64;
        forward.iter().rev().fold(0.0, |u, &e| (e as f64 + u) / m)
    }

    /// A random admissible `u` in rectangle `r`.
    pub fn random_leaf<R: Rng>(&self, r: usize, rng: &mut R) -> f64 {
        let mut word = Vec::with_capacity(30);
        let mut cur = r;
        for _ in 0..30 {
            let outs = &self.out_edges[cur];
            let e = outs[rng.gen_range(0..outs.len())];
            word.push(e);
            cur = self.edges[e].target;
        }
        self.u_of(&word)
    }

    /// f⁻¹ of a node: the first backward edge moves to the forward word.
    pub fn preimage(&self, x: &ItineraryPoint) -> Result<ItineraryPoint> {
        if x.depth == 0 {
            return Err(Error::Depth { need: 1, have: 0 });
        }
        let e = x.itinerary[0];
        let rest = x.itinerary[1..].to_vec();
        Ok(ItineraryPoint {
            base: (f64::from(e) + x.base) / self.edge_count() as f64,
            fiber: self.fiber_of(&rest),
            depth: x.depth - 1,
            itinerary: rest,
        })
    }

    /// Contraction factor (ζ^α + (p−1)(1+(L−1)^α)L^α)/p from the good/bad constants.
    pub fn expansion_factor(&self, alpha: f64) -> f64 {
        let p = self.p_max() as f64;
        let l = self.spec.big_l;
        (self.spec.zeta.powf(alpha) + (p - 1.0) * (1.0 + (l - 1.0).powf(alpha)) * l.powf(alpha)) / p
    }

    /// Cone inputs for the symbolic geometry: every inverse branch contracts u by 1/|E|.
    pub fn cone_inputs(&self, alpha: f64) -> ConeInputs {
        let c = 1.0 / self.edge_count() as f64;
        ConeInputs {
            lambda_s: self.spec.lambda_s,
            alpha,
            epsilon: 0.0,
            diam: self.diam(),
            degree: self.p_max(),
            lambda_u_tilde: c,
            l_tilde: c,
        }
    }
}

/// Leaf measure with product weights 1/(p_{i₀}·p_{i₁}⋯p_{i_{n−1}}).
#[derive(Clone, Debug, PartialEq)]
pub struct VariableLeafQuadrature {
    pub rect: usize,
    /// Nodes carry the backward edge word as their itinerary.
    pub quad: LeafQuadrature,
    /// (edge, node range) for every preimage leaf.
    pub blocks: Vec<(usize, std::ops::Range<usize>)>,
}

fn variable_nodes(ms: &MarkovSystem, r: usize, u: f64, n: usize, out: &mut Vec<(ItineraryPoint, f64)>) {
    if n == 0 {
        out.push((
            ItineraryPoint { base: u, itinerary: Vec::new(), fiber: [0.0, 0.0], depth: 0 },
            1.0,
        ));
        return;
    }
    let m = ms.edge_count() as f64;
    let pr = ms.branch_count(r) as f64;
    let lam = ms.spec.lambda_s;
    for &e in &ms.in_edges[r] {
        let start = out.len();
        variable_nodes(ms, ms.edges[e].source, (e as f64 + u) / m, n - 1, out);
        let o = ms.offsets[e];
        for (node, w) in &mut out[start..] {
            node.fiber = [o[0] + lam * node.fiber[0], o[1] + lam * node.fiber[1]];
            node.itinerary.insert(0, e as u8);
            node.depth += 1;
            node.base = u;
            *w /= pr;
        }
    }
}

fn count_nodes(ms: &MarkovSystem, r: usize, n: usize, memo: &mut Vec<Vec<Option<u128>>>) -> u128 {
    if n == 0 {
        return 1;
    }
    if let Some(v) = memo[n][r] {
        return v;
    }
    let v = ms.in_edges[r]
        .iter()
        .map(|&e| count_nodes(ms, ms.edges[e].source, n - 1, memo))
        .fold(0u128, |a, b| a.saturating_add(b));
    memo[n][r] = Some(v);
    v
}

pub fn build_variable_quadrature(ms: &MarkovSystem, rect: usize, u: f64, depth: usize) -> Result<VariableLeafQuadrature> {
    build_variable_quadrature_with_budget(ms, rect, u, depth, DEFAULT_NODE_BUDGET)
}

pub fn build_variable_quadrature_with_budget(
    ms: &MarkovSystem,
    rect: usize,
    u: f64,
    depth: usize,
    budget: usize,
) -> Result<VariableLeafQuadrature> {
    if rect >= ms.rectangles() {
        return Err(Error::Precondition(format!("rectangle {rect} does not exist")));
    }
    let mut memo = vec![vec![None; ms.rectangles()]; depth + 1];
    let required = count_nodes(ms, rect, depth, &mut memo);
    if required > budget as u128 {
        return Err(Error::Budget { required, budget });
    }
    let mut raw = Vec::with_capacity(required as usize);
    variable_nodes(ms, rect, u, depth, &mut raw);
    let mut blocks = Vec::new();
    if depth > 0 {
        let mut start = 0;
        for &e in &ms.in_edges[rect] {
            let len = count_nodes(ms, ms.edges[e].source, depth - 1, &mut memo) as usize;
            blocks.push((e, start..start + len));
            start += len;
        }
    }
    let (nodes, weights) = raw.into_iter().unzip();
    Ok(VariableLeafQuadrature {
        rect,
        quad: LeafQuadrature {
            base: u,
            depth,
            degree: ms.branch_count(rect),
            nodes,
            weights,
        },
        blocks,
    })
}

/// Lφ on a node of the symbolic model.
pub fn apply_transfer_dfa<F>(ms: &MarkovSystem, phi: F, x: &ItineraryPoint, pot: &Potential) -> Result<f64>
where
    F: Fn(&Point) -> f64,
{
    let y = ms.preimage(x)?;
    let p = y.point();
    Ok(phi(&p) * pot.eval(&p).exp())
}

/// ρ_j = (1/p_γ)·ρ∘f·e^{φ_pot} on the preimage leaf of block `j`.
pub fn push_density_dfa(
    ms: &MarkovSystem,
    leaf: &VariableLeafQuadrature,
    rho: &[f64],
    j: usize,
    pot: &Potential,
) -> Result<(VariableLeafQuadrature, Vec<f64>)> {
    if rho.len() != leaf.quad.len() {
        return Err(Error::NodeMismatch("density length differs from the node count".into()));
    }
    let (e, range) = leaf
        .blocks
        .get(j)
        .cloned()
        .ok_or_else(|| Error::Precondition(format!("leaf has no preimage block {j}")))?;
    let m = ms.edge_count() as f64;
    let sub = build_variable_quadrature(ms, ms.edges[e].source, (e as f64 + leaf.quad.base) / m, leaf.quad.depth - 1)?;
    let pg = ms.branch_count(leaf.rect) as f64;
    let vals = sub
        .quad
        .nodes
        .iter()
        .zip(&rho[range])
        .map(|(x, r)| r / pg * pot.eval(&x.point()).exp())
        .collect();
    Ok((sub, vals))
}

/// Σ_j ∫_{γ_j} φ ρ_j dμ_{γ_j}.
pub fn transfer_leaf_integral_dfa<F>(
    ms: &MarkovSystem,
    phi: F,
    rho: &[f64],
    leaf: &VariableLeafQuadrature,
    pot: &Potential,
) -> Result<f64>
where
    F: Fn(&Point) -> f64,
{
    if leaf.quad.depth == 0 {
        return Err(Error::Depth { need: 1, have: 0 });
    }
    let mut total = CompensatedSum::new();
    for j in 0..leaf.blocks.len() {
        let (sub, rj) = push_density_dfa(ms, leaf, rho, j, pot)?;
        let vals: Vec<f64> = sub.quad.nodes.iter().map(|x| phi(&x.point())).collect();
        total.add(integrate_values(&vals, &rj, &sub.quad));
    }
    Ok(total.value())
}

/// ∫_γ L(φ)ρ dμ_γ evaluated node by node.
pub fn transfer_leaf_integral_dfa_direct<F>(
    ms: &MarkovSystem,
    phi: F,
    rho: &[f64],
    leaf: &VariableLeafQuadrature,
    pot: &Potential,
) -> Result<f64>
where
    F: Fn(&Point) -> f64,
{
    let vals: Vec<f64> = leaf
        .quad
        .nodes
        .iter()
        .map(|x| apply_transfer_dfa(ms, &phi, x, pot))
        .collect::<Result<_>>()?;
    Ok(integrate_values(&vals, rho, &leaf.quad))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DfaDiameter {
    pub c_tilde: f64,
    pub bound: f64,
    pub theta_plus_max: f64,
    pub pairs: usize,
    pub within: bool,
}

/// 2(p_max+1)·C̃ with C̃ = p_max(1 + b log((1+λ)/(1−λ)))²(1 + max{κ,c}·diam^α)².
pub fn diameter_bound_closed_form(params: &ConeParams, ms: &MarkovSystem) -> (f64, f64) {
    let pm = ms.p_max() as f64;
    let r = ((1.0 + params.lambda) / (1.0 - params.lambda)).ln();
    let c_tilde = pm * (1.0 + params.b * r).powi(2) * (1.0 + params.kappa.max(params.c) * params.diam.powf(params.alpha)).powi(2);
    (c_tilde, 2.0 * (pm + 1.0) * c_tilde)
}

/// Probe of leaves in every rectangle, with density families.
pub fn dfa_probe(ms: &MarkovSystem, params: &ConeParams, depth: usize, leaves_per_rect: usize, densities: usize, seed: u64) -> Result<ConeProbe> {
    let jobs: Vec<(usize, usize)> = (0..ms.rectangles())
        .flat_map(|r| (0..leaves_per_rect).map(move |k| (r, k)))
        .collect();
    let sets = jobs
        .par_iter()
        .enumerate()
        .map(|(idx, &(r, _))| {
            let mut rng = stream(seed, TAG_DFA, idx as u64);
            let u = ms.random_leaf(r, &mut rng);
            let leaf = build_variable_quadrature(ms, r, u, depth)?;
            DensitySet::build(leaf.quad, params, densities, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConeProbe { sets, pairs: Vec::new() })
}

/// Closed-form bound together with sampled Θ₊(Lφ, Lψ) over random cone pairs.
pub fn diameter_bound_dfa(
    params: &ConeParams,
    ms: &MarkovSystem,
    probe: &ConeProbe,
    pairs: usize,
    seed: u64,
) -> DfaDiameter {
    let (c_tilde, bound) = diameter_bound_closed_form(params, ms);
    let pot = Potential::default();
    let worst = (0..pairs)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, TAG_DFA, (1 << 40) + k as u64);
            let a = random_cone_element(params, &mut rng);
            let b = if k == 0 { a.clone() } else { random_cone_element(params, &mut rng) };
            let la = |x: &ItineraryPoint| apply_transfer_dfa(ms, |p: &Point| a.eval(p), x, &pot).unwrap_or(f64::NAN);
            let lb = |x: &ItineraryPoint| apply_transfer_dfa(ms, |p: &Point| b.eval(p), x, &pot).unwrap_or(f64::NAN);
            probe.theta_plus(&la, &lb)
        })
        .reduce(|| 0.0, f64::max);
    DfaDiameter {
        c_tilde,
        bound,
        theta_plus_max: worst,
        pairs,
        within: worst <= bound,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub rect: usize,
    pub word: Vec<usize>,
    pub mass: f64,
}

/// Mass 1/p per rectangle, split equally among the forward refinements.
pub fn quotient_mass_distribution(ms: &MarkovSystem, depth: usize) -> Vec<Cylinder> {
    let p = ms.rectangles();
    let mut level: Vec<Cylinder> = (0..p)
        .map(|r| Cylinder { rect: r, word: Vec::new(), mass: 1.0 / p as f64 })
        .collect();
    for _ in 0..depth {
        level = level
            .into_iter()
            .flat_map(|c| {
                let end = c.word.last().map_or(c.rect, |&e| ms.edges[e].target);
                let outs = &ms.out_edges[end];
                let share = c.mass / outs.len() as f64;
                outs.iter()
                    .map(|&e| {
                        let mut word = c.word.clone();
                        word.push(e);
                        Cylinder { rect: c.rect, word, mass: share }
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    level
}

/// Largest child/parent mass ratio of the refinement.
pub fn shrink_factor(ms: &MarkovSystem) -> f64 {
    ms.out_edges.iter().map(|v| 1.0 / v.len() as f64).fold(0.0, f64::max)
}

/// μ-orbits of the symbolic model: rectangle from the stationary law,
/// forward edges uniform among out-edges, backward edges uniform among in-edges.
#[derive(Clone, Copy, Debug)]
pub struct DfaSampler<'a> {
    pub ms: &'a MarkovSystem,
    pub past: usize,
    pub tail: usize,
}

impl<'a> DfaSampler<'a> {
    pub fn new(ms: &'a MarkovSystem) -> Self {
        Self { ms, past: 30, tail: 30 }
    }
}

impl OrbitSampler for DfaSampler<'_> {
    fn orbit(&self, rng: &mut StreamRng, len: usize, out: &mut Vec<Point>) {
        let ms = self.ms;
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut r = ms.rectangles() - 1;
        for (i, &pi) in ms.stationary.iter().enumerate() {
            acc += pi;
            if u < acc {
                r = i;
                break;
            }
        }
        let mut back = Vec::with_capacity(self.past);
        let mut cur = r;
        for _ in 0..self.past {
            let ins = &ms.in_edges[cur];
            let e = ins[rng.gen_range(0..ins.len())];
            back.push(e as u8);
            cur = ms.edges[e].source;
        }
        let total = len + self.tail;
        let mut fwd = Vec::with_capacity(total);
        cur = r;
        for _ in 0..total {
            let outs = &ms.out_edges[cur];
            let e = outs[rng.gen_range(0..outs.len())];
            fwd.push(e);
            cur = ms.edges[e].target;
        }
        let m = ms.edge_count() as f64;
        let mut us = vec![0.0; len + 1];
        let mut acc_u = 0.0;
        for k in (0..total).rev() {
            acc_u = (fwd[k] as f64 + acc_u) / m;
            if k <= len {
                us[k] = acc_u;
            }
        }
        let lam = ms.spec.lambda_s;
        let mut z = ms.fiber_of(&back);
        out.clear();
        out.push(Point::new(us[0], z));
        for k in 0..len {
            let o = ms.offsets[fwd[k]];
            z = [o[0] + lam * z[0], o[1] + lam * z[1]];
            out.push(Point::new(us[k + 1], z));
        }
    }
}

/// Observable depending on the rectangle only.
#[derive(Clone, Debug)]
pub struct RectangleObservable<'a> {
    pub ms: &'a MarkovSystem,
    pub values: Vec<f64>,
}

impl Observable for RectangleObservable<'_> {
    fn eval(&self, x: &Point) -> f64 {
        self.values[self.ms.rectangle_of(x.base)]
    }
}

/// Exact correlation of rectangle observables from powers of the chain.
pub fn markov_oracle(ms: &MarkovSystem, phi: &[f64], psi: &[f64], n: usize) -> f64 {
    let p = ms.rectangles();
    let t = ms.transition();
    let mut pw: Vec<Vec<f64>> = (0..p).map(|i| (0..p).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _ in 0..n {
        pw = mat_mul(&pw, &t);
    }
    let pi = &ms.stationary;
    let mut s = 0.0;
    for i in 0..p {
        for j in 0..p {
            s += pi[i] * psi[i] * pw[i][j] * phi[j];
        }
    }
    let mphi: f64 = (0..p).map(|i| pi[i] * phi[i]).sum();
    let mpsi: f64 = (0..p).map(|i| pi[i] * psi[i]).sum();
    s - mphi * mpsi
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DfaDecayResult {
    pub correlations: Vec<Estimate>,
    pub report: DecayReport,
    pub balanced: bool,
}

/// Correlation decay of φ, ψ along μ-orbits of the symbolic model.
pub fn dfa_decay_experiment<O1, O2>(ms: &MarkovSystem, phi: &O1, psi: &O2, max_lag: usize, n: usize, seed: u64) -> DfaDecayResult
where
    O1: Observable,
    O2: Observable,
{
    let sampler = DfaSampler::new(ms);
    let data = correlation_data(&sampler, phi, psi, max_lag, n, seed ^ TAG_DFA);
    let correlations = data.profile();
    let lags: Vec<usize> = (0..=max_lag).collect();
    let report = fit_decay(&lags, &correlations);
    DfaDecayResult { correlations, report, balanced: ms.is_balanced() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_system_structure() {
        let ms = MarkovSystem::new(MarkovSpec::default()).unwrap();
        assert_eq!(ms.edge_count(), 7);
        assert_eq!(ms.branch_count(0), 3);
        assert_eq!(ms.branch_count(1), 4);
        assert!(ms.is_balanced());
        assert!((ms.stationary[0] - 3.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_mixing() {
        let spec = MarkovSpec { counts: vec![vec![0, 1], vec![1, 0]], ..MarkovSpec::default() };
        assert!(MarkovSystem::new(spec).is_err());
        let spec = MarkovSpec { good: vec![false, false], ..MarkovSpec::default() };
        assert!(MarkovSystem::new(spec).is_err());
    }

    #[test]
    fn depth_zero_cylinders() {
        let ms = MarkovSystem::new(MarkovSpec::default()).unwrap();
        let c = quotient_mass_distribution(&ms, 0);
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|c| c.mass == 0.5));
    }
}
