//! Maximal-entropy measure μ = μ_γ × ν: quotient measure, samplers, entropy estimators.

use std::collections::HashMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{circle_dist, linear_fit, CompensatedSum};
use crate::rng::{par_blocks, stream, StreamRng, TAG_ENTROPY, TAG_SAMPLE};
use crate::systems::{distance, fiber_dist, BaseKind, BaseMap, ItineraryPoint, Point, SkewProduct};

pub const DEFAULT_GRID: usize = 1 << 14;
pub const DEFAULT_MAX_ITER: usize = 20_000;
const STATIONARY_TOL: f64 = 1e-11;
const SAMPLE_BLOCK: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum QuotientRepr {
    /// Lebesgue measure on the circle.
    Uniform,
    /// Cell masses on a uniform grid, linear CDF inside each cell.
    Ulam { masses: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientMeasure {
    pub repr: QuotientRepr,
    pub grid: usize,
    /// Eigenvalue of the unnormalized dual operator.
    pub r: f64,
    pub residual: f64,
    pub iterations: usize,
    cdf: Vec<f64>,
}

impl QuotientMeasure {
    pub fn uniform(degree: usize) -> Self {
        Self {
            repr: QuotientRepr::Uniform,
            grid: 1,
            r: degree as f64,
            residual: 0.0,
            iterations: 0,
            cdf: vec![0.0, 1.0],
        }
    }

    fn cdf_table(masses: &[f64]) -> Vec<f64> {
        let mut cdf = Vec::with_capacity(masses.len() + 1);
        let mut s = CompensatedSum::new();
        cdf.push(0.0);
        for &m in masses {
            s.add(m);
            cdf.push(s.value());
        }
        cdf
    }

    pub fn total_mass(&self) -> f64 {
        match &self.repr {
            QuotientRepr::Uniform => 1.0,
            QuotientRepr::Ulam { masses } => crate::numerics::compensated_sum(masses.iter().copied()),
        }
    }

    /// ν([0, x]).
    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match &self.repr {
            QuotientRepr::Uniform => x,
            QuotientRepr::Ulam { masses } => cdf_eval(&self.cdf, masses, x),
        }
    }

    pub fn inverse_cdf(&self, u: f64) -> f64 {
        match &self.repr {
            QuotientRepr::Uniform => u,
            QuotientRepr::Ulam { masses } => {
                let n = masses.len();
                let k = self.cdf.partition_point(|&c| c <= u).clamp(1, n) - 1;
                let m = masses[k];
                let frac = if m > 0.0 { ((u - self.cdf[k]) / m).clamp(0.0, 1.0) } else { 0.5 };
                ((k as f64 + frac) / n as f64).min(1.0 - f64::EPSILON)
            }
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        self.inverse_cdf(rng.gen::<f64>())
    }

    /// ∫ u dν, midpoint rule on the grid (64 points per cell for the uniform case).
    pub fn integrate<F: Fn(f64) -> f64>(&self, u: F) -> f64 {
        let mut s = CompensatedSum::new();
        match &self.repr {
            QuotientRepr::Uniform => {
                let n = 1 << 16;
                for k in 0..n {
                    s.add(u((k as f64 + 0.5) / n as f64) / n as f64);
                }
            }
            QuotientRepr::Ulam { masses } => {
                let n = masses.len() as f64;
                for (k, m) in masses.iter().enumerate() {
                    let a = k as f64 / n;
                    let h = 1.0 / n;
                    s.add(m * 0.5 * (u(a + 0.25 * h) + u(a + 0.75 * h)));
                }
            }
        }
        s.value()
    }
}

fn cdf_eval(cdf: &[f64], masses: &[f64], x: f64) -> f64 {
    let n = masses.len();
    let t = x * n as f64;
    let k = (t.floor() as usize).min(n - 1);
    cdf[k] + masses[k] * (t - k as f64)
}

/// Maximal-entropy measure of the base: exact for the doubling map, Ulam
/// power iteration of the normalized dual operator otherwise.
pub fn quotient_mem(base: &BaseMap, grid: usize) -> Result<QuotientMeasure> {
    quotient_mem_with(base, grid, DEFAULT_MAX_ITER)
}

pub fn quotient_mem_with(base: &BaseMap, grid: usize, max_iter: usize) -> Result<QuotientMeasure> {
    if matches!(base.kind, BaseKind::Doubling) {
        return Ok(QuotientMeasure::uniform(base.degree()));
    }
    if grid < 2 {
        return Err(Error::Config("Ulam grid needs at least two cells".into()));
    }
    let p = base.degree();
    // images of each cell under each branch, as intervals of [0,1]
    let images: Vec<Vec<(f64, f64)>> = (0..grid)
        .into_par_iter()
        .map(|i| {
            let (a, b) = (i as f64 / grid as f64, (i + 1) as f64 / grid as f64);
            (0..p)
                .filter_map(|j| {
                    let (lo, hi) = base.branch_domain(j);
                    let (a, b) = (a.max(lo), b.min(hi));
                    (a < b).then(|| (base.lift(j, a).clamp(0.0, 1.0), base.lift(j, b).clamp(0.0, 1.0)))
                })
                .collect()
        })
        .collect();
    let mut masses = vec![1.0 / grid as f64; grid];
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let cdf = QuotientMeasure::cdf_table(&masses);
        let raw: Vec<f64> = images
            .par_iter()
            .map(|ims| {
                ims.iter()
                    .map(|&(lo, hi)| cdf_eval(&cdf, &masses, hi) - cdf_eval(&cdf, &masses, lo))
                    .sum::<f64>()
            })
            .collect();
        let total = crate::numerics::compensated_sum(raw.iter().copied());
        let r = total / cdf[grid];
        let next: Vec<f64> = raw.iter().map(|v| v / total).collect();
        residual = next.iter().zip(&masses).map(|(a, b)| (a - b).abs()).sum();
        masses = next;
        if residual < STATIONARY_TOL {
            let cdf = QuotientMeasure::cdf_table(&masses);
            return Ok(QuotientMeasure {
                repr: QuotientRepr::Ulam { masses },
                grid,
                r,
                residual,
                iterations: it,
                cdf,
            });
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual })
}

/// L1 distance between ν and its image under the normalized dual operator.
pub fn stationarity_residual(base: &BaseMap, nu: &QuotientMeasure) -> f64 {
    let grid = match &nu.repr {
        QuotientRepr::Uniform => 1 << 12,
        QuotientRepr::Ulam { masses } => masses.len(),
    };
    let p = base.degree() as f64;
    let mut res = 0.0;
    for i in 0..grid {
        let (a, b) = (i as f64 / grid as f64, (i + 1) as f64 / grid as f64);
        let mut img = 0.0;
        for j in 0..base.degree() {
            let (lo, hi) = base.branch_domain(j);
            let (a, b) = (a.max(lo), b.min(hi));
            if a < b {
                img += nu.cdf(base.lift(j, b)) - nu.cdf(base.lift(j, a));
            }
        }
        res += (img / p - (nu.cdf(b) - nu.cdf(a))).abs();
    }
    res
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub samples: Vec<ItineraryPoint>,
    pub seed: u64,
    pub depth: usize,
}

impl EmpiricalMeasure {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean<F: Fn(&ItineraryPoint) -> f64>(&self, f: F) -> f64 {
        crate::numerics::compensated_sum(self.samples.iter().map(f)) / self.len() as f64
    }

    /// CSV with columns base, itinerary, fiber_x, fiber_y.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "base,itinerary,fiber_x,fiber_y")?;
        for x in &self.samples {
            let itin: String = x.itinerary.iter().map(|s| char::from(b'0' + s)).collect();
            writeln!(w, "{:.17e},{},{:.17e},{:.17e}", x.base, itin, x.fiber[0], x.fiber[1])?;
        }
        Ok(())
    }
}

/// i.i.d. draws from μ = μ_γ × ν: y ~ ν, uniform backward itinerary, reconstruction.
pub fn sample_mu(sys: &SkewProduct, nu: &QuotientMeasure, n: usize, depth: usize, seed: u64) -> EmpiricalMeasure {
    let p = sys.degree();
    let blocks = par_blocks(n, SAMPLE_BLOCK, |b, range| {
        let mut rng = stream(seed, TAG_SAMPLE, b as u64);
        let mut itin = vec![0u8; depth];
        range
            .map(|_| {
                let y = nu.sample(&mut rng);
                for s in itin.iter_mut() {
                    *s = rng.gen_range(0..p) as u8;
                }
                ItineraryPoint {
                    base: y,
                    itinerary: itin.clone(),
                    fiber: sys.fiber_over(y, &itin, depth, [0.0, 0.0]),
                    depth,
                }
            })
            .collect::<Vec<_>>()
    });
    EmpiricalMeasure {
        samples: blocks.into_iter().flatten().collect(),
        seed,
        depth,
    }
}

/// Orbit sampler for μ driven by i.i.d. uniform symbols.
///
/// Base orbit points are rebuilt backwards from a symbol tail, so orbits of
/// any length keep full floating-point accuracy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolicSampler {
    /// Extra forward symbols used to locate the last orbit point.
    pub tail: usize,
    /// Backward symbols used for the initial fiber coordinate.
    pub past: usize,
}

impl Default for SymbolicSampler {
    fn default() -> Self {
        Self { tail: 64, past: 40 }
    }
}

impl SymbolicSampler {
    /// Writes `x_0, …, x_len` into `out` and returns the backward symbols of `x_0`.
    pub fn orbit(&self, sys: &SkewProduct, rng: &mut StreamRng, len: usize, out: &mut Vec<Point>) -> Vec<u8> {
        let p = sys.degree();
        let total = len + self.tail;
        let symbols: Vec<u8> = (0..total).map(|_| rng.gen_range(0..p) as u8).collect();
        let past: Vec<u8> = (0..self.past).map(|_| rng.gen_range(0..p) as u8).collect();
        let mut theta = vec![0.0; len + 1];
        let mut t = 0.5;
        for k in (0..total).rev() {
            t = sys.base.inverse(symbols[k] as usize, t);
            if k <= len {
                theta[k] = t;
            }
        }
        let mut z = sys.fiber_over(theta[0], &past, self.past, [0.0, 0.0]);
        out.clear();
        out.push(Point::new(theta[0], z));
        for k in 0..len {
            z = sys.fiber.eval(theta[k], z);
            out.push(Point::new(theta[k + 1], z));
        }
        past
    }

    /// A single μ-distributed point together with its backward itinerary.
    pub fn point(&self, sys: &SkewProduct, rng: &mut StreamRng) -> ItineraryPoint {
        let mut buf = Vec::with_capacity(1);
        let past = self.orbit(sys, rng, 0, &mut buf);
        ItineraryPoint {
            base: buf[0].base,
            fiber: buf[0].fiber,
            depth: past.len(),
            itinerary: past,
        }
    }
}

/// Forward orbits of sample points stored as flat (θ, z_x, z_y) rows.
#[derive(Clone, Debug)]
pub struct OrbitTable {
    pub len: usize,
    pub data: Vec<Point>,
}

impl OrbitTable {
    pub fn from_points(sys: &SkewProduct, pts: &[Point], len: usize) -> Self {
        let data = pts
            .par_iter()
            .flat_map_iter(|x| {
                let mut v = Vec::with_capacity(len);
                let mut y = *x;
                for _ in 0..len {
                    v.push(y);
                    y = sys.map(&y);
                }
                v
            })
            .collect();
        Self { len, data }
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.len.max(1)
    }

    pub fn orbit(&self, i: usize) -> &[Point] {
        &self.data[i * self.len..(i + 1) * self.len]
    }
}

/// Bowen distance max_{j<n} d(f^j x, f^j y) exceeds ε.
#[inline]
fn separated(a: &[Point], b: &[Point], n: usize, eps: f64) -> bool {
    (0..n).any(|j| distance(&a[j], &b[j]) > eps)
}

/// Prefix tree over the base cells visited at times 0, …, n−1.
///
/// Two points within Bowen distance ε have base coordinates within ε at
/// every time, so a query only descends into children whose cells meet the
/// arc [θ_j − ε, θ_j + ε].
struct CellTrie {
    children: HashMap<(u32, u8), u32>,
    leaves: Vec<Vec<u32>>,
    nodes: u32,
    cells: usize,
}

impl CellTrie {
    fn new(cells: usize) -> Self {
        Self { children: HashMap::new(), leaves: Vec::new(), nodes: 1, cells }
    }

    fn cell(&self, x: f64) -> u8 {
        ((x.rem_euclid(1.0) * self.cells as f64) as usize).min(self.cells - 1) as u8
    }

    fn insert(&mut self, orbit: &[Point], id: u32) {
        let mut node = 0;
        for x in orbit {
            let c = self.cell(x.base);
            node = *self.children.entry((node, c)).or_insert_with(|| {
                self.nodes += 1;
                self.nodes - 1
            });
        }
        let leaf = node as usize;
        if self.leaves.len() <= leaf {
            self.leaves.resize(leaf + 1, Vec::new());
        }
        self.leaves[leaf].push(id);
    }

    /// True when `visit` accepts some stored id whose cells meet every ε-arc of `orbit`.
    fn any_near<F: FnMut(u32) -> bool>(&self, orbit: &[Point], eps: f64, node: u32, visit: &mut F) -> bool {
        let Some((x, rest)) = orbit.split_first() else {
            return self
                .leaves
                .get(node as usize)
                .is_some_and(|v| v.iter().any(|&id| visit(id)));
        };
        let n = self.cells as i64;
        let lo = ((x.base - eps) * n as f64).floor() as i64;
        let hi = ((x.base + eps) * n as f64).floor() as i64;
        let span = (hi - lo + 1).min(n);
        (0..span).any(|k| {
            let c = (lo + k).rem_euclid(n) as u8;
            self.children
                .get(&(node, c))
                .is_some_and(|&ch| self.any_near(rest, eps, ch, visit))
        })
    }
}

/// Greedy maximal (n, ε)-separated subset of the orbit table, visiting points
/// in a seeded random order.
pub fn separated_cardinality(table: &OrbitTable, n: usize, eps: f64, seed: u64) -> usize {
    assert!(n >= 1 && n <= table.len);
    let count = table.count();
    let mut order: Vec<usize> = (0..count).collect();
    let mut rng = stream(seed, TAG_ENTROPY, ((n as u64) << 32) ^ eps.to_bits().rotate_left(7));
    order.shuffle(&mut rng);
    let cells = ((3.0 / eps).floor() as usize).clamp(1, 256);
    let mut trie = CellTrie::new(cells);
    let mut selected = 0;
    for &i in &order {
        let orb = &table.orbit(i)[..n];
        let close = trie.any_near(orb, eps, 0, &mut |s| !separated(orb, table.orbit(s as usize), n, eps));
        if !close {
            trie.insert(orb, i as u32);
            selected += 1;
        }
    }
    selected
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyConfig {
    pub n_values: Vec<usize>,
    pub eps_grid: Vec<f64>,
    pub samples: usize,
    pub depth: usize,
    pub seeds: usize,
    pub reference_points: usize,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self {
            n_values: vec![8, 9, 10, 11, 12],
            eps_grid: vec![0.2, 0.25, 0.3],
            samples: 100_000,
            depth: 40,
            seeds: 2,
            reference_points: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyCell {
    pub n: usize,
    pub eps: f64,
    pub value: f64,
    /// (1/n)·log(cardinality) or mean −(1/n)·log(ball mass).
    pub h_at_n: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub method: String,
    pub cells: Vec<EntropyCell>,
    /// Slope estimate per ε.
    pub h_by_eps: Vec<(f64, f64)>,
    pub h_est: f64,
    pub budget_exhausted: bool,
    pub warnings: usize,
}

fn slopes(cells: &[EntropyCell], eps_grid: &[f64], sign: f64) -> Vec<(f64, f64)> {
    eps_grid
        .iter()
        .map(|&e| {
            let (x, y): (Vec<f64>, Vec<f64>) = cells
                .iter()
                .filter(|c| c.eps == e && c.value.is_finite())
                .map(|c| (c.n as f64, sign * c.value))
                .unzip();
            let h = if x.len() >= 2 { linear_fit(&x, &y).0 } else { y.first().map_or(0.0, |v| v / x[0]) };
            (e, h)
        })
        .collect()
}

fn attractor_points(sys: &SkewProduct, nu: &QuotientMeasure, n: usize, depth: usize, seed: u64) -> Vec<Point> {
    sample_mu(sys, nu, n, depth, seed).samples.iter().map(|x| x.point()).collect()
}

/// Separated-set entropy over an n-range and ε-grid.
pub fn entropy_separated(sys: &SkewProduct, nu: &QuotientMeasure, cfg: &EntropyConfig, seed: u64) -> EntropyReport {
    let n_max = cfg.n_values.iter().copied().max().unwrap_or(1).max(1);
    let pts = attractor_points(sys, nu, cfg.samples, cfg.depth, seed);
    let table = OrbitTable::from_points(sys, &pts, n_max);
    let jobs: Vec<(usize, f64)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| cfg.eps_grid.iter().map(move |&e| (n, e)))
        .collect();
    let cards: Vec<usize> = jobs
        .par_iter()
        .map(|&(n, e)| {
            (0..cfg.seeds.max(1))
                .map(|s| separated_cardinality(&table, n.max(1), e, seed.wrapping_add(s as u64)))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let budget_exhausted = cards.iter().any(|&c| 2 * c > cfg.samples);
    let cells: Vec<EntropyCell> = jobs
        .iter()
        .zip(&cards)
        .map(|(&(n, e), &c)| {
            let v = (c as f64).ln();
            EntropyCell { n, eps: e, value: v, h_at_n: v / n.max(1) as f64 }
        })
        .collect();
    let h_by_eps = slopes(&cells, &cfg.eps_grid, 1.0);
    let h_est = h_by_eps.iter().map(|x| x.1).sum::<f64>() / h_by_eps.len().max(1) as f64;
    EntropyReport {
        method: "separated".into(),
        cells,
        h_by_eps,
        h_est,
        budget_exhausted,
        warnings: 0,
    }
}

/// Mean −log μ(Bⁿ_ε(x)) over reference points, for every n ≤ n_max.
fn ball_log_masses(table: &OrbitTable, refs: &OrbitTable, eps: f64) -> (Vec<f64>, usize) {
    let n_max = table.len;
    let counts: Vec<Vec<usize>> = (0..refs.count())
        .into_par_iter()
        .map(|r| {
            let x = refs.orbit(r);
            let mut hist = vec![0usize; n_max + 1];
            for i in 0..table.count() {
                let y = table.orbit(i);
                let mut j = 0;
                while j < n_max && circle_dist(x[j].base, y[j].base) <= eps && fiber_dist(x[j].fiber, y[j].fiber) <= eps {
                    j += 1;
                }
                hist[j] += 1;
            }
            // number of samples in Bⁿ for every n
            let mut inside = vec![0usize; n_max + 1];
            let mut acc = 0;
            for n in (0..=n_max).rev() {
                acc += hist[n];
                inside[n] = acc;
            }
            inside
        })
        .collect();
    let total = table.count() as f64;
    let mut warnings = 0;
    let means = (0..=n_max)
        .map(|n| {
            let mut s = 0.0;
            let mut k = 0;
            for c in &counts {
                if c[n] > 0 {
                    s += -(c[n] as f64 / total).ln();
                    k += 1;
                } else {
                    warnings += 1;
                }
            }
            if k == 0 {
                f64::NAN
            } else {
                s / k as f64
            }
        })
        .collect();
    (means, warnings)
}

/// Brin–Katok entropy: slope of the mean −log dynamical-ball mass in n.
pub fn entropy_brin_katok(sys: &SkewProduct, nu: &QuotientMeasure, cfg: &EntropyConfig, seed: u64) -> EntropyReport {
    let n_max = cfg.n_values.iter().copied().max().unwrap_or(0);
    if n_max == 0 {
        return EntropyReport {
            method: "brin_katok".into(),
            cells: Vec::new(),
            h_by_eps: Vec::new(),
            h_est: 0.0,
            budget_exhausted: false,
            warnings: 0,
        };
    }
    let pts = attractor_points(sys, nu, cfg.samples, cfg.depth, seed);
    let table = OrbitTable::from_points(sys, &pts, n_max);
    let refs = attractor_points(sys, nu, cfg.reference_points, cfg.depth, seed ^ 0x5EED_5EED);
    let refs = OrbitTable::from_points(sys, &refs, n_max);
    let mut cells = Vec::new();
    let mut warnings = 0;
    for &e in &cfg.eps_grid {
        let (means, w) = ball_log_masses(&table, &refs, e);
        warnings += w;
        for &n in &cfg.n_values {
            let v = if n == 0 { 0.0 } else { means[n] };
            cells.push(EntropyCell { n, eps: e, value: -v, h_at_n: if n == 0 { 0.0 } else { v / n as f64 } });
        }
    }
    let h_by_eps = slopes(&cells, &cfg.eps_grid, -1.0);
    let h_est = h_by_eps.iter().map(|x| x.1).sum::<f64>() / h_by_eps.len().max(1) as f64;
    EntropyReport {
        method: "brin_katok".into(),
        cells,
        h_by_eps,
        h_est,
        budget_exhausted: false,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::make_doubling_solenoid;

    #[test]
    fn doubling_quotient_is_uniform() {
        let nu = quotient_mem(&BaseMap::doubling(), DEFAULT_GRID).unwrap();
        assert_eq!(nu.repr, QuotientRepr::Uniform);
        assert_eq!(nu.r, 2.0);
        assert!(stationarity_residual(&BaseMap::doubling(), &nu) < 1e-12);
    }

    #[test]
    fn empirical_measure_is_reproducible() {
        let s = make_doubling_solenoid(0.05, 0.5).unwrap();
        let nu = QuotientMeasure::uniform(2);
        let a = sample_mu(&s, &nu, 5000, 20, 9);
        let b = sample_mu(&s, &nu, 5000, 20, 9);
        assert_eq!(a, b);
        assert_eq!(a.len(), 5000);
        assert_eq!(a.mean(|_| 1.0), 1.0);
    }

    #[test]
    fn one_step_large_eps_gives_one_point() {
        let s = make_doubling_solenoid(0.05, 0.5).unwrap();
        let pts: Vec<Point> = sample_mu(&s, &QuotientMeasure::uniform(2), 500, 20, 1)
            .samples
            .iter()
            .map(|x| x.point())
            .collect();
        let t = OrbitTable::from_points(&s, &pts, 1);
        assert_eq!(separated_cardinality(&t, 1, s.diam + 0.1, 3), 1);
    }

    #[test]
    fn csv_has_header() {
        let s = make_doubling_solenoid(0.05, 0.5).unwrap();
        let m = sample_mu(&s, &QuotientMeasure::uniform(2), 3, 4, 1);
        let mut out = Vec::new();
        m.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("base,itinerary,fiber_x,fiber_y\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
