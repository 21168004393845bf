//! Correlation decay, Green–Kubo variance, CLT tests and stability sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::Result;
use crate::maxent::{quotient_mem, SymbolicSampler};
use crate::numerics::{isotonic_increasing, linear_fit};
use crate::observable::{Observable, ObservableSpec};
use crate::rng::{par_parts, stream, StreamRng, TAG_CLT, TAG_ORBIT, TAG_STABILITY};
use crate::systems::{Point, SkewProduct};

pub const JACKKNIFE_BLOCKS: usize = 100;
const NOISE_FACTOR: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(value: f64, stderr: f64) -> Self {
        Self { value, stderr }
    }

    /// |value − target| ≤ k·stderr.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }
}

/// Anything that can draw μ-distributed forward orbits.
pub trait OrbitSampler: Sync {
    /// Fills `out` with x_0, …, x_len.
    fn orbit(&self, rng: &mut StreamRng, len: usize, out: &mut Vec<Point>);
}

/// μ-orbits of a solenoid via the symbolic sampler.
#[derive(Clone, Copy, Debug)]
pub struct SolenoidSampler<'a> {
    pub sys: &'a SkewProduct,
    pub sampler: SymbolicSampler,
}

impl<'a> SolenoidSampler<'a> {
    pub fn new(sys: &'a SkewProduct) -> Self {
        Self { sys, sampler: SymbolicSampler::default() }
    }
}

impl OrbitSampler for SolenoidSampler<'_> {
    fn orbit(&self, rng: &mut StreamRng, len: usize, out: &mut Vec<Point>) {
        self.sampler.orbit(self.sys, rng, len, out);
    }
}

/// Raw sums of one jackknife block.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LagSums {
    pub count: f64,
    pub psi: f64,
    pub phi: Vec<f64>,
    pub prod: Vec<f64>,
}

impl LagSums {
    fn zeros(lags: usize) -> Self {
        Self { count: 0.0, psi: 0.0, phi: vec![0.0; lags + 1], prod: vec![0.0; lags + 1] }
    }

    fn add(&mut self, o: &LagSums, sign: f64) {
        self.count += sign * o.count;
        self.psi += sign * o.psi;
        for (a, b) in self.phi.iter_mut().zip(&o.phi) {
            *a += sign * b;
        }
        for (a, b) in self.prod.iter_mut().zip(&o.prod) {
            *a += sign * b;
        }
    }

    /// C_n = mean(φ(fⁿx)ψ(x)) − mean(φ(fⁿx))·mean(ψ(x)).
    pub fn correlation(&self, n: usize) -> f64 {
        let c = self.count;
        self.prod[n] / c - (self.phi[n] / c) * (self.psi / c)
    }
}

/// Block sums of lagged products, the input to every jackknife estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationData {
    pub max_lag: usize,
    pub blocks: Vec<LagSums>,
    /// Values were shifted by this pilot mean before summation.
    pub shift: (f64, f64),
}

impl CorrelationData {
    fn total(&self) -> LagSums {
        let mut t = LagSums::zeros(self.max_lag);
        for b in &self.blocks {
            t.add(b, 1.0);
        }
        t
    }

    /// Delete-one-block jackknife of a statistic of the pooled sums.
    pub fn jackknife<F: Fn(&LagSums) -> f64>(&self, stat: F) -> Estimate {
        let total = self.total();
        let full = stat(&total);
        let k = self.blocks.len();
        if k < 2 {
            return Estimate::new(full, f64::NAN);
        }
        let reps: Vec<f64> = self
            .blocks
            .iter()
            .map(|b| {
                let mut t = total.clone();
                t.add(b, -1.0);
                stat(&t)
            })
            .collect();
        let mean = reps.iter().sum::<f64>() / k as f64;
        let var = reps.iter().map(|r| (r - mean).powi(2)).sum::<f64>() * (k as f64 - 1.0) / k as f64;
        Estimate::new(full, var.sqrt())
    }

    pub fn correlation(&self, n: usize) -> Estimate {
        self.jackknife(|s| s.correlation(n))
    }

    pub fn profile(&self) -> Vec<Estimate> {
        (0..=self.max_lag).map(|n| self.correlation(n)).collect()
    }

    /// C_0 + 2 Σ_{j=1}^{J} C_j.
    pub fn green_kubo(&self, j: usize) -> Estimate {
        let j = j.min(self.max_lag);
        self.jackknife(|s| s.correlation(0) + 2.0 * (1..=j).map(|n| s.correlation(n)).sum::<f64>())
    }
}

fn pilot_mean<S: OrbitSampler, O: Observable>(sampler: &S, phi: &O, seed: u64) -> f64 {
    let mut rng = stream(seed, TAG_ORBIT, u64::MAX);
    let mut buf = Vec::new();
    let n = 1000;
    let mut s = 0.0;
    for _ in 0..n {
        sampler.orbit(&mut rng, 0, &mut buf);
        s += phi.eval(&buf[0]);
    }
    s / n as f64
}

/// Lagged products φ(fⁿx)ψ(x) for n ≤ max_lag over N independent μ-orbits.
pub fn correlation_data<S, O1, O2>(sampler: &S, phi: &O1, psi: &O2, max_lag: usize, n: usize, seed: u64) -> CorrelationData
where
    S: OrbitSampler,
    O1: Observable,
    O2: Observable,
{
    let shift = (pilot_mean(sampler, phi, seed), pilot_mean(sampler, psi, seed));
    let blocks = par_parts(n, JACKKNIFE_BLOCKS, |b, range| {
        let mut rng = stream(seed, TAG_ORBIT, b as u64);
        let mut sums = LagSums::zeros(max_lag);
        let mut buf = Vec::with_capacity(max_lag + 1);
        for _ in range {
            sampler.orbit(&mut rng, max_lag, &mut buf);
            let p0 = psi.eval(&buf[0]) - shift.1;
            sums.count += 1.0;
            sums.psi += p0;
            for (k, x) in buf.iter().enumerate() {
                let f = phi.eval(x) - shift.0;
                sums.phi[k] += f;
                sums.prod[k] += f * p0;
            }
        }
        sums
    });
    CorrelationData { max_lag, blocks, shift }
}

/// Monte-Carlo C_n with jackknife standard error.
pub fn correlation<S, O1, O2>(sampler: &S, phi: &O1, psi: &O2, lag: usize, n: usize, seed: u64) -> Estimate
where
    S: OrbitSampler,
    O1: Observable,
    O2: Observable,
{
    correlation_data(sampler, phi, psi, lag, n, seed).correlation(lag)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub lags: Vec<usize>,
    pub correlations: Vec<Estimate>,
    pub used: Vec<usize>,
    pub excluded: Vec<usize>,
    pub tau: f64,
    pub k: f64,
    pub r2: f64,
    pub conclusive: bool,
}

/// Log-linear fit of |C_n| over the leading run of lags n ≥ 1 above the noise floor.
pub fn fit_decay(lags: &[usize], corr: &[Estimate]) -> DecayReport {
    let mut used = Vec::new();
    let mut excluded = Vec::new();
    let mut open = true;
    for (&n, c) in lags.iter().zip(corr) {
        if n == 0 {
            continue;
        }
        if open && c.value.abs() > NOISE_FACTOR * c.stderr && c.value != 0.0 {
            used.push(n);
        } else {
            open = false;
            excluded.push(n);
        }
    }
    let mut rep = DecayReport {
        lags: lags.to_vec(),
        correlations: corr.to_vec(),
        used: used.clone(),
        excluded,
        tau: f64::NAN,
        k: f64::NAN,
        r2: f64::NAN,
        conclusive: false,
    };
    if used.len() < 4 {
        return rep;
    }
    let x: Vec<f64> = used.iter().map(|&n| n as f64).collect();
    let y: Vec<f64> = used
        .iter()
        .map(|n| corr[lags.iter().position(|l| l == n).unwrap()].value.abs().ln())
        .collect();
    let (slope, icpt, r2) = linear_fit(&x, &y);
    rep.tau = slope.exp();
    rep.k = icpt.exp();
    rep.r2 = r2;
    rep.conclusive = rep.tau > 0.0 && rep.tau < 1.0;
    rep
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenKuboReport {
    pub sigma2: Estimate,
    pub truncation: usize,
    pub tail_bound: Option<f64>,
    pub fit: DecayReport,
    pub degenerate: bool,
}

/// Green–Kubo variance; `j = None` picks the truncation from the data.
pub fn green_kubo_sigma<S, O>(sampler: &S, phi: &O, j: Option<usize>, max_lag: usize, n: usize, seed: u64) -> GreenKuboReport
where
    S: OrbitSampler,
    O: Observable,
{
    let data = correlation_data(sampler, phi, phi, max_lag.max(1), n, seed);
    green_kubo_from(&data, j)
}

pub fn green_kubo_from(data: &CorrelationData, j: Option<usize>) -> GreenKuboReport {
    let corr = data.profile();
    let lags: Vec<usize> = (0..=data.max_lag).collect();
    let fit = fit_decay(&lags, &corr);
    let j = j.unwrap_or_else(|| {
        (1..=data.max_lag)
            .find(|&l| {
                let c = corr[l];
                if fit.conclusive {
                    fit.k * fit.tau.powi(l as i32) < c.stderr
                } else {
                    c.value.abs() < NOISE_FACTOR * c.stderr
                }
            })
            .unwrap_or(data.max_lag)
    });
    let sigma2 = data.green_kubo(j);
    let tail_bound = fit
        .conclusive
        .then(|| fit.k * fit.tau.powi(j as i32 + 1) / (1.0 - fit.tau));
    let degenerate = sigma2.value.abs() <= NOISE_FACTOR * sigma2.stderr + 1e-12;
    GreenKuboReport { sigma2, truncation: j, tail_bound, fit, degenerate }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub sigma2_gk: Estimate,
    pub sigma2_emp: f64,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub samples: usize,
    pub degenerate: bool,
}

/// Kolmogorov–Smirnov statistic and asymptotic p-value against a continuous CDF.
pub fn ks_test<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> (f64, f64) {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in v.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sq = n.sqrt();
    (d, kolmogorov_q((sq + 0.12 + 0.11 / sq) * d))
}

/// Q_KS(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let t = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { t } else { -t };
        if t < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Normalized Birkhoff sums S_n/√n of centered φ over N μ-orbits.
pub fn birkhoff_sums<S, O>(sampler: &S, phi: &O, n: usize, count: usize, seed: u64) -> Vec<f64>
where
    S: OrbitSampler,
    O: Observable,
{
    let blocks = par_parts(count, JACKKNIFE_BLOCKS, |b, range| {
        let mut rng = stream(seed, TAG_CLT, b as u64);
        let mut buf = Vec::with_capacity(n);
        range
            .map(|_| {
                sampler.orbit(&mut rng, n - 1, &mut buf);
                buf.iter().map(|x| phi.eval(x)).sum::<f64>()
            })
            .collect::<Vec<f64>>()
    });
    let sums: Vec<f64> = blocks.into_iter().flatten().collect();
    let mean = sums.iter().sum::<f64>() / (sums.len() as f64 * n as f64);
    let sq = (n as f64).sqrt();
    sums.iter().map(|s| (s - mean * n as f64) / sq).collect()
}

/// KS test of S_n/√n against Normal(0, σ²_gk); degenerate when σ²_gk ≈ 0.
pub fn clt_test<S, O>(sampler: &S, phi: &O, n: usize, count: usize, seed: u64, gk: &GreenKuboReport) -> CltReport
where
    S: OrbitSampler,
    O: Observable,
{
    let normalized = birkhoff_sums(sampler, phi, n.max(1), count, seed);
    let m = normalized.iter().sum::<f64>() / normalized.len() as f64;
    let sigma2_emp = normalized.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (normalized.len() as f64 - 1.0);
    let mut rep = CltReport {
        sigma2_gk: gk.sigma2,
        sigma2_emp,
        ks_statistic: f64::NAN,
        p_value: f64::NAN,
        n,
        samples: count,
        degenerate: gk.degenerate,
    };
    if gk.degenerate || gk.sigma2.value <= 0.0 {
        rep.degenerate = true;
        return rep;
    }
    let normal = Normal::new(0.0, gk.sigma2.value.sqrt()).expect("positive variance");
    let (d, p) = ks_test(&normalized, |x| normal.cdf(x));
    rep.ks_statistic = d;
    rep.p_value = p;
    rep
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub t: f64,
    pub observable: String,
    pub integral: Estimate,
    pub diff: f64,
    pub diff_stderr: f64,
    /// ∫φ dν_t from the quotient measure, for base-only observables.
    pub base_integral: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileCheck {
    pub observable: String,
    pub t: Vec<f64>,
    pub fitted: Vec<f64>,
    pub within: Vec<bool>,
    pub pass: bool,
}

/// ∫φ dμ_t for every t in the grid and every observable.
pub fn stability_sweep<B>(
    builder: B,
    observables: &[ObservableSpec],
    t_grid: &[f64],
    n: usize,
    grid: usize,
    seed: u64,
) -> Vec<StabilityRow>
where
    B: Fn(f64) -> Result<SkewProduct> + Sync,
{
    let per_t: Vec<Vec<StabilityRow>> = t_grid
        .par_iter()
        .enumerate()
        .map(|(row, &t)| {
            let sys = match builder(t) {
                Ok(s) => s,
                Err(e) => {
                    return observables
                        .iter()
                        .map(|o| StabilityRow {
                            t,
                            observable: o.label(),
                            integral: Estimate::new(f64::NAN, f64::NAN),
                            diff: f64::NAN,
                            diff_stderr: f64::NAN,
                            base_integral: None,
                            error: Some(e.to_string()),
                        })
                        .collect();
                }
            };
            let sampler = SymbolicSampler::default();
            let pts: Vec<Point> = {
                let blocks = par_parts(n, JACKKNIFE_BLOCKS, |b, range| {
                    let mut rng = stream(seed, TAG_STABILITY, ((row as u64) << 32) + b as u64);
                    range.map(|_| sampler.point(&sys, &mut rng).point()).collect::<Vec<_>>()
                });
                blocks.into_iter().flatten().collect()
            };
            let nu = observables
                .iter()
                .any(|o| o.base_only())
                .then(|| quotient_mem(&sys.base, grid));
            observables
                .iter()
                .map(|o| {
                    let vals: Vec<f64> = pts.iter().map(|x| o.eval(x)).collect();
                    let m = vals.iter().sum::<f64>() / n as f64;
                    let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
                    let (base_integral, error) = match (&nu, o.base_only()) {
                        (Some(Ok(nu)), true) => (Some(nu.integrate(|th| o.eval(&Point::new(th, [0.0, 0.0])))), None),
                        (Some(Err(e)), true) => (None, Some(e.to_string())),
                        _ => (None, None),
                    };
                    StabilityRow {
                        t,
                        observable: o.label(),
                        integral: Estimate::new(m, (var / n as f64).sqrt()),
                        diff: f64::NAN,
                        diff_stderr: f64::NAN,
                        base_integral,
                        error,
                    }
                })
                .collect()
        })
        .collect();
    let mut rows: Vec<StabilityRow> = per_t.into_iter().flatten().collect();
    for o in observables {
        let label = o.label();
        let reference = rows
            .iter()
            .find(|r| r.t == 0.0 && r.observable == label)
            .map(|r| r.integral);
        if let Some(r0) = reference {
            for r in rows.iter_mut().filter(|r| r.observable == label) {
                if r.t == 0.0 {
                    r.diff = 0.0;
                    r.diff_stderr = 0.0;
                } else {
                    r.diff = (r.integral.value - r0.value).abs();
                    r.diff_stderr = r.integral.stderr.hypot(r0.stderr);
                }
            }
        }
    }
    rows
}

/// Isotonic profile of |Δ| in |t| anchored at 0; the three smallest nonzero
/// t must lie within 3 stderr of it.
pub fn stability_profile(rows: &[StabilityRow], observable: &str) -> ProfileCheck {
    let mut sel: Vec<&StabilityRow> = rows
        .iter()
        .filter(|r| r.observable == observable && r.t != 0.0 && r.error.is_none() && r.diff.is_finite())
        .collect();
    sel.sort_by(|a, b| a.t.abs().total_cmp(&b.t.abs()));
    let mut y = vec![0.0];
    let mut w = vec![1e30];
    for r in &sel {
        y.push(r.diff);
        w.push(1.0 / r.diff_stderr.max(1e-300).powi(2));
    }
    let fit = isotonic_increasing(&y, &w);
    let fitted: Vec<f64> = fit[1..].to_vec();
    let within: Vec<bool> = sel
        .iter()
        .zip(&fitted)
        .map(|(r, f)| (r.diff - f).abs() <= 3.0 * r.diff_stderr)
        .collect();
    let pass = within.len() >= 3 && within.iter().take(3).all(|&b| b);
    ProfileCheck {
        observable: observable.to_string(),
        t: sel.iter().map(|r| r.t).collect(),
        fitted,
        within,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_geometric_fit() {
        let lags: Vec<usize> = (0..10).collect();
        let corr: Vec<Estimate> = lags.iter().map(|&n| Estimate::new(0.3 * 0.5f64.powi(n as i32), 0.0)).collect();
        let r = fit_decay(&lags, &corr);
        assert!(r.conclusive);
        assert!((r.tau - 0.5).abs() < 1e-6);
        assert!((r.k - 0.3).abs() < 1e-6);
    }

    #[test]
    fn noise_only_is_inconclusive() {
        let lags: Vec<usize> = (0..10).collect();
        let corr: Vec<Estimate> = lags.iter().map(|_| Estimate::new(1e-4, 1e-3)).collect();
        let r = fit_decay(&lags, &corr);
        assert!(!r.conclusive);
        assert!(r.used.is_empty());
    }

    #[test]
    fn kolmogorov_tail() {
        assert!((kolmogorov_q(1.36) - 0.049).abs() < 2e-3);
        assert!((kolmogorov_q(1.63) - 0.0098).abs() < 1e-3);
        assert_eq!(kolmogorov_q(0.0), 1.0);
    }
}
