//! Small numerical helpers shared across modules.

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut s = CompensatedSum::new();
    for x in it {
        s.add(x);
    }
    s.value()
}

/// Distance on the circle R/Z.
#[inline]
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Root of a monotone increasing function on `[lo, hi]` with `f(lo) <= y <= f(hi)`.
///
/// Newton steps are accepted only while they stay inside the current bracket,
/// otherwise the bracket is bisected.
pub fn monotone_inverse<F, D>(f: F, df: D, y: f64, mut lo: f64, mut hi: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = f(x) - y;
        if r == 0.0 {
            return x;
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= 1e-16 * hi.abs().max(1e-300) {
            break;
        }
        let d = df(x);
        let newton = x - r / d;
        let next = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == x {
            break;
        }
        x = next;
    }
    x
}

/// Least-squares line through `(x, y)`: returns (slope, intercept, r²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Weighted isotonic (nondecreasing) regression by pool-adjacent-violators.
pub fn isotonic_increasing(y: &[f64], w: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (&v, &wt) in y.iter().zip(w) {
        blocks.push((v, wt, 1));
        while blocks.len() > 1 {
            let k = blocks.len();
            if blocks[k - 2].0 <= blocks[k - 1].0 {
                break;
            }
            let (v2, w2, c2) = blocks.pop().unwrap();
            let (v1, w1, c1) = blocks.pop().unwrap();
            let wt = w1 + w2;
            blocks.push(((v1 * w1 + v2 * w2) / wt, wt, c1 + c2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(v, _, c)| std::iter::repeat_n(v, c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut v = vec![1e16, 1.0, -1e16];
        v.extend(std::iter::repeat_n(1e-3, 1000));
        assert!((compensated_sum(v) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_inverse_of_cube() {
        let x = monotone_inverse(|x| x * x * x, |x| 3.0 * x * x, 0.125, 0.0, 1.0);
        assert!((x - 0.5).abs() < 1e-15);
    }

    #[test]
    fn isotonic_pools_violators() {
        let fit = isotonic_increasing(&[1.0, 3.0, 2.0, 4.0], &[1.0; 4]);
        assert_eq!(fit, vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn circle_distance_wraps() {
        assert!((circle_dist(0.95, 0.05) - 0.1).abs() < 1e-15);
    }
}
