//! Mass-distribution measures on stable leaves.
//!
//! The leaf over `y` at depth `n` is represented by one node per backward
//! itinerary of length `n`; every node carries weight `p^{-n}`. Nodes are
//! ordered lexicographically with the first backward symbol most significant,
//! so the block of nodes starting with symbol `j` is exactly the image under
//! `f` of the depth-`n−1` quadrature over `h_j(y)`.

use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;
use crate::systems::{distance, ItineraryPoint, SkewProduct};

pub const DEFAULT_NODE_BUDGET: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct LeafQuadrature {
    pub base: f64,
    pub depth: usize,
    pub degree: usize,
    pub nodes: Vec<ItineraryPoint>,
    pub weights: Vec<f64>,
}

impl LeafQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for &w in &self.weights {
            s.add(w);
        }
        s.value()
    }

    /// Index range of the nodes whose first backward symbol is `j`.
    pub fn branch_block(&self, j: usize) -> std::ops::Range<usize> {
        let size = self.len() / self.degree;
        j * size..(j + 1) * size
    }

    /// Fiber points of the nodes, for building cone metrics.
    pub fn fiber_points(&self) -> Vec<[f64; 2]> {
        self.nodes.iter().map(|x| x.fiber).collect()
    }
}

fn leaf_nodes(sys: &SkewProduct, y: f64, n: usize, out: &mut Vec<ItineraryPoint>) {
    if n == 0 {
        out.push(ItineraryPoint {
            base: y,
            itinerary: Vec::new(),
            fiber: [0.0, 0.0],
            depth: 0,
        });
        return;
    }
    let p = sys.degree();
    for j in 0..p {
        let yj = sys.base.inverse(j, y);
        let start = out.len();
        leaf_nodes(sys, yj, n - 1, out);
        for node in &mut out[start..] {
            node.fiber = sys.fiber.eval(yj, node.fiber);
            node.itinerary.insert(0, j as u8);
            node.depth += 1;
            node.base = y;
        }
    }
}

pub fn required_nodes(p: usize, n: usize) -> u128 {
    (p as u128).saturating_pow(n as u32)
}

pub fn build_quadrature(sys: &SkewProduct, y: f64, n: usize) -> Result<LeafQuadrature> {
    build_quadrature_with_budget(sys, y, n, DEFAULT_NODE_BUDGET)
}

pub fn build_quadrature_with_budget(
    sys: &SkewProduct,
    y: f64,
    n: usize,
    budget: usize,
) -> Result<LeafQuadrature> {
    let p = sys.degree();
    let required = required_nodes(p, n);
    if required > budget as u128 {
        return Err(Error::Budget { required, budget });
    }
    let count = required as usize;
    let mut nodes = Vec::with_capacity(count);
    leaf_nodes(sys, y, n, &mut nodes);
    let w = 1.0 / (p as f64).powi(n as i32);
    Ok(LeafQuadrature {
        base: y,
        depth: n,
        degree: p,
        nodes,
        weights: vec![w; count],
    })
}

/// Σ weights·φ(nodes), compensated.
pub fn integrate_leaf<F>(phi: F, quad: &LeafQuadrature) -> f64
where
    F: Fn(&ItineraryPoint) -> f64,
{
    let mut s = CompensatedSum::new();
    for (x, w) in quad.nodes.iter().zip(&quad.weights) {
        s.add(w * phi(x));
    }
    s.value()
}

/// Leaf integral of `values[i]·ρ[i]` against the node weights.
pub fn integrate_values(values: &[f64], rho: &[f64], quad: &LeafQuadrature) -> f64 {
    let mut s = CompensatedSum::new();
    for ((v, r), w) in values.iter().zip(rho).zip(&quad.weights) {
        s.add(w * v * r);
    }
    s.value()
}

/// Weights of a quadrature summed over each parent cell one level up.
pub fn aggregate_to_parent(quad: &LeafQuadrature) -> Vec<f64> {
    let p = quad.degree;
    quad.weights.chunks(p).map(|c| c.iter().sum()).collect()
}

/// Indicator of the cell with the given backward prefix.
pub fn cell_indicator(prefix: Vec<u8>) -> impl Fn(&ItineraryPoint) -> f64 {
    move |x: &ItineraryPoint| f64::from(u8::from(x.itinerary.starts_with(&prefix)))
}

/// |∫_{f(γ_j)} φ dμ_γ − (1/p)∫_{γ_j} φ∘f dμ_{γ_j}| on matched quadratures.
pub fn change_of_variables_check<F>(sys: &SkewProduct, phi: F, y: f64, j: usize, depth: usize) -> Result<f64>
where
    F: Fn(&ItineraryPoint) -> f64,
{
    let p = sys.degree();
    if j >= p {
        return Err(Error::Precondition(format!("branch {j} out of range for degree {p}")));
    }
    if depth == 0 {
        return Err(Error::Depth { need: 1, have: 0 });
    }
    let quad = build_quadrature(sys, y, depth)?;
    let mut lhs = CompensatedSum::new();
    for i in quad.branch_block(j) {
        lhs.add(quad.weights[i] * phi(&quad.nodes[i]));
    }
    let sub = build_quadrature(sys, sys.base.inverse(j, y), depth - 1)?;
    let rhs = integrate_leaf(|x| phi(&sys.map_itinerary(x)), &sub) / p as f64;
    Ok((lhs.value() - rhs).abs())
}

/// Two leaves matched node-by-node through their common itineraries.
#[derive(Clone, Debug)]
pub struct LeafPair {
    pub first: LeafQuadrature,
    pub second: LeafQuadrature,
    pub distance: f64,
}

impl LeafPair {
    pub fn new(first: LeafQuadrature, second: LeafQuadrature) -> Result<Self> {
        if first.len() != second.len() {
            return Err(Error::NodeMismatch("leaves have different depths".into()));
        }
        let distance = first
            .nodes
            .iter()
            .zip(&second.nodes)
            .map(|(a, b)| distance(&a.point(), &b.point()))
            .fold(0.0, f64::max);
        Ok(Self { first, second, distance })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{make_doubling_solenoid, reconstruct_point};

    #[test]
    fn eight_nodes_at_depth_three() {
        let s = make_doubling_solenoid(0.05, 0.5).unwrap();
        let q = build_quadrature(&s, 0.3, 3).unwrap();
        assert_eq!(q.len(), 8);
        assert!(q.weights.iter().all(|&w| w == 0.125));
        let q0 = build_quadrature(&s, 0.3, 0).unwrap();
        assert_eq!(q0.weights, vec![1.0]);
    }

    #[test]
    fn nodes_match_reconstruction() {
        let s = make_doubling_solenoid(0.1, 0.5).unwrap();
        let q = build_quadrature(&s, 0.71, 4).unwrap();
        for x in &q.nodes {
            let r = reconstruct_point(&s, 0.71, &x.itinerary, 4).unwrap();
            assert_eq!(&r, x);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let s = make_doubling_solenoid(0.05, 0.5).unwrap();
        let e = build_quadrature_with_budget(&s, 0.1, 11, 1024).unwrap_err();
        assert_eq!(e, Error::Budget { required: 2048, budget: 1024 });
    }

    #[test]
    fn indicator_of_cell() {
        let s = make_doubling_solenoid(0.05, 0.5).unwrap();
        let q = build_quadrature(&s, 0.4, 5).unwrap();
        let v = integrate_leaf(cell_indicator(vec![1, 0, 1, 1, 0]), &q);
        assert_eq!(v, 1.0 / 32.0);
    }

    #[test]
    fn constant_change_of_variables() {
        let s = make_doubling_solenoid(0.05, 0.5).unwrap();
        let r = change_of_variables_check(&s, |_| 1.0, 0.2, 1, 6).unwrap();
        assert_eq!(r, 0.0);
    }
}
