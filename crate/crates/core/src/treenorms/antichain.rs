//! Maximum-weight antichains of tiles under the tile order.
//!
//! Two rectangles of equal area are either disjoint or comparable, so an
//! antichain is exactly a pairwise disjoint family.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::num::QuadExt;
use crate::tiles::{tiles_disjoint, Rect};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum AntichainMode {
    /// Branch and bound over subsets; intended for at most 20 items.
    Brute,
    /// Minimum cut in the chain-cover network.
    MinCut,
}

#[derive(Clone, Debug)]
pub struct AntichainProblem<T: Rect> {
    items: Vec<T>,
    weights: Vec<QuadExt>,
}

impl<T: Rect> AntichainProblem<T> {
    pub fn new(items: Vec<T>, weights: Vec<QuadExt>) -> Result<Self> {
        if items.len() != weights.len() {
            return Err(Error::InvalidParameter(format!("{} items but {} weights", items.len(), weights.len())));
        }
        if let Some(w) = weights.iter().find(|w| w.signum() < 0) {
            return Err(Error::Precondition(format!("negative weight {w}")));
        }
        Ok(AntichainProblem { items, weights })
    }

    pub fn items(&self) -> &[T] {
        &self.items
    }

    pub fn weights(&self) -> &[QuadExt] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `u` lies strictly above `v` in the order; equal rectangles are ordered
    /// by position so that duplicates form a chain.
    fn above(&self, v: usize, u: usize) -> bool {
        let (a, b) = (&self.items[v], &self.items[u]);
        if v == u || tiles_disjoint(a, b) {
            return false;
        }
        a.k() > b.k() || (a.k() == b.k() && v < u)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Antichain {
    pub value: QuadExt,
    /// Indices into the problem's items, ascending.
    pub witness: Vec<usize>,
}

pub fn max_weight_antichain<T: Rect>(prob: &AntichainProblem<T>, mode: AntichainMode) -> Antichain {
    // Zero weights never change the value; dropping them keeps both solvers small.
    let live: Vec<usize> = (0..prob.len()).filter(|&v| !prob.weights[v].is_zero()).collect();
    let mut witness = match mode {
        AntichainMode::Brute => brute(prob, &live),
        AntichainMode::MinCut => mincut(prob, &live),
    };
    witness.sort_unstable();
    let value = witness.iter().map(|&v| prob.weights[v].clone()).sum();
    Antichain { value, witness }
}

fn brute<T: Rect>(prob: &AntichainProblem<T>, live: &[usize]) -> Vec<usize> {
    let mut order = live.to_vec();
    order.sort_by(|&a, &b| prob.weights[b].cmp(&prob.weights[a]));
    let mut suffix = vec![QuadExt::zero(); order.len() + 1];
    for t in (0..order.len()).rev() {
        suffix[t] = &suffix[t + 1] + &prob.weights[order[t]];
    }
    let mut search = Search { prob, order: &order, suffix: &suffix, best: QuadExt::zero(), best_set: Vec::new(), current: Vec::new() };
    search.run(0, QuadExt::zero());
    search.best_set
}

struct Search<'a, T: Rect> {
    prob: &'a AntichainProblem<T>,
    order: &'a [usize],
    suffix: &'a [QuadExt],
    best: QuadExt,
    best_set: Vec<usize>,
    current: Vec<usize>,
}

impl<T: Rect> Search<'_, T> {
    fn run(&mut self, t: usize, value: QuadExt) {
        if value > self.best {
            self.best = value.clone();
            self.best_set = self.current.clone();
        }
        if t == self.order.len() || &value + &self.suffix[t] <= self.best {
            return;
        }
        let v = self.order[t];
        let item = &self.prob.items[v];
        if self.current.iter().all(|&u| tiles_disjoint(item, &self.prob.items[u])) {
            self.current.push(v);
            self.run(t + 1, &value + &self.prob.weights[v]);
            self.current.pop();
        }
        self.run(t + 1, value);
    }
}

/// Weighted Dilworth: the minimum chain cover is `Σw − maxflow` in the network
/// `s → v_L (w_v)`, `v_L → u_R (∞)` for `v < u`, `u_R → t (w_u)`; the vertices
/// with `v_L` reachable and `v_R` unreachable in the residual graph form a
/// maximum antichain.
fn mincut<T: Rect>(prob: &AntichainProblem<T>, live: &[usize]) -> Vec<usize> {
    let n = live.len();
    let (s, t) = (2 * n, 2 * n + 1);
    let mut net = Network::new(2 * n + 2);
    for (a, &v) in live.iter().enumerate() {
        net.add_edge(s, a, Some(prob.weights[v].clone()));
        net.add_edge(n + a, t, Some(prob.weights[v].clone()));
        for (b, &u) in live.iter().enumerate() {
            if prob.above(v, u) {
                net.add_edge(a, n + b, None);
            }
        }
    }
    net.max_flow(s, t);
    let reach = net.reachable(s);
    (0..n).filter(|&a| reach[a] && !reach[n + a]).map(|a| live[a]).collect()
}

/// Dinic's algorithm over exact capacities; `None` is infinite.
struct Network {
    to: Vec<usize>,
    cap: Vec<Option<QuadExt>>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(n: usize) -> Self {
        Network { to: Vec::new(), cap: Vec::new(), adj: vec![Vec::new(); n] }
    }

    fn add_edge(&mut self, a: usize, b: usize, cap: Option<QuadExt>) {
        self.adj[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(cap);
        self.adj[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(Some(QuadExt::zero()));
    }

    fn residual(&self, e: usize) -> bool {
        self.cap[e].as_ref().is_none_or(|c| !c.is_zero())
    }

    fn levels(&self, s: usize) -> Vec<Option<usize>> {
        let mut level = vec![None; self.adj.len()];
        level[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let w = self.to[e];
                if level[w].is_none() && self.residual(e) {
                    level[w] = Some(level[v].unwrap() + 1);
                    queue.push_back(w);
                }
            }
        }
        level
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        self.levels(s).into_iter().map(|l| l.is_some()).collect()
    }

    fn max_flow(&mut self, s: usize, t: usize) {
        loop {
            let level = self.levels(s);
            if level[t].is_none() {
                return;
            }
            let mut next = vec![0usize; self.adj.len()];
            while let Some(pushed) = self.augment(s, t, None, &level, &mut next) {
                if pushed.is_zero() {
                    break;
                }
            }
        }
    }

    /// Pushes a blocking-flow path; `limit = None` means unbounded so far.
    fn augment(
        &mut self,
        v: usize,
        t: usize,
        limit: Option<QuadExt>,
        level: &[Option<usize>],
        next: &mut [usize],
    ) -> Option<QuadExt> {
        if v == t {
            return limit;
        }
        while next[v] < self.adj[v].len() {
            let e = self.adj[v][next[v]];
            let w = self.to[e];
            if self.residual(e) && level[w] == level[v].map(|l| l + 1) {
                let bound = match (&limit, &self.cap[e]) {
                    (None, c) => c.clone(),
                    (l, None) => l.clone(),
                    (Some(l), Some(c)) => Some(l.clone().min(c.clone())),
                };
                if let Some(pushed) = self.augment(w, t, bound, level, next) {
                    if !pushed.is_zero() {
                        if let Some(c) = &mut self.cap[e] {
                            *c = &*c - &pushed;
                        }
                        if let Some(c) = &mut self.cap[e ^ 1] {
                            *c = &*c + &pushed;
                        }
                        return Some(pushed);
                    }
                }
            }
            next[v] += 1;
        }
        Some(QuadExt::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiles::Tile;

    fn chain() -> AntichainProblem<Tile> {
        let items = vec![Tile::new(0, 0, 0), Tile::new(-1, 0, 0), Tile::new(-2, 0, 0)];
        let weights = vec![QuadExt::integer(1), QuadExt::integer(4), QuadExt::integer(9)];
        AntichainProblem::new(items, weights).unwrap()
    }

    #[test]
    fn empty_problem() {
        let prob = AntichainProblem::<Tile>::new(vec![], vec![]).unwrap();
        for mode in [AntichainMode::Brute, AntichainMode::MinCut] {
            assert_eq!(max_weight_antichain(&prob, mode), Antichain { value: QuadExt::zero(), witness: vec![] });
        }
    }

    #[test]
    fn chain_takes_heaviest() {
        for mode in [AntichainMode::Brute, AntichainMode::MinCut] {
            let got = max_weight_antichain(&chain(), mode);
            assert_eq!(got.value, QuadExt::integer(9));
            assert_eq!(got.witness, vec![2]);
        }
    }

    #[test]
    fn disjoint_items_sum() {
        let items = vec![Tile::new(0, 0, 0), Tile::new(0, 1, 0), Tile::new(0, 0, 1)];
        let weights = vec![QuadExt::integer(1), QuadExt::sqrt2(), QuadExt::integer(3)];
        let prob = AntichainProblem::new(items, weights).unwrap();
        for mode in [AntichainMode::Brute, AntichainMode::MinCut] {
            assert_eq!(max_weight_antichain(&prob, mode).value, QuadExt::new(4, 1, 0));
        }
    }

    #[test]
    fn rejects_negative_weight() {
        assert!(AntichainProblem::new(vec![Tile::new(0, 0, 0)], vec![QuadExt::integer(-1)]).is_err());
    }
}
