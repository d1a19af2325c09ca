//! Irregular LDPC construction: degree distributions, progressive edge
//! growth with an ACE safeguard, the degree-3 preclusion transform, and a
//! search for small absorbing sets.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ldpc::ParityCheckMatrix;

/// Node-perspective degree distribution of an LDPC code with a target length
/// and design rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeDistribution {
    #[serde(default)]
    pub name: String,
    pub n: usize,
    pub rate: f64,
    /// `(degree, fraction of variable nodes)`.
    pub variable: Vec<(usize, f64)>,
    /// `(degree, fraction of check nodes)`.
    pub check: Vec<(usize, f64)>,
}

/// Exact per-node degrees realized from a [`DegreeDistribution`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeProfile {
    /// Degree of every variable node, ascending.
    pub variable: Vec<usize>,
    /// Degree of every check node.
    pub check: Vec<usize>,
}

impl DegreeProfile {
    pub fn num_edges(&self) -> usize {
        self.variable.iter().sum()
    }

    pub fn variable_histogram(&self) -> Vec<(usize, usize)> {
        histogram(&self.variable)
    }

    pub fn check_histogram(&self) -> Vec<(usize, usize)> {
        histogram(&self.check)
    }
}

fn histogram(d: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    let mut sorted = d.to_vec();
    sorted.sort_unstable();
    for x in sorted {
        match out.last_mut() {
            Some((deg, count)) if *deg == x => *count += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

/// Splits `total` items by `fractions` using largest remainders.
fn apportion(total: usize, fractions: &[f64]) -> Vec<usize> {
    let raw: Vec<f64> = fractions.iter().map(|f| f * total as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let mut left = total.saturating_sub(counts.iter().sum());
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (raw[a] - raw[a].floor(), raw[b] - raw[b].floor());
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

impl DegreeDistribution {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("degree distribution {:?}: {m}", self.name)));
        if self.n == 0 || !(self.rate > 0.0 && self.rate < 1.0) {
            return bad("need n > 0 and 0 < rate < 1");
        }
        for (side, list, min_deg) in [("variable", &self.variable, 1), ("check", &self.check, 2)] {
            if list.is_empty() {
                return bad(&format!("{side} side is empty"));
            }
            if list.iter().any(|&(d, f)| d < min_deg || !(f >= 0.0) || !f.is_finite()) {
                return bad(&format!("{side} side has an invalid entry"));
            }
            let s: f64 = list.iter().map(|p| p.1).sum();
            if (s - 1.0).abs() > 1e-9 {
                return bad(&format!("{side} fractions sum to {s}"));
            }
        }
        Ok(())
    }

    /// Number of checks, `n - round(rate · n)`.
    pub fn num_checks(&self) -> usize {
        self.n - (self.rate * self.n as f64).round() as usize
    }

    /// Mean variable degree.
    pub fn mean_variable_degree(&self) -> f64 {
        self.variable.iter().map(|&(d, f)| d as f64 * f).sum()
    }

    /// Fraction of variable nodes with degree `d`.
    pub fn variable_fraction(&self, d: usize) -> f64 {
        self.variable.iter().filter(|p| p.0 == d).map(|p| p.1).sum()
    }

    pub fn max_variable_degree(&self) -> usize {
        self.variable.iter().filter(|p| p.1 > 0.0).map(|p| p.0).max().unwrap_or(0)
    }

    /// Realizes integral degrees. Variable and check counts are apportioned
    /// by largest remainder; the check degrees are then nudged one at a time
    /// (smallest first when short of edges, largest first when over) until
    /// both sides carry the same number of edges.
    pub fn profile(&self) -> Result<DegreeProfile> {
        self.validate()?;
        let m = self.num_checks();
        if m == 0 {
            return Err(Error::InvalidParameter("design has no checks".into()));
        }
        let vf: Vec<f64> = self.variable.iter().map(|p| p.1).collect();
        let mut variable: Vec<usize> = apportion(self.n, &vf)
            .into_iter()
            .zip(&self.variable)
            .flat_map(|(count, &(d, _))| std::iter::repeat_n(d, count))
            .collect();
        variable.sort_unstable();
        let cf: Vec<f64> = self.check.iter().map(|p| p.1).collect();
        let mut check: Vec<usize> = apportion(m, &cf)
            .into_iter()
            .zip(&self.check)
            .flat_map(|(count, &(d, _))| std::iter::repeat_n(d, count))
            .collect();
        check.sort_unstable();

        let edges: usize = variable.iter().sum();
        let mut have: usize = check.iter().sum();
        while have < edges {
            let lo = *check.iter().min().unwrap();
            for d in check.iter_mut().filter(|d| **d == lo) {
                if have == edges {
                    break;
                }
                *d += 1;
                have += 1;
            }
        }
        while have > edges {
            let hi = *check.iter().max().unwrap();
            for d in check.iter_mut().rev().filter(|d| **d == hi) {
                if have == edges {
                    break;
                }
                *d -= 1;
                have -= 1;
            }
        }
        check.sort_unstable();
        if check[0] < 2 || *check.last().unwrap() > self.n {
            return Err(Error::Construction("check degrees out of range after repair".into()));
        }
        let max_var = *variable.last().unwrap();
        if max_var > m {
            return Err(Error::Construction(format!("variable degree {max_var} exceeds the {m} checks")));
        }
        Ok(DegreeProfile { variable, check })
    }

    /// Check side concentrated on the two integers around the mean check
    /// degree implied by the variable side and the rate.
    pub fn with_concentrated_checks(mut self) -> Self {
        let avg = self.mean_variable_degree() / (1.0 - self.rate);
        let lo = avg.floor() as usize;
        let hi_frac = avg - lo as f64;
        self.check = if hi_frac < 1e-12 { vec![(lo, 1.0)] } else { vec![(lo, 1.0 - hi_frac), (lo + 1, hi_frac)] };
        self
    }

    /// `(dv, dc)`-regular ensemble with `n` variable nodes.
    pub fn regular(dv: usize, dc: usize, n: usize) -> Self {
        Self {
            name: format!("({dv},{dc})-regular"),
            n,
            rate: 1.0 - dv as f64 / dc as f64,
            variable: vec![(dv, 1.0)],
            check: vec![(dc, 1.0)],
        }
    }

    /// Reconstruction of an AWGN-style rate-0.9021 irregular design with
    /// maximum variable degree 19 and most variable nodes at degree 3.
    pub fn code1_style(n: usize) -> Self {
        Self {
            name: "code1-style".into(),
            n,
            rate: 0.9021,
            variable: vec![(2, 0.09), (3, 0.84), (8, 0.04), (19, 0.03)],
            check: vec![],
        }
        .with_concentrated_checks()
    }

    /// [`Self::code1_style`] with its degree-3 nodes raised to degree 4.
    pub fn code2_style(n: usize) -> Self {
        let mut d = preclude_degree3(&Self::code1_style(n));
        d.name = "code2-style".into();
        d
    }

    /// [`Self::code1_style`] with the top degree raised from 19 to 24.
    pub fn code3_style(n: usize) -> Self {
        let mut d = Self::code1_style(n);
        d.name = "code3-style".into();
        for p in d.variable.iter_mut().filter(|p| p.0 == 19) {
            p.0 = 24;
        }
        d.with_concentrated_checks()
    }

    pub fn preset(name: &str, n: usize) -> Result<Self> {
        match name {
            "code1" => Ok(Self::code1_style(n)),
            "code2" => Ok(Self::code2_style(n)),
            "code3" => Ok(Self::code3_style(n)),
            "regular36" => Ok(Self::regular(3, 6, n)),
            other => Err(Error::Config(format!("unknown code preset {other:?}"))),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let d: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File { path: path.into(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("degree distribution serializes")
    }
}

/// Moves all degree-3 variable mass to degree 4 and re-concentrates the
/// check side so the design rate is unchanged.
pub fn preclude_degree3(dist: &DegreeDistribution) -> DegreeDistribution {
    let moved = dist.variable_fraction(3);
    if moved == 0.0 {
        return dist.clone();
    }
    let mut variable: Vec<(usize, f64)> = dist.variable.iter().copied().filter(|p| p.0 != 3).collect();
    match variable.iter_mut().find(|p| p.0 == 4) {
        Some(p) => p.1 += moved,
        None => variable.push((4, moved)),
    }
    variable.sort_by_key(|p| p.0);
    DegreeDistribution { name: format!("{}-no-deg3", dist.name), variable, ..dist.clone() }.with_concentrated_checks()
}

/// PEG/ACE construction settings.
#[derive(Debug, Clone)]
pub struct ConstructOptions {
    pub seed: u64,
    /// Cycles up to length `2 · ace_depth` are checked against `ace_eta`.
    pub ace_depth: usize,
    pub ace_eta: usize,
    /// Fresh seeds tried when a placement gets stuck.
    pub retries: usize,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self { seed: 0, ace_depth: 9, ace_eta: 4, retries: 8 }
    }
}

/// Builds a parity-check matrix whose degree histogram matches
/// `dist.profile()` exactly.
pub fn construct(dist: &DegreeDistribution, seed: u64, ace_depth: usize, ace_eta: usize) -> Result<ParityCheckMatrix> {
    construct_with(dist, &ConstructOptions { seed, ace_depth, ace_eta, ..Default::default() })
}

pub fn construct_with(dist: &DegreeDistribution, opts: &ConstructOptions) -> Result<ParityCheckMatrix> {
    let profile = dist.profile()?;
    let mut best: Option<(usize, ParityCheckMatrix)> = None;
    let mut last_err = None;
    // Placement near the end is constrained by the remaining check
    // capacity and can be forced into a 4-cycle; other seeds usually avoid it.
    for attempt in 0..=opts.retries {
        let seed = opts.seed.wrapping_add((attempt as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        match Peg::new(&profile, seed, opts).run() {
            Ok(h) => {
                let c4 = count_four_cycles(&h);
                if best.as_ref().is_none_or(|(b, _)| c4 < *b) {
                    best = Some((c4, h));
                }
                if c4 == 0 {
                    break;
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((_, h)) => Ok(h),
        None => Err(last_err.unwrap()),
    }
}

/// Number of length-4 cycles: pairs of columns sharing at least two rows,
/// counted `C(shared, 2)` times.
pub fn count_four_cycles(h: &ParityCheckMatrix) -> usize {
    let mut shared = vec![0usize; h.n()];
    let mut touched = Vec::new();
    let mut total = 0;
    for a in 0..h.n() {
        for &r in h.col(a) {
            for &b in h.row(r) {
                if b > a {
                    if shared[b] == 0 {
                        touched.push(b);
                    }
                    shared[b] += 1;
                }
            }
        }
        for b in touched.drain(..) {
            total += shared[b] * (shared[b] - 1) / 2;
            shared[b] = 0;
        }
    }
    total
}

struct Peg<'a> {
    var_deg: &'a [usize],
    target: &'a [usize],
    var_adj: Vec<Vec<u32>>,
    chk_adj: Vec<Vec<u32>>,
    rng: ChaCha8Rng,
    ace_depth: usize,
    ace_eta: i64,
    // BFS scratch, reset by bumping `stamp`.
    stamp: u32,
    chk_mark: Vec<u32>,
    chk_layer: Vec<u32>,
    chk_ace: Vec<i64>,
    var_mark: Vec<u32>,
    var_layer: Vec<u32>,
    var_ace: Vec<i64>,
}

impl<'a> Peg<'a> {
    fn new(p: &'a DegreeProfile, seed: u64, opts: &ConstructOptions) -> Self {
        let (n, m) = (p.variable.len(), p.check.len());
        Self {
            var_deg: &p.variable,
            target: &p.check,
            var_adj: vec![Vec::new(); n],
            chk_adj: vec![Vec::new(); m],
            rng: ChaCha8Rng::seed_from_u64(seed),
            ace_depth: opts.ace_depth,
            ace_eta: opts.ace_eta as i64,
            stamp: 0,
            chk_mark: vec![0; m],
            chk_layer: vec![0; m],
            chk_ace: vec![0; m],
            var_mark: vec![0; n],
            var_layer: vec![0; n],
            var_ace: vec![0; n],
        }
    }

    fn capacity(&self, c: usize) -> usize {
        self.target[c] - self.chk_adj[c].len()
    }

    /// Layered BFS from `v`, recording for each reached check its layer and
    /// the smallest ACE over shortest paths from `v`.
    fn explore(&mut self, v: usize) {
        self.stamp += 1;
        let s = self.stamp;
        let m = self.chk_adj.len();
        let ace_v = self.var_deg[v] as i64 - 2;
        self.var_mark[v] = s;
        self.var_layer[v] = 0;
        let mut frontier: Vec<u32> = Vec::new();
        for &c in &self.var_adj[v] {
            let c = c as usize;
            self.chk_mark[c] = s;
            self.chk_layer[c] = 0;
            self.chk_ace[c] = ace_v;
            frontier.push(c as u32);
        }
        let mut reached = frontier.len();
        let mut layer = 0u32;
        let mut next_vars: Vec<u32> = Vec::new();
        let mut next_checks: Vec<u32> = Vec::new();
        while !frontier.is_empty() && reached < m {
            next_vars.clear();
            for &c in &frontier {
                let c = c as usize;
                let base = self.chk_ace[c];
                for &u in &self.chk_adj[c] {
                    let u = u as usize;
                    let a = base + self.var_deg[u] as i64 - 2;
                    if self.var_mark[u] != s {
                        self.var_mark[u] = s;
                        self.var_layer[u] = layer + 1;
                        self.var_ace[u] = a;
                        next_vars.push(u as u32);
                    } else if self.var_layer[u] == layer + 1 && a < self.var_ace[u] {
                        self.var_ace[u] = a;
                    }
                }
            }
            next_checks.clear();
            for &u in &next_vars {
                let u = u as usize;
                let a = self.var_ace[u];
                for &c in &self.var_adj[u] {
                    let c = c as usize;
                    if self.chk_mark[c] != s {
                        self.chk_mark[c] = s;
                        self.chk_layer[c] = layer + 1;
                        self.chk_ace[c] = a;
                        next_checks.push(c as u32);
                    } else if self.chk_layer[c] == layer + 1 && a < self.chk_ace[c] {
                        self.chk_ace[c] = a;
                    }
                }
            }
            reached += next_checks.len();
            layer += 1;
            std::mem::swap(&mut frontier, &mut next_checks);
        }
    }

    fn place_edge(&mut self, v: usize) -> Result<()> {
        let m = self.chk_adj.len();
        let candidates: Vec<usize> = if self.var_adj[v].is_empty() {
            (0..m).filter(|&c| self.capacity(c) > 0).collect()
        } else {
            self.explore(v);
            let s = self.stamp;
            let open: Vec<usize> = (0..m).filter(|&c| self.capacity(c) > 0 && !self.var_adj[v].contains(&(c as u32))).collect();
            let unreached: Vec<usize> = open.iter().copied().filter(|&c| self.chk_mark[c] != s).collect();
            if !unreached.is_empty() {
                unreached
            } else {
                let far = open.iter().map(|&c| self.chk_layer[c]).max();
                let far_set: Vec<usize> = open.iter().copied().filter(|&c| Some(self.chk_layer[c]) == far).collect();
                // A check at layer L closes a cycle of length 2L + 2.
                let cycle_len = far.map_or(usize::MAX, |l| 2 * l as usize + 2);
                if cycle_len <= 2 * self.ace_depth && !far_set.is_empty() {
                    let good: Vec<usize> = far_set.iter().copied().filter(|&c| self.chk_ace[c] >= self.ace_eta).collect();
                    if good.is_empty() {
                        let best = far_set.iter().map(|&c| self.chk_ace[c]).max().unwrap();
                        far_set.into_iter().filter(|&c| self.chk_ace[c] == best).collect()
                    } else {
                        good
                    }
                } else {
                    far_set
                }
            }
        };
        let most_room = candidates.iter().map(|&c| self.capacity(c)).max();
        let best: Vec<usize> = candidates.into_iter().filter(|&c| Some(self.capacity(c)) == most_room).collect();
        let &c = best
            .choose(&mut self.rng)
            .ok_or_else(|| Error::Construction(format!("no check left for variable {v}")))?;
        self.var_adj[v].push(c as u32);
        self.chk_adj[c].push(v as u32);
        Ok(())
    }

    /// 4-cycles through the edge `(v, c)`.
    fn cycles_through(&self, v: usize, c: usize) -> usize {
        let mine = &self.var_adj[v];
        self.chk_adj[c]
            .iter()
            .filter(|&&u| u as usize != v)
            .map(|&u| self.var_adj[u as usize].iter().filter(|d| mine.contains(d)).count() - 1)
            .sum()
    }

    fn swap_edges(&mut self, (v, c): (usize, usize), (u, d): (usize, usize)) {
        let replace = |list: &mut Vec<u32>, old: usize, new: usize| {
            let i = list.iter().position(|&x| x as usize == old).unwrap();
            list[i] = new as u32;
        };
        replace(&mut self.var_adj[v], c, d);
        replace(&mut self.var_adj[u], d, c);
        replace(&mut self.chk_adj[c], v, u);
        replace(&mut self.chk_adj[d], u, v);
    }

    /// Degree-preserving edge swaps `(v,c),(u,d) -> (v,d),(u,c)`, kept only
    /// when they lower the number of 4-cycles.
    fn rewire_four_cycles(&mut self) {
        const TRIES_PER_EDGE: usize = 200;
        const PASSES: usize = 20;
        // Total swap attempts per edge of the graph, across all passes.
        const BUDGET_PER_EDGE: usize = 20;
        let m = self.chk_adj.len();
        let mut budget = BUDGET_PER_EDGE * self.var_deg.iter().sum::<usize>();
        for _ in 0..PASSES {
            let bad: Vec<(usize, usize)> = (0..self.var_adj.len())
                .flat_map(|v| self.var_adj[v].iter().map(move |&c| (v, c as usize)))
                .filter(|&(v, c)| self.cycles_through(v, c) > 0)
                .collect();
            if bad.is_empty() {
                return;
            }
            let mut improved = false;
            for (v, c) in bad {
                for _ in 0..TRIES_PER_EDGE {
                    if budget == 0 {
                        return;
                    }
                    budget -= 1;
                    // Earlier swaps may have moved this edge.
                    if !self.var_adj[v].contains(&(c as u32)) {
                        break;
                    }
                    let before_vc = self.cycles_through(v, c);
                    if before_vc == 0 {
                        break;
                    }
                    let d = self.rng.random_range(0..m);
                    let &u = self.chk_adj[d].choose(&mut self.rng).unwrap();
                    let u = u as usize;
                    if d == c || u == v || self.var_adj[v].contains(&(d as u32)) || self.var_adj[u].contains(&(c as u32)) {
                        continue;
                    }
                    let before = before_vc + self.cycles_through(u, d);
                    self.swap_edges((v, c), (u, d));
                    let after = self.cycles_through(v, d) + self.cycles_through(u, c);
                    if after < before {
                        improved = true;
                        break;
                    }
                    self.swap_edges((v, d), (u, c));
                }
            }
            if !improved {
                return;
            }
        }
    }

    fn run(mut self) -> Result<ParityCheckMatrix> {
        // Highest degrees first: their many pairwise check constraints are
        // easiest to satisfy while the graph is still sparse.
        for v in (0..self.var_deg.len()).rev() {
            for _ in 0..self.var_deg[v] {
                self.place_edge(v)?;
            }
        }
        self.rewire_four_cycles();
        let n = self.var_deg.len();
        let rows = self.chk_adj.into_iter().map(|r| r.into_iter().map(|v| v as usize).collect()).collect();
        ParityCheckMatrix::from_rows(n, rows)
    }
}

/// Length of the shortest cycle of the Tanner graph, or `None` if acyclic.
pub fn girth(h: &ParityCheckMatrix) -> Option<usize> {
    let (n, m) = (h.n(), h.m());
    // Nodes 0..n are variables, n..n+m are checks.
    let neighbours = |x: usize| -> Vec<usize> {
        if x < n {
            h.col(x).iter().map(|&c| n + c).collect()
        } else {
            h.row(x - n).to_vec()
        }
    };
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; n + m];
    let mut parent = vec![usize::MAX; n + m];
    for root in 0..n {
        let mut touched = vec![root];
        dist[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        'bfs: while let Some(x) = queue.pop_front() {
            if 2 * dist[x] + 1 >= best {
                break;
            }
            for y in neighbours(x) {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    parent[y] = x;
                    touched.push(y);
                    queue.push_back(y);
                } else if parent[x] != y {
                    best = best.min(dist[x] + dist[y] + 1);
                    if best <= 4 {
                        break 'bfs;
                    }
                }
            }
        }
        for x in touched {
            dist[x] = usize::MAX;
            parent[x] = usize::MAX;
        }
    }
    (best != usize::MAX).then_some(best)
}

/// An `(a, b)` absorbing set: `a` variable nodes, `b` unsatisfied checks.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AbsorbingSet {
    pub a: usize,
    pub b: usize,
    pub variables: Vec<usize>,
}

/// Result of [`find_small_absorbing_candidates`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbsorbingSearch {
    pub sets: Vec<AbsorbingSet>,
    /// False when the subset budget ran out before the search finished.
    pub complete: bool,
    pub subsets_examined: usize,
}

/// Checks whether `vars` is an absorbing set: every member sees strictly
/// more satisfied than unsatisfied checks. Returns the number of
/// unsatisfied checks when it is.
pub fn absorbing_b(h: &ParityCheckMatrix, vars: &[usize]) -> Option<usize> {
    let mut count = std::collections::HashMap::new();
    for &v in vars {
        for &c in h.col(v) {
            *count.entry(c).or_insert(0usize) += 1;
        }
    }
    for &v in vars {
        let odd = h.col(v).iter().filter(|c| count[c] % 2 == 1).count();
        if h.col(v).len() - odd <= odd {
            return None;
        }
    }
    Some(count.values().filter(|&&k| k % 2 == 1).count())
}

/// Enumerates connected absorbing sets of at most `max_a` variable nodes of
/// degree ≤ 4 with at most `max_b` unsatisfied checks. Connected subsets are
/// generated once each (ESU enumeration); `budget` caps the number examined.
pub fn find_small_absorbing_candidates(h: &ParityCheckMatrix, max_a: usize, max_b: usize, budget: usize) -> AbsorbingSearch {
    let eligible: Vec<bool> = (0..h.n()).map(|v| h.col(v).len() <= 4).collect();
    let adj: Vec<Vec<usize>> = (0..h.n())
        .map(|v| {
            if !eligible[v] {
                return Vec::new();
            }
            let set: BTreeSet<usize> = h
                .col(v)
                .iter()
                .flat_map(|&c| h.row(c).iter().copied())
                .filter(|&u| u != v && eligible[u])
                .collect();
            set.into_iter().collect()
        })
        .collect();

    struct Ctx<'a> {
        h: &'a ParityCheckMatrix,
        adj: &'a [Vec<usize>],
        max_a: usize,
        max_b: usize,
        budget: usize,
        examined: usize,
        sets: Vec<AbsorbingSet>,
        exhausted: bool,
    }

    fn visit(ctx: &mut Ctx<'_>, sub: &mut Vec<usize>, ext: Vec<usize>, root: usize) {
        if ctx.exhausted {
            return;
        }
        ctx.examined += 1;
        if ctx.examined > ctx.budget {
            ctx.exhausted = true;
            return;
        }
        if let Some(b) = absorbing_b(ctx.h, sub) {
            if b <= ctx.max_b {
                let mut vars = sub.clone();
                vars.sort_unstable();
                ctx.sets.push(AbsorbingSet { a: vars.len(), b, variables: vars });
            }
        }
        if sub.len() == ctx.max_a {
            return;
        }
        let mut ext = ext;
        while let Some(w) = ext.pop() {
            // Exclusive neighbours of w: not in sub and not adjacent to sub.
            let mut next = ext.clone();
            for &u in &ctx.adj[w] {
                if u > root
                    && !sub.contains(&u)
                    && !next.contains(&u)
                    && u != w
                    && !sub.iter().any(|&s| ctx.adj[s].binary_search(&u).is_ok())
                {
                    next.push(u);
                }
            }
            sub.push(w);
            visit(ctx, sub, next, root);
            sub.pop();
            if ctx.exhausted {
                return;
            }
        }
    }

    let mut ctx = Ctx { h, adj: &adj, max_a, max_b, budget, examined: 0, sets: Vec::new(), exhausted: false };
    for v in 0..h.n() {
        if !eligible[v] || max_a == 0 {
            continue;
        }
        let ext: Vec<usize> = adj[v].iter().copied().filter(|&u| u > v).collect();
        visit(&mut ctx, &mut vec![v], ext, v);
        if ctx.exhausted {
            break;
        }
    }
    let mut sets = ctx.sets;
    sets.sort();
    sets.dedup();
    AbsorbingSearch { sets, complete: !ctx.exhausted, subsets_examined: ctx.examined.min(budget) }
}
