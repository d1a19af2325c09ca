//! Sum-product belief propagation in the tanh domain.
//!
//! [`SerialBpDecoder`] processes one check at a time and immediately folds
//! the new check messages into the variable posteriors (layered schedule).
//! [`FloodingBpDecoder`] updates all checks and then all variables each
//! iteration and serves as a schedule reference.

use super::ParityCheckMatrix;
use crate::scalar::Scalar;

/// Default bound on BP iterations.
pub const DEFAULT_MAX_ITERS: usize = 50;
/// Magnitude limit for check-to-variable messages.
pub const MESSAGE_MAX: f64 = 30.0;

/// Hard decisions and convergence status of one decoding attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub bits: Vec<u8>,
    /// True when `bits` satisfies every check.
    pub converged: bool,
    /// Iterations performed; 0 when the channel decisions were already a codeword.
    pub iterations: usize,
}

/// Common interface of the BP schedules.
pub trait BpDecoder<T> {
    fn decode(&mut self, llrs: &[T], max_iters: usize) -> DecodeOutcome;
}

/// Check-major edge layout shared by both schedules.
#[derive(Debug, Clone)]
struct Graph {
    n: usize,
    check_start: Vec<usize>,
    edge_var: Vec<u32>,
}

impl Graph {
    fn new(h: &ParityCheckMatrix) -> Self {
        let mut check_start = Vec::with_capacity(h.m() + 1);
        let mut edge_var = Vec::with_capacity(h.num_edges());
        check_start.push(0);
        for row in h.rows() {
            edge_var.extend(row.iter().map(|&c| c as u32));
            check_start.push(edge_var.len());
        }
        Self { n: h.n(), check_start, edge_var }
    }

    fn num_checks(&self) -> usize {
        self.check_start.len() - 1
    }

    fn satisfied(&self, bits: &[u8]) -> bool {
        (0..self.num_checks()).all(|c| {
            self.edge_var[self.check_start[c]..self.check_start[c + 1]]
                .iter()
                .fold(0u8, |acc, &v| acc ^ bits[v as usize])
                == 0
        })
    }
}

#[inline]
fn hard_decide<T: Scalar>(llrs: &[T], bits: &mut [u8]) {
    for (b, &l) in bits.iter_mut().zip(llrs) {
        *b = u8::from(l < T::zero());
    }
}

/// Largest `|Π tanh|` passed to `atanh`; `tanh(15)` rounds to 1 in `f32`.
fn tanh_limit<T: Scalar>(llr_max: T) -> T {
    (llr_max * T::lit(0.5)).tanh().min(T::one() - T::epsilon())
}

/// Extrinsic tanh-rule update for one check: given the incoming
/// `tanh(q/2)` values, writes `2 atanh(Π_{j≠i} t_j)` into `out`.
#[inline]
fn check_update<T: Scalar>(t: &[T], out: &mut [T], limit: T) {
    let mut prefix = T::one();
    for (o, &x) in out.iter_mut().zip(t) {
        *o = prefix;
        prefix *= x;
    }
    let mut suffix = T::one();
    for (o, &x) in out.iter_mut().zip(t).rev() {
        let p = (*o * suffix).max(-limit).min(limit);
        *o = T::lit(2.0) * p.atanh();
        suffix *= x;
    }
}

/// Layered (serial, check-by-check) sum-product decoder. Holds per-frame
/// scratch state, so use one instance per worker thread.
#[derive(Debug, Clone)]
pub struct SerialBpDecoder<T> {
    graph: Graph,
    messages: Vec<T>,
    posterior: Vec<T>,
    incoming: Vec<T>,
    tanh_in: Vec<T>,
    outgoing: Vec<T>,
    bits: Vec<u8>,
    limit: T,
    llr_max: T,
}

impl<T: Scalar> SerialBpDecoder<T> {
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let graph = Graph::new(h);
        let max_deg = (0..graph.num_checks())
            .map(|c| graph.check_start[c + 1] - graph.check_start[c])
            .max()
            .unwrap_or(0);
        let llr_max = T::lit(MESSAGE_MAX);
        Self {
            messages: vec![T::zero(); graph.edge_var.len()],
            posterior: vec![T::zero(); graph.n],
            incoming: vec![T::zero(); max_deg],
            tanh_in: vec![T::zero(); max_deg],
            outgoing: vec![T::zero(); max_deg],
            bits: vec![0; graph.n],
            limit: tanh_limit(llr_max),
            llr_max,
            graph,
        }
    }

    fn process_checks(&mut self) {
        let g = &self.graph;
        for c in 0..g.num_checks() {
            let (s, e) = (g.check_start[c], g.check_start[c + 1]);
            let d = e - s;
            for i in 0..d {
                let v = g.edge_var[s + i] as usize;
                let q = self.posterior[v] - self.messages[s + i];
                self.incoming[i] = q;
                self.tanh_in[i] = (q * T::lit(0.5)).tanh();
            }
            check_update(&self.tanh_in[..d], &mut self.outgoing[..d], self.limit);
            for i in 0..d {
                let v = g.edge_var[s + i] as usize;
                let r = self.outgoing[i];
                self.messages[s + i] = r;
                self.posterior[v] = self.incoming[i] + r;
            }
        }
    }
}

impl<T: Scalar> BpDecoder<T> for SerialBpDecoder<T> {
    fn decode(&mut self, llrs: &[T], max_iters: usize) -> DecodeOutcome {
        assert_eq!(llrs.len(), self.graph.n, "llr length must equal block length");
        for (p, &l) in self.posterior.iter_mut().zip(llrs) {
            *p = l.max(-self.llr_max).min(self.llr_max);
        }
        self.messages.iter_mut().for_each(|m| *m = T::zero());
        hard_decide(&self.posterior, &mut self.bits);
        if self.graph.satisfied(&self.bits) {
            return DecodeOutcome { bits: self.bits.clone(), converged: true, iterations: 0 };
        }
        for it in 1..=max_iters.max(1) {
            self.process_checks();
            hard_decide(&self.posterior, &mut self.bits);
            if self.graph.satisfied(&self.bits) {
                return DecodeOutcome { bits: self.bits.clone(), converged: true, iterations: it };
            }
        }
        DecodeOutcome { bits: self.bits.clone(), converged: false, iterations: max_iters.max(1) }
    }
}

/// Flooding-schedule sum-product decoder.
#[derive(Debug, Clone)]
pub struct FloodingBpDecoder<T> {
    graph: Graph,
    to_check: Vec<T>,
    to_var: Vec<T>,
    tanh_in: Vec<T>,
    outgoing: Vec<T>,
    posterior: Vec<T>,
    bits: Vec<u8>,
    limit: T,
    llr_max: T,
}

impl<T: Scalar> FloodingBpDecoder<T> {
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let graph = Graph::new(h);
        let e = graph.edge_var.len();
        let max_deg = (0..graph.num_checks())
            .map(|c| graph.check_start[c + 1] - graph.check_start[c])
            .max()
            .unwrap_or(0);
        let llr_max = T::lit(MESSAGE_MAX);
        Self {
            to_check: vec![T::zero(); e],
            to_var: vec![T::zero(); e],
            tanh_in: vec![T::zero(); max_deg],
            outgoing: vec![T::zero(); max_deg],
            posterior: vec![T::zero(); graph.n],
            bits: vec![0; graph.n],
            limit: tanh_limit(llr_max),
            llr_max,
            graph,
        }
    }
}

impl<T: Scalar> BpDecoder<T> for FloodingBpDecoder<T> {
    fn decode(&mut self, llrs: &[T], max_iters: usize) -> DecodeOutcome {
        assert_eq!(llrs.len(), self.graph.n, "llr length must equal block length");
        let channel: Vec<T> = llrs.iter().map(|&l| l.max(-self.llr_max).min(self.llr_max)).collect();
        hard_decide(&channel, &mut self.bits);
        if self.graph.satisfied(&self.bits) {
            return DecodeOutcome { bits: self.bits.clone(), converged: true, iterations: 0 };
        }
        let g = &self.graph;
        for (m, &v) in self.to_check.iter_mut().zip(&g.edge_var) {
            *m = channel[v as usize];
        }
        for it in 1..=max_iters.max(1) {
            for c in 0..g.num_checks() {
                let (s, e) = (g.check_start[c], g.check_start[c + 1]);
                let d = e - s;
                for i in 0..d {
                    self.tanh_in[i] = (self.to_check[s + i] * T::lit(0.5)).tanh();
                }
                check_update(&self.tanh_in[..d], &mut self.outgoing[..d], self.limit);
                self.to_var[s..e].copy_from_slice(&self.outgoing[..d]);
            }
            self.posterior.copy_from_slice(&channel);
            for (r, &v) in self.to_var.iter().zip(&g.edge_var) {
                self.posterior[v as usize] += *r;
            }
            for ((m, &r), &v) in self.to_check.iter_mut().zip(&self.to_var).zip(&g.edge_var) {
                *m = self.posterior[v as usize] - r;
            }
            hard_decide(&self.posterior, &mut self.bits);
            if g.satisfied(&self.bits) {
                return DecodeOutcome { bits: self.bits.clone(), converged: true, iterations: it };
            }
        }
        DecodeOutcome { bits: self.bits.clone(), converged: false, iterations: max_iters.max(1) }
    }
}
