//! Information-flow graph of split conversion and a max-flow feasibility
//! check for per-symbol download sizes.
//!
//! Capacities are rational multiples of `alpha`, with `alpha = 1`.

use std::collections::VecDeque;
use std::fmt;

use itertools::Itertools;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::bounds::{serde_rational, BetaAssignment, BoundInputs, Rational};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Source,
    Sink,
    Central,
    /// Data collector of final codeword `j` (1-based).
    Collector(usize),
    /// Unchanged symbol `index` of codeword `codeword` (both 1-based).
    Unchanged {
        codeword: usize,
        index: usize,
    },
    Retired(usize),
    New {
        codeword: usize,
        index: usize,
    },
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Source => write!(f, "s"),
            Node::Sink => write!(f, "t"),
            Node::Central => write!(f, "c"),
            Node::Collector(j) => write!(f, "t{j}"),
            Node::Unchanged { codeword, index } => write!(f, "U{codeword}.{index}"),
            Node::Retired(i) => write!(f, "R{i}"),
            Node::New { codeword, index } => write!(f, "N{codeword}.{index}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub capacity: Rational,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl FlowNetwork {
    pub fn source(&self) -> usize {
        0
    }

    pub fn sink(&self) -> usize {
        1
    }

    fn index_of(&self, node: Node) -> usize {
        self.nodes
            .iter()
            .position(|&n| n == node)
            .expect("node exists")
    }
}

/// Which of its `kF` unchanged and `rF` new symbols each collector reads.
/// Local index `x < kF` is unchanged symbol `x + 1`; `x >= kF` is new
/// symbol `x - kF + 1`.
pub type Collectors = Vec<Vec<usize>>;

#[derive(Debug, Clone, Copy)]
struct Dims {
    lambda: usize,
    k_f: usize,
    r_i: usize,
    r_f: usize,
}

fn dims(b: &BoundInputs) -> Result<Dims> {
    let int = |q: Rational, what: &str| {
        if q.is_integer() {
            q.to_integer()
                .to_usize()
                .ok_or_else(|| Error::InvalidParams(format!("{what} out of range")))
        } else {
            Err(Error::InvalidParams(format!(
                "{what} = {q} must be an integer"
            )))
        }
    };
    Ok(Dims {
        lambda: b.lambda_f as usize,
        k_f: int(b.k_f, "kF")?,
        r_i: int(b.r_i, "rI")?,
        r_f: int(b.r_f, "rF")?,
    })
}

pub fn build_flow_graph(
    b: &BoundInputs,
    betas: &BetaAssignment,
    collectors: &[Vec<usize>],
) -> Result<FlowNetwork> {
    let d = dims(b)?;
    if collectors.len() != d.lambda {
        return Err(Error::InvalidParams(format!(
            "need {} collector sets, got {}",
            d.lambda,
            collectors.len()
        )));
    }
    for (j, set) in collectors.iter().enumerate() {
        let distinct = set.iter().unique().count();
        if set.len() != d.k_f || distinct != d.k_f || set.iter().any(|&x| x >= d.k_f + d.r_f) {
            return Err(Error::InvalidParams(format!(
                "collector {} must pick {} distinct symbols of {} in its codeword, got {set:?}",
                j + 1,
                d.k_f,
                d.k_f + d.r_f
            )));
        }
    }

    let mut nodes = vec![Node::Source, Node::Sink, Node::Central];
    nodes.extend((1..=d.lambda).map(Node::Collector));
    for codeword in 1..=d.lambda {
        nodes.extend((1..=d.k_f).map(|index| Node::Unchanged { codeword, index }));
    }
    nodes.extend((1..=d.r_i).map(Node::Retired));
    for codeword in 1..=d.lambda {
        nodes.extend((1..=d.r_f).map(|index| Node::New { codeword, index }));
    }
    let mut net = FlowNetwork {
        nodes,
        edges: Vec::new(),
    };
    let one = Rational::one();
    let (s, t, c) = (0, 1, 2);
    let mut edges = Vec::new();
    for (v, node) in net.nodes.iter().enumerate() {
        match node {
            Node::Unchanged { .. } => {
                edges.push(Edge {
                    from: s,
                    to: v,
                    capacity: one,
                });
                edges.push(Edge {
                    from: v,
                    to: c,
                    capacity: betas.beta1,
                });
            }
            Node::Retired(_) => {
                edges.push(Edge {
                    from: s,
                    to: v,
                    capacity: one,
                });
                edges.push(Edge {
                    from: v,
                    to: c,
                    capacity: betas.beta2,
                });
            }
            Node::New { .. } => edges.push(Edge {
                from: c,
                to: v,
                capacity: one,
            }),
            Node::Collector(_) => edges.push(Edge {
                from: v,
                to: t,
                capacity: Rational::from_integer(d.k_f as i64),
            }),
            _ => {}
        }
    }
    for (j, set) in collectors.iter().enumerate() {
        let codeword = j + 1;
        let tj = net.index_of(Node::Collector(codeword));
        for &x in set {
            let node = if x < d.k_f {
                Node::Unchanged {
                    codeword,
                    index: x + 1,
                }
            } else {
                Node::New {
                    codeword,
                    index: x - d.k_f + 1,
                }
            };
            edges.push(Edge {
                from: net.index_of(node),
                to: tj,
                capacity: one,
            });
        }
    }
    net.edges = edges;
    Ok(net)
}

/// Maximum s-t flow by shortest augmenting paths.
pub fn max_flow(net: &FlowNetwork) -> Rational {
    let n = net.nodes.len();
    // Residual arcs in pairs: 2e forward, 2e+1 backward.
    let mut to = Vec::with_capacity(2 * net.edges.len());
    let mut cap = Vec::with_capacity(2 * net.edges.len());
    let mut adj = vec![Vec::new(); n];
    for e in &net.edges {
        adj[e.from].push(to.len());
        to.push(e.to);
        cap.push(e.capacity);
        adj[e.to].push(to.len());
        to.push(e.from);
        cap.push(Rational::zero());
    }
    let (s, t) = (net.source(), net.sink());
    let mut total = Rational::zero();
    loop {
        let mut via = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &adj[u] {
                let v = to[a];
                if !seen[v] && cap[a] > Rational::zero() {
                    seen[v] = true;
                    via[v] = a;
                    queue.push_back(v);
                }
            }
        }
        if !seen[t] {
            return total;
        }
        let mut push: Option<Rational> = None;
        let mut v = t;
        while v != s {
            let a = via[v];
            push = Some(push.map_or(cap[a], |p| if cap[a] < p { cap[a] } else { p }));
            v = to[a ^ 1];
        }
        let push = push.expect("path has at least one arc");
        let mut v = t;
        while v != s {
            let a = via[v];
            cap[a] -= push;
            cap[a ^ 1] += push;
            v = to[a ^ 1];
        }
        total += push;
    }
}

/// `lambda (kF - m) + lambda m beta1 + rI beta2` with `m = min(kF, rF)`.
pub fn lemma_cut_value(b: &BoundInputs, betas: &BetaAssignment) -> Rational {
    let m = if b.r_f < b.k_f { b.r_f } else { b.k_f };
    let l = Rational::from_integer(b.lambda_f);
    l * (b.k_f - m) + l * m * betas.beta1 + b.r_i * betas.beta2
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    #[serde(with = "serde_rational")]
    pub worst_flow: Rational,
    /// Node names read by each collector in the worst configuration.
    pub worst_collectors: Vec<Vec<String>>,
    #[serde(with = "serde_rational")]
    pub lemma_cut_value: Rational,
    #[serde(with = "serde_rational")]
    pub required_flow: Rational,
    pub configurations: usize,
}

fn collectors_for_counts(d: Dims, counts: &[usize]) -> Collectors {
    counts
        .iter()
        .map(|&c| (0..d.k_f - c).chain(d.k_f..d.k_f + c).collect())
        .collect()
}

fn describe(d: Dims, collectors: &Collectors) -> Vec<Vec<String>> {
    collectors
        .iter()
        .enumerate()
        .map(|(j, set)| {
            set.iter()
                .map(|&x| {
                    let codeword = j + 1;
                    if x < d.k_f {
                        Node::Unchanged {
                            codeword,
                            index: x + 1,
                        }
                        .to_string()
                    } else {
                        Node::New {
                            codeword,
                            index: x - d.k_f + 1,
                        }
                        .to_string()
                    }
                })
                .collect()
        })
        .collect()
}

fn worst_over(
    b: &BoundInputs,
    betas: &BetaAssignment,
    configs: impl Iterator<Item = Collectors>,
) -> Result<FeasibilityReport> {
    let d = dims(b)?;
    let required = Rational::from_integer((d.lambda * d.k_f) as i64);
    let mut worst: Option<(Rational, Collectors)> = None;
    let mut count = 0;
    for collectors in configs {
        count += 1;
        let flow = max_flow(&build_flow_graph(b, betas, &collectors)?);
        if worst.as_ref().is_none_or(|(w, _)| flow < *w) {
            worst = Some((flow, collectors));
        }
    }
    let (worst_flow, collectors) = worst.expect("at least one configuration");
    Ok(FeasibilityReport {
        feasible: worst_flow >= required,
        worst_flow,
        worst_collectors: describe(d, &collectors),
        lemma_cut_value: lemma_cut_value(b, betas),
        required_flow: required,
        configurations: count,
    })
}

/// Minimum max-flow over collector configurations that differ in how many
/// new symbols each codeword's collector uses.
pub fn check_feasibility(b: &BoundInputs, betas: &BetaAssignment) -> Result<FeasibilityReport> {
    let d = dims(b)?;
    let top = d.r_f.min(d.k_f);
    let configs = (0..d.lambda)
        .map(|_| 0..=top)
        .multi_cartesian_product()
        .map(move |counts| collectors_for_counts(d, &counts));
    worst_over(b, betas, configs)
}

/// Same as [`check_feasibility`] over every `C(kF + rF, kF)^lambda` configuration.
pub fn check_feasibility_exhaustive(
    b: &BoundInputs,
    betas: &BetaAssignment,
) -> Result<FeasibilityReport> {
    let d = dims(b)?;
    let configs = (0..d.lambda)
        .map(|_| (0..d.k_f + d.r_f).combinations(d.k_f))
        .multi_cartesian_product();
    worst_over(b, betas, configs)
}
