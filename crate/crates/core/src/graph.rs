//! The browsing substrate: an immutable directed graph stored as a
//! compressed adjacency index (offsets + neighbor array).
//!
//! Graphs are either grown with a rank-based attachment rule, which gives a
//! scale-free degree distribution with a tunable exponent, or loaded from an
//! edge-list file and reduced to their largest strongly connected component.
//! Either way every node has at least one outgoing link.

use std::fmt;
use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::error::{Error, Result};

/// Dense page index in `[0, n)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

/// Parameters a generated graph was built from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthParams {
    pub n: usize,
    pub m: usize,
    pub gamma: f64,
    pub seed: u64,
}

impl GrowthParams {
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::config("m must be at least 1"));
        }
        if self.n < self.m + 1 {
            return Err(Error::config(format!(
                "n = {} must be at least m + 1 = {}",
                self.n,
                self.m + 1
            )));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::config("n does not fit a 32-bit node id"));
        }
        if !(self.gamma.is_finite() && self.gamma > 2.0) {
            return Err(Error::config(format!(
                "gamma = {} must be > 2",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Exponent of the rank attachment kernel `R^-a`.
    pub fn attachment_exponent(&self) -> f64 {
        attachment_exponent(self.gamma)
    }
}

/// Degree exponent `gamma` of the rank model corresponds to the kernel
/// exponent `a = 1 / (gamma - 1)`.
pub fn attachment_exponent(gamma: f64) -> f64 {
    1.0 / (gamma - 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WebGraph {
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    growth: Option<GrowthParams>,
    /// Original ids of loaded graphs, indexed by dense id.
    labels: Option<Vec<u64>>,
}

impl WebGraph {
    /// Builds the index from directed edges over `n` nodes. Self-loops and
    /// duplicates are dropped; each adjacency list ends up sorted.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(u, v) in edges {
            if u != v {
                offsets[u.index() + 1] += 1;
            }
        }
        for i in 1..=n {
            offsets[i] += offsets[i - 1];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![NodeId(0); offsets[n]];
        for &(u, v) in edges {
            if u != v {
                neighbors[fill[u.index()]] = v;
                fill[u.index()] += 1;
            }
        }

        // sort + dedup each list, compacting in place
        let mut write = 0;
        let mut new_offsets = vec![0usize; n + 1];
        for u in 0..n {
            let (lo, hi) = (offsets[u], offsets[u + 1]);
            neighbors[lo..hi].sort_unstable();
            let mut last = None;
            for i in lo..hi {
                let v = neighbors[i];
                if last != Some(v) {
                    neighbors[write] = v;
                    write += 1;
                    last = Some(v);
                }
            }
            new_offsets[u + 1] = write;
        }
        neighbors.truncate(write);
        neighbors.shrink_to_fit();

        WebGraph {
            offsets: new_offsets,
            neighbors,
            growth: None,
            labels: None,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of directed adjacency entries.
    pub fn num_entries(&self) -> usize {
        self.neighbors.len()
    }

    pub fn growth_params(&self) -> Option<&GrowthParams> {
        self.growth.as_ref()
    }

    /// Original id of a node in a loaded graph (identity for generated ones).
    pub fn label(&self, u: NodeId) -> u64 {
        match &self.labels {
            Some(l) => l[u.index()],
            None => u.0 as u64,
        }
    }

    /// Adjacency list of `u`, stable across calls.
    pub fn out_neighbors(&self, u: NodeId) -> Result<&[NodeId]> {
        if u.index() >= self.n() {
            return Err(Error::Bounds {
                node: u.0 as u64,
                n: self.n(),
            });
        }
        Ok(self.neighbors(u))
    }

    /// Unchecked-by-`Result` variant for hot loops; panics when out of range.
    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.neighbors[self.offsets[u.index()]..self.offsets[u.index() + 1]]
    }

    #[inline]
    pub fn degree(&self, u: NodeId) -> usize {
        self.offsets[u.index() + 1] - self.offsets[u.index()]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n()];
        for v in &self.neighbors {
            deg[v.index()] += 1;
        }
        deg
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.n() as u32).map(NodeId)
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v)))
    }

    pub fn is_symmetric(&self) -> bool {
        self.edges()
            .all(|(u, v)| self.neighbors(v).binary_search(&u).is_ok())
    }

    pub fn has_dangling(&self) -> bool {
        self.nodes().any(|u| self.degree(u) == 0)
    }

    /// Writes one `source target` line per edge, sorted by (source, target).
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (u, v) in self.edges() {
            writeln!(out, "{} {}", self.label(u), self.label(v))?;
        }
        out.flush()
    }
}

/// Grows a graph where every new node links to `m` distinct older nodes.
/// The node of age rank `R` (oldest = 1) is chosen with probability
/// proportional to `R^-a`, `a = 1 / (gamma - 1)`; each link is inserted in
/// both directions.
pub fn generate_scale_free(n: usize, m: usize, gamma: f64, seed: u64) -> Result<WebGraph> {
    let params = GrowthParams { n, m, gamma, seed };
    params.validate()?;
    let a = params.attachment_exponent();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut edges: Vec<(NodeId, NodeId)> = Vec::with_capacity(2 * n * m);
    let mut targets: Vec<u32> = Vec::with_capacity(m);
    for t in 1..n {
        targets.clear();
        if t <= m {
            targets.extend(0..t as u32);
        } else {
            let ranks = Zipf::new(t as f64, a)
                .map_err(|e| Error::config(format!("rank sampler: {e}")))?;
            while targets.len() < m {
                let r = ranks.sample(&mut rng) as u32;
                let target = r - 1;
                if !targets.contains(&target) {
                    targets.push(target);
                }
            }
        }
        let new = NodeId(t as u32);
        for &target in &targets {
            edges.push((new, NodeId(target)));
            edges.push((NodeId(target), new));
        }
    }

    let mut g = WebGraph::from_edges(n, &edges);
    g.growth = Some(params);
    Ok(g)
}

/// Reads an edge list, optionally symmetrizes it, and keeps the largest
/// strongly connected component with ids re-densified in ascending order of
/// their original value.
pub fn load_edge_list<R: BufRead>(reader: R, symmetrize: bool) -> Result<WebGraph> {
    let mut raw: Vec<(u64, u64)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(format!("edge list line {lineno}"), e))?;
        if line.starts_with('#') {
            continue;
        }
        raw.push(parse_edge_line(&line).map_err(|msg| Error::Parse { line: lineno, msg })?);
    }

    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() > u32::MAX as usize {
        return Err(Error::Data("too many nodes for 32-bit ids".into()));
    }
    let dense = |x: u64| NodeId(ids.binary_search(&x).unwrap() as u32);

    let mut edges: Vec<(NodeId, NodeId)> = Vec::with_capacity(raw.len() * 2);
    for &(u, v) in &raw {
        edges.push((dense(u), dense(v)));
        if symmetrize {
            edges.push((dense(v), dense(u)));
        }
    }
    drop(raw);
    let full = WebGraph::from_edges(ids.len(), &edges);
    drop(edges);

    let comp = largest_scc(&full);
    if comp.len() < 2 {
        return Err(Error::Data(
            "largest strongly connected component has no links".into(),
        ));
    }

    // comp is sorted by dense id, which preserves original id order
    let mut remap = vec![u32::MAX; full.n()];
    for (new, &old) in comp.iter().enumerate() {
        remap[old.index()] = new as u32;
    }
    let mut kept = Vec::new();
    for &u in &comp {
        for &v in full.neighbors(u) {
            let nv = remap[v.index()];
            if nv != u32::MAX {
                kept.push((NodeId(remap[u.index()]), NodeId(nv)));
            }
        }
    }
    let mut g = WebGraph::from_edges(comp.len(), &kept);
    g.labels = Some(comp.iter().map(|u| ids[u.index()]).collect());
    Ok(g)
}

fn parse_edge_line(line: &str) -> std::result::Result<(u64, u64), String> {
    let mut parts = line.split(' ');
    let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(format!("expected two space-separated ids, got {line:?}"));
    };
    let parse = |s: &str| {
        if s.is_empty() || !s.bytes().all(|c| c.is_ascii_digit()) {
            return Err(format!("invalid node id {s:?}"));
        }
        s.parse::<u64>().map_err(|e| format!("invalid node id {s:?}: {e}"))
    };
    Ok((parse(a)?, parse(b)?))
}

/// Nodes of the largest strongly connected component, ascending. Ties go to
/// the component holding the smallest node id.
pub fn largest_scc(g: &WebGraph) -> Vec<NodeId> {
    let comp = scc_labels(g);
    let ncomp = comp.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut sizes = vec![0usize; ncomp];
    let mut first = vec![usize::MAX; ncomp];
    for (u, &c) in comp.iter().enumerate() {
        sizes[c as usize] += 1;
        first[c as usize] = first[c as usize].min(u);
    }
    let Some(best) = (0..ncomp).max_by(|&a, &b| {
        sizes[a]
            .cmp(&sizes[b])
            .then_with(|| first[b].cmp(&first[a]))
    }) else {
        return Vec::new();
    };
    comp.iter()
        .enumerate()
        .filter(|&(_, &c)| c as usize == best)
        .map(|(u, _)| NodeId(u as u32))
        .collect()
}

/// Iterative Tarjan; returns a component label per node.
fn scc_labels(g: &WebGraph) -> Vec<u32> {
    const UNSEEN: u32 = u32::MAX;
    let n = g.n();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack: Vec<u32> = Vec::new();
    // (node, next neighbor position)
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut next_index = 0u32;
    let mut next_comp = 0u32;

    for root in 0..n as u32 {
        if index[root as usize] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root as usize] = next_index;
        low[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(top) = call.last_mut() {
            let u = top.0;
            let adj = g.neighbors(NodeId(u));
            if top.1 < adj.len() {
                let v = adj[top.1].0;
                top.1 += 1;
                if index[v as usize] == UNSEEN {
                    index[v as usize] = next_index;
                    low[v as usize] = next_index;
                    next_index += 1;
                    stack.push(v);
                    on_stack[v as usize] = true;
                    call.push((v, 0));
                } else if on_stack[v as usize] {
                    low[u as usize] = low[u as usize].min(index[v as usize]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent as usize] = low[parent as usize].min(low[u as usize]);
            }
            if low[u as usize] == index[u as usize] {
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w as usize] = false;
                    comp[w as usize] = next_comp;
                    if w == u {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}
