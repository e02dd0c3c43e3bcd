//! Mixed graphs (directed plus bidirected edges) and their structural queries.
//!
//! A mixed graph holds node count `m`, a set `D` of directed edges `v -> w`
//! and a set `B` of bidirected edges `v <-> w`. Nodes are 1-based. Directed
//! edges encode possibly nonzero regression coefficients, bidirected edges
//! possibly correlated errors. Graphs are immutable after construction and
//! all queries are pure, so values can be shared freely across threads.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// 1-based node index into the owning graph's `1..=m`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(usize);

impl NodeId {
    /// Wraps a 1-based index. Panics on 0; range against `m` is checked by
    /// the owning graph.
    pub fn new(index: usize) -> Self {
        assert!(index >= 1, "node indices are 1-based");
        NodeId(index)
    }

    /// The 1-based index.
    pub fn index(self) -> usize {
        self.0
    }

    fn ix0(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Convenience alias used throughout: ordered node sets.
pub type NodeSet = BTreeSet<NodeId>;

/// A mixed graph `(V, D, B)` without self-loops.
///
/// `B` is stored as unordered pairs: membership of `{v, w}` equals membership
/// of `{w, v}`. Adjacency lists are precomputed at construction.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MixedGraph {
    m: usize,
    directed: Vec<(NodeId, NodeId)>,   // sorted, deduplicated
    bidirected: Vec<(NodeId, NodeId)>, // smaller index first, sorted, deduplicated
    parents: Vec<Vec<NodeId>>,
    children: Vec<Vec<NodeId>>,
    siblings: Vec<Vec<NodeId>>,
}

impl MixedGraph {
    /// Builds a graph from 1-based edge index pairs. Duplicates collapse;
    /// self-loops and out-of-range endpoints are rejected.
    pub fn new(
        m: usize,
        directed: impl IntoIterator<Item = (usize, usize)>,
        bidirected: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let check = |u: usize, v: usize| -> Result<()> {
            if u < 1 || u > m || v < 1 || v > m {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("edge ({u}, {v}) out of range for {m} nodes"),
                });
            }
            if u == v {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("self-loop at node {u}"),
                });
            }
            Ok(())
        };
        let mut d = BTreeSet::new();
        for (u, v) in directed {
            check(u, v)?;
            d.insert((NodeId::new(u), NodeId::new(v)));
        }
        let mut b = BTreeSet::new();
        for (u, v) in bidirected {
            check(u, v)?;
            let (lo, hi) = if u < v { (u, v) } else { (v, u) };
            b.insert((NodeId::new(lo), NodeId::new(hi)));
        }
        let mut parents = vec![Vec::new(); m];
        let mut children = vec![Vec::new(); m];
        let mut siblings = vec![Vec::new(); m];
        for &(u, v) in &d {
            children[u.ix0()].push(v);
            parents[v.ix0()].push(u);
        }
        for &(u, v) in &b {
            siblings[u.ix0()].push(v);
            siblings[v.ix0()].push(u);
        }
        for list in parents
            .iter_mut()
            .chain(children.iter_mut())
            .chain(siblings.iter_mut())
        {
            list.sort_unstable();
        }
        Ok(MixedGraph {
            m,
            directed: d.into_iter().collect(),
            bidirected: b.into_iter().collect(),
            parents,
            children,
            siblings,
        })
    }

    /// Parses the textual graph format.
    ///
    /// UTF-8 text, `#` starts a comment, the first nonblank line is
    /// `nodes <m>`, followed by `d <u> <v>` (directed `u -> v`) and
    /// `b <u> <v>` (bidirected) lines with 1-based indices.
    pub fn parse(text: &str) -> Result<Self> {
        let mut m: Option<usize> = None;
        let mut directed = Vec::new();
        let mut bidirected = Vec::new();
        for (ix, raw) in text.lines().enumerate() {
            let line_no = ix + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let tag = fields.next().unwrap();
            let err = |msg: String| Error::Parse { line: line_no, msg };
            match (tag, m) {
                ("nodes", None) => {
                    let count = fields
                        .next()
                        .ok_or_else(|| err("missing node count".into()))?;
                    let count: usize = count
                        .parse()
                        .map_err(|_| err(format!("invalid node count '{count}'")))?;
                    if fields.next().is_some() {
                        return Err(err("trailing tokens after node count".into()));
                    }
                    m = Some(count);
                }
                ("nodes", Some(_)) => return Err(err("duplicate 'nodes' line".into())),
                ("d" | "b", None) => {
                    return Err(err("edge line before 'nodes <m>' header".into()))
                }
                ("d" | "b", Some(n)) => {
                    let mut endpoint = |what: &str| -> Result<usize> {
                        let tok = fields
                            .next()
                            .ok_or_else(|| err(format!("missing {what} endpoint")))?;
                        let v: usize = tok
                            .parse()
                            .map_err(|_| err(format!("invalid node index '{tok}'")))?;
                        if v < 1 || v > n {
                            return Err(err(format!("node index {v} out of range 1..={n}")));
                        }
                        Ok(v)
                    };
                    let u = endpoint("first")?;
                    let v = endpoint("second")?;
                    if fields.next().is_some() {
                        return Err(err("trailing tokens after edge".into()));
                    }
                    if u == v {
                        return Err(err(format!("self-loop at node {u}")));
                    }
                    if tag == "d" {
                        directed.push((u, v));
                    } else {
                        bidirected.push((u, v));
                    }
                }
                _ => return Err(err(format!("unrecognized line '{line}'"))),
            }
        }
        let m = m.ok_or(Error::Parse {
            line: 0,
            msg: "missing 'nodes <m>' header".into(),
        })?;
        MixedGraph::new(m, directed, bidirected)
    }

    /// Serializes in the graph file format, edges sorted lexicographically.
    pub fn to_text(&self) -> String {
        let mut out = format!("nodes {}\n", self.m);
        for &(u, v) in &self.directed {
            out.push_str(&format!("d {u} {v}\n"));
        }
        for &(u, v) in &self.bidirected {
            out.push_str(&format!("b {u} {v}\n"));
        }
        out
    }

    /// Node count `m`.
    pub fn node_count(&self) -> usize {
        self.m
    }

    /// All nodes `1..=m` in ascending order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (1..=self.m).map(NodeId::new)
    }

    /// Directed edges, sorted.
    pub fn directed_edges(&self) -> &[(NodeId, NodeId)] {
        &self.directed
    }

    /// Bidirected edges as unordered pairs (smaller index first), sorted.
    pub fn bidirected_edges(&self) -> &[(NodeId, NodeId)] {
        &self.bidirected
    }

    pub fn has_directed(&self, u: NodeId, v: NodeId) -> bool {
        self.directed.binary_search(&(u, v)).is_ok()
    }

    pub fn has_bidirected(&self, u: NodeId, v: NodeId) -> bool {
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        self.bidirected.binary_search(&(lo, hi)).is_ok()
    }

    fn check_node(&self, v: NodeId) -> Result<()> {
        if v.index() > self.m {
            return Err(Error::Contract(format!(
                "node {v} out of range 1..={}",
                self.m
            )));
        }
        Ok(())
    }

    /// `pa(v)`: the sources of directed edges into `v`.
    pub fn parents(&self, v: NodeId) -> &[NodeId] {
        &self.parents[v.ix0()]
    }

    /// Targets of directed edges out of `v`.
    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v.ix0()]
    }

    /// `sib(v)`: nodes joined to `v` by a bidirected edge.
    pub fn siblings(&self, v: NodeId) -> &[NodeId] {
        &self.siblings[v.ix0()]
    }

    /// Nodes reachable from `v` by directed paths.
    ///
    /// With `proper = true` the trivial path is excluded, so `v` itself is a
    /// member only when a directed cycle returns to it.
    pub fn descendants(&self, v: NodeId, proper: bool) -> NodeSet {
        let mut seen = NodeSet::new();
        let mut stack: Vec<NodeId> = self.children(v).to_vec();
        while let Some(w) = stack.pop() {
            if seen.insert(w) {
                stack.extend(self.children(w).iter().copied());
            }
        }
        if !proper {
            seen.insert(v);
        }
        seen
    }

    /// `htr(v)`: nodes outside `{v} ∪ sib(v)` reachable from `v` via a
    /// half-trek, i.e. proper descendants of `v` or of one of its siblings.
    pub fn htr(&self, v: NodeId) -> NodeSet {
        let mut reach = self.descendants(v, true);
        for &s in self.siblings(v) {
            reach.insert(s);
            reach.extend(self.descendants(s, true));
        }
        reach.remove(&v);
        for s in self.siblings(v) {
            reach.remove(s);
        }
        reach
    }

    /// True when the directed part `(V, D)` has no directed cycle.
    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// One topological order of the directed part, if acyclic. Deterministic:
    /// smallest available node first.
    pub fn topological_order(&self) -> Option<Vec<NodeId>> {
        let mut indeg: Vec<usize> = (0..self.m).map(|i| self.parents[i].len()).collect();
        let mut ready: BTreeSet<NodeId> = self
            .nodes()
            .filter(|v| indeg[v.ix0()] == 0)
            .collect();
        let mut order = Vec::with_capacity(self.m);
        while let Some(&v) = ready.iter().next() {
            ready.remove(&v);
            order.push(v);
            for &w in self.children(v) {
                indeg[w.ix0()] -= 1;
                if indeg[w.ix0()] == 0 {
                    ready.insert(w);
                }
            }
        }
        (order.len() == self.m).then_some(order)
    }

    /// True when there is at most one edge between any pair of nodes:
    /// no pair carries both a directed and a bidirected edge, and no
    /// reciprocal directed pair exists.
    pub fn is_simple(&self) -> bool {
        self.directed
            .iter()
            .all(|&(u, v)| !self.has_directed(v, u) && !self.has_bidirected(u, v))
    }

    /// Upper bound on node count accepted by [`canonical_form`].
    ///
    /// [`canonical_form`]: MixedGraph::canonical_form
    pub const CANONICAL_MAX_NODES: usize = 8;

    /// Canonical string: equal for two graphs iff they are isomorphic under a
    /// simultaneous node relabeling acting on `D` and `B`.
    ///
    /// Computed as the lexicographic minimum, over all `m!` relabelings, of a
    /// fixed-width hexadecimal serialization of the edge-slot bitmask, so the
    /// cost is factorial; `m` is capped at [`Self::CANONICAL_MAX_NODES`].
    pub fn canonical_form(&self) -> Result<String> {
        let key = self.canonical_key()?;
        Ok(format!("g{}:{:032x}", self.m, key))
    }

    /// The numeric canonical key behind [`canonical_form`]. Used directly by
    /// the enumeration for deduplication.
    ///
    /// [`canonical_form`]: MixedGraph::canonical_form
    pub fn canonical_key(&self) -> Result<u128> {
        if self.m > Self::CANONICAL_MAX_NODES {
            return Err(Error::Capability(format!(
                "canonical form requires m <= {}, got {}",
                Self::CANONICAL_MAX_NODES,
                self.m
            )));
        }
        let layout = SlotLayout::new(self.m);
        let mut best = u128::MAX;
        let mut perm: Vec<usize> = (0..self.m).collect();
        permute(&mut perm, 0, &mut |p| {
            let mut mask = 0u128;
            for &(u, v) in &self.directed {
                mask |= 1u128 << layout.directed_slot(p[u.ix0()], p[v.ix0()]);
            }
            for &(u, v) in &self.bidirected {
                mask |= 1u128 << layout.bidirected_slot(p[u.ix0()], p[v.ix0()]);
            }
            if mask < best {
                best = mask;
            }
        });
        Ok(best)
    }

    /// Rebuilds a graph from a canonical key produced by [`canonical_key`].
    ///
    /// [`canonical_key`]: MixedGraph::canonical_key
    pub fn from_canonical_key(m: usize, key: u128) -> Result<Self> {
        let layout = SlotLayout::new(m);
        let mut directed = Vec::new();
        let mut bidirected = Vec::new();
        for slot in 0..layout.total_slots() {
            if key & (1u128 << slot) != 0 {
                match layout.slot_edge(slot) {
                    SlotEdge::Directed(u, v) => directed.push((u + 1, v + 1)),
                    SlotEdge::Bidirected(u, v) => bidirected.push((u + 1, v + 1)),
                }
            }
        }
        MixedGraph::new(m, directed, bidirected)
    }

    /// Applies a node relabeling: node `v` becomes `perm[v-1] + 1`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        assert_eq!(perm.len(), self.m);
        MixedGraph::new(
            self.m,
            self.directed
                .iter()
                .map(|&(u, v)| (perm[u.ix0()] + 1, perm[v.ix0()] + 1)),
            self.bidirected
                .iter()
                .map(|&(u, v)| (perm[u.ix0()] + 1, perm[v.ix0()] + 1)),
        )
    }

    /// The mixed components of an acyclic graph.
    ///
    /// One component per connected component `C_j` of the bidirected part
    /// `(V, B)`; the component graph spans `V_j = C_j ∪ pa(C_j)` and keeps
    /// the bidirected edges within `C_j` plus every directed edge pointing
    /// into `C_j`. Together the components partition the edges of the input.
    pub fn mixed_components(&self) -> Result<Vec<MixedComponent>> {
        if !self.is_acyclic() {
            return Err(Error::Contract(
                "mixed components are defined for acyclic graphs".into(),
            ));
        }
        // connected components of (V, B) via union-find over 0-based ids
        let mut rep: Vec<usize> = (0..self.m).collect();
        fn find(rep: &mut Vec<usize>, x: usize) -> usize {
            if rep[x] != x {
                let r = find(rep, rep[x]);
                rep[x] = r;
            }
            rep[x]
        }
        for &(u, v) in &self.bidirected {
            let (ru, rv) = (find(&mut rep, u.ix0()), find(&mut rep, v.ix0()));
            if ru != rv {
                rep[ru] = rv;
            }
        }
        let mut groups: Vec<Vec<NodeId>> = Vec::new();
        let mut group_of = vec![usize::MAX; self.m];
        for i in 0..self.m {
            let r = find(&mut rep, i);
            if group_of[r] == usize::MAX {
                group_of[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[group_of[r]].push(NodeId::new(i + 1));
        }
        groups.sort_by_key(|g| g[0]);

        let mut components = Vec::with_capacity(groups.len());
        for core in groups {
            let core_set: NodeSet = core.iter().copied().collect();
            let mut nodes: NodeSet = core_set.clone();
            for &v in &core {
                nodes.extend(self.parents(v).iter().copied());
            }
            let nodes: Vec<NodeId> = nodes.into_iter().collect();
            let local = |v: NodeId| nodes.binary_search(&v).unwrap() + 1;
            let directed = self
                .directed
                .iter()
                .filter(|(_, w)| core_set.contains(w))
                .map(|&(u, w)| (local(u), local(w)));
            let bidirected = self
                .bidirected
                .iter()
                .filter(|(u, w)| core_set.contains(u) && core_set.contains(w))
                .map(|&(u, w)| (local(u), local(w)));
            let graph = MixedGraph::new(nodes.len(), directed, bidirected)?;
            components.push(MixedComponent {
                nodes,
                core: core_set.into_iter().collect(),
                graph,
            });
        }
        Ok(components)
    }

    /// Validates a node id against this graph, as a contract error.
    pub fn expect_node(&self, v: NodeId) -> Result<NodeId> {
        self.check_node(v)?;
        Ok(v)
    }
}

/// One mixed component `G_j = (V_j, D_j, B_j)` of an acyclic graph.
#[derive(Clone, Debug)]
pub struct MixedComponent {
    /// `V_j` in ascending original ids; position `i` is local node `i + 1`.
    pub nodes: Vec<NodeId>,
    /// `C_j`: the bidirected-connected core whose incoming edges this
    /// component owns.
    pub core: Vec<NodeId>,
    /// The component graph over locally re-indexed nodes `1..=|V_j|`.
    pub graph: MixedGraph,
}

impl MixedComponent {
    /// Maps a component-local node back to its original id.
    pub fn origin(&self, local: NodeId) -> NodeId {
        self.nodes[local.index() - 1]
    }
}

/// Edge-slot layout used for canonical bitmask encodings: directed slots
/// first (ordered pairs, lexicographic), then bidirected slots (pairs with
/// `u < v`, lexicographic). All indices 0-based.
pub(crate) struct SlotLayout {
    m: usize,
}

pub(crate) enum SlotEdge {
    Directed(usize, usize),
    Bidirected(usize, usize),
}

impl SlotLayout {
    pub fn new(m: usize) -> Self {
        SlotLayout { m }
    }

    pub fn directed_slot_count(&self) -> usize {
        self.m * (self.m - 1)
    }

    pub fn bidirected_slot_count(&self) -> usize {
        self.m * (self.m - 1) / 2
    }

    pub fn total_slots(&self) -> usize {
        self.directed_slot_count() + self.bidirected_slot_count()
    }

    /// Slot of directed edge `u -> v`, 0-based endpoints.
    pub fn directed_slot(&self, u: usize, v: usize) -> usize {
        debug_assert!(u != v);
        u * (self.m - 1) + if v < u { v } else { v - 1 }
    }

    /// Slot of bidirected edge `{u, v}`, 0-based endpoints.
    pub fn bidirected_slot(&self, u: usize, v: usize) -> usize {
        debug_assert!(u != v);
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        // pairs (lo, hi) with lo < hi in lexicographic order
        self.directed_slot_count() + lo * self.m - lo * (lo + 1) / 2 + (hi - lo - 1)
    }

    pub fn slot_edge(&self, slot: usize) -> SlotEdge {
        if slot < self.directed_slot_count() {
            let u = slot / (self.m - 1);
            let r = slot % (self.m - 1);
            let v = if r < u { r } else { r + 1 };
            SlotEdge::Directed(u, v)
        } else {
            let mut rest = slot - self.directed_slot_count();
            let mut lo = 0;
            while rest >= self.m - lo - 1 {
                rest -= self.m - lo - 1;
                lo += 1;
            }
            SlotEdge::Bidirected(lo, lo + 1 + rest)
        }
    }
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn iv_graph() -> MixedGraph {
        MixedGraph::new(3, [(1, 2), (2, 3)], [(2, 3)]).unwrap()
    }

    /// The five-node acyclic example graph: a directed chain 1..5 with
    /// bidirected edges 1<->4 and 1<->5.
    pub(crate) fn chain5_graph() -> MixedGraph {
        MixedGraph::new(5, [(1, 2), (2, 3), (3, 4), (4, 5)], [(1, 4), (1, 5)]).unwrap()
    }

    fn n(i: usize) -> NodeId {
        NodeId::new(i)
    }

    fn set(ids: &[usize]) -> NodeSet {
        ids.iter().map(|&i| n(i)).collect()
    }

    #[test]
    fn parse_iv_graph() {
        let g = MixedGraph::parse("nodes 3\nd 1 2\nd 2 3\nb 2 3").unwrap();
        assert_eq!(g, iv_graph());
    }

    #[test]
    fn parse_single_node() {
        let g = MixedGraph::parse("nodes 1").unwrap();
        assert_eq!(g.node_count(), 1);
        assert!(g.directed_edges().is_empty());
        assert!(g.bidirected_edges().is_empty());
    }

    #[test]
    fn parse_collapses_unordered_bidirected() {
        let g = MixedGraph::parse("nodes 2\nb 1 2\nb 2 1").unwrap();
        assert_eq!(g.bidirected_edges(), &[(n(1), n(2))]);
    }

    #[test]
    fn parse_comments_and_blanks() {
        let g = MixedGraph::parse("# IV model\n\nnodes 3 # three observed\nd 1 2\nd 2 3\nb 2 3\n")
            .unwrap();
        assert_eq!(g, iv_graph());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = MixedGraph::parse("nodes 3\nd 1 4").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = MixedGraph::parse("nodes 3\nd 1 2\nb 2 2").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = MixedGraph::parse("nodes 3\nx 1 2").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn text_round_trip_is_sorted() {
        let g = MixedGraph::parse("nodes 3\nb 3 2\nd 2 3\nd 1 2").unwrap();
        assert_eq!(g.to_text(), "nodes 3\nd 1 2\nd 2 3\nb 2 3\n");
        assert_eq!(MixedGraph::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn parents_and_siblings() {
        let g = iv_graph();
        assert_eq!(g.parents(n(3)), &[n(2)]);
        assert_eq!(g.parents(n(1)), &[]);
        assert_eq!(g.siblings(n(3)), &[n(2)]);
        assert_eq!(g.siblings(n(1)), &[]);
        let c5 = chain5_graph();
        assert_eq!(c5.parents(n(2)), &[n(1)]);
        assert_eq!(c5.siblings(n(1)), &[n(4), n(5)]);
    }

    #[test]
    fn descendants_examples() {
        let c5 = chain5_graph();
        assert_eq!(c5.descendants(n(2), true), set(&[3, 4, 5]));
        assert_eq!(iv_graph().descendants(n(3), true), set(&[]));
        let cycle = MixedGraph::new(3, [(1, 2), (2, 3), (3, 1)], []).unwrap();
        assert_eq!(cycle.descendants(n(1), true), set(&[1, 2, 3]));
        assert_eq!(cycle.descendants(n(1), false), set(&[1, 2, 3]));
        assert_eq!(iv_graph().descendants(n(3), false), set(&[3]));
    }

    #[test]
    fn htr_examples() {
        let c5 = chain5_graph();
        assert_eq!(c5.htr(n(2)), set(&[3, 4, 5]));
        assert!(c5.htr(n(2)).contains(&n(5)));
        assert_eq!(iv_graph().htr(n(3)), set(&[]));
        assert_eq!(c5.htr(n(4)), set(&[2, 3, 5]));
        assert_eq!(c5.htr(n(5)), set(&[2, 3, 4]));
        assert_eq!(c5.htr(n(3)), set(&[4, 5]));
    }

    #[test]
    fn acyclicity() {
        assert!(iv_graph().is_acyclic());
        assert!(!MixedGraph::new(3, [(1, 2), (2, 3), (3, 1)], [])
            .unwrap()
            .is_acyclic());
        assert!(MixedGraph::new(2, [], [(1, 2)]).unwrap().is_acyclic());
    }

    #[test]
    fn simplicity() {
        assert!(!iv_graph().is_simple()); // 2->3 and 2<->3 coexist
        assert!(MixedGraph::new(3, [(1, 2), (2, 3)], []).unwrap().is_simple());
        assert!(!MixedGraph::new(2, [(1, 2), (2, 1)], []).unwrap().is_simple());
    }

    #[test]
    fn canonical_form_invariance() {
        let g = iv_graph();
        // (1 2 3) -> (3 1 2)
        let h = g.relabel(&[2, 0, 1]).unwrap();
        assert_eq!(g.canonical_form().unwrap(), h.canonical_form().unwrap());
        let chain = MixedGraph::new(3, [(1, 2), (2, 3)], []).unwrap();
        assert_ne!(
            g.canonical_form().unwrap(),
            chain.canonical_form().unwrap()
        );
        assert_eq!(g.canonical_form().unwrap(), g.canonical_form().unwrap());
    }

    #[test]
    fn canonical_key_round_trips_to_isomorphic_graph() {
        let g = chain5_graph();
        let key = g.canonical_key().unwrap();
        let h = MixedGraph::from_canonical_key(5, key).unwrap();
        assert_eq!(h.canonical_key().unwrap(), key);
        assert_eq!(h.directed_edges().len(), g.directed_edges().len());
        assert_eq!(h.bidirected_edges().len(), g.bidirected_edges().len());
    }

    #[test]
    fn canonical_form_respects_size_cap() {
        let g = MixedGraph::new(9, [(1, 2)], []).unwrap();
        assert!(matches!(
            g.canonical_form().unwrap_err(),
            Error::Capability(_)
        ));
    }

    #[test]
    fn mixed_components_example() {
        let g = MixedGraph::new(3, [(1, 2), (2, 3)], [(1, 3)]).unwrap();
        let comps = g.mixed_components().unwrap();
        assert_eq!(comps.len(), 2);
        // component of C = {1, 3}: spans {1, 2, 3}, keeps 2->3 and 1<->3
        let c13 = &comps[0];
        assert_eq!(c13.nodes, vec![n(1), n(2), n(3)]);
        assert_eq!(c13.core, vec![n(1), n(3)]);
        assert_eq!(c13.graph.directed_edges(), &[(n(2), n(3))]);
        assert_eq!(c13.graph.bidirected_edges(), &[(n(1), n(3))]);
        // component of C = {2}: spans {1, 2}, keeps 1->2
        let c2 = &comps[1];
        assert_eq!(c2.nodes, vec![n(1), n(2)]);
        assert_eq!(c2.core, vec![n(2)]);
        assert_eq!(c2.graph.directed_edges(), &[(n(1), n(2))]);
        assert!(c2.graph.bidirected_edges().is_empty());
    }

    #[test]
    fn mixed_components_no_bidirected_gives_singletons() {
        let g = MixedGraph::new(4, [(1, 2), (1, 3), (2, 4)], []).unwrap();
        let comps = g.mixed_components().unwrap();
        assert_eq!(comps.len(), 4);
        for c in &comps {
            assert_eq!(c.core.len(), 1);
            assert!(c.graph.bidirected_edges().is_empty());
        }
        let d_total: usize = comps.iter().map(|c| c.graph.directed_edges().len()).sum();
        assert_eq!(d_total, 3);
    }

    #[test]
    fn mixed_components_reject_cyclic() {
        let cycle = MixedGraph::new(3, [(1, 2), (2, 3), (3, 1)], []).unwrap();
        assert!(matches!(
            cycle.mixed_components().unwrap_err(),
            Error::Contract(_)
        ));
    }

    #[test]
    fn origin_maps_back() {
        let g = MixedGraph::new(3, [(1, 2), (2, 3)], [(1, 3)]).unwrap();
        let comps = g.mixed_components().unwrap();
        let c2 = &comps[1];
        assert_eq!(c2.origin(n(1)), n(1));
        assert_eq!(c2.origin(n(2)), n(2));
    }
}
