//! Terrestrial network model: nodes, links, candidate controller sites and
//! gateway sites.

mod failures;
mod geo;
mod graphml;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

pub use failures::{sample_failures, FailureAssignment, FailureCase, ProbRange};
pub use geo::{centroid, edge_length, GeoPoint, EARTH_RADIUS_KM, MIN_LINK_KM};
pub use graphml::{load_graphml, load_graphml_file, GraphmlOptions, MissingCoordinates};

/// Dense node index. Ascending `NodeId` is the canonical node order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    /// External identifier (the GraphML `id`).
    pub name: String,
    pub label: Option<String>,
    pub position: GeoPoint,
}

/// Undirected link; `a < b` always.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub length_km: f64,
}

impl Edge {
    pub fn other(&self, n: NodeId) -> NodeId {
        if n == self.a {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone)]
pub struct Topology {
    name: String,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    edge_index: HashMap<(NodeId, NodeId), EdgeId>,
    by_name: HashMap<String, NodeId>,
    candidates: BTreeSet<NodeId>,
    gateways: BTreeSet<NodeId>,
}

impl Topology {
    /// Builds a validated topology. Edges are `(u, v, length_km)` over indices
    /// into `nodes`. Candidates default to all nodes, gateways to none.
    pub fn new(
        name: impl Into<String>,
        nodes: Vec<Node>,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptyTopology { usable: 0 });
        }
        let n = nodes.len();
        let mut by_name = HashMap::with_capacity(n);
        for (i, node) in nodes.iter().enumerate() {
            node.position.validate()?;
            if by_name.insert(node.name.clone(), NodeId(i)).is_some() {
                return Err(Error::InvalidTopology(format!("duplicate node id `{}`", node.name)));
            }
        }

        let mut edge_list = Vec::new();
        let mut edge_index = HashMap::new();
        for (u, v, len) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidTopology(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidTopology(format!("self-loop on `{}`", nodes[u].name)));
            }
            if !(len.is_finite() && len > 0.0) {
                return Err(Error::InvalidTopology(format!(
                    "edge `{}`-`{}` has non-positive or non-finite length {len}",
                    nodes[u].name, nodes[v].name
                )));
            }
            let (a, b) = (NodeId(u.min(v)), NodeId(u.max(v)));
            let id = EdgeId(edge_list.len());
            if edge_index.insert((a, b), id).is_some() {
                return Err(Error::InvalidTopology(format!(
                    "parallel edge `{}`-`{}`",
                    nodes[a.0].name, nodes[b.0].name
                )));
            }
            edge_list.push(Edge { a, b, length_km: len });
        }

        let mut adjacency = vec![Vec::new(); n];
        for (i, e) in edge_list.iter().enumerate() {
            adjacency[e.a.0].push((e.b, EdgeId(i)));
            adjacency[e.b.0].push((e.a, EdgeId(i)));
        }
        for list in &mut adjacency {
            list.sort();
        }

        let topo = Topology {
            name: name.into(),
            candidates: (0..n).map(NodeId).collect(),
            gateways: BTreeSet::new(),
            nodes,
            edges: edge_list,
            adjacency,
            edge_index,
            by_name,
        };
        let comps = topo.components();
        if comps.len() > 1 {
            return Err(Error::InvalidTopology(format!(
                "graph is disconnected ({} components)",
                comps.len()
            )));
        }
        Ok(topo)
    }

    /// Unit-free convenience constructor: nodes named `"0".."n-1"` at (0°, 0°).
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let nodes = (0..n)
            .map(|i| Node {
                name: i.to_string(),
                label: None,
                position: GeoPoint { lat: 0.0, lon: 0.0 },
            })
            .collect();
        Topology::new("synthetic", nodes, edges.iter().copied())
    }

    pub fn with_candidates(mut self, ids: impl IntoIterator<Item = NodeId>) -> Result<Self> {
        let set = self.checked_set(ids)?;
        if set.is_empty() {
            return Err(Error::Config("candidate set is empty".into()));
        }
        self.candidates = set;
        Ok(self)
    }

    pub fn with_gateways(mut self, ids: impl IntoIterator<Item = NodeId>) -> Result<Self> {
        let set = self.checked_set(ids)?;
        if set.is_empty() {
            return Err(Error::Config("gateway set is empty".into()));
        }
        self.gateways = set;
        Ok(self)
    }

    fn checked_set(&self, ids: impl IntoIterator<Item = NodeId>) -> Result<BTreeSet<NodeId>> {
        ids.into_iter()
            .map(|id| {
                if id.0 < self.nodes.len() {
                    Ok(id)
                } else {
                    Err(Error::UnknownNode(id.to_string()))
                }
            })
            .collect()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0]
    }

    pub fn neighbors(&self, n: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[n.0]
    }

    pub fn edge_between(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        self.edge_index.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn candidates(&self) -> &BTreeSet<NodeId> {
        &self.candidates
    }

    pub fn gateways(&self) -> &BTreeSet<NodeId> {
        &self.gateways
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.0 < self.nodes.len()
    }

    pub fn node_by_name(&self, name: &str) -> Result<NodeId> {
        self.by_name.get(name).copied().ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.0].name
    }

    /// Resolves a node list given one id per line, or comma separated.
    /// Blank lines and `#` comments are ignored.
    pub fn parse_node_list(&self, text: &str) -> Result<Vec<NodeId>> {
        let mut out = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split(',') {
                let tok = tok.trim();
                if !tok.is_empty() {
                    out.push(self.node_by_name(tok)?);
                }
            }
        }
        Ok(out)
    }

    /// Connected components as ascending node lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        connected_components(self.nodes.len(), self.edges.iter().map(|e| (e.a.0, e.b.0)))
    }

    /// Serializes to Topology Zoo style GraphML (Latitude/Longitude/label on
    /// nodes, explicit `length_km` on edges).
    pub fn to_graphml(&self) -> String {
        graphml::write(self)
    }
}

pub(crate) fn connected_components(
    n: usize,
    edges: impl IntoIterator<Item = (usize, usize)>,
) -> Vec<Vec<NodeId>> {
    let mut adj = vec![Vec::new(); n];
    for (u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![NodeId(start)];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(NodeId(v));
                    queue.push_back(v);
                }
            }
        }
        comp.sort();
        comps.push(comp);
    }
    comps
}
