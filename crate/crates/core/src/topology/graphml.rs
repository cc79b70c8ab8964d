//! GraphML reader/writer for Topology Zoo files.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use log::warn;

use super::geo::{centroid, edge_length, GeoPoint, MIN_LINK_KM};
use super::{connected_components, Node, Topology};
use crate::error::{Error, Result};

/// What to do with nodes that carry no Latitude/Longitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingCoordinates {
    /// Fail the load.
    Reject,
    /// Remove the node and its links.
    Drop,
    /// Place the node at the centroid of its located neighbours (repeated
    /// until no more nodes can be placed); nodes that stay unplaced are dropped.
    #[default]
    Impute,
}

#[derive(Debug, Clone, Default)]
pub struct GraphmlOptions {
    pub missing: MissingCoordinates,
    /// Overrides the graph-level `label`.
    pub name: Option<String>,
}

struct RawNode {
    name: String,
    label: Option<String>,
    position: Option<GeoPoint>,
    line: u32,
}

struct RawEdge {
    u: usize,
    v: usize,
    length: Option<f64>,
}

fn parse_err(doc: &roxmltree::Document, node: roxmltree::Node, message: String) -> Error {
    let pos = doc.text_pos_at(node.range().start);
    Error::Parse { line: pos.row, message }
}

/// Reads and parses a GraphML file. Without a graph label the file stem
/// names the topology.
pub fn load_graphml_file(path: &std::path::Path, opts: &GraphmlOptions) -> Result<Topology> {
    let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut opts = opts.clone();
    if opts.name.is_none() && !has_graph_label(&raw) {
        opts.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    load_graphml(&raw, &opts)
}

fn has_graph_label(raw: &[u8]) -> bool {
    let Ok(text) = std::str::from_utf8(raw) else { return false };
    let Ok(doc) = roxmltree::Document::parse(text) else { return false };
    let label_keys: Vec<&str> = doc
        .descendants()
        .filter(|n| n.has_tag_name("key") && n.attribute("for") == Some("graph") && n.attribute("attr.name") == Some("label"))
        .filter_map(|n| n.attribute("id"))
        .collect();
    doc.descendants()
        .filter(|n| n.has_tag_name("graph"))
        .flat_map(|g| g.children())
        .any(|d| d.has_tag_name("data") && d.attribute("key").is_some_and(|k| label_keys.contains(&k)))
}

/// Parses a Topology Zoo GraphML document and returns the largest connected
/// component. Parallel links collapse to the shortest one and self-loops are
/// discarded. Candidates default to every node; no gateways are set.
pub fn load_graphml(raw: &[u8], opts: &GraphmlOptions) -> Result<Topology> {
    let text = std::str::from_utf8(raw).map_err(|e| {
        let line = raw[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() as u32 + 1;
        Error::Parse { line, message: format!("invalid UTF-8: {e}") }
    })?;
    let doc = roxmltree::Document::parse(text).map_err(|e| Error::Parse {
        line: e.pos().row,
        message: e.to_string(),
    })?;

    let root = doc.root_element();
    if root.tag_name().name() != "graphml" {
        return Err(parse_err(&doc, root, format!("expected <graphml>, found <{}>", root.tag_name().name())));
    }

    // key id -> (domain, attribute name)
    let mut keys: HashMap<&str, (&str, &str)> = HashMap::new();
    for k in root.children().filter(|n| n.has_tag_name("key")) {
        if let (Some(id), Some(name)) = (k.attribute("id"), k.attribute("attr.name")) {
            keys.insert(id, (k.attribute("for").unwrap_or("all"), name));
        }
    }
    let attr = |domain: &str, key: &str| -> Option<&str> {
        keys.get(key)
            .filter(|(d, _)| *d == domain || *d == "all")
            .map(|(_, name)| *name)
    };

    let graph = root
        .children()
        .find(|n| n.has_tag_name("graph"))
        .ok_or_else(|| parse_err(&doc, root, "no <graph> element".into()))?;

    let mut graph_label = None;
    let mut nodes: Vec<RawNode> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut pending_edges = Vec::new();

    for el in graph.children().filter(|n| n.is_element()) {
        match el.tag_name().name() {
            "data" => {
                if el.attribute("key").and_then(|k| attr("graph", k)) == Some("label") {
                    graph_label = el.text().map(|s| s.trim().to_string());
                }
            }
            "node" => {
                let id = el
                    .attribute("id")
                    .ok_or_else(|| parse_err(&doc, el, "<node> without id".into()))?;
                let (mut lat, mut lon, mut label) = (None, None, None);
                for d in el.children().filter(|n| n.has_tag_name("data")) {
                    let Some(name) = d.attribute("key").and_then(|k| attr("node", k)) else {
                        continue;
                    };
                    let value = d.text().unwrap_or("").trim();
                    match name {
                        "Latitude" | "Longitude" => {
                            let x: f64 = value.parse().map_err(|_| {
                                parse_err(&doc, d, format!("node `{id}`: bad {name} `{value}`"))
                            })?;
                            if name == "Latitude" {
                                lat = Some(x)
                            } else {
                                lon = Some(x)
                            }
                        }
                        "label" => label = Some(value.to_string()),
                        _ => {}
                    }
                }
                let position = match (lat, lon) {
                    (Some(lat), Some(lon)) => Some(GeoPoint::new(lat, lon).map_err(|e| {
                        parse_err(&doc, el, format!("node `{id}`: {e}"))
                    })?),
                    _ => None,
                };
                if index.insert(id, nodes.len()).is_some() {
                    return Err(parse_err(&doc, el, format!("duplicate node id `{id}`")));
                }
                nodes.push(RawNode {
                    name: id.to_string(),
                    label,
                    position,
                    line: doc.text_pos_at(el.range().start).row,
                });
            }
            "edge" => pending_edges.push(el),
            _ => {}
        }
    }

    let mut edges = Vec::new();
    for el in pending_edges {
        let endpoint = |which: &str| -> Result<usize> {
            let id = el
                .attribute(which)
                .ok_or_else(|| parse_err(&doc, el, format!("<edge> without {which}")))?;
            index
                .get(id)
                .copied()
                .ok_or_else(|| parse_err(&doc, el, format!("edge {which} `{id}` is not a declared node")))
        };
        let (u, v) = (endpoint("source")?, endpoint("target")?);
        let mut length = None;
        for d in el.children().filter(|n| n.has_tag_name("data")) {
            if d.attribute("key").and_then(|k| attr("edge", k)) == Some("length_km") {
                let value = d.text().unwrap_or("").trim();
                let x: f64 = value
                    .parse()
                    .ok()
                    .filter(|x: &f64| x.is_finite() && *x > 0.0)
                    .ok_or_else(|| parse_err(&doc, d, format!("bad length_km `{value}`")))?;
                length = Some(x);
            }
        }
        edges.push(RawEdge { u, v, length });
    }

    resolve_positions(&mut nodes, &edges, opts.missing)?;

    // Collapse to a simple graph over located nodes.
    let mut simple: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut loops = 0;
    for e in &edges {
        if e.u == e.v {
            loops += 1;
            continue;
        }
        let (Some(pu), Some(pv)) = (nodes[e.u].position, nodes[e.v].position) else {
            continue;
        };
        let len = match e.length {
            Some(l) => l,
            None => edge_length(pu, pv)?.max(MIN_LINK_KM),
        };
        let key = (e.u.min(e.v), e.u.max(e.v));
        simple.entry(key).and_modify(|l| *l = l.min(len)).or_insert(len);
    }
    if loops > 0 {
        warn!("dropped {loops} self-loop(s)");
    }
    let collapsed = edges.len() - loops - simple.len();
    if collapsed > 0 {
        warn!("collapsed {collapsed} parallel or unlocated link(s)");
    }

    let located: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].position.is_some()).collect();
    if located.len() < 2 {
        return Err(Error::EmptyTopology { usable: located.len() });
    }

    let comps = connected_components(nodes.len(), simple.keys().copied());
    let largest = comps
        .iter()
        .filter(|c| nodes[c[0].0].position.is_some())
        .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b[0].cmp(&a[0])))
        .expect("at least one located component");
    if largest.len() < 2 {
        return Err(Error::EmptyTopology { usable: largest.len() });
    }
    if largest.len() < located.len() {
        warn!(
            "graph is disconnected; keeping the largest component ({} of {} nodes)",
            largest.len(),
            located.len()
        );
    }

    let mut remap = vec![usize::MAX; nodes.len()];
    for (new, old) in largest.iter().enumerate() {
        remap[old.0] = new;
    }
    let kept_edges: Vec<(usize, usize, f64)> = simple
        .iter()
        .filter(|((u, _), _)| remap[*u] != usize::MAX)
        .map(|(&(u, v), &len)| (remap[u], remap[v], len))
        .collect();
    let kept_nodes: Vec<Node> = largest
        .iter()
        .map(|id| {
            let raw = &nodes[id.0];
            Node {
                name: raw.name.clone(),
                label: raw.label.clone(),
                position: raw.position.expect("located"),
            }
        })
        .collect();

    let name = opts
        .name
        .clone()
        .or(graph_label)
        .unwrap_or_else(|| "unnamed".to_string());
    Topology::new(name, kept_nodes, kept_edges)
}

fn resolve_positions(nodes: &mut [RawNode], edges: &[RawEdge], policy: MissingCoordinates) -> Result<()> {
    let missing: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].position.is_none()).collect();
    if missing.is_empty() {
        return Ok(());
    }
    match policy {
        MissingCoordinates::Reject => {
            let n = &nodes[missing[0]];
            Err(Error::Parse {
                line: n.line,
                message: format!("node `{}` has no Latitude/Longitude", n.name),
            })
        }
        MissingCoordinates::Drop => {
            warn!("dropping {} node(s) without coordinates", missing.len());
            Ok(())
        }
        MissingCoordinates::Impute => {
            let mut adj = vec![Vec::new(); nodes.len()];
            for e in edges.iter().filter(|e| e.u != e.v) {
                adj[e.u].push(e.v);
                adj[e.v].push(e.u);
            }
            let mut unresolved = missing;
            loop {
                // Each round only reads positions fixed in earlier rounds.
                let placed: Vec<(usize, GeoPoint)> = unresolved
                    .iter()
                    .filter_map(|&i| {
                        let known: Vec<GeoPoint> = adj[i].iter().filter_map(|&j| nodes[j].position).collect();
                        centroid(&known).map(|p| (i, p))
                    })
                    .collect();
                if placed.is_empty() {
                    break;
                }
                for &(i, p) in &placed {
                    nodes[i].position = Some(p);
                }
                unresolved.retain(|&i| nodes[i].position.is_none());
            }
            if !unresolved.is_empty() {
                warn!("dropping {} node(s) whose position could not be imputed", unresolved.len());
            }
            Ok(())
        }
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub(super) fn write(topo: &Topology) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    s.push_str("  <key attr.name=\"label\" attr.type=\"string\" for=\"graph\" id=\"g0\" />\n");
    s.push_str("  <key attr.name=\"Latitude\" attr.type=\"double\" for=\"node\" id=\"d0\" />\n");
    s.push_str("  <key attr.name=\"Longitude\" attr.type=\"double\" for=\"node\" id=\"d1\" />\n");
    s.push_str("  <key attr.name=\"label\" attr.type=\"string\" for=\"node\" id=\"d2\" />\n");
    s.push_str("  <key attr.name=\"length_km\" attr.type=\"double\" for=\"edge\" id=\"d3\" />\n");
    s.push_str("  <graph edgedefault=\"undirected\">\n");
    let _ = writeln!(s, "    <data key=\"g0\">{}</data>", escape(topo.name()));
    for n in topo.nodes() {
        let _ = writeln!(s, "    <node id=\"{}\">", escape(&n.name));
        let _ = writeln!(s, "      <data key=\"d0\">{:?}</data>", n.position.lat);
        let _ = writeln!(s, "      <data key=\"d1\">{:?}</data>", n.position.lon);
        if let Some(label) = &n.label {
            let _ = writeln!(s, "      <data key=\"d2\">{}</data>", escape(label));
        }
        s.push_str("    </node>\n");
    }
    for e in topo.edges() {
        let _ = writeln!(
            s,
            "    <edge source=\"{}\" target=\"{}\">\n      <data key=\"d3\">{:?}</data>\n    </edge>",
            escape(topo.node_name(e.a)),
            escape(topo.node_name(e.b)),
            e.length_km
        );
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}
