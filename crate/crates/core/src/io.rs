//! Plain-text edge lists: one `u v` pair per line, `#` comments ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::GraphError;
use crate::graph::Graph;

/// Parses an edge list. The node count is one past the largest index seen, so every
/// index below it must be touched by some edge for the graph to be valid.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut edges = Vec::new();
    let mut max_node = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| GraphError::Parse { line: i + 1, message };
        let mut fields = line.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(format!("expected two node indices in {line:?}")));
        };
        let u: usize = a.parse().map_err(|_| parse_err(format!("bad node index {a:?}")))?;
        let v: usize = b.parse().map_err(|_| parse_err(format!("bad node index {b:?}")))?;
        max_node = max_node.max(Some(u.max(v)));
        edges.push((u, v));
    }
    let n = max_node.map_or(0, |m| m + 1);
    Graph::new(n, edges)
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = format!("# nodes {} edges {}\n", g.node_count(), g.edge_count());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn read_edge_list(path: &Path) -> Result<Graph, std::io::Error> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

pub fn write_edge_list(path: &Path, g: &Graph) -> Result<(), std::io::Error> {
    std::fs::write(path, format_edge_list(g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = Graph::complete(5);
        assert_eq!(parse_edge_list(&format_edge_list(&g)).unwrap(), g);
    }

    #[test]
    fn comments_and_errors() {
        let g = parse_edge_list("# c\n0 1\n\n1 2\n").unwrap();
        assert_eq!(g, Graph::path(3));
        assert!(matches!(parse_edge_list("0 1\n1 x\n"), Err(GraphError::Parse { line: 2, .. })));
        assert!(matches!(parse_edge_list("0 1 2\n"), Err(GraphError::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_list("0 1\n2 3\n"), Err(GraphError::Disconnected(2))));
        assert!(matches!(parse_edge_list("1 1\n"), Err(GraphError::SelfLoop(1))));
    }
}
