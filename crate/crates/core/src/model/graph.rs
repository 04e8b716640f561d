use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Undirected region adjacency for the ICAR prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyGraph {
    labels: Vec<String>,
    neighbors: Vec<Vec<usize>>,
}

impl AdjacencyGraph {
    /// Builds a graph from undirected edges between labels. Nodes are numbered in
    /// order of first appearance; duplicate edges are ignored.
    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S)]) -> Result<Self, ModelError> {
        let mut b = Builder::default();
        for (line, (a, c)) in edges.iter().enumerate() {
            b.edge(a.as_ref(), c.as_ref(), line + 1)?;
        }
        Ok(b.finish())
    }

    /// Builds a graph from a 0/1 proximity matrix; the matrix must be symmetric
    /// with a zero diagonal.
    pub fn from_matrix(labels: Vec<String>, a: &[Vec<u8>]) -> Result<Self, ModelError> {
        let k = labels.len();
        if a.len() != k || a.iter().any(|r| r.len() != k) {
            return Err(ModelError::Dimension(format!("proximity matrix must be {k} x {k}")));
        }
        let mut neighbors = vec![Vec::new(); k];
        for i in 0..k {
            for j in 0..k {
                if a[i][j] != a[j][i] {
                    return Err(ModelError::Asymmetric(i, j));
                }
                if a[i][j] != 0 {
                    if i == j {
                        return Err(ModelError::BadEdge { line: i + 1, reason: "nonzero diagonal".into() });
                    }
                    neighbors[i].push(j);
                }
            }
        }
        Ok(AdjacencyGraph { labels, neighbors })
    }

    /// Adds nodes without edges (e.g. regions that only appear in the data).
    pub fn with_nodes<S: AsRef<str>>(mut self, labels: &[S]) -> Self {
        for l in labels {
            if self.index_of(l.as_ref()).is_none() {
                self.labels.push(l.as_ref().to_string());
                self.neighbors.push(Vec::new());
            }
        }
        self
    }

    /// Reads a file in the format of [`AdjacencyGraph::parse`]. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Parses the adjacency text format: one edge per line as two
    /// whitespace-separated labels, or a single label to declare a node (which
    /// may have no neighbours). Nodes are numbered in order of first appearance.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut b = Builder::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts[..] {
                [a] => {
                    b.node(a);
                }
                [a, c] => b.edge(a, c, no + 1)?,
                _ => {
                    return Err(ModelError::BadEdge { line: no + 1, reason: format!("expected one or two labels, found {}", parts.len()) })
                }
            }
        }
        Ok(b.finish())
    }

    /// Writes every node (in index order) and then every edge, so that
    /// [`AdjacencyGraph::parse`] restores the same graph and numbering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in &self.labels {
            out.push_str(l);
            out.push('\n');
        }
        for (i, nb) in self.neighbors.iter().enumerate() {
            for &j in nb.iter().filter(|&&j| j > i) {
                out.push_str(&format!("{} {}\n", self.labels[i], self.labels[j]));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.neighbors[k]
    }

    /// Neighbour counts `m_k`.
    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    /// Component index of every node.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.len()];
        let mut next = 0;
        for start in 0..self.len() {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = next;
            while let Some(v) = stack.pop() {
                for &u in &self.neighbors[v] {
                    if comp[u] == usize::MAX {
                        comp[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn n_components(&self) -> usize {
        self.components().into_iter().max().map_or(0, |m| m + 1)
    }
}

#[derive(Default)]
struct Builder {
    index: HashMap<String, usize>,
    labels: Vec<String>,
    sets: Vec<BTreeSet<usize>>,
}

impl Builder {
    fn node(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        self.labels.push(label.to_string());
        self.sets.push(BTreeSet::new());
        self.index.insert(label.to_string(), self.labels.len() - 1);
        self.labels.len() - 1
    }

    fn edge(&mut self, a: &str, b: &str, line: usize) -> Result<(), ModelError> {
        if a == b {
            return Err(ModelError::BadEdge { line, reason: format!("self-loop at '{a}'") });
        }
        let (i, j) = (self.node(a), self.node(b));
        self.sets[i].insert(j);
        self.sets[j].insert(i);
        Ok(())
    }

    fn finish(self) -> AdjacencyGraph {
        AdjacencyGraph { labels: self.labels, neighbors: self.sets.into_iter().map(|s| s.into_iter().collect()).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_from_file_text() {
        let g = AdjacencyGraph::parse("A B\nB C\n").unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.degrees(), [1, 2, 1]);
        assert_eq!(g.n_components(), 1);
    }

    #[test]
    fn duplicates_ignored_and_comments_skipped() {
        let g = AdjacencyGraph::parse("# header\nA B\n\nB A\nA B\nC D\n").unwrap();
        assert_eq!(g.degrees(), [1, 1, 1, 1]);
        assert_eq!(g.n_components(), 2);
        let back = AdjacencyGraph::parse(&g.to_text()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn malformed_lines_are_rejected() {
        let err = AdjacencyGraph::parse("A B\nB C D\n").unwrap_err();
        assert!(matches!(err, ModelError::BadEdge { line: 2, .. }));
        let err = AdjacencyGraph::parse("A B\n\nC C\n").unwrap_err();
        assert!(matches!(err, ModelError::BadEdge { line: 3, .. }));
    }

    #[test]
    fn text_round_trip_keeps_order_and_isolated_nodes() {
        let g = AdjacencyGraph::from_edges(&[("R00", "R10"), ("R00", "R01"), ("R10", "R11"), ("R01", "R11")]).unwrap().with_nodes(&["Z"]);
        let back = AdjacencyGraph::parse(&g.to_text()).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.labels(), ["R00", "R10", "R01", "R11", "Z"]);
        assert!(back.neighbors(4).is_empty());
        let declared = AdjacencyGraph::parse("X\nA B\n").unwrap();
        assert_eq!(declared.labels(), ["X", "A", "B"]);
    }

    #[test]
    fn matrix_must_be_symmetric() {
        let labels = vec!["a".to_string(), "b".to_string()];
        assert!(AdjacencyGraph::from_matrix(labels.clone(), &[vec![0, 1], vec![1, 0]]).is_ok());
        let err = AdjacencyGraph::from_matrix(labels, &[vec![0, 1], vec![0, 0]]).unwrap_err();
        assert!(matches!(err, ModelError::Asymmetric(0, 1)));
    }
}
