use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::{Error, Result};

/// A hyperedge: a node multiset stored as sorted `(node, multiplicity)` runs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    runs: Vec<(usize, usize)>,
}

impl Edge {
    /// Builds an edge from node ids in any order; repeats denote multiplicity.
    pub fn from_nodes(nodes: &[usize]) -> Self {
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        Self::from_sorted(&sorted)
    }

    pub(crate) fn from_sorted(sorted: &[usize]) -> Self {
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for &v in sorted {
            match runs.last_mut() {
                Some((node, mult)) if *node == v => *mult += 1,
                _ => runs.push((v, 1)),
            }
        }
        Edge { runs }
    }

    pub fn runs(&self) -> &[(usize, usize)] {
        &self.runs
    }

    /// `|e| = Σ_i a_{ei}`.
    pub fn size(&self) -> usize {
        self.runs.iter().map(|&(_, a)| a).sum()
    }

    pub fn multiplicities(&self) -> impl Iterator<Item = usize> + '_ {
        self.runs.iter().map(|&(_, a)| a)
    }

    /// Sorted node tuple with repeats written out.
    pub fn nodes(&self) -> Vec<usize> {
        self.runs
            .iter()
            .flat_map(|&(v, a)| std::iter::repeat_n(v, a))
            .collect()
    }

    pub fn has_repeats(&self) -> bool {
        self.runs.iter().any(|&(_, a)| a > 1)
    }
}

/// A sampled hypergraph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    edges: Vec<Edge>,
}

impl Hypergraph {
    /// Validates node range, edge sizes (`2..=max_size`) and uniqueness.
    pub fn new(n: usize, edges: Vec<Edge>, max_size: usize) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            let size = e.size();
            if !(2..=max_size).contains(&size) {
                return Err(Error::EdgeSize {
                    size,
                    max: max_size,
                });
            }
            if let Some(&(v, _)) = e.runs.iter().find(|&&(v, _)| v >= n) {
                return Err(Error::InvalidParams(format!(
                    "node {} out of range for n = {n}",
                    v + 1
                )));
            }
            if !seen.insert(e) {
                return Err(Error::DuplicateEdge(format_edge(e)));
            }
        }
        Ok(Hypergraph { n, edges })
    }

    /// Construction path for samplers, which emit unique edges by design.
    pub(crate) fn from_unique(n: usize, edges: Vec<Edge>) -> Self {
        Hypergraph { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn max_edge_size(&self) -> usize {
        self.edges.iter().map(Edge::size).max().unwrap_or(0)
    }

    /// Multiplicity-weighted incidence counts `d_i = Σ_e a_{ei} h_e`.
    pub fn hyperdegrees(&self) -> Vec<u64> {
        let mut d = vec![0u64; self.n];
        for e in &self.edges {
            for &(v, a) in e.runs() {
                d[v] += a as u64;
            }
        }
        d
    }

    /// Number of edges per size, indexed by size.
    pub fn size_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.max_edge_size() + 1];
        for e in &self.edges {
            h[e.size()] += 1;
        }
        h
    }

    /// Text form: `n <n> edges <count>` then one edge per line, 1-based node ids.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n {} edges {}", self.n, self.edges.len())?;
        for e in &self.edges {
            writeln!(w, "{}", format_edge(e))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Parses the text form. Edge sizes are checked against `max_size`.
    pub fn read_text<R: BufRead>(r: R, max_size: usize) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (n, count) = loop {
            let Some((no, line)) = lines.next() else {
                return Err(Error::parse(1, "missing header"));
            };
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            break parse_header(&line).ok_or_else(|| {
                Error::parse(no + 1, "expected header `n <n> edges <count>`")
            })?;
        };
        let mut edges = Vec::with_capacity(count);
        for (no, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut nodes = Vec::new();
            for tok in line.split_whitespace() {
                let id: usize = tok
                    .parse()
                    .map_err(|_| Error::parse(no + 1, format!("bad node id `{tok}`")))?;
                if id == 0 || id > n {
                    return Err(Error::parse(no + 1, format!("node id {id} outside 1..={n}")));
                }
                nodes.push(id - 1);
            }
            if nodes.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::parse(no + 1, "node ids must be sorted"));
            }
            edges.push(Edge::from_sorted(&nodes));
        }
        if edges.len() != count {
            return Err(Error::parse(
                0,
                format!("header announces {count} edges, found {}", edges.len()),
            ));
        }
        Hypergraph::new(n, edges, max_size)
    }

    pub fn from_text(text: &str, max_size: usize) -> Result<Self> {
        Self::read_text(text.as_bytes(), max_size)
    }
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    match toks.as_slice() {
        ["n", n, "edges", c] => Some((n.parse().ok()?, c.parse().ok()?)),
        _ => None,
    }
}

fn format_edge(e: &Edge) -> String {
    let mut s = String::new();
    for (k, v) in e.nodes().into_iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        write!(s, "{}", v + 1).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_based(nodes: &[usize]) -> Edge {
        Edge::from_nodes(&nodes.iter().map(|v| v - 1).collect::<Vec<_>>())
    }

    #[test]
    fn hyperdegree_examples() {
        let empty = Hypergraph::new(5, vec![], 3).unwrap();
        assert_eq!(empty.hyperdegrees(), vec![0; 5]);

        let h = Hypergraph::new(8, vec![one_based(&[1, 4, 4, 7])], 5).unwrap();
        assert_eq!(h.hyperdegrees(), vec![1, 0, 0, 2, 0, 0, 1, 0]);

        let h = Hypergraph::new(3, vec![one_based(&[1, 2]), one_based(&[1, 2, 3])], 3).unwrap();
        assert_eq!(h.hyperdegrees(), vec![2, 2, 1]);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(
            Hypergraph::new(4, vec![one_based(&[1, 2]), one_based(&[2, 1])], 3),
            Err(Error::DuplicateEdge(_))
        ));
        assert!(matches!(
            Hypergraph::new(4, vec![one_based(&[1])], 3),
            Err(Error::EdgeSize { size: 1, .. })
        ));
        assert!(matches!(
            Hypergraph::new(4, vec![one_based(&[1, 2, 3, 4])], 3),
            Err(Error::EdgeSize { size: 4, .. })
        ));
        assert!(Hypergraph::new(2, vec![one_based(&[1, 3])], 3).is_err());
    }

    #[test]
    fn text_format() {
        let h = Hypergraph::new(8, vec![one_based(&[1, 4, 4, 7]), one_based(&[2, 6])], 5)
            .unwrap();
        let text = h.to_text();
        assert_eq!(text, "n 8 edges 2\n1 4 4 7\n2 6\n");
        assert_eq!(Hypergraph::from_text(&text, 5).unwrap(), h);
        assert!(Hypergraph::from_text("n 3 edges 2\n1 2\n", 3).is_err());
        assert!(Hypergraph::from_text("n 3 edges 1\n2 1\n", 3).is_err());
        assert!(Hypergraph::from_text("nodes 3\n", 3).is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip(edges in proptest::collection::btree_set(
            proptest::collection::vec(0usize..9, 2..=4), 0..20)) {
            let edges: std::collections::BTreeSet<Edge> =
                edges.iter().map(|e| Edge::from_nodes(e)).collect();
            let h = Hypergraph::new(9, edges.into_iter().collect(), 4).unwrap();
            prop_assert_eq!(Hypergraph::from_text(&h.to_text(), 4).unwrap(), h);
        }
    }
}
