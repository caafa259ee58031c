//! Community assignment from embedding rows.

pub mod kmeans;
pub mod metric;
pub mod threshold;

use std::io::{BufRead, Write};

use crate::{Error, Result};

pub use kmeans::{kmeans_rows, KmeansOptions};
pub use metric::{confusion_matrix, misclustering, write_confusion};
pub use threshold::threshold_cluster;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// k-means on the rows of the normalised embedding.
    Kmeans,
    /// Pair-distance thresholding to exactly `K` connected components.
    Threshold,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Kmeans => "kmeans",
            Algorithm::Threshold => "threshold",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kmeans" => Ok(Algorithm::Kmeans),
            "threshold" => Ok(Algorithm::Threshold),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    /// 0-based cluster per node.
    pub labels: Vec<usize>,
    pub algorithm: Algorithm,
    /// k-means cost, or the pair distance at which `K` components were reached.
    pub objective: f64,
    /// Zero-row nodes assigned to their nearest centre (k-means only).
    pub zero_row_nodes: Vec<usize>,
    /// Fewer than `K` distinct clusters could be formed.
    pub degenerate: bool,
}

/// `node,label` with 1-based ids.
pub fn write_labels_csv<W: Write>(labels: &[usize], mut w: W) -> Result<()> {
    writeln!(w, "node,label")?;
    for (i, &l) in labels.iter().enumerate() {
        writeln!(w, "{},{}", i + 1, l + 1)?;
    }
    Ok(())
}

pub fn read_labels_csv<R: BufRead>(r: R) -> Result<Vec<usize>> {
    let mut labels = Vec::new();
    for (no, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if no == 0 {
            if line != "node,label" {
                return Err(Error::parse(1, "expected header `node,label`"));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let bad = || Error::parse(no + 1, format!("bad row `{line}`"));
        let (node, label) = line.split_once(',').ok_or_else(bad)?;
        let node: usize = node.trim().parse().map_err(|_| bad())?;
        let label: usize = label.trim().parse().map_err(|_| bad())?;
        if node != labels.len() + 1 || label == 0 {
            return Err(bad());
        }
        labels.push(label - 1);
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_csv_round_trip() {
        let labels = vec![0, 1, 1, 2];
        let mut buf = Vec::new();
        write_labels_csv(&labels, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "node,label\n1,1\n2,2\n3,2\n4,3\n");
        assert_eq!(read_labels_csv(&buf[..]).unwrap(), labels);
        assert!(read_labels_csv(&b"node,label\n2,1\n"[..]).is_err());
    }
}
