use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::clustering::Partition;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SankeyNode {
    /// Cluster label in the column's partition.
    pub cluster: usize,
    pub size: usize,
}

/// One partition; `nodes` are in display order (top to bottom).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SankeyColumn {
    pub label: String,
    pub nodes: Vec<SankeyNode>,
}

impl SankeyColumn {
    /// Display position of a cluster.
    pub fn position(&self, cluster: usize) -> usize {
        self.nodes.iter().position(|n| n.cluster == cluster).expect("cluster present in column")
    }
}

/// Assets sitting in `source` of column `column` and in `target` of column
/// `column + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SankeyLink {
    pub column: usize,
    pub source: usize,
    pub target: usize,
    pub weight: usize,
    pub assets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SankeyDiagram {
    pub n_assets: usize,
    pub columns: Vec<SankeyColumn>,
    pub links: Vec<SankeyLink>,
}

impl SankeyDiagram {
    pub fn links_between(&self, column: usize) -> impl Iterator<Item = &SankeyLink> {
        self.links.iter().filter(move |l| l.column == column)
    }

    /// Check that each node's inflow and outflow equal its size and that
    /// every column pair carries all assets.
    pub fn check_flow(&self) -> Result<(), ReportError> {
        for c in 0..self.columns.len().saturating_sub(1) {
            let total: usize = self.links_between(c).map(|l| l.weight).sum();
            if total != self.n_assets {
                return Err(ReportError::Invalid(format!(
                    "column pair {c} carries {total} of {} assets",
                    self.n_assets
                )));
            }
            for node in &self.columns[c].nodes {
                let out: usize = self.links_between(c).filter(|l| l.source == node.cluster).map(|l| l.weight).sum();
                if out != node.size {
                    return Err(ReportError::Invalid(format!(
                        "column {c} cluster {} outflow {out} != size {}",
                        node.cluster, node.size
                    )));
                }
            }
            for node in &self.columns[c + 1].nodes {
                let inflow: usize = self.links_between(c).filter(|l| l.target == node.cluster).map(|l| l.weight).sum();
                if inflow != node.size {
                    return Err(ReportError::Invalid(format!(
                        "column {} cluster {} inflow {inflow} != size {}",
                        c + 1,
                        node.cluster,
                        node.size
                    )));
                }
            }
        }
        Ok(())
    }

    /// Number of link pairs that cross between adjacent columns.
    pub fn crossings(&self) -> usize {
        let mut count = 0;
        for c in 0..self.columns.len().saturating_sub(1) {
            let pos: Vec<(isize, isize)> = self
                .links_between(c)
                .map(|l| (self.columns[c].position(l.source) as isize, self.columns[c + 1].position(l.target) as isize))
                .collect();
            for i in 0..pos.len() {
                for j in i + 1..pos.len() {
                    if (pos[i].0 - pos[j].0) * (pos[i].1 - pos[j].1) < 0 {
                        count += 1;
                    }
                }
            }
        }
        count
    }
}

/// Lay out a sequence of partitions over the same assets.
///
/// The first column keeps canonical label order. Each later column is sorted
/// by barycenter: the weight-averaged display position of the clusters
/// feeding it, ties broken by label.
pub fn sankey_layout(partitions: &[(String, Partition)]) -> Result<SankeyDiagram, ReportError> {
    if partitions.len() < 2 {
        return Err(ReportError::TooFewPartitions(partitions.len()));
    }
    let assets = partitions[0].1.asset_ids();
    if let Some((label, _)) = partitions.iter().find(|(_, p)| p.asset_ids() != assets) {
        return Err(ReportError::MismatchedAssets(label.clone()));
    }

    let column = |label: &str, p: &Partition, order: Vec<usize>| {
        let sizes = p.sizes();
        SankeyColumn {
            label: label.to_string(),
            nodes: order.into_iter().map(|c| SankeyNode { cluster: c, size: sizes[c] }).collect(),
        }
    };

    let (first_label, first) = &partitions[0];
    let mut columns = vec![column(first_label, first, (0..first.k()).collect())];
    let mut links = Vec::new();
    for (c, pair) in partitions.windows(2).enumerate() {
        let (left, right) = (&pair[0].1, &pair[1].1);
        let mut flows: Vec<Vec<Vec<String>>> = vec![vec![Vec::new(); right.k()]; left.k()];
        for (i, id) in assets.iter().enumerate() {
            flows[left.labels()[i]][right.labels()[i]].push(id.clone());
        }
        let left_col = &columns[c];
        let mut bary: Vec<(f64, usize)> = (0..right.k())
            .map(|j| {
                let (mut num, mut den) = (0.0, 0.0);
                for (s, row) in flows.iter().enumerate() {
                    let w = row[j].len() as f64;
                    num += w * left_col.position(s) as f64;
                    den += w;
                }
                (num / den, j)
            })
            .collect();
        bary.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let right_col = column(&pair[1].0, right, bary.iter().map(|&(_, j)| j).collect());

        let mut pair_links: Vec<SankeyLink> = Vec::new();
        for (s, row) in flows.into_iter().enumerate() {
            for (t, members) in row.into_iter().enumerate() {
                if !members.is_empty() {
                    pair_links.push(SankeyLink {
                        column: c,
                        source: s,
                        target: t,
                        weight: members.len(),
                        assets: members,
                    });
                }
            }
        }
        pair_links.sort_by_key(|l| (left_col.position(l.source), right_col.position(l.target)));
        links.extend(pair_links);
        columns.push(right_col);
    }
    Ok(SankeyDiagram { n_assets: assets.len(), columns, links })
}
