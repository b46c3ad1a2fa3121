use serde::{Deserialize, Serialize};

use crate::admm::canonical_groups;
use crate::error::Result;

/// Which dimension of `H` a partition splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Measurement rows (consensus-style clusters).
    Rows,
    /// State columns (sharing-style clusters).
    Columns,
}

/// Disjoint, covering grouping of rows or columns into `G` clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterPartition {
    axis: Axis,
    groups: Vec<Vec<usize>>,
}

impl ClusterPartition {
    /// Validates that `groups` split `0..len` and stores them sorted.
    pub fn new(axis: Axis, groups: Vec<Vec<usize>>, len: usize) -> Result<Self> {
        Ok(ClusterPartition {
            axis,
            groups: canonical_groups(groups, len)?,
        })
    }

    /// `g` contiguous, nearly equal chunks of `0..len`.
    pub fn contiguous(axis: Axis, len: usize, g: usize) -> Result<Self> {
        if g == 0 || g > len {
            return Err(crate::Error::InvalidArgument(format!(
                "cannot split {len} indices into {g} groups"
            )));
        }
        let base = len / g;
        let extra = len % g;
        let mut start = 0;
        let groups = (0..g)
            .map(|i| {
                let size = base + usize::from(i < extra);
                let group = (start..start + size).collect();
                start += size;
                group
            })
            .collect();
        ClusterPartition::new(axis, groups, len)
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Total number of indices covered.
    pub fn covered(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }
}
