//! Free/fixed partitioning of the variables and connected-component
//! detection on the thresholded covariance.

use std::collections::VecDeque;

use crate::matrix::SymMatrix;

/// Upper-triangular pairs split into those the inner solver updates (free)
/// and those it leaves at zero (fixed).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    /// Pairs `(i, j)` with `i <= j`, in row-major order.
    pub free: Vec<(usize, usize)>,
    pub fixed_count: usize,
    pub p: usize,
}

impl Partition {
    /// Free entries counted over the full matrix (off-diagonal pairs twice).
    pub fn free_entries(&self) -> usize {
        self.free
            .iter()
            .map(|&(i, j)| if i == j { 1 } else { 2 })
            .sum()
    }
}

/// A pair is fixed iff `X_ij == 0` and `|grad_ij| <= lambda_ij`.
pub fn partition(x: &SymMatrix, grad_g: &SymMatrix, lambda: &SymMatrix) -> Partition {
    let p = x.dim();
    let mut free = Vec::new();
    let mut fixed_count = 0;
    for i in 0..p {
        for j in i..p {
            if x.get(i, j) == 0.0 && grad_g.get(i, j).abs() <= lambda.get(i, j) {
                fixed_count += 1;
            } else {
                free.push((i, j));
            }
        }
    }
    Partition {
        free,
        fixed_count,
        p,
    }
}

/// Connected components of the graph with an edge wherever the soft-thresholded
/// covariance is nonzero off the diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockStructure {
    pub labels: Vec<usize>,
    /// Node lists per component, each sorted, ordered by smallest member.
    pub blocks: Vec<Vec<usize>>,
}

impl BlockStructure {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }
}

/// Components of `{(i, j) : i != j, |S_ij| > lambda_ij}` by breadth-first search.
pub fn threshold_pattern(s: &SymMatrix, lambda: &SymMatrix) -> BlockStructure {
    let p = s.dim();
    let adjacency: Vec<Vec<usize>> = (0..p)
        .map(|i| {
            (0..p)
                .filter(|&j| j != i && s.get(i, j).abs() > lambda.get(i, j))
                .collect()
        })
        .collect();

    let mut labels = vec![usize::MAX; p];
    let mut blocks = Vec::new();
    let mut queue = VecDeque::new();
    for root in 0..p {
        if labels[root] != usize::MAX {
            continue;
        }
        let id = blocks.len();
        let mut members = vec![root];
        labels[root] = id;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            for &nb in &adjacency[v] {
                if labels[nb] == usize::MAX {
                    labels[nb] = id;
                    members.push(nb);
                    queue.push_back(nb);
                }
            }
        }
        members.sort_unstable();
        blocks.push(members);
    }
    BlockStructure { labels, blocks }
}
