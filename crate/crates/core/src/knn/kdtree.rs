//! Exact k-nearest-neighbor search with a k-d tree.
//!
//! Neighbors are ordered by `(squared distance, index)`, the same total
//! order the brute-force scan uses, so both paths return identical lists.
//! Pruning compares a single-axis gap against the current k-th distance;
//! the gap is never larger than the full squared distance in floating
//! point, so no candidate that could enter the list is skipped.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::numeric::squared_distance;

const LEAF_SIZE: usize = 16;

/// A neighbor key: squared distance, then index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub dist_sq: f64,
    pub index: usize,
}

impl Eq for Neighbor {}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist_sq
            .total_cmp(&other.dist_sq)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The `k` smallest keys over all points, ascending.
pub fn brute_force_neighbors(points: &[f64], dim: usize, query: &[f64], k: usize) -> Vec<Neighbor> {
    let mut all: Vec<Neighbor> = points
        .chunks_exact(dim)
        .enumerate()
        .map(|(index, p)| Neighbor {
            dist_sq: squared_distance(query, p),
            index,
        })
        .collect();
    let k = k.min(all.len());
    if k == 0 {
        return Vec::new();
    }
    if k < all.len() {
        all.select_nth_unstable(k - 1);
        all.truncate(k);
    }
    all.sort_unstable();
    all
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    /// Points permuted into tree order.
    points: Vec<f64>,
    /// Original index of each permuted point.
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn build(points: &[f64], dim: usize) -> Self {
        let n = points.len() / dim;
        let mut order: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::new();
        if n > 0 {
            build_node(points, dim, &mut order, 0, n, &mut nodes);
        }
        let mut permuted = Vec::with_capacity(points.len());
        for &i in &order {
            permuted.extend_from_slice(&points[i * dim..(i + 1) * dim]);
        }
        Self {
            dim,
            points: permuted,
            order,
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// The `k` nearest points to `query`, ascending by `(distance, index)`.
    pub fn nearest(&self, query: &[f64], k: usize) -> Vec<Neighbor> {
        let k = k.min(self.len());
        if k == 0 {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, query, k, &mut heap);
        heap.into_sorted_vec()
    }

    fn search(&self, node: usize, query: &[f64], k: usize, heap: &mut BinaryHeap<Neighbor>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    let p = &self.points[slot * self.dim..(slot + 1) * self.dim];
                    let cand = Neighbor {
                        dist_sq: squared_distance(query, p),
                        index: self.order[slot],
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().expect("heap holds k items") {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let (near, far, gap) = if query[axis] < value {
                    (left, right, value - query[axis])
                } else {
                    (right, left, query[axis] - value)
                };
                self.search(near, query, k, heap);
                let gap_sq = gap * gap;
                if heap.len() < k || gap_sq <= heap.peek().expect("nonempty").dist_sq {
                    self.search(far, query, k, heap);
                }
            }
        }
    }
}

fn build_node(
    points: &[f64],
    dim: usize,
    order: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let id = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return id;
    }
    let coord = |i: usize, a: usize| points[i * dim + a];
    let axis = (0..dim)
        .map(|a| {
            let (lo, hi) = order[start..end]
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    (lo.min(coord(i, a)), hi.max(coord(i, a)))
                });
            (a, hi - lo)
        })
        .fold(
            (0, f64::NEG_INFINITY),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        )
        .0;
    let mid = start + (end - start) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&i, &j| coord(i, axis).total_cmp(&coord(j, axis)));
    let value = coord(order[mid], axis);
    nodes.push(Node::Leaf { start, end });
    let left = build_node(points, dim, order, start, mid, nodes);
    let right = build_node(points, dim, order, mid, end, nodes);
    nodes[id] = Node::Split {
        axis,
        value,
        left,
        right,
    };
    id
}
