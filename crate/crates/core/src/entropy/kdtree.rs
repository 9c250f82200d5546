//! Exact k-nearest-neighbour search over a static point set.

use std::collections::BinaryHeap;

use ordered::Dist;

const LEAF_SIZE: usize = 16;

mod ordered {
    use std::cmp::Ordering;

    /// Squared distance with a total order; ties broken by point index.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Dist(pub f64, pub usize);

    impl Eq for Dist {}

    impl PartialOrd for Dist {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }

    impl Ord for Dist {
        fn cmp(&self, other: &Self) -> Ordering {
            self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
        }
    }
}

enum Node {
    Leaf { start: usize, end: usize },
    Split { dim: usize, value: f64, left: Box<Node>, right: Box<Node> },
}

/// k-d tree over `n` points of dimension `d`, stored row-major.
pub struct KdTree<'a> {
    points: &'a [f64],
    d: usize,
    perm: Vec<usize>,
    root: Node,
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl<'a> KdTree<'a> {
    pub fn new(points: &'a [f64], d: usize) -> Self {
        assert!(d > 0 && points.len() % d == 0);
        let n = points.len() / d;
        let mut perm: Vec<usize> = (0..n).collect();
        let root = Self::build(points, d, &mut perm, 0);
        KdTree { points, d, perm, root }
    }

    fn point(points: &[f64], d: usize, i: usize) -> &[f64] {
        &points[i * d..(i + 1) * d]
    }

    fn build(points: &[f64], d: usize, idx: &mut [usize], offset: usize) -> Node {
        let len = idx.len();
        if len <= LEAF_SIZE {
            return Node::Leaf { start: offset, end: offset + len };
        }
        // split on the widest dimension
        let mut best = (0, -1.0);
        for k in 0..d {
            let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = points[i * d + k];
                (lo.min(v), hi.max(v))
            });
            if hi - lo > best.1 {
                best = (k, hi - lo);
            }
        }
        let dim = best.0;
        let mid = len / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| points[a * d + dim].total_cmp(&points[b * d + dim]));
        let value = points[idx[mid] * d + dim];
        let (l, r) = idx.split_at_mut(mid);
        Node::Split {
            dim,
            value,
            left: Box::new(Self::build(points, d, l, offset)),
            right: Box::new(Self::build(points, d, r, offset + mid)),
        }
    }

    /// Squared distances to the `k` nearest other points of point `query`,
    /// ascending.
    pub fn knn_excluding(&self, query: usize, k: usize) -> Vec<f64> {
        let q = Self::point(self.points, self.d, query);
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(&self.root, q, query, k, &mut heap);
        let mut out: Vec<f64> = heap.into_iter().map(|Dist(v, _)| v).collect();
        out.sort_by(f64::total_cmp);
        out
    }

    fn search(&self, node: &Node, q: &[f64], skip: usize, k: usize, heap: &mut BinaryHeap<Dist>) {
        match node {
            Node::Leaf { start, end } => {
                for &i in &self.perm[*start..*end] {
                    if i == skip {
                        continue;
                    }
                    let cand = Dist(sq_dist(q, Self::point(self.points, self.d, i)), i);
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().expect("heap is full") {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split { dim, value, left, right } => {
                let diff = q[*dim] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, skip, k, heap);
                let bound = heap.peek().map_or(f64::INFINITY, |d| d.0);
                if heap.len() < k || diff * diff <= bound {
                    self.search(far, q, skip, k, heap);
                }
            }
        }
    }
}

/// O(n) scan for the `k` nearest other points, squared distances ascending.
pub(crate) fn knn_brute(points: &[f64], d: usize, query: usize, k: usize) -> Vec<f64> {
    let n = points.len() / d;
    let q = &points[query * d..(query + 1) * d];
    let mut all: Vec<f64> = (0..n)
        .filter(|&j| j != query)
        .map(|j| sq_dist(q, &points[j * d..(j + 1) * d]))
        .collect();
    all.select_nth_unstable_by(k - 1, f64::total_cmp);
    all.truncate(k);
    all.sort_by(f64::total_cmp);
    all
}
