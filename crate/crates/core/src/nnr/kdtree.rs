use super::{Neighbor, ReferenceSample};

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// kd-tree over the rows of a [`ReferenceSample`].
#[derive(Debug, Clone)]
pub struct KdTree {
    nodes: Vec<Node>,
    rows: Vec<usize>,
}

impl KdTree {
    pub fn build(sample: &ReferenceSample) -> Self {
        let mut tree = KdTree {
            nodes: Vec::new(),
            rows: (0..sample.len()).collect(),
        };
        if !tree.rows.is_empty() {
            tree.build_node(sample, 0, sample.len());
        }
        tree
    }

    fn build_node(&mut self, sample: &ReferenceSample, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let dim = (0..sample.dimension)
            .map(|d| {
                let (lo, hi) = self.rows[start..end]
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                        let v = sample.pattern(r)[d];
                        (lo.min(v), hi.max(v))
                    });
                (d, hi - lo)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map_or(0, |(d, _)| d);
        let mid = start + (end - start) / 2;
        self.rows[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            sample.pattern(a)[dim].total_cmp(&sample.pattern(b)[dim])
        });
        let value = sample.pattern(self.rows[mid])[dim];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(sample, start, mid);
        let right = self.build_node(sample, mid, end);
        self.nodes[id] = Node::Split {
            dim,
            value,
            left,
            right,
        };
        id
    }

    /// k nearest neighbors, each within a factor `1 + eps` of the true k-th
    /// distance. Sorted by distance then row.
    pub fn knn(&self, sample: &ReferenceSample, query: &[f64], k: usize, eps: f64) -> Vec<Neighbor> {
        let k = k.min(self.rows.len());
        if k == 0 {
            return Vec::new();
        }
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        let shrink = 1.0 / ((1.0 + eps) * (1.0 + eps));
        self.knn_node(sample, query, k, shrink, 0, &mut best);
        best.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        best.into_iter()
            .map(|(d2, index)| Neighbor {
                index,
                distance: d2.sqrt(),
            })
            .collect()
    }

    fn knn_node(
        &self,
        sample: &ReferenceSample,
        query: &[f64],
        k: usize,
        shrink: f64,
        node: usize,
        best: &mut Vec<(f64, usize)>,
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &row in &self.rows[start..end] {
                    let d2: f64 = sample
                        .pattern(row)
                        .iter()
                        .zip(query)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    let key = (d2, row);
                    if best.len() == k && !lex_less(key, best[k - 1]) {
                        continue;
                    }
                    let at = best.partition_point(|&e| lex_less(e, key));
                    best.insert(at, key);
                    best.truncate(k);
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = query[dim] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.knn_node(sample, query, k, shrink, near, best);
                if best.len() < k || diff * diff < best[k - 1].0 * shrink {
                    self.knn_node(sample, query, k, shrink, far, best);
                }
            }
        }
    }

    /// All rows within `eps` (exact).
    pub fn within(&self, sample: &ReferenceSample, query: &[f64], eps: f64) -> Vec<Neighbor> {
        let mut out = Vec::new();
        if !self.rows.is_empty() {
            self.within_node(sample, query, eps, 0, &mut out);
        }
        out.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index)));
        out
    }

    fn within_node(&self, sample: &ReferenceSample, query: &[f64], eps: f64, node: usize, out: &mut Vec<Neighbor>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &row in &self.rows[start..end] {
                    let d2: f64 = sample
                        .pattern(row)
                        .iter()
                        .zip(query)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    let distance = d2.sqrt();
                    if distance <= eps {
                        out.push(Neighbor { index: row, distance });
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = query[dim] - value;
                if diff <= eps {
                    self.within_node(sample, query, eps, left, out);
                }
                if diff >= -eps {
                    self.within_node(sample, query, eps, right, out);
                }
            }
        }
    }
}

fn lex_less(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}
