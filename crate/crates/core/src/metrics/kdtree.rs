/// Static 3-d tree for nearest-neighbour queries.
///
/// Points that tie with a node's splitting coordinate all go to the same
/// side. Without that, samples lying on an axis-aligned plane (box faces)
/// land on both sides of every split through the plane and queries on the
/// plane stop pruning.
#[derive(Debug, Clone)]
pub struct KdTree {
    /// Points in tree order, so leaves are contiguous in memory.
    points: Vec<[f64; 3]>,
    /// Original index of each entry of `points`.
    ids: Vec<u32>,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    lo: u32,
    hi: u32,
    /// Index into `points` of the splitting point; unused for leaves.
    split: u32,
    axis: u8,
    left: u32,
    right: u32,
}

const LEAF: usize = 12;
const NONE: u32 = u32::MAX;

struct Build<'a> {
    points: &'a [[f64; 3]],
    order: Vec<u32>,
    nodes: Vec<Node>,
}

impl Build<'_> {
    fn coord(&self, k: u32, axis: usize) -> f64 {
        self.points[k as usize][axis]
    }

    fn build(&mut self, lo: usize, hi: usize) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            lo: lo as u32,
            hi: hi as u32,
            split: NONE,
            axis: 0,
            left: NONE,
            right: NONE,
        });
        if hi - lo <= LEAF {
            return id;
        }
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for &k in &self.order[lo..hi] {
            let p = self.points[k as usize];
            for d in 0..3 {
                min[d] = min[d].min(p[d]);
                max[d] = max[d].max(p[d]);
            }
        }
        let axis = (0..3)
            .max_by(|&a, &b| {
                (max[a] - min[a])
                    .total_cmp(&(max[b] - min[b]))
                    .then(b.cmp(&a))
            })
            .unwrap();
        if !(max[axis] > min[axis]) {
            // all points coincide
            return id;
        }
        let points = self.points;
        let mid = (lo + hi) / 2;
        self.order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
            points[a as usize][axis].total_cmp(&points[b as usize][axis])
        });
        let v = self.coord(self.order[mid], axis);
        // gather the tie group [lt, gt) around the median
        let below = partition_front(&mut self.order[lo..mid], |k| points[k as usize][axis] < v);
        let lt = lo + below;
        let ties_above = partition_front(&mut self.order[mid + 1..hi], |k| {
            points[k as usize][axis] == v
        });
        let gt = mid + 1 + ties_above;
        // the tie group goes wholly to whichever side keeps the split
        // closest to the median
        let split = if mid - lt <= gt - 1 - mid { lt } else { gt - 1 };
        let left = self.build(lo, split);
        let right = self.build(split + 1, hi);
        let node = &mut self.nodes[id as usize];
        node.split = split as u32;
        node.axis = axis as u8;
        node.left = left;
        node.right = right;
        id
    }
}

fn sq_dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    let (dx, dy, dz) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    dx * dx + dy * dy + dz * dz
}

/// Moves elements matching `pred` to the front of `s`; returns their count.
fn partition_front(s: &mut [u32], pred: impl Fn(u32) -> bool) -> usize {
    let mut k = 0;
    for i in 0..s.len() {
        if pred(s[i]) {
            s.swap(i, k);
            k += 1;
        }
    }
    k
}

impl KdTree {
    pub fn new(points: &[[f64; 3]]) -> Self {
        let mut builder = Build {
            points,
            order: (0..points.len() as u32).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            builder.build(0, points.len());
        }
        KdTree {
            points: builder.order.iter().map(|&k| points[k as usize]).collect(),
            ids: builder.order,
            nodes: builder.nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Squared distance from `q` to its nearest point.
    pub fn nearest_sq(&self, q: [f64; 3]) -> f64 {
        self.nearest_where(q, |_| true)
            .map_or(f64::INFINITY, |(_, d)| d)
    }

    /// Nearest point among those whose index passes `keep`, as
    /// `(index, squared distance)`.
    pub fn nearest_where(&self, q: [f64; 3], keep: impl Fn(usize) -> bool) -> Option<(usize, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        let mut offset = [0.0; 3];
        self.search(0, q, &mut offset, 0.0, &keep, &mut best);
        (best.0 != usize::MAX).then_some(best)
    }

    /// `offset` holds the per-axis distance from `q` to the current cell and
    /// `cell_sq` its squared norm, a lower bound for every point in it.
    fn search(
        &self,
        id: u32,
        q: [f64; 3],
        offset: &mut [f64; 3],
        cell_sq: f64,
        keep: &impl Fn(usize) -> bool,
        best: &mut (usize, f64),
    ) {
        let node = self.nodes[id as usize];
        if node.split == NONE {
            let range = node.lo as usize..node.hi as usize;
            for (p, &k) in self.points[range.clone()].iter().zip(&self.ids[range]) {
                let d = sq_dist(q, *p);
                if d < best.1 && keep(k as usize) {
                    *best = (k as usize, d);
                }
            }
            return;
        }
        let p = self.points[node.split as usize];
        let k = self.ids[node.split as usize] as usize;
        let d = sq_dist(q, p);
        if d < best.1 && keep(k) {
            *best = (k, d);
        }
        let axis = node.axis as usize;
        let diff = q[axis] - p[axis];
        let (near, far) = if diff < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        if near != NONE {
            self.search(near, q, offset, cell_sq, keep, best);
        }
        let old = offset[axis];
        let far_sq = cell_sq - old * old + diff * diff;
        if far != NONE && far_sq < best.1 {
            offset[axis] = diff;
            self.search(far, q, offset, far_sq, keep, best);
            offset[axis] = old;
        }
    }
}
