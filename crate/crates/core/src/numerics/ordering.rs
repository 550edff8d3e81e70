//! Fill-reducing orderings for sparse factorization.
//!
//! Nested dissection by level structures: each subgraph is split by the
//! middle level of a breadth-first search rooted at a pseudo-peripheral
//! node, the two halves are ordered recursively and the separator goes last.
//! For planar meshes this keeps the factor at O(n log n) entries.

use super::sparse::SparseOperator;

const LEAF_SIZE: usize = 48;

/// Undirected adjacency (without self loops) of a square sparse pattern.
pub struct Adjacency {
    ptr: Vec<usize>,
    idx: Vec<usize>,
}

impl Adjacency {
    pub fn from_pattern(a: &SparseOperator) -> Self {
        let n = a.dim();
        let mut deg = vec![0usize; n];
        for i in 0..n {
            for (j, _) in a.row(i) {
                if i != j {
                    deg[i] += 1;
                    deg[j] += 1;
                }
            }
        }
        let mut ptr = vec![0usize; n + 1];
        for i in 0..n {
            ptr[i + 1] = ptr[i] + deg[i];
        }
        let mut fill = ptr.clone();
        let mut idx = vec![0usize; ptr[n]];
        for i in 0..n {
            for (j, _) in a.row(i) {
                if i != j {
                    idx[fill[i]] = j;
                    fill[i] += 1;
                    idx[fill[j]] = i;
                    fill[j] += 1;
                }
            }
        }
        // Symmetric patterns list each edge twice; deduplicate.
        let mut out_ptr = vec![0usize; n + 1];
        let mut out_idx = Vec::with_capacity(idx.len() / 2);
        for i in 0..n {
            let nb = &mut idx[ptr[i]..ptr[i + 1]];
            nb.sort_unstable();
            let mut last = usize::MAX;
            for &j in nb.iter() {
                if j != last {
                    out_idx.push(j);
                    last = j;
                }
            }
            out_ptr[i + 1] = out_idx.len();
        }
        Self {
            ptr: out_ptr,
            idx: out_idx,
        }
    }

    pub fn len(&self) -> usize {
        self.ptr.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.idx[self.ptr[v]..self.ptr[v + 1]]
    }
}

/// Returns `perm` with `perm[new] = old`.
pub fn nested_dissection(a: &SparseOperator) -> Vec<usize> {
    let adj = Adjacency::from_pattern(a);
    let n = adj.len();
    let mut state = Dissection {
        adj: &adj,
        region: vec![0; n],
        next_region: 1,
        level: vec![usize::MAX; n],
        order: Vec::with_capacity(n),
    };
    let all: Vec<usize> = (0..n).collect();
    state.dissect(all, 0);
    debug_assert_eq!(state.order.len(), n);
    state.order
}

/// Inverse of a permutation.
pub fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

struct Dissection<'a> {
    adj: &'a Adjacency,
    region: Vec<usize>,
    next_region: usize,
    level: Vec<usize>,
    order: Vec<usize>,
}

impl Dissection<'_> {
    fn fresh_region(&mut self, nodes: &[usize]) -> usize {
        let id = self.next_region;
        self.next_region += 1;
        for &v in nodes {
            self.region[v] = id;
        }
        id
    }

    /// Breadth-first search inside `region`; fills `self.level` and returns
    /// the visit order.
    fn bfs(&mut self, root: usize, region: usize) -> Vec<usize> {
        let mut queue = vec![root];
        self.level[root] = 0;
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            let lv = self.level[v];
            for &w in self.adj.neighbors(v) {
                if self.region[w] == region && self.level[w] == usize::MAX {
                    self.level[w] = lv + 1;
                    queue.push(w);
                }
            }
        }
        queue
    }

    fn reset_levels(&mut self, nodes: &[usize]) {
        for &v in nodes {
            self.level[v] = usize::MAX;
        }
    }

    fn dissect(&mut self, nodes: Vec<usize>, depth: usize) {
        if nodes.len() <= LEAF_SIZE || depth > 64 {
            self.order.extend_from_slice(&nodes);
            return;
        }
        let region = self.fresh_region(&nodes);

        // Split into connected components first.
        let visit = self.bfs(nodes[0], region);
        if visit.len() < nodes.len() {
            self.reset_levels(&visit);
            let mut seen = vec![];
            let mut components = vec![];
            for &v in &nodes {
                if self.level[v] == usize::MAX {
                    let comp = self.bfs(v, region);
                    seen.extend_from_slice(&comp);
                    components.push(comp);
                }
            }
            self.reset_levels(&seen);
            for comp in components {
                self.dissect(comp, depth + 1);
            }
            return;
        }

        // Pseudo-peripheral root.
        let mut visit = visit;
        let mut root = nodes[0];
        let mut ecc = self.level[*visit.last().unwrap()];
        for _ in 0..6 {
            let far_level = self.level[*visit.last().unwrap()];
            let candidate = visit
                .iter()
                .copied()
                .filter(|&v| self.level[v] == far_level)
                .min_by_key(|&v| self.adj.neighbors(v).len())
                .unwrap();
            self.reset_levels(&visit);
            let trial = self.bfs(candidate, region);
            let trial_ecc = self.level[*trial.last().unwrap()];
            if trial_ecc > ecc {
                ecc = trial_ecc;
                root = candidate;
                visit = trial;
            } else {
                self.reset_levels(&trial);
                visit = self.bfs(root, region);
                break;
            }
        }

        let depth_max = self.level[*visit.last().unwrap()];
        if depth_max < 2 {
            self.reset_levels(&visit);
            self.order.extend_from_slice(&nodes);
            return;
        }
        let mut counts = vec![0usize; depth_max + 1];
        for &v in &visit {
            counts[self.level[v]] += 1;
        }
        let half = nodes.len() / 2;
        let mut acc = 0;
        let mut split = 1;
        for (l, &c) in counts.iter().enumerate() {
            acc += c;
            if acc >= half {
                split = l.clamp(1, depth_max - 1);
                break;
            }
        }

        let mut part_a = Vec::new();
        let mut part_b = Vec::new();
        let mut separator = Vec::new();
        for &v in &visit {
            let l = self.level[v];
            if l < split {
                part_a.push(v);
            } else if l > split {
                part_b.push(v);
            } else {
                let touches_far = self
                    .adj
                    .neighbors(v)
                    .iter()
                    .any(|&w| self.region[w] == region && self.level[w] == split + 1);
                if touches_far {
                    separator.push(v);
                } else {
                    part_a.push(v);
                }
            }
        }
        self.reset_levels(&visit);
        if part_a.is_empty() || part_b.is_empty() {
            self.order.extend_from_slice(&nodes);
            return;
        }
        self.dissect(part_a, depth + 1);
        self.dissect(part_b, depth + 1);
        self.order.extend_from_slice(&separator);
    }
}
