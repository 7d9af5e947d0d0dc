//! Individualization-refinement canonical labeling for vertex-coloured graphs
//! whose vertex pairs carry integer labels.
//!
//! Refinement splits cells by the sum of (hashed) pair labels into a splitter
//! cell, so any equivalence-invariant pair colouring can be layered on top of
//! plain adjacency. Leaves are ordered by the sequence of node traces and then
//! by the relabeled adjacency matrix; the largest leaf is canonical.

use std::cmp::Ordering;
use std::collections::VecDeque;

pub(crate) fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) struct LabelledGraph {
    pub order: usize,
    /// `labels[v * order + w]`, already hashed; summed during refinement.
    pub labels: Vec<u64>,
    /// Adjacency bitsets, `stride` words per vertex; the certificate.
    pub adjacency: Vec<u64>,
    pub stride: usize,
    /// Initial ordered partition.
    pub cells: Vec<Vec<usize>>,
    /// Automorphisms known in advance, as vertex images.
    pub known_automorphisms: Vec<Vec<u32>>,
}

#[derive(Clone)]
struct Partition {
    lab: Vec<u32>,
    /// Start of the cell holding each position.
    cell_at: Vec<u32>,
    /// End (exclusive) of the cell starting at each start position.
    end: Vec<u32>,
    cells: usize,
}

impl Partition {
    fn is_discrete(&self) -> bool {
        self.cells == self.lab.len()
    }
}

/// What a node's refinement trace is compared against while it is built.
#[derive(Clone, Copy)]
struct Guide<'a> {
    /// Comparison of the path so far with the best leaf's path.
    best_state: Ordering,
    /// The best leaf's trace at this level, when `best_state` is `Equal`.
    best: Option<&'a [u64]>,
    /// The first leaf's trace at this level, while the path matches it.
    first: Option<&'a [u64]>,
}

impl Guide<'_> {
    const NONE: Guide<'static> = Guide {
        best_state: Ordering::Greater,
        best: None,
        first: None,
    };
}

type Trace = Vec<u64>;

struct Leaf {
    path: Vec<u32>,
    traces: Vec<Trace>,
    lab: Vec<u32>,
    cert: Vec<u64>,
}

pub(crate) struct SearchResult {
    /// Vertex at each canonical position.
    pub lab: Vec<u32>,
    pub generators: Vec<Vec<u32>>,
    pub leaves: usize,
}

struct Refiner<'g> {
    g: &'g LabelledGraph,
    keys: Vec<u64>,
    in_queue: Vec<bool>,
}

struct Search<'g> {
    g: &'g LabelledGraph,
    refiner: Refiner<'g>,
    first: Option<Leaf>,
    best: Option<Leaf>,
    generators: Vec<Vec<u32>>,
    leaves: usize,
    nodes: usize,
}

fn find(uf: &mut [u32], mut x: u32) -> u32 {
    while uf[x as usize] != x {
        uf[x as usize] = uf[uf[x as usize] as usize];
        x = uf[x as usize];
    }
    x
}

impl Refiner<'_> {
    /// Refines to an equitable partition and returns the trace: one hashed
    /// event per cell split, then the cell count. Returns `None` as soon as
    /// the trace is known to fall below `guide.best` while differing from
    /// `guide.first`.
    fn refine(&mut self, part: &mut Partition, queue: &mut VecDeque<u32>, guide: Guide<'_>) -> Option<Vec<u64>> {
        let n = self.g.order;
        let mut events = Vec::new();
        let mut best_state = guide.best_state;
        let mut first_eq = guide.first.is_some();
        let mut emit = |ev: u64, events: &mut Vec<u64>| -> bool {
            let k = events.len();
            events.push(ev);
            if first_eq {
                first_eq = guide.first.and_then(|f| f.get(k)) == Some(&ev);
            }
            if best_state == Ordering::Equal {
                best_state = guide.best.and_then(|b| b.get(k)).map_or(Ordering::Greater, |b| ev.cmp(b));
            }
            best_state == Ordering::Less && !first_eq
        };
        let mut splitter = Vec::with_capacity(n);
        let mut frag = Vec::new();
        let mut aborted = false;
        'outer: while let Some(s) = queue.pop_front() {
            self.in_queue[s as usize] = false;
            if part.is_discrete() {
                break;
            }
            splitter.clear();
            splitter.extend_from_slice(&part.lab[s as usize..part.end[s as usize] as usize]);
            let mut start = 0usize;
            while start < n {
                let end = part.end[start] as usize;
                if end - start > 1 {
                    for p in start..end {
                        let v = part.lab[p] as usize;
                        let row = &self.g.labels[v * n..(v + 1) * n];
                        self.keys[v] = splitter.iter().fold(0u64, |acc, &w| acc.wrapping_add(row[w as usize]));
                    }
                    let k0 = self.keys[part.lab[start] as usize];
                    if part.lab[start + 1..end].iter().any(|&v| self.keys[v as usize] != k0) {
                        let keys = &self.keys;
                        part.lab[start..end].sort_unstable_by_key(|&v| (keys[v as usize], v));
                        frag.clear();
                        let mut fs = start;
                        for p in start + 1..=end {
                            if p == end || keys[part.lab[p] as usize] != keys[part.lab[fs] as usize] {
                                frag.push((fs, p));
                                fs = p;
                            }
                        }
                        let was_queued = self.in_queue[start];
                        let largest = frag
                            .iter()
                            .enumerate()
                            .max_by(|a, b| (a.1 .1 - a.1 .0).cmp(&(b.1 .1 - b.1 .0)).then(b.0.cmp(&a.0)))
                            .map(|(i, _)| i)
                            .unwrap();
                        let mut ev = mix((s as u64) << 40 ^ (start as u64) << 20 ^ frag.len() as u64);
                        for (i, &(a, b)) in frag.iter().enumerate() {
                            ev = mix(ev ^ keys[part.lab[a] as usize]);
                            ev = mix(ev ^ (b - a) as u64);
                            part.end[a] = b as u32;
                            for p in a..b {
                                part.cell_at[p] = a as u32;
                            }
                            let push = if was_queued { a != start } else { i != largest };
                            if push && !self.in_queue[a] {
                                self.in_queue[a] = true;
                                queue.push_back(a as u32);
                            }
                        }
                        part.cells += frag.len() - 1;
                        if emit(ev, &mut events) {
                            aborted = true;
                            break 'outer;
                        }
                    }
                }
                start = end;
            }
        }
        for &s in queue.iter() {
            self.in_queue[s as usize] = false;
        }
        queue.clear();
        if aborted || emit(mix(part.cells as u64), &mut events) {
            return None;
        }
        Some(events)
    }

    fn individualize(&mut self, part: &mut Partition, v: u32, guide: Guide<'_>) -> Option<Vec<u64>> {
        let p = part.lab.iter().position(|&x| x == v).expect("vertex present");
        let start = part.cell_at[p] as usize;
        let end = part.end[start] as usize;
        part.lab.swap(p, start);
        part.end[start] = start as u32 + 1;
        part.end[start + 1] = end as u32;
        for q in start + 1..end {
            part.cell_at[q] = start as u32 + 1;
        }
        part.cells += 1;
        let mut queue = VecDeque::from([start as u32]);
        self.in_queue[start] = true;
        self.refine(part, &mut queue, guide)
    }
}

impl<'g> Search<'g> {

    fn target_cell(part: &Partition) -> usize {
        let n = part.lab.len();
        let mut best: Option<(usize, usize)> = None;
        let mut start = 0;
        while start < n {
            let len = part.end[start] as usize - start;
            if len > 1 && best.is_none_or(|(_, l)| len < l) {
                best = Some((start, len));
            }
            start += len;
        }
        best.expect("partition is not discrete").0
    }

    fn certificate(&self, lab: &[u32]) -> Vec<u64> {
        let n = self.g.order;
        let s = self.g.stride;
        let mut inv = vec![0u32; n];
        for (p, &v) in lab.iter().enumerate() {
            inv[v as usize] = p as u32;
        }
        let mut cert = vec![0u64; n * s];
        for (p, &v) in lab.iter().enumerate() {
            let adj = &self.g.adjacency[v as usize * s..(v as usize + 1) * s];
            for (w, &word) in adj.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let u = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let q = inv[u] as usize;
                    cert[p * s + q / 64] |= 1 << (q % 64);
                }
            }
        }
        cert
    }

    fn add_generator(&mut self, from: &[u32], to: &[u32]) {
        let mut g = vec![0u32; self.g.order];
        for (a, b) in from.iter().zip(to) {
            g[*a as usize] = *b;
        }
        self.generators.push(g);
    }

    fn orbits_fixing(&self, path: &[u32]) -> Vec<u32> {
        let mut uf: Vec<u32> = (0..self.g.order as u32).collect();
        for g in &self.generators {
            if path.iter().all(|&v| g[v as usize] == v) {
                for (v, &w) in g.iter().enumerate() {
                    let (a, b) = (find(&mut uf, v as u32), find(&mut uf, w));
                    if a != b {
                        uf[a.max(b) as usize] = a.min(b);
                    }
                }
            }
        }
        uf
    }

    /// Returns the level to jump back to, if an automorphism makes the rest
    /// of the current subtree redundant.
    fn visit(&mut self, part: Partition, path: &mut Vec<u32>, traces: &mut Vec<Trace>, first_eq: bool) -> Option<usize> {
        if part.is_discrete() {
            return self.leaf(part, path, traces, first_eq);
        }
        let level = path.len();
        let start = Self::target_cell(&part);
        let mut children: Vec<u32> = part.lab[start..part.end[start] as usize].to_vec();
        children.sort_unstable();
        let mut done: Vec<u32> = Vec::new();
        let mut uf: Option<(usize, Vec<u32>)> = None;
        for &w in &children {
            if !done.is_empty() {
                if uf.as_ref().is_none_or(|(count, _)| *count != self.generators.len()) {
                    uf = Some((self.generators.len(), self.orbits_fixing(path)));
                }
                let orbits = &mut uf.as_mut().unwrap().1;
                let rw = find(orbits, w);
                if done.iter().any(|&d| find(orbits, d) == rw) {
                    continue;
                }
            }
            done.push(w);
            self.nodes += 1;
            let mut child = part.clone();
            let prefix = self.best.as_ref().map_or(Ordering::Greater, |b| compare_prefix(traces, &b.traces));
            let first = self.first.as_ref();
            let guide = Guide {
                best_state: prefix,
                best: self.best.as_ref().filter(|_| prefix == Ordering::Equal).and_then(|b| b.traces.get(level + 1)).map(|t| t.as_slice()),
                first: first.filter(|_| first_eq).and_then(|f| f.traces.get(level + 1)).map(|t| t.as_slice()),
            };
            let guide = Guide {
                best: if prefix == Ordering::Equal && guide.best.is_none() { Some(&[][..]) } else { guide.best },
                ..guide
            };
            let Some(t) = self.refiner.individualize(&mut child, w, guide) else {
                continue;
            };
            let f_eq = first_eq && first.is_none_or(|f| f.traces.get(level + 1) == Some(&t));
            traces.push(t);
            let b_cmp = self.best.as_ref().map_or(Ordering::Equal, |b| compare_prefix(traces, &b.traces));
            if b_cmp == Ordering::Less && !f_eq {
                traces.pop();
                continue;
            }
            path.push(w);
            let jump = self.visit(child, path, traces, f_eq);
            path.pop();
            traces.pop();
            if let Some(j) = jump {
                if j < level {
                    return Some(j);
                }
            }
        }
        None
    }

    fn leaf(&mut self, part: Partition, path: &[u32], traces: &[Trace], first_eq: bool) -> Option<usize> {
        self.leaves += 1;
        let cert = self.certificate(&part.lab);
        let leaf = Leaf {
            path: path.to_vec(),
            traces: traces.to_vec(),
            lab: part.lab,
            cert,
        };
        let Some(first) = &self.first else {
            self.best = Some(Leaf {
                path: leaf.path.clone(),
                traces: leaf.traces.clone(),
                lab: leaf.lab.clone(),
                cert: leaf.cert.clone(),
            });
            self.first = Some(leaf);
            return None;
        };
        if first_eq && first.traces.len() == leaf.traces.len() && first.cert == leaf.cert {
            let from = first.lab.clone();
            let common = common_prefix(&first.path, &leaf.path);
            self.add_generator(&from, &leaf.lab);
            return Some(common);
        }
        let best = self.best.as_ref().expect("best is set with first");
        let cmp = match compare_prefix(&leaf.traces, &best.traces) {
            Ordering::Equal if best.traces.len() != leaf.traces.len() => Ordering::Less,
            Ordering::Equal => leaf.cert.cmp(&best.cert),
            other => other,
        };
        match cmp {
            Ordering::Greater => {
                self.best = Some(leaf);
                None
            }
            Ordering::Equal => {
                let from = best.lab.clone();
                let common = common_prefix(&best.path, &leaf.path);
                self.add_generator(&from, &leaf.lab);
                Some(common)
            }
            Ordering::Less => None,
        }
    }
}

/// Lexicographic comparison of `cur` with the same-length prefix of `best`;
/// running past the end of `best` counts as greater.
fn compare_prefix<T: Ord>(cur: &[T], best: &[T]) -> Ordering {
    for (i, t) in cur.iter().enumerate() {
        match best.get(i) {
            None => return Ordering::Greater,
            Some(b) if t != b => return t.cmp(b),
            _ => {}
        }
    }
    Ordering::Equal
}

fn common_prefix(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

pub(crate) fn canonical_labeling(g: &LabelledGraph) -> SearchResult {
    let n = g.order;
    let mut lab = Vec::with_capacity(n);
    let mut cell_at = vec![0u32; n];
    let mut end = vec![0u32; n];
    let mut queue = VecDeque::new();
    let mut in_queue = vec![false; n];
    for cell in g.cells.iter().filter(|c| !c.is_empty()) {
        let start = lab.len();
        lab.extend(cell.iter().map(|&v| v as u32));
        end[start] = lab.len() as u32;
        for c in cell_at.iter_mut().take(lab.len()).skip(start) {
            *c = start as u32;
        }
        queue.push_back(start as u32);
        in_queue[start] = true;
    }
    assert_eq!(lab.len(), n, "initial cells must cover every vertex");
    let cells = g.cells.iter().filter(|c| !c.is_empty()).count();
    let mut part = Partition { lab, cell_at, end, cells };
    let mut search = Search {
        g,
        refiner: Refiner {
            g,
            keys: vec![0; n],
            in_queue,
        },
        first: None,
        best: None,
        generators: g.known_automorphisms.clone(),
        leaves: 0,
        nodes: 0,
    };
    let t = search.refiner.refine(&mut part, &mut queue, Guide::NONE).expect("unguided refinement completes");
    let mut path = Vec::new();
    let mut traces = vec![t];
    search.visit(part, &mut path, &mut traces, true);
    SearchResult {
        lab: search.best.expect("search reaches a leaf").lab,
        generators: search.generators,
        leaves: search.leaves,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plain_graph(n: usize, edges: &[(usize, usize)]) -> LabelledGraph {
        let stride = n.div_ceil(64);
        let mut adjacency = vec![0u64; n * stride];
        let mut labels = vec![mix(0); n * n];
        for &(a, b) in edges {
            adjacency[a * stride + b / 64] |= 1 << (b % 64);
            adjacency[b * stride + a / 64] |= 1 << (a % 64);
            labels[a * n + b] = mix(1);
            labels[b * n + a] = mix(1);
        }
        LabelledGraph {
            order: n,
            labels,
            adjacency,
            stride,
            cells: vec![(0..n).collect()],
            known_automorphisms: Vec::new(),
        }
    }

    fn canonical_edges(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
        let lab = canonical_labeling(&plain_graph(n, edges)).lab;
        let mut inv = vec![0; n];
        for (p, &v) in lab.iter().enumerate() {
            inv[v as usize] = p;
        }
        let mut out: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(a, b)| (inv[a].min(inv[b]), inv[a].max(inv[b])))
            .collect();
        out.sort_unstable();
        out
    }

    fn relabel(edges: &[(usize, usize)], perm: &[usize]) -> Vec<(usize, usize)> {
        edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect()
    }

    #[test]
    fn regular_graphs_canonicalize_consistently() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // Petersen graph, 3-cube, two disjoint 5-cycles vs the 10-cycle
        let petersen: Vec<(usize, usize)> = (0..5)
            .flat_map(|i| [(i, (i + 1) % 5), (i, i + 5), (i + 5, (i + 2) % 5 + 5)])
            .collect();
        let cube: Vec<(usize, usize)> = (0..8usize)
            .flat_map(|v| (0..3).map(move |b| (v, v ^ (1 << b))).filter(|(a, b)| a < b))
            .collect();
        let two_c5: Vec<(usize, usize)> = (0..5).flat_map(|i| [(i, (i + 1) % 5), (i + 5, (i + 1) % 5 + 5)]).collect();
        let c10: Vec<(usize, usize)> = (0..10).map(|i| (i, (i + 1) % 10)).collect();
        for (n, edges) in [(10, &petersen), (8, &cube), (10, &two_c5), (10, &c10)] {
            let base = canonical_edges(n, edges);
            for _ in 0..30 {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                assert_eq!(canonical_edges(n, &relabel(edges, &perm)), base);
            }
        }
        assert_ne!(canonical_edges(10, &two_c5), canonical_edges(10, &c10));
        assert_ne!(canonical_edges(10, &petersen), canonical_edges(10, &c10));
    }

    #[test]
    fn generators_are_automorphisms() {
        let cube: Vec<(usize, usize)> = (0..8usize)
            .flat_map(|v| (0..3).map(move |b| (v, v ^ (1 << b))).filter(|(a, b)| a < b))
            .collect();
        let g = plain_graph(8, &cube);
        let res = canonical_labeling(&g);
        assert!(!res.generators.is_empty());
        let mut set: Vec<(usize, usize)> = cube.clone();
        set.sort_unstable();
        for gen in &res.generators {
            let mut img: Vec<(usize, usize)> = cube
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (gen[a] as usize, gen[b] as usize);
                    (x.min(y), x.max(y))
                })
                .collect();
            img.sort_unstable();
            assert_eq!(img, set);
        }
    }
}
