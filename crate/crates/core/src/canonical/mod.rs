//! Canonical form under Hadamard equivalence (row/column permutations and
//! negations).
//!
//! A matrix becomes a graph on `4n` vertices `r_i^±, c_j^±`. Rows and columns
//! carry different colours, so graph isomorphisms are exactly equivalences.
//! To give refinement something to bite on, every pair of rows is also
//! labelled with the distribution of quadruple types it forms with the other
//! row pairs (likewise for columns); these labels are equivalence invariants.

mod search;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::matrix::{words_for, HadamardMatrix, MatrixError, SignedPermutation};
use search::{canonical_labeling, mix, LabelledGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CanonicalError {
    #[error("orders differ: {0} and {1}")]
    OrderMismatch(usize, usize),
    #[error("key is {found} bytes, expected {expected} for order {order}")]
    KeyLength { order: usize, expected: usize, found: usize },
    #[error("key is too short to hold an order")]
    KeyTooShort,
    #[error("invalid hex: {0}")]
    Hex(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Vertex numbering: `r_i^+ = 2i`, `r_i^- = 2i+1`, `c_j^+ = 2n+2j`,
/// `c_j^- = 2n+2j+1`. The antipode of `v` is `v ^ 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceGraph {
    n: usize,
    stride: usize,
    adjacency: Vec<u64>,
}

impl EquivalenceGraph {
    pub fn matrix_order(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        4 * self.n
    }

    pub fn row_vertex(&self, i: usize, plus: bool) -> usize {
        2 * i + usize::from(!plus)
    }

    pub fn column_vertex(&self, j: usize, plus: bool) -> usize {
        2 * self.n + 2 * j + usize::from(!plus)
    }

    /// 0 for row vertices, 1 for column vertices.
    pub fn colour(&self, v: usize) -> u8 {
        u8::from(v >= 2 * self.n)
    }

    pub fn has_edge(&self, v: usize, w: usize) -> bool {
        self.adjacency[v * self.stride + w / 64] >> (w % 64) & 1 == 1
    }

    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        (0..self.vertex_count()).filter(|&w| self.has_edge(v, w)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }
}

pub fn to_graph(m: &HadamardMatrix) -> EquivalenceGraph {
    let n = m.order();
    let big = 4 * n;
    let stride = words_for(big);
    let mut adjacency = vec![0u64; big * stride];
    let mut link = |a: usize, b: usize| {
        adjacency[a * stride + b / 64] |= 1 << (b % 64);
        adjacency[b * stride + a / 64] |= 1 << (a % 64);
    };
    for i in 0..n {
        link(2 * i, 2 * i + 1);
        link(2 * n + 2 * i, 2 * n + 2 * i + 1);
        for j in 0..n {
            let flip = usize::from(!m.is_plus(i, j));
            let (rp, rm) = (2 * i, 2 * i + 1);
            let (cp, cm) = (2 * n + 2 * j, 2 * n + 2 * j + 1);
            link(rp, cp ^ flip);
            link(rm, cm ^ flip);
        }
    }
    EquivalenceGraph { n, stride, adjacency }
}

/// For each unordered pair of rows, a hash of how many other row pairs give
/// each quadruple type (minority size of the product of the four rows).
fn pair_type_labels(m: &HadamardMatrix) -> Vec<u64> {
    let n = m.order();
    let s = words_for(n);
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    let mut xors = Vec::with_capacity(n * (n - 1) / 2 * s);
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((a, b));
            xors.extend(m.row_words(a).iter().zip(m.row_words(b)).map(|(x, y)| x ^ y));
        }
    }
    let p = pairs.len();
    let buckets = n / 2 + 1;
    let mut hist = vec![0u32; p * buckets];
    for u in 0..p {
        let xu = &xors[u * s..(u + 1) * s];
        for v in u + 1..p {
            let xv = &xors[v * s..(v + 1) * s];
            let t: usize = xu.iter().zip(xv).map(|(x, y)| (x ^ y).count_ones() as usize).sum();
            let minority = t.min(n - t);
            hist[u * buckets + minority] += 1;
            hist[v * buckets + minority] += 1;
        }
    }
    let mut out = vec![0u64; n * n];
    for (u, &(a, b)) in pairs.iter().enumerate() {
        let h = hist[u * buckets..(u + 1) * buckets]
            .iter()
            .fold(0x5eed_u64, |acc, &c| mix(acc ^ c as u64));
        out[a * n + b] = h;
        out[b * n + a] = h;
    }
    out
}

const TAG_SELF: u64 = 1;
const TAG_ANTIPODE: u64 = 2;
const TAG_EDGE: u64 = 3;
const TAG_NON_EDGE: u64 = 4;
const TAG_ROWS: u64 = 5;
const TAG_COLUMNS: u64 = 6;

fn labelled_graph(m: &HadamardMatrix) -> LabelledGraph {
    let n = m.order();
    let big = 4 * n;
    let graph = to_graph(m);
    let row_pairs = pair_type_labels(m);
    let col_pairs = pair_type_labels(&m.transpose());
    let mut labels = vec![0u64; big * big];
    for v in 0..big {
        for w in 0..big {
            let (vc, wc) = (v >= 2 * n, w >= 2 * n);
            let tag = if v == w {
                mix(TAG_SELF)
            } else if v ^ 1 == w {
                mix(TAG_ANTIPODE)
            } else if vc != wc {
                mix(if graph.has_edge(v, w) { TAG_EDGE } else { TAG_NON_EDGE })
            } else if !vc {
                mix(TAG_ROWS ^ row_pairs[(v / 2) * n + w / 2].rotate_left(8))
            } else {
                let (a, b) = ((v - 2 * n) / 2, (w - 2 * n) / 2);
                mix(TAG_COLUMNS ^ col_pairs[a * n + b].rotate_left(8))
            };
            labels[v * big + w] = tag;
        }
    }
    // negating every row and every column fixes the matrix
    let antipodal: Vec<u32> = (0..big as u32).map(|v| v ^ 1).collect();
    LabelledGraph {
        order: big,
        labels,
        stride: graph.stride,
        adjacency: graph.adjacency,
        cells: vec![(0..2 * n).collect(), (2 * n..big).collect()],
        known_automorphisms: vec![antipodal],
    }
}

/// Bytes of the canonical representative: the order as a big-endian `u32`,
/// then each row packed into big-endian `u64` words, column 0 in the most
/// significant bit, `1` for `+1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalKey {
    bytes: Vec<u8>,
}

fn key_len(n: usize) -> usize {
    4 + n * words_for(n) * 8
}

impl CanonicalKey {
    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self, CanonicalError> {
        if bytes.len() < 4 {
            return Err(CanonicalError::KeyTooShort);
        }
        let n = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
        let expected = key_len(n);
        if n == 0 || bytes.len() != expected {
            return Err(CanonicalError::KeyLength { order: n, expected, found: bytes.len() });
        }
        Ok(Self { bytes })
    }

    pub fn from_hex(s: &str) -> Result<Self, CanonicalError> {
        let s = s.trim();
        if s.len() % 2 != 0 || !s.is_ascii() {
            return Err(CanonicalError::Hex(s.to_string()));
        }
        let bytes = (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16))
            .collect::<Result<Vec<u8>, _>>()
            .map_err(|_| CanonicalError::Hex(s.to_string()))?;
        Self::from_bytes(bytes)
    }

    pub fn to_hex(&self) -> String {
        self.bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn order(&self) -> usize {
        u32::from_be_bytes(self.bytes[..4].try_into().unwrap()) as usize
    }

    /// First eight bytes of the SHA-256 of the key, big-endian.
    pub fn fingerprint(&self) -> u64 {
        let digest = Sha256::digest(&self.bytes);
        u64::from_be_bytes(digest[..8].try_into().unwrap())
    }

    pub fn from_matrix_bytes(m: &HadamardMatrix) -> Self {
        let n = m.order();
        let mut bytes = Vec::with_capacity(key_len(n));
        bytes.extend_from_slice(&(n as u32).to_be_bytes());
        for i in 0..n {
            for w in m.row_words(i) {
                bytes.extend_from_slice(&w.reverse_bits().to_be_bytes());
            }
        }
        Self { bytes }
    }

    /// The canonical representative.
    pub fn decode(&self) -> HadamardMatrix {
        let n = self.order();
        let s = words_for(n);
        let words: Vec<u64> = self.bytes[4..]
            .chunks_exact(8)
            .map(|c| u64::from_be_bytes(c.try_into().unwrap()).reverse_bits())
            .collect();
        debug_assert_eq!(words.len(), n * s);
        HadamardMatrix::from_words(n, words)
    }
}

impl std::fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// A canonical key together with the moves that produce the representative
/// (`m.apply(&row_move, &col_move) == key.decode()`).
#[derive(Clone, Debug)]
pub struct CanonicalForm {
    pub key: CanonicalKey,
    pub row_move: SignedPermutation,
    pub col_move: SignedPermutation,
    /// Leaves visited by the search.
    pub leaves: usize,
    /// Automorphism generators found, as signed permutations of rows and columns.
    pub automorphisms: Vec<(SignedPermutation, SignedPermutation)>,
}

fn decode_pairs(positions: &[u32], count: usize, offset: usize) -> SignedPermutation {
    let mut order: Vec<usize> = (0..count).collect();
    let first = |i: usize| positions[offset + 2 * i].min(positions[offset + 2 * i + 1]);
    order.sort_by_key(|&i| first(i));
    let mut perm = vec![0; count];
    let mut signs = vec![1i8; count];
    for (rank, &i) in order.iter().enumerate() {
        perm[i] = rank;
        if positions[offset + 2 * i] > positions[offset + 2 * i + 1] {
            signs[i] = -1;
        }
    }
    SignedPermutation::new(perm, signs).expect("ranks form a permutation")
}

fn vertex_map_to_moves(images: &[u32], n: usize) -> (SignedPermutation, SignedPermutation) {
    let split = |offset: usize| {
        let perm: Vec<usize> = (0..n).map(|i| (images[offset + 2 * i] as usize - offset) / 2).collect();
        let signs: Vec<i8> = (0..n).map(|i| if images[offset + 2 * i] % 2 == 0 { 1 } else { -1 }).collect();
        SignedPermutation::new(perm, signs).expect("automorphisms keep the vertex colours")
    };
    (split(0), split(2 * n))
}

pub fn canonical_form(m: &HadamardMatrix) -> CanonicalForm {
    let n = m.order();
    let graph = labelled_graph(m);
    let result = canonical_labeling(&graph);
    let mut positions = vec![0u32; 4 * n];
    for (p, &v) in result.lab.iter().enumerate() {
        positions[v as usize] = p as u32;
    }
    let row_move = decode_pairs(&positions, n, 0);
    let col_move = decode_pairs(&positions, n, 2 * n);
    let canon = m.apply(&row_move, &col_move).expect("moves have the matrix order");
    let automorphisms = result.generators.iter().map(|g| vertex_map_to_moves(g, n)).collect();
    CanonicalForm {
        key: CanonicalKey::from_matrix_bytes(&canon),
        row_move,
        col_move,
        leaves: result.leaves,
        automorphisms,
    }
}

pub fn canonical_key(m: &HadamardMatrix) -> CanonicalKey {
    canonical_form(m).key
}

pub fn equivalent(a: &HadamardMatrix, b: &HadamardMatrix) -> Result<bool, CanonicalError> {
    if a.order() != b.order() {
        return Err(CanonicalError::OrderMismatch(a.order(), b.order()));
    }
    Ok(canonical_key(a) == canonical_key(b))
}

pub fn is_self_dual_class(m: &HadamardMatrix) -> bool {
    canonical_key(m) == canonical_key(&m.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{paley, sylvester, PaleyKind};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_move(n: usize, rng: &mut ChaCha8Rng) -> SignedPermutation {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(rng);
        let s = (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
        SignedPermutation::new(p, s).unwrap()
    }

    #[test]
    fn graph_shape() {
        let one = HadamardMatrix::from_signs(&[[1i8]]).unwrap();
        let g = to_graph(&one);
        assert_eq!((g.vertex_count(), g.edge_count()), (4, 4));
        for m in [sylvester(2), sylvester(4), paley(11, PaleyKind::One).unwrap()] {
            let n = m.order();
            let g = to_graph(&m);
            assert_eq!(g.vertex_count(), 4 * n);
            assert_eq!(g.edge_count(), 2 * n * n + 2 * n);
            assert_eq!(g.colour(g.row_vertex(n - 1, false)), 0);
            assert_eq!(g.colour(g.column_vertex(0, true)), 1);
            assert!(g.has_edge(g.row_vertex(0, true), g.row_vertex(0, false)));
        }
    }

    #[test]
    fn negating_a_row_swaps_its_vertices() {
        let m = sylvester(3);
        let neg = SignedPermutation::negations((0..8).map(|i| if i == 5 { -1 } else { 1 }).collect()).unwrap();
        let mm = m.apply(&neg, &SignedPermutation::identity(8)).unwrap();
        let (g, gg) = (to_graph(&m), to_graph(&mm));
        let swap = |v: usize| if v / 2 == 5 { v ^ 1 } else { v };
        for v in 0..32 {
            for w in 0..32 {
                assert_eq!(g.has_edge(v, w), gg.has_edge(swap(v), swap(w)));
            }
        }
        assert_eq!(canonical_key(&m), canonical_key(&mm));
    }

    #[test]
    fn keys_are_invariant_and_decode() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [sylvester(4), paley(19, PaleyKind::One).unwrap(), paley(23, PaleyKind::One).unwrap()] {
            let n = m.order();
            let form = canonical_form(&m);
            let rep = form.key.decode();
            assert!(rep.verify());
            assert_eq!(m.apply(&form.row_move, &form.col_move).unwrap(), rep);
            assert_eq!(canonical_key(&rep), form.key);
            for (r, c) in &form.automorphisms {
                assert_eq!(m.apply(r, c).unwrap(), m);
            }
            for _ in 0..25 {
                let t = m.apply(&random_move(n, &mut rng), &random_move(n, &mut rng)).unwrap();
                assert_eq!(canonical_key(&t), form.key);
            }
        }
    }

    #[test]
    fn hex_round_trip_and_errors() {
        let k = canonical_key(&sylvester(3));
        assert_eq!(k.order(), 8);
        assert_eq!(k.as_bytes().len(), 4 + 8 * 8);
        assert_eq!(CanonicalKey::from_hex(&k.to_hex()).unwrap(), k);
        assert!(CanonicalKey::from_hex("zz").is_err());
        assert!(matches!(CanonicalKey::from_hex("00000008ff"), Err(CanonicalError::KeyLength { .. })));
        assert_ne!(k.fingerprint(), canonical_key(&sylvester(4)).fingerprint());
    }

    #[test]
    fn duality_and_distinctness() {
        let s16 = sylvester(4);
        assert!(is_self_dual_class(&s16));
        assert!(is_self_dual_class(&paley(23, PaleyKind::One).unwrap()));
        let p12 = paley(11, PaleyKind::One).unwrap();
        let s12 = sylvester(2);
        assert!(equivalent(&p12, &p12.transpose()).unwrap());
        assert!(equivalent(&s12, &p12).is_err());
        let other16 = crate::double(&p12.transpose(), &p12, &(0..12).collect::<Vec<_>>(), crate::DoublingShape::Stacked).unwrap();
        assert_eq!(other16.order(), 24);
        assert!(!equivalent(&other16, &paley(23, PaleyKind::One).unwrap()).unwrap());
    }
}
