//! Bit-packed ±1 matrices and the elementary equivalence moves.
//!
//! Entries are stored one bit each: a set bit is `+1`, a clear bit is `-1`.
//! Row `i` occupies `stride` consecutive `u64` words, column `c` living in
//! word `c / 64` at bit `c % 64`. Bits past column `n - 1` are always zero.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("matrix order must be at least 1")]
    Empty,
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRow { row: usize, found: usize, expected: usize },
    #[error("entry ({row}, {col}) is {value}, expected +1 or -1")]
    BadEntry { row: usize, col: usize, value: i64 },
    #[error("index {index} out of range for order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("index {0} listed more than once")]
    DuplicateIndex(usize),
    #[error("move of size {found} applied to a matrix of order {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("malformed matrix text: {0}")]
    Parse(String),
}

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// Mask selecting the significant bits of word `w` for a row of length `n`.
#[inline]
pub(crate) fn word_mask(n: usize, w: usize) -> u64 {
    let lo = w * 64;
    if lo + 64 <= n {
        u64::MAX
    } else if lo >= n {
        0
    } else {
        (1u64 << (n - lo)) - 1
    }
}

/// A packed ±1 vector of fixed length.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SignVector {
    len: usize,
    words: Vec<u64>,
}

impl SignVector {
    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        let mut v = Self { len, words };
        v.clear_tail();
        v
    }

    pub fn all_plus(len: usize) -> Self {
        Self::from_words(len, vec![u64::MAX; words_for(len)])
    }

    pub fn from_signs(signs: &[i8]) -> Self {
        let mut words = vec![0u64; words_for(signs.len())];
        for (c, &s) in signs.iter().enumerate() {
            if s > 0 {
                words[c / 64] |= 1 << (c % 64);
            }
        }
        Self::from_words(signs.len(), words)
    }

    fn clear_tail(&mut self) {
        let n = self.len;
        for (w, word) in self.words.iter_mut().enumerate() {
            *word &= word_mask(n, w);
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn is_plus(&self, c: usize) -> bool {
        self.words[c / 64] >> (c % 64) & 1 == 1
    }

    pub fn get(&self, c: usize) -> i8 {
        if self.is_plus(c) {
            1
        } else {
            -1
        }
    }

    pub fn count_plus(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_minus(&self) -> usize {
        self.len - self.count_plus()
    }

    pub fn is_constant(&self) -> bool {
        let p = self.count_plus();
        p == 0 || p == self.len
    }

    /// Entrywise product with `other`.
    pub fn product(&self, other: &SignVector) -> SignVector {
        assert_eq!(self.len, other.len);
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| !(a ^ b))
            .collect();
        SignVector::from_words(self.len, words)
    }

    pub fn negated(&self) -> SignVector {
        SignVector::from_words(self.len, self.words.iter().map(|w| !w).collect())
    }

    pub fn to_signs(&self) -> Vec<i8> {
        (0..self.len).map(|c| self.get(c)).collect()
    }

    /// Indices holding `-1`.
    pub fn minus_positions(&self) -> Vec<usize> {
        (0..self.len).filter(|&c| !self.is_plus(c)).collect()
    }

    pub fn plus_positions(&self) -> Vec<usize> {
        (0..self.len).filter(|&c| self.is_plus(c)).collect()
    }
}

impl fmt::Debug for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len)
            .map(|c| if self.is_plus(c) { '+' } else { '-' })
            .collect();
        write!(f, "SignVector({s})")
    }
}

/// A square ±1 matrix.
///
/// Values are immutable once built. The validity flag (rows mutually
/// orthogonal) is computed at construction; a column-major copy of the bits
/// is built lazily the first time a column is requested.
pub struct HadamardMatrix {
    n: usize,
    stride: usize,
    rows: Vec<u64>,
    valid: bool,
    cols: OnceLock<Vec<u64>>,
}

impl Clone for HadamardMatrix {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            stride: self.stride,
            rows: self.rows.clone(),
            valid: self.valid,
            cols: self.cols.clone(),
        }
    }
}

impl PartialEq for HadamardMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.rows == other.rows
    }
}

impl Eq for HadamardMatrix {}

impl std::hash::Hash for HadamardMatrix {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.rows.hash(state);
    }
}

impl HadamardMatrix {
    /// Builds a matrix from packed row words (`n * words_for(n)` of them).
    pub(crate) fn from_words(n: usize, mut rows: Vec<u64>) -> Self {
        let stride = words_for(n);
        assert!(n >= 1);
        assert_eq!(rows.len(), n * stride);
        for i in 0..n {
            for w in 0..stride {
                rows[i * stride + w] &= word_mask(n, w);
            }
        }
        let valid = rows_orthogonal(n, stride, &rows);
        Self {
            n,
            stride,
            rows,
            valid,
            cols: OnceLock::new(),
        }
    }

    /// `entry(i, j)` returns `true` for `+1`.
    pub fn from_fn(n: usize, mut entry: impl FnMut(usize, usize) -> bool) -> Result<Self, MatrixError> {
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let stride = words_for(n);
        let mut rows = vec![0u64; n * stride];
        for i in 0..n {
            for j in 0..n {
                if entry(i, j) {
                    rows[i * stride + j / 64] |= 1 << (j % 64);
                }
            }
        }
        Ok(Self::from_words(n, rows))
    }

    pub fn from_signs<R: AsRef<[i8]>>(rows: &[R]) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n {
                return Err(MatrixError::RaggedRow { row: i, found: r.len(), expected: n });
            }
            if let Some(j) = r.iter().position(|&v| v != 1 && v != -1) {
                return Err(MatrixError::BadEntry { row: i, col: j, value: r[j] as i64 });
            }
        }
        Self::from_fn(n, |i, j| rows[i].as_ref()[j] > 0)
    }

    pub fn from_sign_vectors(rows: &[SignVector]) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut words = Vec::with_capacity(n * words_for(n));
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MatrixError::RaggedRow { row: i, found: r.len(), expected: n });
            }
            words.extend_from_slice(r.words());
        }
        Ok(Self::from_words(n, words))
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub(crate) fn stride(&self) -> usize {
        self.stride
    }

    /// Whether the rows were found mutually orthogonal at construction.
    pub fn is_hadamard(&self) -> bool {
        self.valid
    }

    /// Recomputes mutual orthogonality of the rows.
    pub fn verify(&self) -> bool {
        rows_orthogonal(self.n, self.stride, &self.rows)
    }

    #[inline]
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.rows[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row(&self, i: usize) -> SignVector {
        SignVector::from_words(self.n, self.row_words(i).to_vec())
    }

    fn column_words_all(&self) -> &[u64] {
        self.cols.get_or_init(|| transpose_words(self.n, self.stride, &self.rows))
    }

    pub fn column_words(&self, j: usize) -> &[u64] {
        &self.column_words_all()[j * self.stride..(j + 1) * self.stride]
    }

    pub fn column(&self, j: usize) -> SignVector {
        SignVector::from_words(self.n, self.column_words(j).to_vec())
    }

    #[inline]
    pub fn is_plus(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.stride + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        if self.is_plus(i, j) {
            1
        } else {
            -1
        }
    }

    pub fn to_signs(&self) -> Vec<Vec<i8>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.column_words_all()
    }

    pub fn transpose(&self) -> HadamardMatrix {
        let cols = self.column_words_all().to_vec();
        let mut t = HadamardMatrix::from_words(self.n, cols);
        let _ = t.cols.set(self.rows.clone());
        // columns of a Hadamard matrix are orthogonal as well
        t.valid = self.valid || t.valid;
        t
    }

    /// Entrywise product of the named rows.
    pub fn hadamard_product(&self, rows: &[usize]) -> Result<SignVector, MatrixError> {
        self.check_indices(rows)?;
        let mut acc = vec![u64::MAX; self.stride];
        for &r in rows {
            for (a, b) in acc.iter_mut().zip(self.row_words(r)) {
                *a = !(*a ^ b);
            }
        }
        Ok(SignVector::from_words(self.n, acc))
    }

    pub(crate) fn check_indices(&self, idx: &[usize]) -> Result<(), MatrixError> {
        for (k, &i) in idx.iter().enumerate() {
            if i >= self.n {
                return Err(MatrixError::IndexOutOfRange { index: i, order: self.n });
            }
            if idx[..k].contains(&i) {
                return Err(MatrixError::DuplicateIndex(i));
            }
        }
        Ok(())
    }

    /// Permutes and negates rows, then columns.
    pub fn apply(&self, row_move: &SignedPermutation, col_move: &SignedPermutation) -> Result<HadamardMatrix, MatrixError> {
        for mv in [row_move, col_move] {
            if mv.len() != self.n {
                return Err(MatrixError::SizeMismatch { expected: self.n, found: mv.len() });
            }
        }
        let (n, s) = (self.n, self.stride);
        let mut staged = vec![0u64; n * s];
        for i in 0..n {
            let dst = row_move.image(i);
            let neg = row_move.is_negated(i);
            for w in 0..s {
                let v = self.rows[i * s + w];
                staged[dst * s + w] = if neg { !v } else { v };
            }
        }
        let mut out = vec![0u64; n * s];
        for i in 0..n {
            let row = &staged[i * s..(i + 1) * s];
            for j in 0..n {
                let bit = (row[j / 64] >> (j % 64) & 1 == 1) ^ col_move.is_negated(j);
                if bit {
                    let d = col_move.image(j);
                    out[i * s + d / 64] |= 1 << (d % 64);
                }
            }
        }
        let mut m = HadamardMatrix::from_words(n, out);
        m.valid = m.valid || self.valid;
        Ok(m)
    }

    /// Flips the listed entries.
    pub(crate) fn with_entries_negated(&self, cells: impl IntoIterator<Item = (usize, usize)>) -> HadamardMatrix {
        let mut rows = self.rows.clone();
        for (i, j) in cells {
            rows[i * self.stride + j / 64] ^= 1 << (j % 64);
        }
        HadamardMatrix::from_words(self.n, rows)
    }

    /// Flips the entries of each row in `rows` at the columns set in `mask`.
    pub(crate) fn with_block_negated(&self, rows: &[usize], mask: &[u64]) -> HadamardMatrix {
        let mut words = self.rows.clone();
        for &i in rows {
            for (w, m) in mask.iter().enumerate() {
                words[i * self.stride + w] ^= m;
            }
        }
        HadamardMatrix::from_words(self.n, words)
    }

    /// Serializes to the `.had` text format.
    pub fn to_had_string(&self) -> String {
        let mut s = String::with_capacity((self.n + 1) * (self.n + 1) + 8);
        s.push_str(&self.n.to_string());
        s.push('\n');
        for i in 0..self.n {
            for j in 0..self.n {
                s.push(if self.is_plus(i, j) { '+' } else { '-' });
            }
            s.push('\n');
        }
        s
    }

    /// Parses the `.had` text format: the order on the first line, then one
    /// line of `+`/`-` (or `1`/`0`) characters per row.
    pub fn parse_had(text: &str) -> Result<HadamardMatrix, MatrixError> {
        let mut lines = text.lines().map(|l| l.trim_end_matches('\r')).filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| MatrixError::Parse("empty input".into()))?;
        let n: usize = header
            .trim()
            .parse()
            .map_err(|_| MatrixError::Parse(format!("bad order line {header:?}")))?;
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| MatrixError::Parse(format!("expected {n} rows, found {i}")))?
                .trim();
            let mut row = Vec::with_capacity(n);
            for (j, ch) in line.chars().enumerate() {
                row.push(match ch {
                    '+' | '1' => 1i8,
                    '-' | '0' => -1,
                    other => return Err(MatrixError::Parse(format!("row {i}, column {j}: unexpected {other:?}"))),
                });
            }
            if row.len() != n {
                return Err(MatrixError::RaggedRow { row: i, found: row.len(), expected: n });
            }
            rows.push(row);
        }
        if let Some(extra) = lines.next() {
            return Err(MatrixError::Parse(format!("trailing content {extra:?}")));
        }
        Self::from_signs(&rows)
    }
}

impl FromStr for HadamardMatrix {
    type Err = MatrixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_had(s)
    }
}

impl fmt::Debug for HadamardMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "HadamardMatrix(n={}, valid={})", self.n, self.valid)?;
        for i in 0..self.n {
            let s: String = (0..self.n).map(|j| if self.is_plus(i, j) { '+' } else { '-' }).collect();
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}

impl fmt::Display for HadamardMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_had_string())
    }
}

fn rows_orthogonal(n: usize, stride: usize, rows: &[u64]) -> bool {
    if n == 1 {
        return true;
    }
    if n % 2 == 1 {
        return false;
    }
    let half = (n / 2) as u32;
    for i in 0..n {
        let ri = &rows[i * stride..(i + 1) * stride];
        for j in i + 1..n {
            let rj = &rows[j * stride..(j + 1) * stride];
            let diff: u32 = ri.iter().zip(rj).map(|(a, b)| (a ^ b).count_ones()).sum();
            if diff != half {
                return false;
            }
        }
    }
    true
}

fn transpose_words(n: usize, stride: usize, rows: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; n * stride];
    for i in 0..n {
        for j in 0..n {
            if rows[i * stride + j / 64] >> (j % 64) & 1 == 1 {
                out[j * stride + i / 64] |= 1 << (i % 64);
            }
        }
    }
    out
}

/// A permutation paired with a sign per element: element `i` is sent to
/// position `image(i)` and multiplied by `sign(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    negate: Vec<bool>,
}

impl SignedPermutation {
    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            negate: vec![false; n],
        }
    }

    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self, MatrixError> {
        let n = perm.len();
        if signs.len() != n {
            return Err(MatrixError::SizeMismatch { expected: n, found: signs.len() });
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n {
                return Err(MatrixError::IndexOutOfRange { index: p, order: n });
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(MatrixError::DuplicateIndex(p));
            }
        }
        if let Some(k) = signs.iter().position(|&s| s != 1 && s != -1) {
            return Err(MatrixError::BadEntry { row: 0, col: k, value: signs[k] as i64 });
        }
        Ok(Self {
            perm,
            negate: signs.into_iter().map(|s| s < 0).collect(),
        })
    }

    pub fn permutation(perm: Vec<usize>) -> Result<Self, MatrixError> {
        let n = perm.len();
        Self::new(perm, vec![1; n])
    }

    pub fn negations(signs: Vec<i8>) -> Result<Self, MatrixError> {
        let n = signs.len();
        Self::new((0..n).collect(), signs)
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    #[inline]
    pub fn image(&self, i: usize) -> usize {
        self.perm[i]
    }

    #[inline]
    pub fn is_negated(&self, i: usize) -> bool {
        self.negate[i]
    }

    pub fn sign(&self, i: usize) -> i8 {
        if self.negate[i] {
            -1
        } else {
            1
        }
    }

    /// The move equal to applying `self` and then `then`.
    pub fn then(&self, then: &SignedPermutation) -> SignedPermutation {
        assert_eq!(self.len(), then.len());
        let perm = self.perm.iter().map(|&p| then.perm[p]).collect();
        let negate = (0..self.len()).map(|i| self.negate[i] ^ then.negate[self.perm[i]]).collect();
        SignedPermutation { perm, negate }
    }

    pub fn inverse(&self) -> SignedPermutation {
        let n = self.len();
        let mut perm = vec![0; n];
        let mut negate = vec![false; n];
        for i in 0..n {
            perm[self.perm[i]] = i;
            negate[self.perm[i]] = self.negate[i];
        }
        SignedPermutation { perm, negate }
    }
}
