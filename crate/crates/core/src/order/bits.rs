//! Square bit matrices with word-level row operations.
//!
//! Row `i` of a matrix is the set `{ j | (i, j) is set }`. Every relation the
//! closure keeps (positives, negatives, and their transposes) is one of these.

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Default)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    data: Vec<u64>,
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(WORD).max(1);
        BitMatrix {
            n,
            words,
            data: vec![0; n * words],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn words_per_row(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.data[i * self.words + j / WORD] >> (j % WORD) & 1 == 1
    }

    /// Sets bit `(i, j)`; returns whether it was previously clear.
    #[inline]
    pub fn insert(&mut self, i: usize, j: usize) -> bool {
        let w = &mut self.data[i * self.words + j / WORD];
        let mask = 1u64 << (j % WORD);
        let fresh = *w & mask == 0;
        *w |= mask;
        fresh
    }

    #[inline]
    pub fn or_row(&mut self, i: usize, bits: &[u64]) {
        for (w, b) in self.row_mut(i).iter_mut().zip(bits) {
            *w |= *b;
        }
    }

    pub fn count(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|w| *w = 0);
    }

    /// All set positions in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| ones(self.row(i)).map(move |j| (i, j)))
    }

    pub fn union_with(&mut self, other: &BitMatrix) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a |= *b;
        }
    }
}

/// A single bit row, sized for a `BitMatrix` of the same dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitRow(Vec<u64>);

impl BitRow {
    pub fn new(n: usize) -> Self {
        BitRow(vec![0; n.div_ceil(WORD).max(1)])
    }

    pub fn from_slice(bits: &[u64]) -> Self {
        BitRow(bits.to_vec())
    }

    #[inline]
    pub fn contains(&self, j: usize) -> bool {
        self.0[j / WORD] >> (j % WORD) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, j: usize) {
        self.0[j / WORD] |= 1u64 << (j % WORD);
    }

    #[inline]
    pub fn or_with(&mut self, bits: &[u64]) {
        for (w, b) in self.0.iter_mut().zip(bits) {
            *w |= *b;
        }
    }

    pub fn count(&self) -> usize {
        count(&self.0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn words(&self) -> &[u64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        ones(&self.0)
    }
}

#[inline]
pub fn count(bits: &[u64]) -> usize {
    bits.iter().map(|w| w.count_ones() as usize).sum()
}

#[inline]
pub fn intersects(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

/// Indices of set bits, ascending.
pub fn ones(bits: &[u64]) -> impl Iterator<Item = usize> + '_ {
    bits.iter().enumerate().flat_map(|(wi, &w)| {
        let mut rest = w;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + tz)
            }
        })
    })
}
