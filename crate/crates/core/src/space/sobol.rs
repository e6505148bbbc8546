//! Standard Sobol low-discrepancy sequence.
//!
//! Gray-code construction with direction numbers from the Joe-Kuo table
//! (`new-joe-kuo-6.21201`). Indexing starts at 1, so the first emitted
//! point is `(0.5, ..., 0.5)`; the origin at index 0 is skipped.

/// Highest supported dimensionality.
pub const MAX_DIMENSION: usize = 32;

const INDEX_BITS: usize = 32;

/// Joe-Kuo `(a, m)` rows for dimensions 2..=32. `a` encodes the interior
/// coefficients of the degree-`m.len()` primitive polynomial.
const JOE_KUO: &[(u32, &[u32])] = &[
    (0, &[1]),
    (1, &[1, 3]),
    (1, &[1, 3, 1]),
    (2, &[1, 1, 1]),
    (1, &[1, 1, 3, 3]),
    (4, &[1, 3, 5, 13]),
    (2, &[1, 1, 5, 5, 17]),
    (4, &[1, 1, 5, 5, 5]),
    (7, &[1, 1, 7, 11, 19]),
    (11, &[1, 1, 5, 1, 1]),
    (13, &[1, 1, 1, 3, 11]),
    (14, &[1, 3, 5, 5, 31]),
    (1, &[1, 3, 3, 9, 7, 49]),
    (13, &[1, 1, 1, 15, 21, 21]),
    (16, &[1, 3, 1, 13, 27, 49]),
    (19, &[1, 1, 1, 15, 7, 5]),
    (22, &[1, 3, 1, 15, 13, 25]),
    (25, &[1, 1, 5, 5, 19, 61]),
    (1, &[1, 3, 7, 11, 23, 15, 103]),
    (4, &[1, 3, 7, 13, 13, 15, 69]),
    (7, &[1, 1, 3, 13, 7, 35, 63]),
    (8, &[1, 3, 5, 9, 1, 25, 53]),
    (14, &[1, 3, 1, 13, 9, 35, 107]),
    (19, &[1, 3, 1, 5, 27, 61, 31]),
    (21, &[1, 1, 5, 11, 19, 41, 61]),
    (28, &[1, 3, 5, 3, 3, 13, 69]),
    (31, &[1, 1, 7, 13, 1, 19, 1]),
    (32, &[1, 3, 7, 5, 13, 19, 59]),
    (37, &[1, 1, 3, 9, 25, 29, 41]),
    (41, &[1, 3, 5, 13, 23, 1, 55]),
    (42, &[1, 3, 7, 3, 13, 59, 17]),
];

fn direction_vectors(dim: usize) -> Vec<u32> {
    let mut m = vec![0u32; INDEX_BITS];
    if dim == 0 {
        // First dimension: van der Corput in base 2, m_k = 1.
        m.fill(1);
    } else {
        let (a, init) = JOE_KUO[dim - 1];
        let s = init.len();
        m[..s].copy_from_slice(init);
        for k in s..INDEX_BITS {
            let mut value = m[k - s] ^ (m[k - s] << s);
            for j in 1..s {
                if (a >> (s - 1 - j)) & 1 == 1 {
                    value ^= m[k - j] << j;
                }
            }
            m[k] = value;
        }
    }
    (0..INDEX_BITS).map(|k| m[k] << (INDEX_BITS - 1 - k)).collect()
}

/// Iterator over Sobol points in `[0,1]^dim`, starting at sequence index 1.
pub struct SobolSequence {
    v: Vec<Vec<u32>>,
    x: Vec<u32>,
    index: u64,
}

impl SobolSequence {
    /// `None` if `dim` is zero or exceeds [`MAX_DIMENSION`].
    pub fn new(dim: usize) -> Option<Self> {
        if dim == 0 || dim > MAX_DIMENSION {
            return None;
        }
        Some(Self {
            v: (0..dim).map(direction_vectors).collect(),
            x: vec![0; dim],
            index: 0,
        })
    }

    /// Next point of the sequence; the first call yields the all-0.5 point.
    pub fn next_point(&mut self) -> Vec<f64> {
        self.index += 1;
        let bit = self.index.trailing_zeros() as usize;
        debug_assert!(bit < INDEX_BITS, "sequence exhausted");
        self.x
            .iter_mut()
            .zip(&self.v)
            .map(|(x, v)| {
                *x ^= v[bit];
                *x as f64 / (1u64 << INDEX_BITS) as f64
            })
            .collect()
    }
}
