//! Sobol' low-discrepancy points in Gray-code order, with optional
//! linear-matrix scrambling plus a random digital shift.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::directions::JOE_KUO;
use crate::error::{Error, Result};
use crate::types::Matrix;

pub const MAX_SOBOL_DIM: usize = JOE_KUO.len() + 1;
const BITS: usize = 32;
const SCALE: f64 = 1.0 / 4_294_967_296.0; // 2^-32

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1u32 << (31 - k);
        }
        return v;
    }
    let (s, a, m) = JOE_KUO[dim - 1];
    let s = s as usize;
    for k in 0..s {
        v[k] = m[k] << (31 - k);
    }
    for k in s..BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for j in 1..s {
            if (a >> (s - 1 - j)) & 1 == 1 {
                x ^= v[k - j];
            }
        }
        v[k] = x;
    }
    v
}

/// Random lower-triangular (in digit order) GF(2) matrix with unit
/// diagonal, stored as one row mask per output digit.
fn random_lower_triangular(rng: &mut ChaCha8Rng) -> [u32; BITS] {
    let mut rows = [0u32; BITS];
    for (k, row) in rows.iter_mut().enumerate() {
        // digit k (0 = most significant) lives at bit 31 - k; it may depend
        // on digits 0..k, i.e. bits 31-k ..= 31.
        let diag = 1u32 << (31 - k);
        let above = if k == 0 { 0 } else { !((1u32 << (32 - k)) - 1) };
        *row = diag | (rng.random::<u32>() & above);
    }
    rows
}

fn apply_matrix(rows: &[u32; BITS], x: u32) -> u32 {
    let mut out = 0u32;
    for (k, row) in rows.iter().enumerate() {
        if (row & x).count_ones() & 1 == 1 {
            out |= 1u32 << (31 - k);
        }
    }
    out
}

/// Streams Sobol' points one at a time.
#[derive(Debug, Clone)]
pub struct SobolSequence {
    directions: Vec<[u32; BITS]>,
    shift: Vec<u32>,
    state: Vec<u32>,
    index: u64,
}

impl SobolSequence {
    pub fn new(dim: usize, scramble: bool, seed: u64) -> Result<Self> {
        if dim == 0 || dim > MAX_SOBOL_DIM {
            return Err(Error::DimensionOutOfRange {
                dim,
                max: MAX_SOBOL_DIM,
            });
        }
        let mut directions: Vec<[u32; BITS]> = (0..dim).map(direction_numbers).collect();
        let mut shift = vec![0u32; dim];
        if scramble {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for d in 0..dim {
                let lms = random_lower_triangular(&mut rng);
                for v in directions[d].iter_mut() {
                    *v = apply_matrix(&lms, *v);
                }
                shift[d] = rng.random::<u32>();
            }
        }
        Ok(SobolSequence {
            directions,
            state: vec![0; dim],
            shift,
            index: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    /// Writes the next point into `out`. The first point is the origin
    /// (before scrambling).
    pub fn next_into(&mut self, out: &mut [f64]) {
        if self.index > 0 {
            let bit = (self.index.trailing_zeros()) as usize;
            assert!(bit < BITS, "Sobol' sequence exhausted after 2^32 points");
            for (d, x) in self.state.iter_mut().enumerate() {
                *x ^= self.directions[d][bit];
            }
        }
        for (d, o) in out.iter_mut().enumerate() {
            *o = (self.state[d] ^ self.shift[d]) as f64 * SCALE;
        }
        self.index += 1;
    }
}

/// First `n` points of the `dim`-dimensional sequence, index 0 included.
pub fn sobol_points(dim: usize, n: usize, scramble: bool, seed: u64) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sobol_points: n must be >= 1".into(),
        ));
    }
    if n as u64 > (1u64 << BITS) {
        return Err(Error::InvalidArgument(format!(
            "sobol_points: at most 2^32 points, requested {n}"
        )));
    }
    let mut seq = SobolSequence::new(dim, scramble, seed)?;
    let mut m = Matrix::zeros(n, dim);
    for r in 0..n {
        seq.next_into(m.row_mut(r));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Base-2 radical inverse of the Gray code of `i`.
    fn gray_radical_inverse(i: u32) -> f64 {
        let g = i ^ (i >> 1);
        g.reverse_bits() as f64 * SCALE
    }

    #[test]
    fn first_point_is_origin() {
        assert_eq!(sobol_points(1, 1, false, 0).unwrap().row(0), &[0.0]);
        let m = sobol_points(64, 1, false, 0).unwrap();
        assert!(m.row(0).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn first_dimension_matches_van_der_corput() {
        let m = sobol_points(1, 4, false, 0).unwrap();
        assert_eq!(m.column(0), vec![0.0, 0.5, 0.75, 0.25]);
        let m = sobol_points(1, 1024, false, 0).unwrap();
        for i in 0..1024u32 {
            assert_eq!(m.get(i as usize, 0), gray_radical_inverse(i));
        }
    }

    #[test]
    fn matches_reference_points() {
        // Reference rows 5, 11, 15 at dimensions 1, 2, 6, 21, 41, 64
        // (unscrambled, Gray-code order, standard Joe-Kuo numbers).
        let m = sobol_points(64, 16, false, 0).unwrap();
        let cols = [0, 1, 5, 20, 40, 63];
        let expected = [
            (5, [0.875, 0.875, 0.625, 0.625, 0.375, 0.625]),
            (11, [0.4375, 0.5625, 0.0625, 0.9375, 0.3125, 0.9375]),
            (15, [0.0625, 0.9375, 0.1875, 0.8125, 0.6875, 0.8125]),
        ];
        for (row, vals) in expected {
            for (c, v) in cols.iter().zip(vals) {
                assert_eq!(m.get(row, *c), v, "row {row} col {c}");
            }
        }
    }

    #[test]
    fn dimension_range_enforced() {
        assert!(sobol_points(0, 4, false, 0).is_err());
        assert!(sobol_points(65, 4, false, 0).is_err());
        assert!(sobol_points(64, 4, true, 3).is_ok());
    }

    #[test]
    fn unscrambled_ignores_seed_scrambled_depends_on_it() {
        assert_eq!(
            sobol_points(5, 100, false, 1).unwrap(),
            sobol_points(5, 100, false, 2).unwrap()
        );
        assert_eq!(
            sobol_points(5, 100, true, 9).unwrap(),
            sobol_points(5, 100, true, 9).unwrap()
        );
        assert_ne!(
            sobol_points(5, 100, true, 1).unwrap(),
            sobol_points(5, 100, true, 2).unwrap()
        );
    }

    #[test]
    fn scrambled_projections_stay_stratified() {
        for seed in 0..5 {
            let m = sobol_points(8, 256, true, seed).unwrap();
            for log2 in 1..=8u32 {
                let n = 1usize << log2;
                for d in 0..8 {
                    let mut seen = vec![false; n];
                    for r in 0..n {
                        let cell = (m.get(r, d) * n as f64) as usize;
                        assert!(!seen[cell], "seed {seed} dim {d} m {log2}");
                        seen[cell] = true;
                    }
                }
            }
        }
    }

    #[test]
    fn points_in_unit_interval() {
        let m = sobol_points(12, 5000, true, 77).unwrap();
        assert!(m.as_slice().iter().all(|&x| (0.0..1.0).contains(&x)));
    }
}
