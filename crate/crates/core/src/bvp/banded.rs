// SPDX-License-Identifier: Apache-2.0
#![allow(clippy::needless_range_loop)]

//! Band LU factorization with partial pivoting.
//!
//! Column-major band storage in the layout of LAPACK `gbtrf`: entry
//! `(i, j)` lives at `data[j * ldab + kl + ku + i - j]`, with `kl` extra
//! rows on top for the fill-in produced by row interchanges.

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    data: Vec<f64>,
}

/// Factorization failed at a zero pivot in this column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroPivot(pub usize);

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self { n, kl, ku, ldab, data: vec![0.0; ldab * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        j * self.ldab + self.kl + self.ku + i - j
    }

    /// Whether `(i, j)` lies inside the declared band.
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j <= i + self.ku && i <= j + self.kl
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.index(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` to entry `(i, j)`, which must be inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band kl = {}, ku = {}", self.kl, self.ku);
        let k = self.index(i, j);
        self.data[k] += v;
    }

    /// `y = A x` for the unfactored matrix.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for (i, yi) in y.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *yi += self.data[self.index(i, j)] * x[j];
            }
        }
        y
    }

    /// Factors in place. The result solves systems through [`BandLu::solve`].
    pub fn factor(mut self) -> Result<BandLu, ZeroPivot> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = kl + ku;
        let mut pivots = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = self.data[self.index(j, j)].abs();
            for p in 1..=km {
                let v = self.data[self.index(j + p, j)].abs();
                if v > best {
                    best = v;
                    jp = p;
                }
            }
            pivots[j] = j + jp;
            if best == 0.0 {
                return Err(ZeroPivot(j));
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let (a, b) = (self.index(j, c), self.index(j + jp, c));
                    self.data.swap(a, b);
                }
            }
            if km > 0 {
                let inv = 1.0 / self.data[self.index(j, j)];
                for r in 1..=km {
                    let k = self.index(j + r, j);
                    self.data[k] *= inv;
                }
                for c in (j + 1)..=ju {
                    let t = self.data[self.index(j, c)];
                    if t != 0.0 {
                        for r in 1..=km {
                            let l = self.data[self.index(j + r, j)];
                            let k = self.index(j + r, c);
                            self.data[k] -= l * t;
                        }
                    }
                }
            }
        }
        debug_assert!(kv < self.ldab);
        Ok(BandLu { m: self, pivots })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    pivots: Vec<usize>,
}

impl BandLu {
    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let m = &self.m;
        let n = m.n;
        let kv = m.kl + m.ku;
        for j in 0..n {
            let l = self.pivots[j];
            if l != j {
                b.swap(l, j);
            }
            let km = m.kl.min(n - 1 - j);
            let bj = b[j];
            if bj != 0.0 {
                for r in 1..=km {
                    b[j + r] -= m.data[m.index(j + r, j)] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= m.data[m.index(j, j)];
            let bj = b[j];
            for i in j.saturating_sub(kv)..j {
                b[i] -= m.data[m.index(i, j)] * bj;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band(n: usize, kl: usize, ku: usize, rng: &mut ChaCha8Rng) -> BandMatrix {
        let mut m = BandMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                m.add(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        m
    }

    #[test]
    fn solves_random_banded_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(n, kl, ku) in &[(1, 0, 0), (5, 1, 1), (40, 7, 6), (200, 3, 9), (64, 0, 4)] {
            let m = random_band(n, kl, ku, &mut rng);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let b = m.mul_vec(&x);
            let mut sol = b.clone();
            m.clone().factor().unwrap().solve(&mut sol);
            // Backward error: random band matrices can be poorly conditioned.
            let back = m.mul_vec(&sol);
            for (bi, ri) in b.iter().zip(&back) {
                assert!((bi - ri).abs() < 1e-11, "n = {n}: {bi} vs {ri}");
            }
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let mut m = BandMatrix::zeros(3, 1, 1);
        m.add(0, 1, 1.0);
        m.add(1, 0, 1.0);
        m.add(1, 2, 2.0);
        m.add(2, 1, 3.0);
        m.add(2, 2, 1.0);
        let x = [1.0, -2.0, 0.5];
        let mut b = m.mul_vec(&x);
        m.factor().unwrap().solve(&mut b);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut m = BandMatrix::zeros(3, 1, 1);
        m.add(0, 0, 1.0);
        m.add(1, 0, 1.0);
        assert_eq!(m.factor().unwrap_err(), ZeroPivot(1));
    }
}
