//! Banded LU factorization with partial pivoting (LAPACK `gbtrf` layout in spirit).

use crate::error::{Error, Result};

/// Square banded matrix with `kl` sub- and `ku` super-diagonals. Storage reserves `kl`
/// extra super-diagonals for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.kl < i || j > i + self.ku + self.kl || j >= self.n {
            return None;
        }
        Some(i * self.width + (j + self.kl - i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Sets an entry inside the declared band; panics outside it.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i},{j}) outside band");
        let s = self.slot(i, j).unwrap();
        self.data[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular(k));
            }
            piv[k] = p;
            let jmax = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.get(k, j);
                    let b = self.get(p, j);
                    let (sa, sb) = (self.slot(k, j), self.slot(p, j));
                    if let Some(s) = sa {
                        self.data[s] = b;
                    }
                    if let Some(s) = sb {
                        self.data[s] = a;
                    }
                }
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last {
                let si = self.slot(i, k).unwrap();
                let l = self.data[si] / pivot;
                self.data[si] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        let u = self.get(k, j);
                        if u != 0.0 {
                            let s = self.slot(i, j).unwrap();
                            self.data[s] -= l * u;
                        }
                    }
                }
            }
        }
        Ok(BandedLu { m: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    m: Banded,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.m.n;
        let (kl, ku) = (self.m.kl, self.m.ku);
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    b[i] -= self.m.get(i, k) * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + ku + kl).min(n - 1) {
                s -= self.m.get(k, j) * b[j];
            }
            b[k] = s / self.m.get(k, k);
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_residual(a: &Banded, x: &[f64], b: &[f64]) -> f64 {
        a.matvec(x).iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn needs_pivoting() {
        // Zero diagonal forces a row swap.
        let mut a = Banded::zeros(4, 1, 1);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        a.set(1, 2, 2.0);
        a.set(2, 1, 3.0);
        a.set(2, 3, 1.0);
        a.set(3, 2, 1.0);
        a.set(3, 3, 5.0);
        let b = vec![1.0, 2.0, 3.0, 4.0];
        let lu = a.clone().factor().unwrap();
        let x = lu.solve(&b);
        assert!(dense_residual(&a, &x, &b) < 1e-12);
    }

    #[test]
    fn singular_detected() {
        let a = Banded::zeros(3, 2, 2);
        assert!(matches!(a.factor(), Err(Error::Singular(0))));
    }

    proptest! {
        #[test]
        fn pentadiagonal_solves(vals in proptest::collection::vec(-1.0f64..1.0, 5 * 40), rhs in proptest::collection::vec(-1.0f64..1.0, 40)) {
            let n = 40;
            let mut a = Banded::zeros(n, 2, 2);
            for i in 0..n {
                for (k, off) in (-2i64..=2).enumerate() {
                    let j = i as i64 + off;
                    if j >= 0 && (j as usize) < n {
                        let mut v = vals[5 * i + k];
                        if off == 0 { v += 6.0; }
                        a.set(i, j as usize, v);
                    }
                }
            }
            let x = a.clone().factor().unwrap().solve(&rhs);
            prop_assert!(dense_residual(&a, &x, &rhs) < 1e-11);
        }
    }
}
