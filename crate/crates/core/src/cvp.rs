//! Closest-vector search for the coarse lattice.
//!
//! The integer basis is LLL-reduced once, then every query runs a
//! nearest-plane (Babai) pass to get an upper bound on the distance and a
//! Fincke-Pohst enumeration that returns *every* lattice point within that
//! bound. Callers pick the winner themselves so that ties can be broken with
//! whatever arithmetic (float or exact) the caller needs.

use alloc::vec;
use alloc::vec::Vec;

/// Relative slack applied to the Babai radius so that float rounding never
/// drops a candidate that exact arithmetic would keep.
const RADIUS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub(crate) struct CoarseSearch {
    n: usize,
    /// Reduced integer basis, column `j` is basis vector `j`, row-major storage.
    reduced: Vec<i64>,
    /// `scale * reduced` as floats.
    basis: Vec<f64>,
    q: Vec<f64>,
    r: Vec<f64>,
}

impl CoarseSearch {
    /// `cols` holds the generator matrix row-major (columns are generators).
    pub(crate) fn new(cols: &[i64], n: usize, scale: f64) -> Self {
        let mut vecs: Vec<Vec<i64>> = (0..n)
            .map(|j| (0..n).map(|i| cols[i * n + j]).collect())
            .collect();
        lll_reduce(&mut vecs);
        let mut reduced = vec![0i64; n * n];
        for (j, v) in vecs.iter().enumerate() {
            for i in 0..n {
                reduced[i * n + j] = v[i];
            }
        }
        let basis: Vec<f64> = reduced.iter().map(|&x| x as f64 * scale).collect();
        let (q, r) = qr(&basis, n);
        CoarseSearch {
            n,
            reduced,
            basis,
            q,
            r,
        }
    }

    pub(crate) fn basis(&self) -> &[f64] {
        &self.basis
    }

    /// Integer point `reduced * z`.
    pub(crate) fn combine_int(&self, z: &[i64]) -> Vec<i128> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.reduced[i * n + j] as i128 * z[j] as i128).sum())
            .collect()
    }

    pub(crate) fn combine_f64(&self, z: &[i64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.basis[i * n + j] * z[j] as f64).sum())
            .collect()
    }

    /// All coefficient vectors whose lattice point is within the Babai
    /// distance of `x` (inflated by a tiny relative slack).
    pub(crate) fn candidates(&self, x: &[f64]) -> Vec<Vec<i64>> {
        let n = self.n;
        let y: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|k| self.q[k * n + i] * x[k]).sum())
            .collect();

        // Nearest plane.
        let mut z0 = vec![0i64; n];
        let mut r2 = 0.0;
        for level in (0..n).rev() {
            let mut c = y[level];
            for j in level + 1..n {
                c -= self.r[level * n + j] * z0[j] as f64;
            }
            let zi = libm::round(c / self.r[level * n + level]);
            z0[level] = zi as i64;
            let d = c - self.r[level * n + level] * zi;
            r2 += d * d;
        }
        let scale2 = self.r[0] * self.r[0];
        let bound = r2 * (1.0 + RADIUS_SLACK) + 1e-18 * scale2;

        let mut out = Vec::new();
        let mut z = vec![0i64; n];
        self.descend(&y, n - 1, 0.0, bound, &mut z, &mut out);
        debug_assert!(!out.is_empty());
        if out.is_empty() {
            out.push(z0);
        }
        out
    }

    fn descend(
        &self,
        y: &[f64],
        level: usize,
        partial: f64,
        bound: f64,
        z: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        let n = self.n;
        let mut c = y[level];
        for j in level + 1..n {
            c -= self.r[level * n + j] * z[j] as f64;
        }
        let rll = self.r[level * n + level];
        let rem = bound - partial;
        if rem < 0.0 {
            return;
        }
        let w = libm::sqrt(rem) / rll.abs();
        let centre = c / rll;
        let lo = libm::ceil(centre - w) as i64;
        let hi = libm::floor(centre + w) as i64;
        for zi in lo..=hi {
            let d = c - rll * zi as f64;
            let next = partial + d * d;
            if next > bound {
                continue;
            }
            z[level] = zi;
            if level == 0 {
                out.push(z.clone());
            } else {
                self.descend(y, level - 1, next, bound, z, out);
            }
        }
        z[level] = 0;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gram_schmidt(b: &[Vec<i64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
    let n = b.len();
    let mut bstar: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    let mut norms = vec![0.0; n];
    for i in 0..n {
        let mut v: Vec<f64> = b[i].iter().map(|&x| x as f64).collect();
        let bi: Vec<f64> = v.clone();
        for j in 0..i {
            mu[i][j] = dot(&bi, &bstar[j]) / norms[j];
            for (vk, bk) in v.iter_mut().zip(&bstar[j]) {
                *vk -= mu[i][j] * bk;
            }
        }
        norms[i] = dot(&v, &v);
        bstar.push(v);
    }
    (bstar, mu, norms)
}

/// In-place LLL reduction (delta = 3/4) of an integer basis. Size reduction
/// uses integer multiples only, so the lattice is preserved exactly even
/// though Gram-Schmidt data is held in floats.
pub(crate) fn lll_reduce(b: &mut [Vec<i64>]) {
    let n = b.len();
    if n < 2 {
        return;
    }
    let delta = 0.75;
    let mut k = 1;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        if guard > 100_000 {
            break;
        }
        for j in (0..k).rev() {
            let (_, mu, _) = gram_schmidt(b);
            let q = libm::round(mu[k][j]) as i64;
            if q != 0 {
                let bj = b[j].clone();
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= q * y;
                }
            }
        }
        let (_, mu, norms) = gram_schmidt(b);
        if norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            k = if k > 1 { k - 1 } else { 1 };
        }
    }
}

/// Thin QR of a square matrix whose columns are the basis vectors, via
/// modified Gram-Schmidt. Both outputs are row-major `n x n`.
fn qr(basis: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut q = vec![0.0; n * n];
    let mut r = vec![0.0; n * n];
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| basis[i * n + j]).collect())
        .collect();
    for j in 0..n {
        for i in 0..j {
            let qi: Vec<f64> = (0..n).map(|k| q[k * n + i]).collect();
            let rij = dot(&qi, &cols[j]);
            r[i * n + j] = rij;
            for (c, qk) in cols[j].iter_mut().zip(&qi) {
                *c -= rij * qk;
            }
        }
        let norm = libm::sqrt(dot(&cols[j], &cols[j]));
        r[j * n + j] = norm;
        for k in 0..n {
            q[k * n + j] = cols[j][k] / norm;
        }
    }
    (q, r)
}
