//! Small-integer linear algebra: primality, rank and column spaces over
//! GF(p), and exact determinants / inverses of integer matrices.
//!
//! Matrices are dense and row-major. Everything here is sized for desk-scale
//! lattices (n at most a dozen or so), so the algorithms are the plain
//! textbook ones.

use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;

/// Deterministic trial-division primality test.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn pow_mod(base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u128;
    let m = p as u128;
    let mut b = (base % p) as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Multiplicative inverse of a nonzero element of GF(p).
pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

/// Rank over GF(p) of a `rows x cols` row-major matrix with entries in [0, p).
pub fn rank_mod_p(entries: &[u64], rows: usize, cols: usize, p: u64) -> usize {
    let mut m: Vec<u64> = entries.iter().map(|&e| e % p).collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| m[r * cols + col] != 0) else {
            continue;
        };
        if pivot != rank {
            for c in 0..cols {
                m.swap(pivot * cols + c, rank * cols + c);
            }
        }
        let inv = inv_mod(m[rank * cols + col], p);
        for c in 0..cols {
            m[rank * cols + c] = mulmod(m[rank * cols + c], inv, p);
        }
        for r in 0..rows {
            if r == rank {
                continue;
            }
            let f = m[r * cols + col];
            if f == 0 {
                continue;
            }
            for c in 0..cols {
                let sub = mulmod(f, m[rank * cols + c], p);
                m[r * cols + c] = (m[r * cols + c] + p - sub) % p;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// Whether `v` (length `rows`, entries reduced mod p) lies in the GF(p)
/// column space of the `rows x cols` matrix `g`.
pub fn in_column_space(g: &[u64], rows: usize, cols: usize, v: &[u64], p: u64) -> bool {
    let base = rank_mod_p(g, rows, cols, p);
    let mut aug = Vec::with_capacity(rows * (cols + 1));
    for r in 0..rows {
        aug.extend_from_slice(&g[r * cols..(r + 1) * cols]);
        aug.push(v[r] % p);
    }
    rank_mod_p(&aug, rows, cols + 1, p) == base
}

/// `g * z mod p` for an `rows x cols` matrix and a length-`cols` vector.
pub fn mat_vec_mod(g: &[u64], rows: usize, cols: usize, z: &[u64], p: u64) -> Vec<u64> {
    (0..rows)
        .map(|r| {
            let mut acc = 0u128;
            for c in 0..cols {
                acc += g[r * cols + c] as u128 * z[c] as u128;
            }
            (acc % p as u128) as u64
        })
        .collect()
}

/// Exact determinant of a square integer matrix (Bareiss elimination).
pub fn det_i128(entries: &[i64], n: usize) -> i128 {
    if n == 0 {
        return 1;
    }
    let mut m: Vec<i128> = entries.iter().map(|&e| e as i128).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k * n + k] == 0 {
            let Some(swap) = (k + 1..n).find(|&r| m[r * n + k] != 0) else {
                return 0;
            };
            for c in 0..n {
                m.swap(k * n + c, swap * n + c);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i * n + j] = (m[i * n + j] * m[k * n + k] - m[i * n + k] * m[k * n + j]) / prev;
            }
        }
        prev = m[k * n + k];
    }
    sign * m[(n - 1) * n + (n - 1)]
}

/// Inverse of a unimodular integer matrix, which is again an integer matrix.
///
/// Returns `None` when the matrix is singular or its inverse is not integral.
pub fn inverse_unimodular(entries: &[i64], n: usize) -> Option<Vec<i64>> {
    // Gauss-Jordan over the rationals with a common-denominator trick: keep
    // each row as integers and track the pivot scaling exactly.
    let mut a: Vec<i128> = entries.iter().map(|&e| e as i128).collect();
    let mut inv: Vec<i128> = vec![0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1;
    }
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| a[r * n + col] != 0)
            .min_by_key(|&r| a[r * n + col].abs())?;
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
                inv.swap(pivot * n + c, col * n + c);
            }
        }
        // Euclid-style row reduction keeps everything integral.
        loop {
            let mut done = true;
            for r in col + 1..n {
                let f = a[r * n + col];
                if f == 0 {
                    continue;
                }
                let q = Integer::div_floor(&f, &a[col * n + col]);
                for c in 0..n {
                    a[r * n + c] -= q * a[col * n + c];
                    inv[r * n + c] -= q * inv[col * n + c];
                }
                if a[r * n + col] != 0 {
                    done = false;
                    if a[r * n + col].abs() < a[col * n + col].abs() {
                        for c in 0..n {
                            a.swap(r * n + c, col * n + c);
                            inv.swap(r * n + c, col * n + c);
                        }
                    }
                }
            }
            if done {
                break;
            }
        }
        if a[col * n + col] == 0 {
            return None;
        }
    }
    // Upper triangular with integer entries; unimodular means diagonal is ±1.
    for d in 0..n {
        let piv = a[d * n + d];
        if piv.abs() != 1 {
            return None;
        }
        if piv == -1 {
            for c in 0..n {
                a[d * n + c] = -a[d * n + c];
                inv[d * n + c] = -inv[d * n + c];
            }
        }
    }
    for col in (0..n).rev() {
        for r in 0..col {
            let f = a[r * n + col];
            if f == 0 {
                continue;
            }
            for c in 0..n {
                a[r * n + c] -= f * a[col * n + c];
                inv[r * n + c] -= f * inv[col * n + c];
            }
        }
    }
    inv.into_iter().map(|v| i64::try_from(v).ok()).collect()
}

/// Integer matrix-vector product for an `rows x cols` row-major matrix.
pub fn mat_vec_i128(m: &[i64], rows: usize, cols: usize, v: &[i128]) -> Vec<i128> {
    (0..rows)
        .map(|r| (0..cols).map(|c| m[r * cols + c] as i128 * v[c]).sum())
        .collect()
}
