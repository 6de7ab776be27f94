//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's numerical routines.
#![allow(dead_code)]

use nalgebra::DMatrix;

/// Dense `e^{tQ}` by scaling and squaring with a degree-24 Taylor polynomial.
pub fn expm(q: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let a = q * t;
    let norm = a.iter().fold(0.0f64, |m, v| m.max(v.abs())) * a.nrows() as f64;
    let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as u32 } else { 0 };
    let scaled = &a / 2f64.powi(squarings as i32);
    let n = a.nrows();
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=24 {
        term = &term * &scaled / k as f64;
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Coordinates of vertex `v` on the `d`-torus of side `n`, last axis fastest.
pub fn coords(v: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; d];
    let mut rest = v;
    for slot in out.iter_mut().rev() {
        *slot = rest % n;
        rest /= n;
    }
    out
}

pub fn index(c: &[usize], n: usize) -> usize {
    c.iter().fold(0, |acc, x| acc * n + x)
}

pub fn neighbours(v: usize, d: usize, n: usize) -> Vec<usize> {
    let c = coords(v, d, n);
    let mut out = Vec::new();
    for a in 0..d {
        for delta in [1, n - 1] {
            let mut w = c.clone();
            w[a] = (w[a] + delta) % n;
            out.push(index(&w, n));
        }
    }
    out
}

/// Generator of the walk jumping to each neighbour at `rate`.
pub fn walk_generator(d: usize, n: usize, rate: f64) -> DMatrix<f64> {
    let v = n.pow(d as u32);
    let mut q = DMatrix::zeros(v, v);
    for x in 0..v {
        for y in neighbours(x, d, n) {
            q[(x, y)] += rate;
            q[(x, x)] -= rate;
        }
    }
    q
}

/// `A = A₀ + R` assembled from its action on test functions:
/// `(Aψ)(0) = ½ A₀ψ(0)`; for `|z| = 1`,
/// `(Aψ)(z) = A₀ψ(z) − ½(ψ(0) − ψ(z)) + ¼(ψ(−z) − ψ(z))`; otherwise `A₀ψ`.
pub fn defect_generator(d: usize, n: usize) -> DMatrix<f64> {
    let v = n.pow(d as u32);
    let a0 = walk_generator(d, n, 1.0);
    let mut a = DMatrix::zeros(v, v);
    for j in 0..v {
        // column j is A applied to the indicator of j
        let psi: Vec<f64> = (0..v).map(|x| if x == j { 1.0 } else { 0.0 }).collect();
        let a0psi: Vec<f64> = (0..v).map(|x| (0..v).map(|y| a0[(x, y)] * psi[y]).sum()).collect();
        for z in 0..v {
            let c = coords(z, d, n);
            let norm1: usize = c.iter().map(|&x| x.min(n - x)).sum();
            a[(z, j)] = if z == 0 {
                0.5 * a0psi[0]
            } else if norm1 == 1 {
                let minus: Vec<usize> = c.iter().map(|&x| (n - x) % n).collect();
                let mz = index(&minus, n);
                a0psi[z] - 0.5 * (psi[0] - psi[z]) + 0.25 * (psi[mz] - psi[z])
            } else {
                a0psi[z]
            };
        }
    }
    a
}

/// `p_t(i)` for the rate-1 walk on the cycle, from the dense exponential.
pub fn cycle_kernel(n: usize, t: f64) -> Vec<f64> {
    let p = expm(&walk_generator(1, n, 1.0), t);
    (0..n).map(|i| p[(0, i)]).collect()
}

/// Sup-norm distance.
pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Generator of `k` labelled particles: every edge rings at rate 1 and each
/// particle on one of its endpoints is then placed on a uniform endpoint,
/// independently. States are base-`V` words, first particle most significant.
pub fn labelled_generator(d: usize, n: usize, k: usize) -> DMatrix<f64> {
    let v = n.pow(d as u32);
    let size = v.pow(k as u32);
    let mut edges = Vec::new();
    for x in 0..v {
        for y in neighbours(x, d, n) {
            if x < y {
                edges.push((x, y));
            }
        }
    }
    let mut q = DMatrix::zeros(size, size);
    for s in 0..size {
        let pos = word(s, v, k);
        for &(a, b) in &edges {
            let on: Vec<usize> = (0..k).filter(|&i| pos[i] == a || pos[i] == b).collect();
            if on.is_empty() {
                continue;
            }
            let weight = 0.5f64.powi(on.len() as i32);
            for mask in 0..(1usize << on.len()) {
                let mut next = pos.clone();
                for (bit, &i) in on.iter().enumerate() {
                    next[i] = if mask >> bit & 1 == 1 { b } else { a };
                }
                let target = next.iter().fold(0, |acc, x| acc * v + x);
                if target != s {
                    q[(s, target)] += weight;
                    q[(s, s)] -= weight;
                }
            }
        }
    }
    q
}

pub fn word(s: usize, v: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    let mut rest = s;
    for slot in out.iter_mut().rev() {
        *slot = rest % v;
        rest /= v;
    }
    out
}

/// Occupation counts of a labelled word.
pub fn occupation(s: usize, v: usize, k: usize) -> Vec<u32> {
    let mut counts = vec![0u32; v];
    for x in word(s, v, k) {
        counts[x] += 1;
    }
    counts
}

pub fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
