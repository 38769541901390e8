//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use num_complex::Complex64;
use qwalk_transport::circuit::Circuit;
use qwalk_transport::geometry::GridGeometry;
use qwalk_transport::statevector::StateVector;

/// Columns of the matrix a unitary circuit induces, one basis state at a time.
pub fn unitary_columns(circuit: &Circuit) -> Vec<Vec<Complex64>> {
    (0..1usize << circuit.n_qubits)
        .map(|j| {
            let mut s = StateVector::basis(circuit.n_qubits, j).unwrap();
            s.apply_circuit(circuit).unwrap();
            s.amplitudes().to_vec()
        })
        .collect()
}

/// `max |(U^dagger U - I)_{ij}|`.
pub fn unitarity_error(cols: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in cols.iter().enumerate() {
        for (j, b) in cols.iter().enumerate().skip(i) {
            let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - want).norm());
        }
    }
    worst
}

/// Dense row-stochastic lattice kernel written out from the cross sections:
/// stay with `sigma_a / (sigma_a + sigma_s)`, otherwise a quarter of the
/// scattering mass to each neighbour, a move off the grid bouncing back.
pub fn dense_kernel(g: &GridGeometry, with_stay: bool) -> Vec<Vec<f64>> {
    let (w, h) = (g.width() as i64, g.height() as i64);
    let n = g.n_cells();
    let mut k = vec![vec![0.0; n]; n];
    for y in 0..h {
        for x in 0..w {
            let m = g.material_at(x as usize, y as usize).unwrap();
            let total = m.sigma_a + m.sigma_s;
            let i = (y * w + x) as usize;
            if with_stay {
                k[i][i] += m.sigma_a / total;
            }
            for (dx, dy) in [(1, 0), (0, 1), (-1, 0), (0, -1)] {
                let (mut nx, mut ny) = (x + dx, y + dy);
                if nx < 0 || nx >= w || ny < 0 || ny >= h {
                    nx = x - dx;
                    ny = y - dy;
                }
                k[i][(ny * w + nx) as usize] += m.sigma_s / total / 4.0;
            }
        }
    }
    k
}

/// `p K` for a row vector `p`.
pub fn push(p: &[f64], k: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    for (i, row) in k.iter().enumerate() {
        if p[i] == 0.0 {
            continue;
        }
        for (j, v) in row.iter().enumerate() {
            out[j] += p[i] * v;
        }
    }
    out
}

pub fn point_distribution(g: &GridGeometry, x: usize, y: usize) -> Vec<f64> {
    let mut p = vec![0.0; g.n_cells()];
    p[y * g.width() + x] = 1.0;
    p
}

/// `sum_{t=0}^{n} s K^t` over the scatter-only kernel.
pub fn neumann_sum(g: &GridGeometry, s: &[f64], n: usize) -> Vec<f64> {
    let k = dense_kernel(g, false);
    let mut term = s.to_vec();
    let mut acc = s.to_vec();
    for _ in 0..n {
        term = push(&term, &k);
        acc.iter_mut().zip(&term).for_each(|(a, t)| *a += t);
    }
    acc
}

pub fn unit(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (unit(a), unit(b));
    0.5 * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Column `col` of a row-major `width`-wide map, bottom to top.
pub fn column(map: &[f64], width: usize, col: usize) -> Vec<f64> {
    map.chunks(width).map(|row| row[col]).collect()
}
