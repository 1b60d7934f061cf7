#![allow(dead_code)]

use foliant::linalg::{Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let g = gaussian(rng, n);
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return g.iter().map(|x| x / norm).collect();
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn vector(v: &[f64]) -> Vector {
    Vector::new(v.to_vec()).unwrap()
}

/// Row-major copy of a matrix.
pub fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum())
                .collect()
        })
        .collect()
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len())
        .map(|j| a.iter().map(|r| r[j]).collect())
        .collect()
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

pub fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(a: &[Vec<f64>]) -> f64 {
    let mut m = a.to_vec();
    let n = m.len();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= m[c][c];
        let pivot = m[c].clone();
        for row in m.iter_mut().skip(c + 1) {
            let f = row[c] / pivot[c];
            row.iter_mut()
                .zip(&pivot)
                .skip(c)
                .for_each(|(x, p)| *x -= f * p);
        }
    }
    d
}

/// Orthonormal basis of `v⊥` by Gram–Schmidt on the standard basis.
pub fn complement(v: &[f64]) -> Vec<Vec<f64>> {
    let n = v.len();
    let nv = dot(v, v).sqrt();
    let mut basis: Vec<Vec<f64>> = vec![v.iter().map(|x| x / nv).collect()];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        for b in &basis {
            let k = dot(&e, b);
            e.iter_mut().zip(b).for_each(|(x, y)| *x -= k * y);
        }
        let ne = dot(&e, &e).sqrt();
        if ne > 1e-8 && basis.len() < n {
            basis.push(e.iter().map(|x| x / ne).collect());
        }
    }
    basis.remove(0);
    basis
}

/// Largest singular value of a tall matrix with at most two columns.
pub fn norm_two_columns(m: &[Vec<f64>]) -> f64 {
    let g = matmul(&transpose(m), m);
    if g.len() == 1 {
        return g[0][0].sqrt();
    }
    let (a, b, d) = (g[0][0], g[0][1], g[1][1]);
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d).powi(2) + b * b).sqrt();
    (mean + rad).sqrt()
}

/// `sup ‖J w‖` over unit `w ⊥ v`, for `dim ≤ 3`.
pub fn restricted_norm(j: &[Vec<f64>], v: &[f64]) -> f64 {
    let b = transpose(&complement(v));
    norm_two_columns(&matmul(j, &b))
}

/// Hand-written Jacobians of the smooth registry fields.
pub fn smooth_jacobian(name: &str, z: &[f64]) -> Vec<Vec<f64>> {
    match name {
        "linear-field" => vec![vec![0.0, 0.0], vec![0.0, 1.0]],
        "pendulum-field" => vec![vec![0.0, 1.0], vec![-z[0].cos(), 0.0]],
        "lorenz-field" => vec![
            vec![-10.0, 10.0, 0.0],
            vec![28.0 - z[2], -1.0, -z[0]],
            vec![z[1], z[0], -8.0 / 3.0],
        ],
        other => panic!("no oracle for {other}"),
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| gaussian(rng, n)).collect()
}

fn to_matrix(a: &[Vec<f64>]) -> Matrix {
    Matrix::from_rows(a).unwrap()
}

fn condition(m: &Matrix) -> Option<f64> {
    let inv = m.inverse().ok()?;
    Some(m.op_norm() * inv.op_norm())
}

/// `‖ABC‖ ≥ ‖B‖ / (‖A⁻¹‖ ‖C⁻¹‖)` over random triples with well-conditioned `A, C`.
pub fn norm_inequality_suite(instances: usize, seed: u64) -> Result<f64, String> {
    let mut rng = rng(seed);
    let mut done = 0;
    let mut slack = f64::INFINITY;
    while done < instances {
        let n = rng.random_range(1..=5);
        let a = to_matrix(&random_matrix(&mut rng, n));
        let b = to_matrix(&random_matrix(&mut rng, n));
        let c = to_matrix(&random_matrix(&mut rng, n));
        let ok = |m: &Matrix| condition(m).is_some_and(|k| k <= 1e3);
        if !(ok(&a) && ok(&c)) {
            continue;
        }
        let abc = &(&a * &b) * &c;
        let lhs = abc.op_norm();
        let rhs = b.op_norm() / (a.inverse().unwrap().op_norm() * c.inverse().unwrap().op_norm());
        if lhs < rhs - 1e-9 {
            return Err(format!("instance {done}: {lhs} < {rhs}"));
        }
        slack = slack.min(lhs - rhs);
        done += 1;
    }
    Ok(slack)
}

/// `‖g(x)⁻¹ − g(y)⁻¹‖ ≤ k₁ k₂² ‖x − y‖` for `g(x) = Id + x₁ E`, with `k₁`
/// and `k₂` sampled over the same points.
pub fn inverse_lipschitz_suite(instances: usize, seed: u64) -> Result<f64, String> {
    let mut rng = rng(seed);
    let n = 3;
    let e = to_matrix(&random_matrix(&mut rng, n));
    let reach = 0.5 / e.op_norm();
    let g = |x: &[f64]| &Matrix::identity(n) + &e.scale(x[0]);
    let points: Vec<Vec<f64>> = (0..2 * instances)
        .map(|_| {
            let mut x = gaussian(&mut rng, 2);
            x[0] = rng.random_range(-reach..=reach);
            x
        })
        .collect();
    let inverses: Vec<Matrix> = points.iter().map(|x| g(x).inverse().unwrap()).collect();
    let k2 = inverses.iter().map(|m| m.op_norm()).fold(0.0, f64::max);
    let mut k1: f64 = 0.0;
    for i in 0..instances {
        let (x, y) = (&points[2 * i], &points[2 * i + 1]);
        k1 = k1.max((&g(x) - &g(y)).op_norm() / dist(x, y));
    }
    let mut worst = f64::INFINITY;
    for i in 0..instances {
        let (x, y) = (&points[2 * i], &points[2 * i + 1]);
        let lhs = (&inverses[2 * i] - &inverses[2 * i + 1]).op_norm();
        let rhs = k1 * k2 * k2 * dist(x, y);
        if lhs > rhs + 1e-9 {
            return Err(format!("instance {i}: {lhs} > {rhs}"));
        }
        worst = worst.min(rhs - lhs);
    }
    Ok(worst)
}
