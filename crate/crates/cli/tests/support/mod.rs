//! Brute-force reference for two free spins. Shares no code with the library:
//! complex Hermitian matrices are embedded as real symmetric ones of twice the
//! size and diagonalized by cyclic Jacobi rotations.

#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type M = Vec<Vec<C>>;

pub fn zeros(n: usize) -> M {
    vec![vec![C::new(0.0, 0.0); n]; n]
}

pub fn eye(n: usize) -> M {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C::new(1.0, 0.0);
    }
    m
}

pub fn mul(a: &M, b: &M) -> M {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn dagger(a: &M) -> M {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

pub fn add(a: &M, b: &M, s: f64) -> M {
    a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y * s).collect()).collect()
}

pub fn scale(a: &M, s: C) -> M {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

pub fn kron(a: &M, b: &M) -> M {
    let (na, nb) = (a.len(), b.len());
    let mut out = zeros(na * nb);
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for l in 0..nb {
                    out[i * nb + k][j * nb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn trace(a: &M) -> C {
    (0..a.len()).map(|i| a[i][i]).sum()
}

/// Eigenvalues and orthonormal eigenvectors (columns) of a real symmetric matrix.
#[allow(clippy::needless_range_loop)]
fn jacobi(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-300 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

fn embed(a: &M) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut r = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let h = 0.5 * (a[i][j] + a[j][i].conj());
            r[i][j] = h.re;
            r[i + n][j + n] = h.re;
            r[i][j + n] = -h.im;
            r[i + n][j] = h.im;
        }
    }
    r
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigvals(a: &M) -> Vec<f64> {
    let (mut e, _) = jacobi(embed(a));
    e.sort_by(f64::total_cmp);
    e.into_iter().step_by(2).collect()
}

/// `f(a)` for Hermitian `a`.
pub fn func(a: &M, f: impl Fn(f64) -> f64) -> M {
    let n = a.len();
    let (e, v) = jacobi(embed(a));
    let fe: Vec<f64> = e.iter().map(|&x| f(x)).collect();
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            let (mut re, mut im) = (0.0, 0.0);
            for k in 0..2 * n {
                re += v[i][k] * fe[k] * v[j][k];
                im += v[i + n][k] * fe[k] * v[j][k];
            }
            out[i][j] = C::new(re, im);
        }
    }
    out
}

pub fn entropy(rho: &M) -> f64 {
    eigvals(rho).iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
}

pub fn rel_entropy(sigma: &M, rho: &M) -> f64 {
    let d = add(&func(sigma, f64::ln), &func(rho, f64::ln), -1.0);
    trace(&mul(sigma, &d)).re
}

/// `tr sigma log(sigma^{1/2} rho^{-1} sigma^{1/2})`
pub fn bs_rel_entropy(sigma: &M, rho: &M) -> f64 {
    let s = func(sigma, f64::sqrt);
    let inner = mul(&s, &mul(&func(rho, |x| 1.0 / x), &s));
    trace(&mul(sigma, &func(&inner, f64::ln))).re
}

pub fn op_norm_hermitian(a: &M) -> f64 {
    eigvals(a).iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn pauli(label: char) -> M {
    let (o, z) = (C::new(1.0, 0.0), C::new(0.0, 0.0));
    let i = C::new(0.0, 1.0);
    match label {
        'X' => vec![vec![z, o], vec![o, z]],
        'Y' => vec![vec![z, -i], vec![i, z]],
        'Z' => vec![vec![o, z], vec![z, -o]],
        _ => eye(2),
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Avg {
    Uniform,
    Weighted(f64),
    Temporal(Option<f64>),
}

#[derive(Debug, Clone)]
pub struct OracleRow {
    pub s_rho: f64,
    pub s_rho_prime: f64,
    pub s_m_rho_prime: f64,
    pub rel_ent_prime: f64,
    pub rel_ent_avg: f64,
    pub bs_rel_ent_avg: f64,
    pub beta_w: f64,
    pub me_deviation: f64,
    pub entropy_density: f64,
}

/// Two periodic free spins `h (Z_0 + Z_1)`, kick `exp(-i lambda X_0)`.
pub fn two_free_spins(h: f64, beta: f64, lambda: f64, avg: Avg) -> OracleRow {
    let ham = scale(&add(&kron(&pauli('Z'), &eye(2)), &kron(&eye(2), &pauli('Z')), 1.0), C::new(h, 0.0));
    let boltz = func(&ham, |e| (-beta * e).exp());
    let z = trace(&boltz).re;
    let rho = scale(&boltz, C::new(1.0 / z, 0.0));
    let u1 = add(&scale(&eye(2), C::new(lambda.cos(), 0.0)), &scale(&pauli('X'), C::new(0.0, -lambda.sin())), 1.0);
    let u = kron(&u1, &eye(2));
    let rho_p = mul(&u, &mul(&rho, &dagger(&u)));

    let mut swap = zeros(4);
    for x in 0..4usize {
        swap[((x & 1) << 1) | (x >> 1)][x] = C::new(1.0, 0.0);
    }
    let energies: Vec<f64> = (0..4).map(|i| ham[i][i].re).collect();
    let average = |s: &M| -> M {
        match avg {
            Avg::Uniform | Avg::Weighted(_) => {
                let w1 = match avg {
                    Avg::Weighted(r) => (-1.0 / r).exp(),
                    _ => 1.0,
                };
                let shifted = mul(&swap, &mul(s, &dagger(&swap)));
                let total = 1.0 + w1;
                add(&scale(s, C::new(1.0 / total, 0.0)), &shifted, w1 / total)
            }
            Avg::Temporal(tau) => {
                let mut out = zeros(4);
                for a in 0..4 {
                    for b in 0..4 {
                        let gap = energies[a] - energies[b];
                        let w = match tau {
                            None if gap == 0.0 => C::new(1.0, 0.0),
                            None => C::new(0.0, 0.0),
                            Some(t) => C::new(1.0, 0.0) / C::new(1.0, gap * t),
                        };
                        out[a][b] = s[a][b] * w;
                    }
                }
                out
            }
        }
    };
    let m_rho_p = average(&rho_p);
    let half_up = func(&rho, |x| 1.0 / x.sqrt());
    let e = mul(&half_up, &mul(&rho_p, &half_up));
    let dev = add(&average(&e), &eye(4), -1.0);
    let s_rho = entropy(&rho);
    OracleRow {
        s_rho,
        s_rho_prime: entropy(&rho_p),
        s_m_rho_prime: entropy(&m_rho_p),
        rel_ent_prime: rel_entropy(&rho_p, &rho),
        rel_ent_avg: rel_entropy(&m_rho_p, &rho),
        bs_rel_ent_avg: bs_rel_entropy(&m_rho_p, &rho),
        beta_w: beta * trace(&mul(&ham, &add(&rho_p, &rho, -1.0))).re,
        me_deviation: op_norm_hermitian(&dev),
        entropy_density: s_rho / 2.0,
    }
}
