//! Test-side oracles built without touching the library's matrix code.
#![allow(dead_code)]

use num_complex::Complex64 as C64;

pub type Mat = Vec<Vec<C64>>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(n: usize) -> Mat {
    vec![vec![c(0.0, 0.0); n]; n]
}

pub fn sx() -> Mat {
    vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]
}

pub fn sy() -> Mat {
    vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]
}

pub fn sz() -> Mat {
    vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]]
}

pub fn eye(n: usize) -> Mat {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    m
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (n, m) = (a.len(), b.len());
    let mut out = zeros(n * m);
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect()).collect()
}

pub fn scale(a: &Mat, s: f64) -> Mat {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

pub fn matvec(a: &Mat, v: &[C64]) -> Vec<C64> {
    a.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[i][j] = (0..n).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn dagger(a: &Mat) -> Mat {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i].conj()).collect()).collect()
}

pub fn max_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Transverse field `cos φ σx + s sin φ σy`.
fn transverse(phi: f64, s: f64) -> Mat {
    add(&scale(&sx(), phi.cos()), &scale(&sy(), s * phi.sin()))
}

/// One-qubit sweep Hamiltonian with the field twisting so that detuning and
/// twist rate cancel at `τ = η₄τ³` (σy sign −1).
pub fn h_one(tau: f64, lambda: f64, eta4: f64) -> Mat {
    let phi = eta4 / (2.0 * lambda) * tau.powi(4);
    add(&scale(&sz(), -tau / lambda), &scale(&transverse(phi, -1.0), -1.0 / lambda))
}

pub struct TwoQ {
    pub lambda: f64,
    pub eta4: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

/// Two-qubit Hamiltonian before the level-4 shift; qubit 1 on the left.
pub fn h_two(tau: f64, p: &TwoQ) -> Mat {
    let phi = p.eta4 / (2.0 * p.lambda) * tau.powi(4);
    let i2 = eye(2);
    let t = transverse(phi, 1.0);
    let mut h = scale(&kron(&sz(), &i2), -(p.d1 + p.d2) / 2.0 + tau / p.lambda);
    h = add(&h, &scale(&kron(&t, &i2), -p.d3 / p.lambda));
    h = add(&h, &scale(&kron(&i2, &sz()), -p.d2 / 2.0 + tau / p.lambda));
    h = add(&h, &scale(&kron(&i2, &t), -1.0 / p.lambda));
    add(&h, &scale(&kron(&sz(), &sz()), -std::f64::consts::FRAC_PI_2 * p.d4))
}

/// Fixed-step classical RK4 for `i dψ/dτ = H(τ)ψ`, returning the propagator
/// columns for every computational basis input.
pub fn rk4_propagator(h: impl Fn(f64) -> Mat, t0: f64, t1: f64, steps: usize) -> Mat {
    let n = h(t0).len();
    let dt = (t1 - t0) / steps as f64;
    let rhs = |t: f64, y: &[C64]| -> Vec<C64> { matvec(&h(t), y).into_iter().map(|v| v * c(0.0, -1.0)).collect() };
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut y = vec![c(0.0, 0.0); n];
        y[j] = c(1.0, 0.0);
        for s in 0..steps {
            let t = t0 + s as f64 * dt;
            let k1 = rhs(t, &y);
            let y2: Vec<C64> = y.iter().zip(&k1).map(|(a, k)| a + k * (dt / 2.0)).collect();
            let k2 = rhs(t + dt / 2.0, &y2);
            let y3: Vec<C64> = y.iter().zip(&k2).map(|(a, k)| a + k * (dt / 2.0)).collect();
            let k3 = rhs(t + dt / 2.0, &y3);
            let y4: Vec<C64> = y.iter().zip(&k3).map(|(a, k)| a + k * dt).collect();
            let k4 = rhs(t + dt, &y4);
            for i in 0..n {
                y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
            }
        }
        cols.push(y);
    }
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

/// Real roots of a Hermitian matrix's characteristic polynomial, ascending.
///
/// Coefficients come from Faddeev–LeVerrier; roots are bracketed by sign
/// changes on a fine grid inside the Gershgorin bound and polished by bisection.
pub fn charpoly_roots(a: &Mat) -> Vec<f64> {
    let n = a.len();
    // p(x) = x^n + c[n-1] x^{n-1} + ... + c[0]
    let mut coeffs = vec![c(0.0, 0.0); n + 1];
    coeffs[n] = c(1.0, 0.0);
    let mut m = zeros(n);
    for k in 1..=n {
        let mut am = matmul(a, &m);
        for (i, row) in am.iter_mut().enumerate() {
            row[i] += coeffs[n - k + 1];
        }
        m = am;
        let tr: C64 = (0..n).map(|i| matmul(a, &m)[i][i]).sum();
        coeffs[n - k] = -tr / k as f64;
    }
    let p = |x: f64| coeffs.iter().rev().fold(0.0, |acc, cf| acc * x + cf.re);
    let bound = a.iter().map(|r| r.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max) + 1.0;
    let grid = 200_000;
    let mut roots = Vec::new();
    let mut prev = -bound;
    for g in 1..=grid {
        let x = -bound + 2.0 * bound * g as f64 / grid as f64;
        if p(prev) == 0.0 {
            roots.push(prev);
        } else if p(prev).signum() != p(x).signum() {
            let (mut lo, mut hi) = (prev, x);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if p(lo).signum() == p(mid).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = x;
    }
    roots
}
