//! Independent reference computations used by the integration tests.
//!
//! Nothing here calls into the solver internals: the Kronecker operator is
//! built entry by entry, least squares goes through the normal equations, and
//! line minimization is done numerically in double-double arithmetic.

#![allow(dead_code)]

use jointcsit_core::{CMatrix, Complex64};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_real_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
}

pub fn fro(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = fro(b);
    let e = fro(&(a - b));
    if d == 0.0 {
        e
    } else {
        e / d
    }
}

pub fn vec_of(m: &CMatrix) -> DVector<Complex64> {
    let (r, c) = m.shape();
    DVector::from_fn(r * c, |i, _| m[(i % r, i / r)])
}

pub fn unvec_of(v: &DVector<Complex64>, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |i, j| v[j * rows + i])
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// `Psi = Phi^T (x) I_K`.
pub fn psi(phi: &CMatrix, k: usize) -> CMatrix {
    kron(&phi.transpose(), &CMatrix::identity(k, k))
}

pub fn vec_cost(psi: &CMatrix, h: &DVector<Complex64>, y: &DVector<Complex64>) -> f64 {
    (y - psi * h).iter().map(|z| z.norm_sqr()).sum()
}

/// `2 Psi^H (Psi h - y)`.
pub fn vec_gradient(psi: &CMatrix, h: &DVector<Complex64>, y: &DVector<Complex64>) -> DVector<Complex64> {
    (psi.adjoint() * (psi * h - y)) * Complex64::from(2.0)
}

pub fn vec_step(psi: &CMatrix, h: &DVector<Complex64>, d: &DVector<Complex64>, y: &DVector<Complex64>) -> f64 {
    let g = vec_gradient(psi, h, y);
    let num = g.dotc(d).re;
    let pd = psi * d;
    -num / (2.0 * pd.dotc(&pd).re)
}

/// Central differences of `f` over every real and imaginary coordinate of `h`,
/// packed as a complex matrix `dRe + j dIm`.
pub fn finite_difference_gradient(h: &CMatrix, step: f64, f: impl Fn(&CMatrix) -> f64) -> CMatrix {
    let mut out = CMatrix::zeros(h.nrows(), h.ncols());
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            let mut d = [0.0; 2];
            for (part, delta) in [Complex64::new(step, 0.0), Complex64::new(0.0, step)].into_iter().enumerate() {
                let mut plus = h.clone();
                plus[(i, j)] += delta;
                let mut minus = h.clone();
                minus[(i, j)] -= delta;
                d[part] = (f(&plus) - f(&minus)) / (2.0 * step);
            }
            out[(i, j)] = Complex64::new(d[0], d[1]);
        }
    }
    out
}

/// Solves `A x = b` for Hermitian positive definite `A` by Gaussian elimination
/// with partial pivoting.
pub fn gauss_solve(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let mut a = a.clone();
    let mut b = b.clone();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm())).unwrap();
        a.swap_rows(col, pivot);
        b.swap_rows(col, pivot);
        for row in col + 1..n {
            let f = a[(row, col)] / a[(col, col)];
            for c in col..n {
                let v = a[(col, c)];
                a[(row, c)] -= f * v;
            }
            for c in 0..b.ncols() {
                let v = b[(col, c)];
                b[(row, c)] -= f * v;
            }
        }
    }
    let mut x = CMatrix::zeros(n, b.ncols());
    for c in 0..b.ncols() {
        for row in (0..n).rev() {
            let mut s = b[(row, c)];
            for k in row + 1..n {
                s -= a[(row, k)] * x[(k, c)];
            }
            x[(row, c)] = s / a[(row, row)];
        }
    }
    x
}

/// `argmin_X ||Z - Q X||_F` through the normal equations `Q^H Q X = Q^H Z`.
pub fn left_least_squares(q: &CMatrix, z: &CMatrix) -> CMatrix {
    gauss_solve(&(q.adjoint() * q), &(q.adjoint() * z))
}

/// `argmin_H ||Y - H Phi||_F`, one row at a time via `Phi Phi^H h^T = Phi y^T`.
pub fn right_least_squares(y: &CMatrix, phi: &CMatrix) -> CMatrix {
    let gram = phi * phi.adjoint();
    let mut h = CMatrix::zeros(y.nrows(), phi.nrows());
    for k in 0..y.nrows() {
        // normal equations: Phi Phi^H h^H = Phi y^H
        let rhs = phi * y.row(k).adjoint();
        let sol = gauss_solve(&gram, &CMatrix::from_column_slice(rhs.nrows(), 1, rhs.as_slice()));
        for (j, v) in sol.iter().enumerate() {
            h[(k, j)] = v.conj();
        }
    }
    h
}

// Double-double arithmetic for an accurate scalar line search.
#[derive(Clone, Copy, Debug)]
struct Dd(f64, f64);

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd(s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd(p, a.mul_add(b, -p))
}

impl Dd {
    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.0, o.0);
        let e = s.1 + self.1 + o.1;
        two_sum(s.0, e)
    }
    fn sqr(self) -> Dd {
        let p = two_prod(self.0, self.0);
        two_sum(p.0, p.1 + 2.0 * self.0 * self.1)
    }
    fn sub(self, o: Dd) -> Dd {
        self.add(Dd(-o.0, -o.1))
    }
    fn lt(self, o: Dd) -> bool {
        let d = self.sub(o);
        d.0 < 0.0 || (d.0 == 0.0 && d.1 < 0.0)
    }
}

/// `t -> sum |r0 + t w|^2` over the entries of two equally shaped matrices.
pub struct QuadraticLine {
    r0: Vec<Complex64>,
    w: Vec<Complex64>,
}

impl QuadraticLine {
    /// The line `t -> ||(H + t D) Phi - Y||_F^2`, with products formed by explicit loops.
    pub fn new(h: &CMatrix, d: &CMatrix, phi: &CMatrix, y: &CMatrix) -> Self {
        let (k, m) = h.shape();
        let t = phi.ncols();
        let mut r0 = Vec::with_capacity(k * t);
        let mut w = Vec::with_capacity(k * t);
        for c in 0..t {
            for r in 0..k {
                let mut hp = Complex64::new(0.0, 0.0);
                let mut dp = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    hp += h[(r, i)] * phi[(i, c)];
                    dp += d[(r, i)] * phi[(i, c)];
                }
                r0.push(hp - y[(r, c)]);
                w.push(dp);
            }
        }
        Self { r0, w }
    }

    fn eval(&self, t: f64) -> Dd {
        let mut acc = Dd(0.0, 0.0);
        for (a, b) in self.r0.iter().zip(&self.w) {
            let re = two_prod(b.re, t).add(Dd(a.re, 0.0));
            let im = two_prod(b.im, t).add(Dd(a.im, 0.0));
            acc = acc.add(re.sqr()).add(im.sqr());
        }
        acc
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    /// Dense grid on an expanding symmetric bracket, then golden-section refinement.
    pub fn minimize(&self) -> f64 {
        let f0 = self.eval(0.0);
        let mut half_width = 1e-6;
        while !(f0.lt(self.eval(half_width)) && f0.lt(self.eval(-half_width))) {
            half_width *= 2.0;
            assert!(half_width < 1e12, "line has no finite minimizer");
        }
        let n = 2000;
        let h = 2.0 * half_width / n as f64;
        let best = (0..=n)
            .map(|i| -half_width + i as f64 * h)
            .min_by(|&a, &b| if self.eval(a).lt(self.eval(b)) { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater })
            .unwrap();
        let (mut lo, mut hi) = (best - h, best + h);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (self.eval(x1), self.eval(x2));
        for _ in 0..200 {
            if f1.lt(f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = self.eval(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = self.eval(x2);
            }
            if (hi - lo) <= 1e-15 * lo.abs().max(hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}
