//! Dense eigensolvers and the Chebyshev propagator kernel.

use faer::complex_native::c64;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Eigenpairs of a real symmetric matrix, energies ascending.
pub fn eigh_real(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = h.nrows();
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| h[(i, j)]);
    let eig = m.selfadjoint_eigendecomposition(faer::Side::Lower);
    let s = eig.s().column_vector();
    let u = eig.u();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s.read(a).total_cmp(&s.read(b)));
    let values = order.iter().map(|&k| s.read(k)).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| u.read(i, order[j]));
    (values, vectors)
}

/// Eigenpairs of a complex Hermitian matrix, energies ascending.
pub fn eigh_complex(h: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = h.nrows();
    let m = faer::Mat::<c64>::from_fn(n, n, |i, j| c64::new(h[(i, j)].re, h[(i, j)].im));
    let eig = m.selfadjoint_eigendecomposition(faer::Side::Lower);
    let s = eig.s().column_vector();
    let u = eig.u();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s.read(a).re.total_cmp(&s.read(b).re));
    let values = order.iter().map(|&k| s.read(k).re).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| {
        let z = u.read(i, order[j]);
        Complex64::new(z.re, z.im)
    });
    (values, vectors)
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `exp(-i H dt) ψ` for every column of `psi`, given the eigenpairs of a real H.
pub fn apply_eigen_exponential(values: &[f64], vectors: &DMatrix<f64>, dt: f64, psi: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let re = psi.map(|z| z.re);
    let im = psi.map(|z| z.im);
    let vt = vectors.transpose();
    let cre = &vt * re;
    let cim = &vt * im;
    let mut phased_re = DMatrix::zeros(cre.nrows(), cre.ncols());
    let mut phased_im = DMatrix::zeros(cre.nrows(), cre.ncols());
    for (k, &e) in values.iter().enumerate() {
        let (s, c) = (-e * dt).sin_cos();
        for j in 0..cre.ncols() {
            let (a, b) = (cre[(k, j)], cim[(k, j)]);
            phased_re[(k, j)] = c * a - s * b;
            phased_im[(k, j)] = s * a + c * b;
        }
    }
    let out_re = vectors * phased_re;
    let out_im = vectors * phased_im;
    DMatrix::from_fn(psi.nrows(), psi.ncols(), |i, j| Complex64::new(out_re[(i, j)], out_im[(i, j)]))
}

/// Bessel functions `J_0(x) .. J_nmax(x)` for `x >= 0` by Miller's backward
/// recurrence normalised with `J_0 + 2 Σ J_2k = 1`.
pub fn bessel_j_sequence(x: f64, nmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let big = nmax.max(x.ceil() as usize);
    let mut m = big + 20 + (40.0 * big as f64).sqrt() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let mut j_next = 0.0;
    let mut j_cur = 1e-300;
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        let j_prev = 2.0 * k as f64 / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if k - 1 <= nmax {
            out[k - 1] = j_cur;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += j_cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Sparse real symmetric operator `diag + Σ_k c_k T_k` acting on complex
/// column blocks.
pub struct SparseOperator<'a> {
    pub diagonal: &'a [f64],
    pub terms: &'a [(f64, &'a crate::model::SparseTerm)],
}

impl SparseOperator<'_> {
    fn apply(&self, x: &[Complex64], y: &mut [Complex64], dim: usize, ncols: usize) {
        for j in 0..ncols {
            let xs = &x[j * dim..(j + 1) * dim];
            let ys = &mut y[j * dim..(j + 1) * dim];
            for i in 0..dim {
                ys[i] = xs[i] * self.diagonal[i];
            }
            for &(c, term) in self.terms {
                for k in 0..term.values.len() {
                    let v = c * term.values[k];
                    ys[term.rows[k] as usize] += xs[term.cols[k] as usize] * v;
                }
            }
        }
    }

    /// Gershgorin bounds on the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let mut radius = vec![0.0; self.diagonal.len()];
        for &(c, term) in self.terms {
            term.row_abs_sums(&mut radius, c);
        }
        let lo = self.diagonal.iter().zip(&radius).map(|(d, r)| d - r).fold(f64::INFINITY, f64::min);
        let hi = self.diagonal.iter().zip(&radius).map(|(d, r)| d + r).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// `exp(-i H dt) ψ` by Chebyshev expansion. `psi` is column-major with
    /// `ncols` columns of length `dim`; the result overwrites it.
    pub fn chebyshev_step(&self, psi: &mut [Complex64], dim: usize, ncols: usize, dt: f64) {
        let (lo, hi) = self.spectral_bounds();
        let center = 0.5 * (hi + lo);
        let half = (0.5 * (hi - lo)).max(1e-12);
        let x = half * dt;
        let nterms = chebyshev_order(x);
        let bessel = bessel_j_sequence(x, nterms);

        let len = dim * ncols;
        let scaled = |op: &Self, src: &[Complex64], dst: &mut [Complex64]| {
            op.apply(src, dst, dim, ncols);
            for (d, s) in dst.iter_mut().zip(src) {
                *d = (*d - *s * center) / half;
            }
        };

        let mut acc: Vec<Complex64> = psi.iter().map(|z| z * bessel[0]).collect();
        let mut prev = psi.to_vec();
        let mut cur = vec![Complex64::new(0.0, 0.0); len];
        scaled(self, &prev, &mut cur);
        // (-i)^k cycles with period 4.
        let phase = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        let mut next = vec![Complex64::new(0.0, 0.0); len];
        for k in 1..=nterms {
            let coeff = phase[k % 4] * (2.0 * bessel[k]);
            for (a, c) in acc.iter_mut().zip(&cur) {
                *a += c * coeff;
            }
            if k == nterms {
                break;
            }
            scaled(self, &cur, &mut next);
            for (n, p) in next.iter_mut().zip(&prev) {
                *n = *n * 2.0 - p;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
        let global = Complex64::from_polar(1.0, -center * dt);
        for (p, a) in psi.iter_mut().zip(&acc) {
            *p = a * global;
        }
    }
}

/// Expansion order for `exp(-i x y)` on `y ∈ [-1, 1]` at double precision.
fn chebyshev_order(x: f64) -> usize {
    let start = x.ceil() as usize + 4;
    let probe = bessel_j_sequence(x, start + 60);
    let mut n = start;
    while n + 1 < probe.len() && probe[n].abs() + probe[n + 1].abs() > 1e-17 {
        n += 1;
    }
    n + 1
}

pub fn dvector_to_complex(v: &DVector<f64>) -> DVector<Complex64> {
    v.map(|x| Complex64::new(x, 0.0))
}
