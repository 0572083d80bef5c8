//! Symmetric tridiagonal matrices with an optional corner coupling (the
//! periodic case), factored as `LDLᵀ` without pivoting.
//!
//! The factorization serves three callers: Sylvester inertia counts for
//! eigenvalue bisection, shifted solves for inverse iteration, and the
//! `(H + s)⁻¹` preconditioner of the variational solver. Inertia counts and
//! indefinite solves are only reliable for open chains; a cyclic matrix is
//! first reduced with [`tridiagonalize`]. The cyclic factorization is used
//! directly only for positive definite shifts.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub(crate) struct BandedSym {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
    /// Coupling between the first and last row; zero for open chains.
    pub corner: f64,
}

pub(crate) struct Factor {
    pivots: Vec<f64>,
    /// Entry of row `k` in the last column after elimination.
    last_col: Vec<f64>,
    off: Vec<f64>,
}

impl BandedSym {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    fn pivmin(&self) -> f64 {
        let max_off = self
            .off
            .iter()
            .chain(core::iter::once(&self.corner))
            .map(|b| b * b)
            .fold(1.0, f64::max);
        f64::MIN_POSITIVE * max_off
    }

    /// Gershgorin interval enclosing the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            if i == 0 || i == n - 1 {
                r += self.corner.abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        let pad = f64::EPSILON * 4.0 * lo.abs().max(hi.abs()) + self.pivmin();
        (lo - pad, hi + pad)
    }

    /// `LDLᵀ` factorization of `self - shift·I`. Tiny pivots are replaced
    /// by `-pivmin` so the factorization always exists.
    pub fn factor(&self, shift: f64) -> Factor {
        let n = self.len();
        let pivmin = self.pivmin();
        let guard = |d: f64| if d.abs() < pivmin { -pivmin } else { d };
        let mut pivots = vec![0.0; n];
        let mut last_col = vec![0.0; n];

        if n == 1 {
            pivots[0] = guard(self.diag[0] - shift);
            return Factor {
                pivots,
                last_col,
                off: self.off.clone(),
            };
        }

        // Row 0 reaches the last column through the corner, unless the
        // matrix is 2x2 where that entry is the ordinary off-diagonal.
        let mut w = if n == 2 { self.off[0] } else { self.corner };
        let mut last = self.diag[n - 1] - shift;
        let mut d = guard(self.diag[0] - shift);
        for k in 0..n.saturating_sub(2) {
            pivots[k] = d;
            last_col[k] = w;
            let b = self.off[k];
            let next_orig = if k + 1 == n - 2 { self.off[n - 2] } else { 0.0 };
            let next_d = guard(self.diag[k + 1] - shift - b * b / d);
            let next_w = next_orig - b * w / d;
            last -= w * w / d;
            d = next_d;
            w = next_w;
        }
        pivots[n - 2] = d;
        last_col[n - 2] = w;
        last -= w * w / d;
        pivots[n - 1] = guard(last);
        Factor {
            pivots,
            last_col,
            off: self.off.clone(),
        }
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        self.factor(x).pivots.iter().filter(|&&d| d < 0.0).count()
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection on inertia.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.bounds();
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let width = hi - lo;
            if width <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + self.pivmin() {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        let mut out: Vec<Complex64> = (0..n).map(|i| v[i] * self.diag[i]).collect();
        for i in 0..n - 1 {
            out[i] += v[i + 1] * self.off[i];
            out[i + 1] += v[i] * self.off[i];
        }
        if n > 2 && self.corner != 0.0 {
            out[0] += v[n - 1] * self.corner;
            out[n - 1] += v[0] * self.corner;
        }
        out
    }
}

/// Householder reflectors `Q = P₀P₁⋯` with `QᵀAQ` tridiagonal.
pub(crate) struct Reflectors {
    /// `(first index, β, v)` for `P = I - β v vᵀ` acting on `first..n`.
    reflectors: Vec<(usize, f64, Vec<f64>)>,
}

impl Reflectors {
    /// Maps a vector of the tridiagonal problem back to the original basis.
    pub fn apply(&self, y: &mut [Complex64]) {
        for (first, beta, v) in self.reflectors.iter().rev() {
            let tail = &mut y[*first..];
            let proj: Complex64 = v.iter().zip(tail.iter()).map(|(vi, yi)| yi * vi).sum();
            let scale = proj * *beta;
            for (yi, vi) in tail.iter_mut().zip(v) {
                *yi -= scale * vi;
            }
        }
    }
}

/// Dense Householder reduction of a (cyclic) tridiagonal matrix to an open
/// tridiagonal one with the same spectrum. `O(n³)`.
pub(crate) fn tridiagonalize(a: &BandedSym) -> (BandedSym, Reflectors) {
    let n = a.len();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = a.diag[i];
    }
    for i in 0..n - 1 {
        m[i * n + i + 1] = a.off[i];
        m[(i + 1) * n + i] = a.off[i];
    }
    if n > 2 {
        m[n - 1] += a.corner;
        m[(n - 1) * n] += a.corner;
    }

    let mut off = vec![0.0; n - 1];
    let mut reflectors = Vec::new();
    for k in 0..n.saturating_sub(2) {
        let first = k + 1;
        let mut v: Vec<f64> = (first..n).map(|i| m[i * n + k]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if v[0] > 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        off[k] = alpha;
        if vv == 0.0 {
            continue;
        }
        let beta = 2.0 / vv;
        // p = β S v on the trailing block S = m[first.., first..].
        let p: Vec<f64> = (first..n)
            .map(|i| {
                let row = &m[i * n + first..i * n + n];
                beta * row.iter().zip(&v).map(|(s, vi)| s * vi).sum::<f64>()
            })
            .collect();
        let kappa = 0.5 * beta * p.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        let w: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
        for (ii, i) in (first..n).enumerate() {
            let row = &mut m[i * n + first..i * n + n];
            for (jj, s) in row.iter_mut().enumerate() {
                *s -= v[ii] * w[jj] + w[ii] * v[jj];
            }
        }
        reflectors.push((first, beta, v));
    }
    if n >= 2 {
        off[n - 2] = m[(n - 1) * n + n - 2];
    }
    let diag = (0..n).map(|i| m[i * n + i]).collect();
    (
        BandedSym {
            diag,
            off,
            corner: 0.0,
        },
        Reflectors { reflectors },
    )
}

impl Factor {
    /// Solves `(A - shift·I) x = rhs` in place.
    pub fn solve(&self, x: &mut [Complex64]) {
        let n = self.pivots.len();
        if n == 1 {
            x[0] /= self.pivots[0];
            return;
        }
        let d = &self.pivots;
        let w = &self.last_col;
        for k in 0..n - 2 {
            let xk = x[k];
            x[k + 1] -= xk * (self.off[k] / d[k]);
            x[n - 1] -= xk * (w[k] / d[k]);
        }
        let xk = x[n - 2];
        x[n - 1] -= xk * (w[n - 2] / d[n - 2]);

        x[n - 1] /= d[n - 1];
        let tail = x[n - 1];
        x[n - 2] = (x[n - 2] - tail * w[n - 2]) / d[n - 2];
        for k in (0..n - 2).rev() {
            x[k] = (x[k] - x[k + 1] * self.off[k] - tail * w[k]) / d[k];
        }
    }
}
