//! Dense complex polynomials in the monomial basis.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coefficients `c₀, …, c_d` (index = power). Trailing zeros are allowed, so
/// [`degree`](Self::degree) is an upper bound on the true degree.
///
/// Serialized as a JSON array of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            return Self::zero();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![ZERO] }
    }

    pub fn constant(c: Complex64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// The identity map `z`.
    pub fn identity() -> Self {
        Self {
            coeffs: vec![ZERO, ONE],
        }
    }

    pub fn monomial(power: usize, c: Complex64) -> Self {
        let mut coeffs = vec![ZERO; power + 1];
        coeffs[power] = c;
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// Drops trailing zero coefficients.
    pub fn trimmed(mut self) -> Self {
        while self.coeffs.len() > 1 && self.coeffs.last() == Some(&ZERO) {
            self.coeffs.pop();
        }
        self
    }

    /// Nested multiplication.
    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Pointwise [`eval`](Self::eval) over a slice; results are bit-identical.
    pub fn eval_many(&self, zs: &[Complex64]) -> Vec<Complex64> {
        zs.iter().map(|z| self.eval(*z)).collect()
    }

    /// `(p(z), p′(z))` by a doubled Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// `z ↦ p(sz)`.
    pub fn dilated(&self, s: Complex64) -> Self {
        let mut power = Complex64::new(1.0, 0.0);
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            coeffs.push(c * power);
            power *= s;
        }
        Self::new(coeffs)
    }

    /// `p(z) − w` as a new polynomial.
    pub fn shifted_by(&self, w: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] -= w;
        out
    }

    /// Roots from the eigenvalues of the companion matrix, each polished by a
    /// few Newton steps on `self`. Returns an empty list for constants.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let p = self.clone().trimmed();
        let n = p.degree();
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = p.coeffs[n];
        // Companion matrix of the monic polynomial, upper Hessenberg.
        let mut h = vec![vec![ZERO; n]; n];
        for i in 1..n {
            h[i][i - 1] = ONE;
        }
        for (i, row) in h.iter_mut().enumerate() {
            row[n - 1] = -p.coeffs[i] / lead;
        }
        let mut roots = hessenberg_eigenvalues(h)?;
        for z in &mut roots {
            for _ in 0..3 {
                let (v, dv) = p.eval_with_derivative(*z);
                if dv.norm() == 0.0 {
                    break;
                }
                let step = v / dv;
                if !(step.re.is_finite() && step.im.is_finite()) {
                    break;
                }
                let cand = *z - step;
                if p.eval(cand).norm() <= v.norm() {
                    *z = cand;
                } else {
                    break;
                }
            }
        }
        Ok(roots)
    }
}

/// Sum of a list of polynomials, with degree equal to the largest degree.
pub fn accumulate(series: &[ComplexPolynomial]) -> ComplexPolynomial {
    let len = series.iter().map(|p| p.coeffs.len()).max().unwrap_or(1);
    let mut coeffs = vec![ZERO; len];
    for p in series {
        for (acc, c) in coeffs.iter_mut().zip(&p.coeffs) {
            *acc += c;
        }
    }
    ComplexPolynomial { coeffs }
}

impl Add for &ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn add(self, rhs: Self) -> ComplexPolynomial {
        accumulate(&[self.clone(), rhs.clone()])
    }
}

impl Neg for &ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn neg(self) -> ComplexPolynomial {
        ComplexPolynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub for &ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn sub(self, rhs: Self) -> ComplexPolynomial {
        self + &(-rhs)
    }
}

impl Mul for &ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn mul(self, rhs: Self) -> ComplexPolynomial {
        let mut coeffs = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        ComplexPolynomial { coeffs }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR with
/// Wilkinson shifts and Givens rotations. Intended for desk-scale orders.
fn hessenberg_eigenvalues(mut h: Vec<Vec<Complex64>>) -> Result<Vec<Complex64>> {
    let n = h.len();
    let mut eig = Vec::with_capacity(n);
    let mut hi = n;
    let mut iter_since_deflation = 0;
    while hi > 0 {
        if hi == 1 {
            eig.push(h[0][0]);
            break;
        }
        // Find the active block [lo, hi).
        let mut lo = hi - 1;
        while lo > 0 {
            let sub = h[lo][lo - 1].norm();
            let diag = h[lo][lo].norm() + h[lo - 1][lo - 1].norm();
            if sub <= f64::EPSILON * diag.max(f64::MIN_POSITIVE) {
                h[lo][lo - 1] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eig.push(h[hi - 1][hi - 1]);
            hi -= 1;
            iter_since_deflation = 0;
            continue;
        }
        iter_since_deflation += 1;
        if iter_since_deflation > 100 * n.max(10) {
            return Err(Error::EigenNonConvergence);
        }
        // Wilkinson shift from the trailing 2×2 block.
        let a = h[hi - 2][hi - 2];
        let b = h[hi - 2][hi - 1];
        let c = h[hi - 1][hi - 2];
        let d = h[hi - 1][hi - 1];
        let tr = a + d;
        let det = a * d - b * c;
        let disc = (tr * tr * 0.25 - det).sqrt();
        let l1 = tr * 0.5 + disc;
        let l2 = tr * 0.5 - disc;
        let mut shift = if (l1 - d).norm() < (l2 - d).norm() { l1 } else { l2 };
        if iter_since_deflation % 11 == 0 {
            // Exceptional shift to break cycles.
            shift += Complex64::new(h[hi - 1][hi - 2].norm(), 0.0) * 0.75;
        }
        for i in lo..hi {
            h[i][i] -= shift;
        }
        let mut rots = Vec::with_capacity(hi - lo - 1);
        for k in lo..hi - 1 {
            let x = h[k][k];
            let y = h[k + 1][k];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cs, sn) = if r == 0.0 { (ONE, ZERO) } else { (x / r, y / r) };
            // G = [[c̄, s̄], [−s, c]] applied to rows k, k+1.
            for j in k..n {
                let u = h[k][j];
                let v = h[k + 1][j];
                h[k][j] = cs.conj() * u + sn.conj() * v;
                h[k + 1][j] = -sn * u + cs * v;
            }
            rots.push((cs, sn));
        }
        for (idx, (cs, sn)) in rots.into_iter().enumerate() {
            let k = lo + idx;
            let top = (k + 2).min(hi);
            for row in h.iter_mut().take(top) {
                let u = row[k];
                let v = row[k + 1];
                row[k] = u * cs + v * sn;
                row[k + 1] = -u * sn.conj() + v * cs.conj();
            }
        }
        for i in lo..hi {
            h[i][i] += shift;
        }
    }
    Ok(eig)
}
