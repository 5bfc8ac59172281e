//! Dense complex linear algebra for the small Hermitian problems that come up
//! when analysing a joint strategy: eigendecomposition (cyclic Jacobi),
//! semidefiniteness tests, Cholesky solves and the tensor bipartition that
//! factors one player's strategy index out of the joint basis.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{QceError, Result};

/// Tolerance used wherever a caller does not supply one.
pub const DEFAULT_TOL: f64 = 1e-9;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_OFF: f64 = 1e-14;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6e}{:+.6e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(QceError::DimensionMismatch(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(QceError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from separate real and imaginary row-major arrays.
    pub fn from_re_im(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(QceError::DimensionMismatch(format!(
                "re has {} entries but im has {}",
                re.len(),
                im.len()
            )));
        }
        let data = re
            .iter()
            .zip(im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        Self::new(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// |v⟩⟨v|
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |r, c| v[r] * v[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn re(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.im).collect()
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(QceError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other[(k, c)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(QceError::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * v[c]).sum())
            .collect())
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(QceError::DimensionMismatch(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * alpha).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.diagonal().into_iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ‖A − A†‖_F
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut acc = 0.0;
        for r in 0..n {
            for c in 0..n {
                acc += (self[(r, c)] - self[(c, r)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// (A + A†) / 2
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square(), "hermitian part of a non-square matrix");
        let n = self.rows;
        Self::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(self[(r, r)].re, 0.0)
            } else {
                (self[(r, c)] + self[(c, r)].conj()) * 0.5
            }
        })
    }

    /// tr(A B) without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(QceError::DimensionMismatch(format!(
                "tr(AB) needs compatible shapes, got {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..self.rows {
            for c in 0..self.cols {
                acc += self[(r, c)] * other[(c, r)];
            }
        }
        Ok(acc)
    }

    /// Applies `perm` to both indices: out(a, b) = self(perm[a], perm[b]).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert!(self.is_square() && perm.len() == self.rows);
        let n = self.rows;
        Self::from_fn(n, n, |a, b| self[(perm[a], perm[b])])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Eigenvalues sorted descending with matching unit eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianSpectrum {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }

    /// V diag(λ) V†
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_eigenvalues(|l| l)
    }

    /// V diag(f(λ)) V†
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |r, c| {
            (0..n).map(|k| v[(r, k)] * v[(c, k)].conj() * fl[k]).sum()
        })
    }
}

fn ensure_hermitian(a: &ComplexMatrix, tol: f64) -> Result<()> {
    if !a.is_square() {
        return Err(QceError::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let defect = a.hermitian_defect();
    let allowed = tol * a.frobenius_norm().max(1.0);
    if defect.is_nan() || defect > allowed {
        return Err(QceError::NotHermitian { defect, allowed });
    }
    Ok(())
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// The input is symmetrized to (A + A†)/2 after the Hermiticity check, so
/// drift below `tol · max(1, ‖A‖_F)` is absorbed rather than reported.
pub fn herm_eig(a: &ComplexMatrix, tol: f64) -> Result<HermitianSpectrum> {
    ensure_hermitian(a, tol)?;
    let n = a.rows();
    let mut w = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let norm = w.frobenius_norm();

    let off_mass = |w: &ComplexMatrix| -> f64 {
        let mut acc = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    acc += w[(r, c)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    };

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_mass(&w) <= JACOBI_REL_OFF * norm {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut w, &mut v, p, q);
            }
        }
    }
    let off = off_mass(&w);
    if !converged && off > JACOBI_REL_OFF * norm {
        return Err(QceError::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
            off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    order.sort_by(|&x, &y| diag[y].total_cmp(&diag[x]));
    let eigenvalues = order.iter().map(|&k| diag[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Annihilates w(p, q) with the unitary G = diag(1, e^{-iφ}) · R(θ) acting on
/// coordinates (p, q), where φ = arg w(p, q) and R is the real Jacobi rotation
/// of the phase-corrected block.
fn jacobi_rotate(w: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let b = w[(p, q)];
    let babs = b.norm();
    if babs == 0.0 {
        return;
    }
    let app = w[(p, p)].re;
    let aqq = w[(q, q)].re;
    let theta = (aqq - app) / (2.0 * babs);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let phase = (b / babs).conj();
    let g00 = Complex64::new(c, 0.0);
    let g01 = Complex64::new(s, 0.0);
    let g10 = phase * (-s);
    let g11 = phase * c;

    let n = w.rows();
    for k in 0..n {
        let akp = w[(k, p)];
        let akq = w[(k, q)];
        w[(k, p)] = akp * g00 + akq * g10;
        w[(k, q)] = akp * g01 + akq * g11;
    }
    for k in 0..n {
        let apk = w[(p, k)];
        let aqk = w[(q, k)];
        w[(p, k)] = g00.conj() * apk + g10.conj() * aqk;
        w[(q, k)] = g01.conj() * apk + g11.conj() * aqk;
    }
    w[(p, q)] = Complex64::new(0.0, 0.0);
    w[(q, p)] = Complex64::new(0.0, 0.0);
    w[(p, p)] = Complex64::new(w[(p, p)].re, 0.0);
    w[(q, q)] = Complex64::new(w[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g00 + vkq * g10;
        v[(k, q)] = vkp * g01 + vkq * g11;
    }
}

/// Outcome of a negative-semidefiniteness test.
#[derive(Debug, Clone)]
pub struct NsdCheck {
    pub is_nsd: bool,
    pub lambda_max: f64,
    /// Unit eigenvector of `lambda_max`; populated only when the test fails.
    pub witness: Option<Vec<Complex64>>,
}

/// A ⪯ 0 up to `tol · max(1, ‖A‖_F)`.
pub fn nsd_check(a: &ComplexMatrix, tol: f64) -> Result<NsdCheck> {
    let spectrum = herm_eig(a, tol)?;
    let lambda_max = spectrum.max_eigenvalue();
    let is_nsd = lambda_max <= tol * a.frobenius_norm().max(1.0);
    Ok(NsdCheck {
        is_nsd,
        lambda_max,
        witness: (!is_nsd).then(|| spectrum.eigenvector(0)),
    })
}

/// A ⪰ 0 with λ_min ≥ −tol (absolute).
pub fn is_psd(a: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(herm_eig(a, tol)?.min_eigenvalue() >= -tol)
}

/// Lower-triangular L with A = L L†, or `None` when A is not numerically
/// positive definite.
pub fn cholesky(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    if !a.is_square() {
        return None;
    }
    let n = a.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// Solves (L L†) x = b given the Cholesky factor L.
pub fn cholesky_solve(l: &ComplexMatrix, b: &[Complex64]) -> Vec<Complex64> {
    let n = l.rows();
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)].conj() * x[k];
        }
        x[i] = s / l[(i, i)].re;
    }
    x
}

/// A⁻¹ from its Cholesky factor.
pub fn cholesky_inverse(l: &ComplexMatrix) -> ComplexMatrix {
    let n = l.rows();
    let mut inv = ComplexMatrix::zeros(n, n);
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        e.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        e[c] = Complex64::new(1.0, 0.0);
        let col = cholesky_solve(l, &e);
        for r in 0..n {
            inv[(r, c)] = col[r];
        }
    }
    inv.hermitian_part()
}

/// ln det A from its Cholesky factor.
pub fn cholesky_logdet(l: &ComplexMatrix) -> f64 {
    (0..l.rows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum()
}

/// Factorization of the joint basis |s_1, …, s_k⟩ (row-major, player 1
/// slowest) into the analysed player's index `i` and the opponents' joint
/// index `j`, itself row-major over the remaining players in their original
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    player: usize,
    m: usize,
    own_stride: usize,
    opponent_offsets: Vec<usize>,
}

impl Bipartition {
    pub fn new(dims: &[usize], player: usize) -> Result<Self> {
        if player >= dims.len() {
            return Err(QceError::DimensionMismatch(format!(
                "player index {} out of range for {} players",
                player + 1,
                dims.len()
            )));
        }
        if dims.contains(&0) {
            return Err(QceError::DimensionMismatch(
                "every strategy count must be at least 1".into(),
            ));
        }
        let k = dims.len();
        let mut strides = vec![1usize; k];
        for t in (0..k.saturating_sub(1)).rev() {
            strides[t] = strides[t + 1]
                .checked_mul(dims[t + 1])
                .ok_or_else(|| QceError::DimensionMismatch("joint dimension overflows".into()))?;
        }
        let others: Vec<usize> = (0..k).filter(|&t| t != player).collect();
        let n: usize = others.iter().map(|&t| dims[t]).product();
        let mut opponent_offsets = Vec::with_capacity(n);
        let mut coords = vec![0usize; others.len()];
        for _ in 0..n {
            opponent_offsets.push(
                others
                    .iter()
                    .zip(&coords)
                    .map(|(&t, &s)| s * strides[t])
                    .sum(),
            );
            for pos in (0..others.len()).rev() {
                coords[pos] += 1;
                if coords[pos] < dims[others[pos]] {
                    break;
                }
                coords[pos] = 0;
            }
        }
        Ok(Self {
            player,
            m: dims[player],
            own_stride: strides[player],
            opponent_offsets,
        })
    }

    pub fn player(&self) -> usize {
        self.player
    }

    /// Analysed player's strategy count.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Opponents' joint strategy count.
    pub fn n(&self) -> usize {
        self.opponent_offsets.len()
    }

    pub fn joint_dim(&self) -> usize {
        self.m * self.n()
    }

    /// Joint basis index of (own strategy `i`, opponents' joint strategy `j`).
    pub fn joint(&self, i: usize, j: usize) -> usize {
        i * self.own_stride + self.opponent_offsets[j]
    }
}

/// The entries ρ^{i1 i2}_{jj} = ⟨i1, j| ρ |i2, j⟩ for one player.
#[derive(Debug, Clone)]
pub struct DiagBlocks {
    m: usize,
    n: usize,
    data: Vec<Complex64>,
}

impl DiagBlocks {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i1: usize, i2: usize, j: usize) -> Complex64 {
        self.data[(i1 * self.m + i2) * self.n + j]
    }
}

pub fn bipartition_diag_blocks(
    rho: &ComplexMatrix,
    player: usize,
    dims: &[usize],
) -> Result<DiagBlocks> {
    let split = Bipartition::new(dims, player)?;
    if !rho.is_square() || rho.rows() != split.joint_dim() {
        return Err(QceError::DimensionMismatch(format!(
            "state is {}x{} but the strategy counts {:?} give joint dimension {}",
            rho.rows(),
            rho.cols(),
            dims,
            split.joint_dim()
        )));
    }
    let (m, n) = (split.m(), split.n());
    let mut data = Vec::with_capacity(m * m * n);
    for i1 in 0..m {
        for i2 in 0..m {
            for j in 0..n {
                data.push(rho[(split.joint(i1, j), split.joint(i2, j))]);
            }
        }
    }
    Ok(DiagBlocks { m, n, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        // small LCG keeps this module's tests free of the sampling module
        let mut state = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let a = ComplexMatrix::from_fn(n, n, |_, _| c(next(), next()));
        a.hermitian_part()
    }

    fn residual(a: &ComplexMatrix, s: &HermitianSpectrum) -> f64 {
        a.sub(&s.reconstruct()).unwrap().frobenius_norm()
    }

    fn orthonormality_defect(s: &HermitianSpectrum) -> f64 {
        let v = &s.eigenvectors;
        let n = v.cols();
        v.adjoint()
            .matmul(v)
            .unwrap()
            .sub(&ComplexMatrix::identity(n))
            .unwrap()
            .frobenius_norm()
    }

    #[test]
    fn identity_spectrum() {
        let s = herm_eig(&ComplexMatrix::identity(2), DEFAULT_TOL).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 1.0]);
    }

    #[test]
    fn pauli_y_spectrum() {
        let y =
            ComplexMatrix::new(2, 2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap();
        let s = herm_eig(&y, DEFAULT_TOL).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-14);
        assert!(residual(&y, &s) < 1e-14);
    }

    #[test]
    fn random_4x4_reconstructs() {
        for seed in 0..20 {
            let a = random_hermitian(4, seed);
            let s = herm_eig(&a, DEFAULT_TOL).unwrap();
            assert!(residual(&a, &s) <= 1e-10 * a.frobenius_norm().max(1.0));
            assert!(orthonormality_defect(&s) <= 1e-10);
            let tr: f64 = s.eigenvalues.iter().sum();
            assert!((tr - a.trace().re).abs() <= 1e-10 * a.frobenius_norm().max(1.0));
            assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::new(2, 2, vec![c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        assert!(matches!(
            herm_eig(&a, DEFAULT_TOL),
            Err(QceError::NotHermitian { .. })
        ));
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            herm_eig(&rect, DEFAULT_TOL),
            Err(QceError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn small_drift_is_symmetrized() {
        let mut a = random_hermitian(3, 7);
        a[(0, 1)] += c(1e-12, 0.0);
        let s = herm_eig(&a, DEFAULT_TOL).unwrap();
        assert!(residual(&a.hermitian_part(), &s) < 1e-12);
    }

    #[test]
    fn nsd_examples() {
        let zero = ComplexMatrix::zeros(3, 3);
        assert!(nsd_check(&zero, DEFAULT_TOL).unwrap().is_nsd);

        let b1 = ComplexMatrix::from_real_diag(&[0.0, 0.5]);
        let chk = nsd_check(&b1, DEFAULT_TOL).unwrap();
        assert!(!chk.is_nsd);
        assert_eq!(chk.lambda_max, 0.5);
        let w = chk.witness.unwrap();
        assert!(w[0].norm() < 1e-15 && (w[1].norm() - 1.0).abs() < 1e-15);

        let b2 = ComplexMatrix::from_real_diag(&[-0.5, 0.0]);
        assert!(nsd_check(&b2, DEFAULT_TOL).unwrap().is_nsd);
    }

    #[test]
    fn nsd_both_signs_only_for_tiny() {
        let a = random_hermitian(3, 11);
        let both = nsd_check(&a, DEFAULT_TOL).unwrap().is_nsd
            && nsd_check(&a.scale(-1.0), DEFAULT_TOL).unwrap().is_nsd;
        assert!(!both);
        let tiny = a.scale(1e-12);
        assert!(nsd_check(&tiny, DEFAULT_TOL).unwrap().is_nsd);
        assert!(nsd_check(&tiny.scale(-1.0), DEFAULT_TOL).unwrap().is_nsd);
    }

    #[test]
    fn cholesky_roundtrip() {
        let a = random_hermitian(4, 3);
        let shifted = a.add(&ComplexMatrix::identity(4).scale(5.0)).unwrap();
        let l = cholesky(&shifted).unwrap();
        let back = l.matmul(&l.adjoint()).unwrap();
        assert!(back.sub(&shifted).unwrap().frobenius_norm() < 1e-12);
        let inv = cholesky_inverse(&l);
        let prod = inv.matmul(&shifted).unwrap();
        assert!(
            prod.sub(&ComplexMatrix::identity(4))
                .unwrap()
                .frobenius_norm()
                < 1e-12
        );
        assert!(cholesky(&ComplexMatrix::from_real_diag(&[1.0, -1.0])).is_none());
    }

    #[test]
    fn bipartition_basis_state() {
        // |11⟩⟨11| on 2x2 (index 0 in 0-based joint order)
        let mut rho = ComplexMatrix::zeros(4, 4);
        rho[(0, 0)] = c(1.0, 0.0);
        let blocks = bipartition_diag_blocks(&rho, 0, &[2, 2]).unwrap();
        for i1 in 0..2 {
            for i2 in 0..2 {
                for j in 0..2 {
                    let expected = if (i1, i2, j) == (0, 0, 0) { 1.0 } else { 0.0 };
                    assert_eq!(blocks.get(i1, i2, j), c(expected, 0.0));
                }
            }
        }
    }

    #[test]
    fn bipartition_maximally_mixed() {
        let rho = ComplexMatrix::identity(4).scale(0.25);
        for player in 0..2 {
            let blocks = bipartition_diag_blocks(&rho, player, &[2, 2]).unwrap();
            for i1 in 0..2 {
                for i2 in 0..2 {
                    for j in 0..2 {
                        let expected = if i1 == i2 { 0.25 } else { 0.0 };
                        assert_eq!(blocks.get(i1, i2, j), c(expected, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn bipartition_superposition_of_player_one() {
        // (|11⟩ + |21⟩)/√2: joint indices 0 and 2
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = vec![c(0.0, 0.0); 4];
        psi[0] = c(h, 0.0);
        psi[2] = c(h, 0.0);
        let rho = ComplexMatrix::outer(&psi);
        let blocks = bipartition_diag_blocks(&rho, 0, &[2, 2]).unwrap();
        assert!((blocks.get(0, 1, 0) - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(blocks.get(0, 1, 1), c(0.0, 0.0));
        // for player 2 the same state is a product with |1⟩, so no coherence
        let blocks2 = bipartition_diag_blocks(&rho, 1, &[2, 2]).unwrap();
        assert_eq!(blocks2.get(0, 1, 0), c(0.0, 0.0));
        assert!((blocks2.get(0, 0, 1) - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn bipartition_three_players_moves_player_to_front() {
        let dims = [2, 3, 2];
        let split = Bipartition::new(&dims, 1).unwrap();
        assert_eq!((split.m(), split.n()), (3, 4));
        // s = (s1, s2, s3) → joint = s1*6 + s2*2 + s3; j = s1*2 + s3
        for s1 in 0..2 {
            for s2 in 0..3 {
                for s3 in 0..2 {
                    assert_eq!(split.joint(s2, s1 * 2 + s3), s1 * 6 + s2 * 2 + s3);
                }
            }
        }
    }

    #[test]
    fn bipartition_errors() {
        let rho = ComplexMatrix::identity(4);
        assert!(matches!(
            bipartition_diag_blocks(&rho, 2, &[2, 2]),
            Err(QceError::DimensionMismatch(_))
        ));
        assert!(matches!(
            bipartition_diag_blocks(&rho, 0, &[2, 3]),
            Err(QceError::DimensionMismatch(_))
        ));
    }
}
