//! Dense complex-matrix kernels: SVD-based pseudoinverse, range and kernel
//! projectors, range inclusion, Douglas constants, PSD tests, commutators
//! and the Cauchy dual.
//!
//! Every contract here is phrased through residuals and projectors; the
//! singular vectors returned by the SVD backend never escape this module.

use faer::Side;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::matrix::ComplexMatrix;
use crate::tolerance::{PinvFault, ToleranceConfig};


/// `T†` with the singular values and numerical rank that produced it.
#[derive(Debug, Clone)]
pub struct PseudoInverseResult {
    pub pinv: ComplexMatrix,
    /// Descending, nonnegative.
    pub singular_values: Vec<f64>,
    pub numerical_rank: usize,
}

/// Orthogonal projector onto a subspace together with the subspace dimension.
#[derive(Debug, Clone)]
pub struct SubspaceProjector {
    pub matrix: ComplexMatrix,
    pub subspace_dim: usize,
}

/// Boolean verdict with the residual that decided it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    pub residual: f64,
}

impl Verdict {
    pub fn new(holds: bool, residual: f64) -> Self {
        Self { holds, residual }
    }

    /// Verdict from a residual compared against `residual_tol`.
    pub fn within(residual: f64, tol: &ToleranceConfig) -> Self {
        Self { holds: residual <= tol.residual_tol, residual }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdVerdict {
    pub holds: bool,
    /// Smallest eigenvalue of the Hermitian part.
    pub min_eigenvalue: f64,
    /// `‖H − H*‖_F / max(1, ‖H‖_F)`.
    pub hermitian_residual: f64,
}

pub(crate) struct Svd {
    /// Full `m × m` left factor.
    u: DMatrix<Complex64>,
    /// `min(m, n)` values, descending.
    s: Vec<f64>,
    /// Full `n × n` right factor.
    v: DMatrix<Complex64>,
    rank: usize,
}

impl Svd {
    /// Decomposes `m`, counting singular values above the cutoff computed
    /// from `scale` (defaults to the matrix's own `σ_max`).
    fn compute(m: &DMatrix<Complex64>, tol: &ToleranceConfig, scale: Option<f64>) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows == 0 || cols == 0 {
            return Ok(Self {
                u: DMatrix::zeros(rows, 0),
                s: Vec::new(),
                v: DMatrix::zeros(cols, 0),
                rank: 0,
            });
        }
        let a = to_faer(m);
        let svd = a.svd().map_err(|_| LabError::SvdFailed)?;
        let u = from_faer(svd.U());
        let v = from_faer(svd.V());
        let sd = svd.S().column_vector();
        let s: Vec<f64> = (0..rows.min(cols)).map(|k| sd[k].re).collect();
        let sigma_max = scale.unwrap_or_else(|| s.first().copied().unwrap_or(0.0));
        let cutoff = tol.rank_cutoff(rows, cols, sigma_max);
        let rank = if sigma_max > 0.0 { s.iter().filter(|&&x| x > cutoff).count() } else { 0 };
        Ok(Self { u, s, v, rank })
    }

    fn u_r(&self) -> DMatrix<Complex64> {
        self.u.columns(0, self.rank).into_owned()
    }

    fn v_r(&self) -> DMatrix<Complex64> {
        self.v.columns(0, self.rank).into_owned()
    }
}

fn to_faer(m: &DMatrix<Complex64>) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub(crate) fn svd(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Svd> {
    svd_scaled(t, tol, None)
}

fn svd_scaled(t: &ComplexMatrix, tol: &ToleranceConfig, scale: Option<f64>) -> Result<Svd> {
    t.require_finite()?;
    if let Some(s) = scale {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(LabError::invalid("rank scale must be finite and nonnegative"));
        }
    }
    Svd::compute(t.inner(), tol, scale)
}

/// Descending singular values.
pub fn singular_values(t: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(svd(t, &ToleranceConfig::default())?.s)
}

pub fn numerical_rank(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<usize> {
    Ok(svd(t, tol)?.rank)
}

/// Spectral (operator 2-) norm.
pub fn spectral_norm(t: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(t)?.first().copied().unwrap_or(0.0))
}

/// Moore-Penrose pseudoinverse via a rank-truncated SVD.
pub fn pinv(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<PseudoInverseResult> {
    pinv_impl(t, tol, None)
}

/// Pseudoinverse whose rank cutoff is measured against `scale` instead of
/// `σ_max(T)`. For a computed product `T = AB` pass `‖A‖₂‖B‖₂`: rounding
/// leaves singular values of that size times `ε` behind.
pub fn pinv_scaled(t: &ComplexMatrix, tol: &ToleranceConfig, scale: f64) -> Result<PseudoInverseResult> {
    pinv_impl(t, tol, Some(scale))
}

fn pinv_impl(t: &ComplexMatrix, tol: &ToleranceConfig, scale: Option<f64>) -> Result<PseudoInverseResult> {
    let d = svd_scaled(t, tol, scale)?;
    let (m, n) = t.shape();
    let mut out = DMatrix::<Complex64>::zeros(n, m);
    for k in 0..d.rank {
        let mut w = 1.0 / d.s[k];
        if k == 0 && tol.pinv_fault == PinvFault::LeadingSignFlip {
            w = -w;
        }
        let vk = d.v.column(k);
        let uk = d.u.column(k);
        out += (vk * uk.adjoint()) * Complex64::new(w, 0.0);
    }
    Ok(PseudoInverseResult {
        pinv: ComplexMatrix::from_inner(out),
        singular_values: d.s,
        numerical_rank: d.rank,
    })
}

/// Shorthand for `pinv(t, tol)?.pinv`.
pub fn dagger(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    Ok(pinv(t, tol)?.pinv)
}

/// The four Moore-Penrose residuals `TXT = T`, `XTX = X`, `(XT)* = XT`,
/// `(TX)* = TX`, each divided by the Frobenius norms of the factors in its
/// product (`‖T‖²‖X‖`, `‖T‖‖X‖²`, `‖T‖‖X‖`, `‖T‖‖X‖`).
///
/// This is the scale that floating-point rounding of the products produces,
/// so the values stay comparable across condition numbers.
pub fn mp_residuals(t: &ComplexMatrix, x: &ComplexMatrix) -> [f64; 4] {
    let tx = t * x;
    let xt = x * t;
    let (nt, nx) = (t.frobenius_norm(), x.frobenius_norm());
    let scaled = |r: f64, s: f64| if s > 0.0 { r / s } else { r };
    [
        scaled((&(&tx * t) - t).frobenius_norm(), nt * nt * nx),
        scaled((&(&xt * x) - x).frobenius_norm(), nt * nx * nx),
        scaled((&xt.adjoint() - &xt).frobenius_norm(), nt * nx),
        scaled((&tx.adjoint() - &tx).frobenius_norm(), nt * nx),
    ]
}

/// Plain relative Moore-Penrose residuals `‖A − B‖ / max(1, ‖A‖, ‖B‖)`.
pub fn mp_relative_residuals(t: &ComplexMatrix, x: &ComplexMatrix) -> [f64; 4] {
    let tx = t * x;
    let xt = x * t;
    [
        (&tx * t).relative_distance(t),
        (&xt * x).relative_distance(x),
        xt.adjoint().relative_distance(&xt),
        tx.adjoint().relative_distance(&tx),
    ]
}

/// Tikhonov-regularized inverse `(T*T + sI)⁻¹T*`, solved by LU.
pub fn tikhonov_inverse(t: &ComplexMatrix, s: f64) -> Result<ComplexMatrix> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(LabError::invalid("regularization parameter must be positive"));
    }
    t.require_finite()?;
    let n = t.cols();
    let ts = t.inner().adjoint();
    let gram = &ts * t.inner() + DMatrix::<Complex64>::identity(n, n) * Complex64::new(s, 0.0);
    let x = gram
        .lu()
        .solve(&ts)
        .ok_or_else(|| LabError::invalid("regularized Gram matrix is singular"))?;
    Ok(ComplexMatrix::from_inner(x))
}

/// `(T*T + s_min I)⁻¹T*` for the smallest entry of a strictly decreasing,
/// strictly positive sequence of regularization parameters.
pub fn limit_pinv_oracle(t: &ComplexMatrix, s_values: &[f64]) -> Result<ComplexMatrix> {
    validate_sweep(s_values)?;
    tikhonov_inverse(t, *s_values.last().expect("nonempty"))
}

/// The full trajectory of regularized inverses along an s-sweep.
pub fn limit_pinv_trajectory(t: &ComplexMatrix, s_values: &[f64]) -> Result<Vec<ComplexMatrix>> {
    validate_sweep(s_values)?;
    s_values.iter().map(|&s| tikhonov_inverse(t, s)).collect()
}

fn validate_sweep(s_values: &[f64]) -> Result<()> {
    if s_values.is_empty() {
        return Err(LabError::invalid("s-sweep must be nonempty"));
    }
    if s_values.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(LabError::invalid("s-sweep entries must be strictly positive"));
    }
    if s_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LabError::invalid("s-sweep must be strictly decreasing"));
    }
    Ok(())
}

fn projector_from_basis(basis: &DMatrix<Complex64>, dim: usize) -> SubspaceProjector {
    let p = if basis.ncols() == 0 {
        DMatrix::zeros(dim, dim)
    } else {
        basis * basis.adjoint()
    };
    SubspaceProjector { matrix: ComplexMatrix::from_inner(p), subspace_dim: basis.ncols() }
}

/// `P_{R(T)}` from the left singular vectors above the rank cutoff.
pub fn range_projector(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<SubspaceProjector> {
    let d = svd(t, tol)?;
    Ok(projector_from_basis(&d.u_r(), t.rows()))
}

/// `P_{R(T)}` with the rank cutoff measured against `scale`; see [`pinv_scaled`].
pub fn range_projector_scaled(t: &ComplexMatrix, tol: &ToleranceConfig, scale: f64) -> Result<SubspaceProjector> {
    let d = svd_scaled(t, tol, Some(scale))?;
    Ok(projector_from_basis(&d.u_r(), t.rows()))
}

/// `P_{N(T)} = I − P_{R(T*)}` from the right singular vectors.
pub fn kernel_projector(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<SubspaceProjector> {
    kernel_projector_impl(t, tol, None)
}

/// `P_{N(T)}` with the rank cutoff measured against `scale`; see [`pinv_scaled`].
pub fn kernel_projector_scaled(t: &ComplexMatrix, tol: &ToleranceConfig, scale: f64) -> Result<SubspaceProjector> {
    kernel_projector_impl(t, tol, Some(scale))
}

fn kernel_projector_impl(t: &ComplexMatrix, tol: &ToleranceConfig, scale: Option<f64>) -> Result<SubspaceProjector> {
    let d = svd_scaled(t, tol, scale)?;
    let n = t.cols();
    if d.rank == n {
        return Ok(SubspaceProjector { matrix: ComplexMatrix::zeros(n, n), subspace_dim: 0 });
    }
    let row_space = projector_from_basis(&d.v_r(), n);
    let p = &ComplexMatrix::identity(n) - &row_space.matrix;
    Ok(SubspaceProjector { matrix: p, subspace_dim: n - row_space.subspace_dim })
}

/// Orthonormal basis (as columns) of `R(T)`; may have zero columns.
pub(crate) fn range_basis(
    t: &DMatrix<Complex64>,
    tol: &ToleranceConfig,
    scale: Option<f64>,
) -> Result<DMatrix<Complex64>> {
    Ok(Svd::compute(t, tol, scale)?.u_r())
}

/// Orthonormal basis (as columns) of `N(T)`.
pub(crate) fn kernel_basis(
    t: &DMatrix<Complex64>,
    tol: &ToleranceConfig,
    scale: Option<f64>,
) -> Result<DMatrix<Complex64>> {
    let (rows, cols) = t.shape();
    if rows == 0 {
        return Ok(DMatrix::identity(cols, cols));
    }
    let d = Svd::compute(t, tol, scale)?;
    Ok(d.v.columns(d.rank, cols - d.rank).into_owned())
}

/// `R(A) ⊆ R(B)`: residual `‖(I − P_{R(B)})A‖_F / max(1, ‖A‖_F)`.
pub fn range_included(a: &ComplexMatrix, b: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Verdict> {
    if a.rows() != b.rows() {
        return Err(LabError::shape(
            "range_included",
            format!("{} rows vs {} rows", a.rows(), b.rows()),
        ));
    }
    a.require_finite()?;
    let p = range_projector(b, tol)?;
    let outside = a - &(&p.matrix * a);
    let residual = outside.frobenius_norm() / 1f64.max(a.frobenius_norm());
    Ok(Verdict::within(residual, tol))
}

/// Minimal `c ≥ 0` with `‖A*x‖ ≤ c‖B*x‖` for all `x`, which exists exactly
/// when `R(A) ⊆ R(B)`; it equals `‖B†A‖`. Returns `f64::INFINITY` when the
/// inclusion fails.
pub fn douglas_constant(a: &ComplexMatrix, b: &ComplexMatrix, tol: &ToleranceConfig) -> Result<f64> {
    if !range_included(a, b, tol)?.holds {
        return Ok(f64::INFINITY);
    }
    let factor = &dagger(b, tol)? * a;
    spectral_norm(&factor)
}

/// Checks the majorization `AA* ≤ c²BB*` directly through eigenvalues.
///
/// For the minimal `c` the gap is often a near-total cancellation, so
/// `λ_min` is measured against `s = max(1, ‖c²BB*‖_F + ‖AA*‖_F)` rather than
/// against the gap itself. A range leak of relative size `ℓ` moves `λ_min`
/// by about `−ℓ²s`; the residual `√(max(0, −λ_min/s − 16·m·ε))` undoes the
/// square after removing the eigensolver's rounding floor, which puts it on
/// the same scale as the projector residual of [`range_included`].
pub fn douglas_majorization(a: &ComplexMatrix, b: &ComplexMatrix, c: f64, tol: &ToleranceConfig) -> Result<Verdict> {
    if a.rows() != b.rows() {
        return Err(LabError::shape("douglas_majorization", "row counts differ"));
    }
    if !c.is_finite() || c < 0.0 {
        return Err(LabError::invalid("majorization constant must be finite and nonnegative"));
    }
    let big = (b * &b.adjoint()).scale_real(c * c);
    let small = a * &a.adjoint();
    let scale = 1f64.max(big.frobenius_norm() + small.frobenius_norm());
    let gap = &big - &small;
    let sym = (gap.inner() + gap.inner().adjoint()) * Complex64::new(0.5, 0.0);
    let min_eigenvalue = hermitian_eigenvalues(&sym)?.first().copied().unwrap_or(0.0);
    let floor = 16.0 * a.rows() as f64 * f64::EPSILON;
    let residual = ((-min_eigenvalue / scale) - floor).max(0.0).sqrt();
    Ok(Verdict::new(residual <= tol.psd_tol, residual))
}

/// Rank scale for a computed product of `factors` matrices whose spectral
/// norms multiply to `norm_product`. Rounding grows with the number of
/// factors, so the scale is widened by `4·factors`.
pub fn product_scale(norm_product: f64, factors: usize) -> f64 {
    if norm_product > 0.0 {
        norm_product * 4.0 * factors.max(1) as f64
    } else {
        1.0
    }
}

/// Does `B` map `N(A)` into itself? Residual `‖P⊥ B P‖_F / max(1, ‖B‖_F)`
/// with `P = P_{N(A)}`.
pub fn subspace_invariant(
    b: &ComplexMatrix,
    kernel_of: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<Verdict> {
    let n = b.require_square("subspace_invariant")?;
    if kernel_of.cols() != n {
        return Err(LabError::shape(
            "subspace_invariant",
            format!("operator is {n}x{n} but kernel lives in C^{}", kernel_of.cols()),
        ));
    }
    let p = kernel_projector(kernel_of, tol)?.matrix;
    let p_perp = &ComplexMatrix::identity(n) - &p;
    let leak = &(&p_perp * b) * &p;
    let residual = leak.frobenius_norm() / 1f64.max(b.frobenius_norm());
    Ok(Verdict::within(residual, tol))
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.require_square("commutator")?;
    if b.shape() != (n, n) {
        return Err(LabError::shape("commutator", format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(&(a * b) - &(b * a))
}

/// Relative size of a commutator: `‖[A,B]‖ / max(1, ‖AB‖, ‖BA‖)`.
pub fn commutator_residual(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    commutator(a, b)?;
    Ok((a * b).relative_distance(&(b * a)))
}

pub(crate) fn hermitian_eigenvalues(h: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let mut vals = to_faer(h).self_adjoint_eigenvalues(Side::Lower).map_err(|_| LabError::SvdFailed)?;
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Positive semidefiniteness: Hermitian within `residual_tol` and
/// `λ_min((H+H*)/2) ≥ −psd_tol·max(1, ‖H‖_F)`.
pub fn is_psd(h: &ComplexMatrix, tol: &ToleranceConfig) -> Result<PsdVerdict> {
    h.require_square("is_psd")?;
    h.require_finite()?;
    let scale = 1f64.max(h.frobenius_norm());
    let hs = h.adjoint();
    let hermitian_residual = (h - &hs).frobenius_norm() / scale;
    let sym = (h.inner() + hs.inner()) * Complex64::new(0.5, 0.0);
    let min_eigenvalue = hermitian_eigenvalues(&sym)?.first().copied().unwrap_or(0.0);
    let holds = hermitian_residual <= tol.residual_tol && min_eigenvalue >= -tol.psd_tol * scale;
    Ok(PsdVerdict { holds, min_eigenvalue, hermitian_residual })
}

/// Cauchy dual `ω(T) = T(T*T)† = (T†)*`.
pub fn cauchy_dual(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    Ok(dagger(t, tol)?.adjoint())
}

/// `T^k` by repeated squaring; `T⁰ = I`.
pub fn mat_power(t: &ComplexMatrix, k: u32) -> Result<ComplexMatrix> {
    let n = t.require_square("mat_power")?;
    let mut result = ComplexMatrix::identity(n);
    let mut base = t.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    Ok(result)
}

/// Projector equality `‖P − Q‖_F ≤ residual_tol·max(1, ‖P‖, ‖Q‖)`.
pub fn projectors_equal(p: &SubspaceProjector, q: &SubspaceProjector, tol: &ToleranceConfig) -> Verdict {
    Verdict::within(p.matrix.relative_distance(&q.matrix), tol)
}

/// Operator equality under the global relative rule.
pub fn operators_equal(a: &ComplexMatrix, b: &ComplexMatrix, tol: &ToleranceConfig) -> Verdict {
    Verdict::within(a.relative_distance(b), tol)
}

/// Rank cutoff scale at chain step `k`. Each step starts from a computed
/// basis whose rounding error grows with `k`, so the exact-input cutoff
/// is widened by `16(k+1)`.
fn chain_scale(norm: f64, k: usize) -> f64 {
    norm * 16.0 * (k + 1) as f64
}

/// Dimensions of `N(T^k)` for `k = 0..=kmax`, built as
/// `N(T^{k+1}) = N((I − P_{N(T^k)})T)` so that no power is ever formed.
pub(crate) fn kernel_chain(t: &ComplexMatrix, kmax: usize, tol: &ToleranceConfig) -> Result<Vec<usize>> {
    let n = t.require_square("kernel_chain")?;
    let norm = spectral_norm(t)?;
    let mut dims = vec![0];
    let mut basis = DMatrix::<Complex64>::zeros(n, 0);
    for k in 0..kmax {
        let p = if basis.ncols() == 0 { DMatrix::zeros(n, n) } else { &basis * basis.adjoint() };
        let m = (DMatrix::identity(n, n) - p) * t.inner();
        basis = kernel_basis(&m, tol, Some(chain_scale(norm, k)))?;
        dims.push(basis.ncols());
    }
    Ok(dims)
}

/// Orthonormal bases of `R(T^k)` for `k = 0..=kmax`, built as
/// `R(T^{k+1}) = T·R(T^k)`.
pub(crate) fn range_chain(
    t: &ComplexMatrix,
    kmax: usize,
    tol: &ToleranceConfig,
) -> Result<Vec<DMatrix<Complex64>>> {
    let n = t.require_square("range_chain")?;
    let norm = spectral_norm(t)?;
    let mut bases = vec![DMatrix::<Complex64>::identity(n, n)];
    for k in 0..kmax {
        let image = t.inner() * &bases[k];
        let next = if image.ncols() == 0 { image } else { range_basis(&image, tol, Some(chain_scale(norm, k)))? };
        bases.push(next);
    }
    Ok(bases)
}
