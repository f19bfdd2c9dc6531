//! Structured and seeded random matrix families.
//!
//! Every random draw is a pure function of its arguments: a `u64` seed feeds
//! a `ChaCha8Rng`, so identical `(family, dim, n, seed)` yields bit-identical
//! matrices on every platform.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::classes::ClassLabel;
use crate::error::{LabError, Result};
use crate::linalg;
use crate::matrix::{c, ComplexMatrix};
use crate::tolerance::ToleranceConfig;

pub const DEFAULT_CONDITION_CAP: f64 = 1e6;
const MAX_RETRIES: usize = 16;

/// Parameters of a seeded ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub master_seed: u64,
    pub dims: Vec<usize>,
    pub trials_per_family: usize,
    /// Family names to draw from; claims only use the intersection with
    /// their own populations.
    pub families: Vec<String>,
    pub n_max: u32,
    pub condition_cap: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            master_seed: 42,
            dims: (2..=10).collect(),
            trials_per_family: 50,
            families: Family::ALL.iter().map(|f| f.name().to_string()).collect(),
            n_max: 4,
            condition_cap: DEFAULT_CONDITION_CAP,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(LabError::invalid("dims must be a nonempty list of positive integers"));
        }
        if self.n_max == 0 {
            return Err(LabError::invalid("n_max must be at least 1"));
        }
        if !(self.condition_cap > 1.0) || !self.condition_cap.is_finite() {
            return Err(LabError::invalid("condition_cap must be a finite real > 1"));
        }
        for name in &self.families {
            Family::from_name(name)?;
        }
        Ok(())
    }

    pub fn family_enabled(&self, family: Family) -> bool {
        self.families.iter().any(|f| f == family.name())
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-mixes a sequence of words into a child seed.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix64(master), |acc, &p| mix64(acc ^ mix64(p)))
}

/// FNV-1a hash, used to turn names into seed words.
pub fn name_hash(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

fn haar(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let (mut q, r) = gaussian_matrix(dim, dim, rng).qr().unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

fn diag(entries: &[Complex64]) -> DMatrix<Complex64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries))
}

fn conj_by(u: &DMatrix<Complex64>, core: &DMatrix<Complex64>) -> ComplexMatrix {
    ComplexMatrix::from_inner(u * core * u.adjoint())
}

fn check_rank(dim: usize, rank: usize) -> Result<()> {
    if dim == 0 {
        return Err(LabError::invalid("dimension must be positive"));
    }
    if rank > dim {
        return Err(LabError::invalid(format!("rank {rank} exceeds dimension {dim}")));
    }
    Ok(())
}

/// The rank-one operator `x⊗y : z ↦ ⟨z,y⟩x`, i.e. `x·y*`.
pub fn rank_one(x: &[Complex64], y: &[Complex64]) -> Result<ComplexMatrix> {
    if x.len() != y.len() {
        return Err(LabError::shape("rank_one", format!("vectors of length {} and {}", x.len(), y.len())));
    }
    let zero = |v: &[Complex64]| v.iter().all(|z| z.norm() == 0.0);
    if x.is_empty() || zero(x) || zero(y) {
        return Err(LabError::invalid("rank_one needs nonzero vectors"));
    }
    let m = ComplexMatrix::outer(x, y);
    m.require_finite()?;
    Ok(m)
}

/// `S e₁ = αe₁`, `S e_{2p} = αe_{2p+1}`, `S e_{2p+1} = 0` on `C^N`, `N` odd.
pub fn paper_shift_example(alpha: f64, n: usize) -> Result<ComplexMatrix> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(LabError::invalid("alpha must be a nonzero finite real"));
    }
    if n < 3 || n % 2 == 0 {
        return Err(LabError::invalid(format!("N must be an odd integer >= 3, got {n}")));
    }
    let mut s = ComplexMatrix::zeros(n, n);
    s.set(0, 0, c(alpha, 0.0));
    // 1-based e_{2p} ↦ e_{2p+1} is 0-based column 2p−1 ↦ row 2p
    for col in (1..n).step_by(2) {
        s.set(col + 1, col, c(alpha, 0.0));
    }
    Ok(s)
}

/// Truncated forward shift `S e_k = α_k e_{k+1}`, `S e_N = 0`.
pub fn weighted_shift_trunc(alpha: &[f64], n: usize) -> Result<ComplexMatrix> {
    if n == 0 || alpha.len() + 1 != n {
        return Err(LabError::invalid(format!("expected {} weights for N={n}, got {}", n.saturating_sub(1), alpha.len())));
    }
    if alpha.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
        return Err(LabError::invalid("weights must be positive and finite"));
    }
    let mut s = ComplexMatrix::zeros(n, n);
    for (k, &a) in alpha.iter().enumerate() {
        s.set(k + 1, k, c(a, 0.0));
    }
    Ok(s)
}

pub fn paper_2x2() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[0.0, -2.0]])
}

pub fn random_unitary(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    check_rank(dim, 0)?;
    Ok(ComplexMatrix::from_inner(haar(dim, &mut rng(seed))))
}

/// Eigenvalue modulus: zero with probability 1/5, otherwise in `[0.5, 2]`,
/// so that singular draws occur and nonzero eigenvalues stay well separated
/// from zero.
fn spectral_modulus(r: &mut ChaCha8Rng) -> f64 {
    if r.random_bool(0.2) {
        0.0
    } else {
        r.random_range(0.5..2.0)
    }
}

/// `U·diag(z)·U*` with uniformly distributed eigenvalue phases.
pub fn random_normal(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    check_rank(dim, 0)?;
    let mut r = rng(seed);
    let u = haar(dim, &mut r);
    let z: Vec<_> = (0..dim)
        .map(|_| Complex64::from_polar(spectral_modulus(&mut r), r.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    Ok(conj_by(&u, &diag(&z)))
}

/// `U·diag(λ)·U*` with real eigenvalues of random sign.
pub fn random_hermitian(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    check_rank(dim, 0)?;
    let mut r = rng(seed);
    let u = haar(dim, &mut r);
    let z: Vec<_> = (0..dim)
        .map(|_| {
            let sign = if r.random_bool(0.5) { 1.0 } else { -1.0 };
            c(sign * spectral_modulus(&mut r), 0.0)
        })
        .collect();
    Ok(conj_by(&u, &diag(&z)))
}

fn unit_block(dim: usize, rank: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |i, j| if i == j && i < rank { Complex64::ONE } else { Complex64::ZERO })
}

/// Orthogonal projection `U(I_r ⊕ 0)U*`.
pub fn random_projection(dim: usize, rank: usize, seed: u64) -> Result<ComplexMatrix> {
    check_rank(dim, rank)?;
    let u = haar(dim, &mut rng(seed));
    Ok(conj_by(&u, &unit_block(dim, rank)))
}

/// `U(I_r ⊕ 0)V*` with independent Haar factors.
pub fn random_partial_isometry(dim: usize, rank: usize, seed: u64) -> Result<ComplexMatrix> {
    check_rank(dim, rank)?;
    let mut r = rng(seed);
    let u = haar(dim, &mut r);
    let v = haar(dim, &mut r);
    Ok(ComplexMatrix::from_inner(&u * unit_block(dim, rank) * v.adjoint()))
}

/// Singular values `1 = σ₁ ≥ … ≥ σ_r ≥ 1/condition_cap`.
fn capped_spectrum(rank: usize, cap: f64, r: &mut ChaCha8Rng) -> Vec<f64> {
    let mut s: Vec<f64> = (0..rank).map(|k| if k == 0 { 1.0 } else { cap.powf(-r.random::<f64>()) }).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `U·Σ·V*` with rank `r` and `σ_max/σ_min ≤ condition_cap`.
pub fn random_general(dim: usize, rank: usize, seed: u64, condition_cap: f64) -> Result<ComplexMatrix> {
    check_rank(dim, rank)?;
    if !(condition_cap >= 1.0) || !condition_cap.is_finite() {
        return Err(LabError::invalid("condition_cap must be a finite real >= 1"));
    }
    let mut r = rng(seed);
    let u = haar(dim, &mut r);
    let v = haar(dim, &mut r);
    let mut s = vec![Complex64::ZERO; dim];
    for (k, sigma) in capped_spectrum(rank, condition_cap, &mut r).into_iter().enumerate() {
        s[k] = c(sigma, 0.0);
    }
    Ok(ComplexMatrix::from_inner(&u * diag(&s) * v.adjoint()))
}

/// `U*(A ⊕ 0)U` with `A` invertible and non-normal, so `R(T) = R(T*)`.
pub fn non_normal_ep(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    non_normal_ep_with_cap(dim, seed, DEFAULT_CONDITION_CAP)
}

pub fn non_normal_ep_with_cap(dim: usize, seed: u64, condition_cap: f64) -> Result<ComplexMatrix> {
    if dim < 2 {
        return Err(LabError::invalid("non_normal_ep needs dim >= 2"));
    }
    let cap = condition_cap.min(1e3);
    for attempt in 0..MAX_RETRIES {
        let s = if attempt == 0 { seed } else { derive_seed(seed, &[attempt as u64]) };
        let mut r = rng(s);
        let k = r.random_range(2..=dim);
        let a = random_general(k, k, r.random(), cap)?;
        let nn = (&(&a.adjoint() * &a) - &(&a * &a.adjoint())).frobenius_norm() / a.frobenius_norm().powi(2);
        if nn < 1e-3 {
            continue;
        }
        let core = a.direct_sum(&ComplexMatrix::zeros(dim - k, dim - k));
        return unitary_conjugate(&core, r.random());
    }
    Err(LabError::GeneratorExhausted { family: "non_normal_ep".into(), attempts: MAX_RETRIES })
}

/// `U*(c·R ⊕ 0)U` with `R² = I` a non-orthogonal reflection: EP, non-normal,
/// and every even power is a positive multiple of a projection.
pub fn ep_involution(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    if dim < 2 {
        return Err(LabError::invalid("ep_involution needs dim >= 2"));
    }
    let mut r = rng(seed);
    let k = r.random_range(2..=dim);
    let x = random_general(k, k, r.random(), 10.0)?;
    let signs: Vec<_> = (0..k).map(|j| c(if j % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
    let xinv = linalg::dagger(&x, &ToleranceConfig::default())?;
    let refl = &(&x * &ComplexMatrix::from_diagonal(&signs)) * &xinv;
    let scale = r.random_range(0.5..2.0);
    let core = refl.scale_real(scale).direct_sum(&ComplexMatrix::zeros(dim - k, dim - k));
    unitary_conjugate(&core, r.random())
}

fn jordan(k: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(k, k, |i, j| if i == j + 1 { Complex64::ONE } else { Complex64::ZERO })
}

/// A nilpotent shift of index `n` plus a unitary block, under unitary
/// conjugation: a partial isometry in `NEP(n) ∖ NEP(n−1)`.
pub fn nilpotent_nep(dim: usize, n: usize, seed: u64) -> Result<ComplexMatrix> {
    if n == 0 || n > dim {
        return Err(LabError::invalid(format!("need 1 <= n <= dim, got n={n}, dim={dim}")));
    }
    let mut r = rng(seed);
    let mut core = jordan(n);
    if dim > n {
        core = core.direct_sum(&ComplexMatrix::from_inner(haar(dim - n, &mut r)));
    }
    unitary_conjugate(&core, r.random())
}

/// `U*(B ⊕ C)U` where `B` is 3×3 with `R(B²) ⊂ R(B*)` but `R(B*²) ⊄ R(B)`
/// and `C` invertible: n-HEP for every `n ≥ 2`, never n-EP.
pub fn n_hep_non_nep(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    if dim < 3 {
        return Err(LabError::invalid("n_hep_non_nep needs dim >= 3"));
    }
    let mut r = rng(seed);
    let draw = |r: &mut ChaCha8Rng| {
        let z = gaussian(r);
        z / z.norm() * r.random_range(0.5..2.0)
    };
    let (a, b) = (draw(&mut r), draw(&mut r));
    let mut block = ComplexMatrix::zeros(3, 3);
    block.set(1, 0, a);
    block.set(1, 1, b);
    block.set(2, 0, Complex64::ONE);
    let core = if dim > 3 { block.direct_sum(&random_general(dim - 3, dim - 3, r.random(), 10.0)?) } else { block };
    unitary_conjugate(&core, r.random())
}

/// `(S, T)` with `(ST)† = T†S†`: `S = UΣ_S W*`, `T = WΣ_T V*`.
pub fn compatible_pair(dim: usize, seed: u64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    check_rank(dim, 0)?;
    let mut r = rng(seed);
    let (u, w, v) = (haar(dim, &mut r), haar(dim, &mut r), haar(dim, &mut r));
    let sigma = |r: &mut ChaCha8Rng| -> Vec<Complex64> {
        (0..dim).map(|_| if r.random_bool(0.3) { Complex64::ZERO } else { c(r.random_range(0.1..1.0), 0.0) }).collect()
    };
    let (ss, st) = (sigma(&mut r), sigma(&mut r));
    let s = ComplexMatrix::from_inner(&u * diag(&ss) * w.adjoint());
    let t = ComplexMatrix::from_inner(&w * diag(&st) * v.adjoint());
    Ok((s, t))
}

/// Independent rank-deficient pair; the reverse-order law generically fails.
pub fn random_pair(dim: usize, seed: u64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    check_rank(dim, 0)?;
    let mut r = rng(seed);
    let rs = r.random_range(1..=dim);
    let rt = r.random_range(1..=dim);
    Ok((random_general(dim, rs, r.random(), 1e3)?, random_general(dim, rt, r.random(), 1e3)?))
}

/// `U*TU` for a Haar unitary drawn from `seed`.
pub fn unitary_conjugate(t: &ComplexMatrix, seed: u64) -> Result<ComplexMatrix> {
    let n = t.require_square("unitary_conjugate")?;
    let u = haar(n, &mut rng(seed));
    Ok(ComplexMatrix::from_inner(u.adjoint() * t.inner() * &u))
}

pub fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.direct_sum(b)
}

/// Named generator families addressable from the ensemble and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Paper2x2,
    PaperShift,
    RankOne,
    RankOneEp,
    WeightedShift,
    Normal,
    Hermitian,
    Unitary,
    Projection,
    PartialIsometry,
    General,
    Invertible,
    NonNormalEp,
    EpInvolution,
    NilpotentNep,
    NHepNonNep,
}

/// Memberships guaranteed by construction for one `(family, dim, n)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Advertised {
    pub memberships: Vec<(ClassLabel, bool)>,
    pub ascent: Option<usize>,
    pub descent: Option<usize>,
}

impl Family {
    pub const ALL: [Family; 16] = [
        Family::Paper2x2,
        Family::PaperShift,
        Family::RankOne,
        Family::RankOneEp,
        Family::WeightedShift,
        Family::Normal,
        Family::Hermitian,
        Family::Unitary,
        Family::Projection,
        Family::PartialIsometry,
        Family::General,
        Family::Invertible,
        Family::NonNormalEp,
        Family::EpInvolution,
        Family::NilpotentNep,
        Family::NHepNonNep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Paper2x2 => "paper_2x2",
            Family::PaperShift => "paper_shift",
            Family::RankOne => "rank_one",
            Family::RankOneEp => "rank_one_ep",
            Family::WeightedShift => "weighted_shift",
            Family::Normal => "random_normal",
            Family::Hermitian => "random_hermitian",
            Family::Unitary => "random_unitary",
            Family::Projection => "random_projection",
            Family::PartialIsometry => "random_partial_isometry",
            Family::General => "random_general",
            Family::Invertible => "random_invertible",
            Family::NonNormalEp => "non_normal_ep",
            Family::EpInvolution => "ep_involution",
            Family::NilpotentNep => "nilpotent_nep",
            Family::NHepNonNep => "n_hep_non_nep",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| LabError::invalid(format!("unknown family {name:?}")))
    }

    pub fn accepts(self, dim: usize) -> bool {
        match self {
            Family::Paper2x2 => dim == 2,
            Family::PaperShift => dim >= 3 && dim % 2 == 1,
            Family::NHepNonNep => dim >= 3,
            Family::RankOne | Family::RankOneEp | Family::WeightedShift | Family::NonNormalEp | Family::EpInvolution => {
                dim >= 2
            }
            _ => dim >= 1,
        }
    }

    /// Nilpotency index used by `nilpotent_nep` for a hint `n`.
    pub fn nilpotent_index(dim: usize, n: u32) -> usize {
        (n.max(1) as usize).min(dim)
    }

    pub fn draw(self, dim: usize, n: u32, seed: u64, condition_cap: f64) -> Result<ComplexMatrix> {
        if !self.accepts(dim) {
            return Err(LabError::invalid(format!("family {} does not accept dim {dim}", self.name())));
        }
        let mut r = rng(seed);
        match self {
            Family::Paper2x2 => Ok(paper_2x2()),
            Family::PaperShift => paper_shift_example(r.random_range(0.5..3.0), dim),
            Family::RankOne => {
                let x: Vec<_> = (0..dim).map(|_| gaussian(&mut r)).collect();
                let y: Vec<_> = (0..dim).map(|_| gaussian(&mut r)).collect();
                rank_one(&x, &y)
            }
            Family::RankOneEp => {
                let x: Vec<_> = (0..dim).map(|_| gaussian(&mut r)).collect();
                let alpha = gaussian(&mut r) + c(0.1, 0.0);
                let y: Vec<_> = x.iter().map(|z| z * alpha).collect();
                rank_one(&x, &y)
            }
            Family::WeightedShift => {
                let w: Vec<f64> = (1..dim).map(|_| r.random_range(0.5..2.0)).collect();
                weighted_shift_trunc(&w, dim)
            }
            Family::Normal => random_normal(dim, seed),
            Family::Hermitian => random_hermitian(dim, seed),
            Family::Unitary => random_unitary(dim, seed),
            Family::Projection => random_projection(dim, r.random_range(1..=dim), r.random()),
            Family::PartialIsometry => random_partial_isometry(dim, r.random_range(1..=dim), r.random()),
            Family::General => random_general(dim, r.random_range(1..=dim), r.random(), condition_cap),
            Family::Invertible => random_general(dim, dim, seed, condition_cap),
            Family::NonNormalEp => non_normal_ep_with_cap(dim, seed, condition_cap),
            Family::EpInvolution => ep_involution(dim, seed),
            Family::NilpotentNep => nilpotent_nep(dim, Self::nilpotent_index(dim, n), seed),
            Family::NHepNonNep => n_hep_non_nep(dim, seed),
        }
    }

    /// Memberships every draw satisfies, for class indices `1..=n_max`.
    pub fn advertised(self, dim: usize, n: u32, n_max: u32) -> Advertised {
        use ClassLabel::*;
        let mut m = Vec::new();
        let all_n = |m: &mut Vec<(ClassLabel, bool)>, f: &dyn Fn(u32) -> bool| {
            for k in 1..=n_max {
                m.push((NEp(k), f(k)));
                m.push((NHypoEp(k), f(k)));
            }
        };
        let normal_like = |m: &mut Vec<(ClassLabel, bool)>| {
            m.extend([(Normal, true), (QuasiNormal, true), (Hyponormal, true), (Ep, true), (Sd, true), (HypoEp, true)]);
            for k in 1..=n_max {
                m.push((NNormal(k), true));
            }
        };
        let mut adv = Advertised::default();
        match self {
            Family::Paper2x2 => {
                m.extend([(Ep, true), (Sd, false), (Normal, false), (HypoEp, true), (Regular, true)]);
                all_n(&mut m, &|_| true);
                adv.ascent = Some(0);
                adv.descent = Some(0);
            }
            Family::PaperShift => {
                m.extend([(Ep, false), (HypoEp, false), (Regular, false), (Normal, false)]);
                all_n(&mut m, &|k| k >= 2);
                adv.ascent = Some(2);
                adv.descent = Some(2);
            }
            Family::RankOne => m.push((Sd, true)),
            Family::RankOneEp => {
                m.extend([(Sd, true), (Ep, true), (HypoEp, true)]);
                all_n(&mut m, &|_| true);
            }
            Family::WeightedShift => {
                m.extend([(Ep, false), (Normal, false), (Regular, false)]);
                all_n(&mut m, &|k| k as usize >= dim);
                adv.ascent = Some(dim);
                adv.descent = Some(dim);
            }
            Family::Normal | Family::Hermitian => {
                normal_like(&mut m);
                all_n(&mut m, &|_| true);
            }
            Family::Unitary => {
                normal_like(&mut m);
                m.extend([(PartialIsometry, true), (Regular, true)]);
                all_n(&mut m, &|_| true);
                adv.ascent = Some(0);
                adv.descent = Some(0);
            }
            Family::Projection => {
                normal_like(&mut m);
                m.push((PartialIsometry, true));
                all_n(&mut m, &|_| true);
            }
            Family::PartialIsometry => m.extend([(PartialIsometry, true), (Sd, true)]),
            Family::General => {}
            Family::Invertible => {
                m.extend([(Ep, true), (HypoEp, true), (Regular, true)]);
                all_n(&mut m, &|_| true);
                adv.ascent = Some(0);
                adv.descent = Some(0);
            }
            Family::NonNormalEp | Family::EpInvolution => {
                m.extend([(Ep, true), (HypoEp, true), (Normal, false), (Sd, false)]);
                all_n(&mut m, &|_| true);
            }
            Family::NilpotentNep => {
                let idx = Self::nilpotent_index(dim, n);
                m.extend([(PartialIsometry, true), (Sd, true)]);
                all_n(&mut m, &|k| k as usize >= idx);
                adv.ascent = Some(idx);
                adv.descent = Some(idx);
            }
            Family::NHepNonNep => {
                m.extend([(Ep, false), (HypoEp, false)]);
                for k in 1..=n_max {
                    m.push((NEp(k), false));
                    m.push((NHypoEp(k), k >= 2));
                }
                adv.ascent = Some(2);
                adv.descent = Some(2);
            }
        }
        adv.memberships = m;
        adv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::classify;
    use crate::matrix::basis_vector;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn rank_one_cases() {
        let e1 = basis_vector(3, 1);
        let p = rank_one(&e1, &e1).unwrap();
        assert!((&p * &p).relative_distance(&p) == 0.0 && p.adjoint() == p);
        assert!(rank_one(&e1, &[Complex64::ZERO; 3]).is_err());
        assert!(rank_one(&e1, &basis_vector(2, 1)).is_err());
    }

    #[test]
    fn paper_shift_structure() {
        let s = paper_shift_example(2.0, 9).unwrap();
        let s2 = &s * &s;
        let expect = ComplexMatrix::outer(&basis_vector(9, 1), &basis_vector(9, 1)).scale_real(4.0);
        assert_eq!(s2, expect);
        let d = linalg::dagger(&s, &tol()).unwrap();
        assert!(d.relative_distance(&s.adjoint().scale_real(0.25)) < 1e-14);
        assert!(paper_shift_example(2.0, 8).is_err());
        assert!(paper_shift_example(0.0, 9).is_err());
        assert!(paper_shift_example(1.0, 1).is_err());
    }

    #[test]
    fn weighted_shift_validation() {
        assert!(weighted_shift_trunc(&[1.0, -1.0], 3).is_err());
        assert!(weighted_shift_trunc(&[1.0], 3).is_err());
        let s = weighted_shift_trunc(&[1.0, 2.0], 3).unwrap();
        assert_eq!(s.get(2, 1), c(2.0, 0.0));
    }

    #[test]
    fn draws_are_deterministic() {
        for f in Family::ALL {
            for dim in 2..=5 {
                if !f.accepts(dim) {
                    continue;
                }
                let a = f.draw(dim, 2, 99, DEFAULT_CONDITION_CAP).unwrap();
                let b = f.draw(dim, 2, 99, DEFAULT_CONDITION_CAP).unwrap();
                assert_eq!(a.to_row_major(), b.to_row_major(), "{}", f.name());
            }
        }
    }

    #[test]
    fn haar_is_unitary() {
        let u = random_unitary(6, 3).unwrap();
        assert!((&u.adjoint() * &u).relative_distance(&ComplexMatrix::identity(6)) < 1e-14);
    }

    #[test]
    fn general_respects_rank_and_cap() {
        for seed in 0..20 {
            let g = random_general(6, 4, seed, 1e6).unwrap();
            let s = linalg::singular_values(&g).unwrap();
            assert_eq!(linalg::numerical_rank(&g, &tol()).unwrap(), 4);
            assert!(s[0] / s[3] <= 1e6 * (1.0 + 1e-8));
        }
        assert!(random_general(3, 4, 0, 1e6).is_err());
    }

    #[test]
    fn advertised_memberships_hold() {
        for f in Family::ALL {
            for dim in 2..=6 {
                if !f.accepts(dim) {
                    continue;
                }
                for n in 1..=3 {
                    for seed in 0..5 {
                        let t = f.draw(dim, n, seed, DEFAULT_CONDITION_CAP).unwrap();
                        let p = classify(&t, 4, &tol()).unwrap();
                        let adv = f.advertised(dim, n, 4);
                        for (label, want) in adv.memberships {
                            assert_eq!(p.holds(label), want, "{} dim {dim} n {n} seed {seed}: {label}", f.name());
                        }
                        if let Some(a) = adv.ascent {
                            assert_eq!(p.ascent, a, "{} ascent", f.name());
                        }
                        if let Some(d) = adv.descent {
                            assert_eq!(p.descent, d, "{} descent", f.name());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn compatible_pairs_obey_reverse_order() {
        for seed in 0..20 {
            let (s, t) = compatible_pair(4, seed).unwrap();
            let scale = linalg::spectral_norm(&s).unwrap() * linalg::spectral_norm(&t).unwrap();
            let lhs = linalg::pinv_scaled(&(&s * &t), &tol(), scale).unwrap().pinv;
            let rhs = &linalg::dagger(&t, &tol()).unwrap() * &linalg::dagger(&s, &tol()).unwrap();
            assert!(lhs.relative_distance(&rhs) < 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn seed_derivation_differs() {
        assert_ne!(derive_seed(1, &[2]), derive_seed(1, &[3]));
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
        assert_eq!(name_hash("equivEP"), name_hash("equivEP"));
    }

    #[test]
    fn config_validation() {
        let mut cfg = EnsembleConfig::default();
        cfg.validate().unwrap();
        cfg.families.push("nope".into());
        assert!(cfg.validate().is_err());
        let cfg = EnsembleConfig { dims: vec![], ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
