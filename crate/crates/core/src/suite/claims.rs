//! Claim checkers. Each takes a trial input, the class index `n` and the
//! tolerances, and either declares the trial vacuous (hypothesis false) or
//! scores it.

use std::collections::BTreeMap;

use super::{Source, TrialInput};
use crate::classes::{Analysis, RouteVerdict};
use crate::error::{LabError, Result};
use crate::generators::Family::{self, *};
use crate::linalg::{self, Verdict};
use crate::matrix::ComplexMatrix;
use crate::tolerance::ToleranceConfig;

pub type Check = fn(&TrialInput, u32, &ToleranceConfig) -> Result<Outcome>;

pub struct Claim {
    pub id: &'static str,
    pub statement: &'static str,
    /// Runs once per `n ∈ 1..=n_max`.
    pub indexed: bool,
    /// Draws use the ensemble condition cap instead of [`super::POWER_CLAIM_CAP`].
    pub full_condition: bool,
    /// Hypothesis satisfiers beyond the engineered families are unknown.
    pub open_question: bool,
    pub sources: Vec<Source>,
    pub check: Check,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// The hypothesis failed numerically; nothing was asserted.
    Vacuous,
    Scored(Score),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub pass: bool,
    /// Largest residual among the identities asserted to hold.
    pub worst: f64,
    /// The trial attains the bound in the statement.
    pub tight: bool,
    pub residuals: BTreeMap<String, f64>,
}

impl Default for Score {
    fn default() -> Self {
        Self { pass: true, worst: 0.0, tight: false, residuals: BTreeMap::new() }
    }
}

impl Score {
    pub fn new() -> Self {
        Self::default()
    }

    /// Informational value; non-finite values are dropped.
    pub fn note(&mut self, name: impl Into<String>, value: f64) {
        if value.is_finite() {
            self.residuals.insert(name.into(), value);
        }
    }

    /// Asserts that `v` holds.
    pub fn require(&mut self, name: impl Into<String>, v: Verdict) {
        self.note(name, v.residual);
        if v.residual.is_finite() {
            self.worst = self.worst.max(v.residual);
        }
        self.pass &= v.holds;
    }

    /// Asserts a discrete condition.
    pub fn require_that(&mut self, name: impl Into<String>, ok: bool) {
        self.note(name, if ok { 0.0 } else { 1.0 });
        self.pass &= ok;
    }

    /// Asserts that every route reaches the same boolean.
    pub fn agree(&mut self, name: &str, routes: &[(&str, Verdict)]) {
        for (route, v) in routes {
            self.note(format!("{name}.{route}"), v.residual);
            if v.holds && v.residual.is_finite() {
                self.worst = self.worst.max(v.residual);
            }
        }
        let ok = routes.windows(2).all(|w| w[0].1.holds == w[1].1.holds);
        self.note(format!("{name}.agree"), if ok { 0.0 } else { 1.0 });
        self.pass &= ok;
    }

    fn done(self) -> Result<Outcome> {
        Ok(Outcome::Scored(self))
    }
}

fn both(a: Verdict, b: Verdict) -> Verdict {
    Verdict::new(a.holds && b.holds, a.residual.max(b.residual))
}

fn any(vs: &[Verdict]) -> bool {
    vs.iter().any(|v| v.holds)
}

/// Collapses a multi-route predicate, failing the trial on disagreement.
fn decide(rv: RouteVerdict) -> Result<Verdict> {
    let rv = rv.unanimous()?;
    let residual = if rv.holds() { rv.routes.iter().map(|r| r.residual).fold(0.0, f64::max) } else { rv.residual() };
    Ok(Verdict::new(rv.holds(), residual))
}

fn routes(rv: &RouteVerdict) -> Vec<(&'static str, Verdict)> {
    rv.routes.iter().map(|r| (r.name, Verdict::new(r.holds, r.residual))).collect()
}

fn eq(a: &ComplexMatrix, b: &ComplexMatrix, tol: &ToleranceConfig) -> Verdict {
    linalg::operators_equal(a, b, tol)
}

fn comm(a: &ComplexMatrix, b: &ComplexMatrix, tol: &ToleranceConfig) -> Verdict {
    eq(&(a * b), &(b * a), tol)
}

/// `R(A) ⊆ R(P)` for an orthogonal projector `P`.
fn inside(a: &ComplexMatrix, p: &ComplexMatrix, tol: &ToleranceConfig) -> Verdict {
    let outside = a - &(p * a);
    Verdict::within(outside.frobenius_norm() / 1f64.max(a.frobenius_norm()), tol)
}

/// `B` maps the subspace with projector `P` into itself.
fn invariant(b: &ComplexMatrix, p: &ComplexMatrix, tol: &ToleranceConfig) -> Verdict {
    let p_perp = &ComplexMatrix::identity(p.rows()) - p;
    let leak = &(&p_perp * b) * p;
    Verdict::within(leak.frobenius_norm() / 1f64.max(b.frobenius_norm()), tol)
}

fn psd(h: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Verdict> {
    let v = linalg::is_psd(h, tol)?;
    let neg = (-v.min_eigenvalue).max(0.0) / 1f64.max(h.frobenius_norm());
    Ok(Verdict::new(v.holds, neg.max(v.hermitian_residual)))
}

/// Rounding scale of a computed `Tⁱ` given `‖T‖₂`.
fn power_scale(norm: f64, i: u32) -> f64 {
    linalg::product_scale(norm.powi(i as i32), i as usize)
}

fn analysis(t: &ComplexMatrix, tol: &ToleranceConfig, n: u32) -> Result<Analysis> {
    Analysis::with_max_power(t, tol, 2 * n as usize + 2)
}

fn ep(a: &Analysis) -> Result<Verdict> {
    decide(a.ep_routes())
}

fn sd(a: &Analysis) -> Result<Verdict> {
    decide(a.sd_routes())
}

fn hep(a: &Analysis) -> Result<Verdict> {
    decide(a.hypo_ep_routes()?)
}

fn nep(a: &Analysis, n: u32) -> Result<Verdict> {
    decide(a.n_ep_routes(n as usize))
}

fn nhep(a: &Analysis, n: u32) -> Result<Verdict> {
    decide(a.n_hypo_ep_routes(n as usize))
}

fn power_analysis(t: &ComplexMatrix, n: u32, tol: &ToleranceConfig) -> Result<Analysis> {
    Analysis::of_power(t, n as usize, tol, 2)
}

fn partner<'a>(m: &'a Option<ComplexMatrix>, what: &str) -> Result<&'a ComplexMatrix> {
    m.as_ref().ok_or_else(|| LabError::invalid(format!("trial input lacks {what}")))
}

/// `U*MU`.
fn conj(u: &ComplexMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    &(&u.adjoint() * m) * u
}

fn mp_identities(input: &TrialInput, _n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let t = &input.t;
    let adj = t.adjoint();
    let p = linalg::pinv(t, tol)?;
    let x = &p.pinv;
    let mut s = Score::new();
    let names = ["txt=t", "xtx=x", "xt_hermitian", "tx_hermitian"];
    for (name, r) in names.iter().zip(linalg::mp_residuals(t, x)) {
        s.require(*name, Verdict::within(r, tol));
    }
    let range_t = linalg::range_projector(t, tol)?;
    let range_x = linalg::range_projector(x, tol)?;
    s.require("tx=p_range_t", eq(&(t * x), &range_t.matrix, tol));
    s.require("xt=p_range_x", eq(&(x * t), &range_x.matrix, tol));
    s.require("range_x=range_t*", linalg::projectors_equal(&range_x, &linalg::range_projector(&adj, tol)?, tol));
    s.require(
        "kernel_x=kernel_t*",
        linalg::projectors_equal(&linalg::kernel_projector(x, tol)?, &linalg::kernel_projector(&adj, tol)?, tol),
    );
    s.require("t*tx=t*", eq(&(&(&adj * t) * x), &adj, tol));
    s.require("xtt*=t*", eq(&(&(x * t) * &adj), &adj, tol));
    s.agree("partial_isometry", &[("tt*t=t", eq(&(&(t * &adj) * t), t, tol)), ("x=t*", eq(x, &adj, tol))]);

    // Tikhonov limit, only where the regularized solve's rounding floor
    // stays far below the truncation error being measured.
    let r = p.numerical_rank;
    if r > 0 && p.singular_values[0] / p.singular_values[r - 1] <= 1e2 {
        let sr2 = p.singular_values[r - 1].powi(2);
        let sweep = [1e-2 * sr2, 1e-3 * sr2, 1e-4 * sr2];
        let xn = x.frobenius_norm();
        let errs: Vec<f64> = linalg::limit_pinv_trajectory(t, &sweep)?
            .iter()
            .map(|m| (m - x).frobenius_norm() / xn)
            .collect();
        for (k, (&e, &sv)) in errs.iter().zip(&sweep).enumerate() {
            s.note(format!("tikhonov_error_{k}"), e);
            s.require_that(format!("tikhonov_bound_{k}"), e <= 1.5 * sv / sr2 + 1e-7);
        }
        s.require_that("tikhonov_decreasing", errs.windows(2).all(|w| w[1] < w[0]));
    }
    s.done()
}

fn sd_unitary_invariance(input: &TrialInput, _n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let u = partner(&input.u, "a unitary")?;
    let a = Analysis::with_max_power(&input.t, tol, 1)?;
    let b = Analysis::with_max_power(&conj(u, &input.t), tol, 1)?;
    let mut s = Score::new();
    s.agree("sd", &[("t", sd(&a)?), ("u*tu", sd(&b)?)]);
    s.require("omega_conjugates", eq(b.cauchy_dual(), &conj(u, a.cauchy_dual()), tol));
    s.require("dagger_conjugates", eq(b.dagger(), &conj(u, a.dagger()), tol));
    s.done()
}

fn normal_iff_ep_sd(input: &TrialInput, _n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = Analysis::with_max_power(&input.t, tol, 1)?;
    let mut s = Score::new();
    s.agree("normal_iff_ep_and_sd", &[("normal", a.normal()), ("ep_and_sd", both(ep(&a)?, sd(&a)?))]);
    s.done()
}

fn quasinormal_implies_sd(input: &TrialInput, _n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = Analysis::with_max_power(&input.t, tol, 1)?;
    let h = a.quasi_normal();
    if !h.holds {
        return Ok(Outcome::Vacuous);
    }
    let mut s = Score::new();
    s.note("hypothesis.quasi_normal", h.residual);
    s.require("sd", sd(&a)?);
    s.done()
}

fn quasinormal_powers_sd(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = Analysis::with_max_power(&input.t, tol, 1)?;
    let h = a.quasi_normal();
    if !h.holds {
        return Ok(Outcome::Vacuous);
    }
    let mut s = Score::new();
    s.note("hypothesis.quasi_normal", h.residual);
    s.require("sd_of_power", sd(&power_analysis(&input.t, n, tol)?)?);
    s.done()
}

fn reverse_order_law(input: &TrialInput, _n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let (sm, t) = (partner(&input.s, "a left factor")?, &input.t);
    let st = sm * t;
    let scale = linalg::spectral_norm(sm)? * linalg::spectral_norm(t)?;
    let st_dag = linalg::pinv_scaled(&st, tol, linalg::product_scale(scale, 2))?.pinv;
    let (s_dag, t_dag) = (linalg::dagger(sm, tol)?, linalg::dagger(t, tol)?);
    let (s_adj, t_adj) = (sm.adjoint(), t.adjoint());

    let law = eq(&st_dag, &(&t_dag * &s_dag), tol);
    let ranges = both(
        inside(&(&(t * &t_adj) * &s_adj), &linalg::range_projector(&s_adj, tol)?.matrix, tol),
        inside(&(&s_adj * &st), &linalg::range_projector(t, tol)?.matrix, tol),
    );
    let kernels = both(
        invariant(&(&s_adj * sm), &linalg::kernel_projector(&t_adj, tol)?.matrix, tol),
        invariant(&(t * &t_adj), &linalg::kernel_projector(sm, tol)?.matrix, tol),
    );
    let dual = eq(&st_dag.adjoint(), &(&s_dag.adjoint() * &t_dag.adjoint()), tol);
    let mut s = Score::new();
    s.agree(
        "reverse_order",
        &[("pinv_law", law), ("range_conditions", ranges), ("kernel_invariance", kernels), ("cauchy_dual_law", dual)],
    );
    s.done()
}

fn omega_power(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let t = &input.t;
    let norm = linalg::spectral_norm(t)?;
    let (gram, cogram) = (&t.adjoint() * t, t * &t.adjoint());
    let mut s = Score::new();
    for i in 1..n {
        let ti = linalg::mat_power(t, i)?;
        let sc = power_scale(norm, i);
        let k_adj = linalg::kernel_projector_scaled(&ti.adjoint(), tol, sc)?;
        let k = linalg::kernel_projector_scaled(&ti, tol, sc)?;
        let h = both(invariant(&gram, &k_adj.matrix, tol), invariant(&cogram, &k.matrix, tol));
        if !h.holds {
            return Ok(Outcome::Vacuous);
        }
        s.note(format!("hypothesis.{i}"), h.residual);
    }
    let omega = linalg::cauchy_dual(t, tol)?;
    for i in 1..=n {
        let ti = linalg::mat_power(t, i)?;
        let lhs = linalg::pinv_scaled(&ti, tol, power_scale(norm, i))?.pinv.adjoint();
        s.require(format!("omega_power_{i}"), eq(&lhs, &linalg::mat_power(&omega, i)?, tol));
    }
    s.done()
}

fn lemma_ranges(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let t = &input.t;
    let p = linalg::pinv(t, tol)?;
    let norm = p.singular_values[0];
    let dag_norm = if p.numerical_rank > 0 { 1.0 / p.singular_values[p.numerical_rank - 1] } else { 1.0 };
    let tn = linalg::mat_power(t, n)?;
    let sc = power_scale(norm, n);
    let with_dag = GappedRange::of(&(&tn * &p.pinv), tol, sc * dag_norm)?;
    let plain = GappedRange::of(&tn, tol, sc)?;
    let with_adj = GappedRange::of(&(&tn * &t.adjoint()), tol, sc * norm.max(f64::MIN_POSITIVE))?;
    let mut s = Score::new();
    s.require("range_tn_dagger=range_tn", with_dag.equals(&plain, tol));
    s.require("range_tn=range_tn_adjoint", plain.equals(&with_adj, tol));
    s.done()
}

/// Range projector of a computed product with its rounding sensitivity
/// `ε·scale/σ_r`: a perturbation of size `ε·scale` turns the range by at most
/// that much when the smallest kept singular value is `σ_r`.
struct GappedRange {
    projector: linalg::SubspaceProjector,
    sensitivity: f64,
}

impl GappedRange {
    fn of(m: &ComplexMatrix, tol: &ToleranceConfig, scale: f64) -> Result<Self> {
        let projector = linalg::range_projector_scaled(m, tol, scale)?;
        let r = projector.subspace_dim;
        let sensitivity = if r > 0 {
            let sigma = linalg::singular_values(m)?;
            8.0 * f64::EPSILON * scale / sigma[r - 1]
        } else {
            0.0
        };
        Ok(Self { projector, sensitivity })
    }

    fn equals(&self, other: &Self, tol: &ToleranceConfig) -> Verdict {
        let v = linalg::projectors_equal(&self.projector, &other.projector, tol);
        let allowance = tol.residual_tol + self.sensitivity + other.sensitivity;
        Verdict::new(v.residual <= allowance, v.residual)
    }
}

fn n_ep_range_characterization(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = analysis(&input.t, tol, n)?;
    let mut s = Score::new();
    s.agree("n_ep", &routes(&a.n_ep_routes(n as usize)));
    s.done()
}

fn n_ep_chain(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = analysis(&input.t, tol, n)?;
    let h = nep(&a, n)?;
    if !h.holds {
        return Ok(Outcome::Vacuous);
    }
    let mut s = Score::new();
    s.note("hypothesis.n_ep", h.residual);
    s.require("n_plus_1_ep", nep(&a, n + 1)?);
    s.done()
}

fn power_ep_implies_n_ep(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let h = ep(&power_analysis(&input.t, n, tol)?)?;
    if !h.holds {
        return Ok(Outcome::Vacuous);
    }
    let mut s = Score::new();
    s.note("hypothesis.power_ep", h.residual);
    s.require("n_ep", nep(&analysis(&input.t, tol, n)?, n)?);
    s.done()
}

fn sd_n_ep_equivalences(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = analysis(&input.t, tol, n)?;
    let h = sd(&a)?;
    if !h.holds {
        return Ok(Outcome::Vacuous);
    }
    let mut s = Score::new();
    s.note("hypothesis.sd", h.residual);
    s.agree(
        "under_sd",
        &[
            ("n_ep", nep(&a, n)?),
            ("power_ep", ep(&power_analysis(&input.t, n, tol)?)?),
            ("n_normal", a.n_normal(n as usize)),
        ],
    );
    s.done()
}

fn n_ep_identities(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = analysis(&input.t, tol, n)?;
    let (t, d) = (a.matrix(), a.dagger());
    let tn = a.power(n as usize).into_owned();
    let tn1 = a.power(n as usize + 1).into_owned();
    let powers = both(eq(&tn, &(d * &tn1), tol), eq(&tn, &(&tn1 * d), tol));
    let q = (d * &tn).adjoint();
    let r = &tn * d;
    let projectors = both(eq(&(&(t * d) * &q), &q, tol), eq(&(&(d * t) * &r), &r, tol));
    let mut s = Score::new();
    s.agree("n_ep", &[("definition", nep(&a, n)?), ("power_identities", powers), ("projector_identities", projectors)]);
    s.done()
}

fn ep_power_ranges(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = analysis(&input.t, tol, n)?;
    let (is_ep, is_nep) = (ep(&a)?, nep(&a, n)?);
    if !is_ep.holds && !is_nep.holds {
        return Ok(Outcome::Vacuous);
    }
    let t = a.matrix();
    let norm = linalg::spectral_norm(t)?;
    let dag_norm = linalg::spectral_norm(a.dagger())?.max(f64::MIN_POSITIVE);
    let proj = |m: &ComplexMatrix, sc: f64| linalg::range_projector_scaled(m, tol, sc);
    let power = |k: u32| -> Result<(linalg::SubspaceProjector, linalg::SubspaceProjector)> {
        let tk = a.power(k as usize);
        let sc = power_scale(norm, k);
        Ok((proj(&tk, sc)?, proj(&(&*tk * a.dagger()), sc * dag_norm)?))
    };
    let mut s = Score::new();
    let (p_n, p_n_dag) = power(n)?;
    if is_ep.holds {
        s.require("ep.range_tn_dagger=range_tn", linalg::projectors_equal(&p_n_dag, &p_n, tol));
        // For n = 1 the second equality would read R(T) = R(I), false for
        // every singular EP operator; it is only asserted from n = 2 on.
        if n >= 2 {
            let (p_prev, _) = power(n - 1)?;
            s.require("ep.range_tn=range_tn_minus_1", linalg::projectors_equal(&p_n, &p_prev, tol));
        }
    }
    if is_nep.holds {
        for k in 0..=2 {
            let (p_m, p_m_dag) = power(n + k)?;
            s.require(format!("n_ep.k{k}.range_t_n_k_dagger=range_tn"), linalg::projectors_equal(&p_m_dag, &p_n, tol));
            s.require(format!("n_ep.k{k}.range_t_n_k=range_tn"), linalg::projectors_equal(&p_m, &p_n, tol));
        }
    }
    s.done()
}

fn n_ep_ascent_descent(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = analysis(&input.t, tol, n)?;
    let h = nep(&a, n)?;
    if !h.holds {
        return Ok(Outcome::Vacuous);
    }
    let (asc, dsc) = (a.ascent()?, a.descent()?);
    let mut s = Score::new();
    s.note("hypothesis.n_ep", h.residual);
    s.note("ascent", asc as f64);
    s.note("descent", dsc as f64);
    s.require_that("ascent_le_n", asc <= n as usize);
    s.require_that("descent_le_n", dsc <= n as usize);
    s.tight = asc == n as usize;
    s.done()
}

fn n_ep_regular_invertible(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = analysis(&input.t, tol, n)?;
    let (h1, h2) = (nep(&a, n)?, a.regular()?);
    if !(h1.holds && h2.holds) {
        return Ok(Outcome::Vacuous);
    }
    let mut s = Score::new();
    s.note("hypothesis.n_ep", h1.residual);
    s.note("hypothesis.regular", h2.residual);
    s.require_that("invertible", a.invertible());
    s.done()
}

fn n_normal_implies_n_ep(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = analysis(&input.t, tol, n)?;
    let h = a.n_normal(n as usize);
    if !h.holds {
        return Ok(Outcome::Vacuous);
    }
    let mut s = Score::new();
    s.note("hypothesis.n_normal", h.residual);
    s.require("n_ep", nep(&a, n)?);
    s.done()
}

fn n_ep_positivity(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    // Both sides are invariant under T -> cT with c > 0. Unit norm keeps the
    // products above the absolute floor of the PSD test.
    let norm = linalg::spectral_norm(&input.t)?;
    let t = if norm > 0.0 { input.t.scale_real(1.0 / norm) } else { input.t.clone() };
    let a = analysis(&t, tol, n)?;
    let h = nep(&a, n)?;
    if !h.holds {
        return Ok(Outcome::Vacuous);
    }
    let even = a.power(2 * n as usize).into_owned();
    let odd = &*a.power(2 * n as usize - 1) * a.cauchy_dual();
    let mut s = Score::new();
    s.note("hypothesis.n_ep", h.residual);
    s.agree("positivity", &[("t_2n", psd(&even, tol)?), ("t_2n_minus_1_omega", psd(&odd, tol)?)]);
    s.done()
}

fn hep_equivalences(input: &TrialInput, _n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = Analysis::with_max_power(&input.t, tol, 4)?;
    let (t, d, adj) = (a.matrix(), a.dagger(), a.adjoint());
    let mut rs = routes(&a.hypo_ep_routes()?);
    let dt = d * t;
    let mut powers = Verdict::new(true, 0.0);
    for k in 1..=4u32 {
        powers = both(powers, eq(&dt, &(&linalg::mat_power(d, k)? * &*a.power(k as usize)), tol));
    }
    rs.push(("dagger_power_identities", powers));
    // ‖T*x‖ ≤ c‖Tx‖: Douglas pair A = T, B = T*, minimal c = ‖(T*)†T‖.
    let c = linalg::spectral_norm(&(a.cauchy_dual() * t))?;
    rs.push(("douglas_majorization", linalg::douglas_majorization(t, adj, c, tol)?));
    let constant = linalg::douglas_constant(t, adj, tol)?;
    rs.push(("douglas_constant_finite", Verdict::new(constant.is_finite(), 0.0)));
    let mut s = Score::new();
    s.note("douglas_constant", constant);
    s.agree("hep", &rs);
    s.done()
}

fn hep_commutator_iff_ep(input: &TrialInput, _n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = Analysis::with_max_power(&input.t, tol, 1)?;
    let h = hep(&a)?;
    if !h.holds {
        return Ok(Outcome::Vacuous);
    }
    let (t, d, adj) = (a.matrix(), a.dagger(), a.adjoint());
    let c = comm(&(t * d), &(t + adj), tol);
    let mut s = Score::new();
    s.note("hypothesis.hep", h.residual);
    s.agree("under_hep", &[("commutator", c), ("ep", ep(&a)?)]);
    s.done()
}

fn commutator_implies_hep(input: &TrialInput, _n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = Analysis::with_max_power(&input.t, tol, 1)?;
    let (t, d, adj) = (a.matrix(), a.dagger(), a.adjoint());
    let h = comm(&(d * t), &(t + adj), tol);
    if !h.holds {
        return Ok(Outcome::Vacuous);
    }
    let mut s = Score::new();
    s.note("hypothesis.commutator", h.residual);
    s.require("hep", hep(&a)?);
    s.done()
}

fn n_hep_characterization(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = analysis(&input.t, tol, n)?;
    let (t, d, adj) = (a.matrix(), a.dagger(), a.adjoint());
    let tn = a.power(n as usize).into_owned();
    let tn1 = a.power(n as usize + 1).into_owned();
    let tn_adj = tn.adjoint();
    let mut rs = routes(&a.n_hypo_ep_routes(n as usize));
    rs.push(("dagger_sandwich", eq(&(&tn * d), &(&(d * &tn1) * d), tol)));
    rs.push(("adjoint_identity", eq(&tn_adj, &(&(&tn_adj * d) * t), tol)));
    // ‖T*ⁿx‖ ≤ c‖Tx‖ (B = T*) and ‖T*ⁿx‖ ≤ c‖ω(T)x‖ (B = T†).
    let c_t = linalg::spectral_norm(&(a.cauchy_dual() * &tn))?;
    let c_omega = linalg::spectral_norm(&tn1)?;
    rs.push(("douglas_t", linalg::douglas_majorization(&tn, adj, c_t, tol)?));
    rs.push(("douglas_omega", linalg::douglas_majorization(&tn, d, c_omega, tol)?));
    let k_t = linalg::douglas_constant(&tn, adj, tol)?;
    let k_omega = linalg::douglas_constant(&tn, d, tol)?;
    rs.push(("douglas_constant_t_finite", Verdict::new(k_t.is_finite(), 0.0)));
    rs.push(("douglas_constant_omega_finite", Verdict::new(k_omega.is_finite(), 0.0)));
    let mut s = Score::new();
    s.note("douglas_constant_t", k_t);
    s.note("douglas_constant_omega", k_omega);
    s.agree("n_hep", &rs);
    s.done()
}

fn power_hep_implies_n_hep(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let h = hep(&power_analysis(&input.t, n, tol)?)?;
    if !h.holds {
        return Ok(Outcome::Vacuous);
    }
    let mut s = Score::new();
    s.note("hypothesis.power_hep", h.residual);
    s.require("n_hep", nhep(&analysis(&input.t, tol, n)?, n)?);
    s.done()
}

fn commutator_implies_n_hep(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = analysis(&input.t, tol, n)?;
    let (t, d, adj) = (a.matrix(), a.dagger(), a.adjoint());
    let tn = a.power(n as usize);
    let dt = d * t;
    let h = [comm(&dt, &(&*tn + d), tol), comm(&dt, &(&*tn + adj), tol)];
    if !any(&h) {
        return Ok(Outcome::Vacuous);
    }
    let mut s = Score::new();
    s.note("hypothesis.with_dagger", h[0].residual);
    s.note("hypothesis.with_adjoint", h[1].residual);
    s.require("n_hep", nhep(&a, n)?);
    s.done()
}

fn n_hep_commutator_implies_n_ep(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let a = analysis(&input.t, tol, n)?;
    let base = nhep(&a, n)?;
    if !base.holds {
        return Ok(Outcome::Vacuous);
    }
    let (t, d, adj) = (a.matrix(), a.dagger(), a.adjoint());
    let tn = a.power(n as usize);
    let td = t * d;
    let h = [comm(&td, &(&*tn + d), tol), comm(&td, &(&*tn + adj), tol), comm(t, &(&*tn * d), tol)];
    if !any(&h) {
        return Ok(Outcome::Vacuous);
    }
    let mut s = Score::new();
    s.note("hypothesis.n_hep", base.residual);
    for (name, v) in ["range_projector_dagger", "range_projector_adjoint", "t_with_tn_dagger"].iter().zip(&h) {
        s.note(format!("hypothesis.{name}"), v.residual);
    }
    s.require("n_ep", nep(&a, n)?);
    s.done()
}

fn n_ep_reducing_and_unitary(input: &TrialInput, n: u32, tol: &ToleranceConfig) -> Result<Outcome> {
    let t = &input.t;
    let a = analysis(t, tol, n)?;
    let mut s = Score::new();
    if let Some(u) = &input.u {
        let b = analysis(&conj(u, t), tol, n)?;
        s.agree("n_ep", &[("t", nep(&a, n)?), ("u*tu", nep(&b, n)?)]);
        s.agree("n_hep", &[("t", nhep(&a, n)?), ("u*tu", nhep(&b, n)?)]);
    } else {
        let other = partner(&input.s, "a second block")?;
        let b = analysis(other, tol, n)?;
        let sum = analysis(&other.direct_sum(t), tol, n)?;
        s.agree("n_ep", &[("direct_sum", nep(&sum, n)?), ("blocks", both(nep(&b, n)?, nep(&a, n)?))]);
        s.agree("n_hep", &[("direct_sum", nhep(&sum, n)?), ("blocks", both(nhep(&b, n)?, nhep(&a, n)?))]);
    }
    s.done()
}

fn singles(families: &[Family]) -> Vec<Source> {
    families.iter().map(|&f| Source::Single(f)).collect()
}

fn mixed() -> Vec<Source> {
    singles(&Family::ALL)
}

/// All registered claims, ordered by id.
pub fn registry() -> Vec<Claim> {
    let claim = |id, statement, indexed, sources, check: Check| Claim {
        id,
        statement,
        indexed,
        full_condition: false,
        open_question: false,
        sources,
        check,
    };
    let mut claims = vec![
        Claim {
            full_condition: true,
            ..claim(
                "mp_identities",
                "TT†T=T, T†TT†=T†, (TT†)*=TT†, (T†T)*=T†T; TT†=P_R(T), T†T=P_R(T†); R(T†)=R(T*), N(T†)=N(T*); \
                 T*TT†=T†TT*=T*; T partial isometry ⟺ T*=T†; T†=lim_(s→0+) (T*T+sI)⁻¹T*",
                false,
                singles(&[
                    General,
                    Invertible,
                    RankOne,
                    PartialIsometry,
                    NonNormalEp,
                    NilpotentNep,
                    WeightedShift,
                    PaperShift,
                    Normal,
                    Projection,
                    EpInvolution,
                    NHepNonNep,
                    Paper2x2,
                ]),
                mp_identities,
            )
        },
        claim(
            "sd_unitary_invariance",
            "S=U*TU with U unitary: T∈(SD) ⟺ S∈(SD); ω(S)=U*ω(T)U",
            false,
            [RankOne, PartialIsometry, Normal, NonNormalEp, WeightedShift, General, NilpotentNep, Paper2x2, Projection, PaperShift]
                .into_iter()
                .map(Source::Conjugated)
                .collect(),
            sd_unitary_invariance,
        ),
        claim("normal_iff_ep_sd", "T normal ⟺ T∈(EP)∩(SD)", false, mixed(), normal_iff_ep_sd),
        claim("quasinormal_implies_sd", "[T, T*T]=0 ⟹ T∈(SD)", false, mixed(), quasinormal_implies_sd),
        claim("quasinormal_powers_sd", "[T, T*T]=0 ⟹ Tⁿ∈(SD)", true, mixed(), quasinormal_powers_sd),
        claim(
            "reverse_order_law",
            "(ST)†=T†S† ⟺ R(TT*S*)⊂R(S*) ∧ R(S*ST)⊂R(T) ⟺ S*S(N(T*))⊂N(T*) ∧ TT*(N(S))⊂N(S) ⟺ ω(ST)=ω(S)ω(T)",
            false,
            vec![
                Source::CompatiblePair,
                Source::RandomPair,
                Source::Pair(Projection, Projection),
                Source::Pair(Unitary, General),
                Source::Pair(NonNormalEp, NonNormalEp),
                Source::Pair(PartialIsometry, PartialIsometry),
            ],
            reverse_order_law,
        ),
        claim(
            "omega_power",
            "T*T(N(T*ⁱ))⊂N(T*ⁱ) ∧ TT*(N(Tⁱ))⊂N(Tⁱ) for i<n ⟹ ω(Tⁱ)=ω(T)ⁱ for i≤n",
            true,
            mixed(),
            omega_power,
        ),
        claim("lemma_ranges", "R(TⁿT†)=R(Tⁿ)=R(TⁿT*)", true, mixed(), lemma_ranges),
        claim(
            "n_ep_range_characterization",
            "TⁿT†=T†Tⁿ ⟺ R(Tⁿ)⊂R(T*) ∧ R(T*ⁿ)⊂R(T)",
            true,
            mixed(),
            n_ep_range_characterization,
        ),
        claim("n_ep_chain", "T∈(n-EP) ⟹ T∈((n+1)-EP)", true, mixed(), n_ep_chain),
        claim("power_ep_implies_n_ep", "Tⁿ∈(EP) ⟹ T∈(n-EP)", true, mixed(), power_ep_implies_n_ep),
        claim(
            "sd_n_ep_equivalences",
            "T∈(SD) ⟹ (T∈(n-EP) ⟺ Tⁿ∈(EP) ⟺ [Tⁿ,T*]=0)",
            true,
            mixed(),
            sd_n_ep_equivalences,
        ),
        claim(
            "n_ep_identities",
            "T∈(n-EP) ⟺ Tⁿ=T†Tⁿ⁺¹=Tⁿ⁺¹T† ⟺ TT†(T†Tⁿ)*=(T†Tⁿ)* ∧ T†T(TⁿT†)=TⁿT†",
            true,
            mixed(),
            n_ep_identities,
        ),
        claim(
            "ep_power_ranges",
            "T∈(EP) ⟹ R(TⁿT†)=R(Tⁿ)=R(Tⁿ⁻¹) (n≥2); T∈(n-EP) ⟹ R(Tⁿ⁺ᵏT†)=R(Tⁿ)=R(Tⁿ⁺ᵏ) (k=0,1,2)",
            true,
            mixed(),
            ep_power_ranges,
        ),
        claim("n_ep_ascent_descent", "T∈(n-EP) ⟹ asc(T)≤n ∧ dsc(T)≤n", true, mixed(), n_ep_ascent_descent),
        claim(
            "n_ep_regular_invertible",
            "T∈(n-EP) ∧ N(T)⊂R(Tᵏ) ∀k ⟹ T invertible",
            true,
            mixed(),
            n_ep_regular_invertible,
        ),
        claim("n_normal_implies_n_ep", "[Tⁿ,T*]=0 ⟹ T∈(n-EP)", true, mixed(), n_normal_implies_n_ep),
        claim("n_ep_positivity", "T∈(n-EP) ⟹ (T²ⁿ≥0 ⟺ T²ⁿ⁻¹ω(T)≥0)", true, mixed(), n_ep_positivity),
        claim(
            "hep_equivalences",
            "R(T)⊂R(T*) ⟺ [T†,T]≥0 ⟺ T†=T†²T ⟺ T†T=T†ᵏTᵏ (k≤4) ⟺ ∃c: ‖T*x‖≤c‖Tx‖",
            false,
            mixed(),
            hep_equivalences,
        ),
        claim("hep_commutator_iff_ep", "T∈(HEP) ⟹ ([TT†,T+T*]=0 ⟺ T∈(EP))", false, mixed(), hep_commutator_iff_ep),
        Claim {
            open_question: true,
            ..claim("commutator_implies_hep", "[T†T,T+T*]=0 ⟹ T∈(HEP)", false, mixed(), commutator_implies_hep)
        },
        claim(
            "n_hep_characterization",
            "R(Tⁿ)⊂R(T*) ⟺ Tⁿ=T†Tⁿ⁺¹ ⟺ TⁿT†=T†Tⁿ⁺¹T† ⟺ T*ⁿ=T*ⁿT†T ⟺ ∃c: ‖T*ⁿx‖≤c‖Tx‖ ⟺ ∃c: ‖T*ⁿx‖≤c‖ω(T)x‖",
            true,
            mixed(),
            n_hep_characterization,
        ),
        claim("power_hep_implies_n_hep", "Tⁿ∈(HEP) ⟹ T∈(n-HEP)", true, mixed(), power_hep_implies_n_hep),
        Claim {
            open_question: true,
            ..claim(
                "commutator_implies_n_hep",
                "[T†T,Tⁿ+T†]=0 ∨ [T†T,Tⁿ+T*]=0 ⟹ T∈(n-HEP)",
                true,
                mixed(),
                commutator_implies_n_hep,
            )
        },
        Claim {
            open_question: true,
            ..claim(
                "n_hep_commutator_implies_n_ep",
                "T∈(n-HEP) ∧ ([TT†,Tⁿ+T†]=0 ∨ [TT†,Tⁿ+T*]=0 ∨ [T,TⁿT†]=0) ⟹ T∈(n-EP)",
                true,
                mixed(),
                n_hep_commutator_implies_n_ep,
            )
        },
        claim(
            "n_ep_reducing_and_unitary",
            "T∈(n-EP) ⟺ U*TU∈(n-EP); S⊕T∈(n-EP) ⟺ S,T∈(n-EP); likewise for (n-HEP)",
            true,
            Family::ALL
                .into_iter()
                .map(Source::Conjugated)
                .chain([
                    Source::Pair(NilpotentNep, Unitary),
                    Source::Pair(NonNormalEp, General),
                    Source::Pair(PaperShift, NilpotentNep),
                    Source::Pair(RankOne, Normal),
                    Source::Pair(NHepNonNep, NonNormalEp),
                    Source::Pair(EpInvolution, PartialIsometry),
                ])
                .collect(),
            n_ep_reducing_and_unitary,
        ),
    ];
    claims.sort_by_key(|c| c.id);
    claims
}

/// Looks up a claim by id.
pub fn find(id: &str) -> Option<Claim> {
    registry().into_iter().find(|c| c.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::matrix::basis_vector;

    fn scored(o: Outcome) -> Score {
        match o {
            Outcome::Scored(s) => s,
            Outcome::Vacuous => panic!("expected a scored trial"),
        }
    }

    #[test]
    fn range_characterization_on_reference_operators() {
        let tol = ToleranceConfig::default();
        let e = generators::rank_one(&basis_vector(3, 1), &basis_vector(3, 2)).unwrap();
        let inputs = [generators::paper_2x2(), e, generators::paper_shift_example(2.0, 9).unwrap()];
        // (membership in 1-EP, in 2-EP) per operator.
        let expected = [(true, true), (false, true), (false, true)];
        for (t, (one, two)) in inputs.iter().zip(expected) {
            for (n, want) in [(1, one), (2, two)] {
                let s = scored(n_ep_range_characterization(&TrialInput::single(t.clone()), n, &tol).unwrap());
                assert!(s.pass);
                let a = analysis(t, &tol, n).unwrap();
                assert_eq!(nep(&a, n).unwrap().holds, want);
            }
        }
    }

    #[test]
    fn ascent_bound_is_tight_for_nilpotent_blocks() {
        let tol = ToleranceConfig::default();
        for n in 2..=3 {
            let t = generators::nilpotent_nep(5, n, 11).unwrap();
            let s = scored(n_ep_ascent_descent(&TrialInput::single(t), n as u32, &tol).unwrap());
            assert!(s.pass && s.tight);
        }
    }

    #[test]
    fn reverse_order_detects_violations() {
        let tol = ToleranceConfig::default();
        let (sm, t) = generators::random_pair(4, 3).unwrap();
        let s = scored(reverse_order_law(&TrialInput { t, s: Some(sm), u: None }, 1, &tol).unwrap());
        assert!(s.pass);
        assert_eq!(s.residuals["reverse_order.agree"], 0.0);
        let (sm, t) = generators::compatible_pair(4, 3).unwrap();
        let s = scored(reverse_order_law(&TrialInput { t, s: Some(sm), u: None }, 1, &tol).unwrap());
        assert!(s.pass && s.residuals["reverse_order.pinv_law"] < 1e-12);
    }

    #[test]
    fn quasinormal_claim_is_vacuous_off_hypothesis() {
        let tol = ToleranceConfig::default();
        let t = generators::weighted_shift_trunc(&[1.0, 2.0], 3).unwrap();
        assert_eq!(quasinormal_implies_sd(&TrialInput::single(t), 1, &tol).unwrap(), Outcome::Vacuous);
    }

    #[test]
    fn broken_pinv_fails_mp_identities() {
        let tol = ToleranceConfig::default().with_fault(crate::tolerance::PinvFault::LeadingSignFlip);
        let t = generators::random_general(4, 2, 5, 10.0).unwrap();
        assert!(!scored(mp_identities(&TrialInput::single(t), 1, &tol).unwrap()).pass);
    }
}
