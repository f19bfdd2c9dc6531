//! Class-membership predicates and the full operator profile.
//!
//! Predicates with more than one published characterization evaluate every
//! route and insist that the booleans agree. [`Analysis`] exposes the raw
//! route verdicts; the free functions turn a disagreement into
//! [`LabError::RouteDisagreement`].

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LabError, Result};
use crate::linalg::{self, PsdVerdict, SubspaceProjector, Verdict};
use crate::matrix::ComplexMatrix;
use crate::tolerance::ToleranceConfig;

/// Default depth of per-n profiles.
pub const DEFAULT_N_MAX: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    Normal,
    NNormal(u32),
    QuasiNormal,
    Hyponormal,
    PartialIsometry,
    Ep,
    Sd,
    HypoEp,
    NEp(u32),
    NHypoEp(u32),
    Regular,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassLabel::Normal => write!(f, "Normal"),
            ClassLabel::NNormal(n) => write!(f, "NNormal({n})"),
            ClassLabel::QuasiNormal => write!(f, "QuasiNormal"),
            ClassLabel::Hyponormal => write!(f, "Hyponormal"),
            ClassLabel::PartialIsometry => write!(f, "PartialIsometry"),
            ClassLabel::Ep => write!(f, "EP"),
            ClassLabel::Sd => write!(f, "SD"),
            ClassLabel::HypoEp => write!(f, "HEP"),
            ClassLabel::NEp(n) => write!(f, "NEP({n})"),
            ClassLabel::NHypoEp(n) => write!(f, "NHEP({n})"),
            ClassLabel::Regular => write!(f, "Regular"),
        }
    }
}

impl FromStr for ClassLabel {
    type Err = LabError;

    /// Accepts the display form (`NEP(2)`) and the compact form (`NEP2`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s.find(|ch: char| ch == '(' || ch.is_ascii_digit()).unwrap_or(s.len());
        let (head, tail) = s.split_at(split);
        let digits = tail.trim_start_matches('(').trim_end_matches(')');
        let n = if digits.is_empty() {
            None
        } else {
            let n: u32 = digits.parse().map_err(|_| LabError::invalid(format!("bad class label {s:?}")))?;
            if n == 0 {
                return Err(LabError::invalid("class index must be at least 1"));
            }
            Some(n)
        };
        let label = match (head.to_ascii_lowercase().as_str(), n) {
            ("normal", None) => ClassLabel::Normal,
            ("nnormal", Some(n)) => ClassLabel::NNormal(n),
            ("quasinormal", None) => ClassLabel::QuasiNormal,
            ("hyponormal", None) => ClassLabel::Hyponormal,
            ("partialisometry" | "pi", None) => ClassLabel::PartialIsometry,
            ("ep", None) => ClassLabel::Ep,
            ("sd", None) => ClassLabel::Sd,
            ("hep" | "hypoep", None) => ClassLabel::HypoEp,
            ("nep", Some(n)) => ClassLabel::NEp(n),
            ("nhep" | "nhypoep", Some(n)) => ClassLabel::NHypoEp(n),
            ("regular", None) => ClassLabel::Regular,
            _ => return Err(LabError::invalid(format!("unknown class label {s:?}"))),
        };
        Ok(label)
    }
}

impl Serialize for ClassLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClassLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One characterization of a class and its numerical outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Route {
    pub name: &'static str,
    pub holds: bool,
    pub residual: f64,
}

impl Route {
    fn new(name: &'static str, v: Verdict) -> Self {
        Self { name, holds: v.holds, residual: v.residual }
    }
}

/// All routes evaluated for one predicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteVerdict {
    pub predicate: String,
    pub routes: Vec<Route>,
}

impl RouteVerdict {
    pub fn agree(&self) -> bool {
        self.routes.windows(2).all(|w| w[0].holds == w[1].holds)
    }

    /// Verdict of the primary (first) route.
    pub fn holds(&self) -> bool {
        self.routes[0].holds
    }

    pub fn residual(&self) -> f64 {
        self.routes[0].residual
    }

    pub fn route(&self, name: &str) -> Option<&Route> {
        self.routes.iter().find(|r| r.name == name)
    }

    pub fn verdict(&self) -> Verdict {
        Verdict::new(self.holds(), self.residual())
    }

    /// Errors unless every route reached the same boolean.
    pub fn unanimous(self) -> Result<Self> {
        if self.agree() {
            Ok(self)
        } else {
            Err(LabError::RouteDisagreement { predicate: self.predicate.clone(), routes: self.describe() })
        }
    }

    pub fn describe(&self) -> String {
        self.routes
            .iter()
            .map(|r| format!("{}={} (residual {:.3e})", r.name, r.holds, r.residual))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

fn psd_route(name: &'static str, v: PsdVerdict, scale: f64) -> Route {
    let neg = (-v.min_eigenvalue).max(0.0) / scale.max(1.0);
    Route { name, holds: v.holds, residual: neg.max(v.hermitian_residual) }
}

/// Cached quantities shared by all predicates on one square operator.
#[derive(Debug, Clone)]
pub struct Analysis {
    tol: ToleranceConfig,
    t: ComplexMatrix,
    adj: ComplexMatrix,
    dag: ComplexMatrix,
    omega: ComplexMatrix,
    rank: usize,
    range_p: SubspaceProjector,
    corange_p: SubspaceProjector,
    powers: Vec<ComplexMatrix>,
}

impl Analysis {
    pub fn new(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Self> {
        Self::with_max_power(t, tol, 2 * DEFAULT_N_MAX as usize + 1)
    }

    /// Caches `T⁰ … T^max_power`; higher powers are computed on demand.
    pub fn with_max_power(t: &ComplexMatrix, tol: &ToleranceConfig, max_power: usize) -> Result<Self> {
        Self::build(t, tol, max_power, None)
    }

    /// Analysis of `Tⁿ` whose rank decisions are measured against the
    /// rounding scale of the computed power (see [`linalg::product_scale`]).
    pub fn of_power(t: &ComplexMatrix, n: usize, tol: &ToleranceConfig, max_power: usize) -> Result<Self> {
        let scale = linalg::product_scale(linalg::spectral_norm(t)?.powi(n as i32), n);
        Self::build(&linalg::mat_power(t, n as u32)?, tol, max_power, Some(scale))
    }

    /// As [`Analysis::with_max_power`] with an explicit rank scale.
    pub fn with_rank_scale(t: &ComplexMatrix, tol: &ToleranceConfig, max_power: usize, scale: f64) -> Result<Self> {
        Self::build(t, tol, max_power, Some(scale))
    }

    fn build(t: &ComplexMatrix, tol: &ToleranceConfig, max_power: usize, scale: Option<f64>) -> Result<Self> {
        t.require_square("Analysis")?;
        t.require_finite()?;
        let adj = t.adjoint();
        let (pinv, range_p, corange_p) = match scale {
            None => (linalg::pinv(t, tol)?, linalg::range_projector(t, tol)?, linalg::range_projector(&adj, tol)?),
            Some(s) => (
                linalg::pinv_scaled(t, tol, s)?,
                linalg::range_projector_scaled(t, tol, s)?,
                linalg::range_projector_scaled(&adj, tol, s)?,
            ),
        };
        let mut powers = vec![ComplexMatrix::identity(t.rows()), t.clone()];
        while powers.len() <= max_power {
            let next = powers.last().expect("nonempty") * t;
            powers.push(next);
        }
        Ok(Self {
            tol: *tol,
            omega: pinv.pinv.adjoint(),
            dag: pinv.pinv,
            rank: pinv.numerical_rank,
            t: t.clone(),
            adj,
            range_p,
            corange_p,
            powers,
        })
    }

    pub fn tol(&self) -> &ToleranceConfig {
        &self.tol
    }
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.t
    }
    pub fn adjoint(&self) -> &ComplexMatrix {
        &self.adj
    }
    pub fn dagger(&self) -> &ComplexMatrix {
        &self.dag
    }
    pub fn cauchy_dual(&self) -> &ComplexMatrix {
        &self.omega
    }
    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn dim(&self) -> usize {
        self.t.rows()
    }
    /// `P_{R(T)}`.
    pub fn range_projector(&self) -> &SubspaceProjector {
        &self.range_p
    }
    /// `P_{R(T*)}`.
    pub fn corange_projector(&self) -> &SubspaceProjector {
        &self.corange_p
    }

    pub fn power(&self, k: usize) -> Cow<'_, ComplexMatrix> {
        match self.powers.get(k) {
            Some(p) => Cow::Borrowed(p),
            None => {
                let mut p = self.powers.last().expect("nonempty").clone();
                for _ in self.powers.len() - 1..k {
                    p = &p * &self.t;
                }
                Cow::Owned(p)
            }
        }
    }

    /// `(T*)^k = (T^k)*`.
    pub fn adj_power(&self, k: usize) -> ComplexMatrix {
        self.power(k).adjoint()
    }

    fn eq(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> Verdict {
        linalg::operators_equal(a, b, &self.tol)
    }

    fn comm(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> Verdict {
        self.eq(&(a * b), &(b * a))
    }

    /// `R(A) ⊆ R(P)` for a cached projector `P`.
    fn inside(&self, a: &ComplexMatrix, p: &SubspaceProjector) -> Verdict {
        let outside = a - &(&p.matrix * a);
        Verdict::within(outside.frobenius_norm() / 1f64.max(a.frobenius_norm()), &self.tol)
    }

    pub fn normal(&self) -> Verdict {
        self.comm(&self.adj, &self.t)
    }

    pub fn n_normal(&self, n: usize) -> Verdict {
        self.comm(&self.power(n), &self.adj)
    }

    pub fn quasi_normal(&self) -> Verdict {
        self.comm(&(&self.adj * &self.t), &self.t)
    }

    pub fn hyponormal(&self) -> Result<PsdVerdict> {
        linalg::is_psd(&linalg::commutator(&self.adj, &self.t)?, &self.tol)
    }

    pub fn partial_isometry_routes(&self) -> RouteVerdict {
        let t = &self.t;
        RouteVerdict {
            predicate: "PartialIsometry".into(),
            routes: vec![
                Route::new("tt*t=t", self.eq(&(&(t * &self.adj) * t), t)),
                Route::new("pinv=adjoint", self.eq(&self.dag, &self.adj)),
            ],
        }
    }

    pub fn ep_routes(&self) -> RouteVerdict {
        RouteVerdict {
            predicate: "EP".into(),
            routes: vec![
                Route::new("range_projectors", linalg::projectors_equal(&self.range_p, &self.corange_p, &self.tol)),
                Route::new("commutator", self.comm(&self.dag, &self.t)),
            ],
        }
    }

    pub fn sd_routes(&self) -> RouteVerdict {
        RouteVerdict {
            predicate: "SD".into(),
            routes: vec![
                Route::new("star_dagger", self.comm(&self.adj, &self.dag)),
                Route::new("cauchy_dual", self.comm(&self.t, &self.omega)),
            ],
        }
    }

    pub fn hypo_ep_routes(&self) -> Result<RouteVerdict> {
        let c = linalg::commutator(&self.dag, &self.t)?;
        let psd = linalg::is_psd(&c, &self.tol)?;
        let dag2t = &(&self.dag * &self.dag) * &self.t;
        Ok(RouteVerdict {
            predicate: "HEP".into(),
            routes: vec![
                Route::new("range_inclusion", self.inside(&self.t, &self.corange_p)),
                psd_route("psd_commutator", psd, c.frobenius_norm()),
                Route::new("dagger_identity", self.eq(&self.dag, &dag2t)),
            ],
        })
    }

    pub fn n_ep_routes(&self, n: usize) -> RouteVerdict {
        let tn = self.power(n);
        let a = self.inside(&tn, &self.corange_p);
        let b = self.inside(&tn.adjoint(), &self.range_p);
        let ranges = Verdict::new(a.holds && b.holds, a.residual.max(b.residual));
        RouteVerdict {
            predicate: format!("NEP({n})"),
            routes: vec![
                Route::new("commutation", self.eq(&(&*tn * &self.dag), &(&self.dag * &*tn))),
                Route::new("range_inclusions", ranges),
            ],
        }
    }

    pub fn n_hypo_ep_routes(&self, n: usize) -> RouteVerdict {
        let tn = self.power(n);
        let next = self.power(n + 1);
        RouteVerdict {
            predicate: format!("NHEP({n})"),
            routes: vec![
                Route::new("range_inclusion", self.inside(&tn, &self.corange_p)),
                Route::new("dagger_identity", self.eq(&tn, &(&self.dag * &*next))),
            ],
        }
    }

    /// `R(T*ⁿ) ⊆ R(T)`, i.e. n-HEP of the adjoint.
    pub fn adjoint_n_hypo_ep(&self, n: usize) -> Verdict {
        self.inside(&self.adj_power(n), &self.range_p)
    }

    pub fn ascent(&self) -> Result<usize> {
        let dims = linalg::kernel_chain(&self.t, self.dim() + 1, &self.tol)?;
        Ok(first_stable(&dims))
    }

    pub fn descent(&self) -> Result<usize> {
        let ranks: Vec<usize> =
            linalg::range_chain(&self.t, self.dim() + 1, &self.tol)?.iter().map(|b| b.ncols()).collect();
        Ok(first_stable(&ranks))
    }

    /// `N(T) ⊆ R(T^k)` for every `k ≤ dim`; the residual is the largest leak.
    pub fn regular(&self) -> Result<Verdict> {
        let n = self.dim();
        let kernel = linalg::kernel_projector(&self.t, &self.tol)?.matrix;
        let mut worst = 0f64;
        for basis in linalg::range_chain(&self.t, n, &self.tol)? {
            let q = ComplexMatrix::from_inner(&basis * basis.adjoint());
            let leak = &kernel - &(&q * &kernel);
            worst = worst.max(leak.frobenius_norm());
        }
        Ok(Verdict::within(worst, &self.tol))
    }

    pub fn invertible(&self) -> bool {
        self.rank == self.dim()
    }
}

fn first_stable(chain: &[usize]) -> usize {
    chain.windows(2).position(|w| w[0] == w[1]).unwrap_or(chain.len() - 1)
}

pub fn is_normal(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Verdict> {
    Ok(Analysis::with_max_power(t, tol, 1)?.normal())
}

pub fn is_n_normal(t: &ComplexMatrix, n: u32, tol: &ToleranceConfig) -> Result<Verdict> {
    check_n(n)?;
    Ok(Analysis::with_max_power(t, tol, n as usize)?.n_normal(n as usize))
}

pub fn is_quasi_normal(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Verdict> {
    Ok(Analysis::with_max_power(t, tol, 1)?.quasi_normal())
}

pub fn is_hyponormal(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<PsdVerdict> {
    Analysis::with_max_power(t, tol, 1)?.hyponormal()
}

/// `TT*T = T`, cross-checked against `T† = T*`. Works for rectangular input.
pub fn is_partial_isometry(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<RouteVerdict> {
    let adj = t.adjoint();
    let dag = linalg::dagger(t, tol)?;
    RouteVerdict {
        predicate: "PartialIsometry".into(),
        routes: vec![
            Route::new("tt*t=t", linalg::operators_equal(&(&(t * &adj) * t), t, tol)),
            Route::new("pinv=adjoint", linalg::operators_equal(&dag, &adj, tol)),
        ],
    }
    .unanimous()
}

pub fn is_ep(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<RouteVerdict> {
    Analysis::with_max_power(t, tol, 1)?.ep_routes().unanimous()
}

pub fn is_sd(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<RouteVerdict> {
    Analysis::with_max_power(t, tol, 1)?.sd_routes().unanimous()
}

pub fn is_hypo_ep(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<RouteVerdict> {
    Analysis::with_max_power(t, tol, 2)?.hypo_ep_routes()?.unanimous()
}

pub fn is_n_ep(t: &ComplexMatrix, n: u32, tol: &ToleranceConfig) -> Result<RouteVerdict> {
    check_n(n)?;
    Analysis::with_max_power(t, tol, n as usize)?.n_ep_routes(n as usize).unanimous()
}

pub fn is_n_hypo_ep(t: &ComplexMatrix, n: u32, tol: &ToleranceConfig) -> Result<RouteVerdict> {
    check_n(n)?;
    Analysis::with_max_power(t, tol, n as usize + 1)?.n_hypo_ep_routes(n as usize).unanimous()
}

pub fn ascent(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<usize> {
    Analysis::with_max_power(t, tol, 1)?.ascent()
}

pub fn descent(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<usize> {
    Analysis::with_max_power(t, tol, 1)?.descent()
}

pub fn is_regular_finite(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Verdict> {
    Analysis::with_max_power(t, tol, 1)?.regular()
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        Err(LabError::invalid("class index n must be at least 1"))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub holds: bool,
    pub residual: f64,
}

impl From<Verdict> for Membership {
    fn from(v: Verdict) -> Self {
        Self { holds: v.holds, residual: v.residual }
    }
}

/// Complete class-membership record of one operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorProfile {
    pub dim: usize,
    pub n_max: u32,
    pub memberships: BTreeMap<ClassLabel, Membership>,
    pub ascent: usize,
    pub descent: usize,
}

impl OperatorProfile {
    pub fn get(&self, label: ClassLabel) -> Option<bool> {
        self.memberships.get(&label).map(|m| m.holds)
    }

    /// Panics when the label is not part of the profile.
    pub fn holds(&self, label: ClassLabel) -> bool {
        self.get(label).unwrap_or_else(|| panic!("{label} not in profile"))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("dim {}  n_max {}  ascent {}  descent {}\n", self.dim, self.n_max, self.ascent, self.descent);
        for (label, m) in &self.memberships {
            let mark = if m.holds { "yes" } else { "no" };
            out.push_str(&format!("  {:<16} {:<4} residual {:.3e}\n", label.to_string(), mark, m.residual));
        }
        out
    }
}

/// Evaluates every predicate up to depth `n_max` and enforces the profile
/// invariants (monotone n-chains, n-EP as two-sided n-HEP, normal ⟹ EP ∧ SD).
pub fn classify(t: &ComplexMatrix, n_max: u32, tol: &ToleranceConfig) -> Result<OperatorProfile> {
    check_n(n_max)?;
    let a = Analysis::with_max_power(t, tol, n_max as usize + 1)?;
    let mut m: BTreeMap<ClassLabel, Membership> = BTreeMap::new();

    let normal = a.normal();
    m.insert(ClassLabel::Normal, normal.into());
    m.insert(ClassLabel::QuasiNormal, a.quasi_normal().into());
    let hypo = a.hyponormal()?;
    m.insert(
        ClassLabel::Hyponormal,
        Membership { holds: hypo.holds, residual: (-hypo.min_eigenvalue).max(0.0).max(hypo.hermitian_residual) },
    );
    m.insert(ClassLabel::PartialIsometry, a.partial_isometry_routes().unanimous()?.verdict().into());
    let ep = a.ep_routes().unanimous()?.verdict();
    m.insert(ClassLabel::Ep, ep.into());
    let sd = a.sd_routes().unanimous()?.verdict();
    m.insert(ClassLabel::Sd, sd.into());
    m.insert(ClassLabel::HypoEp, a.hypo_ep_routes()?.unanimous()?.verdict().into());
    m.insert(ClassLabel::Regular, a.regular()?.into());

    let mut prev: Option<(bool, bool)> = None;
    for n in 1..=n_max {
        let k = n as usize;
        m.insert(ClassLabel::NNormal(n), a.n_normal(k).into());
        let nep = a.n_ep_routes(k).unanimous()?.verdict();
        let nhep = a.n_hypo_ep_routes(k).unanimous()?.verdict();
        let nhep_adj = a.adjoint_n_hypo_ep(k);
        if nep.holds != (nhep.holds && nhep_adj.holds) {
            return Err(LabError::Consistency(format!(
                "NEP({n})={} but NHEP({n})={} and NHEP({n}) of adjoint={} (residuals {:.3e}, {:.3e}, {:.3e})",
                nep.holds, nhep.holds, nhep_adj.holds, nep.residual, nhep.residual, nhep_adj.residual
            )));
        }
        if let Some((prev_nep, prev_nhep)) = prev {
            if prev_nep && !nep.holds {
                return Err(LabError::Consistency(format!(
                    "NEP({}) holds but NEP({n}) fails (residual {:.3e})",
                    n - 1,
                    nep.residual
                )));
            }
            if prev_nhep && !nhep.holds {
                return Err(LabError::Consistency(format!(
                    "NHEP({}) holds but NHEP({n}) fails (residual {:.3e})",
                    n - 1,
                    nhep.residual
                )));
            }
        }
        prev = Some((nep.holds, nhep.holds));
        m.insert(ClassLabel::NEp(n), nep.into());
        m.insert(ClassLabel::NHypoEp(n), nhep.into());
    }

    if normal.holds && !(ep.holds && sd.holds) {
        return Err(LabError::Consistency(format!(
            "normal operator with EP={} SD={} (residuals {:.3e}, {:.3e})",
            ep.holds, sd.holds, ep.residual, sd.residual
        )));
    }

    Ok(OperatorProfile { dim: a.dim(), n_max, memberships: m, ascent: a.ascent()?, descent: a.descent()? })
}
