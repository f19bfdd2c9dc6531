//! Acceptance criteria 1-10, one line each. Runs as a plain binary so the
//! lines are printed whether or not a criterion fails.

use std::process::Command;
use std::time::Instant;

use eplab::classes::{self, classify, Analysis, ClassLabel};
use eplab::generators::{derive_seed, paper_2x2, paper_shift_example, rank_one, Family};
use eplab::linalg;
use eplab::matrix::{basis_vector, ComplexMatrix};
use eplab::suite::{TheoremReport, WitnessKind, POWER_CLAIM_CAP};
use eplab::tolerance::PinvFault;
use eplab::ToleranceConfig;

const MP_TOL: f64 = 1e-10;
const MP_DRAWS: usize = 500;
const MP_SECONDS: f64 = 10.0;
const SUITE_SECONDS: f64 = 60.0;
const SHIFT_TOL: f64 = 1e-12;

struct Line {
    pass: bool,
    detail: String,
}

fn line(pass: bool, detail: impl Into<String>) -> Line {
    Line { pass, detail: detail.into() }
}

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

/// Deterministic draw `k` of a mixed ensemble: dims cycle through `dims`,
/// families through those accepting the dim.
fn ensemble_draw(k: usize, dims: &[usize], cap: f64, salt: u64) -> (Family, usize, ComplexMatrix) {
    let dim = dims[k % dims.len()];
    let fams: Vec<Family> = Family::ALL.into_iter().filter(|f| f.accepts(dim)).collect();
    let family = fams[(k / dims.len()) % fams.len()];
    let seed = derive_seed(salt, &[k as u64]);
    let n_hint = (k % 4) as u32 + 1;
    let t = family.draw(dim, n_hint, seed, cap).expect("ensemble draws succeed");
    (family, dim, t)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eplab"))
}

struct Run {
    code: i32,
    stdout: String,
    seconds: f64,
}

fn run(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = bin().args(args).output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8 output"),
        seconds: start.elapsed().as_secs_f64(),
    }
}

struct MpStats {
    worst_scaled: f64,
    worst_plain: f64,
    rank_deficient: usize,
    seconds: f64,
}

fn mp_stats(tol: &ToleranceConfig) -> MpStats {
    let dims: Vec<usize> = (2..=10).collect();
    let start = Instant::now();
    let mut stats = MpStats { worst_scaled: 0.0, worst_plain: 0.0, rank_deficient: 0, seconds: 0.0 };
    for k in 0..MP_DRAWS {
        let (_, dim, t) = ensemble_draw(k, &dims, 1e6, 0xC1);
        let p = linalg::pinv(&t, tol).unwrap();
        stats.rank_deficient += usize::from(p.numerical_rank < dim);
        for r in linalg::mp_residuals(&t, &p.pinv) {
            stats.worst_scaled = stats.worst_scaled.max(r);
        }
        for r in linalg::mp_relative_residuals(&t, &p.pinv) {
            stats.worst_plain = stats.worst_plain.max(r);
        }
    }
    stats.seconds = start.elapsed().as_secs_f64();
    stats
}

fn criterion_1() -> Line {
    let s = mp_stats(&tol());
    line(
        s.worst_scaled <= MP_TOL && s.seconds < MP_SECONDS,
        format!(
            "{MP_DRAWS} draws over dims 2-10 ({} rank-deficient), worst scaled MP residual {:.2e} (tol {MP_TOL:.0e}), \
             worst plain relative residual {:.2e}, {:.2}s (limit {MP_SECONDS}s)",
            s.rank_deficient, s.worst_scaled, s.worst_plain, s.seconds
        ),
    )
}

fn criterion_2() -> Line {
    let dims: Vec<usize> = (2..=6).collect();
    let (mut pairs, mut disagreements, mut members) = (0usize, 0usize, 0usize);
    for k in 0..600 {
        let (_, _, t) = ensemble_draw(k, &dims, POWER_CLAIM_CAP, 0xC2);
        for n in 1..=4 {
            let rv = classes::is_n_ep(&t, n, &tol()).unwrap();
            pairs += 1;
            members += usize::from(rv.routes.iter().all(|r| r.holds));
            disagreements += usize::from(!rv.agree());
        }
    }
    line(
        pairs >= 2000 && disagreements == 0,
        format!("{pairs} (T, n) pairs with n <= 4, {members} n-EP, {disagreements} route disagreements"),
    )
}

fn criterion_3() -> Line {
    let t = tol();
    let mut bad = Vec::new();
    let expect = |bad: &mut Vec<String>, name: &str, p: &classes::OperatorProfile, label: ClassLabel, want: bool| {
        if p.holds(label) != want {
            bad.push(format!("{name}: {label} should be {want}"));
        }
    };

    let p = classify(&paper_2x2(), 4, &t).unwrap();
    expect(&mut bad, "paper_2x2", &p, ClassLabel::Ep, true);
    expect(&mut bad, "paper_2x2", &p, ClassLabel::Sd, false);
    expect(&mut bad, "paper_2x2", &p, ClassLabel::Normal, false);
    for n in 1..=4 {
        expect(&mut bad, "paper_2x2", &p, ClassLabel::NEp(n), true);
    }
    if (p.ascent, p.descent) != (0, 0) {
        bad.push(format!("paper_2x2: asc/dsc {}/{}", p.ascent, p.descent));
    }

    let e = rank_one(&basis_vector(2, 1), &basis_vector(2, 2)).unwrap();
    let p = classify(&e, 4, &t).unwrap();
    for (label, want) in [
        (ClassLabel::PartialIsometry, true),
        (ClassLabel::Ep, false),
        (ClassLabel::HypoEp, false),
        (ClassLabel::NEp(2), true),
        (ClassLabel::NHypoEp(2), true),
        (ClassLabel::NEp(1), false),
    ] {
        expect(&mut bad, "e1(x)e2", &p, label, want);
    }

    let s = paper_shift_example(2.0, 9).unwrap();
    let p = classify(&s, 4, &t).unwrap();
    expect(&mut bad, "paper_shift", &p, ClassLabel::Ep, false);
    expect(&mut bad, "paper_shift", &p, ClassLabel::NEp(2), true);
    // The nonzero columns of S are orthogonal of length 2, so S/2 is a
    // partial isometry and S† = S*/4.
    let shift_residual = linalg::dagger(&s, &t).unwrap().relative_distance(&s.adjoint().scale_real(0.25));
    if shift_residual > SHIFT_TOL {
        bad.push(format!("paper_shift: pinv residual {shift_residual:.2e}"));
    }
    line(
        bad.is_empty(),
        if bad.is_empty() {
            format!("three reference profiles match, paper_shift pinv = adjoint/4 to {shift_residual:.1e}")
        } else {
            bad.join("; ")
        },
    )
}

fn criterion_4() -> Line {
    let t = tol();
    let (mut normal_ok, mut nnep_ok) = (0usize, 0usize);
    for k in 0..200u64 {
        let dim = 2 + (k as usize % 9);
        let seed = derive_seed(0xC4, &[k]);
        let a = Analysis::new(&Family::Normal.draw(dim, 1, seed, 1e6).unwrap(), &t).unwrap();
        let (n, ep, sd) = (a.normal().holds, a.ep_routes().holds(), a.sd_routes().holds());
        normal_ok += usize::from(n && ep && sd);
        let a = Analysis::new(&Family::NonNormalEp.draw(dim, 1, seed, 1e6).unwrap(), &t).unwrap();
        let (n, ep, sd) = (a.normal().holds, a.ep_routes().holds(), a.sd_routes().holds());
        nnep_ok += usize::from(!n && ep && !sd && n == (ep && sd));
    }
    line(
        normal_ok == 200 && nnep_ok == 200,
        format!("normal => EP and SD on {normal_ok}/200 normals; EP without SD on {nnep_ok}/200 non-normal EP draws"),
    )
}

fn suite_report(run: &Run) -> Option<TheoremReport> {
    serde_json::from_str(&run.stdout).ok()
}

fn criterion_5(run: &Run, report: Option<&TheoremReport>) -> Line {
    let Some(r) = report else {
        return line(false, format!("suite output is not a report (exit {})", run.code));
    };
    let min_trials = r.claims.values().map(|c| c.trials).min().unwrap_or(0);
    let unbalanced: Vec<&str> = r.failing_claims();
    let weak = r.unexpected_weak_claims();
    let open_weak = r.claims.values().filter(|c| c.weakly_exercised && c.open_question).count();
    line(
        run.code == 0
            && unbalanced.is_empty()
            && weak.is_empty()
            && min_trials >= 50
            && run.seconds < SUITE_SECONDS,
        format!(
            "exit {}, {} claims, min {min_trials} trials/claim, failing {:?}, weakly exercised {:?} (+{open_weak} open), {:.1}s (limit {SUITE_SECONDS}s)",
            run.code,
            r.claims.len(),
            unbalanced,
            weak,
            run.seconds
        ),
    )
}

fn criterion_6(report: Option<&TheoremReport>) -> Line {
    let Some(c) = report.and_then(|r| r.claims.get("n_ep_ascent_descent")) else {
        return line(false, "no ascent/descent claim in the report");
    };
    let mut tight = Vec::new();
    for n in [2u32, 3] {
        // Independent check of the witness: Tⁿ = 0 while Tⁿ⁻¹ ≠ 0 pins
        // ascent = descent = n for a nilpotent operator.
        let ok = c.tightness_witnesses().any(|w| {
            if w.n != Some(n) || w.seed_trace.families != ["nilpotent_nep"] {
                return false;
            }
            let t = w.matrix.to_matrix().unwrap();
            let scale = t.frobenius_norm().max(1.0);
            let high = linalg::mat_power(&t, n).unwrap().frobenius_norm() / scale;
            let low = linalg::mat_power(&t, n - 1).unwrap().frobenius_norm() / scale;
            high < 1e-12 && low > 1e-3
        });
        tight.push((n, ok));
    }
    line(
        c.passed() && c.errors == 0 && tight.iter().all(|(_, ok)| *ok),
        format!(
            "{}/{} n-EP trials with asc <= n and dsc <= n; nilpotent tightness witnesses {:?}",
            c.passes, c.hypothesis_hits, tight
        ),
    )
}

fn criterion_7() -> Line {
    let t = tol();
    let dims: Vec<usize> = (2..=6).collect();
    let (mut draws, mut agree) = ([0usize; 2], [0usize; 2]);
    for k in 0..1500 {
        let (_, _, m) = ensemble_draw(k, &dims, POWER_CLAIM_CAP, 0xC7);
        // Both conditions are invariant under positive scaling of T.
        let norm = linalg::spectral_norm(&m).unwrap();
        let m = if norm > 0.0 { m.scale_real(1.0 / norm) } else { m };
        let a = Analysis::with_max_power(&m, &t, 4).unwrap();
        for n in 1..=2u32 {
            let rv = a.n_ep_routes(n as usize).unanimous().unwrap();
            if !rv.holds() {
                continue;
            }
            let even = a.power(2 * n as usize).into_owned();
            let odd = &*a.power(2 * n as usize - 1) * a.cauchy_dual();
            let i = n as usize - 1;
            draws[i] += 1;
            agree[i] += usize::from(linalg::is_psd(&even, &t).unwrap().holds == linalg::is_psd(&odd, &t).unwrap().holds);
        }
    }
    line(
        draws.iter().all(|&d| d >= 200) && draws == agree,
        format!("n=1: {}/{} agree, n=2: {}/{} agree", agree[0], draws[0], agree[1], draws[1]),
    )
}

fn criterion_8(report: Option<&TheoremReport>) -> Line {
    let t = tol();
    let mut notes = Vec::new();
    let mut pass = true;
    for id in ["hep_equivalences", "n_hep_characterization"] {
        match report.and_then(|r| r.claims.get(id)) {
            Some(c) => {
                pass &= c.passed() && c.errors == 0;
                notes.push(format!("{id} {}/{} agree", c.passes, c.hypothesis_hits));
            }
            None => {
                pass = false;
                notes.push(format!("{id} missing"));
            }
        }
    }
    // Direct Douglas check on (Tⁿ, T*): a finite constant exactly when the
    // range is included, the majorization holding at that constant, and
    // failing at any constant when the inclusion fails.
    let dims: Vec<usize> = (2..=6).collect();
    let (mut checked, mut mismatches) = (0usize, 0usize);
    for k in 0..400 {
        let (_, _, m) = ensemble_draw(k, &dims, POWER_CLAIM_CAP, 0xC8);
        let n = (k % 3) as u32 + 1;
        let tn = linalg::mat_power(&m, n).unwrap();
        let adj = m.adjoint();
        let included = linalg::range_included(&tn, &adj, &t).unwrap().holds;
        let constant = linalg::douglas_constant(&tn, &adj, &t).unwrap();
        let ok = if included {
            constant.is_finite() && linalg::douglas_majorization(&tn, &adj, constant * (1.0 + 1e-9), &t).unwrap().holds
        } else {
            !constant.is_finite() && !linalg::douglas_majorization(&tn, &adj, 1.0, &t).unwrap().holds
        };
        checked += 1;
        mismatches += usize::from(!ok);
    }
    pass &= mismatches == 0;
    notes.push(format!("douglas on (T^n, T*): {mismatches} mismatches in {checked}"));
    line(pass, notes.join(", "))
}

fn gen_classify_round_trip() -> (usize, Vec<String>) {
    let dir = tempfile::tempdir().unwrap();
    let n_max = 4;
    let mut checked = 0;
    let mut bad = Vec::new();
    for family in Family::ALL {
        let dims: Vec<usize> = (2..=5).filter(|&d| family.accepts(d)).collect();
        for (i, &dim) in dims.iter().enumerate() {
            let seed = (17 + i).to_string();
            let dim_s = dim.to_string();
            let n = (dim.min(2)) as u32;
            let n_s = n.to_string();
            let path = dir.path().join(format!("{}_{dim}.json", family.name()));
            let path_s = path.to_str().unwrap();
            let mut args = vec!["gen", family.name(), "--dim", &dim_s, "--seed", &seed, "--out", path_s];
            if family == Family::NilpotentNep {
                args.extend(["--n", &n_s]);
            }
            let g = run(&args);
            if g.code != 0 {
                bad.push(format!("gen {} dim {dim} exit {}", family.name(), g.code));
                continue;
            }
            let c = run(&["classify", path_s, "--format", "json"]);
            let Ok(profile) = serde_json::from_str::<classes::OperatorProfile>(&c.stdout) else {
                bad.push(format!("classify {} dim {dim} exit {}", family.name(), c.code));
                continue;
            };
            let hint = if family == Family::NilpotentNep { n } else { 1 };
            let adv = family.advertised(dim, hint, n_max);
            for (label, want) in &adv.memberships {
                if profile.get(*label) != Some(*want) {
                    bad.push(format!("{} dim {dim}: {label} expected {want}", family.name()));
                }
            }
            if adv.ascent.is_some_and(|a| a != profile.ascent) || adv.descent.is_some_and(|d| d != profile.descent) {
                bad.push(format!("{} dim {dim}: asc/dsc {}/{}", family.name(), profile.ascent, profile.descent));
            }
            checked += 1;
        }
    }
    (checked, bad)
}

fn criterion_9(first: &Run, second: &Run) -> Line {
    let identical = first.code == second.code && first.stdout == second.stdout && !first.stdout.is_empty();
    let (checked, bad) = gen_classify_round_trip();
    line(
        identical && bad.is_empty() && checked > 0,
        format!(
            "suite JSON byte-identical across runs: {identical} ({} bytes); gen/classify round-trip on {checked} family/dim files, {} mismatches{}",
            first.stdout.len(),
            bad.len(),
            if bad.is_empty() { String::new() } else { format!(": {}", bad.join("; ")) }
        ),
    )
}

fn criterion_10() -> Line {
    let s = mp_stats(&tol().with_fault(PinvFault::LeadingSignFlip));
    let c1_fails = s.worst_scaled > MP_TOL;
    let run = run(&["suite", "--format", "json", "--inject-pinv-fault"]);
    let Some(r) = suite_report(&run) else {
        return line(false, format!("faulted suite gave no report (exit {})", run.code));
    };
    let failing: Vec<&str> = r
        .claims
        .iter()
        .filter(|(_, c)| !c.passed() && c.witnesses.iter().any(|w| w.kind != WitnessKind::Tightness))
        .map(|(id, _)| id.as_str())
        .collect();
    let mp_caught = failing.contains(&"mp_identities");
    line(
        c1_fails && run.code == 1 && failing.len() >= 5 && mp_caught,
        format!(
            "with a sign-flipped pinv: criterion 1 worst residual {:.2e} (fails: {c1_fails}), suite exit {}, \
             {} claims fail with witnesses (mp_identities among them: {mp_caught})",
            s.worst_scaled,
            run.code,
            failing.len()
        ),
    )
}

fn main() {
    let suite_args = ["suite", "--format", "json"];
    let first = run(&suite_args);
    let report = suite_report(&first);
    let mut lines = vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(&first, report.as_ref()),
        criterion_6(report.as_ref()),
        criterion_7(),
        criterion_8(report.as_ref()),
    ];
    let second = run(&suite_args);
    lines.push(criterion_9(&first, &second));
    lines.push(criterion_10());

    let mut passed = 0;
    for (i, l) in lines.iter().enumerate() {
        passed += usize::from(l.pass);
        println!("criterion {:>2}: {}  {}", i + 1, if l.pass { "PASS" } else { "FAIL" }, l.detail);
    }
    println!("acceptance: {passed}/{} criteria pass", lines.len());
    if passed != lines.len() {
        std::process::exit(1);
    }
}
