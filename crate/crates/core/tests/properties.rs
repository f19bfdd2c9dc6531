use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use eplab::classes::{classify, ClassLabel};
use eplab::generators::{self, Family};
use eplab::linalg;
use eplab::matrix::ComplexMatrix;
use eplab::matrix_file::MatrixFile;
use eplab::ToleranceConfig;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), &m.to_row_major())
}

/// `T† = G*(GG*)⁻¹F*` from the column-pivoted QR factorization
/// `T = FG`, with `F` the first `rank` columns of `Q`. No SVD involved.
fn rank_factorization_pinv(t: &DMatrix<Complex64>, rank: usize) -> DMatrix<Complex64> {
    let qr = t.clone().col_piv_qr();
    let f = qr.q().columns(0, rank).into_owned();
    let mut g = qr.r().rows(0, rank).into_owned();
    qr.p().inv_permute_columns(&mut g);
    assert!((&f * &g - t).norm() <= 1e-12 * t.norm(), "rank factorization does not reconstruct T");
    let gram = (&g * g.adjoint()).try_inverse().expect("G has full row rank");
    g.adjoint() * gram * f.adjoint()
}

fn family() -> impl Strategy<Value = Family> {
    prop::sample::select(Family::ALL.to_vec())
}

/// A family draw in a dimension the family accepts.
fn draw() -> impl Strategy<Value = (Family, usize, u32, u64)> {
    (family(), any::<prop::sample::Index>(), 1u32..=4, any::<u64>()).prop_map(|(f, i, n, seed)| {
        let dims: Vec<usize> = (2..=7).filter(|&d| f.accepts(d)).collect();
        (f, *i.get(&dims), n, seed)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn matrix_files_round_trip_bit_exact(
        rows in 1usize..4,
        cols in 1usize..4,
        bits in prop::collection::vec((any::<f64>(), any::<f64>()), 16),
    ) {
        let entries: Vec<Complex64> = bits
            .iter()
            .take(rows * cols)
            .map(|&(re, im)| Complex64::new(if re.is_finite() { re } else { 0.5 }, if im.is_finite() { im } else { -0.25 }))
            .collect();
        let m = ComplexMatrix::from_row_major(rows, cols, entries).unwrap();
        let back = MatrixFile::parse(&MatrixFile::to_json(&m)).unwrap();
        for (a, b) in m.to_row_major().iter().zip(back.to_row_major()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn pinv_matches_a_rank_factorization_oracle(dim in 1usize..7, rank_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let rank = 1 + ((dim - 1) as f64 * rank_frac) as usize;
        let t = generators::random_general(dim, rank, seed, 1e3).unwrap();
        let x = linalg::dagger(&t, &tol()).unwrap();
        let oracle = rank_factorization_pinv(&to_nalgebra(&t), rank);
        let diff = (to_nalgebra(&x) - &oracle).norm() / oracle.norm();
        prop_assert!(diff < 1e-9, "relative difference {diff:e}");
    }

    #[test]
    fn pinv_is_an_involution_and_commutes_with_adjoint(dim in 1usize..7, rank in 1usize..7, seed in any::<u64>()) {
        let rank = rank.min(dim);
        let t = generators::random_general(dim, rank, seed, 1e3).unwrap();
        let x = linalg::dagger(&t, &tol()).unwrap();
        prop_assert!(linalg::dagger(&x, &tol()).unwrap().relative_distance(&t) < 1e-9);
        let adj_dagger = linalg::dagger(&t.adjoint(), &tol()).unwrap();
        prop_assert!(adj_dagger.relative_distance(&x.adjoint()) < 1e-9);
    }

    #[test]
    fn advertised_profiles_survive_unitary_conjugation((f, dim, n, seed) in draw(), useed in any::<u64>()) {
        let t = f.draw(dim, n, seed, 1e3).unwrap();
        let u = generators::random_unitary(dim, useed).unwrap();
        let conj = &(&u.adjoint() * &t) * &u;
        let profile = classify(&conj, 4, &tol()).unwrap();
        let adv = f.advertised(dim, n, 4);
        for (label, want) in adv.memberships {
            prop_assert_eq!(profile.get(label), Some(want), "{} {} dim {}", f.name(), label, dim);
        }
        if let Some(a) = adv.ascent {
            prop_assert_eq!(profile.ascent, a);
        }
    }

    #[test]
    fn profiles_are_internally_consistent((f, dim, n, seed) in draw()) {
        let t = f.draw(dim, n, seed, 10.0).unwrap();
        let p = classify(&t, 4, &tol()).unwrap();
        for k in 1..4 {
            prop_assert!(!p.holds(ClassLabel::NEp(k)) || p.holds(ClassLabel::NEp(k + 1)));
            prop_assert!(!p.holds(ClassLabel::NEp(k)) || p.holds(ClassLabel::NHypoEp(k)));
        }
        prop_assert_eq!(p.holds(ClassLabel::NEp(1)), p.holds(ClassLabel::Ep));
        prop_assert_eq!(p.holds(ClassLabel::NHypoEp(1)), p.holds(ClassLabel::HypoEp));
        prop_assert!(!p.holds(ClassLabel::Normal) || (p.holds(ClassLabel::Ep) && p.holds(ClassLabel::Sd)));
        prop_assert!(p.ascent <= dim && p.descent <= dim);
    }

    #[test]
    fn douglas_constant_of_a_factored_range(dim in 2usize..6, seed in any::<u64>(), cseed in any::<u64>()) {
        // A = BC has R(A) ⊆ R(B), and the minimal Douglas factor is ‖B†A‖.
        let b = generators::random_general(dim, dim - 1, seed, 1e2).unwrap();
        let c = generators::random_general(dim, dim, cseed, 1e2).unwrap();
        let a = &b * &c;
        let k = linalg::douglas_constant(&a, &b, &tol()).unwrap();
        let factor = rank_factorization_pinv(&to_nalgebra(&b), dim - 1) * to_nalgebra(&a);
        let factor = ComplexMatrix::from_row_major(dim, dim, factor.transpose().iter().copied().collect()).unwrap();
        let direct = linalg::spectral_norm(&factor).unwrap();
        prop_assert!((k - direct).abs() <= 1e-9 * direct.max(1.0), "{k} vs {direct}");
        prop_assert!(linalg::douglas_majorization(&a, &b, k * (1.0 + 1e-9), &tol()).unwrap().holds);
        prop_assert!(!linalg::douglas_majorization(&a, &b, k * 0.9, &tol()).unwrap().holds);
    }

    #[test]
    fn draws_are_deterministic((f, dim, n, seed) in draw()) {
        prop_assert_eq!(f.draw(dim, n, seed, 1e6).unwrap(), f.draw(dim, n, seed, 1e6).unwrap());
    }
}
