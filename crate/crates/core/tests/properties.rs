use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use quadspec::bracket::{is_normal, poisson_bracket};
use quadspec::fock::assemble_weyl_matrix;
use quadspec::order::{order_at_halfline, HalfLineOrder};
use quadspec::reduction::{reduce_1d, williamson};
use quadspec::resolvent::{semiclassical_norm, EngineConfig, ResolventEngine, DOUBLING_TOL};
use quadspec::sector::{is_elliptic, numerical_range, SectorKind};
use quadspec::spectrum::{hamilton_spectrum, spectrum_lattice};
use quadspec::symbol::{random_symplectic, QuadraticSymbol, RealQuadraticForm, SymplecticForm};
use quadspec::witness::{bichar_witness, QuadraticFlow};
use quadspec::{fixtures, linalg, C64};

fn random_form(seed: u64, n: usize) -> RealQuadraticForm {
    let mut rng = linalg::rng(seed);
    let a = linalg::random_gaussian_matrix(&mut rng, 2 * n, 2 * n, 1.0);
    RealQuadraticForm::new(linalg::symmetrize(&a)).unwrap()
}

fn elliptic(seed: u64, n: usize) -> QuadraticSymbol {
    fixtures::random_elliptic(n, &mut linalg::rng(seed))
}

fn engine(q: QuadraticSymbol) -> ResolventEngine {
    ResolventEngine::with_config(q, EngineConfig { budget_rows: 4096, doubling_tol: DOUBLING_TOL })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric_bilinear_and_jacobi(seed in any::<u64>(), n in 1usize..4, s in -3.0f64..3.0) {
        let (a, b, c) = (random_form(seed, n), random_form(seed ^ 1, n), random_form(seed ^ 2, n));
        let ab = poisson_bracket(&a, &b).unwrap();
        let ba = poisson_bracket(&b, &a).unwrap();
        prop_assert_eq!(ab.matrix(), &(-ba.matrix()));
        let sa_c = RealQuadraticForm::new(a.matrix() * s + c.matrix()).unwrap();
        let lhs = poisson_bracket(&sa_c, &b).unwrap();
        let rhs = ab.matrix() * s + poisson_bracket(&c, &b).unwrap().matrix();
        prop_assert!(linalg::frob(&(lhs.matrix() - rhs)) <= 1e-12 * (1.0 + linalg::frob(lhs.matrix())));
        let j = |x: &RealQuadraticForm, y: &RealQuadraticForm, z: &RealQuadraticForm| {
            poisson_bracket(x, &poisson_bracket(y, z).unwrap()).unwrap().matrix().clone()
        };
        let sum = j(&a, &b, &c) + j(&b, &c, &a) + j(&c, &a, &b);
        let scale = a.norm() * b.norm() * c.norm();
        prop_assert!(linalg::frob(&sum) <= 1e-9 * scale);
    }

    #[test]
    fn symplectic_maps_preserve_range_normality_and_spectrum(seed in any::<u64>(), n in 1usize..3) {
        let q = elliptic(seed, n);
        let s = random_symplectic(n, &mut linalg::rng(seed ^ 7), 0.3);
        prop_assert!(SymplecticForm::new(n).is_symplectic(&s));
        let p = q.apply_symplectic(&s).unwrap();
        prop_assert!(is_elliptic(&p).elliptic);
        let (r0, r1) = (numerical_range(&q).unwrap(), numerical_range(&p).unwrap());
        prop_assert_eq!(r0.kind, r1.kind);
        prop_assert!(linalg::wrap_angle(r0.theta_min - r1.theta_min).abs() < 1e-6);
        prop_assert!(linalg::wrap_angle(r0.theta_max - r1.theta_max).abs() < 1e-6);
        prop_assert_eq!(is_normal(&q), is_normal(&p));
        let (g0, g1) = (hamilton_spectrum(&q), hamilton_spectrum(&p));
        prop_assert_eq!(g0.iter().map(|c| c.r).sum::<usize>(), 2 * n);
        prop_assert_eq!(g0.len(), g1.len());
        for c in &g0 {
            prop_assert!(g1.iter().any(|d| d.r == c.r && (d.lambda - c.lambda).norm() < 1e-8 * (1.0 + c.lambda.norm())));
        }
    }

    #[test]
    fn lattice_points_lie_in_the_range(seed in any::<u64>(), n in 1usize..3) {
        let q = elliptic(seed, n);
        let sector = numerical_range(&q).unwrap();
        let l = spectrum_lattice(&q, 20.0).unwrap();
        for z in &l.eigenvalues {
            prop_assert!(sector.contains(*z, 1e-8));
            prop_assert!(z.norm() <= 20.0);
        }
        prop_assert!(l.eigenvalues.windows(2).all(|w| (w[0].re, w[0].im) <= (w[1].re, w[1].im)));
    }

    #[test]
    fn finite_orders_are_even(seed in any::<u64>(), n in 1usize..3) {
        let q = elliptic(seed, n);
        prop_assume!(!is_normal(&q) && numerical_range(&q).unwrap().kind == SectorKind::Sector);
        let mut rng = linalg::rng(seed);
        for j in [1, 2] {
            match order_at_halfline(&q, j, &mut rng).unwrap().order {
                HalfLineOrder::Finite { k } => prop_assert!(k >= 2 && k % 2 == 0 && k <= (4 * n - 2) as u32),
                HalfLineOrder::ExceedsCap { cap } => prop_assert_eq!(cap, (4 * n - 2) as u32),
            }
        }
    }

    #[test]
    fn williamson_diagonalizes_positive_forms(seed in any::<u64>(), n in 1usize..4) {
        let mut rng = linalg::rng(seed);
        let a = linalg::random_gaussian_matrix(&mut rng, 2 * n, 2 * n, 1.0);
        let m = RealQuadraticForm::new(linalg::symmetrize(&(&a * a.transpose())) + DMatrix::identity(2 * n, 2 * n) * 0.2).unwrap();
        let w = williamson(&m).unwrap();
        prop_assert!(SymplecticForm::new(n).defect(&w.s) < 1e-8 * (1.0 + linalg::frob(&w.s).powi(2)));
        let d = w.s.transpose() * m.matrix() * &w.s;
        let want = DMatrix::from_diagonal(&DVector::from_iterator(2 * n, w.lambdas.iter().chain(w.lambdas.iter()).copied()));
        prop_assert!(linalg::frob(&(d - want)) < 1e-8 * m.norm());
    }

    #[test]
    fn reduce_1d_round_trips(seed in any::<u64>()) {
        let q = elliptic(seed, 1);
        let nf = reduce_1d(&q).unwrap();
        let s = nf.s_matrix();
        prop_assert!((s.determinant() - 1.0).abs() < 1e-10);
        let back = q.apply_symplectic(&s).unwrap();
        let want = nf.kind.symbol();
        prop_assert!(linalg::cfrob(&(back.matrix() - want.matrix())) <= 1e-8 * q.norm());
    }

    #[test]
    fn witness_flows_conserve_the_real_part(seed in any::<u64>(), frac in 0.1f64..0.9, r in 0.5f64..4.0) {
        let q = elliptic(seed, 1 + (seed % 2) as usize);
        prop_assume!(!is_normal(&q));
        let s = numerical_range(&q).unwrap();
        let z = C64::from_polar(r, s.theta_min + frac * s.opening());
        let w = bichar_witness(&q, z, 200.0, 64, &mut linalg::rng(seed)).unwrap();
        prop_assert!(w.t_plus < w.t_minus && w.f_values[0] > 0.0 && w.f_values[1] < 0.0);
        let rq = q.rotated(w.rotation);
        let flow = QuadraticFlow::new(&rq.real_part()).unwrap();
        let x0 = DVector::from_vec(w.start_point.clone());
        for t in [w.t_plus, w.t_minus, 0.5 * (w.t_plus + w.t_minus)] {
            let y = flow.apply(t, &x0);
            prop_assert!((rq.real_part().eval(y.as_slice()) - w.z_rotated.re).abs() <= 1e-8 * z.norm());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn compressions_respect_conjugation_and_the_range(seed in any::<u64>(), n in 1usize..3) {
        let q = elliptic(seed, n);
        let cutoff = if n == 1 { 12 } else { 5 };
        let a = assemble_weyl_matrix(&q, cutoff, 4096).unwrap().to_dense();
        let conj = QuadraticSymbol::new(n, q.matrix().map(|z| z.conj())).unwrap();
        let b = assemble_weyl_matrix(&conj, cutoff, 4096).unwrap().to_dense();
        prop_assert!(linalg::cfrob(&(b - a.adjoint())) <= 1e-12 * linalg::cfrob(&a));
        let sector = numerical_range(&q).unwrap();
        let mut rng = linalg::rng(seed ^ 3);
        for _ in 0..100 {
            let re = linalg::random_unit_vector(&mut rng, a.nrows());
            let im = linalg::random_unit_vector(&mut rng, a.nrows());
            let v = linalg::combine(&DMatrix::from_column_slice(a.nrows(), 1, re.as_slice()), &DMatrix::from_column_slice(a.nrows(), 1, im.as_slice()));
            let v = &v / C64::new(linalg::cfrob(&v), 0.0);
            let w = (v.adjoint() * &a * &v)[(0, 0)];
            prop_assert!(sector.contains(w, 1e-8), "{} outside", w);
        }
    }

    #[test]
    fn sigma_min_dominates_the_range_distance(seed in any::<u64>(), re in -20.0f64..20.0, im in -20.0f64..20.0) {
        let q = elliptic(seed, 1);
        let z = C64::new(re, im);
        let d = numerical_range(&q).unwrap().distance(z);
        let op = assemble_weyl_matrix(&q, 64, 4096).unwrap();
        prop_assert!(op.sigma_min(z) >= d - 1e-9 * (1.0 + d));
    }

    #[test]
    fn semiclassical_identity_at_unit_h(seed in any::<u64>(), re in -5.0f64..5.0, im in -5.0f64..5.0) {
        let e = engine(elliptic(seed, 1));
        let z = C64::new(re, im);
        prop_assert_eq!(semiclassical_norm(&e, z, 1.0).unwrap().norm, e.adaptive_norm(z).unwrap().norm);
    }

    #[test]
    fn doubling_does_not_lose_sigma_min_at_converged_points(seed in any::<u64>(), re in 0.0f64..10.0, im in -5.0f64..5.0) {
        let e = engine(elliptic(seed, 1));
        let z = C64::new(re, im);
        let a = e.adaptive_norm(z).unwrap();
        prop_assume!(a.converged);
        let coarse = e.sigma_min(z, a.cutoff / 2).unwrap();
        prop_assert!(a.sigma_min >= coarse * (1.0 - DOUBLING_TOL));
    }
}

/// Metaplectic images of phase-space rotations act diagonally on Hermite functions, so the
/// compression is invariant under them and grid values agree to round-off.
#[test]
fn resolvent_values_invariant_under_phase_space_rotations() {
    let q = fixtures::rotated_oscillator(std::f64::consts::FRAC_PI_4);
    for phi in [0.3, 1.1, 2.0] {
        let s = DMatrix::from_row_slice(2, 2, &[f64::cos(phi), -f64::sin(phi), f64::sin(phi), f64::cos(phi)]);
        let p = q.apply_symplectic(&s).unwrap();
        let (e0, e1) = (engine(q.clone()), engine(p));
        for z in [C64::new(3.0, 1.0), C64::new(8.0, 4.0), C64::new(-1.0, 2.0)] {
            let (a, b) = (e0.adaptive_norm(z).unwrap(), e1.adaptive_norm(z).unwrap());
            assert!(a.converged && b.converged);
            assert!((a.norm - b.norm).abs() <= 1e-6 * a.norm, "phi {phi}, z {z}: {} vs {}", a.norm, b.norm);
        }
    }
}

/// General symplectic maps change the compression; converged norms still agree with the
/// unmapped ones.
#[test]
fn resolvent_values_invariant_under_symplectic_maps() {
    let mut rng = linalg::rng(17);
    for q in [fixtures::rotated_oscillator(std::f64::consts::FRAC_PI_4), fixtures::harmonic(1)] {
        for _ in 0..3 {
            let s = random_symplectic(1, &mut rng, 0.2);
            let p = q.apply_symplectic(&s).unwrap();
            let (e0, e1) = (engine(q.clone()), engine(p));
            for z in [C64::new(2.0, 1.0), C64::new(6.0, 3.0), C64::new(-1.0, -1.0)] {
                let (a, b) = (e0.adaptive_norm(z).unwrap(), e1.adaptive_norm(z).unwrap());
                assert!(a.converged && b.converged);
                assert!((a.norm - b.norm).abs() <= 1e-6 * a.norm, "z {z}: {} vs {}", a.norm, b.norm);
            }
        }
    }
}
