use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use upb_core::basis::{check_unextendible, PartyLayout, ORTHO_TOL};
use upb_core::catalog::{builtin, builtins};
use upb_core::coarse::{coarse_grain, CoarsePartition};
use upb_core::gme::{
    analytic_max_overlap, ebits, general_g, grid_oracle, h_plus_branch, h_plus_branch_stationary_points,
    lambda_star, monotonicity_check, orbit_representative, overlap, seesaw_maximize, seesaw_on_operator,
    symmetric_h, OptimizationPoint, SeesawOptions,
};
use upb_core::linalg::{HermitianOp, Ket, C64};
use upb_core::ppt::{
    bipartitions, build_rho, certify_entangled_range, coefficient_matrix, complement_residual, is_ppt,
    orthogonality_deviation, psi_states, reduced_ranks, rho_family, rho_forms, DensityMatrix, PSD_TOL,
};
use upb_core::uom::AngleAssignment;

fn angle() -> impl Strategy<Value = f64> {
    0.05f64..(FRAC_PI_2 - 0.05)
}

fn angles() -> impl Strategy<Value = AngleAssignment> {
    (angle(), angle(), angle(), angle()).prop_map(|(a, b, c, d)| AngleAssignment::new(a, b, c, d).unwrap())
}

fn part(s: &str, n: usize) -> CoarsePartition {
    CoarsePartition::parse(s, &PartyLayout::qubits(n)).unwrap()
}

fn quarter() -> DensityMatrix {
    rho_family(&AngleAssignment::all_pi_over_4()).unwrap()
}

fn point(rng: &mut ChaCha8Rng) -> OptimizationPoint {
    let mu = [0; 4].map(|_| rng.random_range(0.0..2.0 * PI));
    let nu = [0; 4].map(|_| rng.random_range(0.0..FRAC_PI_2));
    OptimizationPoint::new(mu, nu).unwrap()
}

#[test]
fn complement_states_of_catalog_sets() {
    for entry in builtins() {
        let upb = entry.instantiate().unwrap();
        let rho = build_rho(&upb).unwrap();
        let d = upb.layout().total_dim();
        assert!(complement_residual(&rho, &upb) <= 1e-10, "{}", entry.name);
        assert_eq!(rho.rank(1e-9).unwrap() + upb.len(), d, "{}", entry.name);
        let level = 1.0 / (d - upb.len()) as f64;
        for l in rho.spectrum().unwrap() {
            assert!(l.abs() <= 1e-10 || (l - level).abs() <= 1e-10, "{}: {l}", entry.name);
        }
        for p in bipartitions(upb.layout().parties()).unwrap() {
            assert!(is_ppt(&rho, &p, PSD_TOL).unwrap().ppt, "{} at {:?}", entry.name, p);
        }
    }
}

#[test]
fn certification_follows_coarse_unextendibility() {
    let upb = builtin("size6").unwrap().instantiate().unwrap();
    assert!(!certify_entangled_range(&upb, &part("AB|CD", 4)).unwrap());
    for p in bipartitions(4).unwrap() {
        let expected = check_unextendible(&coarse_grain(&upb, &p).unwrap(), ORTHO_TOL).unextendible;
        assert_eq!(certify_entangled_range(&upb, &p).unwrap(), expected);
    }
    let eleventh = builtin("size9-11th").unwrap().instantiate().unwrap();
    assert!(certify_entangled_range(&eleventh, &CoarsePartition::trivial(4)).unwrap());
}

#[test]
fn npt_states_are_flagged() {
    let bell = Ket::new(vec![C64::new(FRAC_PI_4.cos(), 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(FRAC_PI_4.sin(), 0.0)]);
    let rho = DensityMatrix::pure(&bell, PartyLayout::qubits(2), "bell").unwrap();
    let r = is_ppt(&rho, &part("A|B", 2), PSD_TOL).unwrap();
    assert!(!r.ppt);
    assert!((r.min_eigenvalue + 0.5).abs() <= 1e-12);
}

#[test]
fn rank_seven_state_reductions() {
    let rho = quarter();
    assert_eq!(rho.rank(1e-9).unwrap(), 7);
    let ranks = reduced_ranks(&rho).unwrap();
    assert_eq!(ranks.len(), 10);
    assert!(ranks.iter().all(|(k, &r)| r <= 1 << k.len()), "{ranks:?}");
    let doc = rho.to_json();
    let back = DensityMatrix::from_json(&doc).unwrap();
    assert!(back.op().max_abs_diff(rho.op()) == 0.0);
    assert_eq!(back.layout(), rho.layout());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn closed_forms_agree(a in angles()) {
        prop_assert!(rho_forms(&a).unwrap().max_discrepancy() <= 1e-10);
        prop_assert!(orthogonality_deviation(&coefficient_matrix(&a).unwrap()) <= 1e-10);
        prop_assert!(psi_states(&a).unwrap().form_discrepancy <= 1e-12);
        let rho = rho_family(&a).unwrap();
        for p in bipartitions(4).unwrap() {
            prop_assert!(is_ppt(&rho, &p, PSD_TOL).unwrap().ppt);
        }
    }

    #[test]
    fn g_matches_direct_overlap(a in angles(), seed in any::<u64>()) {
        let rho = rho_family(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            let p = point(&mut rng);
            let direct = overlap(&rho, &p.to_product_vector()).unwrap();
            prop_assert!((general_g(&a, &p) - direct).abs() <= 1e-12);
        }
    }
}

#[test]
fn g_at_the_computational_corner() {
    let a = AngleAssignment::all_pi_over_4();
    let p = OptimizationPoint::new([0.0; 4], [0.0; 4]).unwrap();
    assert!((general_g(&a, &p) - 1.0 / 16.0).abs() <= 1e-15);
    assert!((overlap(&quarter(), &p.to_product_vector()).unwrap() - 1.0 / 16.0).abs() <= 1e-15);
}

#[test]
fn g_is_affine_in_each_phase_cosine() {
    let a = AngleAssignment::generic();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let p = point(&mut rng);
        for j in 0..4 {
            let at = |m: f64| {
                let mut q = p;
                q.mu[j] = m;
                general_g(&a, &q)
            };
            // cos μ = 1, 0, -1
            let (g1, g0, gm) = (at(0.0), at(FRAC_PI_2), at(PI));
            assert!((g0 - 0.5 * (g1 + gm)).abs() <= 1e-14);
            let m = p.mu[j];
            assert!((at(m) - (g0 + m.cos() * 0.5 * (g1 - gm))).abs() <= 1e-14);
        }
    }
}

#[test]
fn h_is_g_on_real_states() {
    let a = AngleAssignment::all_pi_over_4();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let l = [0; 4].map(|_| rng.random_range(-FRAC_PI_2..FRAC_PI_2));
        let g = general_g(&a, &OptimizationPoint::from_lambdas(l).unwrap());
        assert!((symmetric_h(l) - g).abs() <= 1e-14);
    }
}

fn gradient(f: impl Fn([f64; 4]) -> f64, x: [f64; 4]) -> [f64; 4] {
    let h = 1e-6;
    let mut out = [0.0; 4];
    for j in 0..4 {
        let (mut up, mut down) = (x, x);
        up[j] += h;
        down[j] -= h;
        out[j] = (f(up) - f(down)) / (2.0 * h);
    }
    out
}

#[test]
fn symmetric_optimum_is_stationary() {
    let ls = lambda_star();
    let x = [-FRAC_PI_4, ls, ls, ls];
    assert!((symmetric_h(x) - analytic_max_overlap()).abs() <= 1e-12);
    for g in gradient(symmetric_h, x) {
        assert!(g.abs() <= 1e-6, "{g}");
    }
    for s in h_plus_branch_stationary_points() {
        let d = (h_plus_branch(s + 1e-6) - h_plus_branch(s - 1e-6)) / 2e-6;
        assert!(d.abs() <= 1e-6, "{s}: {d}");
    }
}

#[test]
fn seesaw_lands_on_the_symmetric_orbit() {
    let r = seesaw_maximize(&quarter(), &CoarsePartition::trivial(4), &SeesawOptions::default()).unwrap();
    assert!((r.max_overlap - analytic_max_overlap()).abs() <= 1e-9);
    assert!(r.monotone);
    let p = OptimizationPoint::from_product_vector(&r.argmax).unwrap();
    let l = p.lambdas(1e-4).expect("real optimum");
    assert!((symmetric_h(l) - r.max_overlap).abs() <= 1e-8);
    let (_, rest) = orbit_representative(l);
    for v in rest {
        assert!((v - lambda_star()).abs() <= 1e-4, "{rest:?}");
    }
}

#[test]
fn seesaw_on_known_states() {
    let bell = Ket::new(vec![C64::new(FRAC_PI_4.cos(), 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(FRAC_PI_4.sin(), 0.0)]);
    let rho = DensityMatrix::pure(&bell, PartyLayout::qubits(2), "bell").unwrap();
    let r = seesaw_maximize(&rho, &part("A|B", 2), &SeesawOptions::default()).unwrap();
    assert!((r.g_ebits - 1.0).abs() <= 1e-10);

    let mixed = DensityMatrix::maximally_mixed(PartyLayout::qubits(4));
    let chain = [
        CoarsePartition::trivial(4),
        part("AB|C|D", 4),
        part("AB|CD", 4),
    ];
    let report = monotonicity_check(&mixed, &chain, &SeesawOptions::default()).unwrap();
    assert!(report.nonincreasing);
    for (_, g) in &report.values {
        assert!((g - 4.0).abs() <= 1e-10);
    }
    let bad = [part("AB|CD", 4), CoarsePartition::trivial(4)];
    assert!(monotonicity_check(&mixed, &bad, &SeesawOptions::default()).is_err());
}

#[test]
fn seesaw_is_deterministic_per_seed() {
    let rho = quarter();
    let opts = SeesawOptions { restarts: 8, ..SeesawOptions::default() };
    let a = seesaw_maximize(&rho, &part("AB|C|D", 4), &opts).unwrap();
    let b = seesaw_maximize(&rho, &part("AB|C|D", 4), &opts).unwrap();
    assert_eq!(a.max_overlap.to_bits(), b.max_overlap.to_bits());
    assert_eq!(a.best_restart, b.best_restart);
    assert!(ebits(a.max_overlap) <= ebits(analytic_max_overlap()) + 1e-9);
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize, rank: usize) -> HermitianOp {
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for _ in 0..rank {
        let v = nalgebra::DVector::from_fn(dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        m += &v * v.adjoint();
    }
    let tr = m.trace().re;
    HermitianOp::new(m.unscale(tr)).unwrap()
}

#[test]
fn seesaw_dominates_the_grid_and_stays_below_the_top_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..10 {
        let op = random_state(&mut rng, 8, 1 + trial % 4);
        let rho = DensityMatrix::new(op.clone(), PartyLayout::qubits(3), "random").unwrap();
        let p = CoarsePartition::trivial(3);
        let grid = grid_oracle(&rho, &p, 8).unwrap();
        let (best, _, _) = seesaw_on_operator(&op, &[2, 2, 2], &SeesawOptions::default()).unwrap();
        let top = rho.spectrum().unwrap()[0];
        assert!(best >= grid - 1e-12, "{trial}: {best} < {grid}");
        assert!(best <= top + 1e-12);
    }
    let op = random_state(&mut rng, 4, 2);
    assert!(seesaw_on_operator(&op, &[2, 2], &SeesawOptions { restarts: 0, ..SeesawOptions::default() }).is_err());
}
