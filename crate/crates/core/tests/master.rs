mod common;

use bvforge::algebra::{antifield_decompose, GeneratorKind, LocalFunction};
use bvforge::bracket::antibracket_variational;
use bvforge::jet::{gauge_commutator, vanishes_mod_divergence};
use bvforge::master::{
    build_stage_action, kt_differential, master_residual, quantum_master_check, solve_master, BVAction, MasterError,
};
use common::*;

#[test]
fn stage_zero_is_the_lagrangian() {
    for m in [scalar(), maxwell(), so3_rotations()] {
        assert_eq!(build_stage_action(&m, 0).unwrap().total, m.lagrangian);
    }
}

#[test]
fn kt_differential_examples() {
    let s = build_stage_action(&scalar(), 0).unwrap();
    assert_eq!(kt_differential(&s, &ustar("1")), -uj("1", &[1, 1]));
    assert!(kt_differential(&s, &u("1")).is_zero());
    // s_1 C* = -D_1 u* for the abelian generator u* C_1
    let a = build_stage_action(&abelian(), 1).unwrap();
    let got = kt_differential(&a, &cstar("1"));
    let d1ustar = LocalFunction::generator(
        bvforge::algebra::Generator::antifield("1").with_jet(bvforge::algebra::MultiIndex::new(vec![1])),
    );
    assert_eq!(got, -d1ustar);
}

#[test]
fn gauge_invariant_stage_one_actions_are_solved() {
    for m in [abelian(), stueckelberg(), maxwell()] {
        let s = build_stage_action(&m, 1).unwrap();
        assert!(master_residual(&s).is_empty(), "{m:?}");
    }
}

#[test]
fn so3_ghost_action() {
    let s = build_stage_action(&so3_ghosts(), 2).unwrap();
    assert!(master_residual(&s).is_empty());
    assert_eq!(s.by_antifield.keys().copied().collect::<Vec<_>>(), vec![2]);
    // 1/2 eps C*_g C^a C^b summed over ordered pairs = C*_3 C^1 C^2 + cyclic
    let expected = &(&(&cstar("3") * &ghost("1")) * &ghost("2"))
        + &(&(&(&cstar("1") * &ghost("2")) * &ghost("3")) + &(&(&cstar("2") * &ghost("3")) * &ghost("1")));
    assert_eq!(s.total, expected);
    let (solved, records) = solve_master(&so3_ghosts(), 3).unwrap();
    assert_eq!(solved.total, s.total);
    assert!(records.is_empty());
    assert_eq!(solved.solved_up_to, 3);
    assert!(solved.residual.is_empty());
}

#[test]
fn stage_two_signs_agree_with_commutator_convention() {
    for m in [with_commutator_structure(shifted_so3([1, -2, 3])), with_commutator_structure(so3_rotations())] {
        let s = build_stage_action(&m, 2).unwrap();
        assert!(master_residual(&s).is_empty());
    }
}

#[test]
fn fake_jacobi_is_not_liftable() {
    let m = fake_jacobi();
    let s = build_stage_action(&m, 2).unwrap();
    let r = master_residual(&s);
    assert_eq!(r.keys().copied().collect::<Vec<_>>(), vec![2]);
    let (solved, records) = solve_master(&m, 3).unwrap();
    assert_eq!(records.len(), 1);
    assert!(!records[0].lifted);
    assert_eq!(records[0].antifield_number, 2);
    assert_eq!(records[0].ansatz_monomials, 0);
    assert_eq!(solved.solved_up_to, 2);
    assert!(solved.residual.is_empty());
}

#[test]
fn open_algebra_needs_quadratic_antifields() {
    let m = open_rotation();
    let (s, records) = solve_master(&m, 3).unwrap();
    assert_eq!(s.solved_up_to, 3);
    assert!(master_residual(&s).is_empty(), "{:?}", master_residual(&s));
    let lifted: Vec<_> = records.iter().filter(|r| r.lifted).collect();
    assert_eq!(lifted.len(), 1);
    let x = lifted[0].correction.as_ref().unwrap();
    let quadratic = x.terms().any(|(f, _)| {
        f.iter().filter(|(g, _)| g.kind == GeneratorKind::Antifield).count() == 2
            && f.iter().filter(|(g, _)| g.kind == GeneratorKind::Ghost).count() == 2
    });
    assert!(quadratic, "{x}");
}

#[test]
fn open_algebra_with_given_closure_functions() {
    // [delta_1, delta_2] u = -(e3 x u) = nu E(L) with nu^{12} = 1
    let m = open_rotation().with_structure("1", "1", "2", LocalFunction::zero());
    let d = gauge_commutator(&open_rotation(), "1", "2");
    assert!(d.residual_is_zero());
    let m = m.with_closure("1", "2", "1", "2", int(1));
    let s = build_stage_action(&m, 2).unwrap();
    assert!(master_residual(&s).is_empty(), "{:?}", master_residual(&s));
}

#[test]
fn noether_precondition() {
    assert!(matches!(solve_master(&scalar(), 2), Err(MasterError::NoetherPreconditionFailed(_))));
}

#[test]
fn solver_is_deterministic() {
    let a = solve_master(&open_rotation(), 3).unwrap();
    let b = solve_master(&open_rotation(), 3).unwrap();
    assert_eq!(a, b);
}

#[test]
fn abelian_solve_terminates_at_stage_one() {
    let (s, records) = solve_master(&abelian(), 3).unwrap();
    assert!(records.is_empty());
    assert_eq!(s.total, build_stage_action(&abelian(), 1).unwrap().total);
}

#[test]
fn s_squared_vanishes_on_solved_actions() {
    use bvforge::algebra::random::{random_function, SampleShape};
    use rand::SeedableRng;
    let (s, _) = solve_master(&open_rotation(), 3).unwrap();
    let pool: Vec<_> = s.total.generators().into_iter().collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let f = random_function(&mut rng, &pool, &SampleShape::default(), None);
        let ssf = antibracket_variational(&s.total, &antibracket_variational(&s.total, &f));
        for (k, piece) in antifield_decompose(&ssf) {
            if (k as usize) < s.solved_up_to {
                assert!(vanishes_mod_divergence(&piece, 0), "{f} -> {piece}");
            }
        }
    }
}

#[test]
fn quantum_master_values() {
    let s = build_stage_action(&so3_ghosts(), 2).unwrap();
    let r = quantum_master_check(&s).unwrap();
    assert!(r.classical.is_zero() && r.delta.is_zero() && r.satisfied());
    let zero = quantum_master_check(&BVAction::from_total(LocalFunction::zero(), 0)).unwrap();
    assert!(zero.classical.is_zero() && zero.delta.is_zero() && zero.satisfied());
    let pair = quantum_master_check(&BVAction::from_total(&u("1") * &ustar("1"), 0)).unwrap();
    assert!(pair.classical.is_zero());
    assert_eq!(pair.delta, int(1));
    assert_eq!(pair.quantum_residual, int(-1));
    assert!(quantum_master_check(&build_stage_action(&abelian(), 1).unwrap()).is_err());
}
