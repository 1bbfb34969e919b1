mod common;

use bvforge::linfty::{check_linfty, convert_conventions, UnshuffleEnumerator};
use common::linfty_oracle::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn permutations_are_complete() {
    assert_eq!(permutations(4).len(), 24);
    let mut all = permutations(5);
    all.sort();
    all.dedup();
    assert_eq!(all.len(), 120);
}

#[test]
fn unshuffles_agree_with_filtered_permutations() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for _ in 0..500 {
        let n = rng.gen_range(0..=7);
        let k = rng.gen_range(0..=n);
        let odd: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let mut got: Vec<_> =
            UnshuffleEnumerator::new(odd.clone(), k).all().into_iter().map(|u| (u.left, u.right, u.negative)).collect();
        let mut want = brute_unshuffles(&odd, k);
        got.sort();
        want.sort();
        assert_eq!(got, want, "odd = {odd:?}, k = {k}");
    }
}

#[test]
fn checker_agrees_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    let (mut passing, mut failing) = (0, 0);
    for _ in 0..100 {
        let s = random_structure(&mut rng);
        let l = s.to_structure();
        l.validate_degrees().unwrap();
        let report = check_linfty(&l, 4);
        let mut all_zero = true;
        for n in 1..=4 {
            for t in s.tuples(n) {
                let want = s.residual(&t);
                all_zero &= want.is_empty();
                assert_eq!(report.residuals[&(n, t.clone())], want, "{s:?} at {t:?}");
            }
        }
        assert_eq!(report.pass, all_zero);
        assert!(report.homotopy_jacobi_consistent());
        assert_eq!(check_linfty(&convert_conventions(&l), 4), report);
        if report.pass {
            passing += 1;
        } else {
            failing += 1;
        }
    }
    assert!(passing > 0 && failing > 0, "{passing} passing, {failing} failing");
}
