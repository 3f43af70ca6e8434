use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;

use sgq_core::algebra::{finite_regular_rep, FiniteAlgebra, FiniteElement, FiniteRegular};
use sgq_core::groupoid::{coboundary, is_cocycle, pair_groupoid, pair_times_group, FiniteGroupoid, GroupTable, PhaseCochain};

fn groupoid(shape: &[(usize, usize)]) -> FiniteGroupoid {
    let parts: Vec<_> = shape.iter().map(|&(n, k)| pair_times_group(n, &GroupTable::cyclic(k))).collect();
    FiniteGroupoid::disjoint_union(&parts)
}

fn shape() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((1usize..=3, 1usize..=3), 1..=2)
}

fn element(alg: &std::sync::Arc<FiniteAlgebra>, coeffs: &[(f64, f64)]) -> FiniteElement {
    let n = alg.groupoid().n_arrows();
    FiniteElement::from_terms(alg, coeffs.iter().take(n).enumerate().map(|(k, &(re, im))| (k, Complex64::new(re, im))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coboundary_twists_give_associative_algebras(
        shape in shape(),
        phases in prop::collection::vec(0.0..TAU, 64),
        coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3 * 64),
    ) {
        let g = groupoid(&shape);
        let c = PhaseCochain::from_fn(&g, 1, |a| Complex64::from_polar(1.0, phases[a[0] % phases.len()])).unwrap();
        let sigma = coboundary(&g, &c).unwrap();
        prop_assert!(is_cocycle(&g, &sigma, 1e-12).unwrap().holds);
        let alg = FiniteAlgebra::new(g, sigma).unwrap();
        let n = alg.groupoid().n_arrows();
        let (a, b, cc) = (element(&alg, &coeffs[..n]), element(&alg, &coeffs[64..64 + n]), element(&alg, &coeffs[128..128 + n]));
        let left = a.convolve(&b).unwrap().convolve(&cc).unwrap();
        let right = a.convolve(&b.convolve(&cc).unwrap()).unwrap();
        prop_assert!(left.distance(&right) < 1e-12);
    }

    #[test]
    fn double_coboundary_is_trivial(shape in shape(), phases in prop::collection::vec(0.0..TAU, 64)) {
        let g = groupoid(&shape);
        let c = PhaseCochain::from_fn(&g, 1, |a| Complex64::from_polar(1.0, phases[a[0] % phases.len()])).unwrap();
        let dd = coboundary(&g, &coboundary(&g, &c).unwrap()).unwrap();
        for v in dd.values().values() {
            prop_assert!((v - 1.0).norm() < 1e-12);
        }
    }
}

#[test]
fn perturbing_a_non_unit_pair_breaks_both() {
    let g = pair_times_group(2, &GroupTable::cyclic(2));
    let sigma = PhaseCochain::trivial(&g, 2);
    let pair = g.nerve(2).into_iter().find(|p| !g.is_unit(p[0]) && !g.is_unit(p[1])).unwrap();
    let bad = sigma.with_value(pair, Complex64::from_polar(1.0, 1.0)).unwrap();
    let check = is_cocycle(&g, &bad, 1e-10).unwrap();
    assert!(!check.holds);
    let alg = FiniteAlgebra::new(g, bad).unwrap();
    let [x, y, z] = check.worst.unwrap();
    let (a, b, c) = (alg.delta(x), alg.delta(y), alg.delta(z));
    let left = a.convolve(&b).unwrap().convolve(&c).unwrap();
    let right = a.convolve(&b.convolve(&c).unwrap()).unwrap();
    assert!(left.distance(&right) > 0.1);
}

/// `C*(Pair n) ≅ M_n`: the matrix-unit map is multiplicative and `*`-preserving.
#[test]
fn pair_algebra_is_the_matrix_algebra() {
    for n in 1..=5 {
        let alg = FiniteAlgebra::untwisted(pair_groupoid(n));
        let to_matrix = |a: &FiniteElement| {
            nalgebra::DMatrix::from_fn(n, n, |i, j| a.coefficient(i * n + j))
        };
        let coeffs: Vec<(f64, f64)> = (0..n * n).map(|k| ((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos())).collect();
        let a = element(&alg, &coeffs);
        let b = element(&alg, &coeffs.iter().rev().copied().collect::<Vec<_>>());
        let lhs = to_matrix(&a.convolve(&b).unwrap());
        let rhs = to_matrix(&a) * to_matrix(&b);
        assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-13));
        assert!((to_matrix(&a.adjoint()) - to_matrix(&a).adjoint()).iter().all(|z| z.norm() < 1e-15));
        // The regular representation is n copies of the defining one.
        let rep = finite_regular_rep(&alg);
        assert_eq!(rep.dim, n * n);
        let reg = FiniteRegular.represent(&a);
        assert!((reg.trace() - to_matrix(&a).trace() * n as f64).norm() < 1e-12);
    }
}
