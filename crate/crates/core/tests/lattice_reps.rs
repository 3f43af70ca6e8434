use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use sgq_core::algebra::{clock_shift_rep, cstar_identity_check, LatticeAlgebra, LatticeElement};
use sgq_core::deformation::quantize_trig;
use sgq_core::poisson::TrigPolynomial;
use sgq_core::{Rational, Scalar};

fn max_abs(m: &nalgebra::DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn clock_shift_for_small_denominators() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for q in 1..=7i64 {
        for p in (-q + 1)..q {
            if gcd(p, q) != 1 {
                continue;
            }
            let alg = LatticeAlgebra::torus(Rational::from_ratio(p, q));
            let cs = clock_shift_rep(p, q).unwrap();
            assert_eq!(cs.rep.dim, q as usize);
            assert!(cs.rep.unitarity_residual() < 1e-14);
            let u = cs.rep.generator("U").unwrap();
            let v = cs.rep.generator("V").unwrap();
            let phase = Complex64::from_polar(1.0, -std::f64::consts::TAU * p as f64 / q as f64);
            assert!(max_abs(&(u * v - v * u * phase)) < 1e-13, "p/q = {p}/{q}");
            for _ in 0..4 {
                let a = LatticeElement::from_terms(
                    &alg,
                    (0..5).map(|_| {
                        (
                            vec![rng.gen_range(-3..=3), rng.gen_range(-3..=3)],
                            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                        )
                    }),
                );
                assert!(cstar_identity_check(&a, &cs).unwrap() < 1e-10);
            }
        }
    }
}

/// `[Q e_m, Q e_n]` in the clock-shift picture is `(e^{−iπħκ} − e^{iπħκ}) Q e_{m+n}`.
#[test]
fn quantized_commutator_through_clock_shift() {
    let (p, q) = (2, 5);
    let hbar = Rational::from_ratio(p, q);
    let cs = clock_shift_rep(p, q).unwrap();
    for (m, n) in [(vec![1, 0], vec![0, 1]), (vec![2, -1], vec![1, 3])] {
        let qm = quantize_trig(&TrigPolynomial::monomial(m.clone(), Complex64::new(1.0, 0.0)), hbar.clone()).unwrap();
        let qn = quantize_trig(&TrigPolynomial::monomial(n.clone(), Complex64::new(1.0, 0.0)), hbar.clone()).unwrap();
        let comm = cs.represent(&qm.commutator(&qn).unwrap()).unwrap();
        let direct = {
            let (a, b) = (cs.represent(&qm).unwrap(), cs.represent(&qn).unwrap());
            &a * &b - &b * &a
        };
        assert!(max_abs(&(&comm - &direct)) < 1e-12);
        let kappa = (m[0] * n[1] - m[1] * n[0]) as f64;
        let angle = std::f64::consts::PI * hbar.approx() * kappa;
        let factor = Complex64::from_polar(1.0, -angle) - Complex64::from_polar(1.0, angle);
        let sum: Vec<i64> = m.iter().zip(&n).map(|(a, b)| a + b).collect();
        assert!(max_abs(&(comm - cs.delta(&sum) * factor)) < 1e-12);
    }
}
