use rand::Rng;

use super::SymplecticError;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Regular grid on the torus `T^dims` with `resolution` points per circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaseGrid {
    pub dims: usize,
    pub resolution: usize,
}

impl BaseGrid {
    pub fn points(&self) -> Vec<Vec<i64>> {
        let n = self.resolution as i64;
        let mut out = vec![vec![]];
        for _ in 0..self.dims {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..n).map(move |i| {
                        let mut q = p.clone();
                        q.push(i);
                        q
                    })
                })
                .collect();
        }
        out
    }

    fn wrap(&self, p: &[i64]) -> Vec<i64> {
        let n = self.resolution as i64;
        p.iter().map(|x| x.rem_euclid(n)).collect()
    }
}

/// A covector `u` (in dual grid units) based at the grid point `p`, which is
/// the midpoint between source and target.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionArrow<S> {
    pub u: Vec<S>,
    pub p: Vec<i64>,
}

/// Abelian action groupoid `T*M` for a torus `T^k` with constant `Π`
/// acting on a grid torus `M` by translations.
///
/// With `D(u) = ½ ρ Πᵀ ρᵀ u` (in grid units): `t(u,p) = p + D(u)`,
/// `s(u,p) = p − D(u)`, `(u,p)·(v,q) = (u+v, p − D(v))`, `(u,p)⁻¹ = (−u,p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelianActionGroupoid<S: Scalar> {
    pi: Matrix<S>,
    rho: Matrix<S>,
    base: BaseGrid,
    shift: Matrix<S>,
}

impl<S: Scalar> AbelianActionGroupoid<S> {
    /// `rho` has one column per torus generator: its translation vector in grid units.
    pub fn new(pi: Matrix<S>, rho: Matrix<S>, base: BaseGrid) -> Result<Self, SymplecticError> {
        let k = pi.rows();
        if pi.cols() != k {
            return Err(SymplecticError::Invalid("Π must be square".into()));
        }
        for i in 0..k {
            for j in 0..k {
                if pi[(i, j)] != -pi[(j, i)].clone() {
                    return Err(SymplecticError::Invalid(format!("Π is not antisymmetric at ({i}, {j})")));
                }
            }
        }
        if rho.rows() != base.dims || rho.cols() != k {
            return Err(SymplecticError::Invalid(format!(
                "ρ must be {}×{k}, got {}×{}",
                base.dims,
                rho.rows(),
                rho.cols()
            )));
        }
        if base.resolution == 0 {
            return Err(SymplecticError::Invalid("grid resolution must be positive".into()));
        }
        let shift = (&(&rho * &pi.transpose()) * &rho.transpose()).scale(&S::half());
        Ok(AbelianActionGroupoid { pi, rho, base, shift })
    }

    pub fn base(&self) -> BaseGrid {
        self.base
    }

    pub fn rank(&self) -> usize {
        self.pi.rows()
    }

    pub fn pi(&self) -> &Matrix<S> {
        &self.pi
    }

    pub fn rho(&self) -> &Matrix<S> {
        &self.rho
    }

    /// `D(u)`; errors unless it lands exactly on the grid.
    pub fn displacement(&self, u: &[S]) -> Result<Vec<i64>, SymplecticError> {
        if u.len() != self.base.dims {
            return Err(SymplecticError::Invalid("covector dimension".into()));
        }
        self.shift
            .apply(u)
            .iter()
            .map(|x| {
                x.as_integer(1e-12)
                    .ok_or_else(|| SymplecticError::Invalid(format!("translation {x} is off the grid")))
            })
            .collect()
    }

    pub fn arrow(&self, u: Vec<S>, p: Vec<i64>) -> Result<ActionArrow<S>, SymplecticError> {
        self.displacement(&u)?;
        if p.len() != self.base.dims {
            return Err(SymplecticError::Invalid("base point dimension".into()));
        }
        Ok(ActionArrow { u, p: self.base.wrap(&p) })
    }

    fn moved(&self, a: &ActionArrow<S>, sign: i64) -> Vec<i64> {
        let d = self.displacement(&a.u).expect("arrow displacement checked at construction");
        let p: Vec<i64> = a.p.iter().zip(&d).map(|(p, d)| p + sign * d).collect();
        self.base.wrap(&p)
    }

    pub fn src(&self, a: &ActionArrow<S>) -> Vec<i64> {
        self.moved(a, -1)
    }

    pub fn tgt(&self, a: &ActionArrow<S>) -> Vec<i64> {
        self.moved(a, 1)
    }

    pub fn unit(&self, x: &[i64]) -> ActionArrow<S> {
        ActionArrow {
            u: vec![S::zero(); self.base.dims],
            p: self.base.wrap(x),
        }
    }

    pub fn inv(&self, a: &ActionArrow<S>) -> ActionArrow<S> {
        ActionArrow {
            u: a.u.iter().map(|x| -x.clone()).collect(),
            p: a.p.clone(),
        }
    }

    pub fn mult(&self, a: &ActionArrow<S>, b: &ActionArrow<S>) -> Result<ActionArrow<S>, SymplecticError> {
        let (src, tgt) = (self.src(a), self.tgt(b));
        if src != tgt {
            return Err(SymplecticError::NotComposable { src, tgt });
        }
        let dv = self.displacement(&b.u)?;
        let p: Vec<i64> = a.p.iter().zip(&dv).map(|(p, d)| p - d).collect();
        Ok(ActionArrow {
            u: a.u.iter().zip(&b.u).map(|(x, y)| x.clone() + y.clone()).collect(),
            p: self.base.wrap(&p),
        })
    }

    /// Integer covectors in `[−r, r]^m` whose translation lies on the grid.
    pub fn grid_covectors(&self, r: i64) -> Vec<Vec<S>> {
        let mut out: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..self.base.dims {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (-r..=r).map(move |i| {
                        let mut q = p.clone();
                        q.push(i);
                        q
                    })
                })
                .collect();
        }
        out.into_iter()
            .map(|v| v.into_iter().map(S::from_int).collect::<Vec<S>>())
            .filter(|u| self.displacement(u).is_ok())
            .collect()
    }

    /// Exhaustive axiom check over all arrows with covectors from `covectors`
    /// and every grid point. Returns the number of triples checked and the
    /// descriptions of any failures.
    pub fn check_axioms_exhaustive(&self, covectors: &[Vec<S>]) -> (usize, Vec<String>) {
        let points = self.base.points();
        let mut failures = Vec::new();
        let mut triples = 0;
        for u in covectors {
            for p in &points {
                let a = ActionArrow { u: u.clone(), p: p.clone() };
                failures.extend(self.check_arrow(&a));
                for v in covectors {
                    // the unique ζ with covector v composable with a
                    let Some(b) = self.composable_with(&a, v) else { continue };
                    let ab = self.mult(&a, &b).expect("composable by construction");
                    if self.tgt(&ab) != self.tgt(&a) || self.src(&ab) != self.src(&b) {
                        failures.push(format!("endpoints of {a:?}·{b:?}"));
                    }
                    for w in covectors {
                        let Some(c) = self.composable_with(&b, w) else { continue };
                        triples += 1;
                        if let Err(e) = self.associativity_residual(&a, &b, &c) {
                            failures.push(e);
                        }
                    }
                }
            }
        }
        (triples, failures)
    }

    /// The arrow with covector `v` whose target is `s(a)`.
    pub fn composable_with(&self, a: &ActionArrow<S>, v: &[S]) -> Option<ActionArrow<S>> {
        let dv = self.displacement(v).ok()?;
        let s = self.src(a);
        let p: Vec<i64> = s.iter().zip(&dv).map(|(s, d)| s - d).collect();
        Some(ActionArrow {
            u: v.to_vec(),
            p: self.base.wrap(&p),
        })
    }

    /// Largest covector discrepancy between `(ab)c` and `a(bc)`; base points
    /// must agree exactly, otherwise an error naming the triple is returned.
    pub fn associativity_residual(&self, a: &ActionArrow<S>, b: &ActionArrow<S>, c: &ActionArrow<S>) -> Result<f64, String> {
        let fmt = |e: SymplecticError| format!("({a:?}, {b:?}, {c:?}): {e}");
        let left = self.mult(&self.mult(a, b).map_err(fmt)?, c).map_err(fmt)?;
        let right = self.mult(a, &self.mult(b, c).map_err(fmt)?).map_err(fmt)?;
        if left.p != right.p {
            return Err(format!("associativity base points differ on ({a:?}, {b:?}, {c:?})"));
        }
        let r = left
            .u
            .iter()
            .zip(&right.u)
            .map(|(x, y)| (x.clone() - y.clone()).magnitude())
            .fold(0.0, f64::max);
        if r > 0.0 && S::EXACT {
            return Err(format!("associativity covectors differ on ({a:?}, {b:?}, {c:?})"));
        }
        Ok(r)
    }

    fn check_arrow(&self, a: &ActionArrow<S>) -> Vec<String> {
        let mut out = Vec::new();
        let left = self.mult(&self.unit(&self.tgt(a)), a);
        let right = self.mult(a, &self.unit(&self.src(a)));
        if left.as_ref() != Ok(a) {
            out.push(format!("left unit fails on {a:?}"));
        }
        if right.as_ref() != Ok(a) {
            out.push(format!("right unit fails on {a:?}"));
        }
        let i = self.inv(a);
        if self.mult(a, &i) != Ok(self.unit(&self.tgt(a))) {
            out.push(format!("γ·γ⁻¹ fails on {a:?}"));
        }
        if self.mult(&i, a) != Ok(self.unit(&self.src(a))) {
            out.push(format!("γ⁻¹·γ fails on {a:?}"));
        }
        out
    }

    /// A random composable triple with covectors drawn from `covectors`.
    pub fn random_triple(&self, rng: &mut impl Rng, covectors: &[Vec<S>]) -> [ActionArrow<S>; 3] {
        let pick = |rng: &mut dyn rand::RngCore| covectors[rng.gen_range(0..covectors.len())].clone();
        let p: Vec<i64> = (0..self.base.dims).map(|_| rng.gen_range(0..self.base.resolution as i64)).collect();
        let a = ActionArrow { u: pick(rng), p };
        let b = self.composable_with(&a, &pick(rng)).expect("grid covector");
        let c = self.composable_with(&b, &pick(rng)).expect("grid covector");
        [a, b, c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use rand::SeedableRng;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn standard(n: usize) -> AbelianActionGroupoid<Rational> {
        let pi = Matrix::from_rows(vec![vec![q(0), q(1)], vec![q(-1), q(0)]]);
        let rho = Matrix::from_rows(vec![vec![q(1), q(0)], vec![q(0), q(2)]]);
        AbelianActionGroupoid::new(pi, rho, BaseGrid { dims: 2, resolution: n }).unwrap()
    }

    #[test]
    fn zero_pi_is_fiberwise_addition() {
        let g = AbelianActionGroupoid::new(
            Matrix::<Rational>::zeros(2, 2),
            Matrix::identity(2),
            BaseGrid { dims: 2, resolution: 8 },
        )
        .unwrap();
        let a = g.arrow(vec![q(1), q(-2)], vec![3, 4]).unwrap();
        let b = g.arrow(vec![q(5), q(7)], vec![3, 4]).unwrap();
        assert_eq!(g.mult(&a, &b).unwrap(), ActionArrow { u: vec![q(6), q(5)], p: vec![3, 4] });
        let c = g.arrow(vec![q(0), q(1)], vec![3, 5]).unwrap();
        assert!(g.mult(&a, &c).is_err());
    }

    #[test]
    fn exhaustive_axioms_on_coarse_grid() {
        let g = standard(8);
        let cov = g.grid_covectors(1);
        assert_eq!(cov.len(), 9);
        let (triples, failures) = g.check_axioms_exhaustive(&cov);
        assert!(failures.is_empty(), "{failures:?}");
        assert_eq!(triples, 64 * 9 * 9 * 9);
    }

    #[test]
    fn displacement_is_additive() {
        let g = standard(16);
        let u = vec![q(2), q(-1)];
        let v = vec![q(-3), q(4)];
        let sum: Vec<Rational> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let (du, dv, ds) = (g.displacement(&u).unwrap(), g.displacement(&v).unwrap(), g.displacement(&sum).unwrap());
        assert_eq!(ds, vec![du[0] + dv[0], du[1] + dv[1]]);
    }

    #[test]
    fn float_associativity_on_fine_grid() {
        let pi = Matrix::from_rows(vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let rho = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 2.0]]);
        let g = AbelianActionGroupoid::new(pi, rho, BaseGrid { dims: 2, resolution: 64 }).unwrap();
        let cov = g.grid_covectors(3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let [a, b, c] = g.random_triple(&mut rng, &cov);
            assert!(g.associativity_residual(&a, &b, &c).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn off_grid_translation_is_rejected() {
        let pi = Matrix::from_rows(vec![vec![q(0), q(1)], vec![q(-1), q(0)]]);
        let g = AbelianActionGroupoid::new(pi, Matrix::identity(2), BaseGrid { dims: 2, resolution: 8 }).unwrap();
        assert!(g.arrow(vec![q(1), q(0)], vec![0, 0]).is_err());
        assert!(g.arrow(vec![q(2), q(0)], vec![0, 0]).is_ok());
    }
}
