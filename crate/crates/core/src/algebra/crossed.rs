use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rustfft::FftPlanner;
use serde_json::{json, Value};

use super::{json_complex, AlgebraError, StarAlgebra};
use crate::numfmt::scalar_to_json;
use crate::scalar::Scalar;

/// Integer tolerance for deciding that an inexact shift is a whole number of grid steps.
const ROLL_TOL: f64 = 1e-12;

/// Phases attached to the generators.
#[derive(Debug, Clone, PartialEq)]
pub enum CrossedTwist<S: Scalar> {
    None,
    /// `λ(n) = exp(2πi·weight·Σ nᵢ phaseᵢ)`: a character of `ℤ^k`, as on
    /// sections of the `weight`-th power of a line bundle trivialized over
    /// the grid. Being a homomorphism, its 2-cocycle is trivial.
    Character { weight: i64, phases: Vec<S> },
}

/// `ℤ^k` acting on a sampled torus `T^m` (grid `dims`, row-major, last axis
/// fastest) by `α_n(f)(x) = f(x − Σ nᵢ shiftᵢ)`, shifts measured in turns.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossedAction<S: Scalar> {
    dims: Vec<usize>,
    shifts: Vec<Vec<S>>,
    twist: CrossedTwist<S>,
}

fn sum_vec(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for a in (0..dims.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * dims[a + 1];
    }
    s
}

/// `out(x) = f(x − s·e_axis)` for an integer step count `s`.
pub(crate) fn roll<T: Clone>(f: &[T], dims: &[usize], axis: usize, s: i64) -> Vec<T> {
    let st = strides(dims);
    let n = dims[axis] as i64;
    (0..f.len())
        .map(|idx| {
            let c = (idx / st[axis]) as i64 % n;
            let src = (c - s).rem_euclid(n);
            f[idx - c as usize * st[axis] + src as usize * st[axis]].clone()
        })
        .collect()
}

impl<S: Scalar> CrossedAction<S> {
    pub fn new(dims: Vec<usize>, shifts: Vec<Vec<S>>, twist: CrossedTwist<S>) -> Result<Arc<Self>, AlgebraError> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(AlgebraError::GridMismatch(format!("grid dimensions {dims:?}")));
        }
        if let Some(bad) = shifts.iter().find(|s| s.len() != dims.len()) {
            return Err(AlgebraError::DimensionMismatch {
                expected: dims.len(),
                found: bad.len(),
            });
        }
        if let CrossedTwist::Character { phases, .. } = &twist {
            if phases.len() != shifts.len() {
                return Err(AlgebraError::DimensionMismatch {
                    expected: shifts.len(),
                    found: phases.len(),
                });
            }
        }
        Ok(Arc::new(CrossedAction { dims, shifts, twist }))
    }

    /// `ℤ ⋉ S¹`, rotation by `rotation` turns (`2πℏ` radians for `rotation = ℏ`).
    pub fn circle(n: usize, rotation: S) -> Result<Arc<Self>, AlgebraError> {
        Self::new(vec![n], vec![vec![rotation]], CrossedTwist::None)
    }

    pub fn rank(&self) -> usize {
        self.shifts.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn shifts(&self) -> &[Vec<S>] {
        &self.shifts
    }

    pub fn twist(&self) -> &CrossedTwist<S> {
        &self.twist
    }

    pub fn grid_len(&self) -> usize {
        self.dims.iter().product()
    }

    /// Grid point `idx` as angles in turns.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let st = strides(&self.dims);
        self.dims
            .iter()
            .zip(&st)
            .map(|(&n, &s)| ((idx / s) % n) as f64 / n as f64)
            .collect()
    }

    /// `Σ nᵢ shiftᵢ`, per axis, in turns.
    pub fn offset(&self, n: &[i64]) -> Vec<S> {
        (0..self.dims.len())
            .map(|a| {
                n.iter()
                    .zip(&self.shifts)
                    .fold(S::zero(), |acc, (&k, s)| acc + s[a].clone() * S::from_int(k))
            })
            .collect()
    }

    /// Whole grid steps per axis when every component of the offset is one.
    fn steps(&self, offset: &[S]) -> Option<Vec<i64>> {
        offset
            .iter()
            .zip(&self.dims)
            .map(|(s, &n)| (s.clone() * S::from_int(n as i64)).as_integer(ROLL_TOL))
            .collect()
    }

    /// `α_n(f)`: exact index rolls when the offset lies on the grid,
    /// otherwise an exact phase multiplication on the discrete Fourier modes.
    pub fn rotate(&self, f: &[Complex64], n: &[i64]) -> Vec<Complex64> {
        let offset = self.offset(n);
        let mut out = f.to_vec();
        for (axis, s) in offset.iter().enumerate() {
            if s.is_zero() {
                continue;
            }
            let steps = (s.clone() * S::from_int(self.dims[axis] as i64)).as_integer(ROLL_TOL);
            out = match steps {
                Some(k) => roll(&out, &self.dims, axis, k),
                None => self.spectral_shift(&out, axis, s),
            };
        }
        out
    }

    fn spectral_shift(&self, f: &[Complex64], axis: usize, s: &S) -> Vec<Complex64> {
        let n = self.dims[axis];
        let st = strides(&self.dims)[axis];
        let mut planner = FftPlanner::new();
        let (fwd, inv) = (planner.plan_fft_forward(n), planner.plan_fft_inverse(n));
        let factors: Vec<Complex64> = (0..n as i64)
            .map(|k| {
                let kk = if 2 * k <= n as i64 { k } else { k - n as i64 };
                let t = (s.clone() * S::from_int(kk)).rem_euclid_int(1).approx();
                Complex64::from_polar(1.0, -TAU * t)
            })
            .collect();
        let mut out = f.to_vec();
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for start in 0..f.len() {
            if (start / st) % n != 0 {
                continue;
            }
            for (c, slot) in line.iter_mut().enumerate() {
                *slot = f[start + c * st];
            }
            fwd.process(&mut line);
            line.iter_mut().zip(&factors).for_each(|(z, w)| *z *= w / n as f64);
            inv.process(&mut line);
            for (c, z) in line.iter().enumerate() {
                out[start + c * st] = *z;
            }
        }
        out
    }

    /// `λ(n)` in turns.
    pub fn lambda_turns(&self, n: &[i64]) -> S {
        match &self.twist {
            CrossedTwist::None => S::zero(),
            CrossedTwist::Character { weight, phases } => n
                .iter()
                .zip(phases)
                .fold(S::zero(), |acc, (&k, p)| acc + p.clone() * S::from_int(k * weight)),
        }
    }

    /// `Ω(m, n) = λ(m) α_m(λ(n)) / λ(m + n)` in turns; λ is constant on the grid.
    pub fn omega_turns(&self, m: &[i64], n: &[i64]) -> S {
        (self.lambda_turns(m) + self.lambda_turns(n) - self.lambda_turns(&sum_vec(m, n))).rem_euclid_int(1)
    }

    fn omega(&self, m: &[i64], n: &[i64]) -> Complex64 {
        turn_phase(&self.omega_turns(m, n))
    }

    /// Exponent `t` (mod 1) with `u_i v_a = e^{2πit} v_a u_i` for
    /// `u_i = δ_{e_i}` and `v_a = e^{2πi x_a}`: `t = −shift_{i,a}`.
    pub fn relation_turns(&self, generator: usize, axis: usize) -> S {
        (-self.shifts[generator][axis].clone()).rem_euclid_int(1)
    }

    pub fn delta(self: &Arc<Self>, n: Vec<i64>) -> CrossedElement<S> {
        let one = vec![Complex64::new(1.0, 0.0); self.grid_len()];
        CrossedElement::from_terms(self, [(n, one)]).expect("grid-sized")
    }

    /// `δ_0 ⊗ f`.
    pub fn function(self: &Arc<Self>, f: Vec<Complex64>) -> Result<CrossedElement<S>, AlgebraError> {
        CrossedElement::from_terms(self, [(vec![0; self.rank()], f)])
    }

    /// `e^{2πi x_axis}` sampled on the grid.
    pub fn coordinate_wave(&self, axis: usize) -> Vec<Complex64> {
        (0..self.grid_len())
            .map(|idx| Complex64::from_polar(1.0, TAU * self.point(idx)[axis]))
            .collect()
    }

    /// Check `u v = e^{2πit} v u` with `u = δ_{e_i} ⊗ 1`, `v = δ_0 ⊗ e^{2πi x_a}`.
    ///
    /// The product is always evaluated in floating point. When the rotation
    /// is a whole number of grid steps the relation is additionally checked
    /// on exact exponents of `N`-th roots of unity, which is the reported
    /// residual in that case.
    pub fn generator_relation_check(self: &Arc<Self>, generator: usize, axis: usize) -> Result<RelationCheck<S>, AlgebraError> {
        if generator >= self.rank() || axis >= self.dims.len() {
            return Err(AlgebraError::DimensionMismatch {
                expected: self.rank(),
                found: generator.max(axis),
            });
        }
        let t = self.relation_turns(generator, axis);
        let mut e = vec![0; self.rank()];
        e[generator] = 1;
        let u = self.delta(e.clone());
        let v = self.function(self.coordinate_wave(axis))?;
        let uv = u.convolve(&v)?;
        let vu = v.convolve(&u)?;
        let phase = turn_phase(&t);
        let (a, b) = (uv.coefficient(&e), vu.coefficient(&e));
        let float_residual = a.iter().zip(&b).map(|(x, y)| (x - phase * y).norm()).fold(0.0, f64::max);

        let exact_residual = if S::EXACT {
            self.exact_relation_residual(&e, axis, &t)
        } else {
            None
        };
        Ok(RelationCheck {
            phase_turns: t,
            residual: exact_residual.unwrap_or(float_residual),
            float_residual,
            exact: exact_residual.is_some(),
        })
    }

    fn exact_relation_residual(&self, e: &[i64], axis: usize, t: &S) -> Option<f64> {
        let n = self.dims[axis] as i64;
        let steps = self.steps(&self.offset(e))?;
        let tn = (t.clone() * S::from_int(n)).as_integer(0.0)?;
        if self.omega_turns(e, &vec![0; e.len()]) != S::zero() || self.omega_turns(&vec![0; e.len()], e) != S::zero() {
            return None;
        }
        let st = strides(&self.dims)[axis];
        let v: Vec<i64> = (0..self.grid_len()).map(|idx| ((idx / st) as i64) % n).collect();
        let mut uv = v.clone();
        for (a, &k) in steps.iter().enumerate() {
            uv = roll(&uv, &self.dims, a, k);
        }
        let roots: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64)).collect();
        let res = uv
            .iter()
            .zip(&v)
            .map(|(&x, &y)| {
                let (i, j) = (x.rem_euclid(n), (y + tn).rem_euclid(n));
                if i == j {
                    0.0
                } else {
                    (roots[i as usize] - roots[j as usize]).norm()
                }
            })
            .fold(0.0, f64::max);
        Some(res)
    }
}

fn turn_phase<S: Scalar>(t: &S) -> Complex64 {
    let r = t.rem_euclid_int(1);
    if r.is_zero() {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, TAU * r.approx())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationCheck<S: Scalar> {
    /// Relation exponent `t` in `uv = e^{2πit} vu`, mod 1.
    pub phase_turns: S,
    pub residual: f64,
    pub float_residual: f64,
    /// Whether `residual` comes from exact root-of-unity arithmetic.
    pub exact: bool,
}

/// `Σ_n f_n U_n` with grid functions `f_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossedElement<S: Scalar> {
    action: Arc<CrossedAction<S>>,
    coeffs: BTreeMap<Vec<i64>, Vec<Complex64>>,
}

impl<S: Scalar> CrossedElement<S> {
    pub fn from_terms(
        action: &Arc<CrossedAction<S>>,
        terms: impl IntoIterator<Item = (Vec<i64>, Vec<Complex64>)>,
    ) -> Result<Self, AlgebraError> {
        let mut coeffs: BTreeMap<Vec<i64>, Vec<Complex64>> = BTreeMap::new();
        for (n, f) in terms {
            if n.len() != action.rank() {
                return Err(AlgebraError::DimensionMismatch {
                    expected: action.rank(),
                    found: n.len(),
                });
            }
            if f.len() != action.grid_len() {
                return Err(AlgebraError::GridMismatch(format!(
                    "function has {} samples, grid has {}",
                    f.len(),
                    action.grid_len()
                )));
            }
            match coeffs.get_mut(&n) {
                Some(g) => g.iter_mut().zip(&f).for_each(|(x, y)| *x += y),
                None => {
                    coeffs.insert(n, f);
                }
            }
        }
        Ok(CrossedElement {
            action: Arc::clone(action),
            coeffs,
        })
    }

    pub fn action(&self) -> &Arc<CrossedAction<S>> {
        &self.action
    }

    pub fn coefficient(&self, n: &[i64]) -> Vec<Complex64> {
        self.coeffs
            .get(n)
            .cloned()
            .unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); self.action.grid_len()])
    }

    fn same_action(&self, other: &Self) -> Result<(), AlgebraError> {
        if Arc::ptr_eq(&self.action, &other.action) || self.action == other.action {
            Ok(())
        } else if self.action.dims != other.action.dims {
            Err(AlgebraError::GridMismatch(format!("{:?} vs {:?}", self.action.dims, other.action.dims)))
        } else {
            Err(AlgebraError::MismatchedAlgebra)
        }
    }

    /// `(a*b)(n) = Σ_m a(m) · α_m(b(n − m)) · Ω(m, n − m)`.
    pub fn convolve(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.same_action(other)?;
        let mut terms = Vec::new();
        for (m, f) in &self.coeffs {
            for (l, g) in &other.coeffs {
                let w = self.action.omega(m, l);
                let rg = self.action.rotate(g, m);
                let prod: Vec<Complex64> = f.iter().zip(&rg).map(|(x, y)| x * y * w).collect();
                terms.push((sum_vec(m, l), prod));
            }
        }
        Self::from_terms(&self.action, terms)
    }

    /// `(f U_m)* = Ω(−m, m)⁻¹ α_{−m}(f̄) U_{−m}`.
    pub fn adjoint(&self) -> Self {
        let terms: Vec<_> = self
            .coeffs
            .iter()
            .map(|(m, f)| {
                let neg: Vec<i64> = m.iter().map(|v| -v).collect();
                let w = self.action.omega(&neg, m).conj();
                let conj: Vec<Complex64> = f.iter().map(|z| z.conj()).collect();
                let r = self.action.rotate(&conj, &neg).into_iter().map(|z| z * w).collect();
                (neg, r)
            })
            .collect();
        Self::from_terms(&self.action, terms).expect("same grid")
    }

    /// `max_n max_x |a(n)(x) − b(n)(x)|`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .map(|n| {
                self.coefficient(n)
                    .iter()
                    .zip(&other.coefficient(n))
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        let shifts: Vec<Vec<Value>> = self
            .action
            .shifts
            .iter()
            .map(|s| s.iter().map(scalar_to_json).collect())
            .collect();
        let twist = match &self.action.twist {
            CrossedTwist::None => Value::Null,
            CrossedTwist::Character { weight, phases } => json!({
                "kind": "character",
                "weight": weight,
                "phases_turns": phases.iter().map(scalar_to_json).collect::<Vec<_>>(),
            }),
        };
        let support: Vec<Value> = self
            .coeffs
            .iter()
            .map(|(n, f)| json!([n, f.iter().map(|z| json_complex(*z)).collect::<Vec<_>>()]))
            .collect();
        json!({
            "kind": "crossed",
            "grid": self.action.dims,
            "shifts_turns": shifts,
            "twist": twist,
            "support": support,
        })
    }
}

impl<S: Scalar> StarAlgebra for CrossedElement<S> {
    fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.convolve(other)
    }

    fn star(&self) -> Self {
        self.adjoint()
    }

    fn is_zero(&self) -> bool {
        self.coeffs.values().flatten().all(|z| *z == Complex64::new(0.0, 0.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectionCheck<S: Scalar> {
    pub samples: usize,
    pub max_residual: f64,
    /// `λ(e_i)` on weight one, the phase in `U ψ U⁻¹ = α(ψ) · phase`.
    pub phase_turns: S,
}

/// Random trigonometric polynomial of degree `< N_a/4` on every axis, so
/// that products of two of them are resolved by the grid without aliasing.
fn band_limited(action: &CrossedAction<impl Scalar>, rng: &mut impl Rng) -> Vec<Complex64> {
    let bands: Vec<i64> = action.dims.iter().map(|&n| (n as i64 / 4 - 1).max(0)).collect();
    let mut modes: Vec<(Vec<i64>, Complex64)> = vec![(vec![], Complex64::new(0.0, 0.0))];
    for &b in &bands {
        modes = modes
            .into_iter()
            .flat_map(|(m, _)| {
                (-b..=b).map(move |k| {
                    let mut m = m.clone();
                    m.push(k);
                    (m, Complex64::new(0.0, 0.0))
                })
            })
            .collect();
    }
    for (_, c) in modes.iter_mut() {
        *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    (0..action.grid_len())
        .map(|idx| {
            let x = action.point(idx);
            modes
                .iter()
                .map(|(m, c)| {
                    let t: f64 = m.iter().zip(&x).map(|(&k, xi)| k as f64 * xi).sum();
                    c * Complex64::from_polar(1.0, TAU * t)
                })
                .sum()
        })
        .collect()
}

/// For sections `ψ` of weight one and `ξ` of weight `w`, compare
/// `U_{w+1}(ψ · U_w⁻¹ ξ)` with `α(ψ) · λ(e_i) · ξ`, where on weight `w` the
/// generator acts by `U_w = λ(e_i)^w α_{e_i}`.
pub fn section_conjugation_check<S: Scalar>(
    action: &CrossedAction<S>,
    generator: usize,
    weight: i64,
    samples: usize,
    seed: u64,
) -> Result<SectionCheck<S>, AlgebraError> {
    let CrossedTwist::Character { phases, .. } = &action.twist else {
        return Err(AlgebraError::Unsupported("section check needs a character twist".into()));
    };
    if generator >= action.rank() {
        return Err(AlgebraError::DimensionMismatch {
            expected: action.rank(),
            found: generator,
        });
    }
    let mut e = vec![0; action.rank()];
    e[generator] = 1;
    let neg: Vec<i64> = e.iter().map(|v| -v).collect();
    let lam = |w: i64| turn_phase(&(phases[generator].clone() * S::from_int(w)));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let psi = band_limited(action, &mut rng);
        let xi = band_limited(action, &mut rng);
        let pulled: Vec<Complex64> = action.rotate(&xi, &neg).into_iter().map(|z| z / lam(weight)).collect();
        let prod: Vec<Complex64> = psi.iter().zip(&pulled).map(|(a, b)| a * b).collect();
        let lhs: Vec<Complex64> = action.rotate(&prod, &e).into_iter().map(|z| z * lam(weight + 1)).collect();
        let rot_psi = action.rotate(&psi, &e);
        let r = lhs
            .iter()
            .zip(rot_psi.iter().zip(&xi))
            .map(|(l, (p, x))| (l - p * lam(1) * x).norm())
            .fold(0.0, f64::max);
        worst = worst.max(r);
    }
    Ok(SectionCheck {
        samples,
        max_residual: worst,
        phase_turns: phases[generator].clone().rem_euclid_int(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn roll_moves_samples_forward() {
        let f = vec![0, 1, 2, 3, 4, 5];
        assert_eq!(roll(&f, &[2, 3], 1, 1), vec![2, 0, 1, 5, 3, 4]);
        assert_eq!(roll(&f, &[2, 3], 0, 1), vec![3, 4, 5, 0, 1, 2]);
    }

    #[test]
    fn rational_relation_is_exactly_zero() {
        for (p, q, n) in [(1, 3, 12), (2, 5, 20), (1, 2, 8)] {
            let a = CrossedAction::circle(n, Rational::from_ratio(p, q)).unwrap();
            let c = a.generator_relation_check(0, 0).unwrap();
            assert!(c.exact);
            assert_eq!(c.residual, 0.0);
            assert!(c.float_residual < 1e-12);
            assert_eq!(c.phase_turns, (-Rational::from_ratio(p, q)).rem_euclid_int(1));
        }
    }

    #[test]
    fn irrational_relation_by_phase_multiplication() {
        let a = CrossedAction::circle(256, 0.377_f64).unwrap();
        let c = a.generator_relation_check(0, 0).unwrap();
        assert!(!c.exact);
        assert!(c.residual <= 1e-10, "{}", c.residual);
    }

    #[test]
    fn rational_off_grid_uses_spectral_shift() {
        let a = CrossedAction::circle(16, Rational::from_ratio(1, 3)).unwrap();
        let c = a.generator_relation_check(0, 0).unwrap();
        assert!(!c.exact && c.residual < 1e-12);
    }

    #[test]
    fn generators_are_unitary_and_star_is_anti() {
        let a = CrossedAction::new(
            vec![8, 12],
            vec![vec![0.21, 0.35], vec![0.5, 0.25]],
            CrossedTwist::Character {
                weight: 1,
                phases: vec![0.1, -0.3],
            },
        )
        .unwrap();
        let u = a.delta(vec![1, 0]);
        let one = a.delta(vec![0, 0]);
        assert!(u.adjoint().convolve(&u).unwrap().distance(&one) < 1e-13);
        let f = a.function(a.coordinate_wave(1)).unwrap();
        let x = u.convolve(&f).unwrap();
        let y = a.delta(vec![0, 1]).convolve(&f.adjoint()).unwrap();
        let lhs = x.convolve(&y).unwrap().adjoint();
        let rhs = y.adjoint().convolve(&x.adjoint()).unwrap();
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = CrossedAction::circle(8, 0.25_f64).unwrap();
        let b = CrossedAction::circle(16, 0.25_f64).unwrap();
        assert!(matches!(a.function(vec![Complex64::new(1.0, 0.0); 3]), Err(AlgebraError::GridMismatch(_))));
        assert!(matches!(a.delta(vec![1]).convolve(&b.delta(vec![1])), Err(AlgebraError::GridMismatch(_))));
    }

    #[test]
    fn section_conjugation_on_a_torus() {
        let a = CrossedAction::new(
            vec![16, 32],
            vec![vec![0.377, 0.123]],
            CrossedTwist::Character {
                weight: 1,
                phases: vec![0.377],
            },
        )
        .unwrap();
        let c = section_conjugation_check(&a, 0, 1, 10, 11).unwrap();
        assert!(c.max_residual < 1e-10, "{}", c.max_residual);
    }
}
