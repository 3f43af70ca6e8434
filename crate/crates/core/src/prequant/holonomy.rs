use num_complex::Complex64;

use super::{PrequantError, SymplecticPotential};
use crate::linalg::Matrix;
use crate::poly::OneForm;
use crate::scalar::Scalar;

/// Default number of quadrature intervals.
pub const DEFAULT_NODES: usize = 256;

/// Allowed gap between the end of a loop and the lifted start point.
const CLOSURE_TOL: f64 = 1e-9;

/// A scanned sample with `|Im hol| ≤ ON_LEVEL` counts as sitting on a level;
/// quadrature rounding reaches ~1e-13 at |y| ≈ 3.
const ON_LEVEL: f64 = 1e-10;

/// A closed loop in a leaf, written in a chart where closing may involve a
/// deck translation `lift` (e.g. `2π e_i` on a torus).
pub enum Loop<'a> {
    /// `t ↦ base + t·period`, `t ∈ [0, 1]`.
    Straight { base: Vec<f64>, period: Vec<f64> },
    /// A smooth path on `[0, 1]` with its velocity.
    Parametric {
        path: &'a dyn Fn(f64) -> Vec<f64>,
        velocity: &'a dyn Fn(f64) -> Vec<f64>,
        lift: Vec<f64>,
    },
    /// Polygon through `points`; the last point must equal the first plus `lift`.
    Sampled { points: Vec<Vec<f64>>, lift: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolonomyMethod {
    ClosedForm,
    Quadrature { nodes: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Holonomy {
    /// `exp(−i∮θ)`.
    pub value: Complex64,
    /// `∮θ`.
    pub integral: f64,
    pub method: HolonomyMethod,
}

fn gap(a: &[f64], b: &[f64], lift: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(lift)
        .map(|((x, y), l)| (y - x - l).abs())
        .fold(0.0, f64::max)
}

fn pair(form: &OneForm<f64>, at: &[f64], v: &[f64]) -> f64 {
    form.eval_f64(at).iter().zip(v).map(|(a, b)| a * b).sum()
}

/// `∮θ` along a straight loop when the coefficients restricted to it are constant.
fn closed_form(form: &OneForm<f64>, base: &[f64], period: &[f64]) -> Option<f64> {
    let a = Matrix::from_columns(period.len(), &[period.to_vec()]);
    let mut restricted = crate::poly::Polynomial::zero(1);
    for (c, &v) in form.coeffs.iter().zip(period) {
        if v != 0.0 {
            restricted = &restricted + &c.pullback_affine(&a, base).scale(&v);
        }
    }
    let scale = 1.0 + restricted.max_abs_coefficient();
    let varies = restricted.terms().any(|(e, c)| e[0] > 0 && c.abs() > 1e-14 * scale);
    (!varies).then(|| restricted.coefficient(&[0]))
}

fn quadrature(form: &OneForm<f64>, lp: &Loop<'_>, nodes: usize) -> Result<(f64, usize), PrequantError> {
    match lp {
        Loop::Straight { base, period } => {
            let n = nodes.max(1);
            let at = |t: f64| -> Vec<f64> { base.iter().zip(period).map(|(b, p)| b + t * p).collect() };
            let mut sum = 0.0;
            for k in 0..=n {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                sum += w * pair(form, &at(k as f64 / n as f64), period);
            }
            Ok((sum / n as f64, n))
        }
        Loop::Parametric { path, velocity, lift } => {
            let g = gap(&path(0.0), &path(1.0), lift);
            if g > CLOSURE_TOL {
                return Err(PrequantError::OpenPath { gap: g });
            }
            let n = nodes.max(1);
            let mut sum = 0.0;
            for k in 0..=n {
                let t = k as f64 / n as f64;
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                sum += w * pair(form, &path(t), &velocity(t));
            }
            Ok((sum / n as f64, n))
        }
        Loop::Sampled { points, lift } => {
            if points.len() < 2 {
                return Err(PrequantError::OpenPath { gap: f64::INFINITY });
            }
            let g = gap(&points[0], points.last().expect("nonempty"), lift);
            if g > CLOSURE_TOL {
                return Err(PrequantError::OpenPath { gap: g });
            }
            let mut sum = 0.0;
            for w in points.windows(2) {
                let step: Vec<f64> = w[1].iter().zip(&w[0]).map(|(b, a)| b - a).collect();
                sum += 0.5 * (pair(form, &w[0], &step) + pair(form, &w[1], &step));
            }
            Ok((sum, points.len() - 1))
        }
    }
}

fn finish(integral: f64, method: HolonomyMethod) -> Holonomy {
    Holonomy {
        value: Complex64::from_polar(1.0, -integral),
        integral,
        method,
    }
}

/// `exp(−i∮θ)`, in closed form when `θ` is constant along a straight loop
/// and by composite trapezoidal quadrature otherwise.
pub fn holonomy<S: Scalar>(theta: &SymplecticPotential<S>, lp: &Loop<'_>, nodes: usize) -> Result<Holonomy, PrequantError> {
    let form = theta.form.to_f64();
    if let Loop::Straight { base, period } = lp {
        if let Some(v) = closed_form(&form, base, period) {
            return Ok(finish(v, HolonomyMethod::ClosedForm));
        }
    }
    let (v, n) = quadrature(&form, lp, nodes)?;
    Ok(finish(v, HolonomyMethod::Quadrature { nodes: n }))
}

/// Always integrate numerically, even when a closed form is available.
pub fn holonomy_forced_quadrature<S: Scalar>(
    theta: &SymplecticPotential<S>,
    lp: &Loop<'_>,
    nodes: usize,
) -> Result<Holonomy, PrequantError> {
    let (v, n) = quadrature(&theta.form.to_f64(), lp, nodes)?;
    Ok(finish(v, HolonomyMethod::Quadrature { nodes: n }))
}

/// Levels `y ∈ [lo, hi]` where `hol(y) = 1`, located by scanning `samples`
/// points and bisecting sign changes of `Im hol` on the half-plane `Re hol > 0`.
pub fn bs_levels(
    hol: impl Fn(f64) -> Result<Complex64, PrequantError>,
    lo: f64,
    hi: f64,
    samples: usize,
) -> Result<Vec<f64>, PrequantError> {
    let samples = samples.max(2);
    let ys: Vec<f64> = (0..samples)
        .map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64)
        .collect();
    let vals = ys.iter().map(|&y| hol(y)).collect::<Result<Vec<_>, _>>()?;
    let mut out: Vec<f64> = Vec::new();
    let push = |y: f64, out: &mut Vec<f64>| {
        if out.last().map_or(true, |&l| (y - l).abs() > 1e-9) {
            out.push(y);
        }
    };
    for k in 0..samples {
        let (y, v) = (ys[k], vals[k]);
        if v.re > 0.0 && v.im.abs() <= ON_LEVEL {
            push(y, &mut out);
            continue;
        }
        if k + 1 == samples {
            break;
        }
        let (mut a, mut b) = (y, ys[k + 1]);
        let (va, vb) = (v, vals[k + 1]);
        if va.re <= 0.0 || vb.re <= 0.0 || va.im.signum() == vb.im.signum() || vb.im.abs() <= ON_LEVEL {
            continue;
        }
        let sa = va.im.signum();
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            let vm = hol(mid)?;
            if vm.im.signum() == sa {
                a = mid;
            } else {
                b = mid;
            }
            if b - a < 1e-13 {
                break;
            }
        }
        push(0.5 * (a + b), &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;
    use crate::scalar::Rational;
    use std::f64::consts::{PI, TAU};

    fn leaf(y: f64) -> Loop<'static> {
        Loop::Straight {
            base: vec![0.0, y],
            period: vec![TAU, 0.0],
        }
    }

    #[test]
    fn cotangent_circle_holonomy() {
        let theta = SymplecticPotential::<Rational>::y_dx(1);
        let h = holonomy(&theta, &leaf(2.0), DEFAULT_NODES).unwrap();
        assert_eq!(h.method, HolonomyMethod::ClosedForm);
        assert!((h.value - 1.0).norm() < 1e-12);
        let half = holonomy_forced_quadrature(&theta, &leaf(0.5), DEFAULT_NODES).unwrap();
        assert!((half.value + 1.0).norm() < 1e-12);
    }

    #[test]
    fn open_sampled_path_is_rejected() {
        let theta = SymplecticPotential::<Rational>::y_dx(1);
        let lp = Loop::Sampled {
            points: vec![vec![0.0, 1.0], vec![1.0, 1.0]],
            lift: vec![TAU, 0.0],
        };
        assert!(matches!(holonomy(&theta, &lp, 8), Err(PrequantError::OpenPath { .. })));
    }

    #[test]
    fn gauge_shift_preserves_holonomy() {
        let theta = SymplecticPotential::<Rational>::y_dx(1);
        let f = Polynomial::from_terms(2, [(vec![2, 1], Rational::from_int(1)), (vec![0, 3], Rational::from_ratio(-1, 2))]);
        let shifted = theta.gauge_shift(&f);
        let path = |t: f64| vec![1.0 + (TAU * t).cos(), 0.5 * (TAU * t).sin()];
        let vel = |t: f64| vec![-TAU * (TAU * t).sin(), 0.5 * TAU * (TAU * t).cos()];
        let lp = Loop::Parametric {
            path: &path,
            velocity: &vel,
            lift: vec![0.0, 0.0],
        };
        let a = holonomy(&theta, &lp, 512).unwrap();
        let b = holonomy(&shifted, &lp, 512).unwrap();
        assert!((a.value - b.value).norm() < 1e-10);
        // ∮ y dx around an ellipse of semi-axes 1, ½ is −π/2.
        assert!((a.integral + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn level_finder_recovers_integers() {
        let theta = SymplecticPotential::<Rational>::y_dx(1);
        let levels = bs_levels(|y| Ok(holonomy(&theta, &leaf(y), 64)?.value), -2.0, 2.0, 37).unwrap();
        assert_eq!(levels.len(), 5);
        for (l, k) in levels.iter().zip(-2..=2) {
            assert!((l - k as f64).abs() < 1e-9, "{levels:?}");
        }
    }
}
