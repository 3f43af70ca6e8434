//! Quantization of trigonometric polynomials on `T² = ℝ²/ℤ²` into the
//! twisted lattice algebra and the strict-deformation defect
//! `‖(1/iℏ)[Q f, Q g] − Q{f, g}‖` as `ℏ → 0`.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{truncated_regular_rep, AlgebraError, LatticeAlgebra, LatticeElement, NormMethod};
use crate::numfmt::sci;
use crate::poisson::TrigPolynomial;
use crate::scalar::Scalar;

/// Bivector `π¹²` on `ℝ²/ℤ²` for which the torus cocycle has a vanishing
/// classical defect.
pub const TORUS_POISSON: f64 = 1.0 / (2.0 * PI);

/// Default truncation window for norms of general elements.
pub const DEFAULT_RADIUS: i64 = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeformationError {
    #[error("quantization is only wired for d = 2, got d = {0}")]
    Dimension(usize),
    #[error("invalid ħ grid: {0}")]
    InvalidGrid(String),
    #[error("csv export failed: {0}")]
    Csv(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// `Q_ℏ(e^{2πi m·x}) = δ_m`, extended linearly.
pub fn quantize_into<S: Scalar>(
    f: &TrigPolynomial,
    alg: &Arc<LatticeAlgebra<S>>,
) -> Result<LatticeElement<S>, DeformationError> {
    if f.dim() != 2 || alg.dim() != 2 {
        return Err(DeformationError::Dimension(if f.dim() != 2 { f.dim() } else { alg.dim() }));
    }
    Ok(LatticeElement::from_terms(alg, f.terms().map(|(m, c)| (m.clone(), *c))))
}

pub fn quantize_trig<S: Scalar>(f: &TrigPolynomial, hbar: S) -> Result<LatticeElement<S>, DeformationError> {
    quantize_into(f, &LatticeAlgebra::torus(hbar))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectValue {
    pub value: f64,
    pub method: NormMethod,
    /// Window radius of the truncated representation, when one was used.
    pub radius: Option<i64>,
    /// `ℓ¹` norm of the defect element, an upper bound for its C*-norm.
    pub l1_bound: f64,
}

fn poisson_matrix(pi12: f64) -> Vec<Vec<f64>> {
    vec![vec![0.0, pi12], vec![-pi12, 0.0]]
}

fn single_term(f: &TrigPolynomial) -> Option<(Vec<i64>, Complex64)> {
    let mut it = f.terms();
    let first = it.next()?;
    it.next().is_none().then(|| (first.0.clone(), *first.1))
}

/// Closed form for `f = a e_m`, `g = b e_n` with `κ = m₁n₂ − m₂n₁`:
/// `|ab| · |4π²π¹²κ − (2/ℏ) sin(πℏκ)|`, which is `|2πκ − (2/ℏ)sin(πℏκ)|`
/// at `π¹² = 1/(2π)`.
pub fn monomial_defect(m: &[i64], n: &[i64], hbar: f64, pi12: f64) -> f64 {
    if hbar == 0.0 {
        return 0.0;
    }
    let kappa = (m[0] * n[1] - m[1] * n[0]) as f64;
    (4.0 * PI * PI * pi12 * kappa - 2.0 / hbar * (PI * hbar * kappa).sin()).abs()
}

/// The defect element `(1/iℏ)[Q f, Q g] − Q{f, g}`, assembled as
/// `P(f, g) − P(g, f)` with `P(f, g) = (1/iℏ) Q f Q g − ½ Q{f, g}` so that
/// swapping the arguments negates it exactly and `f = g` gives exactly 0.
pub fn defect_element<S: Scalar>(
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    hbar: S,
    pi12: f64,
) -> Result<LatticeElement<S>, DeformationError> {
    let alg = LatticeAlgebra::torus(hbar.clone());
    let (qf, qg) = (quantize_into(f, &alg)?, quantize_into(g, &alg)?);
    let k = Complex64::new(0.0, -1.0 / hbar.approx());
    let pi = poisson_matrix(pi12);
    let half = |a: &TrigPolynomial, b: &TrigPolynomial| quantize_into(&a.bracket(b, &pi).scale(Complex64::new(0.5, 0.0)), &alg);
    let p_fg = qf.convolve(&qg)?.scale(k).sub(&half(f, g)?)?;
    let p_gf = qg.convolve(&qf)?.scale(k).sub(&half(g, f)?)?;
    Ok(p_fg.sub(&p_gf)?)
}

/// Norm of the defect in the truncated regular representation of radius
/// `max(radius, support)`.
pub fn defect_truncated<S: Scalar>(
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    hbar: S,
    pi12: f64,
    radius: i64,
) -> Result<DefectValue, DeformationError> {
    let e = defect_element(f, g, hbar, pi12)?;
    let rep = truncated_regular_rep(&e, radius.max(e.support_radius()))?;
    let n = rep.norm();
    Ok(DefectValue {
        value: n.value,
        method: n.method,
        radius: n.radius,
        l1_bound: e.l1_norm(),
    })
}

/// The strict-deformation defect. `ℏ = 0` is the classical limit and gives 0
/// by convention; single-term pairs use the closed form.
pub fn deformation_error<S: Scalar>(
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    hbar: S,
    pi12: f64,
    radius: i64,
) -> Result<DefectValue, DeformationError> {
    if f.dim() != 2 || g.dim() != 2 {
        return Err(DeformationError::Dimension(if f.dim() != 2 { f.dim() } else { g.dim() }));
    }
    if hbar.is_zero() {
        return Ok(DefectValue {
            value: 0.0,
            method: NormMethod::ClosedForm,
            radius: None,
            l1_bound: 0.0,
        });
    }
    if let (Some((m, a)), Some((n, b))) = (single_term(f), single_term(g)) {
        let value = (a * b).norm() * monomial_defect(&m, &n, hbar.approx(), pi12);
        return Ok(DefectValue {
            value,
            method: NormMethod::ClosedForm,
            radius: None,
            l1_bound: value,
        });
    }
    if f.is_zero() || g.is_zero() {
        return Ok(DefectValue {
            value: 0.0,
            method: NormMethod::ClosedForm,
            radius: None,
            l1_bound: 0.0,
        });
    }
    // ‖E(g, f)‖ = ‖−E(f, g)‖: evaluate one canonical order so the result is
    // bitwise symmetric in the arguments.
    if sort_key(g) < sort_key(f) {
        return defect_truncated(g, f, hbar, pi12, radius);
    }
    defect_truncated(f, g, hbar, pi12, radius)
}

fn sort_key(f: &TrigPolynomial) -> Vec<(Vec<i64>, u64, u64)> {
    f.terms().map(|(m, c)| (m.clone(), c.re.to_bits(), c.im.to_bits())).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub hbar: f64,
    pub error: f64,
    pub method: NormMethod,
    pub radius: Option<i64>,
    pub l1_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Slope of `log error` against `log ℏ` over points with positive error.
    pub fitted_order: Option<f64>,
}

/// `ℏ = 2^{−k}` for `k = k_min..=k_max`, strictly decreasing.
pub fn dyadic_grid<S: Scalar>(k_min: u32, k_max: u32) -> Vec<S> {
    (k_min..=k_max).map(|k| S::from_ratio(1, 1i64 << k)).collect()
}

fn check_grid<S: Scalar>(grid: &[S]) -> Result<(), DeformationError> {
    if grid.is_empty() {
        return Err(DeformationError::InvalidGrid("empty".into()));
    }
    if grid.iter().any(|h| *h <= S::zero()) {
        return Err(DeformationError::InvalidGrid("values must be positive".into()));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(DeformationError::InvalidGrid("values must be strictly decreasing".into()));
    }
    Ok(())
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_order(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let (mx, my) = logs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn assemble(points: Vec<SweepPoint>) -> SweepResult {
    let fitted_order = fit_order(&points.iter().map(|p| (p.hbar, p.error)).collect::<Vec<_>>());
    SweepResult { points, fitted_order }
}

fn point<S: Scalar>(f: &TrigPolynomial, g: &TrigPolynomial, h: &S, pi12: f64, radius: i64) -> Result<SweepPoint, DeformationError> {
    let v = deformation_error(f, g, h.clone(), pi12, radius)?;
    Ok(SweepPoint {
        hbar: h.approx(),
        error: v.value,
        method: v.method,
        radius: v.radius,
        l1_bound: v.l1_bound,
    })
}

/// Defects over an ħ grid, evaluated concurrently.
pub fn sweep<S: Scalar>(
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    grid: &[S],
    pi12: f64,
    radius: i64,
) -> Result<SweepResult, DeformationError> {
    check_grid(grid)?;
    let points = grid
        .par_iter()
        .map(|h| point(f, g, h, pi12, radius))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(points))
}

/// The same sweep, one point after another.
pub fn sweep_sequential<S: Scalar>(
    f: &TrigPolynomial,
    g: &TrigPolynomial,
    grid: &[S],
    pi12: f64,
    radius: i64,
) -> Result<SweepResult, DeformationError> {
    check_grid(grid)?;
    let points = grid
        .iter()
        .map(|h| point(f, g, h, pi12, radius))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(points))
}

impl SweepResult {
    /// Columns `hbar, error, method, R, fitted_order`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DeformationError> {
        let err = |e: csv::Error| DeformationError::Csv(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["hbar", "error", "method", "R", "fitted_order"]).map_err(err)?;
        let order = self.fitted_order.map(sci).unwrap_or_default();
        for p in &self.points {
            w.write_record([
                sci(p.hbar),
                sci(p.error),
                p.method.tag().to_string(),
                p.radius.map(|r| r.to_string()).unwrap_or_default(),
                order.clone(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| DeformationError::Csv(e.to_string()))
    }

    pub fn is_monotone_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].error <= w[0].error)
    }
}

/// A real trigonometric polynomial on `T²` with wave vectors in
/// `[−radius, radius]²`, random coefficients and unit `ℓ¹` norm.
pub fn random_real_trig(seed: u64, radius: i64, terms: usize) -> TrigPolynomial {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut f = TrigPolynomial::zero(2);
    for _ in 0..terms {
        let m = vec![rng.gen_range(-radius..=radius), rng.gen_range(-radius..=radius)];
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let neg: Vec<i64> = m.iter().map(|v| -v).collect();
        if neg == m {
            f.add_term(m, Complex64::new(c.re, 0.0));
        } else {
            f.add_term(m, c);
            f.add_term(neg, c.conj());
        }
    }
    let l1 = f.l1_norm();
    if l1 > 0.0 {
        f.scale(Complex64::new(1.0 / l1, 0.0))
    } else {
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn mono(m: Vec<i64>) -> TrigPolynomial {
        TrigPolynomial::monomial(m, Complex64::new(1.0, 0.0))
    }

    #[test]
    fn quantize_basics() {
        let one = quantize_trig(&mono(vec![0, 0]), 0.25).unwrap();
        assert_eq!(one, one.algebra().unit());
        let c = quantize_trig(&TrigPolynomial::cosine(vec![1, 0]), 0.25).unwrap();
        assert_eq!(c.coefficient(&[1, 0]), Complex64::new(0.5, 0.0));
        assert_eq!(c.coefficient(&[-1, 0]), Complex64::new(0.5, 0.0));
        assert_eq!(c.adjoint(), c);
        assert!(matches!(
            quantize_trig(&TrigPolynomial::monomial(vec![1], Complex64::new(1.0, 0.0)), 0.1),
            Err(DeformationError::Dimension(1))
        ));
    }

    #[test]
    fn quantization_intertwines_conjugation() {
        let f = TrigPolynomial::from_terms(2, [(vec![1, 2], Complex64::new(0.3, -1.0)), (vec![0, -1], Complex64::new(2.0, 0.5))]);
        let q = quantize_trig(&f.conj(), Rational::from_ratio(1, 5)).unwrap();
        assert_eq!(q, quantize_trig(&f, Rational::from_ratio(1, 5)).unwrap().adjoint());
    }

    #[test]
    fn closed_form_examples() {
        let v = deformation_error(&mono(vec![1, 0]), &mono(vec![0, 1]), 0.1, TORUS_POISSON, 64).unwrap();
        let expected = (2.0 * PI - 20.0 * (0.1 * PI).sin()).abs();
        assert!((v.value - expected).abs() < 1e-14);
        let par = deformation_error(&mono(vec![2, 4]), &mono(vec![1, 2]), 0.3, TORUS_POISSON, 64).unwrap();
        assert_eq!(par.value, 0.0);
        assert_eq!(deformation_error(&mono(vec![1, 0]), &mono(vec![0, 1]), 0.0, TORUS_POISSON, 64).unwrap().value, 0.0);
    }

    #[test]
    fn closed_form_matches_truncated_norm() {
        for (m, n) in [(vec![1, 0], vec![0, 1]), (vec![2, -1], vec![1, 2]), (vec![-1, 1], vec![3, 2])] {
            let closed = monomial_defect(&m, &n, 0.1, TORUS_POISSON);
            let t = defect_truncated(&mono(m), &mono(n), 0.1, TORUS_POISSON, 8).unwrap();
            assert!((closed - t.value).abs() < 1e-10, "{closed} vs {}", t.value);
        }
    }

    #[test]
    fn taylor_limit() {
        // error/ℏ² → π³|κ|³/3.
        let (m, n) = (vec![1, 0], vec![1, 2]);
        let h = 1e-3;
        let ratio = monomial_defect(&m, &n, h, TORUS_POISSON) / (h * h);
        let limit = PI.powi(3) * 8.0 / 3.0;
        assert!((ratio - limit).abs() / limit < 1e-4);
    }

    #[test]
    fn dyadic_monomial_order_is_two() {
        let grid: Vec<f64> = dyadic_grid(3, 10);
        let s = sweep(&mono(vec![1, 0]), &mono(vec![0, 1]), &grid, TORUS_POISSON, 64).unwrap();
        let order = s.fitted_order.unwrap();
        assert!((order - 2.0).abs() < 0.1, "{order}");
        assert!(s.is_monotone_decreasing());
    }

    #[test]
    fn symmetric_in_arguments_and_vanishes_on_diagonal() {
        let f = random_real_trig(1, 1, 3);
        let g = random_real_trig(2, 1, 3);
        let a = deformation_error(&f, &g, 0.125, TORUS_POISSON, 6).unwrap();
        let b = deformation_error(&g, &f, 0.125, TORUS_POISSON, 6).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(deformation_error(&f, &f, 0.125, TORUS_POISSON, 6).unwrap().value, 0.0);
    }

    #[test]
    fn grids_must_decrease() {
        let f = mono(vec![1, 0]);
        assert!(sweep(&f, &f, &[0.1, 0.2], TORUS_POISSON, 4).is_err());
        assert!(sweep::<f64>(&f, &f, &[], TORUS_POISSON, 4).is_err());
        assert!(sweep(&f, &f, &[0.1, 0.0], TORUS_POISSON, 4).is_err());
    }

    #[test]
    fn csv_layout() {
        let grid: Vec<Rational> = dyadic_grid(3, 5);
        let s = sweep(&mono(vec![1, 0]), &mono(vec![0, 1]), &grid, TORUS_POISSON, 64).unwrap();
        let mut out = Vec::new();
        s.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "hbar,error,method,R,fitted_order");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1.250000000000e-01,"));
        assert!(lines[1].contains(",closed-form,,"));
    }
}
