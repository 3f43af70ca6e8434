use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use super::{LinearPoisson, PoissonError};
use crate::scalar::Scalar;

/// Tolerance on `period mod 2π` for the prequantizability flag.
pub const LEAF_PERIOD_TOL: f64 = 1e-3;

const THETA_NODES: usize = 100;
const PHI_NODES: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct LeafPeriod {
    pub radius: f64,
    /// Symplectic area of the leaf.
    pub period: f64,
    pub prequantizable: bool,
    pub nodes: usize,
}

/// `period` is an integer multiple of `2π` within `tol`.
pub fn is_prequantizable(period: f64, tol: f64) -> bool {
    let r = period.rem_euclid(2.0 * PI);
    r.min(2.0 * PI - r) <= tol
}

/// Symplectic area of the coadjoint sphere through `(r, 0, 0)` for
/// `c_{ij}^k = λ ε_{ijk}`. The leaf form is `ω(π♯ξ, π♯η) = π(ξ, η)`,
/// integrated on a Gauss–Legendre × uniform product grid.
pub fn leaf_period<S: Scalar>(l: &LinearPoisson<S>, r: f64) -> Result<LeafPeriod, PoissonError> {
    let lambda = rotation_invariant_scale(l)?;
    let nodes = THETA_NODES * PHI_NODES;
    if r == 0.0 {
        return Ok(LeafPeriod {
            radius: r,
            period: 0.0,
            prequantizable: true,
            nodes,
        });
    }
    if !r.is_finite() || r < 0.0 {
        return Err(PoissonError::Unsupported(format!("radius {r} does not define a leaf")));
    }
    let (tn, tw) = gauss_legendre(THETA_NODES);
    let dphi = 2.0 * PI / PHI_NODES as f64;
    let mut total = 0.0;
    for (t, w) in tn.iter().zip(&tw) {
        // map [-1, 1] → [0, π]
        let theta = 0.5 * PI * (t + 1.0);
        let wt = 0.5 * PI * w;
        for k in 0..PHI_NODES {
            let phi = k as f64 * dphi;
            total += wt * dphi * area_density(lambda, r, theta, phi);
        }
    }
    let period = total.abs();
    Ok(LeafPeriod {
        radius: r,
        period,
        prequantizable: is_prequantizable(period, LEAF_PERIOD_TOL),
        nodes,
    })
}

/// `ω(∂θ, ∂φ)` at one point of the sphere.
fn area_density(lambda: f64, r: f64, theta: f64, phi: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let p = Vector3::new(r * st * cp, r * st * sp, r * ct);
    if st.abs() < 1e-14 {
        return 0.0;
    }
    let d_theta = Vector3::new(r * ct * cp, r * ct * sp, -r * st);
    let d_phi = Vector3::new(-r * st * sp, r * st * cp, 0.0);
    // π^{ij}(p) = λ ε_{ijk} p_k; (π♯ξ)^j = ξ_i π^{ij}
    let pi = Matrix3::new(0.0, p.z, -p.y, -p.z, 0.0, p.x, p.y, -p.x, 0.0) * lambda;
    let sharp = pi.transpose();
    let svd = sharp.svd(true, true);
    let solve = |v: &Vector3<f64>| svd.solve(v, 1e-12 * r.abs().max(1.0)).expect("svd solve");
    let xi = solve(&d_theta);
    let eta = solve(&d_phi);
    (xi.transpose() * pi * eta)[(0, 0)]
}

/// Accept only `c_{ij}^k = λ ε_{ijk}` with `λ ≠ 0`, for which `|x|²` is a
/// Casimir and every leaf through a nonzero point is a round sphere.
fn rotation_invariant_scale<S: Scalar>(l: &LinearPoisson<S>) -> Result<f64, PoissonError> {
    if l.dim() != 3 {
        return Err(PoissonError::Unsupported(format!("leaf periods need d = 3, got {}", l.dim())));
    }
    let lambda = l.constant(0, 1, 2);
    if lambda.is_zero() {
        return Err(PoissonError::Unsupported("zero bivector has point leaves".into()));
    }
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let expected = levi_civita(i, j, k) * lambda.approx();
                if (l.constant(i, j, k).approx() - expected).abs() > 1e-12 * lambda.approx().abs() {
                    return Err(PoissonError::Unsupported(
                        "leaves are not closed spheres: structure constants are not a multiple of ε".into(),
                    ));
                }
            }
        }
    }
    Ok(lambda.approx())
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let int = |f: &dyn Fn(f64) -> f64| x.iter().zip(&w).map(|(x, w)| w * f(*x)).sum::<f64>();
        assert!((int(&|_| 1.0) - 2.0).abs() < 1e-14);
        assert!((int(&|t| t.powi(18)) - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn zero_radius_is_degenerate_and_prequantizable() {
        let p = leaf_period(&LinearPoisson::su2(1.0), 0.0).unwrap();
        assert_eq!(p.period, 0.0);
        assert!(p.prequantizable);
    }

    #[test]
    fn period_is_linear_in_radius() {
        let l = LinearPoisson::su2(1.0);
        let a = leaf_period(&l, 0.7).unwrap().period;
        let b = leaf_period(&l, 1.4).unwrap().period;
        assert!((b / a - 2.0).abs() < 1e-6);
        assert!(leaf_period(&l, 1.0).unwrap().nodes >= 10_000);
    }

    #[test]
    fn non_spherical_leaves_are_rejected() {
        let l = LinearPoisson::new(3, &[(0, 1, 2, 1.0), (1, 2, 0, 2.0), (2, 0, 1, 1.0)]).unwrap();
        assert!(matches!(leaf_period(&l, 1.0), Err(PoissonError::Unsupported(_))));
    }
}
