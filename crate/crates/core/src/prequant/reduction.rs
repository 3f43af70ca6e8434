use std::f64::consts::TAU;

use serde_json::{json, Value};

use super::{
    coboundary_potential, holonomy, reduced_cocycle_from_phi, Bicharacter, CoboundaryStatus, Loop, PhaseScale,
    PrequantError, ReducedCocycle, SymplecticPotential, DEFAULT_NODES,
};
use crate::linalg::Matrix;
use crate::numfmt::{json_float, scalar_to_json};
use crate::poisson::ConstantPoisson;
use crate::poly::Polynomial;
use crate::scalar::{complexify, Scalar};
use crate::symplectic::{check_polarization, LinearSymplecticGroupoid, PolarizationSpec};

/// Radius of the window of retained leaves whose holonomy is re-checked.
const LEAF_WINDOW: i64 = 2;

/// The supported Bohr–Sommerfeld reductions.
#[derive(Debug, Clone, PartialEq)]
pub enum BsCase<S: Scalar> {
    /// `T*T^d` with `T^d = ℝ^d/2πℤ^d`, Poisson bivector `π = 2π·p0`,
    /// potential `y_i dx^i` and the horizontal polarization.
    TorusHorizontal { p0: ConstantPoisson<S> },
    /// `T*S¹` with `θ = y dx`; leaves are the circles of constant `y`.
    CotangentCircle,
    /// A principal `T^k`-bundle `M → N` with `T*M` polarized by the orbits.
    /// `rotation[j]` is the shift (in turns) that generator `j` induces on `N`;
    /// all zero for the bare bundle.
    TorusBundle { rank: usize, rotation: Vec<S> },
    /// `T*T²` with leaves of constant `(x², y₁)`, `π¹² = 2πħ`.
    Weinstein { hbar: S },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReducedGroupoid<S: Scalar> {
    Lattice { rank: usize },
    /// `ℤ^rank ⋉ base`, generator `j` shifting the base by `rotation[j]` turns.
    CrossedProduct { rank: usize, base: String, rotation: Vec<S> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Twist<S: Scalar> {
    Cocycle(ReducedCocycle<S>),
    /// Lattice point `w` carries the character `e^{sign·i⟨w,·⟩}` of `T^k`,
    /// realized on `ℤ^k ⋉ N` by `λ_w(n) = exp(sign·2πi w·⟨n, rotation⟩)`.
    Character { rank: usize, sign: i64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BsReduction<S: Scalar> {
    pub case_name: &'static str,
    pub bs_conditions: Vec<String>,
    pub reduced_groupoid: ReducedGroupoid<S>,
    pub twist: Twist<S>,
    /// `max |hol − 1|` over the retained leaves in a small window.
    pub leaf_holonomy_residual: f64,
    /// `max |hol − 1|` over a half-integer leaf; should be far from zero.
    pub rejected_leaf_holonomy: f64,
    /// Cocycle residual of the reduced twist.
    pub cocycle_residual: f64,
}

fn lattice_points(d: usize, r: i64) -> Vec<Vec<i64>> {
    let side = (2 * r + 1) as usize;
    (0..side.pow(d as u32))
        .map(|mut k| {
            (0..d)
                .map(|_| {
                    let c = (k % side) as i64 - r;
                    k /= side;
                    c
                })
                .collect()
        })
        .collect()
}

/// Worst `|hol − 1|` over the `d` coordinate loops of the leaf through
/// `(x = 0, y)` of a cotangent torus in `(x, y)` coordinates.
fn torus_leaf_residual<S: Scalar>(theta: &SymplecticPotential<S>, d: usize, y: &[f64], loops: &[usize]) -> Result<f64, PrequantError> {
    let mut worst: f64 = 0.0;
    for &i in loops {
        let mut base = vec![0.0; 2 * d];
        base[d..].copy_from_slice(y);
        let mut period = vec![0.0; 2 * d];
        period[i] = TAU;
        let h = holonomy(theta, &Loop::Straight { base, period }, DEFAULT_NODES)?;
        worst = worst.max((h.value - 1.0).norm());
    }
    Ok(worst)
}

/// Leaf window check for a cotangent torus: retained leaves `y ∈ ℤ^d` and
/// the rejected leaf `y = (½, …)`.
fn torus_leaves<S: Scalar>(theta: &SymplecticPotential<S>, d: usize, loops: &[usize]) -> Result<(f64, f64), PrequantError> {
    let mut retained: f64 = 0.0;
    for p in lattice_points(d, LEAF_WINDOW) {
        let y: Vec<f64> = p.iter().map(|&v| v as f64).collect();
        retained = retained.max(torus_leaf_residual(theta, d, &y, loops)?);
    }
    let rejected = torus_leaf_residual(theta, d, &vec![0.5; d], loops)?;
    Ok((retained, rejected))
}

fn bicharacter_of<S: Scalar>(
    theta: &SymplecticPotential<S>,
    g: &LinearSymplecticGroupoid<S>,
    scale: PhaseScale,
) -> Result<Bicharacter<S>, PrequantError> {
    let cob = coboundary_potential(theta, g, 0.0)?;
    match cob.status {
        CoboundaryStatus::Exact(phi) => reduced_cocycle_from_phi(&phi, g.dim(), scale),
        other => Err(PrequantError::Unsupported(format!("∂*θ is not integrable on the chart: {other:?}"))),
    }
}

pub fn bs_reduce<S: Scalar>(case: &BsCase<S>) -> Result<BsReduction<S>, PrequantError> {
    match case {
        BsCase::TorusHorizontal { p0 } => {
            let d = p0.dim();
            if d == 0 {
                return Err(PrequantError::Unsupported("torus of dimension 0".into()));
            }
            // On the chart with π rescaled by 1/2π, φ comes out in turns.
            let g = LinearSymplecticGroupoid::build_constant(p0.clone());
            let theta = SymplecticPotential::y_dx(d);
            let b = bicharacter_of(&theta, &g, PhaseScale::Turns)?;
            let loops: Vec<usize> = (0..d).collect();
            let (retained, rejected) = torus_leaves(&theta, d, &loops)?;
            let cocycle = ReducedCocycle::Bicharacter(b);
            Ok(BsReduction {
                case_name: "torus-horizontal",
                bs_conditions: (1..=d).map(|i| format!("y_{i} ∈ ℤ")).collect(),
                reduced_groupoid: ReducedGroupoid::Lattice { rank: d },
                cocycle_residual: cocycle.max_residual()?,
                twist: Twist::Cocycle(cocycle),
                leaf_holonomy_residual: retained,
                rejected_leaf_holonomy: rejected,
            })
        }
        BsCase::CotangentCircle => {
            let g = LinearSymplecticGroupoid::build_constant(ConstantPoisson::<S>::zero(1));
            let theta = SymplecticPotential::y_dx(1);
            let b = bicharacter_of(&theta, &g, PhaseScale::Turns)?;
            let (retained, rejected) = torus_leaves(&theta, 1, &[0])?;
            let cocycle = ReducedCocycle::Bicharacter(b);
            Ok(BsReduction {
                case_name: "t-star-s1",
                bs_conditions: vec!["y ∈ ℤ".into()],
                reduced_groupoid: ReducedGroupoid::Lattice { rank: 1 },
                cocycle_residual: cocycle.max_residual()?,
                twist: Twist::Cocycle(cocycle),
                leaf_holonomy_residual: retained,
                rejected_leaf_holonomy: rejected,
            })
        }
        BsCase::TorusBundle { rank, rotation } => {
            let k = *rank;
            if k == 0 || rotation.len() != k {
                return Err(PrequantError::Unsupported(format!(
                    "torus bundle needs rank ≥ 1 and one rotation per generator (rank {k}, {} rotations)",
                    rotation.len()
                )));
            }
            // Fiber coordinates φ ∈ T^k with conjugate momenta p = TR*(ξ);
            // the Liouville form restricted to an orbit is p_i dφ^i.
            let theta = SymplecticPotential::<S>::y_dx(k);
            let loops: Vec<usize> = (0..k).collect();
            let (retained, rejected) = torus_leaves(&theta, k, &loops)?;
            Ok(BsReduction {
                case_name: "torus-bundle",
                bs_conditions: vec![format!("TR*(ξ) ∈ ℤ^{k}")],
                reduced_groupoid: ReducedGroupoid::CrossedProduct {
                    rank: k,
                    base: "N".into(),
                    rotation: rotation.clone(),
                },
                twist: Twist::Character { rank: k, sign: -1 },
                leaf_holonomy_residual: retained,
                rejected_leaf_holonomy: rejected,
                cocycle_residual: 0.0,
            })
        }
        BsCase::Weinstein { hbar } => {
            // Universal-cover chart with π rescaled by 1/2π, so π¹² = ħ.
            let g = LinearSymplecticGroupoid::build_constant(ConstantPoisson::planar(hbar.clone()));
            let one = complexify(S::one());
            let zero = complexify(S::zero());
            let p = PolarizationSpec::constant(
                vec![
                    vec![one.clone(), zero.clone(), zero.clone(), zero.clone()],
                    vec![zero.clone(), zero.clone(), zero.clone(), one],
                ],
                0.0,
            )
            .map_err(|e| PrequantError::Unsupported(e.to_string()))?;
            let report = check_polarization(&g, &p, 1e-12).map_err(|e| PrequantError::Unsupported(e.to_string()))?;
            if !report.passed() {
                return Err(PrequantError::Unsupported(format!(
                    "leaves of constant (x², y₁) fail the polarization checks: {report:?}"
                )));
            }
            // Adapted on the cover: θ' = −x¹dy₁ + y₂dx².
            let mut form = crate::poly::OneForm::zero(4);
            form.coeffs[2] = -&Polynomial::var(4, 0);
            form.coeffs[1] = Polynomial::var(4, 3);
            let adapted = SymplecticPotential::new(form);
            let b = bicharacter_of(&adapted, &g, PhaseScale::Turns)?;
            if !b.is_trivial() {
                return Err(PrequantError::Unsupported("adapted potential has a nontrivial coboundary".into()));
            }
            // The global potential y dx detects the single condition on y₁.
            let (retained, rejected) = torus_leaves(&SymplecticPotential::<S>::y_dx(2), 2, &[0])?;
            let cocycle = ReducedCocycle::Bicharacter(Bicharacter::trivial(1));
            Ok(BsReduction {
                case_name: "torus-weinstein",
                bs_conditions: vec!["y_1 ∈ ℤ".into()],
                reduced_groupoid: ReducedGroupoid::CrossedProduct {
                    rank: 1,
                    base: "S1".into(),
                    rotation: vec![hbar.clone()],
                },
                cocycle_residual: cocycle.max_residual()?,
                twist: Twist::Cocycle(cocycle),
                leaf_holonomy_residual: retained,
                rejected_leaf_holonomy: rejected,
            })
        }
    }
}

fn matrix_json<S: Scalar>(m: &Matrix<S>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(scalar_to_json).collect()))
            .collect(),
    )
}

fn format_scalar<S: Scalar>(x: &S) -> String {
    if S::EXACT {
        x.to_string()
    } else {
        format!("{}", x.approx())
    }
}

impl<S: Scalar> BsReduction<S> {
    pub fn bicharacter(&self) -> Option<&Bicharacter<S>> {
        match &self.twist {
            Twist::Cocycle(ReducedCocycle::Bicharacter(b)) => Some(b),
            _ => None,
        }
    }

    /// Human-readable presentation of the reduced twisted algebra.
    pub fn presentation(&self) -> String {
        match (&self.reduced_groupoid, &self.twist) {
            (ReducedGroupoid::Lattice { rank: 1 }, _) => "C*(ℤ) ≅ C(S¹)".into(),
            (ReducedGroupoid::Lattice { rank: 2 }, Twist::Cocycle(ReducedCocycle::Bicharacter(b))) => {
                // σ(e₁,e₂)/σ(e₂,e₁) = e^{2πi(Φ₁₂ − Φ₂₁)} =: e^{−2πiħ}
                let hbar = b.phi[(1, 0)].clone() - b.phi[(0, 1)].clone();
                if b.scale == PhaseScale::Turns {
                    format!("UV = {}VU", turn_phase(&hbar))
                } else {
                    format!("UV = e^{{−i·{}}}VU", format_scalar(&hbar))
                }
            }
            (ReducedGroupoid::Lattice { rank }, _) => format!("C*(ℤ^{rank}, σ₀)"),
            (ReducedGroupoid::CrossedProduct { base, rotation, .. }, Twist::Cocycle(_)) if base == "S1" => {
                format!("C*(ℤ ⋉ S¹), rotation 2π·{}", format_scalar(&rotation[0]))
            }
            (ReducedGroupoid::CrossedProduct { rank, base, .. }, _) => format!("C*(ℤ^{rank} ⋉ {base}, λ_w)"),
        }
    }

    pub fn to_json(&self) -> Value {
        let groupoid = match &self.reduced_groupoid {
            ReducedGroupoid::Lattice { rank } => json!({"kind": "lattice", "rank": rank}),
            ReducedGroupoid::CrossedProduct { rank, base, rotation } => json!({
                "kind": "crossed_product",
                "rank": rank,
                "base": base,
                "rotation_turns": rotation.iter().map(scalar_to_json).collect::<Vec<_>>(),
            }),
        };
        let twist = match &self.twist {
            Twist::Cocycle(ReducedCocycle::Bicharacter(b)) => json!({
                "kind": "bicharacter",
                "data": {
                    "phi": matrix_json(&b.phi),
                    "scale": match b.scale { PhaseScale::Radians => "radians", PhaseScale::Turns => "turns" },
                    "B": match b.half_turn_matrix() {
                        Some(m) => matrix_json(&m),
                        None => matrix_json(&b.half_turn_matrix_f64()),
                    },
                },
            }),
            Twist::Cocycle(ReducedCocycle::Table { groupoid, cochain }) => json!({
                "kind": "table",
                "data": {
                    "arrows": groupoid.n_arrows(),
                    "values": cochain.values().iter().map(|(k, v)| json!([k, json_float(v.re), json_float(v.im)])).collect::<Vec<_>>(),
                },
            }),
            Twist::Character { rank, sign } => json!({"kind": "character", "data": {"rank": rank, "sign": sign}}),
        };
        json!({
            "bs_conditions": self.bs_conditions,
            "reduced_groupoid": groupoid,
            "twist": twist,
        })
    }
}

/// `e^{−2πiħ}` written with the rational `ħ` folded in, e.g. `e^{−2πi/3}`.
fn turn_phase<S: Scalar>(hbar: &S) -> String {
    if hbar.is_zero() {
        return String::new();
    }
    let (sign, mag) = if *hbar < S::zero() { ("", -hbar.clone()) } else { ("−", hbar.clone()) };
    if !S::EXACT {
        return format!("e^{{{sign}2πi·{}}}", mag.approx());
    }
    let text = mag.to_string();
    match text.split_once('/') {
        Some(("1", q)) => format!("e^{{{sign}2πi/{q}}}"),
        _ if text == "1" => format!("e^{{{sign}2πi}}"),
        _ => format!("e^{{{sign}2πi·{text}}}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_complex::Complex64;

    fn torus(hbar: Rational) -> BsReduction<Rational> {
        bs_reduce(&BsCase::TorusHorizontal {
            p0: ConstantPoisson::planar(hbar),
        })
        .unwrap()
    }

    #[test]
    fn torus_reduction_reproduces_displayed_cocycle() {
        let r = torus(Rational::from_ratio(1, 3));
        let b = r.bicharacter().unwrap();
        let expected = Complex64::from_polar(1.0, -std::f64::consts::PI / 3.0);
        assert!((b.phase(&[1, 0], &[0, 1]) - expected).norm() < 1e-14);
        assert_eq!(r.presentation(), "UV = e^{−2πi/3}VU");
        assert!(r.leaf_holonomy_residual < 1e-12);
        assert!(r.rejected_leaf_holonomy > 1.0);
        assert!(r.cocycle_residual < 1e-12);
        assert_eq!(r.bs_conditions.len(), 2);
    }

    #[test]
    fn cotangent_circle_is_untwisted() {
        let r = bs_reduce::<Rational>(&BsCase::CotangentCircle).unwrap();
        assert!(r.bicharacter().unwrap().is_trivial());
        assert_eq!(r.presentation(), "C*(ℤ) ≅ C(S¹)");
    }

    #[test]
    fn weinstein_and_bundle_reductions() {
        let w = bs_reduce(&BsCase::Weinstein {
            hbar: Rational::from_ratio(2, 5),
        })
        .unwrap();
        assert!(matches!(w.reduced_groupoid, ReducedGroupoid::CrossedProduct { rank: 1, .. }));
        assert!(w.bicharacter().unwrap().is_trivial());
        let b = bs_reduce(&BsCase::TorusBundle {
            rank: 2,
            rotation: vec![Rational::from_int(0), Rational::from_int(0)],
        })
        .unwrap();
        assert_eq!(b.to_json()["twist"]["kind"], "character");
        assert!(bs_reduce(&BsCase::TorusBundle {
            rank: 2,
            rotation: vec![Rational::from_int(0)],
        })
        .is_err());
    }

    #[test]
    fn json_shape() {
        let v = torus(Rational::from_ratio(1, 2)).to_json();
        assert_eq!(v["reduced_groupoid"]["kind"], "lattice");
        assert_eq!(v["twist"]["kind"], "bicharacter");
        assert_eq!(v["twist"]["data"]["B"][0][1], "-1/2");
    }
}
