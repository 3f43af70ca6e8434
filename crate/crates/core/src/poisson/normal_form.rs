use super::{PoissonError, PolynomialPoisson};
use crate::poly::Exponents;
use crate::scalar::Scalar;

/// Coordinates split into a leafwise block `x` and a transverse block `y`.
/// Leaves are the level sets of `y` and the connection is `∂/∂x`, so the
/// first two normal-form conditions hold by construction of the chart.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPolarizationChart<S: Scalar> {
    leaf: Vec<usize>,
    transverse: Vec<usize>,
    poisson: PolynomialPoisson<S>,
}

impl<S: Scalar> RealPolarizationChart<S> {
    pub fn new(leaf: Vec<usize>, poisson: PolynomialPoisson<S>) -> Result<Self, PoissonError> {
        let d = poisson.dim();
        let mut seen = vec![false; d];
        for &i in &leaf {
            if i >= d {
                return Err(PoissonError::InvalidChart(format!("leaf coordinate {i} out of range")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(PoissonError::InvalidChart(format!("leaf coordinate {i} repeated")));
            }
        }
        let transverse = (0..d).filter(|&i| !seen[i]).collect();
        Ok(RealPolarizationChart {
            leaf,
            transverse,
            poisson,
        })
    }

    pub fn leaf(&self) -> &[usize] {
        &self.leaf
    }

    pub fn transverse(&self) -> &[usize] {
        &self.transverse
    }

    pub fn poisson(&self) -> &PolynomialPoisson<S> {
        &self.poisson
    }
}

/// A monomial of `π^{ij}` that breaks a condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Offense {
    pub component: (usize, usize),
    pub monomial: Exponents,
    pub coefficient: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: &'static str,
    pub passed: bool,
    pub offending: Vec<Offense>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormReport {
    pub conditions: Vec<Condition>,
}

impl NormalFormReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

pub fn check_real_polarization_normal_form<S: Scalar>(chart: &RealPolarizationChart<S>) -> NormalFormReport {
    let p = &chart.poisson;
    let x = &chart.leaf;
    let y = &chart.transverse;
    let offenses = |pairs: Vec<(usize, usize)>, bad: &dyn Fn(&Exponents) -> bool| -> Vec<Offense> {
        let mut out = Vec::new();
        for (i, j) in pairs {
            for (e, c) in p.get(i, j).terms() {
                if bad(e) {
                    out.push(Offense {
                        component: (i, j),
                        monomial: e.clone(),
                        coefficient: c.to_string(),
                    });
                }
            }
        }
        out
    };
    let pairs = |a: &[usize], b: &[usize], strict: bool| -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for &i in a {
            for &j in b {
                if !strict || i < j {
                    v.push((i, j));
                }
            }
        }
        v
    };
    let x_degree = |e: &Exponents| x.iter().map(|&i| e[i]).sum::<u32>();
    let yy = offenses(pairs(y, y, true), &|_| true);
    let xy = offenses(pairs(x, y, false), &|e| x_degree(e) > 0);
    let xx = offenses(pairs(x, x, true), &|e| x_degree(e) > 1);
    let cond = |name, offending: Vec<Offense>| Condition {
        name,
        passed: offending.is_empty(),
        offending,
    };
    NormalFormReport {
        conditions: vec![
            cond("leaves_are_level_sets_of_y", Vec::new()),
            cond("connection_is_coordinate_derivative", Vec::new()),
            cond("yy_components_vanish", yy),
            cond("xy_components_constant_in_x", xy),
            cond("xx_components_affine_in_x", xx),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::{ConstantPoisson, LinearPoisson};
    use crate::poly::Polynomial;
    use crate::scalar::Rational;

    #[test]
    fn constant_with_full_leaf_passes() {
        let p = ConstantPoisson::planar(Rational::from_int(1)).to_polynomial();
        let chart = RealPolarizationChart::new(vec![0, 1], p).unwrap();
        assert!(check_real_polarization_normal_form(&chart).passed());
    }

    #[test]
    fn su2_with_full_leaf_passes() {
        let p = LinearPoisson::su2(Rational::from_int(1)).to_polynomial();
        let chart = RealPolarizationChart::new(vec![0, 1, 2], p).unwrap();
        assert!(check_real_polarization_normal_form(&chart).passed());
    }

    #[test]
    fn quadratic_xx_component_is_reported() {
        let x0 = Polynomial::<Rational>::var(2, 0);
        let p = PolynomialPoisson::new(2, [((0, 1), x0.pow(2))]).unwrap();
        let chart = RealPolarizationChart::new(vec![0, 1], p).unwrap();
        let r = check_real_polarization_normal_form(&chart);
        let c = r.condition("xx_components_affine_in_x").unwrap();
        assert!(!c.passed);
        assert_eq!(c.offending[0].monomial, vec![2, 0]);
    }

    #[test]
    fn transverse_bracket_fails_yy() {
        let p = ConstantPoisson::planar(Rational::from_int(1)).to_polynomial();
        let chart = RealPolarizationChart::new(vec![], p).unwrap();
        let r = check_real_polarization_normal_form(&chart);
        assert!(!r.condition("yy_components_vanish").unwrap().passed);
        assert!(r.condition("xy_components_constant_in_x").unwrap().passed);
    }

    #[test]
    fn repeated_leaf_index_is_invalid() {
        let p = ConstantPoisson::<Rational>::zero(2).to_polynomial();
        assert!(RealPolarizationChart::new(vec![0, 0], p).is_err());
    }
}
