use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::{Complex, Complex64};
use serde_json::Value;

use super::{Module, PipelineError};
use crate::numfmt::{is_rational_literal, scalar_from_json};
use crate::poisson::TrigPolynomial;
use crate::poly::{OneForm, Polynomial};
use crate::prequant::{PrequantError, SymplecticPotential};
use crate::scalar::Scalar;
use crate::symplectic::PolarizationSpec;

/// Which explicit groupoid the recipe is run on.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupoidSpec {
    /// `V ⊕ V*` for a constant Poisson structure on `V`.
    Linear,
    /// `T*T^d` charted on the cover, `poisson` giving `π/2π`.
    CotangentTorus,
    CotangentCircle,
    /// `T*T²` with leaves of constant `(x², y₁)`; needs a scalar `hbar`.
    Weinstein { grid: usize },
    /// `ℤ^k ⋉ T^k`, generator `j` rotating axis `j` by `rotation[j]` turns.
    TorusBundle { rank: usize, rotation: Vec<Value>, grid: usize },
    AbelianAction { pi: Value, rho: Value, resolution: usize, radius: i64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    MinusXDy,
    YDx,
    /// One list of `[exponents, coefficient]` terms per coordinate of `Σ`.
    Polynomial(Vec<Value>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolarizationConfig {
    Horizontal,
    Vertical,
    /// Basis vectors with entries `x` or `[re, im]`.
    Constant(Vec<Vec<Value>>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Dyadic { k_min: u32, k_max: u32 },
    List(Vec<Value>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum HbarSpec {
    Scalar(Value),
    Grid(GridSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeformationSpec {
    pub f: TrigPolynomial,
    pub g: TrigPolynomial,
    pub grid: Option<GridSpec>,
    pub radius: i64,
    /// `π¹²` on `ℝ²/ℤ²` in the classical bracket.
    pub poisson: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub matrices: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarChoice {
    Exact,
    Float,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub name: String,
    pub scalar: ScalarChoice,
    pub poisson: Value,
    pub groupoid: GroupoidSpec,
    pub potential: Option<PotentialSpec>,
    pub polarization: Option<PolarizationConfig>,
    pub hbar: Option<HbarSpec>,
    pub deformation: DeformationSpec,
    /// Modules explicitly switched on or off.
    pub toggles: BTreeMap<Module, bool>,
    pub require_adapted: bool,
    pub residual_tol: Option<f64>,
    pub outputs: Outputs,
    /// SHA-256 of the compact, key-sorted config text.
    pub hash: String,
}

fn schema(msg: impl Into<String>) -> PipelineError {
    PipelineError::Schema(msg.into())
}

fn get<'a>(v: &'a Value, key: &str) -> Option<&'a Value> {
    v.get(key).filter(|x| !x.is_null())
}

fn as_usize(v: &Value, what: &str) -> Result<usize, PipelineError> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| schema(format!("{what} must be a non-negative integer")))
}

fn as_list<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, PipelineError> {
    v.as_array().ok_or_else(|| schema(format!("{what} must be a list")))
}

/// A decimal scalar literal such as `0.377` or `"2.5e-3"`.
fn is_decimal(v: &Value) -> bool {
    match v {
        Value::Number(_) => !is_rational_literal(v),
        Value::String(s) => {
            let s = s.trim();
            !s.is_empty()
                && s.chars().any(|c| c.is_ascii_digit())
                && s.chars().all(|c| c.is_ascii_digit() || ".eE+-".contains(c))
                && !is_rational_literal(v)
                && s.parse::<f64>().is_ok()
        }
        _ => false,
    }
}

fn contains_decimal(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.iter().any(contains_decimal),
        Value::Object(o) => o.values().any(contains_decimal),
        other => is_decimal(other),
    }
}

const KNOWN_KEYS: [&str; 12] = [
    "name",
    "scalar",
    "poisson",
    "groupoid",
    "potential",
    "polarization",
    "hbar",
    "deformation",
    "checks",
    "tolerances",
    "outputs",
    "description",
];

fn parse_grid(v: &Value) -> Result<GridSpec, PipelineError> {
    if let Some(d) = get(v, "dyadic") {
        let d = as_list(d, "dyadic")?;
        if d.len() != 2 {
            return Err(schema("dyadic grids are [k_min, k_max]"));
        }
        let k_min = as_usize(&d[0], "k_min")? as u32;
        let k_max = as_usize(&d[1], "k_max")? as u32;
        if k_min > k_max || k_max > 60 {
            return Err(schema("dyadic grid needs k_min ≤ k_max ≤ 60"));
        }
        return Ok(GridSpec::Dyadic { k_min, k_max });
    }
    match v {
        Value::Array(a) if !a.is_empty() => Ok(GridSpec::List(a.clone())),
        _ => Err(schema("ħ grid must be {\"dyadic\": [k_min, k_max]} or a non-empty list")),
    }
}

fn float(v: &Value, what: &str) -> Result<f64, PipelineError> {
    scalar_from_json::<f64>(v).ok_or_else(|| schema(format!("{what} must be a number")))
}

/// `[[m₁, m₂], re, im]` terms, `im` optional.
fn parse_trig(v: &Value, what: &str) -> Result<TrigPolynomial, PipelineError> {
    let mut f = TrigPolynomial::zero(2);
    for t in as_list(v, what)? {
        let t = as_list(t, what)?;
        if t.len() < 2 || t.len() > 3 {
            return Err(schema(format!("{what} terms are [[m1, m2], re, im]")));
        }
        let m: Vec<i64> = as_list(&t[0], what)?
            .iter()
            .map(|x| x.as_i64().ok_or_else(|| schema(format!("{what} wave vectors are integers"))))
            .collect::<Result<_, _>>()?;
        if m.len() != 2 {
            return Err(schema(format!("{what} wave vectors must have two components")));
        }
        let im = t.get(2).map(|x| float(x, what)).transpose()?.unwrap_or(0.0);
        f.add_term(m, Complex64::new(float(&t[1], what)?, im));
    }
    Ok(f)
}

fn parse_deformation(v: Option<&Value>) -> Result<DeformationSpec, PipelineError> {
    let mut spec = DeformationSpec {
        f: TrigPolynomial::monomial(vec![1, 0], Complex64::new(1.0, 0.0)),
        g: TrigPolynomial::monomial(vec![0, 1], Complex64::new(1.0, 0.0)),
        grid: None,
        radius: crate::deformation::DEFAULT_RADIUS,
        poisson: crate::deformation::TORUS_POISSON,
    };
    let Some(v) = v else { return Ok(spec) };
    if !v.is_object() {
        return Err(schema("deformation must be an object"));
    }
    if let Some(f) = get(v, "f") {
        spec.f = parse_trig(f, "deformation.f")?;
    }
    if let Some(g) = get(v, "g") {
        spec.g = parse_trig(g, "deformation.g")?;
    }
    if let Some(grid) = get(v, "grid") {
        spec.grid = Some(parse_grid(grid)?);
    }
    if let Some(r) = get(v, "radius") {
        spec.radius = as_usize(r, "deformation.radius")? as i64;
    }
    if let Some(p) = get(v, "poisson") {
        spec.poisson = float(p, "deformation.poisson")?;
    }
    Ok(spec)
}

fn parse_groupoid(v: &Value) -> Result<GroupoidSpec, PipelineError> {
    let kind = get(v, "kind").and_then(Value::as_str).ok_or_else(|| schema("groupoid.kind missing"))?;
    let grid = |default: usize| -> Result<usize, PipelineError> {
        match get(v, "grid") {
            Some(g) => match as_usize(g, "groupoid.grid")? {
                0 => Err(schema("groupoid.grid must be positive")),
                n => Ok(n),
            },
            None => Ok(default),
        }
    };
    Ok(match kind {
        "linear" => GroupoidSpec::Linear,
        "cotangent_torus" => GroupoidSpec::CotangentTorus,
        "cotangent_circle" => GroupoidSpec::CotangentCircle,
        "weinstein" => GroupoidSpec::Weinstein { grid: grid(64)? },
        "torus_bundle" => {
            let rank = as_usize(get(v, "rank").ok_or_else(|| schema("torus_bundle needs rank"))?, "rank")?;
            let rotation = match get(v, "rotation") {
                Some(r) => as_list(r, "rotation")?.clone(),
                None => vec![Value::from(0); rank],
            };
            if rank == 0 || rotation.len() != rank {
                return Err(schema("torus_bundle needs rank ≥ 1 and one rotation per generator"));
            }
            GroupoidSpec::TorusBundle { rank, rotation, grid: grid(16)? }
        }
        "abelian_action" => GroupoidSpec::AbelianAction {
            pi: get(v, "pi").cloned().ok_or_else(|| schema("abelian_action needs pi"))?,
            rho: get(v, "rho").cloned().ok_or_else(|| schema("abelian_action needs rho"))?,
            resolution: grid(8)?,
            radius: match get(v, "radius") {
                Some(r) => as_usize(r, "radius")? as i64,
                None => 1,
            },
        },
        other => return Err(PipelineError::Unsupported(format!("groupoid kind {other:?}"))),
    })
}

fn parse_potential(v: &Value) -> Result<PotentialSpec, PipelineError> {
    match get(v, "kind").and_then(Value::as_str) {
        Some("minus_x_dy") => Ok(PotentialSpec::MinusXDy),
        Some("y_dx") => Ok(PotentialSpec::YDx),
        Some("polynomial") => {
            let c = get(v, "coeffs").ok_or_else(|| schema("polynomial potential needs coeffs"))?;
            Ok(PotentialSpec::Polynomial(as_list(c, "coeffs")?.clone()))
        }
        Some(other) => Err(PipelineError::Unsupported(format!("potential kind {other:?}"))),
        None => Err(schema("potential.kind missing")),
    }
}

fn parse_polarization(v: &Value) -> Result<PolarizationConfig, PipelineError> {
    match get(v, "kind").and_then(Value::as_str) {
        Some("horizontal") => Ok(PolarizationConfig::Horizontal),
        Some("vertical") => Ok(PolarizationConfig::Vertical),
        Some("constant") => {
            let b = get(v, "basis").ok_or_else(|| schema("constant polarization needs a basis"))?;
            let basis = as_list(b, "basis")?
                .iter()
                .map(|col| as_list(col, "basis vector").cloned())
                .collect::<Result<Vec<_>, _>>()?;
            Ok(PolarizationConfig::Constant(basis))
        }
        Some(other) => Err(PipelineError::Unsupported(format!("polarization kind {other:?}"))),
        None => Err(schema("polarization.kind missing")),
    }
}

impl PipelineConfig {
    pub fn from_json_str(text: &str) -> Result<Self, PipelineError> {
        let v: Value = serde_json::from_str(text).map_err(|e| schema(format!("invalid JSON: {e}")))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self, PipelineError> {
        let obj = v.as_object().ok_or_else(|| schema("config must be a JSON object"))?;
        if let Some(k) = obj.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(schema(format!("unknown key {k:?}")));
        }
        let decimals = contains_decimal(v);
        let scalar = match get(v, "scalar").map(|s| s.as_str()) {
            None => {
                if decimals {
                    ScalarChoice::Float
                } else {
                    ScalarChoice::Exact
                }
            }
            Some(Some("exact")) if decimals => return Err(schema("decimal literals need \"scalar\": \"float\"")),
            Some(Some("exact")) => ScalarChoice::Exact,
            Some(Some("float")) => ScalarChoice::Float,
            Some(_) => return Err(schema("scalar must be \"exact\" or \"float\"")),
        };
        let poisson = get(v, "poisson").cloned().ok_or_else(|| schema("poisson missing"))?;
        let groupoid = parse_groupoid(get(v, "groupoid").ok_or_else(|| schema("groupoid missing"))?)?;
        let potential = get(v, "potential").map(parse_potential).transpose()?;
        let polarization = get(v, "polarization").map(parse_polarization).transpose()?;
        let hbar = match get(v, "hbar") {
            None => None,
            Some(h @ (Value::Number(_) | Value::String(_))) => Some(HbarSpec::Scalar(h.clone())),
            Some(h) => Some(HbarSpec::Grid(parse_grid(h)?)),
        };
        let deformation = parse_deformation(get(v, "deformation"))?;

        let mut toggles = BTreeMap::new();
        let mut require_adapted = true;
        if let Some(c) = get(v, "checks") {
            let c = c.as_object().ok_or_else(|| schema("checks must be an object"))?;
            for (k, flag) in c {
                let flag = flag.as_bool().ok_or_else(|| schema(format!("checks.{k} must be a boolean")))?;
                if k == "require_adapted" {
                    require_adapted = flag;
                } else {
                    let m = Module::parse(k).ok_or_else(|| schema(format!("unknown check module {k:?}")))?;
                    toggles.insert(m, flag);
                }
            }
        }
        let residual_tol = match get(v, "tolerances") {
            Some(t) => get(t, "residual").map(|r| float(r, "tolerances.residual")).transpose()?,
            None => None,
        };
        let mut outputs = Outputs::default();
        if let Some(o) = get(v, "outputs") {
            let path = |k: &str| -> Result<Option<PathBuf>, PipelineError> {
                get(o, k)
                    .map(|p| p.as_str().map(PathBuf::from).ok_or_else(|| schema(format!("outputs.{k} must be a path"))))
                    .transpose()
            };
            outputs = Outputs {
                report: path("report")?,
                csv: path("csv")?,
                matrices: path("matrices")?,
            };
        }
        let canonical = serde_json::to_string(v).expect("config re-serializes");
        let hash = {
            use sha2::{Digest, Sha256};
            hex::encode(Sha256::digest(canonical.as_bytes()))
        };
        Ok(PipelineConfig {
            name: get(v, "name").and_then(Value::as_str).unwrap_or("unnamed").to_string(),
            scalar,
            poisson,
            groupoid,
            potential,
            polarization,
            hbar,
            deformation,
            toggles,
            require_adapted,
            residual_tol,
            outputs,
            hash,
        })
    }

    /// Modules run by default: everything except the deformation sweep.
    pub fn enabled(&self, m: Module) -> bool {
        self.toggles.get(&m).copied().unwrap_or(m != Module::Deformation)
    }
}

pub(crate) fn scalar<S: Scalar>(v: &Value, what: &str) -> Result<S, PipelineError> {
    scalar_from_json(v).ok_or_else(|| schema(format!("{what}: bad scalar {v}")))
}

pub(crate) fn scalar_matrix<S: Scalar>(v: &Value, what: &str) -> Result<crate::linalg::Matrix<S>, PipelineError> {
    let rows = as_list(v, what)?;
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        out.push(as_list(r, what)?.iter().map(|x| scalar(x, what)).collect::<Result<Vec<S>, _>>()?);
    }
    let cols = out.first().map_or(0, Vec::len);
    if out.is_empty() || out.iter().any(|r| r.len() != cols) {
        return Err(schema(format!("{what} must be a non-empty rectangular matrix")));
    }
    Ok(crate::linalg::Matrix::from_rows(out))
}

pub(crate) fn grid_values<S: Scalar>(g: &GridSpec) -> Result<Vec<S>, PipelineError> {
    match g {
        GridSpec::Dyadic { k_min, k_max } => Ok(crate::deformation::dyadic_grid(*k_min, *k_max)),
        GridSpec::List(l) => l.iter().map(|x| scalar(x, "ħ grid")).collect(),
    }
}

fn looks_symbolic(v: &Value) -> bool {
    matches!(v, Value::String(s) if s.chars().any(|c| c.is_ascii_alphabetic()))
}

impl PotentialSpec {
    /// The potential on `Σ = V ⊕ V*` of rank `d`.
    pub fn build<S: Scalar>(&self, d: usize) -> Result<SymplecticPotential<S>, PipelineError> {
        match self {
            PotentialSpec::MinusXDy => Ok(SymplecticPotential::minus_x_dy(d)),
            PotentialSpec::YDx => Ok(SymplecticPotential::y_dx(d)),
            PotentialSpec::Polynomial(coeffs) => {
                let n = 2 * d;
                if coeffs.len() != n {
                    return Err(schema(format!("polynomial potential needs {n} coefficients, got {}", coeffs.len())));
                }
                let mut form = OneForm::zero(n);
                for (slot, terms) in form.coeffs.iter_mut().zip(coeffs) {
                    if looks_symbolic(terms) {
                        return Err(PrequantError::NonPolynomial(terms.to_string()).into());
                    }
                    let mut p = Polynomial::zero(n);
                    for t in as_list(terms, "potential coefficient")? {
                        let t = as_list(t, "potential term")?;
                        if t.len() != 2 {
                            return Err(schema("potential terms are [exponents, coefficient]"));
                        }
                        if looks_symbolic(&t[1]) {
                            return Err(PrequantError::NonPolynomial(t[1].to_string()).into());
                        }
                        let e = as_list(&t[0], "exponents")?
                            .iter()
                            .map(|x| match x.as_i64() {
                                Some(k) if k >= 0 => Ok(k as u32),
                                _ => Err(PipelineError::from(PrequantError::NonPolynomial(format!("exponent {x}")))),
                            })
                            .collect::<Result<Vec<_>, _>>()?;
                        if e.len() != n {
                            return Err(schema(format!("exponent vectors need {n} entries")));
                        }
                        p.add_term(e, scalar(&t[1], "potential coefficient")?);
                    }
                    *slot = p;
                }
                Ok(SymplecticPotential::new(form))
            }
        }
    }
}

impl PolarizationConfig {
    pub fn build<S: Scalar>(&self, d: usize, tol: f64) -> Result<PolarizationSpec<S>, PipelineError> {
        match self {
            PolarizationConfig::Horizontal => Ok(PolarizationSpec::horizontal(d)),
            PolarizationConfig::Vertical => Ok(PolarizationSpec::vertical(d)),
            PolarizationConfig::Constant(basis) => {
                let mut cols = Vec::with_capacity(basis.len());
                for col in basis {
                    if col.len() != 2 * d {
                        return Err(schema(format!("polarization vectors need {} entries", 2 * d)));
                    }
                    let mut v = Vec::with_capacity(col.len());
                    for z in col {
                        v.push(match z {
                            Value::Array(p) if p.len() == 2 => Complex::new(scalar(&p[0], "basis")?, scalar(&p[1], "basis")?),
                            other => Complex::new(scalar(other, "basis")?, S::zero()),
                        });
                    }
                    cols.push(v);
                }
                PolarizationSpec::constant(cols, tol).map_err(|e| schema(e.to_string()))
            }
        }
    }

    pub fn is_horizontal(&self) -> bool {
        matches!(self, PolarizationConfig::Horizontal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base() -> Value {
        json!({
            "name": "t",
            "poisson": {"kind": "constant", "dim": 2, "data": [[0, 1], [-1, 0]]},
            "groupoid": {"kind": "linear"},
            "potential": {"kind": "minus_x_dy"},
            "polarization": {"kind": "horizontal"}
        })
    }

    #[test]
    fn rational_configs_stay_exact() {
        let c = PipelineConfig::from_value(&base()).unwrap();
        assert_eq!(c.scalar, ScalarChoice::Exact);
        assert!(c.require_adapted);
        assert!(c.enabled(Module::Groupoid) && !c.enabled(Module::Deformation));
    }

    #[test]
    fn decimals_dispatch_to_floats() {
        let mut v = base();
        v["hbar"] = json!(0.377);
        assert_eq!(PipelineConfig::from_value(&v).unwrap().scalar, ScalarChoice::Float);
        v["hbar"] = json!("0.377");
        assert_eq!(PipelineConfig::from_value(&v).unwrap().scalar, ScalarChoice::Float);
        v["scalar"] = json!("exact");
        assert!(matches!(PipelineConfig::from_value(&v), Err(PipelineError::Schema(_))));
    }

    #[test]
    fn hash_ignores_whitespace_and_key_order() {
        let a = PipelineConfig::from_json_str(r#"{"name":"t","poisson":{"kind":"constant","dim":1,"data":[[0]]},"groupoid":{"kind":"linear"}}"#).unwrap();
        let b = PipelineConfig::from_json_str("{ \"groupoid\": {\"kind\": \"linear\"},\n \"poisson\": {\"data\": [[0]], \"dim\": 1, \"kind\": \"constant\"}, \"name\": \"t\" }").unwrap();
        assert_eq!(a.hash, b.hash);
        assert_eq!(a.hash.len(), 64);
    }

    #[test]
    fn schema_violations() {
        let mut v = base();
        v["bogus"] = json!(1);
        assert!(matches!(PipelineConfig::from_value(&v), Err(PipelineError::Schema(_))));
        let mut v = base();
        v["checks"] = json!({"groupoid": "yes"});
        assert!(matches!(PipelineConfig::from_value(&v), Err(PipelineError::Schema(_))));
        let mut v = base();
        v["groupoid"] = json!({"kind": "hyperbolic"});
        assert!(matches!(PipelineConfig::from_value(&v), Err(PipelineError::Unsupported(_))));
    }

    #[test]
    fn symbolic_potential_is_unsupported() {
        let p = PotentialSpec::Polynomial(vec![json!("sin(x1)"), json!([]), json!([]), json!([])]);
        assert!(matches!(p.build::<crate::Rational>(2), Err(PipelineError::Unsupported(_))));
        let p = PotentialSpec::Polynomial(vec![json!([[[0, 0, 1, 0], "1/2"]]), json!([]), json!([]), json!([])]);
        let theta = p.build::<crate::Rational>(2).unwrap();
        assert_eq!(theta.nvars(), 4);
    }
}
