use serde_json::{json, Value};

use super::{ConstantPoisson, LinearPoisson, PoissonError, PoissonStructure, PolynomialPoisson};
use crate::linalg::Matrix;
use crate::numfmt::{scalar_from_json, scalar_to_json};
use crate::poly::Polynomial;
use crate::scalar::Scalar;

/// Parse `{kind, dim, data}`.
///
/// * `constant`: `data` is the `d×d` matrix of `π^{ij}` as rows.
/// * `linear`: `data` is a list of `[i, j, k, c_ij^k]`.
/// * `polynomial`: `data` is a list of `{i, j, terms}` with `terms` a list of
///   `[exponent-vector, coefficient]`.
///
/// Scalars are JSON numbers or `"p/q"` strings.
pub fn parse_poisson_spec<S: Scalar>(v: &Value) -> Result<PoissonStructure<S>, PoissonError> {
    let err = |m: &str| PoissonError::Spec(m.to_string());
    let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| err("missing kind"))?;
    let dim = v.get("dim").and_then(Value::as_u64).ok_or_else(|| err("missing dim"))? as usize;
    if dim == 0 {
        return Err(err("dim must be positive"));
    }
    let data = v.get("data").ok_or_else(|| err("missing data"))?;
    let scalar = |v: &Value| scalar_from_json::<S>(v).ok_or_else(|| err(&format!("bad scalar {v}")));
    let index = |v: &Value| v.as_u64().map(|x| x as usize).ok_or_else(|| err(&format!("bad index {v}")));
    let list = |v: &Value| v.as_array().cloned().ok_or_else(|| err(&format!("expected a list, found {v}")));
    match kind {
        "constant" => {
            let rows = list(data)?;
            if rows.len() != dim {
                return Err(err("constant data must have dim rows"));
            }
            let mut m = Vec::with_capacity(dim);
            for row in &rows {
                let row = list(row)?;
                if row.len() != dim {
                    return Err(err("constant data must be square"));
                }
                m.push(row.iter().map(scalar).collect::<Result<Vec<_>, _>>()?);
            }
            Ok(PoissonStructure::Constant(ConstantPoisson::new(Matrix::from_rows(m))?))
        }
        "linear" => {
            let mut entries = Vec::new();
            for e in list(data)? {
                let e = list(&e)?;
                if e.len() != 4 {
                    return Err(err("linear entries are [i, j, k, c]"));
                }
                entries.push((index(&e[0])?, index(&e[1])?, index(&e[2])?, scalar(&e[3])?));
            }
            Ok(PoissonStructure::Linear(LinearPoisson::new(dim, &entries)?))
        }
        "polynomial" => {
            let mut comps = Vec::new();
            for c in list(data)? {
                let i = index(c.get("i").ok_or_else(|| err("component needs i"))?)?;
                let j = index(c.get("j").ok_or_else(|| err("component needs j"))?)?;
                let mut p = Polynomial::zero(dim);
                for t in list(c.get("terms").ok_or_else(|| err("component needs terms"))?)? {
                    let t = list(&t)?;
                    if t.len() != 2 {
                        return Err(err("terms are [exponents, coefficient]"));
                    }
                    let e = list(&t[0])?
                        .iter()
                        .map(|x| x.as_u64().map(|x| x as u32).ok_or_else(|| err("bad exponent")))
                        .collect::<Result<Vec<_>, _>>()?;
                    if e.len() != dim {
                        return Err(err("exponent vector length must equal dim"));
                    }
                    p.add_term(e, scalar(&t[1])?);
                }
                comps.push(((i, j), p));
            }
            Ok(PoissonStructure::Polynomial(PolynomialPoisson::new(dim, comps)?))
        }
        other => Err(err(&format!("unknown kind {other:?}"))),
    }
}

pub fn poisson_spec_json<S: Scalar>(p: &PoissonStructure<S>) -> Value {
    match p {
        PoissonStructure::Constant(c) => {
            let m = c.matrix();
            let rows: Vec<Value> = (0..m.rows())
                .map(|i| Value::Array(m.row(i).iter().map(scalar_to_json).collect()))
                .collect();
            json!({"kind": "constant", "dim": c.dim(), "data": rows})
        }
        PoissonStructure::Linear(l) => {
            let mut data = Vec::new();
            for i in 0..l.dim() {
                for j in i + 1..l.dim() {
                    for k in 0..l.dim() {
                        let v = l.constant(i, j, k);
                        if !v.is_zero() {
                            data.push(json!([i, j, k, scalar_to_json(&v)]));
                        }
                    }
                }
            }
            json!({"kind": "linear", "dim": l.dim(), "data": data})
        }
        PoissonStructure::Polynomial(p) => {
            let data: Vec<Value> = p
                .components()
                .map(|(&(i, j), poly)| {
                    let terms: Vec<Value> = poly.terms().map(|(e, c)| json!([e, scalar_to_json(c)])).collect();
                    json!({"i": i, "j": j, "terms": terms})
                })
                .collect();
            json!({"kind": "polynomial", "dim": p.dim(), "data": data})
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn round_trips() {
        let specs = [
            json!({"kind": "constant", "dim": 2, "data": [[0, "1/3"], ["-1/3", 0]]}),
            json!({"kind": "linear", "dim": 3, "data": [[0, 1, 2, 1], [1, 2, 0, 1], [0, 2, 1, -1]]}),
            json!({"kind": "polynomial", "dim": 2, "data": [{"i": 0, "j": 1, "terms": [[[2, 0], "1/2"]]}]}),
        ];
        for s in specs {
            let p: PoissonStructure<Rational> = parse_poisson_spec(&s).unwrap();
            let back: PoissonStructure<Rational> = parse_poisson_spec(&poisson_spec_json(&p)).unwrap();
            assert_eq!(p, back);
        }
    }

    #[test]
    fn schema_errors() {
        let bad = json!({"kind": "constant", "dim": 2, "data": [[0, 1], [1, 0]]});
        assert!(matches!(parse_poisson_spec::<f64>(&bad), Err(PoissonError::NotAntisymmetric(0, 1))));
        let bad = json!({"kind": "cubic", "dim": 2, "data": []});
        assert!(matches!(parse_poisson_spec::<f64>(&bad), Err(PoissonError::Spec(_))));
    }
}
