//! Polygon and certificate documents, and OBJ polyline export.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numeric::{Complex64, GaussRat, Matrix, Scalar};
use crate::polygon::Polygon;
use crate::projective::ProjPoint;
use crate::selfdual::{CanonicalForm, SelfDualityCertificate};

fn arithmetic<S: Scalar>() -> &'static str {
    if S::EXACT {
        "exact"
    } else {
        "approx"
    }
}

fn encode_vec<S: Scalar>(v: &[S]) -> Value {
    Value::Array(v.iter().map(|x| Value::Array(x.encode().to_vec())).collect())
}

fn decode_vec<S: Scalar>(v: &Value) -> Result<Vec<S>> {
    v.as_array()
        .ok_or_else(|| Error::Parse("expected an array of coordinates".into()))?
        .iter()
        .map(|c| match c.as_array().map(Vec::as_slice) {
            Some([re, im]) => S::decode(re, im),
            _ => Err(Error::Parse(format!("expected [re, im], got {c}"))),
        })
        .collect()
}

pub fn encode_matrix<S: Scalar>(m: &Matrix<S>) -> Value {
    Value::Array((0..m.rows()).map(|r| encode_vec(m.row(r))).collect())
}

pub fn decode_matrix<S: Scalar>(v: &Value) -> Result<Matrix<S>> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse("expected an array of rows".into()))?
        .iter()
        .map(decode_vec)
        .collect::<Result<Vec<Vec<S>>>>()?;
    Matrix::from_rows(&rows)
}

/// Vertices are written in slot order; approximate coordinates are scaled
/// so each vertex has largest-modulus entry 1.
pub fn polygon_to_json<S: Scalar>(p: &Polygon<S>) -> Value {
    let p = if S::EXACT { p.clone() } else { p.normalized() };
    json!({
        "kind": "polygon",
        "ambient_dim": p.ambient_dim(),
        "n": p.n(),
        "arithmetic": arithmetic::<S>(),
        "vertices": p.vertices().iter().map(|v| encode_vec(v.coords())).collect::<Vec<_>>(),
    })
}

pub fn polygon_from_json<S: Scalar>(v: &Value) -> Result<Polygon<S>> {
    if v.get("kind").and_then(Value::as_str) != Some("polygon") {
        return Err(Error::Parse("document kind is not \"polygon\"".into()));
    }
    let want = arithmetic::<S>();
    match v.get("arithmetic").and_then(Value::as_str) {
        Some(a) if a == want => {}
        other => {
            return Err(Error::Parse(format!("arithmetic {other:?}, expected {want:?}")));
        }
    }
    let vertices = v
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing vertices".into()))?
        .iter()
        .map(decode_vec::<S>)
        .collect::<Result<Vec<_>>>()?;
    let p = Polygon::from_coords(vertices)?;
    let field = |name: &str| v.get(name).and_then(Value::as_u64).map(|x| x as usize);
    if field("n") != Some(p.n()) || field("ambient_dim") != Some(p.ambient_dim()) {
        return Err(Error::Parse(format!(
            "header says n = {:?}, ambient_dim = {:?}; vertices give {} and {}",
            field("n"),
            field("ambient_dim"),
            p.n(),
            p.ambient_dim()
        )));
    }
    Ok(p)
}

/// A polygon document in either arithmetic.
#[derive(Clone, Debug)]
pub enum AnyPolygon {
    Approx(Polygon<Complex64>),
    Exact(Polygon<GaussRat>),
}

impl AnyPolygon {
    pub fn parse(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        match v.get("arithmetic").and_then(Value::as_str) {
            Some("exact") => Ok(Self::Exact(polygon_from_json(&v)?)),
            Some("approx") => Ok(Self::Approx(polygon_from_json(&v)?)),
            other => Err(Error::Parse(format!("unknown arithmetic {other:?}"))),
        }
    }

    pub fn to_approx(&self) -> Result<Polygon<Complex64>> {
        match self {
            Self::Approx(p) => Ok(p.clone()),
            Self::Exact(p) => Polygon::from_coords(
                p.coords()
                    .iter()
                    .map(|v| v.iter().map(Scalar::to_c64).collect())
                    .collect(),
            ),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Self::Approx(p) => polygon_to_json(p),
            Self::Exact(p) => polygon_to_json(p),
        }
    }
}

pub fn canonical_to_json(c: &CanonicalForm) -> Value {
    json!({ "angles": c.angles, "identity_block": c.identity_block })
}

pub fn certificate_to_json<S: Scalar>(cert: &SelfDualityCertificate<S>, canonical: Option<&CanonicalForm>) -> Value {
    json!({
        "kind": "certificate",
        "arithmetic": arithmetic::<S>(),
        "m": cert.m,
        "n": cert.n,
        "k": cert.k,
        "residual": cert.residual,
        "r": cert.r,
        "F": encode_matrix(cert.form.matrix()),
        "G": encode_matrix(&cert.monodromy),
        "canonical": canonical.map(canonical_to_json),
    })
}

/// Polyline OBJ in the affine chart `x_3 = 1`. Needs `k = 3` and real
/// coordinates.
pub fn export_obj<S: Scalar>(p: &Polygon<S>, tol: f64) -> Result<String> {
    if p.ambient_dim() != 3 {
        return Err(Error::Precondition(format!(
            "OBJ export needs polygons in P^3, got P^{}",
            p.ambient_dim()
        )));
    }
    let mut out = String::new();
    for (t, v) in p.vertices().iter().enumerate() {
        let c: Vec<Complex64> = v.coords().iter().map(Scalar::to_c64).collect();
        let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !v.coords().iter().all(Scalar::is_real) || c.iter().any(|z| z.im.abs() > tol * scale) {
            return Err(Error::ChartFailure {
                slot: t,
                reason: "complex coordinates".into(),
            });
        }
        if c[3].norm() <= tol * scale {
            return Err(Error::ChartFailure {
                slot: t,
                reason: "vertex at infinity".into(),
            });
        }
        let w = c[3].re;
        writeln!(out, "v {} {} {}", c[0].re / w, c[1].re / w, c[2].re / w).expect("string write");
    }
    let cycle: Vec<String> = (1..=p.n()).chain(std::iter::once(1)).map(|i| i.to_string()).collect();
    writeln!(out, "l {}", cycle.join(" ")).expect("string write");
    Ok(out)
}

/// Convenience for tests and tools: exact polygon from integer rows.
pub fn exact_polygon(rows: &[Vec<i64>]) -> Result<Polygon<GaussRat>> {
    Polygon::new(rows.iter().map(|r| ProjPoint::from_i64(r)).collect::<Result<_>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{construct_m_eq_n, regular_polygon};
    use crate::selfdual::{check_self_dual, classify_form};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_round_trip_is_bit_identical() {
        let rep = construct_m_eq_n::<GaussRat>(7, 2, 3).unwrap();
        let v = polygon_to_json(&rep.polygon);
        assert_eq!(v["arithmetic"], "exact");
        let text = serde_json::to_string(&v).unwrap();
        let back = match AnyPolygon::parse(&text).unwrap() {
            AnyPolygon::Exact(p) => p,
            AnyPolygon::Approx(_) => panic!("wrong arithmetic"),
        };
        assert_eq!(back.coords(), rep.polygon.coords());
    }

    #[test]
    fn approx_round_trip_within_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Polygon::<Complex64>::random(3, 8, false, &mut rng, 1e-9).unwrap();
        let back: Polygon<Complex64> = polygon_from_json(&polygon_to_json(&p)).unwrap();
        for t in 0..8 {
            assert!(p.slot(t).same_as(back.slot(t), 1e-12));
        }
        let v = polygon_to_json(&p);
        for vert in v["vertices"].as_array().unwrap() {
            let m = vert
                .as_array()
                .unwrap()
                .iter()
                .map(|c| Complex64::new(c[0].as_f64().unwrap(), c[1].as_f64().unwrap()).norm())
                .fold(0.0, f64::max);
            assert!((m - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn malformed_documents() {
        assert!(AnyPolygon::parse("{").is_err());
        assert!(AnyPolygon::parse(r#"{"kind":"polygon","arithmetic":"fuzzy"}"#).is_err());
        let bad = r#"{"kind":"polygon","ambient_dim":2,"n":4,"arithmetic":"approx","vertices":[[[1,0],[0,0],[0,0]]]}"#;
        assert!(AnyPolygon::parse(bad).is_err());
        let exact_as_approx = r#"{"kind":"polygon","ambient_dim":1,"n":4,"arithmetic":"approx","vertices":[[["1/2","0"],[0,0]]]}"#;
        assert!(AnyPolygon::parse(exact_as_approx).is_err());
    }

    #[test]
    fn certificate_document() {
        let rep = construct_m_eq_n::<GaussRat>(5, 2, 1).unwrap();
        let c = classify_form(&rep.certificate, 1e-9).unwrap();
        let v = certificate_to_json(&rep.certificate, Some(&c));
        assert_eq!(v["m"], 5);
        assert_eq!(v["r"], 1);
        assert_eq!(v["canonical"]["identity_block"], 3);
        let f: Matrix<GaussRat> = decode_matrix(&v["F"]).unwrap();
        assert_eq!(&f, rep.certificate.form.matrix());
    }

    #[test]
    fn obj_export() {
        let rep = construct_m_eq_n::<Complex64>(12, 3, 1).unwrap();
        let obj = export_obj(&rep.polygon, 1e-9).unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 12);
        let l: Vec<&str> = obj.lines().filter(|l| l.starts_with("l ")).collect();
        assert_eq!(l, vec!["l 1 2 3 4 5 6 7 8 9 10 11 12 1"]);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let complex = Polygon::<Complex64>::random(3, 6, false, &mut rng, 1e-9).unwrap();
        assert!(matches!(export_obj(&complex, 1e-9), Err(Error::ChartFailure { .. })));

        let at_infinity = exact_polygon(&[
            vec![1, 0, 0, 0],
            vec![0, 1, 0, 1],
            vec![0, 0, 1, 1],
            vec![1, 1, 1, 1],
            vec![1, 2, 3, 1],
            vec![2, 1, 5, 1],
        ])
        .unwrap();
        assert!(matches!(export_obj(&at_infinity, 1e-9), Err(Error::ChartFailure { slot: 0, .. })));

        let nine = regular_polygon(9, 3, &[1, 2]).unwrap();
        assert!(check_self_dual(&nine, 2, 1e-9).unwrap().is_self_dual());
        let obj = export_obj(&nine, 1e-9).unwrap();
        let first: Vec<f64> = obj.lines().next().unwrap()[2..].split(' ').map(|x| x.parse().unwrap()).collect();
        let th = std::f64::consts::PI / 18.0;
        // slot 0 is (cos, sin, cos, sin) at the phase offset
        let expected = [th.cos() / th.sin(), 1.0, th.cos() / th.sin()];
        for (a, b) in first.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{first:?}");
        }
    }
}
