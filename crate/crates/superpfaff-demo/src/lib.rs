//! WebAssembly bindings for the static page in `www/`. Every export takes plain numbers and
//! returns a JSON string; errors come back as `{"error": "..."}` rather than exceptions.

use num_complex::Complex64;
use serde_json::{json, Value};
use superpfaff::spf::{boundary_probe, default_eps, spf, spo22_formula};
use superpfaff::superlinalg::{SuperMatrix, WeilMatrix};
use superpfaff::superspace::SymplecticSuperSpace;
use superpfaff::{Error, WeilElement};
use wasm_bindgen::prelude::wasm_bindgen;

type C = Complex64;

fn re(v: f64) -> C {
    C::new(v, 0.0)
}

fn pair(z: C) -> Value {
    json!([z.re, z.im])
}

fn render(r: Result<Value, Error>) -> String {
    r.unwrap_or_else(|e| json!({"error": e.to_string()})).to_string()
}

/// `[[a, b], [c, −a]]` as a point of spo(2|0).
pub fn sl2_matrix(a: f64, b: f64, c: f64) -> SuperMatrix<C> {
    let sp = SymplecticSuperSpace::new(2, 0).expect("m = 2 is even");
    let am = WeilMatrix::from_scalars(2, 2, 0, &[re(a), re(b), re(c), re(-a)]);
    SuperMatrix::block_diag(sp, am, WeilMatrix::zeros(0, 0, 0)).expect("shapes agree")
}

pub fn sl2_point_json(a: f64, b: f64, c: f64) -> Value {
    let disc = a * a + b * c;
    let body = match spf(&sl2_matrix(a, b, c)) {
        Ok(v) => json!({"value": pair(v.value.body()), "stratum": [v.stratum.0, v.stratum.1]}),
        Err(e) => json!({"error": e.to_string()}),
    };
    let mut out = json!({"a": a, "b": b, "c": c, "discriminant": disc});
    out.as_object_mut().unwrap().extend(body.as_object().unwrap().clone());
    out
}

/// Spf on sl(2) at `[[a, b], [c, −a]]`: value, stratum and the discriminant `a² + bc`.
#[wasm_bindgen]
pub fn sl2_point(a: f64, b: f64, c: f64) -> String {
    sl2_point_json(a, b, c).to_string()
}

/// A `size × size` grid of strata over `b, c ∈ [−r, r]` at fixed `a`, row-major with `c` outer.
/// Cells hold `p − q` of the even signature, or `null` on the boundary.
#[wasm_bindgen]
pub fn sl2_strata_grid(a: f64, r: f64, size: usize) -> String {
    let step = if size > 1 { 2.0 * r / (size - 1) as f64 } else { 0.0 };
    let cells: Vec<Value> = (0..size * size)
        .map(|k| {
            let (c, b) = (r - step * (k / size) as f64, -r + step * (k % size) as f64);
            match spf(&sl2_matrix(a, b, c)) {
                Ok(v) => json!(v.stratum.0 as i64 - v.stratum.1 as i64),
                Err(_) => Value::Null,
            }
        })
        .collect();
    json!({"size": size, "r": r, "a": a, "cells": cells}).to_string()
}

pub fn boundary_curve_json(c: f64, steps: usize) -> Result<Value, Error> {
    let x = sl2_matrix(0.0, -c, c);
    // J₂ spans the negative cone direction used for the limit.
    let y = sl2_matrix(0.0, 1.0, -1.0);
    let eps: Vec<f64> = if steps == 0 { default_eps() } else { (0..steps).map(|k| 0.1 * 0.5f64.powi(k as i32)).collect() };
    let p = boundary_probe(&x, &y, &eps)?;
    Ok(json!({
        "c": c,
        "eps": p.eps,
        "values": p.values.iter().map(|z| pair(*z)).collect::<Vec<_>>(),
        "errors": p.values.iter().map(|z| (z - 1.0 / c).norm()).collect::<Vec<_>>(),
        "limit": pair(p.limit),
        "error_estimate": p.error_estimate,
        "expected": 1.0 / c,
    }))
}

/// Boundary probe at the Cartan element `[[0, −c], [c, 0]]` (`steps = 0` for the default ε ladder).
#[wasm_bindgen]
pub fn boundary_curve(c: f64, steps: usize) -> String {
    render(boundary_curve_json(c, steps))
}

fn weil_terms(w: &WeilElement<C>) -> Value {
    w.terms()
        .iter()
        .filter(|(_, z)| z.norm() > 1e-14)
        .map(|(mask, z)| {
            let gens: Vec<u32> = (0..64).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
            json!({"gens": gens, "re": z.re, "im": z.im})
        })
        .collect()
}

/// The spo(2|2) point with even part `[[a, b], [c, −a]] ⊕ [[0, −d], [d, 0]]` and odd parameters
/// `α, β, γ, δ` set to the Grassmann generators `θ₁, …, θ₄`.
pub fn spo22_matrix(a: f64, b: f64, c: f64, d: f64) -> Result<SuperMatrix<C>, Error> {
    let n = 4;
    let k = |v: f64| WeilElement::constant(n, re(v));
    let th = |i: u32| WeilElement::<C>::generator(n, i);
    let (al, be, ga, de) = (th(0), th(1), th(2), th(3));
    let am = WeilMatrix::from_rows(vec![vec![k(a), k(b)], vec![k(c), k(-a)]], n)?;
    let bm = WeilMatrix::from_rows(vec![vec![be.clone(), de.clone()], vec![-&al, -&ga]], n)?;
    let cm = WeilMatrix::from_rows(vec![vec![-&al, -&be], vec![-&ga, -&de]], n)?;
    let dm = WeilMatrix::from_rows(vec![vec![k(0.0), k(-d)], vec![k(d), k(0.0)]], n)?;
    SuperMatrix::new(SymplecticSuperSpace::new(2, 2)?, am, bm, cm, dm)
}

pub fn spo22_eval_json(a: f64, b: f64, c: f64, d: f64) -> Result<Value, Error> {
    let x = spo22_matrix(a, b, c, d)?;
    let v = spf(&x)?;
    let f = spo22_formula(&x)?;
    Ok(json!({
        "stratum": [v.stratum.0, v.stratum.1],
        "spf": weil_terms(&v.value),
        "formula": weil_terms(&f),
        "discrepancy": v.value.relative_error(&f),
    }))
}

/// Spf at an spo(2|2) point next to the closed two-by-two formula, as Grassmann expansions.
#[wasm_bindgen]
pub fn spo22_eval(a: f64, b: f64, c: f64, d: f64) -> String {
    render(spo22_eval_json(a, b, c, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sl2_strata() {
        let v = sl2_point_json(0.0, -3.0, 3.0);
        assert_eq!(v["stratum"], json!([2, 0]));
        assert!((v["value"][0].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(sl2_point_json(1.0, 0.0, 0.0)["stratum"], json!([1, 1]));
        assert!(sl2_point_json(0.0, 1.0, 0.0).get("error").is_some());
    }

    #[test]
    fn grid_marks_the_cone() {
        let g: Value = serde_json::from_str(&sl2_strata_grid(0.0, 1.0, 5)).unwrap();
        let cells = g["cells"].as_array().unwrap();
        assert_eq!(cells.len(), 25);
        // b = c = 0 is the nilpotent cone.
        assert_eq!(cells[12], Value::Null);
        assert!(cells.iter().any(|c| c == &json!(2)) && cells.iter().any(|c| c == &json!(0)));
    }

    #[test]
    fn boundary_curve_converges() {
        let v = boundary_curve_json(2.0, 0).unwrap();
        assert!((v["limit"][0].as_f64().unwrap() - 0.5).abs() < 1e-9);
        let errs: Vec<f64> = v["errors"].as_array().unwrap().iter().map(|e| e.as_f64().unwrap()).collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn spo22_matches_formula() {
        for (a, b, c, d) in [(0.0, -2.0, 1.0, 3.0), (1.0, 0.5, -1.0, -2.0), (2.0, 1.0, 1.0, 1.0)] {
            let v = spo22_eval_json(a, b, c, d).unwrap();
            assert!(v["discrepancy"].as_f64().unwrap() < 1e-12, "{v}");
        }
        let v: Value = serde_json::from_str(&spo22_eval(0.0, 0.0, 0.0, 1.0)).unwrap();
        assert!(v.get("error").is_some());
    }
}
