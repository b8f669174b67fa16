//! wasm-bindgen bindings behind `www/index.html`.
//!
//! Every export takes plain numbers and strings and returns a JSON string, so
//! the page needs no glue beyond `JSON.parse`. The `*_json` functions carry the
//! logic and are what the native tests exercise.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use sumprod::bounds::{checked_family, verify_instance, Mode};
use sumprod::explorer::{cell_seed, generate_family, FamilyDescriptor};
use sumprod::field::FieldSpec;
use sumprod::setstats::{image_set, rep_function, SubsetFq};
use sumprod::spectral::{fourier_fast, DensityFn};

/// The browser tab has far less room than the CLI.
const CAP: u64 = 1 << 14;

type Out = Result<String, String>;

fn field(p: u64, l: u32) -> Result<FieldSpec, String> {
    FieldSpec::new(p, l, CAP).map_err(|e| e.to_string())
}

/// Comma or whitespace separated element indices.
fn parse_set(field: &FieldSpec, text: &str) -> Result<SubsetFq, String> {
    let mut idx = Vec::new();
    for tok in text.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        idx.push(tok.parse::<u64>().map_err(|_| format!("not an element index: {tok:?}"))?);
    }
    SubsetFq::from_indices(field, idx).map_err(|e| e.to_string())
}

fn indices(set: &SubsetFq) -> Vec<u32> {
    set.iter().map(|e| e.0).collect()
}

pub fn line_image_json(p: u64, l: u32, a: &str, b: &str, c: &str, mode: &str) -> Out {
    let f = field(p, l)?;
    let mode: Mode = mode.parse().map_err(|e: sumprod::Error| e.to_string())?;
    let (a, b, c) = (parse_set(&f, a)?, parse_set(&f, b)?, parse_set(&f, c)?);
    let report = verify_instance(&f, &a, &b, &c, mode).map_err(|e| e.to_string())?;
    let lines = checked_family(&f, &b, &c, mode);
    let counts = rep_function(&f, &lines, &a).counts().to_vec();
    let image = image_set(&f, &lines, &a);
    Ok(json!({
        "field": f.to_string(),
        "q": f.q(),
        "counts": counts,
        "image": indices(&image),
        "report": report,
    })
    .to_string())
}

pub fn spectrum_json(p: u64, l: u32, set: &str) -> Out {
    let f = field(p, l)?;
    let s = parse_set(&f, set)?;
    let spec = fourier_fast(&f, &DensityFn::indicator(&s)).map_err(|e| e.to_string())?;
    let coeffs: Vec<Value> = spec
        .values()
        .iter()
        .map(|z| json!({"re": z.re, "im": z.im, "abs": z.norm()}))
        .collect();
    let elements: Vec<Vec<u32>> = f.elements().map(|e| f.coefficients(e)).collect();
    Ok(json!({
        "field": f.to_string(),
        "q": f.q(),
        "size": s.len(),
        "coefficients": coeffs,
        "elements": elements,
        "nonzero_energy": spec.nonzero_energy(),
    })
    .to_string())
}

/// `A = B = C` drawn from `family` (a JSON family descriptor) for each trial.
pub fn ratio_sweep_json(p: u64, l: u32, family: &str, size: u64, trials: u32, seed: u64) -> Out {
    let f = field(p, l)?;
    let desc: FamilyDescriptor = serde_json::from_str(family).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for t in 0..trials {
        let s = cell_seed(seed, t as u64);
        let a = generate_family(&f, &desc, size, s).map_err(|e| e.to_string())?;
        let r = verify_instance(&f, &a, &a, &a, Mode::BaPlusC).map_err(|e| e.to_string())?;
        rows.push(json!({
            "trial": t,
            "size_a": r.size_a,
            "size_image": r.size_image,
            "exact_lower_bound": r.exact_lower_bound,
            "asymptotic_bound": r.asymptotic_bound,
            "ratio": r.ratio,
            "checks_passed": r.checks_passed,
            "status": r.status,
        }));
    }
    Ok(json!({"field": f.to_string(), "q": f.q(), "family": desc.label(), "rows": rows}).to_string())
}

#[wasm_bindgen]
pub fn line_image(p: u32, l: u32, a: &str, b: &str, c: &str, mode: &str) -> Result<String, JsError> {
    line_image_json(p as u64, l, a, b, c, mode).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn spectrum(p: u32, l: u32, set: &str) -> Result<String, JsError> {
    spectrum_json(p as u64, l, set).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ratio_sweep(p: u32, l: u32, family: &str, size: u32, trials: u32, seed: u32) -> Result<String, JsError> {
    ratio_sweep_json(p as u64, l, family, size as u64, trials, seed as u64).map_err(|e| JsError::new(&e))
}

/// Element index to its coefficient vector, lowest degree first.
#[wasm_bindgen]
pub fn describe_element(p: u32, l: u32, index: u32) -> Result<String, JsError> {
    let f = field(p as u64, l).map_err(|e| JsError::new(&e))?;
    let e = f.elem(index as u64).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(json!({"index": index, "coefficients": f.coefficients(e), "trace": f.trace(e)}).to_string())
}
