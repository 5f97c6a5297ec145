//! wasm-bindgen exports for the static page in `www/`.
//!
//! Each export returns a JSON string; the plain `*_json` functions hold the
//! logic so they can be tested natively.

use halasz_core::dirichlet::zeta;
use halasz_core::extremal::{
    alpha_from_kappa, choose_blocks, extremal_function, theta_at, KappaFunction, KappaSpec,
    LogLogGrid, DEFAULT_L2_BUDGET,
};
use halasz_core::halasz::{theorem1_ratio, HalaszDirection};
use halasz_core::multfun::{builtin, parse_function_spec, summatory_trace, CheckpointGrid};
use halasz_core::primes::sieve_primes;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Keeps a single click from freezing the tab.
pub const MAX_LIMIT: u64 = 20_000_000;

#[derive(Serialize)]
struct Curve {
    label: String,
    /// `[x, re S, im S, |S|, |S| / x]`
    points: Vec<[f64; 5]>,
}

pub fn summatory_json(function: &str, limit: u64, ratio: f64) -> Result<String, String> {
    if limit > MAX_LIMIT {
        return Err(format!("limit {limit} is above the page's cap of {MAX_LIMIT}"));
    }
    let f = parse_function_spec(function).map_err(|e| e.to_string())?;
    let trace = summatory_trace(&f, limit, &CheckpointGrid::Geometric { ratio })
        .map_err(|e| e.to_string())?;
    let points = trace
        .checkpoints
        .iter()
        .map(|c| {
            let x = c.x as f64;
            [x, c.s.re, c.s.im, c.s.norm(), c.s.norm() / x]
        })
        .collect();
    Ok(serde_json::to_string(&Curve {
        label: f.label().to_string(),
        points,
    })
    .unwrap())
}

#[derive(Serialize)]
struct Theorem1Curve {
    label: String,
    epsilon0: i8,
    t0: f64,
    /// `[sigma, ratio, err]`; ratio is null where `|F|` is not resolved.
    rows: Vec<(f64, Option<f64>, f64)>,
    /// `|zeta(sigma + i t0)|` on the same grid, for comparison.
    zeta_abs: Vec<f64>,
}

pub fn theorem1_json(
    function: &str,
    epsilon0: i8,
    t0: f64,
    sigma_min: f64,
    sigma_max: f64,
    count: usize,
    prime_cutoff: u64,
) -> Result<String, String> {
    if prime_cutoff > MAX_LIMIT {
        return Err(format!("prime cutoff is above the page's cap of {MAX_LIMIT}"));
    }
    if count == 0 || count > 400 || !(sigma_min > 1.0 && sigma_max >= sigma_min) {
        return Err("need 1 < sigma_min <= sigma_max and 1..=400 points".into());
    }
    let f = parse_function_spec(function).map_err(|e| e.to_string())?;
    let dir = HalaszDirection::new(epsilon0, t0).map_err(|e| e.to_string())?;
    let grid: Vec<f64> = (0..count)
        .map(|i| {
            if count == 1 {
                sigma_min
            } else {
                let w = i as f64 / (count - 1) as f64;
                1.0 + (sigma_min - 1.0) * ((sigma_max - 1.0) / (sigma_min - 1.0)).powf(w)
            }
        })
        .collect();
    let table = sieve_primes(prime_cutoff).map_err(|e| e.to_string())?;
    let rows = theorem1_ratio(&f, dir, &grid, prime_cutoff, &table).map_err(|e| e.to_string())?;
    let zeta_abs = grid
        .iter()
        .map(|&s| {
            zeta(halasz_core::dirichlet::ComplexPoint::new(s, t0).unwrap())
                .value
                .norm()
        })
        .collect();
    Ok(serde_json::to_string(&Theorem1Curve {
        label: f.label().to_string(),
        epsilon0,
        t0,
        rows: rows
            .iter()
            .map(|r| match r.ratio {
                Some((q, e)) => (r.sigma, Some(q), e),
                None => (r.sigma, None, r.f_value.error_bound),
            })
            .collect(),
        zeta_abs,
    })
    .unwrap())
}

#[derive(Serialize)]
struct ThetaPlot {
    label: String,
    /// `[log x_j, log upper_j, a_j]`
    blocks: Vec<[f64; 3]>,
    /// `[p, theta_p]` for primes with `theta_p != 0`
    theta: Vec<[f64; 2]>,
    /// `[p, running sum of theta_p^2 / p]` at each selected prime
    psum: Vec<[f64; 2]>,
}

pub fn extremal_theta_json(kappa: &str, x1: f64, j: usize, upto: u64) -> Result<String, String> {
    if upto > MAX_LIMIT {
        return Err(format!("upper range is above the page's cap of {MAX_LIMIT}"));
    }
    let spec: KappaSpec = kappa.parse().map_err(|e: halasz_core::LabError| e.to_string())?;
    let k = KappaFunction::from_spec(spec, LogLogGrid::default()).map_err(|e| e.to_string())?;
    let alpha = alpha_from_kappa(&k, 1.0).map_err(|e| e.to_string())?;
    let spec = choose_blocks(&alpha, j, x1, DEFAULT_L2_BUDGET, Some(spec))
        .map_err(|e| e.to_string())?;
    let f = extremal_function(&spec);
    let table = sieve_primes(upto.max(2)).map_err(|e| e.to_string())?;
    let mut theta = Vec::new();
    let mut psum = Vec::new();
    let mut acc = 0.0;
    for p in table.iter() {
        let th = theta_at(&spec, p);
        if th != 0.0 {
            acc += th * th / p as f64;
            theta.push([p as f64, th]);
            psum.push([p as f64, acc]);
        }
    }
    Ok(serde_json::to_string(&ThetaPlot {
        label: f.label().to_string(),
        blocks: spec
            .blocks
            .iter()
            .map(|b| [b.log_x, b.log_upper, b.a])
            .collect(),
        theta,
        psum,
    })
    .unwrap())
}

/// Names accepted by the function fields, for the page's dropdown.
pub fn builtin_names() -> Vec<&'static str> {
    ["one", "moebius", "liouville", "odd_one", "extremal-ref"]
        .into_iter()
        .filter(|n| builtin(n, &[]).is_ok())
        .collect()
}

#[wasm_bindgen]
pub fn summatory_curve(function: &str, limit: u32, ratio: f64) -> Result<String, JsError> {
    summatory_json(function, limit as u64, ratio).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn theorem1_curve(
    function: &str,
    epsilon0: i8,
    t0: f64,
    sigma_min: f64,
    sigma_max: f64,
    count: u32,
    prime_cutoff: u32,
) -> Result<String, JsError> {
    theorem1_json(
        function,
        epsilon0,
        t0,
        sigma_min,
        sigma_max,
        count as usize,
        prime_cutoff as u64,
    )
    .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn extremal_theta(kappa: &str, x1: f64, blocks: u32, upto: u32) -> Result<String, JsError> {
    extremal_theta_json(kappa, x1, blocks as usize, upto as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn function_names() -> String {
    serde_json::to_string(&builtin_names()).unwrap()
}
