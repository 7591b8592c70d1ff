//! Browser bindings for the interactive demo page: combined graphs of
//! quasi-regular systems, the trajectories of the constructed integer
//! points, and the certified deviation curve against the 2n^2 bound.
//!
//! The exported functions take a small JSON config and return JSON with
//! plot-ready f64 coordinates (display only; the underlying computation is
//! the exact/certified machinery of the core crate). The `*_impl` functions
//! carry the logic and are exercised natively by the tests; the thin
//! `wasm_bindgen` wrappers exist only on the wasm32 target.

use serde::Deserialize;
use serde_json::json;

use parageo::construction::GrowthSequence;
use parageo::interval::{Interval, PrecisionPolicy};
use parageo::minima::{trajectory, BodyFamily};
use parageo::num_rational::BigRational;
use parageo::rational::parse_decimal;
use parageo::systems::{MeshSequence, QuasiRegularSystem};
use parageo::verify::{certify, VerifyConfig};

#[derive(Deserialize)]
struct DemoConfig {
    n: usize,
    x1: String,
    rho: String,
    count: usize,
    #[serde(default)]
    grid_samples: Option<usize>,
}

// Browser-side guard rails: the demo favors latency over scale.
const MAX_N: usize = 5;
const MAX_COUNT: usize = 14;
const MAX_SAMPLES: usize = 128;

fn parse_config(config_json: &str) -> Result<(DemoConfig, MeshSequence), String> {
    let cfg: DemoConfig =
        serde_json::from_str(config_json).map_err(|e| format!("invalid config: {e}"))?;
    if cfg.n < 2 || cfg.n > MAX_N {
        return Err(format!("n must be between 2 and {MAX_N}"));
    }
    if cfg.count < cfg.n || cfg.count > MAX_COUNT {
        return Err(format!("count must be between n and {MAX_COUNT}"));
    }
    let x1 = parse_decimal(&cfg.x1).map_err(|e| e.to_string())?;
    let rho = parse_decimal(&cfg.rho).map_err(|e| e.to_string())?;
    let mesh = MeshSequence::regular(x1, rho, cfg.count).map_err(|e| e.to_string())?;
    Ok((cfg, mesh))
}

fn rat_f64(r: &BigRational) -> f64 {
    parageo::interval::BigFloat::from_ratio(r, 64, parageo::interval::Dir::Down).to_f64_approx()
}

fn iv_mid_f64(iv: &Interval) -> f64 {
    iv.midpoint(64).to_f64_approx()
}

/// Combined graph of the configured system: breakpoints and segments with
/// f64 endpoints, plus the summary (mesh gap, log-4 flag, domain).
pub fn system_graph_impl(config_json: &str) -> Result<String, String> {
    let (cfg, mesh) = parse_config(config_json)?;
    let sys = QuasiRegularSystem::new(mesh.clone(), cfg.n).map_err(|e| e.to_string())?;
    let k = sys.breakpoints().len();
    let segments = if k >= 2 {
        sys.combined_graph(1, k - 1).map_err(|e| e.to_string())?
    } else {
        Vec::new()
    };
    let gap_ok = mesh.has_mesh_at_least_log4(96);
    let out = json!({
        "n": cfg.n,
        "breakpoints": sys.breakpoints().iter().map(rat_f64).collect::<Vec<_>>(),
        "domain": [rat_f64(sys.domain().0), rat_f64(sys.domain().1)],
        "mesh_gap": rat_f64(&mesh.mesh_gap().expect("count >= 2")),
        "mesh_at_least_log4": matches!(gap_ok, parageo::Cert::True),
        "segments": segments.iter().map(|s| json!({
            "component_index": s.component_index,
            "q_start": rat_f64(&s.q_start),
            "y_start": rat_f64(&s.y_start),
            "q_end": rat_f64(&s.q_end),
            "y_end": rat_f64(&s.y_end),
            "slope": s.slope,
        })).collect::<Vec<_>>(),
    });
    Ok(out.to_string())
}

/// Constructs the integer points for the configured system and returns
/// their trajectory data: per point the breakpoint `q*`, the minimum value,
/// and the exact certificates (det, dual pairing).
pub fn construct_trajectories_impl(config_json: &str) -> Result<String, String> {
    let (cfg, mesh) = parse_config(config_json)?;
    let policy = PrecisionPolicy::default();
    let n = cfg.n;
    let sys = QuasiRegularSystem::new(mesh.clone(), n).map_err(|e| e.to_string())?;
    let k = sys.breakpoints().len();
    let m = (k - 1) + n + 2;
    let ext = mesh.extended(m).ok_or("mesh cannot extend")?;
    let growth = GrowthSequence::from_mesh(&ext, &policy).map_err(|e| e.to_string())?;
    let result = parageo::construction::run(n, &growth, m, &policy).map_err(|e| e.to_string())?;
    let proxy = result.direction(None).map_err(|e| e.to_string())?;
    let body = BodyFamily::from_proxy(proxy.clone());

    let used = k + n - 2;
    let mut trajs = Vec::with_capacity(used);
    for j in 1..=used {
        let tr = trajectory(result.point(j), &body, 192).map_err(|e| e.to_string())?;
        trajs.push(json!({
            "point_index": j,
            "coords": result.point(j).coords().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "log_norm": iv_mid_f64(&tr.log_norm),
            "log_dot": iv_mid_f64(&tr.log_dot),
            "breakpoint_q": iv_mid_f64(&tr.breakpoint_q(96)),
            "min_value": iv_mid_f64(&tr.min_value(96)),
        }));
    }
    let out = json!({
        "n": n,
        "stages": result.stage_count(),
        "trajectories": trajs,
        "certificates": result.stages().iter().map(|s| json!({
            "point_index": s.point_index,
            "det": s.det.to_string(),
            "dual_pairing": s.dual_pairing.to_string(),
        })).collect::<Vec<_>>(),
        "direction_w": proxy.w.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "tail_upper": proxy.tail.hi().to_f64_approx(),
    });
    Ok(out.to_string())
}

/// Runs the certification and returns the deviation curve (per grid point)
/// together with the status, bound, and analytic ceilings.
pub fn verify_bound_impl(config_json: &str) -> Result<String, String> {
    let (cfg, mesh) = parse_config(config_json)?;
    let n = cfg.n;
    let sys = QuasiRegularSystem::new(mesh, n).map_err(|e| e.to_string())?;
    let samples = cfg.grid_samples.unwrap_or(16).clamp(1, MAX_SAMPLES);
    let vconfig = VerifyConfig {
        samples_per_interval: samples,
        tail_rel_target: 1e-6,
        policy: PrecisionPolicy::default(),
    };
    let k = sys.breakpoints().len();
    let m = (k - 1) + n + 2;
    let ext = sys.mesh().extended(m).ok_or("mesh cannot extend")?;
    let growth = GrowthSequence::from_mesh(&ext, &vconfig.policy).map_err(|e| e.to_string())?;
    let result =
        parageo::construction::run(n, &growth, m, &vconfig.policy).map_err(|e| e.to_string())?;
    let proxy = result.direction(None).map_err(|e| e.to_string())?;
    let report = certify(&sys, &result, &proxy, &vconfig).map_err(|e| e.to_string())?;
    let out = json!({
        "n": n,
        "status": format!("{:?}", report.status).to_lowercase(),
        "bound": report.bound,
        "max_deviation_upper": report.max_deviation_upper.to_f64_approx(),
        "sampling_error": rat_f64(&report.sampling_error),
        "analytic_ceiling": iv_mid_f64(&report.analytic_ceiling),
        "covered_range": [rat_f64(&report.covered_range.0), rat_f64(&report.covered_range.1)],
        "curve": report.rows.iter().map(|r| json!({
            "q": rat_f64(&r.q),
            "deviation_upper": r.deviation_upper.to_f64_approx(),
            "leg_center": iv_mid_f64(&r.leg_center),
            "slack": iv_mid_f64(&r.slack),
        })).collect::<Vec<_>>(),
        "max_residual_upper": report.max_residual_upper.to_f64_approx(),
        "stages_used": report.stages_used,
    });
    Ok(out.to_string())
}

#[cfg(target_arch = "wasm32")]
mod bindings {
    use wasm_bindgen::prelude::*;

    #[wasm_bindgen]
    pub fn system_graph(config_json: &str) -> Result<String, JsValue> {
        super::system_graph_impl(config_json).map_err(|e| JsValue::from_str(&e))
    }

    #[wasm_bindgen]
    pub fn construct_trajectories(config_json: &str) -> Result<String, JsValue> {
        super::construct_trajectories_impl(config_json).map_err(|e| JsValue::from_str(&e))
    }

    #[wasm_bindgen]
    pub fn verify_bound(config_json: &str) -> Result<String, JsValue> {
        super::verify_bound_impl(config_json).map_err(|e| JsValue::from_str(&e))
    }
}
