//! Single-scenario computations: the `rate` and `layering` JSON reports.

use cslrate_core::continuum::{gamma_adler, gamma_cuboid, gamma_gpr, gamma_small_delta};
use cslrate_core::diffusion::{
    eta_zz_alternating, eta_zz_layered, layering_ratio_interfaces, LayerEta,
};
use cslrate_core::domain::{LayerStack, RateResult};
use cslrate_core::lattice::gamma_discrete;
use serde::Serialize;

use crate::scenario::Scenario;
use crate::{regime_err, CliError, MethodArg};

#[derive(Serialize)]
pub struct FlagReport {
    name: &'static str,
    satisfied: bool,
    requirement: String,
}

#[derive(Serialize)]
pub struct RateReport {
    pub gamma: f64,
    pub method: &'static str,
    pub validity: Vec<FlagReport>,
    pub error_estimate: Option<f64>,
    pub inputs: serde_json::Value,
}

fn to_report(result: RateResult, scenario: &Scenario) -> RateReport {
    RateReport {
        gamma: result.gamma,
        method: result.method.name(),
        validity: result
            .validity
            .into_iter()
            .map(|f| FlagReport {
                name: f.name,
                satisfied: f.satisfied,
                requirement: f.requirement,
            })
            .collect(),
        error_estimate: result.error_estimate,
        inputs: scenario.raw.clone(),
    }
}

pub fn rate_report(sc: &Scenario, method: MethodArg) -> Result<RateReport, CliError> {
    let result = match method {
        MethodArg::Continuous => {
            gamma_cuboid(&sc.geometry, &sc.displacement, &sc.params).map_err(regime_err)?
        }
        MethodArg::SmallDelta => {
            gamma_small_delta(&sc.geometry, &sc.displacement, &sc.params).map_err(regime_err)?
        }
        MethodArg::Discrete => {
            let lat = sc.lattice.as_ref().ok_or_else(|| {
                CliError::Schema(
                    "method \"discrete\" needs a \"lattice\" section in the scenario".into(),
                )
            })?;
            gamma_discrete(lat, &sc.displacement, &sc.params)
        }
        MethodArg::Gpr => {
            gamma_gpr(&sc.geometry, &sc.displacement, &sc.params).map_err(regime_err)?
        }
        MethodArg::Adler => gamma_adler(&sc.geometry, &sc.displacement, &sc.params),
    };
    Ok(to_report(result, sc))
}

#[derive(Serialize)]
pub struct OrdersReport {
    pub eta0: f64,
    pub eta1: f64,
}

#[derive(Serialize)]
pub struct LayeringReport {
    pub eta_zz_total: f64,
    pub boundary_part: f64,
    pub interface_part: f64,
    pub orders: Option<OrdersReport>,
    /// η_lay/η_uni with both sides from the exact stacked sums.
    pub ratio_exact: f64,
    /// The closed-form leading-order ratio 1 + (2I+1)Δϱ²/(ϱ_o+ϱ_e)²; only
    /// for two-density stacks.
    pub ratio_leading_order: Option<f64>,
    pub uniform_density_rule: String,
    pub assumptions: Vec<String>,
    pub inputs: serde_json::Value,
}

/// Distinct density values of a stack, in order of first appearance.
fn distinct_densities(stack: &LayerStack) -> Vec<f64> {
    let mut seen: Vec<f64> = Vec::new();
    for layer in &stack.layers {
        if !seen
            .iter()
            .any(|&d| (d - layer.density_n).abs() <= 1e-12 * d.abs().max(layer.density_n.abs()))
        {
            seen.push(layer.density_n);
        }
    }
    seen
}

pub fn layering_report(sc: &Scenario) -> Result<LayeringReport, CliError> {
    let stack = sc.stack.as_ref().ok_or_else(|| {
        CliError::Schema("layering needs a \"layers\" section in the scenario".into())
    })?;
    let eta = eta_zz_layered(stack, &sc.params);
    let mut assumptions = vec![
        "square cross-section of side d = geometry.lx".to_string(),
        "layer densities interpreted as kg/m3 and divided by m_n".to_string(),
    ];

    let distinct = distinct_densities(stack);
    let thicknesses: Vec<f64> = stack.layers.iter().map(|l| l.thickness).collect();
    let equal_thickness = thicknesses
        .iter()
        .all(|&t| (t - thicknesses[0]).abs() <= 1e-12 * thicknesses[0]);

    // uniform reference body of the same size and mass
    let (rho_uni, rule) = if distinct.len() == 2 {
        (
            0.5 * (distinct[0] + distinct[1]),
            "rho_uni = (rho_o + rho_e)/2".to_string(),
        )
    } else {
        let total: f64 = stack
            .layers
            .iter()
            .map(|l| l.thickness * l.density_n)
            .sum::<f64>()
            / stack.total_length();
        (total, "rho_uni = volume-weighted mean density".to_string())
    };
    let uniform = LayerStack::new(
        stack.d,
        vec![cslrate_core::domain::Layer {
            thickness: stack.total_length(),
            density_n: rho_uni,
        }],
    )
    .map_err(regime_err)?;
    let ratio_exact = eta.total / eta_zz_layered(&uniform, &sc.params).total;

    let ratio_leading_order = (distinct.len() == 2).then(|| {
        let interfaces = stack
            .layers
            .windows(2)
            .filter(|w| (w[0].density_n - w[1].density_n).abs() > 0.0)
            .count() as u32;
        layering_ratio_interfaces(interfaces, distinct[0], distinct[1])
            .expect("densities validated")
    });

    // order decomposition for equal-thickness alternating stacks with an
    // even layer count
    let orders: Option<OrdersReport> = if distinct.len() == 2
        && equal_thickness
        && stack.layers.len() % 2 == 0
        && stack
            .layers
            .iter()
            .enumerate()
            .all(|(i, l)| (l.density_n - distinct[i % 2]).abs() <= 1e-12 * distinct[i % 2])
    {
        let n_pairs = (stack.layers.len() / 2) as u32;
        let alt: LayerEta = eta_zz_alternating(
            n_pairs,
            thicknesses[0],
            thicknesses[0],
            distinct[0] * sc.params.m_n,
            distinct[1] * sc.params.m_n,
            stack.d,
            &sc.params,
        )
        .map_err(regime_err)?;
        alt.orders.map(|(eta0, eta1)| OrdersReport { eta0, eta1 })
    } else {
        if distinct.len() == 2 && stack.layers.len() % 2 == 1 {
            assumptions.push(
                "odd layer count: order decomposition omitted (defined for full pairs)".to_string(),
            );
        }
        None
    };

    Ok(LayeringReport {
        eta_zz_total: eta.total,
        boundary_part: eta.boundary_part,
        interface_part: eta.interface_part,
        orders,
        ratio_exact,
        ratio_leading_order,
        uniform_density_rule: rule,
        assumptions,
        inputs: sc.raw.clone(),
    })
}
