//! Figure presets, generic sweeps and the CSV emitter.
//!
//! Every dataset is a CSV with the fixed column set
//! `sweep_value,gamma_c,gamma_d,gamma_gpr,gamma_adler,gamma_alt_geometry`
//! (absent series left empty), preceded by `#` comment lines echoing the
//! parameters. Values are printed in scientific shortest round-trip form,
//! and sweep points are computed in parallel but written in grid order, so
//! identical inputs give byte-identical files.

use std::io::Write;
use std::path::Path;

use cslrate_core::continuum::{gamma_adler, gamma_cuboid, gamma_gpr, gamma_small_delta};
use cslrate_core::diffusion::eta_zz_alternating;
use cslrate_core::domain::{lattice_from_cuboid, Displacement, Geometry, PhysParams, Shape};
use cslrate_core::lattice::gamma_discrete;
use rayon::prelude::*;

use crate::scenario::Scenario;
use crate::{regime_err, CliError, GridScale, MethodArg, RegimeArg, SweepVariable};

/// Site-count ceiling for the discrete column of figure sweeps.
const MAX_FIGURE_SITES: u64 = 100_000_000;

#[derive(Clone, Copy, Default)]
pub struct Overrides {
    pub density: Option<f64>,
    pub rc: Option<f64>,
    pub lambda: Option<f64>,
    pub d: Option<f64>,
    pub delta: Option<f64>,
    pub l: Option<f64>,
    pub big_l: Option<f64>,
}

#[derive(Clone, Copy)]
enum AltGeometry {
    /// Sphere of the same volume as the swept cube.
    EqualVolumeSphere,
    /// Cylinder of the same volume as the swept cuboid (radius d/√π).
    EqualVolumeCylinder,
}

#[derive(Clone, Copy, PartialEq)]
enum SweepAxis {
    Length,
    Displacement,
}

struct FigureSpec {
    name: &'static str,
    density: f64,
    rc: f64,
    lambda: f64,
    /// Square-face side for cuboid figures; None for cube figures.
    d: Option<f64>,
    /// Fixed displacement (length sweeps).
    delta: Option<f64>,
    /// Fixed length (displacement sweeps).
    big_l: Option<f64>,
    /// Lattice constant for discrete columns.
    lattice_l: Option<f64>,
    axis: SweepAxis,
    grid: Vec<f64>,
    with_continuous: bool,
    with_discrete: bool,
    with_estimates: bool,
    alt: Option<AltGeometry>,
    notes: Vec<&'static str>,
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

fn figure_spec(name: crate::FigureName, o: &Overrides) -> FigureSpec {
    use crate::FigureName::*;
    let rc = o.rc.unwrap_or(1e-7);
    let lambda = o.lambda.unwrap_or(1e-8);
    let base = FigureSpec {
        name: "",
        density: o.density.unwrap_or(1e30),
        rc,
        lambda,
        d: None,
        delta: None,
        big_l: None,
        lattice_l: None,
        axis: SweepAxis::Length,
        grid: Vec::new(),
        with_continuous: true,
        with_discrete: false,
        with_estimates: false,
        alt: None,
        notes: Vec::new(),
    };
    match name {
        Fig1L => FigureSpec {
            name: "fig1L",
            delta: Some(o.delta.unwrap_or(1e-3 * rc)),
            grid: log_grid(1e-3 * rc, 1e4 * rc, 141),
            with_estimates: true,
            ..base
        },
        Fig1R => FigureSpec {
            name: "fig1R",
            delta: Some(o.delta.unwrap_or(1e3 * rc)),
            grid: log_grid(1e-1 * rc, 1e4 * rc, 101),
            with_estimates: true,
            ..base
        },
        Fig2L => FigureSpec {
            name: "fig2L",
            d: Some(o.d.unwrap_or(10.0 * rc)),
            delta: Some(o.delta.unwrap_or(1e-3 * rc)),
            grid: log_grid(1e-1 * rc, 1e3 * rc, 81),
            with_estimates: true,
            notes: vec!["gamma_gpr is emitted unscaled"],
            ..base
        },
        Fig2R => FigureSpec {
            name: "fig2R",
            d: Some(o.d.unwrap_or(10.0 * rc)),
            delta: Some(o.delta.unwrap_or(1e3 * rc)),
            grid: log_grid(1e-1 * rc, 1e4 * rc, 101),
            with_estimates: true,
            notes: vec!["gamma_gpr is emitted unscaled"],
            ..base
        },
        Fig5 => FigureSpec {
            name: "fig5",
            d: Some(o.d.unwrap_or(10.0 * rc)),
            big_l: Some(o.big_l.unwrap_or(20.0 * rc)),
            axis: SweepAxis::Displacement,
            grid: log_grid(1e-2 * rc, 1e2 * rc, 81),
            with_estimates: true,
            ..base
        },
        Fig6 => {
            let l = o.l.unwrap_or(100.0 * rc);
            FigureSpec {
                name: "fig6",
                density: o.density.unwrap_or(1e15),
                d: Some(o.d.unwrap_or(100.0 * rc)),
                big_l: Some(o.big_l.unwrap_or(1e3 * rc)),
                lattice_l: Some(l),
                axis: SweepAxis::Displacement,
                grid: linear_grid(0.5 * l, 8.0 * l, 751),
                with_continuous: false,
                with_discrete: true,
                ..base
            }
        }
        Fig7L => FigureSpec {
            name: "fig7L",
            delta: Some(o.delta.unwrap_or(1e-3 * rc)),
            grid: log_grid(1e-1 * rc, 1e2 * rc, 61),
            alt: Some(AltGeometry::EqualVolumeSphere),
            notes: vec!["gamma_alt_geometry: sphere of equal volume, small-displacement form"],
            ..base
        },
        Fig7R => FigureSpec {
            name: "fig7R",
            d: Some(o.d.unwrap_or(10.0 * rc)),
            delta: Some(o.delta.unwrap_or(1e-3 * rc)),
            grid: linear_grid(1.0 * rc, 30.0 * rc, 59),
            alt: Some(AltGeometry::EqualVolumeCylinder),
            notes: vec!["gamma_alt_geometry: cylinder of equal volume, small-displacement form"],
            ..base
        },
        Fig8L => FigureSpec {
            name: "fig8L",
            density: o.density.unwrap_or(1e21),
            delta: Some(o.delta.unwrap_or(1e-3 * rc)),
            lattice_l: Some(o.l.unwrap_or(rc)),
            grid: linear_grid(rc, 30.0 * rc, 30),
            with_discrete: true,
            ..base
        },
        Fig8R => FigureSpec {
            name: "fig8R",
            density: o.density.unwrap_or(1e18),
            delta: Some(o.delta.unwrap_or(1e-3 * rc)),
            lattice_l: Some(o.l.unwrap_or(10.0 * rc)),
            grid: linear_grid(60.0 * rc, 300.0 * rc, 25),
            with_discrete: true,
            ..base
        },
    }
}

#[derive(Default, Clone, Copy)]
struct Row {
    sweep_value: f64,
    gamma_c: Option<f64>,
    gamma_d: Option<f64>,
    gamma_gpr: Option<f64>,
    gamma_adler: Option<f64>,
    gamma_alt: Option<f64>,
}

fn figure_row(spec: &FigureSpec, x: f64, params: &PhysParams) -> Result<Row, CliError> {
    let length = match spec.axis {
        SweepAxis::Length => x,
        SweepAxis::Displacement => spec.big_l.expect("displacement sweeps fix the length"),
    };
    let delta = match spec.axis {
        SweepAxis::Length => spec.delta.expect("length sweeps fix the displacement"),
        SweepAxis::Displacement => x,
    };
    let shape = match spec.d {
        Some(d) => Shape::Cuboid {
            lx: d,
            ly: d,
            lz: length,
        },
        None => Shape::Cube { l: length },
    };
    let geom = Geometry::new(shape, spec.density).map_err(regime_err)?;
    let disp = Displacement::along_z(delta).map_err(regime_err)?;

    let mut row = Row {
        sweep_value: x,
        ..Row::default()
    };
    if spec.with_continuous {
        row.gamma_c = Some(
            gamma_cuboid(&geom, &disp, params)
                .map_err(regime_err)?
                .gamma,
        );
    }
    if spec.with_estimates {
        row.gamma_gpr = Some(gamma_gpr(&geom, &disp, params).map_err(regime_err)?.gamma);
        row.gamma_adler = Some(gamma_adler(&geom, &disp, params).gamma);
    }
    if spec.with_discrete {
        let l = spec
            .lattice_l
            .expect("discrete figures carry a lattice constant");
        let lat = lattice_from_cuboid(&geom, l, spec.density * l * l * l).map_err(regime_err)?;
        if lat.n_sites() <= MAX_FIGURE_SITES {
            row.gamma_d = Some(gamma_discrete(&lat, &disp, params).gamma);
        }
    }
    if let Some(alt) = spec.alt {
        let alt_geom = match alt {
            AltGeometry::EqualVolumeSphere => Geometry::new(
                Shape::Sphere {
                    r: length * (3.0 / (4.0 * std::f64::consts::PI)).powf(1.0 / 3.0),
                },
                spec.density,
            ),
            AltGeometry::EqualVolumeCylinder => Geometry::new(
                Shape::Cylinder {
                    r: spec.d.expect("cylinder comparison needs d") / std::f64::consts::PI.sqrt(),
                    l: length,
                },
                spec.density,
            ),
        }
        .map_err(regime_err)?;
        row.gamma_alt = Some(
            gamma_small_delta(&alt_geom, &disp, params)
                .map_err(regime_err)?
                .gamma,
        );
    }
    Ok(row)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn write_rate_csv(
    path: &Path,
    comments: &[(String, String)],
    notes: &[&str],
    rows: &[Row],
) -> Result<(), CliError> {
    let mut out = String::new();
    for (key, value) in comments {
        out.push_str(&format!("# {key} = {value}\n"));
    }
    for note in notes {
        out.push_str(&format!("# note: {note}\n"));
    }
    out.push_str("sweep_value,gamma_c,gamma_d,gamma_gpr,gamma_adler,gamma_alt_geometry\n");
    for row in rows {
        out.push_str(&format!(
            "{:e},{},{},{},{},{}\n",
            row.sweep_value,
            fmt_opt(row.gamma_c),
            fmt_opt(row.gamma_d),
            fmt_opt(row.gamma_gpr),
            fmt_opt(row.gamma_adler),
            fmt_opt(row.gamma_alt),
        ));
    }
    let mut file = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    file.write_all(out.as_bytes())
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn emit_figure(
    name: crate::FigureName,
    overrides: &Overrides,
    out: &Path,
) -> Result<(), CliError> {
    let spec = figure_spec(name, overrides);
    let params = PhysParams::new(spec.lambda, spec.rc).map_err(regime_err)?;
    let rows: Vec<Row> = spec
        .grid
        .par_iter()
        .map(|&x| figure_row(&spec, x, &params))
        .collect::<Result<_, _>>()?;
    let mut notes = spec.notes.clone();
    if spec.with_discrete && rows.iter().any(|r| r.gamma_d.is_none()) {
        notes.push("gamma_d omitted where the lattice exceeds 1e8 sites");
    }
    let comments = vec![
        ("figure".to_string(), spec.name.to_string()),
        (
            "density".to_string(),
            format!("{:e} nucleons/m^3", spec.density),
        ),
        ("r_c".to_string(), format!("{:e}", spec.rc)),
        ("lambda".to_string(), format!("{:e}", spec.lambda)),
        ("d".to_string(), fmt_opt(spec.d)),
        ("Delta".to_string(), fmt_opt(spec.delta)),
        ("L".to_string(), fmt_opt(spec.big_l)),
        ("l".to_string(), fmt_opt(spec.lattice_l)),
        (
            "sweep_value".to_string(),
            match spec.axis {
                SweepAxis::Length => "body length in m".to_string(),
                SweepAxis::Displacement => "displacement in m".to_string(),
            },
        ),
    ];
    write_rate_csv(out, &comments, &notes, &rows)
}

fn sweep_grid(min: f64, max: f64, points: usize, scale: GridScale) -> Result<Vec<f64>, CliError> {
    if !(min < max) || points < 2 {
        return Err(CliError::Schema(format!(
            "sweep grid needs min < max and points >= 2 (got {min}, {max}, {points})"
        )));
    }
    if scale == GridScale::Log && !(min > 0.0) {
        return Err(CliError::Schema("log grids need min > 0".into()));
    }
    Ok(match scale {
        GridScale::Linear => linear_grid(min, max, points),
        GridScale::Log => log_grid(min, max, points),
    })
}

fn with_length(geom: &Geometry, value: f64) -> Result<Geometry, CliError> {
    let shape = match geom.shape {
        Shape::Cuboid { lx, ly, .. } => Shape::Cuboid { lx, ly, lz: value },
        Shape::Cube { .. } => Shape::Cube { l: value },
        Shape::Sphere { .. } => Shape::Sphere { r: value },
        Shape::Cylinder { r, .. } => Shape::Cylinder { r, l: value },
    };
    Geometry::new(shape, geom.density_n).map_err(regime_err)
}

fn with_magnitude(disp: &Displacement, value: f64) -> Result<Displacement, CliError> {
    let mag = disp.magnitude();
    if mag == 0.0 {
        return Displacement::along_z(value).map_err(regime_err);
    }
    Displacement::new(
        disp.dx / mag * value,
        disp.dy / mag * value,
        disp.dz / mag * value,
    )
    .map_err(regime_err)
}

#[allow(clippy::too_many_arguments)]
pub fn emit_sweep(
    sc: &Scenario,
    variable: SweepVariable,
    min: f64,
    max: f64,
    points: usize,
    scale: GridScale,
    methods: &[MethodArg],
    out: &Path,
) -> Result<(), CliError> {
    let grid = sweep_grid(min, max, points, scale)?;
    if variable == SweepVariable::NLayers {
        return emit_layer_sweep(sc, &grid, out);
    }
    if methods.contains(&MethodArg::Continuous) && methods.contains(&MethodArg::SmallDelta) {
        return Err(CliError::Schema(
            "continuous and small-delta both target the gamma_c column; pick one".into(),
        ));
    }
    let rows: Vec<Row> = grid
        .par_iter()
        .map(|&x| -> Result<Row, CliError> {
            let (geom, disp, lat) = match variable {
                SweepVariable::L => {
                    let geom = with_length(&sc.geometry, x)?;
                    let lat = sc
                        .lattice
                        .as_ref()
                        .map(|l| lattice_from_cuboid(&geom, l.l, l.n_a).map_err(regime_err))
                        .transpose()?;
                    (geom, sc.displacement, lat)
                }
                SweepVariable::Delta => (
                    sc.geometry,
                    with_magnitude(&sc.displacement, x)?,
                    sc.lattice,
                ),
                SweepVariable::LatticeConstant => {
                    let spec = sc.lattice.as_ref().ok_or_else(|| {
                        CliError::Schema(
                            "sweeping l needs a \"lattice\" section in the scenario".into(),
                        )
                    })?;
                    let lat = lattice_from_cuboid(&sc.geometry, x, spec.n_a).map_err(regime_err)?;
                    (sc.geometry, sc.displacement, Some(lat))
                }
                SweepVariable::NLayers => unreachable!(),
            };
            let mut row = Row {
                sweep_value: x,
                ..Row::default()
            };
            for method in methods {
                match method {
                    MethodArg::Continuous => {
                        row.gamma_c = Some(
                            gamma_cuboid(&geom, &disp, &sc.params)
                                .map_err(regime_err)?
                                .gamma,
                        )
                    }
                    MethodArg::SmallDelta => {
                        row.gamma_c = Some(
                            gamma_small_delta(&geom, &disp, &sc.params)
                                .map_err(regime_err)?
                                .gamma,
                        )
                    }
                    MethodArg::Discrete => {
                        let lat = lat.as_ref().ok_or_else(|| {
                            CliError::Schema(
                                "method \"discrete\" needs a \"lattice\" section".into(),
                            )
                        })?;
                        if lat.n_sites() <= MAX_FIGURE_SITES {
                            row.gamma_d = Some(gamma_discrete(lat, &disp, &sc.params).gamma);
                        }
                    }
                    MethodArg::Gpr => {
                        row.gamma_gpr = Some(
                            gamma_gpr(&geom, &disp, &sc.params)
                                .map_err(regime_err)?
                                .gamma,
                        )
                    }
                    MethodArg::Adler => {
                        row.gamma_adler = Some(gamma_adler(&geom, &disp, &sc.params).gamma)
                    }
                }
            }
            Ok(row)
        })
        .collect::<Result<_, _>>()?;
    let comments = vec![
        ("sweep".to_string(), format!("{variable:?}")),
        ("r_c".to_string(), format!("{:e}", sc.params.r_c)),
        ("lambda".to_string(), format!("{:e}", sc.params.lambda)),
        (
            "density".to_string(),
            format!("{:e} nucleons/m^3", sc.geometry.density_n),
        ),
        ("sweep_value".to_string(), "swept variable in m".to_string()),
    ];
    let notes: Vec<&str> = if methods.contains(&MethodArg::SmallDelta) {
        vec!["gamma_c computed with the small-displacement closed form"]
    } else {
        Vec::new()
    };
    write_rate_csv(out, &comments, &notes, &rows)
}

/// N_layers sweep: alternating stacks built from the first two layers of
/// the scenario, reported as η columns.
fn emit_layer_sweep(sc: &Scenario, grid: &[f64], out: &Path) -> Result<(), CliError> {
    let stack = sc
        .stack
        .as_ref()
        .ok_or_else(|| CliError::Schema("sweeping N_layers needs a \"layers\" section".into()))?;
    if stack.layers.len() < 2 {
        return Err(CliError::Schema(
            "sweeping N_layers needs at least two template layers".into(),
        ));
    }
    let (odd, even) = (stack.layers[0], stack.layers[1]);
    let mut lines = Vec::new();
    for &x in grid {
        let n = x.round().max(1.0) as u32;
        let eta = eta_zz_alternating(
            n,
            odd.thickness,
            even.thickness,
            odd.density_n * sc.params.m_n,
            even.density_n * sc.params.m_n,
            stack.d,
            &sc.params,
        )
        .map_err(regime_err)?;
        let (eta0, eta1) = eta.orders.unwrap_or((f64::NAN, f64::NAN));
        let ratio = cslrate_core::diffusion::layering_ratio(n, odd.density_n, even.density_n)
            .map_err(regime_err)?;
        lines.push(format!(
            "{},{:e},{},{},{:e}\n",
            n,
            eta.total,
            if eta0.is_nan() {
                String::new()
            } else {
                format!("{eta0:e}")
            },
            if eta1.is_nan() {
                String::new()
            } else {
                format!("{eta1:e}")
            },
            ratio
        ));
    }
    let mut text = String::new();
    text.push_str(&format!("# sweep = NLayers\n# d = {:e}\n", stack.d));
    text.push_str(&format!(
        "# template layers: ({:e} m, {:e}) and ({:e} m, {:e}) nucleons/m^3\n",
        odd.thickness, odd.density_n, even.thickness, even.density_n
    ));
    text.push_str("n_pairs,eta_zz_total,eta0,eta1,ratio_leading_order\n");
    for line in lines {
        text.push_str(&line);
    }
    std::fs::write(out, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", out.display())))
}

#[allow(clippy::too_many_arguments)]
pub fn emit_em_error(
    regime: RegimeArg,
    rc: f64,
    lambda: f64,
    big_l: Option<f64>,
    delta: Option<f64>,
    l_min: Option<f64>,
    l_max: Option<f64>,
    points: usize,
    out: &Path,
) -> Result<(), CliError> {
    let params = PhysParams::new(lambda, rc).map_err(regime_err)?;
    let (core_regime, default_l, default_range) = match regime {
        RegimeArg::Large => (
            cslrate_core::euler_maclaurin::Regime::LargeBody,
            10.0 * rc,
            (0.01 * rc, 0.3 * rc),
        ),
        RegimeArg::Small => (
            cslrate_core::euler_maclaurin::Regime::SmallBody,
            0.1 * rc,
            (0.002 * rc, 0.02 * rc),
        ),
    };
    let big_l = big_l.unwrap_or(default_l);
    let delta = delta.unwrap_or(1e-3 * rc);
    let grid = sweep_grid(
        l_min.unwrap_or(default_range.0),
        l_max.unwrap_or(default_range.1),
        points,
        GridScale::Log,
    )?;
    let disp = Displacement::along_z(delta).map_err(regime_err)?;
    let mut text = String::new();
    text.push_str(&format!(
        "# regime = {regime:?}\n# r_c = {rc:e}\n# lambda = {lambda:e}\n# L = {big_l:e}\n# Delta = {delta:e}\n"
    ));
    text.push_str("l,n_per_axis,measured_rel_error,predicted_rel_error\n");
    for &l_target in &grid {
        // snap to an integer site count so the realized cube side is exact
        let n = (big_l / l_target).round().max(1.0);
        let l = big_l / n;
        let density = 1.0 / (l * l * l); // one nucleon per site
        let geom = Geometry::new(Shape::Cube { l: big_l }, density).map_err(regime_err)?;
        let lat = lattice_from_cuboid(&geom, l, 1.0).map_err(regime_err)?;
        let gd = gamma_discrete(&lat, &disp, &params).gamma;
        let gc = gamma_cuboid(&geom, &disp, &params)
            .map_err(regime_err)?
            .gamma;
        let measured = (gd - gc).abs() / gc;
        let predicted = cslrate_core::euler_maclaurin::relative_error_predict(core_regime, l, rc);
        text.push_str(&format!("{l:e},{n},{measured:e},{predicted:e}\n"));
    }
    std::fs::write(out, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", out.display())))
}
