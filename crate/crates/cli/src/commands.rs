//! Subcommand implementations. Each returns the rendered output so tests can
//! call them directly.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use ringstir::dynamics::{adiabaticity_classify, continuity_defect, InitialState, StepControl, SweepProtocol};
use ringstir::spectral::{eigenvalues_trig, ground_state};
use ringstir::transport::{
    conductance_exact, conductance_numeric, integrated_current, q_infinity, two_site_g, FiniteDifference,
};
use ringstir::twolevel::{
    classify_regime, dark_state_params, metamorphosis_point, metamorphosis_separation, regime_params,
    shifted_params, simple_params, Regime,
};
use ringstir::{propagate, Error, RingParams, TestFlux};
use serde_json::{json, Value};

use crate::config::{linspace, ConfigError, Format, Initial, RunConfig};
use crate::output::{emit, Cell, Table};
use crate::svg::{category_map, line_plot, Series};

/// Process exit codes.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_INTEGRATION: i32 = 4;
pub const EXIT_IO: i32 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: e.0,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonFinite(_) | Error::InvalidProtocol(_) => EXIT_CONFIG,
            Error::StepUnderflow { .. } | Error::NormDrift { .. } => EXIT_INTEGRATION,
            _ => EXIT_DEGENERATE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn params_json(p: &RingParams) -> Value {
    json!({ "c0": p.c0, "c1": p.c1, "c2": p.c2 })
}

fn base_meta(cfg: &RunConfig, command: &str) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "params": params_json(&cfg.params()),
        "thresholds": { "rho": cfg.rho, "sharpness": cfg.sharpness, "kappa": cfg.kappa },
        "grid": { "u_min": cfg.u_min, "u_max": cfg.u_max, "n": cfg.n },
    })
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn spectrum_table(params: &RingParams, grid: &[f64]) -> Table {
    let mut t = Table::new(&["u", "E_g", "E_d", "E_e"]);
    let rows: Vec<[f64; 4]> = grid
        .par_iter()
        .map(|&u| {
            let s = eigenvalues_trig(params, u, TestFlux::none());
            [u, s.ground(), s.middle(), s.excited()]
        })
        .collect();
    for r in rows {
        t.push_numbers(&r);
    }
    t
}

pub fn spectrum(cfg: &RunConfig) -> CliResult<String> {
    let params = cfg.params();
    params.validate()?;
    let table = spectrum_table(&params, &cfg.u_grid());
    Ok(table.render(&base_meta(cfg, "spectrum"), cfg.format))
}

/// Metadata describing the regime and reductions of `params`.
pub fn regime_meta(cfg: &RunConfig, params: &RingParams) -> Value {
    let class = classify_regime(params, cfg.thresholds());
    let two_level = regime_params(params, cfg.thresholds()).ok().map(|p| {
        json!({
            "scheme": format!("{:?}", p.scheme),
            "lambda": p.lambda,
            "c_eff": p.c_eff,
            "u_c": p.u_c,
            "alpha": p.alpha,
        })
    });
    let meta = metamorphosis_point(params, cfg.sharpness).ok();
    let sep = metamorphosis_separation(params).ok();
    json!({
        "regime": class.regime.label(),
        "c_plus_ratio": finite_or_null(class.c_plus_ratio),
        "c_minus_ratio": finite_or_null(class.c_minus_ratio),
        "lambda": q_infinity(params).ok(),
        "two_level": two_level,
        "u_c": two_level_u_c(params, cfg),
        "u_m": meta.map(|m| m.u_m),
        "metamorphosis_sharp": meta.map(|m| m.sharp),
        "separation": sep.map(|s| json!({
            "from_dark_crossing": s.from_dark_crossing,
            "from_odd_crossing": s.from_odd_crossing,
        })),
    })
}

fn two_level_u_c(params: &RingParams, cfg: &RunConfig) -> Option<f64> {
    regime_params(params, cfg.thresholds()).ok().map(|p| p.u_c)
}

pub struct SweepOutput {
    pub text: String,
    pub meta: Value,
}

pub fn sweep(cfg: &RunConfig) -> CliResult<SweepOutput> {
    let params = cfg.params();
    params.validate()?;
    let lambda = q_infinity(&params)?;
    let grid = cfg.u_grid();
    let fd = FiniteDifference::default();
    let rows: Vec<CliResult<[f64; 7]>> = grid
        .par_iter()
        .map(|&u| {
            let g = conductance_exact(&params, u)?;
            let g_num = conductance_numeric(&params, u, ringstir::Bond::Bond01, fd).unwrap_or(f64::NAN);
            let q = integrated_current(&params, u)?;
            let occ = ground_state(&params, u, TestFlux::none())?.occupations();
            Ok([u, g, g_num, q, occ[0], occ[1], occ[2]])
        })
        .collect();
    let mut table = Table::new(&["u", "G_exact", "G_numeric", "Q", "p0", "p1", "p2"]);
    let mut peak = 0.0_f64;
    let mut max_abs_gap = 0.0_f64;
    for r in rows {
        let r = r?;
        peak = peak.max(r[1].abs());
        if r[2].is_finite() {
            max_abs_gap = max_abs_gap.max((r[1] - r[2]).abs());
        }
        table.push_numbers(&r);
    }
    let mut max_rel_gap = 0.0_f64;
    for row in &table.rows {
        if let (Cell::Num(g), Cell::Num(n)) = (&row[1], &row[2]) {
            if n.is_finite() && g.abs() >= 1e-3 * peak {
                max_rel_gap = max_rel_gap.max((g - n).abs() / g.abs());
            }
        }
    }
    let mut meta = base_meta(cfg, "sweep");
    meta["analysis"] = regime_meta(cfg, &params);
    meta["analysis"]["lambda"] = json!(lambda);
    meta["numeric_check"] = json!({
        "max_abs_gap": max_abs_gap,
        "max_rel_gap": max_rel_gap,
        "max_rel_gap_floor": "points with |G_exact| >= 1e-3 of the peak",
    });
    Ok(SweepOutput {
        text: table.render(&meta, cfg.format),
        meta,
    })
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn protocol(cfg: &RunConfig) -> SweepProtocol {
    let initial = match cfg.initial {
        Initial::Ground => InitialState::GroundState,
        Initial::Dot => InitialState::Dot,
    };
    SweepProtocol::new(cfg.u_dot, cfg.u_min, cfg.u_max).with_initial(initial)
}

fn dynamics_table(params: &RingParams, cfg: &RunConfig) -> CliResult<(Table, Value)> {
    let proto = protocol(cfg);
    let control = StepControl::default()
        .with_tol(cfg.tol)
        .with_sample_interval(proto.duration() / (cfg.n - 1) as f64);
    let trace = propagate(params, &proto, &control)?;
    let mut table = Table::new(&["t", "u", "I_over_udot", "Q_dyn", "p0", "p1", "p2"]);
    for s in &trace.samples {
        table.push_numbers(&[
            s.t,
            s.u,
            s.current / cfg.u_dot,
            s.q_dyn,
            s.occupations[0],
            s.occupations[1],
            s.occupations[2],
        ]);
    }
    let adiabatic_q = match (integrated_current(params, cfg.u_max), integrated_current(params, cfg.u_min)) {
        (Ok(a), Ok(b)) => Some(a - b),
        _ => None,
    };
    let summary = json!({
        "u_dot": cfg.u_dot,
        "tol": cfg.tol,
        "initial": cfg.initial,
        "adiabaticity": format!("{:?}", adiabaticity_classify(params, cfg.u_dot, cfg.kappa)),
        "q_dyn": trace.q_dyn(),
        "q_adiabatic": adiabatic_q,
        "steps": trace.steps,
        "rejected": trace.rejected,
        "max_norm_drift": trace.max_norm_drift,
        "continuity_defect": continuity_defect(&trace),
    });
    Ok((table, summary))
}

pub fn dynamics(cfg: &RunConfig) -> CliResult<String> {
    let params = cfg.params();
    params.validate()?;
    let (table, summary) = dynamics_table(&params, cfg)?;
    let mut meta = base_meta(cfg, "dynamics");
    meta["run"] = summary;
    Ok(table.render(&meta, cfg.format))
}

pub const DEGENERATE_LABEL: &str = "Degenerate";

fn regime_label(params: &RingParams, cfg: &RunConfig) -> &'static str {
    if params.c0 != 0.0 && params.c1 == params.c2 {
        return DEGENERATE_LABEL;
    }
    classify_regime(params, cfg.thresholds()).regime.label()
}

pub struct RegimesOutput {
    pub text: String,
    pub svg: String,
}

pub fn regimes(cfg: &RunConfig) -> CliResult<RegimesOutput> {
    if !cfg.c0.is_finite() {
        return Err(Error::NonFinite("c0").into());
    }
    let axis = linspace(cfg.c_min, cfg.c_max, cfg.n);
    let mut table = Table::new(&["c1", "c2", "regime_label", "lambda", "u_m"]);
    let (mut xs, mut ys, mut labels) = (Vec::new(), Vec::new(), Vec::new());
    for &c1 in &axis {
        for &c2 in &axis {
            let p = RingParams::new(cfg.c0, c1, c2);
            let label = regime_label(&p, cfg);
            let lambda = q_infinity(&p).unwrap_or(f64::NAN);
            let u_m = metamorphosis_point(&p, cfg.sharpness).map(|m| m.u_m).unwrap_or(f64::NAN);
            table.push(vec![Cell::Num(c1), Cell::Num(c2), Cell::from(label), Cell::Num(lambda), Cell::Num(u_m)]);
            xs.push(c1);
            ys.push(c2);
            labels.push(label);
        }
    }
    let mut meta = base_meta(cfg, "regimes");
    meta["grid"] = json!({ "c_min": cfg.c_min, "c_max": cfg.c_max, "n": cfg.n });
    let legend = [
        Regime::SimpleTwoLevel.label(),
        Regime::ShiftedTwoLevel.label(),
        Regime::MetamorphosisSharp.label(),
        Regime::MetamorphosisGradual.label(),
        Regime::DarkStateExact.label(),
        DEGENERATE_LABEL,
    ];
    let svg = category_map(&format!("regimes at c0 = {}", cfg.c0), cfg.n, &xs, &ys, &labels, &legend);
    Ok(RegimesOutput {
        text: table.render(&meta, cfg.format),
        svg,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    Fig2,
    Fig4,
    Fig5,
}

/// One file of a figure bundle.
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn figure_meta(figure: &str, params: &RingParams, extra: Value) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": "figures",
        "figure": figure,
        "params": params_json(params),
        "details": extra,
    })
}

fn adiabatic_curves(params: &RingParams, grid: &[f64]) -> CliResult<Vec<[f64; 3]>> {
    grid.par_iter()
        .map(|&u| Ok([u, integrated_current(params, u)?, conductance_exact(params, u)?]))
        .collect()
}

fn fig2(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    let couplings = [(0.2, 0.15), (5.0, 4.3), (19.0, 17.0), (19.0, -17.0)];
    let grid = linspace(-20.0, 1000.0, 2041);
    let mut out = Vec::new();
    let mut curves = Vec::new();
    for (c1, c2) in couplings {
        let p = RingParams::new(1.0, c1, c2);
        let rows = adiabatic_curves(&p, &grid)?;
        let mut t = Table::new(&["u", "Q", "G_exact"]);
        for r in &rows {
            t.push_numbers(r);
        }
        let meta = figure_meta("fig2", &p, json!({ "q_infinity": q_infinity(&p).ok() }));
        out.push(Artifact {
            name: format!("fig2_c1_{c1}_c2_{c2}.{}", extension(cfg.format)),
            contents: t.render(&meta, cfg.format),
        });
        curves.push((format!("(c1, c2) = ({c1}, {c2})"), rows.iter().map(|r| r[1]).collect::<Vec<_>>()));
    }
    let series: Vec<Series<'_>> = curves
        .iter()
        .map(|(name, y)| Series { name, x: &grid, y })
        .collect();
    out.push(Artifact {
        name: "fig2.svg".into(),
        contents: line_plot("integrated current, c0 = 1", "u", "Q(u)", &series),
    });
    Ok(out)
}

fn fig4(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    let sets = [
        ("set1", RingParams::new(1.0, 0.2, 0.15), simple_params(&RingParams::new(1.0, 0.2, 0.15))?, (-1.5, -0.5)),
        ("set2", RingParams::new(1.0, 5.0, 4.3), shifted_params(&RingParams::new(1.0, 5.0, 4.3))?, (-10.0, 50.0)),
    ];
    let mut out = Vec::new();
    for (name, p, two, (lo, hi)) in sets {
        let grid = linspace(lo, hi, 1201);
        let rows: Vec<CliResult<[f64; 6]>> = grid
            .par_iter()
            .map(|&u| {
                let s = eigenvalues_trig(&p, u, TestFlux::none());
                Ok([u, s.ground(), s.middle(), s.excited(), conductance_exact(&p, u)?, two.conductance(u)?])
            })
            .collect();
        let mut t = Table::new(&["u", "E_g", "E_d", "E_e", "G_exact", "G_two_level"]);
        for r in rows {
            t.push_numbers(&r?);
        }
        let meta = figure_meta(
            "fig4",
            &p,
            json!({ "scheme": format!("{:?}", two.scheme), "lambda": two.lambda, "c_eff": two.c_eff, "u_c": two.u_c, "alpha": two.alpha }),
        );
        let exact = t.column("G_exact").expect("column exists");
        let approx = t.column("G_two_level").expect("column exists");
        out.push(Artifact {
            name: format!("fig4_{name}.{}", extension(cfg.format)),
            contents: t.render(&meta, cfg.format),
        });
        out.push(Artifact {
            name: format!("fig4_{name}.svg"),
            contents: line_plot(
                &format!("conductance, (c1, c2) = ({}, {})", p.c1, p.c2),
                "u",
                "G(u)",
                &[
                    Series { name: "exact", x: &grid, y: &exact },
                    Series { name: "two-level", x: &grid, y: &approx },
                ],
            ),
        });
    }
    Ok(out)
}

fn fig5(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    let p = RingParams::new(1.0, 19.0, 15.0);
    let dark = dark_state_params(&RingParams::new(0.0, p.c1, p.c2))?;
    let grid = linspace(-50.0, 600.0, 1301);
    let rows: Vec<CliResult<[f64; 9]>> = grid
        .par_iter()
        .map(|&u| {
            let s = eigenvalues_trig(&p, u, TestFlux::none());
            let occ = ground_state(&p, u, TestFlux::none())?.occupations();
            Ok([
                u,
                s.ground(),
                s.middle(),
                s.excited(),
                conductance_exact(&p, u)?,
                two_site_g(&dark.two_site(), u)?,
                occ[0],
                occ[1],
                occ[2],
            ])
        })
        .collect();
    let mut t = Table::new(&["u", "E_g", "E_d", "E_e", "G_exact", "G_c0_zero", "p0", "p1", "p2"]);
    for r in rows {
        t.push_numbers(&r?);
    }
    let sep = metamorphosis_separation(&p)?;
    let meta = figure_meta(
        "fig5",
        &p,
        json!({
            "u_m": metamorphosis_point(&p, cfg.sharpness)?.u_m,
            "separation": { "from_dark_crossing": sep.from_dark_crossing, "from_odd_crossing": sep.from_odd_crossing },
        }),
    );
    let mut out = vec![Artifact {
        name: format!("fig5_adiabatic.{}", extension(cfg.format)),
        contents: t.render(&meta, cfg.format),
    }];
    let mut dyn_curves = Vec::new();
    for u_dot in [2.0, 50.0] {
        let run = RunConfig {
            c0: p.c0,
            c1: p.c1,
            c2: p.c2,
            u_min: -200.0,
            u_max: 600.0,
            n: 2001,
            u_dot,
            ..cfg.clone()
        };
        let (table, summary) = dynamics_table(&p, &run)?;
        let meta = figure_meta("fig5", &p, summary);
        dyn_curves.push((
            format!("I/u_dot, u_dot = {u_dot}"),
            table.column("u").expect("column exists"),
            table.column("I_over_udot").expect("column exists"),
        ));
        out.push(Artifact {
            name: format!("fig5_dynamics_udot_{u_dot}.{}", extension(cfg.format)),
            contents: table.render(&meta, cfg.format),
        });
    }
    let g_exact = t.column("G_exact").expect("column exists");
    let g_dark = t.column("G_c0_zero").expect("column exists");
    let mut series = vec![
        Series { name: "adiabatic", x: &grid, y: &g_exact },
        Series { name: "c0 = 0", x: &grid, y: &g_dark },
    ];
    for (name, x, y) in &dyn_curves {
        series.push(Series { name, x, y });
    }
    out.push(Artifact {
        name: "fig5_conductance.svg".into(),
        contents: line_plot("conductance, (c1, c2) = (19, 15)", "u", "G(u), I/u_dot", &series),
    });
    let occ: Vec<Vec<f64>> = ["p0", "p1", "p2"].iter().map(|c| t.column(c).expect("column exists")).collect();
    out.push(Artifact {
        name: "fig5_occupations.svg".into(),
        contents: line_plot(
            "adiabatic occupations, (c1, c2) = (19, 15)",
            "u",
            "p",
            &[
                Series { name: "dot", x: &grid, y: &occ[0] },
                Series { name: "site 1", x: &grid, y: &occ[1] },
                Series { name: "site 2", x: &grid, y: &occ[2] },
            ],
        ),
    });
    Ok(out)
}

pub fn figures(which: Figure, cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    match which {
        Figure::Fig2 => fig2(cfg),
        Figure::Fig4 => fig4(cfg),
        Figure::Fig5 => fig5(cfg),
    }
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    for a in artifacts {
        emit(&a.contents, Some(&dir.join(&a.name)))?;
    }
    Ok(())
}
