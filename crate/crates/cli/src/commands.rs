//! One function per subcommand; each returns a [`Table`] (or SVG text).

use gonodyn_core::fixed_points::{FixedPointForm, NONZERO_TOL};
use gonodyn_core::io::LoadedOperator;
use gonodyn_core::limit::{pair_reproduction, Outcome};
use gonodyn_core::spectral::{boundary_margins, eigenvalues_numeric_dense, LAMBDA_TWO_IDENTITY_TOL};
use gonodyn_core::{
    all_fixed_points, char_coeffs, classify, classify_region, closed_form_fixed_points, eigenvalues_numeric,
    iterate, jacobian, predict_limit, predict_limit_general, simulate_until, solve_general_fixed_points,
    EmpiricalOutcome, General, GeneralState, IterCaps, LimitPrediction, NewtonOptions, Operator,
    PredictorConfig, SeedGrid, Spectrum, State, StateN, Termination,
};
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::CliError;
use crate::spec::{self, Grid, Vary, COORDS};
use crate::svg;
use crate::table::{Cell, Table};

/// Rendered command output.
pub enum Output {
    Table(Table),
    Svg(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn general_columns(g: &General) -> Vec<String> {
    let xs = (1..=g.eta()).map(|i| format!("x{i}"));
    let ys = (1..=g.nu()).map(|l| format!("y{l}"));
    xs.chain(ys).collect()
}

fn parse_general_state(g: &General, s: &str) -> Result<GeneralState, CliError> {
    let flat = spec::numbers(s, "--state")?;
    if flat.len() != g.eta() + g.nu() {
        return Err(usage(format!(
            "--state expects {} values (x1..x{}, y1..y{}), got {}",
            g.eta() + g.nu(),
            g.eta(),
            g.nu(),
            flat.len()
        )));
    }
    Ok(GeneralState::from_flat(&flat, g.eta()))
}

pub struct SimulateOpts<'a> {
    pub state: &'a str,
    pub steps: usize,
    pub svg: bool,
    pub log_y: bool,
}

/// Full-length orbit (no early stop); the footer records how it ended.
pub fn simulate(op: &LoadedOperator, o: &SimulateOpts) -> Result<Output, CliError> {
    let caps = IterCaps { stop_early: false, ..IterCaps::with_steps(o.steps) };
    let (columns, rows, termination): (Vec<String>, Vec<Vec<f64>>, Termination) = match op {
        LoadedOperator::Hemophilia(w) => {
            let t0 = spec::state4(o.state)?;
            let tr = iterate(w, &t0, &caps);
            let rows = tr.states.iter().map(|s| s.to_array().to_vec()).collect();
            (COORDS.iter().map(|c| c.to_string()).collect(), rows, tr.termination)
        }
        LoadedOperator::General(g) => {
            let t0 = parse_general_state(g, o.state)?;
            let tr = iterate(g, &t0, &caps);
            let rows = tr.states.iter().map(StateN::to_vec).collect();
            (general_columns(g), rows, tr.termination)
        }
    };
    if o.svg {
        let xs: Vec<f64> = (0..rows.len()).map(|n| n as f64).collect();
        let series: Vec<(&str, Vec<f64>)> = columns
            .iter()
            .enumerate()
            .map(|(k, name)| (name.as_str(), rows.iter().map(|r| r[k]).collect()))
            .collect();
        let title = format!("trajectory ({})", termination.as_str());
        return Ok(Output::Svg(svg::line_plot(&title, "n", &xs, &series, o.log_y)));
    }
    let mut t = Table::new(std::iter::once("n".to_string()).chain(columns));
    for (n, r) in rows.iter().enumerate() {
        t.push(std::iter::once(Cell::from(n)).chain(r.iter().map(|&v| Cell::from(v))).collect());
    }
    t.note("termination", termination.as_str());
    t.note("steps", rows.len() - 1);
    Ok(Output::Table(t))
}

fn spectrum_cells(spec: Option<&Spectrum<f64>>) -> Vec<Cell> {
    match spec {
        Some(s) => s.values.iter().flat_map(|z| [Cell::from(z.re), Cell::from(z.im)]).collect(),
        None => vec![Cell::Empty; 8],
    }
}

fn spectrum_columns() -> Vec<String> {
    (1..=4).flat_map(|k| [format!("lambda{k}_re"), format!("lambda{k}_im")]).collect()
}

/// Structural check on a reported nonzero fixed point: the spectrum must
/// contain 0 and 2 and the closed-form factorization must hold.
fn check_fixed_point(w: &Operator, s: &State, spec: &Spectrum<f64>) -> Result<(), CliError> {
    if s.norm() <= NONZERO_TOL {
        return Ok(());
    }
    let tol = LAMBDA_TWO_IDENTITY_TOL;
    let defect = char_coeffs(w, s)?.lambda_two_defect();
    if !(spec.contains(0.0, tol) && spec.contains(2.0, tol)) || !(defect.abs() <= tol) {
        return Err(CliError::Invariant(format!(
            "fixed point {s}: spectrum {:?}, 8-4p1+2p2+p3 = {defect:e}",
            spec.values
        )));
    }
    Ok(())
}

/// Seed grid: `lo:hi:n` per axis, plus the built-in extra seeds.
pub fn seed_grid(seeds: Option<&str>, search: bool) -> Result<SeedGrid<f64>, CliError> {
    if !search {
        return Ok(SeedGrid::empty());
    }
    let mut grid = SeedGrid::default();
    if let Some(s) = seeds {
        let r = spec::Range::parse(s, "--seeds")?;
        if r.count.saturating_pow(4) > spec::MAX_POINTS {
            return Err(usage("--seeds: too many seeds"));
        }
        grid.lo = [r.lo; 4];
        grid.hi = [r.hi; 4];
        grid.per_axis = r.count;
    }
    Ok(grid)
}

pub fn fixed_points(op: &LoadedOperator, seeds: &SeedGrid<f64>) -> Result<Output, CliError> {
    let w = match op {
        LoadedOperator::Hemophilia(w) => w,
        LoadedOperator::General(g) => return general_fixed_points(g, seeds),
    };
    let found = all_fixed_points(w, seeds, &NewtonOptions::default())?;
    let mut t = Table::new(
        ["form", "x", "y", "u", "v", "residual"]
            .into_iter()
            .map(String::from)
            .chain(spectrum_columns())
            .chain(["class", "unstable_dim"].map(String::from)),
    );
    for fp in &found {
        let spec = fp.spectrum.as_ref().expect("analyzed");
        check_fixed_point(w, &fp.state, spec)?;
        let class = fp.stability.as_ref().expect("analyzed");
        let mut row = vec![Cell::from(fp.form.as_str())];
        row.extend(fp.state.to_array().map(Cell::from));
        row.push(Cell::from(fp.residual));
        row.extend(spectrum_cells(Some(spec)));
        row.push(Cell::from(class.tag.as_str()));
        row.push(Cell::from(class.unstable_dim));
        t.push(row);
    }
    t.note("seeds", seeds.len());
    Ok(Output::Table(t))
}

fn general_fixed_points(g: &General, seeds: &SeedGrid<f64>) -> Result<Output, CliError> {
    let n = g.eta() + g.nu();
    let per_axis = if seeds.is_empty() { 0 } else { seeds.per_axis.min(((4096f64).powf(1.0 / n as f64)) as usize).max(2) };
    let (lo, hi) = (seeds.lo[0], seeds.hi[0]);
    let total = per_axis.pow(n as u32);
    let seed_states: Vec<GeneralState> = (0..total)
        .map(|mut idx| {
            let flat: Vec<f64> = (0..n)
                .map(|_| {
                    let k = idx % per_axis;
                    idx /= per_axis;
                    lo + (hi - lo) * k as f64 / (per_axis - 1) as f64
                })
                .collect();
            GeneralState::from_flat(&flat, g.eta())
        })
        .collect();
    let mut roots = vec![GeneralState::zeros(g.eta(), g.nu())];
    roots.extend(
        solve_general_fixed_points(g, &seed_states, &NewtonOptions::default())
            .into_iter()
            .filter(|r| r.norm() > NONZERO_TOL),
    );
    let mut t = Table::new(
        general_columns(g)
            .into_iter()
            .chain(["residual", "has_eigenvalue_0", "has_eigenvalue_2"].map(String::from)),
    );
    for r in &roots {
        let spec = eigenvalues_numeric_dense(&g.jacobian(r)?);
        let near = |l: f64| spec.iter().any(|z| (z - Complex::new(l, 0.0)).norm() <= 1e-6);
        let mut row: Vec<Cell> = r.to_vec().into_iter().map(Cell::from).collect();
        row.push(Cell::from(g.residual(r)?));
        row.push(Cell::from(near(0.0)));
        row.push(Cell::from(near(2.0)));
        t.push(row);
    }
    t.note("seeds", total);
    Ok(Output::Table(t))
}

pub fn classify_cmd(op: &LoadedOperator, state: Option<&str>, seeds: &SeedGrid<f64>) -> Result<Output, CliError> {
    let w = crate::config::require_hemophilia(op, "classify")?;
    let states: Vec<State> = match state {
        Some(s) => vec![spec::state4(s)?],
        None => all_fixed_points(w, seeds, &NewtonOptions::default())?
            .into_iter()
            .map(|f| f.state)
            .collect(),
    };
    let mut t = Table::new(
        ["x", "y", "u", "v", "form"]
            .into_iter()
            .map(String::from)
            .chain(spectrum_columns())
            .chain(["class", "unstable_dim", "p1", "p2", "p3"].map(String::from)),
    );
    for s in &states {
        let coeffs = char_coeffs(w, s)?;
        let class = classify(w, s)?;
        let spec = eigenvalues_numeric(&jacobian(w, s));
        check_fixed_point(w, s, &spec)?;
        let mut row: Vec<Cell> = s.to_array().map(Cell::from).to_vec();
        row.push(Cell::from(FixedPointForm::of(s).map_or("-", |f| f.as_str())));
        row.extend(spectrum_cells(Some(&spec)));
        row.push(Cell::from(class.tag.as_str()));
        row.push(Cell::from(class.unstable_dim));
        row.extend([coeffs.p1, coeffs.p2, coeffs.p3].map(Cell::from));
        t.push(row);
    }
    Ok(Output::Table(t))
}

fn limit_cells(outcome: &Outcome<f64>) -> Vec<Cell> {
    match outcome {
        Outcome::ConvergesToPoint(s) => s.to_array().map(Cell::from).to_vec(),
        Outcome::ConvergesToOrigin => vec![Cell::from(0.0); 4],
        _ => vec![Cell::Empty; 4],
    }
}

pub fn predict(op: &LoadedOperator, state: &str, steps: usize) -> Result<Output, CliError> {
    match op {
        LoadedOperator::Hemophilia(w) => {
            let t0 = spec::state4(state)?;
            let pred = predict_limit(w, &t0, &PredictorConfig::default())?;
            let region = classify_region(&t0, Some(w), gonodyn_core::limit::BOUNDARY_TOL);
            let emp = simulate_until(w, &t0, &IterCaps::with_steps(steps));
            let mut t = Table::new([
                "x", "y", "u", "v", "region", "outcome", "limit_x", "limit_y", "limit_u", "limit_v",
                "justification", "theorem_backed", "simulated", "simulated_steps",
            ]);
            let mut row: Vec<Cell> = t0.to_array().map(Cell::from).to_vec();
            row.push(Cell::from(region.to_string()));
            row.push(Cell::from(pred.outcome.as_str()));
            row.extend(limit_cells(&pred.outcome));
            row.push(Cell::from(pred.justification.to_string()));
            row.push(Cell::from(pred.justification.theorem_backed()));
            row.push(Cell::from(emp.as_str()));
            row.push(Cell::from(emp.steps()));
            t.push(row);
            Ok(Output::Table(t))
        }
        LoadedOperator::General(g) => {
            let t0 = parse_general_state(g, state)?;
            let pred = predict_limit_general(g, &t0)?;
            let tr = iterate(g, &t0, &IterCaps::with_steps(steps));
            let mut t = Table::new(
                general_columns(g).into_iter().chain(
                    ["mass", "pair_product", "outcome", "justification", "simulated", "simulated_steps"]
                        .map(String::from),
                ),
            );
            let mut row: Vec<Cell> = t0.to_vec().into_iter().map(Cell::from).collect();
            row.push(Cell::from(t0.sum()));
            row.push(Cell::from(pair_reproduction(g, &t0)));
            row.push(Cell::from(pred.outcome.as_str()));
            row.push(Cell::from(pred.justification.to_string()));
            row.push(Cell::from(tr.termination.as_str()));
            row.push(Cell::from(tr.steps()));
            t.push(row);
            Ok(Output::Table(t))
        }
    }
}

const OUTCOMES: [(&str, &str); 4] = [
    ("Origin", "#3b6fb6"),
    ("Point", "#f2c12e"),
    ("Blowup", "#c8372d"),
    ("Undecided", "#9a9a9a"),
];

struct BasinRecord {
    i: usize,
    j: usize,
    state: State,
    outcome: EmpiricalOutcome<f64>,
    prediction: LimitPrediction<f64>,
}

/// Every grid point is simulated; the predictor's verdict and justification
/// are reported next to the simulated outcome.
pub fn basin(op: &LoadedOperator, grid: &Grid, steps: usize, svg_out: bool) -> Result<Output, CliError> {
    let w = crate::config::require_hemophilia(op, "basin")?;
    let caps = IterCaps::with_steps(steps);
    let cfg = PredictorConfig::default();
    let records: Vec<BasinRecord> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j, state) = grid.point(idx);
            let prediction = predict_limit(w, &state, &cfg).expect("grid points are finite");
            let outcome = simulate_until(w, &state, &caps);
            BasinRecord { i, j, state, outcome, prediction }
        })
        .collect();
    log::info!("basin: evaluated {} points", records.len());
    let category = |o: &EmpiricalOutcome<f64>| OUTCOMES.iter().position(|(n, _)| *n == o.as_str()).unwrap();
    if svg_out {
        let cells: Vec<usize> = records.iter().map(|r| category(&r.outcome)).collect();
        let names = grid.axis_names();
        return Ok(Output::Svg(
            svg::HeatMap {
                title: "simulated outcome",
                axis_names: names,
                x_range: (grid.ranges[0].lo, grid.ranges[0].hi),
                y_range: (grid.ranges[1].lo, grid.ranges[1].hi),
                nx: grid.ranges[0].count,
                ny: grid.ranges[1].count,
                categories: &OUTCOMES,
                cells: &cells,
            }
            .render(),
        ));
    }
    let mut t = Table::new([
        "index", "i", "j", "x", "y", "u", "v", "outcome", "steps", "predicted", "justification",
    ]);
    let mut counts = [0usize; 4];
    for (idx, r) in records.iter().enumerate() {
        counts[category(&r.outcome)] += 1;
        let mut row = vec![Cell::from(idx), Cell::from(r.i), Cell::from(r.j)];
        row.extend(r.state.to_array().map(Cell::from));
        row.push(Cell::from(r.outcome.as_str()));
        row.push(Cell::from(r.outcome.steps()));
        row.push(Cell::from(r.prediction.outcome.as_str()));
        row.push(if r.prediction.is_unknown() { Cell::Empty } else { Cell::from(r.prediction.justification.to_string()) });
        t.push(row);
    }
    for ((name, _), n) in OUTCOMES.iter().zip(counts) {
        t.note(name, n);
    }
    Ok(Output::Table(t))
}

fn form_cells(w: &Operator, found: &[gonodyn_core::FixedPoint<f64>], form: FixedPointForm) -> Result<Vec<Cell>, CliError> {
    let (m1, m2) = boundary_margins(w, form).expect("boundary form");
    let Some(fp) = found.iter().find(|f| f.form == form) else {
        let mut row = vec![Cell::from(false)];
        row.extend(vec![Cell::Empty; 5]);
        row.extend([Cell::from(m1), Cell::from(m2)]);
        return Ok(row);
    };
    let class = classify(w, &fp.state)?;
    let spec = eigenvalues_numeric(&jacobian(w, &fp.state));
    check_fixed_point(w, &fp.state, &spec)?;
    let c = char_coeffs(w, &fp.state)?;
    Ok(vec![
        Cell::from(true),
        Cell::from(class.tag.as_str()),
        Cell::from(class.unstable_dim),
        Cell::from(c.p1),
        Cell::from(c.p2),
        Cell::from(c.p3),
        Cell::from(m1),
        Cell::from(m2),
    ])
}

const FORM_COLUMNS: [&str; 8] = ["exists", "class", "unstable_dim", "p1", "p2", "p3", "margin1", "margin2"];

/// Grid over one or two coefficients; each row rebalances the affected
/// normalization groups proportionally and reports the boundary fixed points.
pub fn sweep(op: &LoadedOperator, vary: &[Vary]) -> Result<Output, CliError> {
    let w = crate::config::require_hemophilia(op, "sweep")?;
    if vary.is_empty() || vary.len() > 2 {
        return Err(usage("--vary must be given once or twice"));
    }
    if vary.len() == 2 && vary[0].name == vary[1].name {
        return Err(usage("--vary: the two coefficients must differ"));
    }
    let counts: Vec<usize> = vary.iter().map(|v| v.range.count).collect();
    let total = counts.iter().try_fold(1usize, |a, &c| a.checked_mul(c)).unwrap_or(usize::MAX);
    if total > spec::MAX_POINTS {
        return Err(usage(format!("--vary: {total} rows exceed the limit of {}", spec::MAX_POINTS)));
    }
    let base = *w.params();
    let forms = [FixedPointForm::II, FixedPointForm::III, FixedPointForm::IV];
    let rows: Vec<Result<Vec<Cell>, CliError>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let values: Vec<(&str, f64)> = vary
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let i = if k == 0 { idx % counts[0] } else { idx / counts[0] };
                    (v.name, v.range.value(i))
                })
                .collect();
            let mut row: Vec<Cell> = values.iter().map(|&(_, v)| Cell::from(v)).collect();
            let op = spec::rebalance(&base, &values).and_then(|p| Operator::new(p).map_err(|e| e.to_string()));
            match op {
                Err(reason) => {
                    row.push(Cell::from(false));
                    row.push(Cell::from(reason));
                    row.extend(vec![Cell::Empty; 11 + forms.len() * FORM_COLUMNS.len()]);
                }
                Ok(w) => {
                    row.push(Cell::from(true));
                    row.push(Cell::Empty);
                    row.extend(w.params().to_array().map(Cell::from));
                    let found = closed_form_fixed_points(&w);
                    for form in forms {
                        row.extend(form_cells(&w, &found, form)?);
                    }
                }
            }
            Ok(row)
        })
        .collect();
    let mut columns: Vec<String> = vary.iter().map(|v| v.name.to_string()).collect();
    columns.extend(["valid", "reason"].map(String::from));
    columns.extend(gonodyn_core::params::COEFFICIENT_NAMES.iter().map(|c| format!("p_{c}")));
    for form in forms {
        let tag = form.as_str().to_lowercase();
        columns.extend(FORM_COLUMNS.iter().map(|c| format!("{tag}_{c}")));
    }
    let mut t = Table::new(columns);
    for row in rows {
        t.push(row?);
    }
    t.note("rebalancing", "other coefficients of each varied group scaled proportionally");
    Ok(Output::Table(t))
}
