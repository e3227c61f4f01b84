use std::path::{Path, PathBuf};

use spinwave::entanglement::{entropy_vs_l, two_site_params};
use spinwave::groundstate::{center_site, density_from_moments, solve, Moments};
use spinwave::model::{CouplingParams, LatticeSpec, PairConvention};
use spinwave::oracle::{
    dense_vs_fft, exact_two_site, gap_error_trend, harmonic_two_site_prediction, infinite_vs_fft,
    random_route_comparisons, SpinSystemSpec,
};
use spinwave::scan::{
    area_law_fit, default_derivative_grid, derivative_scan, finite_size_peak, linspace, near_critical_g,
    DerivativeRow,
};
use spinwave::spectrum::{critical_g2, critical_g_equal, energy_gap, gap_scaling_exponent};

use crate::config::{BoundaryChoice, EngineChoice, RunConfig};
use crate::output::{Cell, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    PhaseDiagram,
    GapScan,
    Covariance,
    EntropyScan,
    TwoSite,
    DerivativeScan,
    FiniteSize,
    OracleCheck,
    ReproduceFig2,
    ReproduceFig3,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::PhaseDiagram => "phase-diagram",
            Command::GapScan => "gap-scan",
            Command::Covariance => "covariance",
            Command::EntropyScan => "entropy-scan",
            Command::TwoSite => "two-site",
            Command::DerivativeScan => "derivative-scan",
            Command::FiniteSize => "finite-size",
            Command::OracleCheck => "oracle-check",
            Command::ReproduceFig2 => "reproduce-fig2",
            Command::ReproduceFig3 => "reproduce-fig3",
        }
    }
}

/// Rendered output: `path = None` goes to the configured destination.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub path: Option<PathBuf>,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub artifacts: Vec<Artifact>,
    /// Failed checks (oracle-check only).
    pub failures: usize,
}

impl Report {
    fn single(table: &Table, config: &RunConfig) -> Self {
        Self {
            artifacts: vec![Artifact {
                path: None,
                content: table.render(config),
            }],
            failures: 0,
        }
    }
}

pub fn dispatch(command: Command, config: &RunConfig) -> Result<Report, CliError> {
    match command {
        Command::PhaseDiagram => Ok(Report::single(&phase_diagram(config)?, config)),
        Command::GapScan => Ok(Report::single(&gap_scan(config)?, config)),
        Command::Covariance => Ok(Report::single(&covariance(config)?, config)),
        Command::EntropyScan => Ok(Report::single(&entropy_scan(config)?, config)),
        Command::TwoSite => Ok(Report::single(&two_site(config)?, config)),
        Command::DerivativeScan => Ok(Report::single(&derivative(config)?, config)),
        Command::FiniteSize => Ok(Report::single(&finite_size(config)?, config)),
        Command::OracleCheck => oracle_check(config),
        Command::ReproduceFig2 => reproduce_fig2(config),
        Command::ReproduceFig3 => reproduce_fig3(config),
    }
}

fn error_cell(e: &spinwave::Error) -> Cell {
    Cell::Text(e.to_string())
}

fn phase_diagram(config: &RunConfig) -> Result<Table, CliError> {
    let params = config.params();
    let mut t = Table::new(
        "phase-diagram",
        &["g1", "g2_closed_form", "branch", "g2_numeric", "g2_physical", "stable_region"],
    );
    t.note("g1_switch", spinwave::spectrum::branch_switch_g1(&params));
    for g1 in config.g_grid() {
        let p = critical_g2(&params, g1)?;
        t.push(vec![
            g1.into(),
            p.g2_critical.into(),
            p.branch.as_str().into(),
            p.numeric.map_or(Cell::Empty, Cell::Num),
            p.physical_critical().into(),
            p.has_stable_region().into(),
        ]);
    }
    Ok(t)
}

fn gap_scan(config: &RunConfig) -> Result<Table, CliError> {
    let params = config.params();
    let lattice = config.lattice()?;
    let gc = critical_g_equal(&params);
    let mut t = Table::new("gap-scan", &["g", "gap", "gc_minus_g", "status"]);
    t.note("g_c", gc);
    let grid = config.g_grid();
    if lattice.is_infinite() && grid.len() >= 2 && config.g_max < gc {
        let fit = gap_scaling_exponent(&params, (config.g_min, config.g_max), grid.len())?;
        t.note("gap_exponent", fit.exponent);
        t.note("gap_prefactor", fit.prefactor);
    }
    for g in grid {
        let row = params.with_equal_coupling(g).and_then(|p| energy_gap(&p, &lattice));
        t.push(match row {
            Ok(gap) => vec![g.into(), gap.into(), (gc - g).into(), "ok".into()],
            Err(e) => vec![g.into(), Cell::Empty, (gc - g).into(), error_cell(&e)],
        });
    }
    Ok(t)
}

fn covariance(config: &RunConfig) -> Result<Table, CliError> {
    let params = config.params();
    let lattice = config.lattice()?;
    let engine = config.engine_for(&lattice)?;
    let state = solve(&params, &lattice, engine, config.extent, &config.quad())?;
    let c = center_site(&lattice);
    let mut t = Table::new("covariance", &["dx", "dy", "qq", "pp"]);
    let (q0, p0) = state.pair(c, c)?;
    t.note("engine", engine.as_str());
    t.note("excitation_density", density_from_moments(&params, q0, p0));
    let e = config.extent as i64;
    for dy in 0..=e {
        for dx in 0..=e {
            let (qq, pp) = state.pair(c, (c.0 + dx, c.1 + dy))?;
            t.push(vec![dx.into(), dy.into(), qq.into(), pp.into()]);
        }
    }
    Ok(t)
}

fn entropy_table(
    command: &str,
    params: &CouplingParams,
    config: &RunConfig,
    lattice: &LatticeSpec,
) -> Result<Table, CliError> {
    let engine = config.engine_for(lattice)?;
    let curve = entropy_vs_l(params, lattice, engine, &config.block_sizes, config.entropy_mode(), &config.quad())?;
    let mut t = Table::new(command, &["L", "entropy"]);
    t.note("engine", engine.as_str());
    t.note("entropy_mode", config.entropy_mode().as_str());
    if let Ok(fit) = area_law_fit(&curve) {
        t.note("fit_slope", fit.slope);
        t.note("fit_intercept", fit.intercept);
        t.note("fit_max_rel_residual", fit.max_rel_residual);
    }
    for (l, e) in curve {
        t.push(vec![l.into(), e.into()]);
    }
    Ok(t)
}

fn entropy_scan(config: &RunConfig) -> Result<Table, CliError> {
    entropy_table("entropy-scan", &config.params(), config, &config.lattice()?)
}

/// Displacements reported by `two-site`.
const PAIRS: [(i64, i64); 7] = [(1, 0), (0, 1), (1, 1), (2, 0), (2, 1), (2, 2), (3, 0)];

fn two_site(config: &RunConfig) -> Result<Table, CliError> {
    let params = config.params();
    let lattice = config.lattice()?;
    let engine = config.engine_for(&lattice)?;
    let state = solve(&params, &lattice, engine, 3, &config.quad())?;
    let c = center_site(&lattice);
    let mut t = Table::new(
        "two-site",
        &["dx", "dy", "n", "c", "zeta", "eof", "separable", "sign_anomaly", "status"],
    );
    for (dx, dy) in PAIRS {
        t.push(match two_site_params(&state, c, (c.0 + dx, c.1 + dy)) {
            Ok(s) => vec![
                dx.into(),
                dy.into(),
                s.n.into(),
                s.c.into(),
                s.zeta.into(),
                s.eof.into(),
                s.separable.into(),
                s.sign_anomaly.into(),
                "ok".into(),
            ],
            Err(e) => {
                let mut row = vec![dx.into(), dy.into()];
                row.extend(std::iter::repeat_n(Cell::Empty, 6));
                row.push(error_cell(&e));
                row
            }
        });
    }
    Ok(t)
}

fn derivative_table(command: &str, rows: &[DerivativeRow], side: Option<usize>) -> Table {
    let mut t = Table::new(command, &["g", "zeta1", "dzeta1_raw", "dzeta1_richardson", "status"]);
    if let Some(m) = side {
        t.note("side", m);
    }
    let best = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .max_by(|a, b| a.richardson.abs().total_cmp(&b.richardson.abs()));
    if let Some(d) = best {
        t.note("peak_abs_derivative", d.richardson.abs());
        t.note("peak_g", d.g);
    }
    for r in rows {
        t.push(match &r.outcome {
            Ok(d) => vec![r.g.into(), d.zeta1.into(), d.raw.into(), d.richardson.into(), "ok".into()],
            Err(e) => vec![r.g.into(), Cell::Empty, Cell::Empty, Cell::Empty, error_cell(e)],
        });
    }
    t
}

fn derivative(config: &RunConfig) -> Result<Table, CliError> {
    let lattice = config.lattice()?;
    let engine = config.engine_for(&lattice)?;
    let rows = derivative_scan(&config.params(), &lattice, engine, &config.g_grid(), config.step, &config.quad());
    Ok(derivative_table("derivative-scan", &rows, None))
}

fn finite_size(config: &RunConfig) -> Result<Table, CliError> {
    let peaks = finite_size_peak(&config.params(), &config.sides, &config.g_grid(), config.step)?;
    let mut t = Table::new("finite-size", &["side", "g", "zeta1", "dzeta1_raw", "dzeta1_richardson"]);
    for p in &peaks {
        t.note(&format!("peak_M{}", p.side), format!("{} at g = {}", p.peak, p.g_peak));
        for d in &p.rows {
            t.push(vec![p.side.into(), d.g.into(), d.zeta1.into(), d.raw.into(), d.richardson.into()]);
        }
    }
    Ok(t)
}

struct Checks(Table);

impl Checks {
    fn new() -> Self {
        Checks(Table::new("oracle-check", &["check", "value", "threshold", "pass"]))
    }

    fn add(&mut self, name: String, value: f64, threshold: f64, pass: bool) {
        self.0.push(vec![name.into(), value.into(), threshold.into(), pass.into()]);
    }

    fn failures(&self) -> usize {
        self.0.rows.iter().filter(|r| r[3] == Cell::from(false)).count()
    }
}

fn oracle_check(config: &RunConfig) -> Result<Report, CliError> {
    let mut checks = Checks::new();

    let trend = gap_error_trend(&config.oracle_atoms, 1.0, 0.5, PairConvention::Full)?;
    for (i, &(n, err)) in trend.iter().enumerate() {
        let shrinking = i == 0 || err < trend[i - 1].1;
        checks.add(format!("ed_gap_rel_error_N{n}"), err, 0.05, shrinking && (i + 1 < trend.len() || err < 0.05));
    }
    for g in [0.25, -0.25] {
        let n = config.oracle_atoms.iter().copied().max().unwrap_or(20);
        let spec = SpinSystemSpec {
            n_atoms: n,
            omega: n as f64,
            kappa: 1.0,
            g,
            convention: PairConvention::Full,
        };
        let exact = exact_two_site(&spec)?;
        let harmonic = harmonic_two_site_prediction(&spec)?;
        checks.add(
            format!("ed_corr_sign_g{g}"),
            exact.ground_corr,
            0.0,
            exact.ground_corr.signum() == harmonic.ground_corr.signum(),
        );
    }

    let routes = random_route_comparisons(config.oracle_blocks, config.seed)?;
    let worst = routes.iter().map(|r| r.max_diff).fold(0.0, f64::max);
    checks.add(format!("symplectic_routes_{}_blocks", routes.len()), worst, 1e-9, worst < 1e-9);

    let base = config.params();
    for side in [4, 5, 6, 8] {
        for g in [0.5, 1.25, 1.7] {
            let p = base.with_equal_coupling(g)?;
            let (dq, dp) = dense_vs_fft(&p, side)?;
            let d = dq.max(dp);
            checks.add(format!("dense_vs_fft_M{side}_g{g}"), d, 1e-10, d < 1e-10);
        }
    }
    let d = infinite_vs_fft(&base.with_equal_coupling(1.25)?, 160, 3, &config.quad())?;
    checks.add("infinite_vs_fft_M160_g1.25".into(), d, 1e-8, d < 1e-8);

    let failures = checks.failures();
    checks.0.note("failures", failures);
    Ok(Report {
        artifacts: vec![Artifact {
            path: None,
            content: checks.0.to_json(config),
        }],
        failures,
    })
}

/// Paper parameters: `omega = 500`, `kappa = 1`, `N = 1000`, periodic `M = 80`.
pub fn paper_config(config: &RunConfig) -> RunConfig {
    RunConfig {
        omega: 500.0,
        kappa: 1.0,
        n_atoms: 1000,
        g1: 0.0,
        g2: 0.0,
        side: 80,
        boundary: BoundaryChoice::Periodic,
        engine: EngineChoice::Auto,
        ..config.clone()
    }
}

fn artifact(dir: &Path, stem: &str, table: &Table, config: &RunConfig) -> Artifact {
    Artifact {
        path: Some(dir.join(format!("{stem}.{}", Table::extension(config)))),
        content: table.render(config),
    }
}

fn reproduce_fig2(config: &RunConfig) -> Result<Report, CliError> {
    let paper = paper_config(config);
    let base = paper.params();
    let dir = PathBuf::from(&paper.output_dir);
    let finite = paper.lattice()?;
    let settings = [
        ("fig2_g1.25", 1.25),
        ("fig2_g1.5", 1.5),
        ("fig2_near_critical", near_critical_g(&base)),
    ];
    let mut artifacts = Vec::new();
    for (stem, g) in settings {
        let params = base.with_equal_coupling(g)?;
        let fin = entropy_table("reproduce-fig2", &params, &paper, &finite)?;
        let inf = entropy_table("reproduce-fig2", &params, &paper, &LatticeSpec::infinite())?;
        let mut t = Table::new("reproduce-fig2", &["L", "entropy_M80", "entropy_infinite"]);
        t.note("g", g);
        t.note("entropy_mode", paper.entropy_mode().as_str());
        for (label, src) in [("M80", &fin), ("infinite", &inf)] {
            for (k, v) in &src.notes {
                if k.starts_with("fit_") {
                    t.note(&format!("{label}_{k}"), v);
                }
            }
        }
        for (a, b) in fin.rows.iter().zip(&inf.rows) {
            t.push(vec![a[0].clone(), a[1].clone(), b[1].clone()]);
        }
        artifacts.push(artifact(&dir, stem, &t, &paper));
    }
    Ok(Report {
        artifacts,
        failures: 0,
    })
}

fn reproduce_fig3(config: &RunConfig) -> Result<Report, CliError> {
    let paper = paper_config(config);
    let base = paper.params();
    let dir = PathBuf::from(&paper.output_dir);
    let gc = critical_g_equal(&base);
    let quad = paper.quad();
    let mut artifacts = Vec::new();

    // keep the whole stencil g + h below g_c
    let grid = linspace(1.0, gc - 2.0 * paper.step, 200);
    let rows = derivative_scan(&base, &LatticeSpec::infinite(), spinwave::groundstate::Engine::Infinite, &grid, paper.step, &quad);
    artifacts.push(artifact(&dir, "fig3_infinite", &derivative_table("reproduce-fig3", &rows, None), &paper));

    let grid = default_derivative_grid(&base);
    for &side in &paper.sides {
        let lattice = LatticeSpec::periodic(side)?;
        let rows = derivative_scan(&base, &lattice, spinwave::groundstate::Engine::Fft, &grid, paper.step, &quad);
        let table = derivative_table("reproduce-fig3", &rows, Some(side));
        artifacts.push(artifact(&dir, &format!("fig3_M{side}"), &table, &paper));
    }
    Ok(Report {
        artifacts,
        failures: 0,
    })
}
