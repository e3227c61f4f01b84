//! Acceptance gate: runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each. Exits non-zero if any criterion fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use spinwave::entanglement::{
    centered_block_entropy, reduce_block, reduce_sites, symplectic_spectrum, block_entropy,
    two_site_params, BlockRegion, EntropyMode,
};
use spinwave::groundstate::{
    covariance_dense, covariance_pbc_fft, excitation_density, solve, Engine, QuadratureSpec, Site,
};
use spinwave::model::{build_potential, CouplingParams, LatticeSpec, PairConvention};
use spinwave::oracle::{dense_vs_fft, gap_error_trend, infinite_vs_fft, random_route_comparisons};
use spinwave::scan::{
    area_law_fit, default_derivative_grid, derivative_zeta, finite_size_peak, linspace,
    near_critical_g, DEFAULT_STEP,
};
use spinwave_cli::{dispatch, write_report, Command as CliCommand, RunConfig};
use spinwave::spectrum::{
    branch_switch_g1, critical_g2, critical_g_equal, gap_scaling_exponent, phase_boundary_cases,
    zone_minimum, Branch,
};

type Outcome = Result<(bool, String), String>;

fn paper(g: f64) -> CouplingParams {
    CouplingParams::new(500.0, 1.0, 1000, g, g).expect("valid parameters")
}

fn gc() -> f64 {
    critical_g_equal(&paper(0.0))
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn c1_critical_coupling() -> Outcome {
    let gc = gc();
    let (mut lo, mut hi) = (0.0, 3.0);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if zone_minimum(&paper(mid)).v_k > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let ok = (gc - 1.74028).abs() < 5e-6 && (gc - root).abs() < 1e-6;
    Ok((ok, format!("g_c = {gc:.10}, bisection root = {root:.10}")))
}

fn c2_phase_boundary() -> Outcome {
    let base = paper(0.0);
    let mut worst: f64 = 0.0;
    let mut branches_ok = true;
    for g1 in [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
        let pt = critical_g2(&base, g1).map_err(err)?;
        let numeric = pt.numeric.ok_or(format!("no bisection root at g1 = {g1}"))?;
        worst = worst.max((pt.physical_critical() - numeric).abs());
        let boundary = std::f64::consts::SQRT_2 * g1;
        branches_ok &= match pt.branch {
            Branch::Above => pt.g2_critical > boundary,
            Branch::Below => pt.g2_critical < boundary,
            Branch::Degenerate => (pt.g2_critical - boundary).abs() < 1e-9,
        };
    }
    let switch = branch_switch_g1(&base);
    let [below, degenerate, above] = phase_boundary_cases(&base, switch);
    let spread = (below - degenerate).abs().max((above - degenerate).abs());
    let boundary_gap = (degenerate - std::f64::consts::SQRT_2 * switch).abs();
    let ok = worst < 1e-6 && branches_ok && spread < 1e-9 && boundary_gap < 1e-9;
    Ok((
        ok,
        format!(
            "max |closed - bisection| = {worst:.2e}, branches consistent = {branches_ok}, \
             switch g1* = {switch:.6} with case spread {spread:.1e}"
        ),
    ))
}

fn c3_gap_scaling() -> Outcome {
    let base = paper(0.0);
    let gc = gc();
    let fit = gap_scaling_exponent(&base, (0.9 * gc, 0.999 * gc), 41).map_err(err)?;
    let amplitude = (500.0 * 1000.0 * (4.0 - std::f64::consts::SQRT_2)).sqrt();
    let rel = (fit.prefactor - amplitude).abs() / amplitude;
    let ok = (fit.exponent - 0.5).abs() <= 0.005 && rel < 1e-3;
    Ok((ok, format!("exponent = {:.6}, prefactor rel. error = {rel:.2e}", fit.exponent)))
}

fn c4_purity() -> Outcome {
    let lattice = LatticeSpec::periodic(12).map_err(err)?;
    let state = covariance_pbc_fft(&lattice, &paper(1.5)).map_err(err)?.to_pair().map_err(err)?;
    let full = symplectic_spectrum(&state.q, &state.p).map_err(err)?;
    let purity = full.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    let mut lowest = f64::INFINITY;
    for l in 1..=6 {
        let (q, p) = reduce_block(&state, &BlockRegion::new((0, 0), l).map_err(err)?).map_err(err)?;
        let s = symplectic_spectrum(&q, &p).map_err(err)?;
        lowest = lowest.min(*s.values().last().expect("non-empty block"));
    }
    let ok = purity < 1e-9 && lowest >= 1.0 - 1e-9;
    Ok((ok, format!("max |nu - 1| (full) = {purity:.2e}, min block nu = {lowest:.12}")))
}

fn c5_duality() -> Outcome {
    let lattice = LatticeSpec::open(8).map_err(err)?;
    let state = covariance_dense(&build_potential(&lattice, &paper(1.2)).map_err(err)?).map_err(err)?;
    let block = BlockRegion::centered(&lattice, 3).map_err(err)?.sites();
    let complement: Vec<Site> = (0..8i64)
        .flat_map(|y| (0..8i64).map(move |x| (x, y)))
        .filter(|s| !block.contains(s))
        .collect();
    let entropy = |sites: &[Site]| -> Result<f64, String> {
        let (q, p) = reduce_sites(&state, sites).map_err(err)?;
        Ok(block_entropy(&symplectic_spectrum(&q, &p).map_err(err)?, EntropyMode::CountAll))
    };
    let (a, b) = (entropy(&block)?, entropy(&complement)?);
    Ok(((a - b).abs() < 1e-8, format!("E(block) = {a:.12}, E(complement) = {b:.12}")))
}

fn c6_engines() -> Outcome {
    let mut worst: f64 = 0.0;
    for side in [4, 5, 6, 8] {
        for g in [0.5, 1.25, 1.7] {
            let (dq, dp) = dense_vs_fft(&paper(g), side).map_err(err)?;
            worst = worst.max(dq).max(dp);
        }
    }
    let rel = infinite_vs_fft(&paper(1.25), 160, 3, &QuadratureSpec::default()).map_err(err)?;
    let ok = worst < 1e-10 && rel < 1e-8;
    Ok((ok, format!("dense vs fft max |diff| = {worst:.2e}, infinite vs M=160 rel = {rel:.2e}")))
}

fn c7_area_law() -> Outcome {
    let sizes: Vec<usize> = (2..=20).step_by(2).collect();
    let quad = QuadratureSpec::default();
    let finite = LatticeSpec::periodic(80).map_err(err)?;
    let infinite = LatticeSpec::infinite();
    let curve = |g: f64, lattice: &LatticeSpec, engine: Engine, mode: EntropyMode| -> Result<Vec<(usize, f64)>, String> {
        let state = solve(&paper(g), lattice, engine, 19, &quad).map_err(err)?;
        sizes
            .iter()
            .map(|&l| Ok((l, centered_block_entropy(&state, l, mode).map_err(err)?)))
            .collect()
    };
    let once = EntropyMode::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for g in [1.25, 1.5] {
        let fin = curve(g, &finite, Engine::Fft, EntropyMode::CountAll)?;
        let inf = curve(g, &infinite, Engine::Infinite, EntropyMode::CountAll)?;
        let fit = area_law_fit(&fin).map_err(err)?;
        let agree = fin
            .iter()
            .zip(&inf)
            .filter(|((l, _), _)| *l <= 10)
            .map(|((_, a), (_, b))| ((a - b) / b).abs())
            .fold(0.0, f64::max);
        ok &= fit.max_rel_residual < 0.02 && agree < 0.01;
        let info = area_law_fit(&curve(g, &finite, Engine::Fft, once)?).map_err(err)?;
        parts.push(format!(
            "g={g}: residual {:.2}% (degenerate_once {:.2}%), M80 vs infinite {agree:.1e}",
            100.0 * fit.max_rel_residual,
            100.0 * info.max_rel_residual
        ));
    }
    let g = near_critical_g(&paper(0.0));
    let near = curve(g, &infinite, Engine::Infinite, EntropyMode::CountAll)?;
    let fit = area_law_fit(&near).map_err(err)?;
    let finite_increasing =
        near.iter().all(|(_, e)| e.is_finite()) && near.windows(2).all(|w| w[1].1 > w[0].1);
    ok &= fit.max_rel_residual < 0.05 && finite_increasing;
    let info = area_law_fit(&curve(g, &infinite, Engine::Infinite, once)?).map_err(err)?;
    parts.push(format!(
        "near g_c: residual {:.2}% (degenerate_once {:.2}%), finite and increasing = {finite_increasing}",
        100.0 * fit.max_rel_residual,
        100.0 * info.max_rel_residual
    ));
    Ok((ok, parts.join("; ")))
}

fn c8_two_site() -> Outcome {
    let quad = QuadratureSpec::default();
    let infinite = LatticeSpec::infinite();
    let zeta_at = |g: f64, b: Site| -> Result<f64, String> {
        let state = solve(&paper(g), &infinite, Engine::Infinite, 3, &quad).map_err(err)?;
        Ok(two_site_params(&state, (0, 0), b).map_err(err)?.zeta)
    };
    let grid = linspace(1.25, 1.73, 97);
    let zetas: Vec<f64> = grid.iter().map(|&g| zeta_at(g, (1, 0))).collect::<Result<_, _>>()?;
    let decreasing = zetas.windows(2).all(|w| w[1] < w[0]);
    let (imin, zmin) = zetas
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");

    let state = solve(&paper(1.5), &infinite, Engine::Infinite, 3, &quad).map_err(err)?;
    let z = |b: Site| two_site_params(&state, (0, 0), b).map(|t| t.zeta).map_err(err);
    let z1 = z((1, 0))?;
    let diag = z((1, 1))?;
    let dist2 = z((2, 0))?;
    let others = [z((0, 1))?, diag, z((1, -1))?, dist2, z((0, 2))?, z((2, 1))?, z((2, 2))?, z((3, 0))?];
    let minimal = others.iter().all(|&o| z1 <= o + 1e-12);
    let ordering = diag >= 1.0 && dist2 >= 1.0 && minimal;
    let chain = z1 < diag && diag <= dist2;
    Ok((
        decreasing && ordering,
        format!(
            "zeta1 strictly decreasing on [1.25, 1.73] = {decreasing} (minimum {zmin:.6} at g = {:.3}); \
             g=1.5: zeta1 = {z1:.6}, zeta_diag = {diag:.6}, zeta_2 = {dist2:.6}, \
             nn minimal = {minimal}, zeta1 < zeta_diag <= zeta_2 = {chain}",
            grid[imin]
        ),
    ))
}

fn c9_divergence() -> Outcome {
    let base = paper(0.0);
    let gc = gc();
    let quad = QuadratureSpec::default();
    let infinite = LatticeSpec::infinite();
    let d = |g: f64| derivative_zeta(&base, &infinite, Engine::Infinite, g, DEFAULT_STEP, &quad).map_err(err);
    let (far, near) = (d(gc - 1e-2)?, d(gc - 1e-3)?);
    let peaks = finite_size_peak(&base, &[21, 31, 41], &default_derivative_grid(&base), DEFAULT_STEP).map_err(err)?;
    let increasing = peaks.windows(2).all(|w| w[1].peak > w[0].peak);
    let list: Vec<String> = peaks.iter().map(|p| format!("M{} {:.4}", p.side, p.peak)).collect();
    Ok((
        near.richardson.abs() > far.richardson.abs() && increasing,
        format!(
            "|d zeta1/dg| at g_c-1e-2 = {:.4}, at g_c-1e-3 = {:.4}; finite peaks {}",
            far.richardson.abs(),
            near.richardson.abs(),
            list.join(", ")
        ),
    ))
}

fn c10_density() -> Outcome {
    let quad = QuadratureSpec::default();
    let finite = LatticeSpec::periodic(80).map_err(err)?;
    let mut worst: f64 = 0.0;
    for g in linspace(0.0, 1.5, 16) {
        worst = worst.max(excitation_density(&paper(g), &LatticeSpec::infinite(), Engine::Infinite, &quad).map_err(err)?);
        worst = worst.max(excitation_density(&paper(g), &finite, Engine::Fft, &quad).map_err(err)?);
    }
    Ok((worst < 1e-2, format!("max <c^dag c>/N for g <= 1.5 = {worst:.3e}")))
}

fn c11_oracles() -> Outcome {
    let trend = gap_error_trend(&[10, 20, 40], 1.0, 0.5, PairConvention::Full).map_err(err)?;
    let decreasing = trend.windows(2).all(|w| w[1].1 < w[0].1);
    let last = trend.last().expect("three sizes").1;
    let routes = random_route_comparisons(50, 7).map_err(err)?;
    let worst = routes.iter().map(|r| r.max_diff).fold(0.0, f64::max);
    let list: Vec<String> = trend.iter().map(|(n, e)| format!("N{n} {:.3}%", 100.0 * e)).collect();
    Ok((
        decreasing && last < 0.05 && routes.len() == 50 && worst < 1e-9,
        format!("gap errors {}; route max |diff| over 50 blocks = {worst:.2e}", list.join(", ")),
    ))
}

fn snapshot(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(err)? {
        let entry = entry.map_err(err)?;
        let bytes = std::fs::read(entry.path()).map_err(err)?;
        files.push((entry.file_name().to_string_lossy().into_owned(), bytes));
    }
    files.sort();
    Ok(files)
}

fn c12_determinism() -> Outcome {
    let home = std::env::current_dir().map_err(err)?;
    let mut parts = Vec::new();
    let mut ok = true;
    for command in [CliCommand::ReproduceFig2, CliCommand::ReproduceFig3] {
        let config = RunConfig::parse_with_overrides("", &["output_dir = out".to_string()]).map_err(err)?;
        let mut runs = Vec::new();
        // Same relative output dir in fresh working dirs, so the two runs share a config.
        for workers in [1, 2] {
            let dir = tempfile::tempdir().map_err(err)?;
            std::env::set_current_dir(dir.path()).map_err(err)?;
            let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(err)?;
            let written = pool
                .install(|| dispatch(command, &config))
                .and_then(|report| write_report(&report, &config));
            std::env::set_current_dir(&home).map_err(err)?;
            written.map_err(|e| format!("{} failed: {e}", command.name()))?;
            runs.push(snapshot(&dir.path().join("out"))?);
        }
        let same = !runs[0].is_empty() && runs[0] == runs[1];
        ok &= same;
        parts.push(format!("{}: {} files identical = {same}", command.name(), runs[0].len()));
    }
    Ok((ok, parts.join("; ")))
}

fn main() -> ExitCode {
    let criteria: [(fn() -> Outcome, u64); 12] = [
        (c1_critical_coupling, 1),
        (c2_phase_boundary, 10),
        (c3_gap_scaling, 10),
        (c4_purity, 30),
        (c5_duality, 30),
        (c6_engines, 120),
        (c7_area_law, 600),
        (c8_two_site, 120),
        (c9_divergence, 600),
        (c10_density, 60),
        (c11_oracles, 300),
        (c12_determinism, 600),
    ];
    let mut failed = 0;
    for (i, (check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let (pass, detail) = match outcome {
            Ok((pass, detail)) => (pass && in_time, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2}: {} {detail} [{:.2}s of {budget}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
