//! Subcommand implementations. Grid points are independent rayon tasks;
//! results are merged in sorted grid order so parallel and serial runs emit
//! identical files.

use crate::config::{PValue, SweepConfig};
use crate::csvio::{fmt_f64, CsvWriter, Field};
use anyhow::{anyhow, bail, Result};
use fermitherm::bounds;
use fermitherm::gradients::{commutator_blocks, GradientKind};
use fermitherm::norms;
use fermitherm::shells::GradedBasis;
use fermitherm::thermal::{
    occupations, partition_closed, shells_for, solve_chemical_potential, ModelParams,
    OccupationProfile, StateKind,
};
use rayon::prelude::*;
use std::path::Path;
use std::time::Instant;

/// Exit code semantics: 0 pass, 1 usage/convergence error, 2 bound violation.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

fn manifest(cfg: &SweepConfig) -> Vec<(&'static str, String)> {
    vec![
        ("schatten_exponent", cfg.schatten_exponent.clone()),
        ("weight_zero_convention", cfg.weight_zero_convention.clone()),
        ("tail_tol", fmt_f64(cfg.tail_tol)),
        ("mu_tol", fmt_f64(cfg.mu_tol)),
        ("slack", fmt_f64(cfg.slack)),
        ("dense_ceiling", cfg.dense_ceiling.to_string()),
    ]
}

struct GridPoint {
    d: usize,
    beta: f64,
    hbar: f64,
    lambda: f64,
}

fn grid(cfg: &SweepConfig) -> Vec<GridPoint> {
    let mut out = Vec::new();
    for &d in &cfg.d {
        for &beta in &cfg.beta {
            for &hbar in &cfg.hbar {
                for &lambda in &cfg.lambda {
                    out.push(GridPoint {
                        d,
                        beta,
                        hbar,
                        lambda,
                    });
                }
            }
        }
    }
    out
}

struct VerifyRow {
    p: Option<f64>,
    n: u32,
    bound_id: String,
    lhs: f64,
    rhs: f64,
    slack: f64,
}

impl VerifyRow {
    fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
    fn pass(&self) -> bool {
        let r = self.ratio();
        r.is_finite() && r >= 0.0 && r <= 1.0 + self.slack
    }
}

struct PointResult {
    mu: f64,
    z_beta: f64,
    z_mu: f64,
    k_used: usize,
    tail_est: f64,
    wall_ms: u128,
    rows: Vec<VerifyRow>,
}

fn solve_point(cfg: &SweepConfig, pt: &GridPoint) -> Result<(ModelParams, fermitherm::ShellTable, OccupationProfile)> {
    let params = ModelParams::new(pt.d, pt.hbar, pt.beta, pt.lambda)?
        .with_tolerances(cfg.tail_tol, cfg.mu_tol);
    let weight_max = cfg.weight_n.iter().copied().max().unwrap_or(0);
    let shells = shells_for(&params, StateKind::FermiDirac, weight_max)?;
    let prof = solve_chemical_potential(&params, &shells)?;
    Ok((params, shells, prof))
}

fn verify_point(cfg: &SweepConfig, pt: &GridPoint, corrupt: f64) -> Result<PointResult> {
    let start = Instant::now();
    let (params, shells, prof) = solve_point(cfg, pt)?;
    let z_mu = prof.z_mu.expect("solved profile");
    let mu = prof.mu.expect("solved profile");
    let z_beta_closed = partition_closed(pt.d, pt.beta, pt.hbar);
    let expo = cfg.schatten_exponent_value(pt.d);
    let slack = cfg.slack;
    let mut rows = Vec::new();

    let wants = |name: &str| cfg.bounds.iter().any(|b| b == name);

    if wants("main_theorem") {
        let gb = commutator_blocks(&prof, &shells, GradientKind::Position)?;
        for &PValue(p) in &cfg.p {
            let lhs = norms::gradient_schatten_with_exponent(&gb, p, expo)?;
            let rhs = corrupt * bounds::rhs_main_bound(pt.d, p, pt.beta, pt.hbar, z_mu);
            rows.push(VerifyRow {
                p: Some(p),
                n: 0,
                bound_id: "main_theorem".into(),
                lhs,
                rhs,
                slack,
            });
        }
    }
    if wants("main_theorem_gibbs") || wants("linf_prop_gibbs") {
        let mb = occupations(&params, &shells, StateKind::MaxwellBoltzmann)?;
        let gb = commutator_blocks(&mb, &shells, GradientKind::Position)?;
        if wants("main_theorem_gibbs") {
            for &PValue(p) in &cfg.p {
                let lhs = norms::gradient_schatten_with_exponent(&gb, p, expo)?;
                let rhs =
                    corrupt * bounds::rhs_main_bound(pt.d, p, pt.beta, pt.hbar, z_beta_closed);
                rows.push(VerifyRow {
                    p: Some(p),
                    n: 0,
                    bound_id: "main_theorem_gibbs".into(),
                    lhs,
                    rhs,
                    slack,
                });
            }
        }
        if wants("linf_prop_gibbs") {
            let lhs = norms::gradient_schatten_with_exponent(&gb, f64::INFINITY, expo)?;
            let rhs = bounds::rhs_linf_proposition(pt.beta, pt.hbar, z_beta_closed);
            rows.push(VerifyRow {
                p: Some(f64::INFINITY),
                n: 0,
                bound_id: "linf_prop_gibbs".into(),
                lhs,
                rhs,
                slack,
            });
        }
    }
    if wants("linf_prop") {
        let gb = commutator_blocks(&prof, &shells, GradientKind::Position)?;
        let lhs = norms::gradient_schatten_with_exponent(&gb, f64::INFINITY, expo)?;
        let rhs = bounds::rhs_linf_proposition(pt.beta, pt.hbar, z_mu);
        rows.push(VerifyRow {
            p: Some(f64::INFINITY),
            n: 0,
            bound_id: "linf_prop".into(),
            lhs,
            rhs,
            slack,
        });
    }
    if wants("fugacity_upper") || wants("fugacity_lower") || wants("mu_upper") {
        let sandwich = bounds::fugacity_sandwich(&prof, slack)?;
        if wants("fugacity_upper") {
            rows.push(VerifyRow {
                p: None,
                n: 0,
                bound_id: "fugacity_upper".into(),
                lhs: sandwich.upper.lhs,
                rhs: sandwich.upper.rhs,
                slack: 0.0,
            });
        }
        if wants("fugacity_lower") {
            rows.push(VerifyRow {
                p: None,
                n: 0,
                bound_id: "fugacity_lower".into(),
                lhs: sandwich.lower.lhs,
                rhs: sandwich.lower.rhs,
                slack,
            });
        }
        if wants("mu_upper") {
            if let Some(rep) = sandwich.mu_upper {
                rows.push(VerifyRow {
                    p: None,
                    n: 0,
                    bound_id: "mu_upper".into(),
                    lhs: rep.lhs,
                    rhs: rep.rhs,
                    slack,
                });
            }
        }
    }

    Ok(PointResult {
        mu,
        z_beta: z_beta_closed,
        z_mu,
        k_used: shells.cutoff,
        tail_est: prof.tail.tail_est,
        wall_ms: start.elapsed().as_millis(),
        rows,
    })
}

pub fn cmd_verify(cfg: &SweepConfig, out: &Path, corrupt: f64) -> Result<i32> {
    cfg.validate()?;
    let points = grid(cfg);
    let results: Vec<Result<PointResult>> = points
        .par_iter()
        .map(|pt| verify_point(cfg, pt, corrupt))
        .collect();

    let mut writer = CsvWriter::create(out, "verify", &cfg.canonical_json(), &manifest(cfg))?;
    writer.header(&[
        "d", "beta", "hbar", "lambda", "mu", "Z_beta", "Z_mu", "p", "n", "bound_id", "lhs",
        "rhs", "ratio", "pass", "K_used", "tail_est", "wall_ms",
    ])?;
    let mut violations = 0usize;
    for (pt, res) in points.iter().zip(results) {
        let res = res?;
        for row in &res.rows {
            if !row.pass() {
                violations += 1;
            }
            writer.row(&[
                Field::Usize(pt.d),
                Field::F64(pt.beta),
                Field::F64(pt.hbar),
                Field::F64(pt.lambda),
                Field::F64(res.mu),
                Field::F64(res.z_beta),
                Field::F64(res.z_mu),
                match row.p {
                    Some(p) => Field::F64(p),
                    None => Field::Empty,
                },
                Field::U64(row.n as u64),
                Field::Owned(row.bound_id.clone()),
                Field::F64(row.lhs),
                Field::F64(row.rhs),
                Field::F64(row.ratio()),
                Field::Bool(row.pass()),
                Field::Usize(res.k_used),
                Field::F64(res.tail_est),
                Field::U64(res.wall_ms as u64),
            ])?;
        }
    }
    writer.finish()?;
    if violations > 0 {
        eprintln!("error: bound_violation rows={violations}");
        return Ok(EXIT_VIOLATION);
    }
    Ok(EXIT_OK)
}

pub fn cmd_sweep_scaling(cfg: &SweepConfig, out: &Path) -> Result<i32> {
    cfg.validate()?;
    if cfg.beta.len() < 4 {
        bail!("regression refused: need at least 4 beta points, got {}", cfg.beta.len());
    }
    let mut writer =
        CsvWriter::create(out, "sweep-scaling", &cfg.canonical_json(), &manifest(cfg))?;
    writer.header(&[
        "record", "d", "beta", "hbar", "lambda", "p", "state", "value", "gap_vs_mb", "slope",
        "slope_stderr", "slope_target", "pass", "wall_ms",
    ])?;

    struct NormRow {
        beta: f64,
        lambda: Option<f64>,
        value: f64,
        gap: Option<f64>,
        wall_ms: u128,
    }

    let mut any_slope_fail = false;
    for &d in &cfg.d {
        for &hbar in &cfg.hbar {
            for &PValue(p) in &cfg.p {
                // Maxwell-Boltzmann norms across the beta sweep
                let mb_rows: Vec<Result<NormRow>> = cfg
                    .beta
                    .par_iter()
                    .map(|&beta| {
                        let start = Instant::now();
                        let params = ModelParams::new(d, hbar, beta, 1.0)?
                            .with_tolerances(cfg.tail_tol, cfg.mu_tol);
                        let shells = shells_for(&params, StateKind::MaxwellBoltzmann, 0)?;
                        let prof = occupations(&params, &shells, StateKind::MaxwellBoltzmann)?;
                        let gb = commutator_blocks(&prof, &shells, GradientKind::Position)?;
                        let value = norms::gradient_schatten_with_exponent(
                            &gb,
                            p,
                            cfg.schatten_exponent_value(d),
                        )?;
                        Ok(NormRow {
                            beta,
                            lambda: None,
                            value,
                            gap: None,
                            wall_ms: start.elapsed().as_millis(),
                        })
                    })
                    .collect();
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                let mut mb_values = Vec::new();
                for row in mb_rows {
                    let row = row?;
                    xs.push(row.beta.ln());
                    ys.push(row.value.ln());
                    mb_values.push((row.beta, row.value));
                    writer.row(&[
                        Field::Str("norm"),
                        Field::Usize(d),
                        Field::F64(row.beta),
                        Field::F64(hbar),
                        Field::Empty,
                        Field::F64(p),
                        Field::Str("maxwell_boltzmann"),
                        Field::F64(row.value),
                        Field::Empty,
                        Field::Empty,
                        Field::Empty,
                        Field::Empty,
                        Field::Empty,
                        Field::U64(row.wall_ms as u64),
                    ])?;
                }

                // Fermi-Dirac rows with their gap against the MB value
                let fd_rows: Vec<Result<NormRow>> = cfg
                    .beta
                    .par_iter()
                    .flat_map(|&beta| cfg.lambda.par_iter().map(move |&l| (beta, l)))
                    .map(|(beta, lambda)| {
                        let start = Instant::now();
                        let params = ModelParams::new(d, hbar, beta, lambda)?
                            .with_tolerances(cfg.tail_tol, cfg.mu_tol);
                        let shells = shells_for(&params, StateKind::FermiDirac, 0)?;
                        let prof = solve_chemical_potential(&params, &shells)?;
                        let gb = commutator_blocks(&prof, &shells, GradientKind::Position)?;
                        let value = norms::gradient_schatten_with_exponent(
                            &gb,
                            p,
                            cfg.schatten_exponent_value(d),
                        )?;
                        Ok(NormRow {
                            beta,
                            lambda: Some(lambda),
                            value,
                            gap: None,
                            wall_ms: start.elapsed().as_millis(),
                        })
                    })
                    .collect();
                for row in fd_rows {
                    let row = row?;
                    let mb = mb_values
                        .iter()
                        .find(|(b, _)| *b == row.beta)
                        .map(|(_, v)| *v)
                        .unwrap();
                    let gap = (row.value / mb - 1.0).abs();
                    writer.row(&[
                        Field::Str("norm"),
                        Field::Usize(d),
                        Field::F64(row.beta),
                        Field::F64(hbar),
                        Field::F64(row.lambda.unwrap()),
                        Field::F64(p),
                        Field::Str("fermi_dirac"),
                        Field::F64(row.value),
                        Field::F64(gap),
                        Field::Empty,
                        Field::Empty,
                        Field::Empty,
                        Field::Empty,
                        Field::U64(row.wall_ms as u64),
                    ])?;
                    let _ = row.gap;
                }

                let (slope, stderr) = bounds::loglog_slope(&xs, &ys)
                    .map_err(|e| anyhow!("slope regression failed: {e}"))?;
                let classical_regime = cfg.beta.iter().all(|&b| b * hbar <= 0.1);
                let p_conj = if p.is_infinite() { 1.0 } else { p / (p - 1.0) };
                let target = 0.5 + d as f64 / p_conj;
                let pass = if classical_regime {
                    let ok = (slope - target).abs() / target <= 0.05;
                    if !ok {
                        any_slope_fail = true;
                    }
                    Some(ok)
                } else {
                    None
                };
                writer.row(&[
                    Field::Str("slope"),
                    Field::Usize(d),
                    Field::Empty,
                    Field::F64(hbar),
                    Field::Empty,
                    Field::F64(p),
                    Field::Str("maxwell_boltzmann"),
                    Field::Empty,
                    Field::Empty,
                    Field::F64(slope),
                    Field::F64(stderr),
                    Field::F64(target),
                    match pass {
                        Some(b) => Field::Bool(b),
                        None => Field::Empty,
                    },
                    Field::Empty,
                ])?;
                println!(
                    "slope d={d} hbar={hbar} p={p}: {slope:.5} ± {stderr:.2e} (classical target {target})"
                );
            }
        }
    }
    writer.finish()?;
    if any_slope_fail {
        eprintln!("error: scaling_slope_violation");
        return Ok(EXIT_VIOLATION);
    }
    Ok(EXIT_OK)
}

pub fn cmd_wigner(cfg: &SweepConfig, out: &Path) -> Result<i32> {
    cfg.validate()?;
    let mut writer = CsvWriter::create(out, "wigner", &cfg.canonical_json(), &manifest(cfg))?;
    writer.header(&[
        "record", "d", "beta", "hbar", "r", "density", "n", "closed", "computed", "rel_err",
        "route",
    ])?;
    let mut worst_rel = 0.0f64;
    for &d in &cfg.d {
        for &beta in &cfg.beta {
            for &hbar in &cfg.hbar {
                let gauss = fermitherm::wigner::PhaseSpaceGaussian::new(d, beta, hbar);
                for i in 0..cfg.wigner_samples {
                    let r = cfg.wigner_zmax * i as f64 / (cfg.wigner_samples - 1) as f64;
                    writer.row(&[
                        Field::Str("sample"),
                        Field::Usize(d),
                        Field::F64(beta),
                        Field::F64(hbar),
                        Field::F64(r),
                        Field::F64(gauss.density(r * r)),
                        Field::Empty,
                        Field::Empty,
                        Field::Empty,
                        Field::Empty,
                        Field::Empty,
                    ])?;
                }
                for &n in &cfg.moments {
                    let closed = fermitherm::wigner::thermal_moment_closed(d, beta, hbar, n);
                    let (computed, route) = if n % 2 == 0 && d == 1 {
                        let params = ModelParams::new(d, hbar, beta, 1.0)?
                            .with_tolerances(cfg.tail_tol, cfg.mu_tol);
                        let shells = shells_for(&params, StateKind::MaxwellBoltzmann, n)?;
                        let prof = occupations(&params, &shells, StateKind::MaxwellBoltzmann)?;
                        (
                            fermitherm::wigner::thermal_moment_spectral(
                                &prof,
                                &shells,
                                n,
                                cfg.dense_ceiling,
                            )?,
                            "spectral",
                        )
                    } else {
                        (gauss.moment_quadrature(n, 1e-10)?, "quadrature")
                    };
                    let rel = (computed - closed).abs() / closed.abs().max(1e-300);
                    worst_rel = worst_rel.max(rel);
                    writer.row(&[
                        Field::Str("moment"),
                        Field::Usize(d),
                        Field::F64(beta),
                        Field::F64(hbar),
                        Field::Empty,
                        Field::Empty,
                        Field::U64(n as u64),
                        Field::F64(closed),
                        Field::F64(computed),
                        Field::F64(rel),
                        Field::Str(route),
                    ])?;
                }
            }
        }
    }
    writer.finish()?;
    if worst_rel > 1e-6 {
        eprintln!("error: moment_mismatch worst_rel={worst_rel:.3e}");
        return Ok(EXIT_VIOLATION);
    }
    Ok(EXIT_OK)
}

pub fn cmd_mu_solve(cfg: &SweepConfig, d: usize, beta: f64, hbar: f64, lambda: f64) -> Result<i32> {
    let params =
        ModelParams::new(d, hbar, beta, lambda)?.with_tolerances(cfg.tail_tol, cfg.mu_tol);
    let shells = shells_for(&params, StateKind::FermiDirac, 0)?;
    let prof = solve_chemical_potential(&params, &shells)?;
    println!("mu = {}", fmt_f64(prof.mu.unwrap()));
    println!("Z_mu = {}", fmt_f64(prof.z_mu.unwrap()));
    println!("Z_beta_spectral = {}", fmt_f64(prof.z_beta));
    println!(
        "Z_beta_closed = {}",
        fmt_f64(partition_closed(d, beta, hbar))
    );
    println!("N = {}", fmt_f64(params.n_particles()));
    println!("K = {}", shells.cutoff);
    println!("tail_est = {}", fmt_f64(prof.tail.tail_est));
    println!("flushed = {}", prof.tail.flushed);
    Ok(EXIT_OK)
}

/// Oracle-equivalence suite: dense reference implementations against the
/// structured paths on a small grid, plus the Duhamel identity and the
/// partition cross-check.
pub fn cmd_selftest() -> Result<i32> {
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool| {
        println!("selftest {name}: {}", if ok { "ok" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    // partition spectral vs closed
    {
        let mut ok = true;
        for (d, beta, hbar) in [(1usize, 1.0, 0.5), (2, 0.25, 0.9), (3, 4.0, 0.1)] {
            let params = ModelParams::new(d, hbar, beta, 1.0).unwrap();
            let shells = shells_for(&params, StateKind::MaxwellBoltzmann, 0)?;
            let z = fermitherm::thermal::partition_spectral(&shells, beta);
            ok &= ((z.value - partition_closed(d, beta, hbar)) / z.value).abs() < 1e-10;
        }
        check("partition-identity", ok);
    }

    // dense gradient spectra vs block path, x↔p, axis permutation
    {
        let mut ok = true;
        for d in [1usize, 2] {
            for k in [6usize, 10] {
                let params = ModelParams::new(d, 0.4, 1.0, 1.0).unwrap();
                let shells = fermitherm::shells::build_shell_table(d, 0.4, k)?;
                let prof = solve_chemical_potential(&params, &shells)?;
                let basis = GradedBasis::new(d, k)?;
                let gb = commutator_blocks(&prof, &shells, GradientKind::Position)?;
                let spec = norms::singular_spectrum(&gb)?;
                let mut fast: Vec<f64> = Vec::new();
                for (&v, &w) in spec.values.iter().zip(spec.weights.iter()) {
                    fast.extend(std::iter::repeat(v).take(w as usize));
                }
                fast.sort_by(|a, b| b.partial_cmp(a).unwrap());
                let dense = fermitherm::oracle::dense_gradient(
                    &prof,
                    &basis,
                    GradientKind::Position,
                    0,
                    4000,
                )?
                .singular_values();
                let dense_v = fermitherm::oracle::dense_gradient(
                    &prof,
                    &basis,
                    GradientKind::Velocity,
                    0,
                    4000,
                )?
                .singular_values();
                let scale = dense[0].max(1e-300);
                ok &= fast.len() == dense.len();
                for i in 0..dense.len() {
                    ok &= (fast[i] - dense[i]).abs() <= 1e-10 * scale;
                    ok &= (dense[i] - dense_v[i]).abs() <= 1e-10 * scale;
                }
            }
        }
        check("oracle-gradient-spectra", ok);
    }

    // Duhamel analytic path ≡ direct commutator
    {
        let params = ModelParams::new(1, 1.0, 1.0, std::f64::consts::TAU).unwrap();
        let shells = fermitherm::shells::build_shell_table(1, 1.0, 40)?;
        let prof = solve_chemical_potential(&params, &shells)?;
        let direct = commutator_blocks(&prof, &shells, GradientKind::Position)?;
        let (duh, _) = fermitherm::gradients::duhamel_blocks(
            &prof,
            &shells,
            GradientKind::Position,
            fermitherm::gradients::DuhamelPath::Analytic,
        )?;
        let scale = direct.deltas().iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let ok = direct
            .deltas()
            .iter()
            .zip(duh.deltas())
            .all(|(a, b)| (a - b).abs() <= 1e-12 * scale);
        check("duhamel-identity", ok);
    }

    // weighted two-path equivalence (banded vs functional calculus)
    {
        let fc = norms::weight_matrix_1d(30, 0.5, &norms::WeightSpec::new(2))?;
        let banded = norms::weight_matrix_1d_banded(30, 0.5, 2)?;
        let ok = (&fc - &banded).abs().max() < 1e-10;
        check("weight-two-path", ok);
    }

    // moment closed form vs spectral route
    {
        let params = ModelParams::new(1, 1.0, 1.0, 1.0).unwrap();
        let shells = shells_for(&params, StateKind::MaxwellBoltzmann, 2)?;
        let prof = occupations(&params, &shells, StateKind::MaxwellBoltzmann)?;
        let spectral = fermitherm::wigner::thermal_moment_spectral(&prof, &shells, 2, 4000)?;
        let closed = fermitherm::wigner::thermal_moment_closed(1, 1.0, 1.0, 2);
        check(
            "moment-cross-check",
            ((spectral - closed) / closed).abs() < 1e-8,
        );
    }

    if failures > 0 {
        eprintln!("error: selftest_failures count={failures}");
        return Ok(EXIT_VIOLATION);
    }
    Ok(EXIT_OK)
}
