//! Implementations of the CLI subcommands.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use kernelpath::diagnostics::{
    continuity_probe, cylinder_equivalence_test, native_norm_growth, parseval_check,
    sobolev_membership_series, w_independence_check, CheckResult, DiagnosticsReport, LambdaRule,
    SeriesClassification, SobolevScaleSpec,
};
use kernelpath::expansion::{newton_basis, p_greedy_select, GreedyStop};
use kernelpath::io::{
    file_sha256, read_basis, write_basis, write_certificate, write_ensemble_binary,
    write_ensemble_csv, write_sidecar, EnsembleFormat, EnsembleSidecar,
};
use kernelpath::mercer::{eig_decay_fit, kl_basis, nystrom_eigs, QuadratureGrid};
use kernelpath::sampler::{path_ensemble, PathSample};
use kernelpath::{Error, ExpansionBasis, GreedySelection, NodeSet, Result};

use crate::config::{ExpansionKind, GapConfig, RunConfig};

fn ensure_out_dir(config: &RunConfig) -> Result<PathBuf> {
    let dir = config.outputs.dir.clone();
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn greedy_selection(config: &RunConfig) -> Result<GreedySelection> {
    let candidates = config.candidates.to_nodes(&config.domain)?;
    p_greedy_select(
        &config.kernel,
        &candidates,
        GreedyStop {
            max_n: config.expansion.n.min(candidates.len()),
            tol: config.expansion.greedy_tol,
        },
    )
}

fn build_newton(config: &RunConfig) -> Result<(ExpansionBasis, GreedySelection)> {
    let selection = greedy_selection(config)?;
    let basis = newton_basis(&config.kernel, &selection.nodes)?;
    Ok((basis, selection))
}

fn build_kl(config: &RunConfig) -> Result<ExpansionBasis> {
    let grid = QuadratureGrid::build(
        config.expansion.quadrature_rule,
        &config.domain,
        config.expansion.quadrature_points,
    )?;
    let eigs = nystrom_eigs(&config.kernel, &grid, config.expansion.n.min(grid.len()))?;
    kl_basis(&eigs, &config.kernel)
}

fn build_basis(config: &RunConfig) -> Result<ExpansionBasis> {
    match config.expansion.kind {
        ExpansionKind::Newton => Ok(build_newton(config)?.0),
        ExpansionKind::Kl => build_kl(config),
    }
}

fn write_nodes_csv(nodes: &NodeSet, indices: &[usize], path: &Path) -> Result<()> {
    let mut out = String::from("step,candidate_index,coords\n");
    for (step, (&idx, point)) in indices.iter().zip(nodes.iter()).enumerate() {
        let coords: Vec<String> = point.iter().map(|c| format!("{c}")).collect();
        out.push_str(&format!("{},{},{}\n", step + 1, idx, coords.join(";")));
    }
    fs::write(path, out)?;
    Ok(())
}

/// `greedy`: select nodes by the P-greedy rule; write the node list and the
/// per-step sup-residual decay table.
pub fn cmd_greedy(config: &RunConfig) -> Result<u8> {
    let dir = ensure_out_dir(config)?;
    let selection = greedy_selection(config)?;
    write_nodes_csv(
        &selection.nodes,
        &selection.indices,
        &dir.join("nodes.csv"),
    )?;
    let mut table = String::from("step,sup_residual\n");
    for (step, r) in selection.sup_residuals.iter().enumerate() {
        table.push_str(&format!("{},{r}\n", step + 1));
    }
    fs::write(dir.join("residual_decay.csv"), table)?;
    println!(
        "greedy: selected {} nodes, final sup residual {:.6e}",
        selection.nodes.len(),
        selection.sup_residuals.last().copied().unwrap_or(f64::NAN)
    );
    Ok(0)
}

/// `basis`: build a Newton or KL basis per the config and export it.
pub fn cmd_basis(config: &RunConfig) -> Result<u8> {
    let dir = ensure_out_dir(config)?;
    let basis = build_basis(config)?;
    let path = dir.join("basis.kpb");
    write_basis(&basis, &path)?;
    println!(
        "basis: kind {:?}, size {}, {} centers -> {}",
        basis.kind(),
        basis.size(),
        basis.centers().len(),
        path.display()
    );
    Ok(0)
}

/// `sample`: generate a path ensemble and its truncation-variance
/// certificate; artifacts are deterministic given config and seed.
pub fn cmd_sample(
    config: &RunConfig,
    format: EnsembleFormat,
    basis_file: Option<&Path>,
    zero_innovations: bool,
) -> Result<u8> {
    let dir = ensure_out_dir(config)?;
    let basis = match basis_file {
        Some(path) => read_basis(path)?,
        None => build_basis(config)?,
    };
    if config.expansion.n > basis.size() {
        return Err(Error::InvalidSpec(format!(
            "truncation {} exceeds basis size {}",
            config.expansion.n,
            basis.size()
        )));
    }
    let n_trunc = config.expansion.n;
    let basis_path = dir.join("basis.kpb");
    write_basis(&basis, &basis_path)?;
    let basis = Arc::new(basis);

    let grid = config.eval_grid.to_nodes(&config.domain)?;
    let spec = config.innovations.to_spec();
    let m = config.ensemble.m;

    let ensemble = if zero_innovations {
        // test hook: all-zero innovations, every path is the zero function
        let path = PathSample::with_innovations(
            Arc::clone(&basis),
            n_trunc,
            vec![0.0; n_trunc],
            spec,
        )?;
        let row = path.eval_many(&grid)?;
        let mut values = Vec::with_capacity(m * grid.len());
        for _ in 0..m {
            values.extend_from_slice(&row);
        }
        kernelpath::sampler::Ensemble::from_values(values, m, grid.len())?
    } else {
        path_ensemble(&basis, n_trunc, &spec, m, &grid)?
    };

    let (data_name, data_path) = match format {
        EnsembleFormat::Bin => ("ensemble.bin", dir.join("ensemble.bin")),
        EnsembleFormat::Csv => ("ensemble.csv", dir.join("ensemble.csv")),
    };
    match format {
        EnsembleFormat::Bin => write_ensemble_binary(&ensemble, &data_path)?,
        EnsembleFormat::Csv => write_ensemble_csv(&ensemble, &data_path)?,
    }

    let mut residuals = Vec::with_capacity(grid.len());
    for x in grid.iter() {
        residuals.push(basis.residual_variance(n_trunc, x)?);
    }
    write_certificate(&grid, &residuals, &dir.join("certificate.csv"))?;

    let sidecar = EnsembleSidecar {
        schema_version: 1,
        kernel: config.kernel.clone(),
        domain: config.domain.clone(),
        grid_dim: grid.dim(),
        grid_points: grid.flat().to_vec(),
        format,
        dist: spec.dist,
        seed: spec.seed,
        stream_start: spec.stream,
        n_paths: m,
        n_trunc,
        basis_sha256: file_sha256(&basis_path)?,
        data_sha256: file_sha256(&data_path)?,
    };
    write_sidecar(&sidecar, &dir.join("ensemble.json"))?;
    println!(
        "sample: {m} paths x {} points ({data_name}), certificate.csv, sidecar ensemble.json",
        grid.len()
    );
    Ok(0)
}

/// `mercer`: Nyström eigensystem table and decay-exponent fit.
pub fn cmd_mercer(config: &RunConfig) -> Result<u8> {
    let dir = ensure_out_dir(config)?;
    let grid = QuadratureGrid::build(
        config.expansion.quadrature_rule,
        &config.domain,
        config.expansion.quadrature_points,
    )?;
    let eigs = nystrom_eigs(&config.kernel, &grid, config.expansion.n.min(grid.len()))?;
    let mut table = String::from("n,lambda\n");
    for (i, l) in eigs.lambdas.iter().enumerate() {
        table.push_str(&format!("{},{l}\n", i + 1));
    }
    fs::write(dir.join("eigenvalues.csv"), table)?;

    let fit_hi = eigs.len().min(40);
    let summary = if fit_hi >= 8 {
        let m_hat = eig_decay_fit(&eigs.lambdas, config.kernel.dim, (5, fit_hi))?;
        println!(
            "mercer: {} eigenpairs, decay fit m = {m_hat:.4} over n in [5, {fit_hi}]",
            eigs.len()
        );
        serde_json::json!({
            "n_eigs": eigs.len(),
            "lambda_1": eigs.lambdas[0],
            "decay_fit_m": m_hat,
            "fit_range": [5, fit_hi],
        })
    } else {
        println!("mercer: {} eigenpairs (too few for a decay fit)", eigs.len());
        serde_json::json!({ "n_eigs": eigs.len(), "lambda_1": eigs.lambdas[0] })
    };
    fs::write(
        dir.join("mercer.json"),
        serde_json::to_string_pretty(&summary)
            .map_err(|e| Error::Format(format!("summary encoding failed: {e}")))?,
    )?;
    Ok(0)
}

fn gap_table(gap: &GapConfig) -> Result<(String, Vec<(f64, SeriesClassification)>)> {
    let mut rows = Vec::with_capacity(gap.probes.len());
    let mut table = String::from("p,exponent,classification\n");
    for &p in &gap.probes {
        let probe = sobolev_membership_series(
            &SobolevScaleSpec {
                m: gap.m,
                p,
                dim: gap.dim,
                lambda_rule: LambdaRule::Power,
            },
            gap.n_max,
        )?;
        let label = match probe.classification {
            SeriesClassification::Converges => "converges",
            SeriesClassification::Diverges => "diverges",
            SeriesClassification::Indeterminate => "indeterminate",
        };
        table.push_str(&format!("{p},{},{label}\n", probe.exponent));
        rows.push((p, probe.classification));
    }
    Ok((table, rows))
}

/// `gap`: emit the Sobolev-membership classification table for the probe
/// smoothness values of the config.
pub fn cmd_gap(config: &RunConfig) -> Result<u8> {
    let gap = config.gap.as_ref().ok_or_else(|| {
        Error::InvalidSpec("gap command needs a `gap` section in the config".into())
    })?;
    let dir = ensure_out_dir(config)?;
    let (table, rows) = gap_table(gap)?;
    fs::write(dir.join("gap.csv"), &table)?;
    print!("{table}");
    let boundary = gap.m - gap.dim as f64 / 2.0;
    println!("boundary p = m - d/2 = {boundary}");
    let _ = rows;
    Ok(0)
}

fn report_paths(dir: &Path, suite: &str) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("{suite}_report.txt")),
        dir.join(format!("{suite}_report.json")),
    )
}

fn emit_reports(dir: &Path, suite: &str, reports: &[DiagnosticsReport]) -> Result<bool> {
    let (txt_path, json_path) = report_paths(dir, suite);
    let mut txt = String::new();
    for r in reports {
        txt.push_str(&r.render_table());
        txt.push('\n');
    }
    fs::write(&txt_path, &txt)?;
    let json = serde_json::to_string_pretty(reports)
        .map_err(|e| Error::Format(format!("report encoding failed: {e}")))?;
    fs::write(&json_path, json)?;
    print!("{txt}");
    Ok(reports.iter().all(|r| r.passed()))
}

fn suite_default(config: &RunConfig) -> Result<Vec<DiagnosticsReport>> {
    let mut reports = Vec::new();

    // kernel-level continuity along shrinking steps
    let h_seq: Vec<f64> = (0..10).map(|k| 1e-1 * 0.5_f64.powi(k)).collect();
    let origin = vec![0.0; config.kernel.dim];
    reports.push(continuity_probe(&config.kernel, &origin, &h_seq)?);

    // pointwise Parseval bound for the configured Newton basis
    let (newton, _) = build_newton(config)?;
    let grid = config.eval_grid.to_nodes(&config.domain)?;
    reports.push(parseval_check(&newton, &grid)?);

    // linear divergence of the squared native norm
    reports.push(native_norm_growth(&config.innovations.to_spec(), 10_000)?);

    // deterministic cross-expansion agreement Newton vs KL
    let kl = build_kl(config)?;
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..4)
        .map(|i| {
            let t = (i as f64 + 1.0) / 5.0;
            let a: Vec<f64> = config
                .domain
                .lower
                .iter()
                .zip(&config.domain.upper)
                .map(|(lo, hi)| lo + t * (hi - lo))
                .collect();
            let b: Vec<f64> = config
                .domain
                .lower
                .iter()
                .zip(&config.domain.upper)
                .map(|(lo, hi)| lo + (1.0 - t) * (hi - lo))
                .collect();
            (a, b)
        })
        .collect();
    reports.push(w_independence_check(&newton, &kl, &pairs)?);

    // Monte-Carlo covariance reproduction at node pairs (full truncation)
    let basis = Arc::new(newton);
    let spec = config.innovations.to_spec();
    let m = config.ensemble.m.max(2000);
    let k = basis.centers().len().min(5);
    let points = basis.centers().select(&(0..k).collect::<Vec<_>>())?;
    let ens = path_ensemble(&basis, basis.size(), &spec, m, &points)?;
    let mut report = DiagnosticsReport::new("covariance reproduction at nodes").with_seed(&spec);
    for j in 0..k {
        for l in j..k {
            let truth = config
                .kernel
                .eval_pair(points.point(j), points.point(l))?;
            let sample = ens.covariance(j, l);
            let cjj = config.kernel.eval_pair(points.point(j), points.point(j))?;
            let cll = config.kernel.eval_pair(points.point(l), points.point(l))?;
            let se = ((cjj * cll + truth * truth) / (m as f64 - 1.0)).sqrt();
            report.push(CheckResult::bounded(
                &format!("cov_{j}_{l}"),
                (sample - truth).abs(),
                5.0 * se,
                format!("sample {sample:.6e} vs kernel {truth:.6e}, M = {m}"),
            ));
        }
    }
    reports.push(report);
    Ok(reports)
}

fn suite_gap(config: &RunConfig) -> Result<Vec<DiagnosticsReport>> {
    let gap = config.gap.as_ref().ok_or_else(|| {
        Error::InvalidSpec("gap suite needs a `gap` section in the config".into())
    })?;
    let (_, rows) = gap_table(gap)?;
    let boundary = gap.m - gap.dim as f64 / 2.0;
    let mut report = DiagnosticsReport::new("smoothness gap boundary");
    let mut misclassified = 0usize;
    for &(p, cls) in &rows {
        let want = if p < boundary {
            SeriesClassification::Converges
        } else {
            SeriesClassification::Diverges
        };
        if cls != want {
            misclassified += 1;
        }
    }
    report.push(CheckResult::bounded(
        "classification_matches_boundary",
        misclassified as f64,
        0.0,
        format!(
            "probes {:?} against boundary p = {boundary}",
            gap.probes
        ),
    ));
    Ok(vec![report])
}

fn suite_equivalence(config: &RunConfig) -> Result<Vec<DiagnosticsReport>> {
    let (newton, _) = build_newton(config)?;
    let kl = build_kl(config)?;
    let newton = Arc::new(newton);
    let kl = Arc::new(kl);
    let k = 5.min(newton.centers().len());
    let points = newton.centers().select(&(0..k).collect::<Vec<_>>())?;
    let report = cylinder_equivalence_test(
        &newton,
        &kl,
        &points,
        config.ensemble.m,
        &config.innovations.to_spec(),
    )?;
    Ok(vec![report])
}

/// `verify`: run a diagnostic suite, write text and JSON reports, exit 0
/// only when every asserted check passes.
pub fn cmd_verify(config: &RunConfig, suite: &str, basis_file: Option<&Path>) -> Result<u8> {
    let dir = ensure_out_dir(config)?;
    let mut reports = Vec::new();

    if let Some(path) = basis_file {
        // artifact integrity gate: checksum and readability
        let mut report = DiagnosticsReport::new("artifact integrity");
        match read_basis(path) {
            Ok(basis) => {
                report.push(CheckResult::bounded(
                    "basis_integrity",
                    0.0,
                    0.0,
                    format!(
                        "checksum verified: {} (kind {:?}, size {})",
                        path.display(),
                        basis.kind(),
                        basis.size()
                    ),
                ));
            }
            Err(e) => {
                report.push(CheckResult::bounded(
                    "basis_integrity",
                    1.0,
                    0.0,
                    format!("{e}"),
                ));
            }
        }
        reports.push(report);
    }

    let suite_reports = match suite {
        "default" => suite_default(config)?,
        "gap" => suite_gap(config)?,
        "equivalence" => suite_equivalence(config)?,
        other => {
            return Err(Error::InvalidSpec(format!(
                "unknown suite '{other}' (expected default, gap, or equivalence)"
            )))
        }
    };
    reports.extend(suite_reports);

    let passed = emit_reports(&dir, suite, &reports)?;
    Ok(if passed { 0 } else { 1 })
}
