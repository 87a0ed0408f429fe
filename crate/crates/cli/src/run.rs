//! Pipelines behind each command. Every run writes into one directory.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use hypercoarse::coarsening::{coarsen_multilevel, coarsen_rows, cssp_select};
use hypercoarse::metrics::{
    cssp_errors, mean_sv_error, projection_error_frobenius, projection_error_spectral,
    rayleigh_deviation, sparsifier_error, MetricsReport, ReportMeta,
};
use hypercoarse::mmio::{load_matrix_market, read_edge_list, read_vector, save_matrix_market, write_dense_array, write_vector};
use hypercoarse::sampling::{
    column_norm_sample, leverage_sample, rand_plus_coarsen, uniform_sample, Axis, LeverageMode, SamplingConfig,
};
use hypercoarse::svd::{dense_svd_with_cap, low_rank_update, subspace_iterate, zha_simon_update, SvdBackend};
use hypercoarse::{incidence_matrix, laplacian, ColumnMap, ColumnScaling, DenseMatrix, PartialSvd, SparseMatrix};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::spec::{CommandKind, Method, Plan, Refine, RunSpec};

/// Summary returned to the caller; the artifacts are on disk.
#[derive(Clone, Debug, Default)]
pub struct RunOutcome {
    pub out_dir: Option<PathBuf>,
    pub report: Option<MetricsReport>,
    /// Lines meant for standard output.
    pub lines: Vec<String>,
    /// False when `verify-bounds` found a violation.
    pub passed: bool,
}

/// Validates `spec`, runs it, and writes artifacts into `out_dir`.
///
/// `verify-bounds` writes files only when a directory is given.
pub fn run(spec: &RunSpec, out_dir: Option<&Path>) -> CliResult<RunOutcome> {
    let plan = spec.resolve()?;
    let out_dir = match (plan.command, out_dir) {
        (_, Some(d)) => Some(d.to_path_buf()),
        (CommandKind::VerifyBounds, None) => None,
        (_, None) => return Err(CliError::Config("no output directory (use --out or HYPERCOARSE_OUT)".into())),
    };
    if let Some(dir) = &out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("runspec.json"), serde_json::to_string_pretty(spec)? + "\n")?;
    }
    let start = Instant::now();
    let mut outcome = match plan.command {
        CommandKind::Coarsen => run_coarsen(&plan, out_dir.as_deref().unwrap_or(Path::new(".")))?,
        CommandKind::Svd => run_svd(&plan, out_dir.as_deref().unwrap_or(Path::new(".")))?,
        CommandKind::Cssp => run_cssp(&plan, out_dir.as_deref().unwrap_or(Path::new(".")))?,
        CommandKind::Sparsify => run_sparsify(&plan, out_dir.as_deref().unwrap_or(Path::new(".")))?,
        CommandKind::VerifyBounds => run_verify(&plan, out_dir.as_deref())?,
    };
    outcome.out_dir = out_dir.clone();
    if let (Some(report), Some(dir)) = (outcome.report.as_mut(), &out_dir) {
        report.timing.wall_time_secs = start.elapsed().as_secs_f64();
        report.save(dir.join("report.json"))?;
        std::fs::write(dir.join("report.csv"), report.to_csv())?;
    }
    Ok(outcome)
}

fn meta(plan: &Plan) -> ReportMeta {
    ReportMeta {
        command: plan.command.name().to_string(),
        method: plan.method.name().to_string(),
        input: plan.input.display().to_string(),
        c: plan.c,
        k: plan.single_k(),
        levels: plan.method.coarsens().then_some(plan.schedule.len()),
        epsilons: plan.schedule.clone(),
        seed: plan.seed,
        refine: (plan.command == CommandKind::Svd).then(|| plan.refine.to_string()),
        notes: Default::default(),
    }
}

fn backend(plan: &Plan) -> SvdBackend {
    SvdBackend {
        dense_cap: plan.dense_cap,
        seed: plan.seed,
        ..SvdBackend::default()
    }
}

fn write_dense(path: PathBuf, m: &DenseMatrix) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_dense_array(&mut w, m)?;
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> CliResult<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn run_coarsen(plan: &Plan, dir: &Path) -> CliResult<RunOutcome> {
    let a = load_matrix_market(&plan.input)?;
    let h = coarsen_multilevel(&a, &plan.coarsen_config())?;
    for level in &h.levels {
        write_json(dir.join(format!("level_{}.json", level.level)), &level.to_map())?;
        save_matrix_market(dir.join(format!("level_{}.mtx", level.level)), &level.coarse)?;
    }
    let mut report = MetricsReport::new(meta(plan));
    let c = h.coarsest();
    if a.nnz() > 0 {
        report.metrics.nnz_ratio = Some(c.nnz() as f64 / a.nnz() as f64);
        if plan.scaling == ColumnScaling::Scaled {
            report.metrics.rayleigh_max_dev = Some(rayleigh_deviation(&a, c, plan.probes, plan.seed)?.max);
        }
    }
    let counts: Vec<String> = h.column_counts().iter().map(ToString::to_string).collect();
    report.meta.notes.insert("column_counts".into(), counts.join(";"));
    if let Some(s) = h.stopped_at {
        report.meta.notes.insert("stopped_at_level".into(), s.to_string());
    }
    let lines = vec![format!("columns per level: {}", counts.join(" -> "))];
    Ok(RunOutcome {
        report: Some(report),
        lines,
        passed: true,
        ..Default::default()
    })
}

/// Matrix whose left singular vectors stand in for those of `A`, plus the
/// original columns it was built from and the singular value rescaling.
struct Sketch {
    matrix: SparseMatrix,
    columns: Vec<usize>,
    sigma_scale: f64,
}

fn sketch_columns(plan: &Plan, a: &SparseMatrix, k: usize, be: &SvdBackend) -> CliResult<Sketch> {
    let n = a.ncols();
    Ok(match plan.method {
        Method::Coarsen => {
            let h = coarsen_multilevel(a, &plan.coarsen_config())?;
            Sketch {
                columns: h.original_columns(),
                matrix: h.coarsest().clone(),
                sigma_scale: 1.0,
            }
        }
        Method::RandCoarsen => {
            let h = rand_plus_coarsen(a, &plan.coarsen_config(), plan.seed)?;
            // the half-sample carries about ns/n of the energy
            let scale = (n as f64 / h.base.ncols() as f64).sqrt();
            Sketch {
                columns: h.original_columns(),
                matrix: h.coarsest().clone(),
                sigma_scale: scale,
            }
        }
        Method::Colnorm => {
            let s = column_norm_sample(a, &SamplingConfig::new(plan.c.unwrap_or(1), plan.seed))?;
            Sketch {
                matrix: s.matrix,
                columns: s.indices,
                sigma_scale: 1.0,
            }
        }
        Method::Uniform => {
            let c = plan.c.unwrap_or(1);
            let s = uniform_sample(a, c, plan.seed)?;
            Sketch {
                matrix: s.matrix,
                columns: s.indices,
                sigma_scale: (n as f64 / c as f64).sqrt(),
            }
        }
        Method::Leverage => {
            let s = leverage_sample(a, plan.c.unwrap_or(1), k, Axis::Columns, LeverageMode::Sketch, plan.seed, be)?;
            Sketch {
                matrix: s.matrix,
                columns: s.indices,
                sigma_scale: 1.0,
            }
        }
    })
}

/// Rank-k factors of `A` from the exact factors of its retained columns,
/// updated with the remaining columns appended.
fn update_from_retained(a: &SparseMatrix, retained: &[usize], k: usize, refine: Refine, be: &SvdBackend) -> CliResult<PartialSvd> {
    let mut kept = retained.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let mut in_kept = vec![false; a.ncols()];
    for &j in &kept {
        in_kept[j] = true;
    }
    let rest: Vec<usize> = (0..a.ncols()).filter(|&j| !in_kept[j]).collect();
    let a_s = a.select_columns(&kept)?;
    let base = be.top_k(&a_s, k.min(a_s.nrows().min(a_s.ncols())))?;
    let d = a.select_columns(&rest)?;
    let updated = match refine {
        Refine::LowRank(l) => low_rank_update(&base, &d, k, l.min(rest.len().max(1)))?,
        _ => zha_simon_update(&base, &d, k)?,
    };
    // rows of V follow the order [kept, rest]
    let order: Vec<usize> = kept.into_iter().chain(rest).collect();
    let mut v = DenseMatrix::zeros(a.ncols(), updated.v.ncols());
    for (pos, &j) in order.iter().enumerate() {
        v.set_row(j, &updated.v.row(pos));
    }
    Ok(PartialSvd { v, ..updated })
}

fn run_svd(plan: &Plan, dir: &Path) -> CliResult<RunOutcome> {
    let a = load_matrix_market(&plan.input)?;
    let k = plan.single_k().unwrap_or(1);
    let (m, n) = (a.nrows(), a.ncols());
    if k > m.min(n) {
        return Err(CliError::Config(format!("k = {k} exceeds min({m}, {n})")));
    }
    let be = backend(plan);
    let sketch = sketch_columns(plan, &a, k, &be)?;
    let c = &sketch.matrix;
    let kc = k.min(c.nrows().min(c.ncols()));
    let approx = be.top_k(c, kc)?;
    let mut report = MetricsReport::new(meta(plan));

    let result = match plan.refine {
        Refine::None => PartialSvd {
            sigma: approx.sigma.iter().map(|s| s * sketch.sigma_scale).collect(),
            v: DenseMatrix::zeros(n, 0),
            u: approx.u,
        },
        Refine::Subspace => subspace_iterate(&approx.u, &a, plan.iters)?.truncate(k),
        Refine::ZhaSimon | Refine::LowRank(_) => update_from_retained(&a, &sketch.columns, k, plan.refine, &be)?,
    };

    write_dense(dir.join("U.mtx"), &result.u)?;
    if result.v.ncols() > 0 {
        write_dense(dir.join("V.mtx"), &result.v)?;
    } else {
        report
            .meta
            .notes
            .insert("V".into(), "right singular vectors are not computed without refinement".into());
    }
    {
        let mut w = BufWriter::new(File::create(dir.join("sigma.txt"))?);
        write_vector(&mut w, &result.sigma)?;
        w.flush()?;
    }
    write_json(dir.join("columns.json"), &ColumnMap::for_indices(&sketch.columns))?;

    report.metrics.error1_frobenius = Some(projection_error_frobenius(&a, &result.u)?);
    report.metrics.nnz_ratio = Some(c.nnz() as f64 / a.nnz().max(1) as f64);
    report.metrics.rayleigh_max_dev = Some(rayleigh_deviation(&a, c, plan.probes, plan.seed)?.max);

    let under_cap = m.min(n) <= plan.dense_cap;
    let reference = match &plan.reference {
        Some(path) => Some(read_vector(File::open(path)?)?),
        None if under_cap => Some(dense_svd_with_cap(&a.to_dense(), plan.dense_cap)?.sigma),
        None => None,
    };
    match reference {
        Some(reference) => {
            let mut sigma = result.sigma.clone();
            sigma.resize(k, 0.0);
            report.metrics.error2_mean_sv = Some(mean_sv_error(&reference, &sigma, k)?);
        }
        None => {
            report
                .meta
                .notes
                .insert("error2".into(), "reference spectrum unavailable".into());
        }
    }
    if under_cap {
        report.metrics.spectral_error = Some(projection_error_spectral(&a, &result.u)?);
    }
    let lines = vec![format!(
        "error1 = {}  error2 = {}",
        fmt_metric(report.metrics.error1_frobenius),
        fmt_metric(report.metrics.error2_mean_sv)
    )];
    Ok(RunOutcome {
        report: Some(report),
        lines,
        passed: true,
        ..Default::default()
    })
}

fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.6e}"))
}

fn run_cssp(plan: &Plan, dir: &Path) -> CliResult<RunOutcome> {
    let a = load_matrix_market(&plan.input)?;
    let be = backend(plan);
    let indices = match plan.method {
        Method::Coarsen => cssp_select(&a, &plan.coarsen_config())?.indices,
        Method::RandCoarsen => rand_plus_coarsen(&a, &plan.coarsen_config(), plan.seed)?.original_columns(),
        Method::Colnorm => {
            let mut cfg = SamplingConfig::new(plan.c.unwrap_or(1), plan.seed);
            cfg.with_replacement = false;
            cfg.scale_columns = false;
            column_norm_sample(&a, &cfg)?.indices
        }
        Method::Uniform => uniform_sample(&a, plan.c.unwrap_or(1), plan.seed)?.indices,
        Method::Leverage => {
            let k = plan.single_k().unwrap_or(1);
            leverage_sample(&a, plan.c.unwrap_or(1), k, Axis::Columns, LeverageMode::Cssp, plan.seed, &be)?.indices
        }
    };
    let c = a.select_columns(&indices)?;
    write_json(dir.join("selected.json"), &ColumnMap::for_indices(&indices))?;
    save_matrix_market(dir.join("C.mtx"), &c)?;
    let errs = cssp_errors(&a, &c, plan.integer)?;
    let mut report = MetricsReport::new(meta(plan));
    report.meta.c = Some(indices.len());
    report.metrics.cssp_frob_error = Some(errs.frobenius);
    report.metrics.cssp_nnz_error = Some(errs.nnz_ratio);
    let lines = vec![format!(
        "selected {} columns  frobenius = {:.6e}  nnz ratio = {:.6e}",
        indices.len(),
        errs.frobenius,
        errs.nnz_ratio
    )];
    Ok(RunOutcome {
        report: Some(report),
        lines,
        passed: true,
        ..Default::default()
    })
}

fn run_sparsify(plan: &Plan, dir: &Path) -> CliResult<RunOutcome> {
    let graph = read_edge_list(File::open(&plan.input)?)?;
    let b = incidence_matrix(&graph)?;
    let k_full = laplacian(&b);
    let rank_b = graph.vertex_count() - graph.component_count();
    let be = backend(plan);
    let (b_tilde, rows) = match plan.method {
        Method::Coarsen => {
            let rc = coarsen_rows(&b, &plan.coarsen_config())?;
            (rc.reduced, rc.rows)
        }
        Method::Leverage => {
            let k = plan.single_k().unwrap_or(rank_b.max(1));
            let s = leverage_sample(&b, plan.c.unwrap_or(1), k, Axis::Rows, LeverageMode::Sketch, plan.seed, &be)?;
            (s.matrix, s.indices)
        }
        Method::Colnorm => {
            let s = column_norm_sample(&b.transpose(), &SamplingConfig::new(plan.c.unwrap_or(1), plan.seed))?;
            (s.matrix.transpose(), s.indices)
        }
        Method::Uniform => {
            let c = plan.c.unwrap_or(1);
            let s = uniform_sample(&b.transpose(), c, plan.seed)?;
            let f = (b.nrows() as f64 / c as f64).sqrt();
            let scaled = s.matrix.scale_columns(&vec![f; c])?;
            (scaled.transpose(), s.indices)
        }
        Method::RandCoarsen => unreachable!("rejected during validation"),
    };
    let k_tilde = laplacian(&b_tilde);
    let r = plan.rank.unwrap_or(b_tilde.nrows().min(rank_b));
    if r == 0 {
        return Err(CliError::Numerical("graph has no edges; the sparsifier error is undefined".into()));
    }
    save_matrix_market(dir.join("K_tilde.mtx"), &k_tilde)?;
    save_matrix_market(dir.join("B_tilde.mtx"), &b_tilde)?;
    write_json(dir.join("rows.json"), &ColumnMap::for_indices(&rows))?;
    let err = sparsifier_error(&k_full, &k_tilde, r, &be)?;
    let mut report = MetricsReport::new(meta(plan));
    report.meta.notes.insert("r".into(), r.to_string());
    report.metrics.sparsifier_sv_error = Some(err.error);
    report.metrics.nnz_ratio = Some(err.nnz_ratio);
    report.metrics.rayleigh_max_dev =
        Some(rayleigh_deviation(&b.transpose(), &b_tilde.transpose(), plan.probes, plan.seed)?.max);
    let lines = vec![format!(
        "kept {} of {} edges  sv error = {:.6e}  nnz ratio = {:.6e}",
        b_tilde.nrows(),
        b.nrows(),
        err.error,
        err.nnz_ratio
    )];
    Ok(RunOutcome {
        report: Some(report),
        lines,
        passed: true,
        ..Default::default()
    })
}

/// One checked inequality `lhs ≤ bound`, both divided by `‖A‖_F²`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub epsilon: f64,
    pub k: Option<usize>,
    pub lhs: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn new(name: &str, epsilon: f64, k: Option<usize>, lhs: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            epsilon,
            k,
            lhs,
            bound,
            margin: bound - lhs,
            pass: lhs <= bound,
        }
    }

    fn line(&self) -> String {
        let k = self.k.map_or(String::new(), |k| format!(" k={k}"));
        format!(
            "{} eps={}{}: value={:.6e} bound={:.6e} margin={:.6e} {}",
            self.name,
            self.epsilon,
            k,
            self.lhs,
            self.bound,
            self.margin,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

fn run_verify(plan: &Plan, dir: Option<&Path>) -> CliResult<RunOutcome> {
    let a = load_matrix_market(&plan.input)?;
    let fro2 = a.frobenius_norm_squared();
    if !(fro2 > 0.0) {
        return Err(CliError::Numerical("matrix has zero Frobenius norm".into()));
    }
    let (m, n) = (a.nrows(), a.ncols());
    if m.min(n) > plan.dense_cap {
        return Err(CliError::Config(format!(
            "min dimension {} exceeds the dense cap {}",
            m.min(n),
            plan.dense_cap
        )));
    }
    let svals = dense_svd_with_cap(&a.to_dense(), plan.dense_cap)?.sigma;
    let be = backend(plan);
    let mut checks = Vec::new();
    for &eps in &plan.schedule {
        let mut cfg = plan.coarsen_config();
        cfg.epsilon_schedule = vec![eps];
        let h = coarsen_multilevel(&a, &cfg)?;
        let c = h.coarsest();
        let dev = rayleigh_deviation(&a, c, plan.probes, plan.seed)?;
        checks.push(BoundCheck::new("rayleigh", eps, None, dev.max, 3.0 * eps));
        for &k in &plan.k {
            if k > c.nrows().min(c.ncols()) || k > m.min(n) {
                continue;
            }
            let hk = be.top_k(c, k)?.u;
            let tail: f64 = svals.iter().skip(k).map(|s| s * s).sum();
            let next = svals.get(k).map_or(0.0, |s| s * s);
            let ef = projection_error_frobenius(&a, &hk)?;
            checks.push(BoundCheck::new(
                "frobenius",
                eps,
                Some(k),
                ef * ef / fro2,
                (tail + 6.0 * k as f64 * eps * fro2) / fro2,
            ));
            let es = projection_error_spectral(&a, &hk)?;
            checks.push(BoundCheck::new(
                "spectral",
                eps,
                Some(k),
                es * es / fro2,
                (next + 6.0 * eps * fro2) / fro2,
            ));
        }
    }
    let passed = checks.iter().all(|c| c.pass);
    if let Some(dir) = dir {
        write_json(dir.join("verify.json"), &checks)?;
    }
    let mut lines: Vec<String> = checks.iter().map(BoundCheck::line).collect();
    let min_margin = checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    lines.push(format!(
        "{} checks, minimum margin {:.6e}: {}",
        checks.len(),
        min_margin,
        if passed { "all bounds hold" } else { "VIOLATION" }
    ));
    Ok(RunOutcome {
        lines,
        passed,
        ..Default::default()
    })
}

/// Reads reports and joins them into one CSV table.
pub fn report_merge(paths: &[PathBuf]) -> CliResult<String> {
    if paths.is_empty() {
        return Err(CliError::Config("merge needs at least one report".into()));
    }
    let mut reports = Vec::with_capacity(paths.len());
    for p in paths {
        let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        let report = MetricsReport::from_json(&text).map_err(|e| match e {
            hypercoarse::Error::Config(msg) => CliError::Config(format!("merge error in {}: {msg}", p.display())),
            other => CliError::Io(format!("{}: {other}", p.display())),
        })?;
        reports.push(report);
    }
    Ok(hypercoarse::metrics::merge_reports(&reports))
}
