//! Executes a validated plan and writes its CSV, SVG and manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use qpar::experiments::{
    averaged_trace, cross_term_residual, ensemble_trace, max_abs_deviation, rms_deviation,
    EnsembleCaps, PolarizationTrace,
};
use qpar::propagators::PreparedPropagator;

use crate::config::{validate, Mode, RunPlan};
use crate::csv::{emit_csv, Column};
use crate::error::{CliError, CliResult};
use crate::manifest::{
    sha256_file, CompareSummary, DrawEntry, OutputEntry, RunManifest, TraceDiagnostics,
};
use crate::svg::{emit_svg_plot, PlotStyle};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory that relative output paths resolve against.
    pub out_dir: PathBuf,
    /// Worker threads for this run; `None` uses the global pool.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub csv_path: PathBuf,
    pub svg_path: Option<PathBuf>,
    pub manifest_path: PathBuf,
}

/// Traces computed by a run, before anything is written.
#[derive(Debug, Clone)]
pub struct Computed {
    pub columns: Vec<Column>,
    /// Legend text for each column.
    pub legends: Vec<String>,
    pub traces: Vec<TraceDiagnostics>,
    pub draws: Vec<DrawEntry>,
    pub comparison: Option<CompareSummary>,
}

fn with_hint(e: qpar::Error, plan: &RunPlan) -> CliError {
    match e {
        qpar::Error::Capability(msg) => CliError::Capability(format!(
            "{msg}\nhint: M = {} here; switch propagator.kind to \"trotter\", reduce system.M, \
             or use pure/averaged mode, which has no ensemble cap",
            plan.network.m_sites()
        )),
        other => other.into(),
    }
}

fn diagnostics(
    column: &str,
    trace: &PolarizationTrace,
    effective_samples: Option<u64>,
) -> TraceDiagnostics {
    TraceDiagnostics {
        column: column.to_string(),
        label: trace.label(),
        propagator: trace.meta.propagator.to_string(),
        effective_dt: trace.meta.effective_dt,
        trotter_steps: trace.meta.trotter_steps,
        max_norm_drift: trace.meta.max_norm_drift,
        max_magnetization_drift: trace.meta.max_magnetization_drift,
        effective_samples,
    }
}

/// Computes every trace the plan asks for, in the calling thread pool.
pub fn compute(plan: &RunPlan) -> CliResult<Computed> {
    let mut out = Computed {
        columns: Vec::new(),
        legends: Vec::new(),
        traces: Vec::new(),
        draws: Vec::new(),
        comparison: None,
    };
    if let Some(rec) = &plan.network_draws {
        out.draws.push(DrawEntry::new("network couplings", rec));
    }

    let ensemble = if matches!(plan.config.mode, Mode::Oracle | Mode::Compare) {
        let trace = ensemble_trace(
            &plan.network,
            plan.excited_site,
            plan.observed_site,
            &plan.grid,
            plan.propagator,
            EnsembleCaps::default(),
        )
        .map_err(|e| with_hint(e, plan))?;
        out.traces.push(diagnostics("P_ens", &trace, None));
        Some(trace)
    } else {
        None
    };

    let mut pure = Vec::new();
    if !plan.series.is_empty() {
        let prepared = PreparedPropagator::new(&plan.network, plan.propagator)
            .map_err(|e| with_hint(e, plan))?;
        for s in &plan.series {
            log::info!("computing {} ({} realization(s))", s.column(), s.n_alpha);
            let (trace, stats) = averaged_trace(
                &prepared,
                s.kind,
                plan.excited_site,
                plan.observed_site,
                &plan.grid,
                s.n_alpha,
                plan.master_seed,
            )?;
            let column = if plan.config.mode == Mode::Compare {
                "P_pure".to_string()
            } else {
                s.column()
            };
            for (r, rec) in trace.meta.phase_records.iter().enumerate() {
                out.draws.push(DrawEntry::new(
                    format!("{column} realization {r} phases"),
                    rec,
                ));
            }
            out.traces
                .push(diagnostics(&column, &trace, Some(stats.effective_samples)));
            pure.push((column, trace));
        }
    }

    match (&ensemble, plan.config.mode) {
        (Some(ens), Mode::Compare) => {
            let (_, p) = &pure[0];
            let residual = cross_term_residual(p, ens)?;
            out.comparison = Some(CompareSummary {
                rms_deviation: rms_deviation(p, ens)?,
                max_abs_deviation: max_abs_deviation(p, ens)?,
                residual_rms: residual.rms,
                residual_max_abs: residual.max_abs,
            });
            out.columns.push(Column::new("P_ens", ens.values.clone()));
            out.legends.push(ens.label());
            out.columns.push(Column::new("P_pure", p.values.clone()));
            out.legends.push(p.label());
            out.columns.push(Column::new("residual", residual.values));
            out.legends.push("residual (W units)".into());
        }
        (Some(ens), _) => {
            out.columns.push(Column::new("P_ens", ens.values.clone()));
            out.legends.push(ens.label());
        }
        (None, _) => {
            for (column, trace) in pure {
                out.legends.push(trace.label());
                out.columns.push(Column::new(column, trace.values));
            }
        }
    }
    Ok(out)
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| {
                    CliError::Capability(format!("cannot start {n} worker threads: {e}"))
                })?;
            Ok(pool.install(f))
        }
    }
}

fn resolve(out_dir: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out_dir.join(p)
    }
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    Ok(())
}

/// Runs `plan` and writes its outputs under `opts.out_dir`.
pub fn run(plan: &RunPlan, opts: &RunOptions) -> CliResult<RunOutcome> {
    let csv_path = resolve(&opts.out_dir, plan.csv_path());
    let svg_path = plan.svg_path().map(|p| resolve(&opts.out_dir, p));
    let manifest_path = resolve(&opts.out_dir, plan.manifest_path());
    for p in [Some(&csv_path), svg_path.as_ref(), Some(&manifest_path)]
        .into_iter()
        .flatten()
    {
        ensure_parent(p)?;
    }

    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let clock = Instant::now();
    let computed = in_pool(opts.threads, || compute(plan))??;

    emit_csv(&csv_path, &plan.grid, &computed.columns)?;
    let mut outputs = vec![OutputEntry {
        kind: "csv".into(),
        path: plan.csv_path().to_string(),
        sha256: sha256_file(&csv_path)?,
    }];
    if let (Some(path), Some(rel)) = (&svg_path, plan.svg_path()) {
        let series: Vec<Column> = computed
            .columns
            .iter()
            .zip(&computed.legends)
            .map(|(c, legend)| Column::new(legend.clone(), c.values.clone()))
            .collect();
        let style = PlotStyle {
            time_unit: plan.time_unit.to_string(),
            time_scale: plan.time_scale,
            title: Some(format!(
                "{} M={}",
                plan.network.topology(),
                plan.network.m_sites()
            )),
        };
        emit_svg_plot(path, &plan.grid.times(), &series, &style)?;
        outputs.push(OutputEntry {
            kind: "svg".into(),
            path: rel.to_string(),
            sha256: sha256_file(path)?,
        });
    }

    let manifest = RunManifest {
        tool: "qpar".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: plan.config.clone(),
        draws: computed.draws,
        threads: opts.threads,
        started_unix_seconds: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        traces: computed.traces,
        comparison: computed.comparison,
        outputs,
    };
    manifest.save(&manifest_path)?;
    Ok(RunOutcome {
        manifest,
        csv_path,
        svg_path,
        manifest_path,
    })
}

/// Result of replaying a manifest.
#[derive(Debug, Clone)]
pub struct Replay {
    pub outcome: RunOutcome,
    /// Whether the new CSV has the checksum recorded in the original manifest.
    pub csv_matches: bool,
}

/// Re-runs the config recorded in a manifest, writing under `opts.out_dir`.
pub fn rerun(manifest_path: &Path, opts: &RunOptions) -> CliResult<Replay> {
    let original = RunManifest::load(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let plan = validate(&original.config, base)?;
    let outcome = run(&plan, opts)?;
    let csv_matches = original.checksum("csv") == outcome.manifest.checksum("csv");
    Ok(Replay {
        outcome,
        csv_matches,
    })
}
