//! Run configuration: the JSON document, its defaults, and validation.
//!
//! A config validates to a [`RunPlan`], whose `config` has every default
//! filled in. Resolved configs validate to themselves, which is what makes
//! manifests re-runnable.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qpar::basis::MAX_SITES;
use qpar::experiments::TimeGrid;
use qpar::hamiltonian::{
    build_chain, build_ladder, build_star, load_edge_list, local_second_moment, AnisotropyKind,
    CouplingNetwork,
};
use qpar::propagators::{default_dt, Propagator, EXACT_MAX_SITES};
use qpar::states::StateKind;

use crate::error::{CliError, CliResult, FieldError};

pub const DEFAULT_CSV: &str = "trace.csv";
pub const DEFAULT_MANIFEST: &str = "manifest.json";
/// Chain, ladder and custom runs default to `60 / b` on 600 samples.
pub const DEFAULT_SPAN_BOND: f64 = 60.0;
pub const DEFAULT_SAMPLES_BOND: usize = 600;
/// Star runs default to `10 / sigma_0` on 400 samples.
pub const DEFAULT_SPAN_STAR: f64 = 10.0;
pub const DEFAULT_SAMPLES_STAR: usize = 400;
const MAX_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One realization of the initial state.
    Pure,
    /// Average over `n_alpha` realizations.
    Averaged,
    /// Brute-force ensemble only.
    Oracle,
    /// Ensemble, averaged pure state, and their residual.
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyName {
    Chain,
    Ladder,
    Star,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Entangled,
    Product,
    Basis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropagatorName {
    Exact,
    Trotter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub topology: TopologyName,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anisotropy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_file: Option<PathBuf>,
}

/// An additional averaged trace drawn from the same phase streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub kind: KindName,
    pub n_alpha: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub kind: KindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<usize>,
    /// Background index, for `kind = basis` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_alpha: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<SeriesConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorConfig {
    pub kind: PropagatorName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserveConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub system: SystemConfig,
    pub initial: InitialConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagator: Option<PropagatorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observe: Option<ObserveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config(&json_path(&e), e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn json_path(e: &serde_json::Error) -> String {
    format!("line {} column {}", e.line(), e.column())
}

/// One trace to compute from pure states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Series {
    pub kind: StateKind,
    pub n_alpha: usize,
}

impl Series {
    /// CSV column name, e.g. `P_product_N630`.
    pub fn column(&self) -> String {
        match self.kind {
            StateKind::BasisMember(i) => format!("P_basis{i}"),
            kind => format!("P_{}_N{}", kind.name(), self.n_alpha),
        }
    }
}

/// A validated config together with the objects it describes.
#[derive(Debug, Clone)]
pub struct RunPlan {
    /// The config with every default filled in.
    pub config: RunConfig,
    pub network: CouplingNetwork,
    pub grid: TimeGrid,
    pub propagator: Propagator,
    pub excited_site: usize,
    pub observed_site: usize,
    pub master_seed: u64,
    /// Pure-state traces in output order; empty in oracle mode.
    pub series: Vec<Series>,
    /// Time unit for plots: time is multiplied by `time_scale` and labelled
    /// `t [1/<time_unit>]`.
    pub time_scale: f64,
    pub time_unit: &'static str,
    /// Network draws, for star networks.
    pub network_draws: Option<qpar::rng::DrawRecord>,
}

impl RunPlan {
    pub fn csv_path(&self) -> &str {
        self.config
            .output
            .as_ref()
            .and_then(|o| o.csv.as_deref())
            .unwrap_or(DEFAULT_CSV)
    }

    pub fn svg_path(&self) -> Option<&str> {
        self.config.output.as_ref().and_then(|o| o.svg.as_deref())
    }

    pub fn manifest_path(&self) -> &str {
        self.config
            .output
            .as_ref()
            .and_then(|o| o.manifest.as_deref())
            .unwrap_or(DEFAULT_MANIFEST)
    }
}

struct Collector(Vec<FieldError>);

impl Collector {
    fn push(&mut self, path: &str, message: impl Into<String>) {
        self.0.push(FieldError::new(path, message));
    }

    fn unexpected<T>(&mut self, value: &Option<T>, path: &str, topology: &str) {
        if value.is_some() {
            self.push(path, format!("not used by the {topology} topology"));
        }
    }

    fn positive(&mut self, value: f64, path: &str) -> bool {
        if value <= 0.0 || !value.is_finite() {
            self.push(
                path,
                format!("must be a positive finite number, got {value}"),
            );
            return false;
        }
        true
    }

    fn finite(&mut self, value: f64, path: &str) -> bool {
        if !value.is_finite() {
            self.push(path, format!("must be finite, got {value}"));
            return false;
        }
        true
    }
}

fn resolve_path(base_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

/// Checks `config`, fills every default, and builds the network. Relative
/// edge-file paths resolve against `base_dir`. All violations are reported
/// together.
pub fn validate(config: &RunConfig, base_dir: &Path) -> CliResult<RunPlan> {
    let mut errs = Collector(Vec::new());
    let mut cfg = config.clone();
    let sys = &mut cfg.system;

    let mut time_scale = 1.0;
    let mut time_unit = "b";
    let mut network_draws = None;
    let m_path = "system.M";

    let network: Option<CouplingNetwork> = match sys.topology {
        TopologyName::Chain => {
            errs.unexpected(&sys.b_x, "system.b_x", "chain");
            errs.unexpected(&sys.b_y, "system.b_y", "chain");
            errs.unexpected(&sys.sigma, "system.sigma", "chain");
            errs.unexpected(&sys.network_seed, "system.network_seed", "chain");
            errs.unexpected(&sys.edge_file, "system.edge_file", "chain");
            let b = *sys.b.get_or_insert(1.0);
            let b_ok = errs.positive(b, "system.b");
            let name = sys.anisotropy.get_or_insert_with(|| "xy".into()).clone();
            let kind = match name.parse::<AnisotropyKind>() {
                Ok(k) => Some(k),
                Err(_) => {
                    errs.push(
                        "system.anisotropy",
                        format!("unknown anisotropy '{name}' (ising, xy, isotropic, dipolar)"),
                    );
                    None
                }
            };
            if let Some(k) = kind {
                sys.anisotropy = Some(k.name().to_string());
            }
            let m = match sys.m {
                None => {
                    errs.push(m_path, "required for the chain topology");
                    None
                }
                Some(m) if !(2..=MAX_SITES).contains(&m) => {
                    errs.push(
                        m_path,
                        format!("chain needs 2 <= M <= {MAX_SITES}, got {m}"),
                    );
                    None
                }
                Some(m) => Some(m),
            };
            time_scale = b.abs();
            match (m, kind, b_ok) {
                (Some(m), Some(kind), true) => build_chain(m, b, kind).ok(),
                _ => None,
            }
        }
        TopologyName::Ladder => {
            errs.unexpected(&sys.b, "system.b", "ladder");
            errs.unexpected(&sys.sigma, "system.sigma", "ladder");
            errs.unexpected(&sys.anisotropy, "system.anisotropy", "ladder");
            errs.unexpected(&sys.network_seed, "system.network_seed", "ladder");
            errs.unexpected(&sys.edge_file, "system.edge_file", "ladder");
            let b_x = *sys.b_x.get_or_insert(1.0);
            let b_y = *sys.b_y.get_or_insert(0.1);
            let ok = errs.positive(b_x, "system.b_x") & errs.finite(b_y, "system.b_y");
            let m = match sys.m {
                None => {
                    errs.push(m_path, "required for the ladder topology");
                    None
                }
                Some(m) if m % 2 != 0 => {
                    errs.push(
                        m_path,
                        format!("ladder needs an even number of sites, got {m}"),
                    );
                    None
                }
                Some(m) if !(4..=MAX_SITES).contains(&m) => {
                    errs.push(
                        m_path,
                        format!("ladder needs 4 <= M <= {MAX_SITES}, got {m}"),
                    );
                    None
                }
                Some(m) => Some(m),
            };
            time_scale = b_x;
            time_unit = "b_x";
            match (m, ok) {
                (Some(m), true) => build_ladder(m, b_x, b_y).ok(),
                _ => None,
            }
        }
        TopologyName::Star => {
            errs.unexpected(&sys.b, "system.b", "star");
            errs.unexpected(&sys.b_x, "system.b_x", "star");
            errs.unexpected(&sys.b_y, "system.b_y", "star");
            errs.unexpected(&sys.anisotropy, "system.anisotropy", "star");
            errs.unexpected(&sys.edge_file, "system.edge_file", "star");
            let sigma = *sys.sigma.get_or_insert(1.0);
            let seed = *sys.network_seed.get_or_insert(0);
            let ok = errs.positive(sigma, "system.sigma");
            let m = match sys.m {
                None => {
                    errs.push(m_path, "required for the star topology");
                    None
                }
                Some(m) if !(2..=MAX_SITES).contains(&m) => {
                    errs.push(m_path, format!("star needs 2 <= M <= {MAX_SITES}, got {m}"));
                    None
                }
                Some(m) => Some(m),
            };
            time_scale = sigma;
            time_unit = "σ";
            match (m, ok) {
                (Some(m), true) => {
                    network_draws = Some(qpar::hamiltonian::star_draw_record(m, seed));
                    build_star(m, sigma, seed).ok()
                }
                _ => None,
            }
        }
        TopologyName::Custom => {
            errs.unexpected(&sys.b, "system.b", "custom");
            errs.unexpected(&sys.b_x, "system.b_x", "custom");
            errs.unexpected(&sys.b_y, "system.b_y", "custom");
            errs.unexpected(&sys.sigma, "system.sigma", "custom");
            errs.unexpected(&sys.anisotropy, "system.anisotropy", "custom");
            errs.unexpected(&sys.network_seed, "system.network_seed", "custom");
            time_unit = "b_max";
            match &sys.edge_file {
                None => {
                    errs.push("system.edge_file", "required for the custom topology");
                    None
                }
                Some(p) => {
                    let full = resolve_path(base_dir, p);
                    match load_edge_list(&full) {
                        Ok(net) => {
                            sys.edge_file = Some(full);
                            match sys.m {
                                Some(m) if m != net.m_sites() => {
                                    errs.push(
                                        m_path,
                                        format!(
                                            "edge file declares M = {}, config says {m}",
                                            net.m_sites()
                                        ),
                                    );
                                    None
                                }
                                _ => {
                                    sys.m = Some(net.m_sites());
                                    time_scale = if net.max_rate() > 0.0 {
                                        net.max_rate()
                                    } else {
                                        1.0
                                    };
                                    Some(net)
                                }
                            }
                        }
                        Err(e) => {
                            errs.push("system.edge_file", format!("{}: {e}", full.display()));
                            None
                        }
                    }
                }
            }
        }
    };
    let m = network.as_ref().map(|n| n.m_sites());

    // Initial state.
    let init = &mut cfg.initial;
    let excited = *init.site.get_or_insert(0);
    let n_alpha = *init.n_alpha.get_or_insert(1);
    let master_seed = *init.master_seed.get_or_insert(0);
    if let Some(m) = m {
        if excited >= m {
            errs.push("initial.site", format!("site {excited} outside 0..{m}"));
        }
    }
    if n_alpha < 1 {
        errs.push("initial.n_alpha", "must be at least 1");
    }
    let primary = match init.kind {
        KindName::Entangled => Some(StateKind::Entangled),
        KindName::Product => Some(StateKind::Product),
        KindName::Basis => match init.background {
            None => {
                errs.push("initial.background", "required when kind is basis");
                None
            }
            Some(i) => {
                if let Some(m) = m {
                    if i >= 1usize << (m - 1) {
                        errs.push(
                            "initial.background",
                            format!("background index {i} outside 0..2^{}", m - 1),
                        );
                    }
                }
                if n_alpha != 1 {
                    errs.push("initial.n_alpha", "basis members carry no phases; use 1");
                }
                Some(StateKind::BasisMember(i))
            }
        },
    };
    if init.kind != KindName::Basis && init.background.is_some() {
        errs.push("initial.background", "only used when kind is basis");
    }
    if cfg.mode == Mode::Pure && n_alpha != 1 {
        errs.push(
            "initial.n_alpha",
            "pure mode runs one realization; use averaged mode",
        );
    }
    let mut series = Vec::new();
    if cfg.mode != Mode::Oracle {
        if let Some(kind) = primary {
            series.push(Series { kind, n_alpha });
        }
    }
    if !init.series.is_empty() && !matches!(cfg.mode, Mode::Pure | Mode::Averaged) {
        errs.push(
            "initial.series",
            "extra series are only allowed in pure and averaged modes",
        );
    }
    for (k, s) in init.series.iter().enumerate() {
        let path = format!("initial.series[{k}]");
        let kind = match s.kind {
            KindName::Entangled => StateKind::Entangled,
            KindName::Product => StateKind::Product,
            KindName::Basis => {
                errs.push(
                    &format!("{path}.kind"),
                    "extra series must be entangled or product",
                );
                continue;
            }
        };
        if s.n_alpha < 1 {
            errs.push(&format!("{path}.n_alpha"), "must be at least 1");
        }
        series.push(Series {
            kind,
            n_alpha: s.n_alpha,
        });
    }
    for (k, s) in series.iter().enumerate() {
        if series[..k].contains(s) {
            errs.push("initial.series", format!("duplicate series {}", s.column()));
        }
    }

    // Observation site.
    let observe = cfg.observe.get_or_insert_with(Default::default);
    let observed = *observe.site.get_or_insert(excited);
    if let Some(m) = m {
        if observed >= m {
            errs.push("observe.site", format!("site {observed} outside 0..{m}"));
        }
    }

    // Propagator.
    let prop_cfg = cfg.propagator.get_or_insert_with(|| PropagatorConfig {
        kind: if m.is_some_and(|m| m > EXACT_MAX_SITES) {
            PropagatorName::Trotter
        } else {
            PropagatorName::Exact
        },
        dt: None,
    });
    let propagator = match prop_cfg.kind {
        PropagatorName::Exact => {
            if prop_cfg.dt.is_some() {
                errs.push("propagator.dt", "only used by the trotter propagator");
            }
            Some(Propagator::Exact)
        }
        PropagatorName::Trotter => match (prop_cfg.dt, &network) {
            (Some(dt), _) => errs
                .positive(dt, "propagator.dt")
                .then_some(Propagator::Trotter { dt }),
            (None, Some(net)) => {
                let dt = default_dt(net);
                prop_cfg.dt = Some(dt);
                Some(Propagator::Trotter { dt })
            }
            (None, None) => None,
        },
    };

    // Time grid.
    let grid_cfg = cfg.grid.get_or_insert_with(Default::default);
    let (span, samples) = match cfg.system.topology {
        TopologyName::Star => {
            let sigma0 = m
                .zip(cfg.system.sigma)
                .map(|(m, s)| local_second_moment(m, s).sqrt())
                .unwrap_or(1.0);
            (DEFAULT_SPAN_STAR / sigma0, DEFAULT_SAMPLES_STAR)
        }
        _ => (DEFAULT_SPAN_BOND / time_scale, DEFAULT_SAMPLES_BOND),
    };
    let t_max = *grid_cfg.t_max.get_or_insert(span);
    let n_samples = *grid_cfg.n_samples.get_or_insert(samples);
    let t_ok = errs.positive(t_max, "grid.t_max");
    if !(2..=MAX_SAMPLES).contains(&n_samples) {
        errs.push(
            "grid.n_samples",
            format!("must lie in 2..={MAX_SAMPLES}, got {n_samples}"),
        );
    }
    let grid = if t_ok {
        TimeGrid::new(t_max, n_samples).ok()
    } else {
        None
    };

    // Outputs.
    let out = cfg.output.get_or_insert_with(Default::default);
    out.csv.get_or_insert_with(|| DEFAULT_CSV.into());
    out.manifest.get_or_insert_with(|| DEFAULT_MANIFEST.into());
    let mut seen: Vec<&str> = Vec::new();
    for (path, value) in [
        ("output.csv", &out.csv),
        ("output.svg", &out.svg),
        ("output.manifest", &out.manifest),
    ] {
        if let Some(v) = value.as_deref() {
            if v.trim().is_empty() || v.ends_with('/') {
                errs.push(path, "must name a file");
            } else if seen.contains(&v) {
                errs.push(path, format!("'{v}' is already used by another output"));
            }
            seen.push(v);
        }
    }

    if !errs.0.is_empty() {
        return Err(CliError::Config(errs.0));
    }
    let (network, grid, propagator) = match (network, grid, propagator) {
        (Some(n), Some(g), Some(p)) => (n, g, p),
        _ => return Err(CliError::config("config", "incomplete configuration")),
    };
    Ok(RunPlan {
        config: cfg,
        network,
        grid,
        propagator,
        excited_site: excited,
        observed_site: observed,
        master_seed,
        series,
        time_scale,
        time_unit,
        network_draws,
    })
}
