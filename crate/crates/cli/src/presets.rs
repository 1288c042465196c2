//! Built-in configurations reproducing the 14-spin ladder and star runs.

use crate::config::{
    GridConfig, InitialConfig, KindName, Mode, ObserveConfig, OutputConfig, PropagatorConfig,
    PropagatorName, RunConfig, SeriesConfig, SystemConfig, TopologyName,
};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub build: fn() -> RunConfig,
}

pub const PRESETS: [Preset; 3] = [
    Preset {
        name: "fig3a",
        description: "M=14 ladder, b_y/b_x=1/10, Trotter dt=0.02/b_x: entangled N_alpha=1, \
                      product N_alpha=1 and product N_alpha=630 (tens of minutes on one core)",
        build: fig3a,
    },
    Preset {
        name: "fig3b",
        description: "M=14 dipolar star, sigma=1: entangled and product at N_alpha=1",
        build: fig3b,
    },
    Preset {
        name: "fig3a-ensemble",
        description: "brute-force ensemble of the fig3a ladder, 2^13 Trotter evolutions \
                      (hours on one core; run overnight)",
        build: fig3a_ensemble,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

fn outputs(stem: &str) -> Option<OutputConfig> {
    Some(OutputConfig {
        csv: Some(format!("{stem}.csv")),
        svg: Some(format!("{stem}.svg")),
        manifest: Some(format!("{stem}.manifest.json")),
    })
}

fn ladder14() -> SystemConfig {
    SystemConfig {
        topology: TopologyName::Ladder,
        m: Some(14),
        b_x: Some(1.0),
        b_y: Some(0.1),
        b: None,
        sigma: None,
        anisotropy: None,
        network_seed: None,
        edge_file: None,
    }
}

fn trotter(dt: Option<f64>) -> Option<PropagatorConfig> {
    Some(PropagatorConfig {
        kind: PropagatorName::Trotter,
        dt,
    })
}

pub fn fig3a() -> RunConfig {
    RunConfig {
        mode: Mode::Averaged,
        system: ladder14(),
        initial: InitialConfig {
            kind: KindName::Entangled,
            site: Some(0),
            background: None,
            n_alpha: Some(1),
            master_seed: Some(1),
            series: vec![
                SeriesConfig {
                    kind: KindName::Product,
                    n_alpha: 1,
                },
                SeriesConfig {
                    kind: KindName::Product,
                    n_alpha: 630,
                },
            ],
        },
        propagator: trotter(Some(0.02)),
        grid: Some(GridConfig {
            t_max: Some(60.0),
            n_samples: Some(600),
        }),
        observe: Some(ObserveConfig { site: Some(0) }),
        output: outputs("fig3a"),
    }
}

pub fn fig3b() -> RunConfig {
    RunConfig {
        mode: Mode::Averaged,
        system: SystemConfig {
            topology: TopologyName::Star,
            m: Some(14),
            b_x: None,
            b_y: None,
            b: None,
            sigma: Some(1.0),
            anisotropy: None,
            network_seed: Some(1),
            edge_file: None,
        },
        initial: InitialConfig {
            kind: KindName::Entangled,
            site: Some(0),
            background: None,
            n_alpha: Some(1),
            master_seed: Some(1),
            series: vec![SeriesConfig {
                kind: KindName::Product,
                n_alpha: 1,
            }],
        },
        propagator: trotter(None),
        grid: None,
        observe: Some(ObserveConfig { site: Some(0) }),
        output: outputs("fig3b"),
    }
}

pub fn fig3a_ensemble() -> RunConfig {
    let mut cfg = fig3a();
    cfg.mode = Mode::Oracle;
    cfg.initial.series.clear();
    cfg.output = outputs("fig3a-ensemble");
    cfg
}
