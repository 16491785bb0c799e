//! Declarative experiment configs and the batch runner behind `mbqcsim run`.
//!
//! Grid points are computed in parallel and collected in input order, then written once,
//! so the CSV files depend only on the config.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::epp::Subprotocol;
use crate::graphstate::Graph;
use crate::localfit::{deviation_csv, deviation_curve, fit_closest_local, FitOptions};
use crate::localize::{localize_noise, twirl_to_standard_form};
use crate::mbqec::scan::{by_fidelity, region_boundaries, region_scan, GateNoiseKind, RegionPoint, RegionSpec};
use crate::mbqec::{
    build_resource, derive_correction_table, effective_map, purified_state, Code, CodeKind, Method, Prep, Role, Scenario,
};
use crate::noise::{make_channel, PauliChannel};
use crate::symscale;
use crate::{Result, SimError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphSpec {
    Ghz { n: usize },
    Line { n: usize },
    Ring { n: usize },
    Complete { n: usize },
    /// The three-colorable six-qubit form of the cluster-ring resource.
    ClusterRing,
    /// The wheel used to read into the cluster-ring code.
    ClusterRingResource,
    Edges { n: usize, edges: Vec<(usize, usize)> },
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        match self {
            GraphSpec::Ghz { n } => Graph::ghz(*n),
            GraphSpec::Line { n } => Graph::line(*n),
            GraphSpec::Ring { n } => Graph::ring(*n),
            GraphSpec::Complete { n } => Graph::complete(*n),
            GraphSpec::ClusterRing => Ok(Graph::cluster_ring_three_colorable()),
            GraphSpec::ClusterRingResource => Ok(Graph::cluster_ring_resource()),
            GraphSpec::Edges { n, edges } => Graph::new(*n, edges),
        }
    }
}

fn default_restarts() -> usize {
    FitOptions::default().restarts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Experiment {
    /// Distance of purification fixed points from the closest local noise model.
    DeviationCurve {
        graph: GraphSpec,
        gate_noise: GateNoiseKind,
        grid: Vec<f64>,
        #[serde(default)]
        end: Option<Subprotocol>,
        #[serde(default = "default_restarts")]
        restarts: usize,
    },
    /// Noise localization of GHZ fixed points.
    Localize {
        sizes: Vec<usize>,
        gate_noise: GateNoiseKind,
        grid: Vec<f64>,
        #[serde(default)]
        fit: bool,
    },
    /// Decode-only logical fidelity of the competing resource preparations.
    DecodeOnly { code: String, gate_noise: GateNoiseKind, grid: Vec<f64> },
    RegionScan {
        code: String,
        scenario: Scenario,
        gate_noise: GateNoiseKind,
        channel: String,
        gate_params: Vec<f64>,
        channel_params: Vec<f64>,
    },
    ByFidelity { code: String, gate_noise: GateNoiseKind, grid: Vec<f64> },
    Scaling { scenarios: Vec<symscale::Scenario>, sizes: Vec<usize> },
    PrepThreshold { sizes: Vec<usize> },
    Patterns { code: String },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::DeviationCurve { .. } => "deviation-curve",
            Experiment::Localize { .. } => "localize",
            Experiment::DecodeOnly { .. } => "decode-only",
            Experiment::RegionScan { .. } => "region-scan",
            Experiment::ByFidelity { .. } => "by-fidelity",
            Experiment::Scaling { .. } => "scaling",
            Experiment::PrepThreshold { .. } => "prep-threshold",
            Experiment::Patterns { .. } => "patterns",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Output directory, created if missing.
    pub output: PathBuf,
    /// Threaded to every stochastic component (fit restarts).
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub experiment: Experiment,
}

fn bad(msg: String) -> SimError {
    SimError::Config(msg)
}

fn check_params(what: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(bad(format!("{what} is empty")));
    }
    match xs.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        Some(x) => Err(bad(format!("{what} value {x} outside [0, 1]"))),
        None => Ok(()),
    }
}

fn check_sizes(what: &str, sizes: &[usize], min: usize, max: usize, odd: bool) -> Result<()> {
    if sizes.is_empty() {
        return Err(bad(format!("{what} is empty")));
    }
    match sizes.iter().find(|&&n| n < min || n > max || (odd && n % 2 == 0)) {
        Some(n) => Err(bad(format!("{what} value {n} not allowed (range {min}..={max}{})", if odd { ", odd" } else { "" }))),
        None => Ok(()),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Checks every parameter against the owning module before any compute starts.
    pub fn validate(&self) -> Result<()> {
        match &self.experiment {
            Experiment::DeviationCurve { graph, gate_noise, grid, restarts, .. } => {
                let g = graph.build()?;
                if g.n() > 10 {
                    return Err(SimError::GraphSize(g.n()));
                }
                if *gate_noise == GateNoiseKind::BinaryLike && !g.color().is_two_colorable() {
                    return Err(SimError::NotBipartite);
                }
                if *restarts == 0 {
                    return Err(bad("restarts must be positive".into()));
                }
                check_params("grid", grid)
            }
            Experiment::Localize { sizes, grid, .. } => {
                check_sizes("sizes", sizes, 3, 12, false)?;
                check_params("grid", grid)
            }
            Experiment::DecodeOnly { code, grid, .. } | Experiment::ByFidelity { code, grid, .. } => {
                Code::from_name(code)?;
                check_params("grid", grid)
            }
            Experiment::RegionScan { code, scenario, channel, gate_params, channel_params, .. } => {
                Code::from_name(code)?;
                if *scenario == Scenario::Unencoded {
                    return Err(bad("region scans compare encoded scenarios against the unencoded one".into()));
                }
                make_channel(channel, 1.0)?;
                check_params("gate_params", gate_params)?;
                check_params("channel_params", channel_params)
            }
            Experiment::Scaling { scenarios, sizes } => {
                if scenarios.is_empty() {
                    return Err(bad("scenarios is empty".into()));
                }
                check_sizes("sizes", sizes, 3, 1001, true)
            }
            Experiment::PrepThreshold { sizes } => check_sizes("sizes", sizes, 3, 1000, false),
            Experiment::Patterns { code } => Code::from_name(code).map(|_| ()),
        }
    }

    /// SHA-256 of the canonical JSON form of the config.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

const CONVENTIONS: &str = "\
# parameters: identity weight of the channel or gate model (1 = noiseless)
# state fidelity: lambda_0 = <G|rho|G>; logical fidelity: Jamiolkowski <Phi+|(1 x E)(Phi+)|Phi+>
# basis index: bit j of mu belongs to qubit j (0-based graph vertex)
";

fn with_conventions(body: String) -> String {
    format!("{CONVENTIONS}{body}")
}

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or("nan".into(), num)
}

fn err_cell(e: &SimError) -> String {
    e.to_string().replace([',', '\n'], ";")
}

/// One written file and its number of data rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub rows: usize,
    pub failed_rows: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub versions: Vec<(String, String)>,
    pub workers: usize,
    pub wall_seconds: f64,
    pub files: Vec<OutputFile>,
}

struct Table {
    name: &'static str,
    text: String,
    failed: usize,
}

fn rows(text: &str) -> usize {
    text.lines().filter(|l| !l.starts_with('#')).count().saturating_sub(1)
}

fn deviation(graph: &GraphSpec, kind: GateNoiseKind, grid: &[f64], end: Option<Subprotocol>, opts: &FitOptions) -> Result<Vec<Table>> {
    let g = graph.build()?;
    let fp = |p: f64| purified_state(&g, &kind.model(p)?, end, &[]);
    let pts = deviation_curve(grid, fp, None, opts);
    let failed = pts.iter().filter(|p| p.error.is_some()).count();
    let text = with_conventions(format!("# one_minus_F: 1 - max fidelity to a local Pauli model; rel_dev = one_minus_F/(1 - f)\n{}", deviation_csv(&pts)));
    Ok(vec![Table { name: "deviation-curve", text, failed }])
}

fn localize(sizes: &[usize], kind: GateNoiseKind, grid: &[f64], fit: bool, opts: &FitOptions) -> Result<Vec<Table>> {
    let jobs: Vec<(usize, f64)> = sizes.iter().flat_map(|&n| grid.iter().map(move |&p| (n, p))).collect();
    let lines: Vec<std::result::Result<String, String>> = jobs
        .par_iter()
        .map(|&(n, p)| {
            let one = || -> Result<String> {
                let s = purified_state(&Graph::ghz(n)?, &kind.model(p)?, None, &[])?;
                let (out, r) = localize_noise(&twirl_to_standard_form(&s)?)?;
                let dev = if fit { Some(fit_closest_local(&out, None, opts)?.one_minus_f) } else { None };
                Ok(format!(
                    "{n},{p},{},{},{},{},{},{},{},",
                    num(r.fidelity_before),
                    num(r.fidelity_after),
                    num(r.relative_reduction),
                    num(r.q_total),
                    num(r.p),
                    num(r.center_phase_weight),
                    opt(dev)
                ))
            };
            one().map_err(|e| format!("{n},{p},nan,nan,nan,nan,nan,nan,nan,{}", err_cell(&e)))
        })
        .collect();
    let failed = lines.iter().filter(|l| l.is_err()).count();
    let mut text = String::from("# localized state: local model with p shared by center and leaves; fit_one_minus_F only when fit = true\n");
    text.push_str("n,gate_param,f_before,f_after,relative_reduction,q_total,local_p,center_phase_weight,fit_one_minus_F,error\n");
    for l in lines {
        text.push_str(&l.unwrap_or_else(|e| e));
        text.push('\n');
    }
    Ok(vec![Table { name: "localize", text: with_conventions(text), failed }])
}

fn decode_only(code: &Code, kind: GateNoiseKind, grid: &[f64]) -> Result<Vec<Table>> {
    let table = derive_correction_table(code)?;
    let preps: Vec<(&str, Option<Subprotocol>)> = match code.kind() {
        CodeKind::ClusterRing => vec![("epp", None)],
        _ => vec![("epp-end-p1", Some(Subprotocol::P1)), ("epp-end-p2", Some(Subprotocol::P2))],
    };
    let per_p: Vec<(Vec<String>, usize)> = grid
        .par_iter()
        .map(|&p| {
            let mut out = Vec::new();
            let mut failed = 0;
            let decode = |prep: Prep| -> Result<(f64, f64)> {
                let r = build_resource(code, Role::Decode, &prep)?;
                let m = Method::Measurement { decoder: &r, encoder: None };
                Ok((r.fidelity(), effective_map(code, &table, Scenario::DecodeOnly, &m, &PauliChannel::identity())?.jamiolkowski_fidelity()))
            };
            let mut push = |name: &str, r: Result<(Option<f64>, f64)>| match r {
                Ok((rf, jf)) => out.push(format!("{p},{name},{},{},", opt(rf), num(jf))),
                Err(e) => {
                    failed += 1;
                    out.push(format!("{p},{name},nan,nan,{}", err_cell(&e)));
                }
            };
            for (name, end) in &preps {
                let r = kind.model(p).and_then(|model| decode(Prep::Epp { model, end: *end, aux_end: vec![] }));
                push(name, r.map(|(a, b)| (Some(a), b)));
            }
            let r = kind.model(p).and_then(|model| decode(Prep::DirectGates { model }));
            push("direct-gates", r.map(|(a, b)| (Some(a), b)));
            let r = kind.model(p).and_then(|model| {
                let m = Method::Gates { model };
                Ok((None, effective_map(code, &table, Scenario::DecodeOnly, &m, &PauliChannel::identity())?.jamiolkowski_fidelity()))
            });
            push("gate-based", r);
            (out, failed)
        })
        .collect();
    let mut text = format!("# code: {}; resource_fidelity is nan for gate-based decoding\np,approach,resource_fidelity,jam_fidelity,error\n", code.name());
    let mut failed = 0;
    for (lines, f) in per_p {
        failed += f;
        for l in lines {
            text.push_str(&l);
            text.push('\n');
        }
    }
    Ok(vec![Table { name: "decode-only", text: with_conventions(text), failed }])
}

fn region(spec: &RegionSpec) -> Result<Vec<Table>> {
    let per_p: Vec<std::result::Result<Vec<RegionPoint>, String>> = spec
        .gate_params
        .par_iter()
        .map(|&p| region_scan(&RegionSpec { gate_params: vec![p], ..spec.clone() }).map_err(|e| err_cell(&e)))
        .collect();
    let mut text = format!(
        "# code: {}; scenario: {:?}; channel: {}; beats_unencoded means F > F_unencoded + 1e-12; nan = no converged resource\np,q,approach,jam_fidelity,beats_unencoded,error\n",
        spec.code.name(),
        spec.scenario,
        spec.channel
    );
    let mut all = Vec::new();
    let mut failed = 0;
    for (p, r) in spec.gate_params.iter().zip(per_p) {
        match r {
            Ok(pts) => {
                for r in &pts {
                    text.push_str(&format!("{},{},{},{},{},\n", r.p, r.q, r.approach.name(), num(r.jam_fidelity), r.beats_unencoded));
                }
                all.extend(pts);
            }
            Err(e) => {
                failed += 1;
                text.push_str(&format!("{p},nan,all,nan,false,{e}\n"));
            }
        }
    }
    let mut b = String::from("# q_min: smallest sampled channel parameter where the approach beats no encoding\napproach,p,q_min\n");
    for x in region_boundaries(&all) {
        b.push_str(&format!("{},{},{}\n", x.approach.name(), x.p, x.q_min.map_or("none".into(), |q| q.to_string())));
    }
    Ok(vec![
        Table { name: "region-scan", text: with_conventions(text), failed },
        Table { name: "region-boundaries", text: with_conventions(b), failed: 0 },
    ])
}

fn fidelity_matched(code: &Code, kind: GateNoiseKind, grid: &[f64]) -> Result<Vec<Table>> {
    let rows: Vec<std::result::Result<String, String>> = grid
        .par_iter()
        .map(|&p| {
            by_fidelity(code, kind, &[p])
                .map(|r| {
                    let r = r[0];
                    format!(
                        "{p},{},{},{},{},{},{},",
                        num(r.resource_fidelity),
                        num(r.local_param),
                        num(r.global_param),
                        num(r.epp),
                        num(r.local_depolarizing),
                        num(r.global_depolarizing)
                    )
                })
                .map_err(|e| format!("{p},nan,nan,nan,nan,nan,nan,{}", err_cell(&e)))
        })
        .collect();
    let failed = rows.iter().filter(|r| r.is_err()).count();
    let mut text = format!(
        "# code: {}; decode-only logical fidelities of three resources with equal lambda_0\np,resource_fidelity,local_p,global_p,epp,local_depolarizing,global_depolarizing,error\n",
        code.name()
    );
    for r in rows {
        text.push_str(&r.unwrap_or_else(|e| e));
        text.push('\n');
    }
    Ok(vec![Table { name: "by-fidelity", text: with_conventions(text), failed }])
}

fn scaling(scenarios: &[symscale::Scenario], sizes: &[usize]) -> Result<Vec<Table>> {
    let jobs: Vec<(symscale::Scenario, usize)> = scenarios.iter().flat_map(|&s| sizes.iter().map(move |&n| (s, n))).collect();
    let rows: Vec<(String, bool)> = jobs
        .par_iter()
        .map(|&(s, n)| match symscale::scaling_threshold(s, n) {
            Ok(t) => (format!("{},{n},{},", s.label(), num(t)), false),
            Err(e) => (format!("{},{n},nan,{}", s.label(), err_cell(&e)), true),
        })
        .collect();
    let mut text = String::from("# threshold: smallest binary-like gate parameter with an encoding advantage (bisection tolerance 1e-4)\nscenario,n,threshold,error\n");
    for (r, _) in &rows {
        text.push_str(r);
        text.push('\n');
    }
    Ok(vec![Table { name: "scaling", text: with_conventions(text), failed: rows.iter().filter(|r| r.1).count() }])
}

fn prep(sizes: &[usize]) -> Result<Vec<Table>> {
    let rows: Vec<(String, bool)> = sizes
        .par_iter()
        .map(|&n| match symscale::prep_threshold(n) {
            Ok(t) => (format!("{n},{},", num(t)), false),
            Err(e) => (format!("{n},nan,{}", err_cell(&e)), true),
        })
        .collect();
    let mut text = String::from("# prep_threshold: smallest binary-like gate parameter whose prepared GHZ state purifies (bisection tolerance 1e-4)\nn,prep_threshold,error\n");
    for (r, _) in &rows {
        text.push_str(r);
        text.push('\n');
    }
    Ok(vec![Table { name: "prep-threshold", text: with_conventions(text), failed: rows.iter().filter(|r| r.1).count() }])
}

/// Zero-error read-in patterns of `code` and their logical corrections, one row each.
pub fn patterns_csv(code: &Code) -> Result<String> {
    let t = derive_correction_table(code)?;
    let mut text = format!(
        "# code: {}; pattern letter j is the Bell outcome on code qubit j; correction is applied to the output qubit\nrow,pattern,correction\n",
        code.name()
    );
    for (k, r) in t.no_error_patterns().iter().enumerate() {
        text.push_str(&format!("{},{},{}\n", k + 1, r.pattern, r.correction.symbol()));
    }
    Ok(text)
}

/// Runs a validated config and writes its CSV files and `manifest.json`.
pub fn run(config: &ExperimentConfig) -> Result<Manifest> {
    config.validate()?;
    let start = Instant::now();
    let opts = FitOptions { seed: config.seed, ..FitOptions::default() };
    let tables = match &config.experiment {
        Experiment::DeviationCurve { graph, gate_noise, grid, end, restarts } => {
            deviation(graph, *gate_noise, grid, *end, &FitOptions { restarts: *restarts, ..opts })?
        }
        Experiment::Localize { sizes, gate_noise, grid, fit } => localize(sizes, *gate_noise, grid, *fit, &opts)?,
        Experiment::DecodeOnly { code, gate_noise, grid } => decode_only(&Code::from_name(code)?, *gate_noise, grid)?,
        Experiment::RegionScan { code, scenario, gate_noise, channel, gate_params, channel_params } => region(&RegionSpec {
            code: Code::from_name(code)?,
            scenario: *scenario,
            gate_noise: *gate_noise,
            channel: channel.clone(),
            gate_params: gate_params.clone(),
            channel_params: channel_params.clone(),
        })?,
        Experiment::ByFidelity { code, gate_noise, grid } => fidelity_matched(&Code::from_name(code)?, *gate_noise, grid)?,
        Experiment::Scaling { scenarios, sizes } => scaling(scenarios, sizes)?,
        Experiment::PrepThreshold { sizes } => prep(sizes)?,
        Experiment::Patterns { code } => {
            vec![Table { name: "patterns", text: with_conventions(patterns_csv(&Code::from_name(code)?)?), failed: 0 }]
        }
    };
    let wall_seconds = start.elapsed().as_secs_f64();
    fs::create_dir_all(&config.output).map_err(|e| bad(format!("{}: {e}", config.output.display())))?;
    let mut files = Vec::new();
    for t in &tables {
        let path = config.output.join(format!("{}.csv", t.name));
        write(&path, &t.text)?;
        files.push(OutputFile { path, rows: rows(&t.text), failed_rows: t.failed });
    }
    let manifest = Manifest {
        experiment: config.experiment.name().into(),
        config: config.clone(),
        config_sha256: config.hash(),
        versions: vec![(env!("CARGO_PKG_NAME").into(), env!("CARGO_PKG_VERSION").into())],
        workers: rayon::current_num_threads(),
        wall_seconds,
        files,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| bad(e.to_string()))?;
    write(&config.output.join("manifest.json"), &text)?;
    Ok(manifest)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| bad(format!("{}: {e}", path.display())))
}

/// Configs that regenerate the figure data series, each in its own directory under `root`.
pub fn figure_configs(root: &Path) -> Vec<ExperimentConfig> {
    let lin = |a: f64, b: f64, k: usize| (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect::<Vec<_>>();
    let mk = |dir: &str, experiment| ExperimentConfig { output: root.join(dir), seed: 0, experiment };
    vec![
        mk("deviation-ghz4-binary-like", Experiment::DeviationCurve {
            graph: GraphSpec::Ghz { n: 4 },
            gate_noise: GateNoiseKind::BinaryLike,
            grid: lin(0.8, 1.0, 11),
            end: None,
            restarts: default_restarts(),
        }),
        mk("deviation-ghz4-depolarizing", Experiment::DeviationCurve {
            graph: GraphSpec::Ghz { n: 4 },
            gate_noise: GateNoiseKind::Depolarizing,
            grid: lin(0.96, 1.0, 9),
            end: None,
            restarts: default_restarts(),
        }),
        mk("deviation-line5-depolarizing", Experiment::DeviationCurve {
            graph: GraphSpec::Line { n: 5 },
            gate_noise: GateNoiseKind::Depolarizing,
            grid: lin(0.96, 1.0, 9),
            end: None,
            restarts: default_restarts(),
        }),
        mk("deviation-ghz4-correlated", Experiment::DeviationCurve {
            graph: GraphSpec::Ghz { n: 4 },
            gate_noise: GateNoiseKind::Correlated,
            grid: lin(0.96, 1.0, 9),
            end: None,
            restarts: default_restarts(),
        }),
        mk("localize", Experiment::Localize {
            sizes: (4..=9).collect(),
            gate_noise: GateNoiseKind::Depolarizing,
            grid: lin(0.97, 1.0, 7),
            fit: false,
        }),
        mk("decode-only-repetition", Experiment::DecodeOnly {
            code: "phaseflip3".into(),
            gate_noise: GateNoiseKind::Depolarizing,
            grid: lin(0.96, 1.0, 9),
        }),
        mk("decode-only-cluster-ring", Experiment::DecodeOnly {
            code: "cluster-ring".into(),
            gate_noise: GateNoiseKind::Depolarizing,
            grid: lin(0.97, 1.0, 7),
        }),
        mk("region-scan", Experiment::RegionScan {
            code: "phaseflip3".into(),
            scenario: Scenario::ChannelDecode,
            gate_noise: GateNoiseKind::BinaryLike,
            channel: "phaseflip".into(),
            gate_params: lin(0.85, 1.0, 20),
            channel_params: lin(0.5, 1.0, 20),
        }),
        mk("by-fidelity", Experiment::ByFidelity {
            code: "cluster-ring".into(),
            gate_noise: GateNoiseKind::Depolarizing,
            grid: lin(0.97, 1.0, 7),
        }),
        mk("scaling", Experiment::Scaling {
            scenarios: vec![symscale::Scenario::A, symscale::Scenario::B, symscale::Scenario::C],
            sizes: (3..=41).step_by(2).collect(),
        }),
        mk("prep-threshold", Experiment::PrepThreshold { sizes: (3..=20).collect() }),
        mk("patterns", Experiment::Patterns { code: "repetition3".into() }),
    ]
}
