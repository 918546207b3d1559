//! Command-line front end: config ingestion, experiment execution, and
//! CSV/JSON/SVG artifact emission.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::channels::{
    choi_matrix, dilated_map, dilation_unitary_a, dilation_unitary_b, process_fidelity,
};
use crate::consts::{KBT_PRESET_1, KBT_PRESET_2, NU_DEFAULT_KHZ, TAU_CYCLE_DEFAULT};
use crate::cycle::{range_grid, run_cycle, sweep, Backend, CycleConfig, SweepRow};
use crate::error::{Error, Result};
use crate::mc_errors::{estimate_cycle, NoiseSpec};
use crate::pulsesim::{
    compile_channel_a, compile_channel_b, effective_channel, NoiseModel, PulseSequence,
};

const SWEEP_SCHEMA: &str = "qme-sweep-v1";
const PULSE_VERIFY_SCHEMA: &str = "qme-pulse-verify-v1";

#[derive(Debug, Parser)]
#[command(
    name = "qme-sim",
    version,
    about = "Three-stroke measurement-powered qubit engine: cycle ledgers, strength sweeps, pulse-compiler verification, Monte Carlo error bars"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a single cycle and print the full energy/entropy ledger.
    Cycle(CommonArgs),
    /// Evaluate the cycle over a strength grid for each temperature.
    Sweep(CommonArgs),
    /// Check compiled pulse sequences against the ideal channels.
    PulseVerify(PulseVerifyArgs),
    /// Monte Carlo error bars for the cycle ledger.
    Mc(McArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendOpt {
    Ideal,
    Pulse,
}

impl From<BackendOpt> for Backend {
    fn from(b: BackendOpt) -> Backend {
        match b {
            BackendOpt::Ideal => Backend::IdealKraus,
            BackendOpt::Pulse => Backend::PulseSim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    EntropyVsP,
    HeatWorkVsP,
    EtaPowerVsP,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML config file; flags override file values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Measurement strength: a single value or start:stop:step.
    #[arg(long)]
    pub p: Option<String>,
    /// Comma-separated list of k_B*T values in peV.
    #[arg(long)]
    pub kbt: Option<String>,
    /// Working-substance splitting in kHz.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendOpt>,
    /// Relaxation during pulse-backend runs.
    #[arg(long, value_enum)]
    pub noise: Option<OnOff>,
    /// RNG seed; falls back to QME_SIM_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Curve family for SVG output.
    #[arg(long, value_enum, default_value = "eta-power-vs-p")]
    pub plot: PlotKind,
}

#[derive(Debug, Args)]
pub struct PulseVerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Verify a saved sequence file instead of the angle grid.
    pub sequence: Option<PathBuf>,
    /// Number of angle grid points over (0, pi].
    #[arg(long, default_value_t = 20)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub sigma_mag: Option<f64>,
    #[arg(long)]
    pub sigma_qst: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

/// TOML file schema; unknown keys are a hard error.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub nu_khz: Option<f64>,
    pub temps_pev: Option<Vec<f64>>,
    pub p_grid: Option<PGridSpec>,
    pub backend: Option<String>,
    pub tau_cycle: Option<f64>,
    pub seed: Option<u64>,
    pub output: Option<String>,
    pub out_path: Option<PathBuf>,
    pub noise: Option<NoiseSection>,
    pub mc: Option<McSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PGridSpec {
    List(Vec<f64>),
    Range(String),
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub enabled: Option<bool>,
    pub t1_h: Option<f64>,
    pub t1_c: Option<f64>,
    pub t2_h: Option<f64>,
    pub t2_c: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub sigma_mag: Option<f64>,
    pub sigma_qst: Option<f64>,
    pub n_samples: Option<usize>,
}

/// Fully resolved run parameters, echoed into every artifact so a run can
/// be reproduced from its own output.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveConfig {
    pub experiment: String,
    pub nu_khz: f64,
    pub temps_pev: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub backend: Backend,
    pub tau_cycle: f64,
    pub noise: NoiseModel,
    pub mc: NoiseSpec,
    pub format: OutputFormat,
    /// Not echoed into artifacts: outputs stay byte-identical wherever
    /// they are written.
    #[serde(skip)]
    pub out_path: Option<PathBuf>,
}

fn parse_p_spec(s: &str) -> Result<Vec<f64>> {
    let bad = |s: &str| Error::Config(format!("bad p spec '{s}'"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(s));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|t| t.trim().parse().map_err(|_| bad(s)))
            .collect::<Result<_>>()?;
        range_grid(nums[0], nums[1], nums[2])
    } else {
        Ok(vec![s.trim().parse().map_err(|_| bad(s))?])
    }
}

fn parse_kbt_list(s: &str) -> Result<Vec<f64>> {
    let temps: Vec<f64> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad kBT list '{s}'")))
        })
        .collect::<Result<_>>()?;
    if temps.is_empty() {
        return Err(Error::Config("empty kBT list".into()));
    }
    Ok(temps)
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn env_seed() -> Option<u64> {
    std::env::var("QME_SIM_SEED").ok().and_then(|s| s.parse().ok())
}

fn resolve(experiment: &str, args: &CommonArgs, mc_args: Option<&McArgs>) -> Result<EffectiveConfig> {
    let file = load_file_config(args.config.as_deref())?;

    let nu_khz = args.nu.or(file.nu_khz).unwrap_or(NU_DEFAULT_KHZ);

    let temps_pev = match (&args.kbt, &file.temps_pev) {
        (Some(s), _) => parse_kbt_list(s)?,
        (None, Some(v)) if !v.is_empty() => v.clone(),
        _ => vec![KBT_PRESET_1, KBT_PRESET_2],
    };

    let p_grid = match (&args.p, &file.p_grid) {
        (Some(s), _) => parse_p_spec(s)?,
        (None, Some(PGridSpec::List(v))) if !v.is_empty() => v.clone(),
        (None, Some(PGridSpec::Range(s))) => parse_p_spec(s)?,
        _ => match experiment {
            "sweep" => range_grid(0.55, 1.0, 0.05)?,
            _ => vec![0.75],
        },
    };
    if p_grid.is_empty() {
        return Err(Error::Config("empty p grid".into()));
    }

    let backend: Backend = match (&args.backend, &file.backend) {
        (Some(b), _) => (*b).into(),
        (None, Some(s)) => match s.as_str() {
            "ideal" => Backend::IdealKraus,
            "pulse" => Backend::PulseSim,
            other => return Err(Error::Config(format!("unknown backend '{other}'"))),
        },
        _ => Backend::IdealKraus,
    };

    let file_noise = file.noise.clone().unwrap_or_default();
    let defaults = NoiseModel::sample_defaults();
    let enabled = match args.noise {
        Some(OnOff::On) => true,
        Some(OnOff::Off) => false,
        None => file_noise.enabled.unwrap_or(false),
    };
    let noise = NoiseModel::new(
        file_noise.t1_h.unwrap_or(defaults.t1_h),
        file_noise.t1_c.unwrap_or(defaults.t1_c),
        file_noise.t2_h.unwrap_or(defaults.t2_h),
        file_noise.t2_c.unwrap_or(defaults.t2_c),
        enabled,
    )?;

    let seed = args
        .seed
        .or(file.seed)
        .or_else(env_seed)
        .unwrap_or(0);
    let file_mc = file.mc.clone().unwrap_or_default();
    let mc_defaults = NoiseSpec::default();
    let mc = NoiseSpec {
        sigma_mag: mc_args
            .and_then(|m| m.sigma_mag)
            .or(file_mc.sigma_mag)
            .unwrap_or(mc_defaults.sigma_mag),
        sigma_qst: mc_args
            .and_then(|m| m.sigma_qst)
            .or(file_mc.sigma_qst)
            .unwrap_or(mc_defaults.sigma_qst),
        n_samples: mc_args
            .and_then(|m| m.samples)
            .or(file_mc.n_samples)
            .unwrap_or(mc_defaults.n_samples),
        seed,
    };

    let format = match (&args.format, &file.output) {
        (Some(f), _) => *f,
        (None, Some(s)) => match s.as_str() {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            "svg" => OutputFormat::Svg,
            other => return Err(Error::Config(format!("unknown output format '{other}'"))),
        },
        _ => match experiment {
            "cycle" | "mc" => OutputFormat::Json,
            _ => OutputFormat::Csv,
        },
    };

    Ok(EffectiveConfig {
        experiment: experiment.to_string(),
        nu_khz,
        temps_pev,
        p_grid,
        backend,
        tau_cycle: file.tau_cycle.unwrap_or(TAU_CYCLE_DEFAULT),
        noise,
        mc,
        format,
        out_path: args.out.clone().or(file.out_path),
    })
}

fn base_cycle_config(cfg: &EffectiveConfig) -> CycleConfig {
    CycleConfig {
        nu_khz: cfg.nu_khz,
        kbt_pev: cfg.temps_pev[0],
        p: cfg.p_grid[0],
        tau_cycle: cfg.tau_cycle,
        backend: cfg.backend,
        noise: cfg.noise,
    }
}

/// Atomic write: temp file in the destination directory, then rename.
fn write_artifact(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(p) => {
            let dir = p.parent().filter(|d| !d.as_os_str().is_empty());
            let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))?;
            tmp.write_all(content.as_bytes())?;
            tmp.persist(p).map_err(|e| Error::Io(e.error))?;
            Ok(())
        }
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

fn config_echo(cfg: &EffectiveConfig) -> String {
    serde_json::to_string(cfg).expect("config serializes")
}

/// Sweep table in the stable CSV schema, config echoed in the header.
pub fn render_sweep_csv(rows: &[SweepRow], cfg: &EffectiveConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("# schema: {SWEEP_SCHEMA}\n"));
    out.push_str(&format!("# config: {}\n", config_echo(cfg)));
    out.push_str(
        "p,kBT_pev,heat_pev,work_pev,heat_cold_pev,dSa_nats,dSb_nats,eta,power_pev_per_s,backend,flags\n",
    );
    for row in rows {
        let flags = row.flags.join(";");
        match &row.report {
            Some(r) => out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                fmt_num(row.p),
                fmt_num(row.kbt_pev),
                fmt_num(r.heat_p),
                fmt_num(r.work_ext),
                fmt_num(r.heat_cold),
                fmt_num(r.ds_a),
                fmt_num(r.ds_b),
                fmt_num(r.efficiency),
                fmt_num(r.power_ext),
                row.backend,
                flags
            )),
            None => out.push_str(&format!(
                "{},{},,,,,,,,{},{}\n",
                fmt_num(row.p),
                fmt_num(row.kbt_pev),
                row.backend,
                flags
            )),
        }
    }
    out
}

fn state_to_json(rho: &crate::qcore::QState) -> serde_json::Value {
    let m = rho.matrix();
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    serde_json::json!(rows)
}

fn cycle_json(cfg: &EffectiveConfig) -> Result<String> {
    let report = run_cycle(&base_cycle_config(cfg))?;
    let value = serde_json::json!({
        "schema": "qme-cycle-v1",
        "config": cfg,
        "p": cfg.p_grid[0],
        "kBT_pev": cfg.temps_pev[0],
        "heat_pev": report.heat_p,
        "work_pev": report.work_ext,
        "heat_cold_pev": report.heat_cold,
        "dSa_nats": report.ds_a,
        "dSb_nats": report.ds_b,
        "eta": report.efficiency,
        "power_pev_per_s": report.power_ext,
        "q_used": report.q_used,
        "engine": report.engine,
        "rho1": state_to_json(&report.rho1),
        "rho2": state_to_json(&report.rho2),
        "rho3": state_to_json(&report.rho3),
    });
    Ok(format!("{}\n", serde_json::to_string_pretty(&value).expect("json")))
}

fn mc_json(cfg: &EffectiveConfig) -> Result<String> {
    let mut entries = Vec::new();
    for &kbt in &cfg.temps_pev {
        for &p in &cfg.p_grid {
            let point = CycleConfig {
                p,
                kbt_pev: kbt,
                ..base_cycle_config(cfg)
            };
            match estimate_cycle(&point, &cfg.mc) {
                Ok(est) => entries.push(serde_json::json!({
                    "p": p, "kBT_pev": kbt, "estimates": est,
                })),
                Err(e) => entries.push(serde_json::json!({
                    "p": p, "kBT_pev": kbt, "error": e.to_string(),
                })),
            }
        }
    }
    let value = serde_json::json!({
        "schema": "qme-mc-v1",
        "config": cfg,
        "points": entries,
    });
    Ok(format!("{}\n", serde_json::to_string_pretty(&value).expect("json")))
}

fn pulse_verify_table(cfg: &EffectiveConfig, points: usize) -> Result<String> {
    if points == 0 {
        return Err(Error::Config("points must be positive".into()));
    }
    let noisy_model = NoiseModel {
        enabled: true,
        ..cfg.noise
    };
    let mut out = String::new();
    out.push_str(&format!("# schema: {PULSE_VERIFY_SCHEMA}\n"));
    out.push_str(&format!("# config: {}\n", config_echo(cfg)));
    out.push_str("channel,angle_rad,choi_fidelity_noiseless,choi_fidelity_noisy\n");
    for i in 1..=points {
        let angle = std::f64::consts::PI * i as f64 / points as f64;
        for (name, seq, u) in [
            ("a", compile_channel_a(angle)?, dilation_unitary_a(angle)),
            ("b", compile_channel_b(angle)?, dilation_unitary_b(angle)),
        ] {
            let ideal = choi_matrix(dilated_map(&u))?;
            let noiseless = process_fidelity(&effective_channel(&seq, &NoiseModel::disabled())?, &ideal)?;
            let noisy = process_fidelity(&effective_channel(&seq, &noisy_model)?, &ideal)?;
            out.push_str(&format!(
                "{name},{},{},{}\n",
                fmt_num(angle),
                fmt_num(noiseless),
                fmt_num(noisy)
            ));
        }
    }
    Ok(out)
}

fn pulse_verify_sequence(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let seq = PulseSequence::from_text(&text)?;
    let value = serde_json::json!({
        "schema": "qme-sequence-v1",
        "path": path.display().to_string(),
        "op_count": seq.ops.len(),
        "total_duration_s": seq.total_duration(),
        "normalized": seq.to_text(),
    });
    Ok(format!("{}\n", serde_json::to_string_pretty(&value).expect("json")))
}

/// Deterministic SVG with one dashed curve pair per temperature.
pub fn emit_plot(rows: &[SweepRow], kind: PlotKind, cfg: &EffectiveConfig) -> Result<String> {
    let plotted: Vec<&SweepRow> = rows.iter().filter(|r| r.report.is_some()).collect();
    if plotted.is_empty() {
        return Err(Error::NothingToPlot);
    }

    type SeriesPick = fn(&crate::cycle::CycleReport) -> [f64; 2];
    let (title, labels, pick): (&str, [&str; 2], SeriesPick) = match kind {
        PlotKind::EntropyVsP => (
            "entropy change per stroke vs p",
            ["dS_a (nats)", "dS_b (nats)"],
            |r| [r.ds_a, r.ds_b],
        ),
        PlotKind::HeatWorkVsP => (
            "heat and work vs p",
            ["heat (peV)", "work (peV)"],
            |r| [r.heat_p, r.work_ext],
        ),
        PlotKind::EtaPowerVsP => (
            "efficiency and power vs p",
            ["eta", "power (peV/ms)"],
            |r| [r.efficiency, r.power_ext * 1e-3],
        ),
    };

    // stable temperature order: first occurrence in the table
    let mut temps: Vec<f64> = Vec::new();
    for r in &plotted {
        if !temps.iter().any(|t| (t - r.kbt_pev).abs() < 1e-15) {
            temps.push(r.kbt_pev);
        }
    }

    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in &plotted {
        let ys = pick(r.report.as_ref().unwrap());
        x_min = x_min.min(r.p);
        x_max = x_max.max(r.p);
        y_min = y_min.min(ys[0]).min(ys[1]);
        y_max = y_max.max(ys[0]).max(ys[1]);
    }
    if x_max - x_min < 1e-12 {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if y_max - y_min < 1e-12 {
        y_min -= 0.5;
        y_max += 0.5;
    }

    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 60.0;
    let sx = |x: f64| M + (x - x_min) / (x_max - x_min) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y_min) / (y_max - y_min) * (H - 2.0 * M);
    const PALETTE: [&str; 6] = [
        "#1f6fb4", "#c23b22", "#2a9d4e", "#8a56b0", "#b8860b", "#4a4a4a",
    ];

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str(&format!("<!-- config: {} -->\n", config_echo(cfg)));
    svg.push_str(&format!(
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{title}</text>\n",
        W / 2.0
    ));
    // axes
    svg.push_str(&format!(
        "<line x1=\"{M}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        H - M,
        W - M,
        H - M
    ));
    svg.push_str(&format!(
        "<line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        H - M
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">p</text>\n",
        W / 2.0,
        H - M / 3.0
    ));
    for (x, anchor) in [(x_min, "start"), (x_max, "end")] {
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"{anchor}\">{x:.3}</text>\n",
            sx(x),
            H - M + 16.0
        ));
    }
    for y in [y_min, y_max] {
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{y:.3}</text>\n",
            M - 6.0,
            sy(y) + 4.0
        ));
    }

    let mut legend_y = M;
    for (ti, &kbt) in temps.iter().enumerate() {
        let mut series: Vec<(f64, [f64; 2])> = plotted
            .iter()
            .filter(|r| (r.kbt_pev - kbt).abs() < 1e-15)
            .map(|r| (r.p, pick(r.report.as_ref().unwrap())))
            .collect();
        series.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite p"));
        for si in 0..2 {
            let color = PALETTE[(2 * ti + si) % PALETTE.len()];
            let pts: Vec<String> = series
                .iter()
                .map(|(p, ys)| format!("{:.3},{:.3}", sx(*p), sy(ys[si])))
                .collect();
            if pts.len() > 1 {
                svg.push_str(&format!(
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n",
                    pts.join(" ")
                ));
            }
            for pt in &pts {
                let (x, y) = pt.split_once(',').expect("point format");
                svg.push_str(&format!(
                    "<circle cx=\"{x}\" cy=\"{y}\" r=\"2.5\" fill=\"{color}\"/>\n"
                ));
            }
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{legend_y:.2}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{color}\">kBT={kbt} peV: {}</text>\n",
                W - M - 180.0,
                labels[si]
            ));
            legend_y += 14.0;
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Execute a parsed invocation and write its artifact.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Cycle(args) => {
            let cfg = resolve("cycle", &args, None)?;
            let content = match cfg.format {
                OutputFormat::Json => cycle_json(&cfg)?,
                OutputFormat::Csv => {
                    let rows = sweep(&cfg.p_grid[..1], &cfg.temps_pev[..1], &base_cycle_config(&cfg));
                    render_sweep_csv(&rows, &cfg)
                }
                OutputFormat::Svg => {
                    let rows = sweep(&cfg.p_grid[..1], &cfg.temps_pev[..1], &base_cycle_config(&cfg));
                    emit_plot(&rows, args.plot, &cfg)?
                }
            };
            write_artifact(cfg.out_path.as_deref(), &content)
        }
        Command::Sweep(args) => {
            let cfg = resolve("sweep", &args, None)?;
            let rows = sweep(&cfg.p_grid, &cfg.temps_pev, &base_cycle_config(&cfg));
            let content = match cfg.format {
                OutputFormat::Csv => render_sweep_csv(&rows, &cfg),
                OutputFormat::Svg => emit_plot(&rows, args.plot, &cfg)?,
                OutputFormat::Json => {
                    let entries: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|r| match &r.report {
                            Some(rep) => serde_json::json!({
                                "p": r.p, "kBT_pev": r.kbt_pev,
                                "heat_pev": rep.heat_p, "work_pev": rep.work_ext,
                                "heat_cold_pev": rep.heat_cold,
                                "dSa_nats": rep.ds_a, "dSb_nats": rep.ds_b,
                                "eta": rep.efficiency, "power_pev_per_s": rep.power_ext,
                                "backend": r.backend.to_string(), "flags": r.flags,
                            }),
                            None => serde_json::json!({
                                "p": r.p, "kBT_pev": r.kbt_pev,
                                "backend": r.backend.to_string(), "flags": r.flags,
                            }),
                        })
                        .collect();
                    let value = serde_json::json!({
                        "schema": SWEEP_SCHEMA, "config": cfg, "rows": entries,
                    });
                    format!("{}\n", serde_json::to_string_pretty(&value).expect("json"))
                }
            };
            write_artifact(cfg.out_path.as_deref(), &content)
        }
        Command::PulseVerify(args) => {
            let cfg = resolve("pulse-verify", &args.common, None)?;
            let content = match &args.sequence {
                Some(path) => pulse_verify_sequence(path)?,
                None => pulse_verify_table(&cfg, args.points)?,
            };
            write_artifact(cfg.out_path.as_deref(), &content)
        }
        Command::Mc(args) => {
            let cfg = resolve("mc", &args.common, Some(&args))?;
            let content = mc_json(&cfg)?;
            write_artifact(cfg.out_path.as_deref(), &content)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(argv: &[&str]) -> Cli {
        Cli::try_parse_from(argv).expect("argv parses")
    }

    fn run_to_string(argv: &[&str]) -> String {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("artifact");
        let mut full: Vec<String> = argv.iter().map(|s| s.to_string()).collect();
        full.push("--out".into());
        full.push(out.display().to_string());
        let refs: Vec<&str> = full.iter().map(String::as_str).collect();
        run(parse(&refs)).expect("run succeeds");
        std::fs::read_to_string(&out).unwrap()
    }

    #[test]
    fn p_spec_parsing() {
        assert_eq!(parse_p_spec("0.75").unwrap(), vec![0.75]);
        let g = parse_p_spec("0.55:1.0:0.05").unwrap();
        assert_eq!(g.len(), 10);
        assert!(parse_p_spec("a:b").is_err());
        assert!(parse_p_spec("nope").is_err());
    }

    #[test]
    fn kbt_list_parsing() {
        assert_eq!(parse_kbt_list("1.88,2.98").unwrap(), vec![1.88, 2.98]);
        assert!(parse_kbt_list("1.88,x").is_err());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "nu_khz = 1.0\nbanana = 3\n").unwrap();
        let args = parse(&["qme-sim", "sweep", "--config", path.to_str().unwrap()]);
        assert!(matches!(run(args), Err(Error::Config(_))));
    }

    #[test]
    fn config_file_values_apply_and_flags_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(
            &path,
            "nu_khz = 2.0\ntemps_pev = [2.98]\np_grid = \"0.6:0.8:0.1\"\nbackend = \"ideal\"\n",
        )
        .unwrap();
        let cli = parse(&[
            "qme-sim",
            "sweep",
            "--config",
            path.to_str().unwrap(),
            "--nu",
            "1.0",
        ]);
        let Command::Sweep(args) = cli.command else {
            panic!("expected sweep")
        };
        let cfg = resolve("sweep", &args, None).unwrap();
        assert_eq!(cfg.nu_khz, 1.0); // flag wins
        assert_eq!(cfg.temps_pev, vec![2.98]);
        assert_eq!(cfg.p_grid.len(), 3);
    }

    #[test]
    fn sweep_csv_has_schema_and_expected_columns() {
        let csv = run_to_string(&[
            "qme-sim", "sweep", "--p", "0.6:0.8:0.1", "--kbt", "2.98", "--format", "csv",
        ]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "# schema: qme-sweep-v1");
        assert!(lines.next().unwrap().starts_with("# config: {"));
        assert_eq!(
            lines.next().unwrap(),
            "p,kBT_pev,heat_pev,work_pev,heat_cold_pev,dSa_nats,dSb_nats,eta,power_pev_per_s,backend,flags"
        );
        assert_eq!(lines.count(), 3);
        assert!(csv.contains(",ideal,"));
    }

    #[test]
    fn cycle_json_end_to_end_numbers() {
        let text = run_to_string(&[
            "qme-sim", "cycle", "--p", "0.75", "--kbt", "2.98", "--format", "json",
        ]);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!((v["heat_pev"].as_f64().unwrap() - 1.8625521108675243).abs() < 1e-12);
        assert!((v["eta"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(v["engine"], serde_json::json!(true));
    }

    #[test]
    fn svg_output_is_deterministic_and_marks_single_points() {
        let argv = [
            "qme-sim", "sweep", "--p", "0.6:0.9:0.05", "--kbt", "1.88,2.98", "--format", "svg",
        ];
        let a = run_to_string(&argv);
        let b = run_to_string(&argv);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.contains("stroke-dasharray"));

        let single = run_to_string(&[
            "qme-sim", "sweep", "--p", "0.75", "--kbt", "2.98", "--format", "svg",
        ]);
        assert!(single.contains("<circle"));
        assert!(!single.contains("<polyline"));
    }

    #[test]
    fn empty_table_refuses_to_plot() {
        let cli = parse(&["qme-sim", "sweep", "--p", "0.75", "--format", "svg"]);
        let Command::Sweep(args) = cli.command else {
            panic!()
        };
        let cfg = resolve("sweep", &args, None).unwrap();
        assert!(matches!(
            emit_plot(&[], PlotKind::EtaPowerVsP, &cfg),
            Err(Error::NothingToPlot)
        ));
    }

    #[test]
    fn pulse_verify_grid_fidelities() {
        let csv = run_to_string(&["qme-sim", "pulse-verify", "--points", "4"]);
        let mut data_rows = 0;
        for line in csv.lines().skip(3) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 4);
            let noiseless: f64 = cols[2].parse().unwrap();
            let noisy: f64 = cols[3].parse().unwrap();
            assert!(noiseless >= 1.0 - 1e-9, "noiseless fidelity {noiseless}");
            assert!(noisy <= noiseless + 1e-12);
            data_rows += 1;
        }
        assert_eq!(data_rows, 8);
    }

    #[test]
    fn pulse_verify_sequence_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.txt");
        let seq = compile_channel_a(1.0).unwrap();
        std::fs::write(&path, seq.to_text()).unwrap();
        let out = run_to_string(&["qme-sim", "pulse-verify", path.to_str().unwrap()]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["op_count"].as_u64().unwrap() as usize, seq.ops.len());
    }

    #[test]
    fn mc_is_seed_deterministic_via_flag_and_env() {
        let argv = [
            "qme-sim", "mc", "--p", "0.75", "--kbt", "2.98", "--samples", "50", "--seed", "7",
        ];
        let a = run_to_string(&argv);
        let b = run_to_string(&argv);
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        let est = &v["points"][0]["estimates"];
        assert!(est["heat_p"]["std"].as_f64().unwrap() > 0.0);
    }
}
