//! Command dispatch and report rendering.
//!
//! Every subcommand produces the same report envelope: `command`, `config`,
//! `results`, `residuals`, `verdicts`, `runtime_ms`. JSON is the canonical
//! format; text and CSV are flat renderings of the same values, so all
//! formats agree numerically. JSON object keys are sorted, which keeps the
//! byte output deterministic for a given configuration.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use kcbs::charts::{enumerate_charts, ChartClass, CHART_COUNT};
use kcbs::experiment::{evaluate, run_trials, ModelSpec, PairingScheme, Predictions};
use kcbs::geometry::{build_pentagram, pentagram_edges, VertexId};
use kcbs::lhv::{
    biased_klyachko_sum, biased_marginals, marginal_polytope_vertices, mixture_marginal,
    pentagon_edge_joint, pentagon_sum, pentagon_sum_bounds, solve_marginal_mixtures, BiasSpec,
    MixtureWeights, PentagonEdge,
};
use kcbs::quantum::{
    canonical_entangled_state, joint_distribution, max_chsh, pair_correlator, pentagon_sum_quantum,
    single_particle_klyachko_sum, QutritState,
};

#[derive(Parser)]
#[command(
    name = "kcbs",
    version,
    about = "Pentagram contextuality: geometry, charts, bounds, and Monte Carlo experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the five directions, the derived scalars, and identity residuals
    Geometry(AnalysisArgs),
    /// List the eleven value charts in canonical order
    Charts(AnalysisArgs),
    /// Headline classical-versus-quantum numbers for both inequalities
    Inequalities(AnalysisArgs),
    /// Pentagon-sum bounds over marginal-matching mixtures, with witnesses
    LhvBounds(AnalysisArgs),
    /// Simulate the two-particle experiment and check it against its model
    Simulate(SimulateArgs),
    /// Correlator table and the best CHSH combination over the vertices
    Chsh(AnalysisArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Csv,
}

impl FormatArg {
    fn name(self) -> &'static str {
        match self {
            FormatArg::Text => "text",
            FormatArg::Json => "json",
            FormatArg::Csv => "csv",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Quantum,
    Lhv,
    Biased,
}

impl ModelArg {
    fn name(self) -> &'static str {
        match self {
            ModelArg::Quantum => "quantum",
            ModelArg::Lhv => "lhv",
            ModelArg::Biased => "biased",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PairingArg {
    Mixed,
    Same,
    Pentagram,
    Pentagon,
}

impl PairingArg {
    fn scheme(self) -> PairingScheme {
        match self {
            PairingArg::Mixed => PairingScheme::Mixed,
            PairingArg::Same => PairingScheme::Same,
            PairingArg::Pentagram => PairingScheme::Pentagram,
            PairingArg::Pentagon => PairingScheme::Pentagon,
        }
    }

    fn name(self) -> &'static str {
        match self {
            PairingArg::Mixed => "mixed",
            PairingArg::Same => "same",
            PairingArg::Pentagram => "pentagram",
            PairingArg::Pentagon => "pentagon",
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output format
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Write the report to this path instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalysisArgs {
    #[command(flatten)]
    output: OutputArgs,
    /// Largest acceptable residual for exact identities
    #[arg(long, default_value_t = 1e-12, value_parser = positive_real)]
    tolerance: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    output: OutputArgs,
    /// Outcome model
    #[arg(long, value_enum, default_value = "quantum")]
    model: ModelArg,
    /// Chart mixture for --model lhv: m21, m20, or a weight file
    #[arg(long, default_value = "m21")]
    mixture: String,
    /// Context bias for --model biased: half, quantum-matching, or a weight file
    #[arg(long, default_value = "quantum-matching")]
    bias: String,
    /// How the second measured vertex relates to the first
    #[arg(long, value_enum, default_value = "mixed")]
    pairing: PairingArg,
    /// Number of trials (at least 1)
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// RNG seed; identical seeds reproduce identical results
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Allowed deviation between estimate and target, in standard errors
    #[arg(long, default_value_t = 4.0, value_parser = positive_real)]
    tolerance: f64,
}

fn positive_real(s: &str) -> Result<f64, String> {
    let value: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err("must be a positive finite number".to_string())
    }
}

#[derive(Serialize)]
struct Report {
    command: String,
    config: Value,
    results: Value,
    residuals: Value,
    verdicts: Value,
    runtime_ms: u64,
}

struct Sections {
    config: Value,
    results: Value,
    residuals: Value,
    verdicts: Value,
    exit_code: i32,
}

pub fn run(cli: Cli) -> anyhow::Result<i32> {
    let start = Instant::now();
    let (name, output, sections) = match cli.command {
        Command::Geometry(args) => ("geometry", args.output, cmd_geometry(args.tolerance)),
        Command::Charts(args) => ("charts", args.output, cmd_charts()),
        Command::Inequalities(args) => (
            "inequalities",
            args.output,
            cmd_inequalities(args.tolerance),
        ),
        Command::LhvBounds(args) => ("lhv-bounds", args.output, cmd_lhv_bounds(args.tolerance)),
        Command::Chsh(args) => ("chsh", args.output, cmd_chsh(args.tolerance)),
        Command::Simulate(args) => {
            let output = OutputArgs {
                format: args.output.format,
                out: args.output.out.clone(),
            };
            ("simulate", output, cmd_simulate(&args)?)
        }
    };
    let report = Report {
        command: name.to_string(),
        config: sections.config,
        results: sections.results,
        residuals: sections.residuals,
        verdicts: sections.verdicts,
        runtime_ms: start.elapsed().as_millis() as u64,
    };
    emit(&report, output.format, output.out.as_deref())?;
    Ok(sections.exit_code)
}

fn vertex_array(v: kcbs::geometry::UnitVector3) -> Value {
    let c = v.components();
    json!([c[0], c[1], c[2]])
}

fn cmd_geometry(tolerance: f64) -> Sections {
    let frame = build_pentagram();
    let vertices: Value = VertexId::all()
        .into_iter()
        .map(|v| (format!("v{v}"), vertex_array(frame.vertex(v))))
        .collect::<serde_json::Map<String, Value>>()
        .into();

    let r = frame.circle_height();
    let s = frame.circle_radius();
    let axis = frame.axis();
    let max_edge_dot = pentagram_edges()
        .into_iter()
        .map(|(a, b)| frame.vertex(a).dot(frame.vertex(b)).abs())
        .fold(0.0f64, f64::max);
    let max_norm_error = frame
        .vertices()
        .iter()
        .map(|v| (v.vector().norm() - 1.0).abs())
        .fold(0.0f64, f64::max);
    let max_overlap_error = frame
        .vertices()
        .iter()
        .map(|v| (axis.dot(*v).powi(2) - 1.0 / 5f64.sqrt()).abs())
        .fold(0.0f64, f64::max);
    let cos_chi = frame.pentagon_angle().cos();

    let residuals = json!({
        "max_edge_dot": max_edge_dot,
        "max_norm_error": max_norm_error,
        "max_overlap_error": max_overlap_error,
        "sphere_identity": (r * r + s * s - 1.0).abs(),
        "cos_chi_identity": (cos_chi - (5f64.sqrt() - 1.0) / 2.0).abs(),
        "radius_identity": (s - 1.0 / (2f64.sqrt() * (std::f64::consts::PI / 10.0).cos())).abs(),
    });
    let verdicts = residual_verdicts(&residuals, tolerance);
    Sections {
        config: json!({ "tolerance": tolerance }),
        results: json!({
            "vertices": vertices,
            "axis": vertex_array(axis),
            "r": r,
            "s": s,
            "phi": frame.axis_angle(),
            "chi": frame.pentagon_angle(),
            "cos_chi": cos_chi,
            "axis_overlap_squared": r * r,
        }),
        residuals,
        verdicts,
        exit_code: 0,
    }
}

/// One boolean per residual plus an `all_ok` rollup.
fn residual_verdicts(residuals: &Value, tolerance: f64) -> Value {
    let map = residuals.as_object().expect("residuals are a map");
    let mut verdicts = serde_json::Map::new();
    let mut all_ok = true;
    for (key, value) in map {
        let ok = value.as_f64().is_some_and(|r| r.abs() <= tolerance);
        all_ok &= ok;
        verdicts.insert(format!("{key}_ok"), Value::Bool(ok));
    }
    verdicts.insert("all_ok".to_string(), Value::Bool(all_ok));
    verdicts.into()
}

fn cmd_charts() -> Sections {
    let charts = enumerate_charts();
    let list: Vec<Value> = charts
        .iter()
        .enumerate()
        .map(|(index, chart)| {
            let class = match chart.class() {
                ChartClass::C0 => "C0",
                ChartClass::C1 => "C1",
                ChartClass::C2 => "C2",
            };
            json!({
                "index": index,
                "values": chart.values().to_vec(),
                "class": class,
                "ones": chart.ones(),
            })
        })
        .collect();
    let count_class = |class: ChartClass| charts.iter().filter(|c| c.class() == class).count();
    let census = json!({
        "c0": count_class(ChartClass::C0),
        "c1": count_class(ChartClass::C1),
        "c2": count_class(ChartClass::C2),
    });
    let count_ok = charts.len() == CHART_COUNT;
    let census_ok = count_class(ChartClass::C0) == 1
        && count_class(ChartClass::C1) == 5
        && count_class(ChartClass::C2) == 5;
    Sections {
        config: json!({}),
        results: json!({
            "count": charts.len(),
            "census": census,
            "charts": list,
        }),
        residuals: json!({}),
        verdicts: json!({
            "count_is_eleven": count_ok,
            "census_is_1_5_5": census_ok,
            "all_ok": count_ok && census_ok,
        }),
        exit_code: 0,
    }
}

fn cmd_inequalities(tolerance: f64) -> Sections {
    let frame = build_pentagram();
    let state = canonical_entangled_state();
    let axis_state = QutritState::from_direction(frame.axis());
    let mixtures = solve_marginal_mixtures();
    let bounds = pentagon_sum_bounds();

    let klyachko_quantum = single_particle_klyachko_sum(&frame, &axis_state);
    let pentagon_quantum = pentagon_sum_quantum(&state, &frame);
    let edge = PentagonEdge::all()[0];
    let (ea, eb) = edge.endpoints();
    let edge_joint_quantum = joint_distribution(&state, &frame, ea, eb).p11;
    let edge_joint_m21 = pentagon_edge_joint(&mixtures.m21, &edge);
    let edge_joint_m20 = pentagon_edge_joint(&mixtures.m20, &edge);
    let marginal_quantum = joint_distribution(&state, &frame, ea, ea).a_marginal();
    let bias_half = BiasSpec::half_half();
    let bias_qm = BiasSpec::quantum_matching();
    let chsh = max_chsh(&state, &frame);

    // Second routes for the headline numbers: overlap geometry instead of
    // state algebra, closed forms instead of sums.
    let cos_chi = frame.pentagon_angle().cos();
    let residuals = json!({
        "klyachko_quantum_vs_overlap": (klyachko_quantum - 5.0 * frame.circle_height().powi(2)).abs(),
        "pentagon_quantum_vs_closed_form": (pentagon_quantum - 5.0 * (3.0 - 5f64.sqrt()) / 6.0).abs(),
        "edge_joint_quantum_vs_overlap": (edge_joint_quantum - cos_chi * cos_chi / 3.0).abs(),
        "edge_joint_m21_vs_rational": (edge_joint_m21 - 2.0 / 15.0).abs(),
        "edge_joint_m20_vs_rational": (edge_joint_m20 - 1.0 / 6.0).abs(),
        "bias_marginal_vs_target": biased_marginals(&bias_qm)
            .iter()
            .map(|m| (m - 1.0 / 5f64.sqrt()).abs())
            .fold(0.0f64, f64::max),
    });
    let mut verdicts = residual_verdicts(&residuals, tolerance)
        .as_object()
        .cloned()
        .expect("verdict map");
    verdicts.insert(
        "quantum_violates_klyachko".into(),
        Value::Bool(klyachko_quantum > 2.0),
    );
    verdicts.insert(
        "quantum_below_pentagon_window".into(),
        Value::Bool(pentagon_quantum < bounds.min),
    );
    verdicts.insert(
        "chsh_within_classical_bound".into(),
        Value::Bool(chsh.value <= 2.0 + tolerance),
    );

    Sections {
        config: json!({ "tolerance": tolerance }),
        results: json!({
            "klyachko_noncontextual_max": 2.0,
            "klyachko_quantum": klyachko_quantum,
            "klyachko_biased_half": biased_klyachko_sum(&bias_half),
            "klyachko_biased_quantum_matching": biased_klyachko_sum(&bias_qm),
            "marginal_quantum": marginal_quantum,
            "marginal_biased_quantum_matching": biased_marginals(&bias_qm)[0],
            "pentagon_noncontextual_min": bounds.min,
            "pentagon_noncontextual_max": bounds.max,
            "pentagon_quantum": pentagon_quantum,
            "pentagon_edge_quantum": edge_joint_quantum,
            "pentagon_edge_m21": edge_joint_m21,
            "pentagon_edge_m20": edge_joint_m20,
            "chsh_noncontextual_max": 2.0,
            "chsh_quantum_max": chsh.value,
        }),
        residuals,
        verdicts: verdicts.into(),
        exit_code: 0,
    }
}

fn cmd_lhv_bounds(tolerance: f64) -> Sections {
    let bounds = pentagon_sum_bounds();
    let vertices = marginal_polytope_vertices();
    let mixtures = solve_marginal_mixtures();

    let witness_marginal_error = [&bounds.argmin, &bounds.argmax]
        .iter()
        .flat_map(|m| {
            VertexId::all()
                .into_iter()
                .map(|v| (mixture_marginal(m, v) - 1.0 / 3.0).abs())
        })
        .fold(0.0f64, f64::max);
    let m20_matches_argmax = bounds
        .argmax
        .weights()
        .iter()
        .zip(mixtures.m20.weights())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);

    let residuals = json!({
        "min_vs_closed_form": (bounds.min - 2.0 / 3.0).abs(),
        "max_vs_closed_form": (bounds.max - 5.0 / 6.0).abs(),
        "argmin_attains_min": (pentagon_sum(&bounds.argmin) - bounds.min).abs(),
        "argmax_attains_max": (pentagon_sum(&bounds.argmax) - bounds.max).abs(),
        "witness_marginals_vs_third": witness_marginal_error,
        "argmax_vs_m20": m20_matches_argmax,
    });
    let verdicts = residual_verdicts(&residuals, tolerance);
    Sections {
        config: json!({ "tolerance": tolerance }),
        results: json!({
            "vertex_count": vertices.len(),
            "pentagon_min": bounds.min,
            "pentagon_max": bounds.max,
            "argmin_weights": bounds.argmin.weights().to_vec(),
            "argmax_weights": bounds.argmax.weights().to_vec(),
            "m21_weights": mixtures.m21.weights().to_vec(),
            "m20_weights": mixtures.m20.weights().to_vec(),
            "m21_pentagon_sum": pentagon_sum(&mixtures.m21),
            "m20_pentagon_sum": pentagon_sum(&mixtures.m20),
        }),
        residuals,
        verdicts,
        exit_code: 0,
    }
}

fn cmd_chsh(tolerance: f64) -> Sections {
    let frame = build_pentagram();
    let state = canonical_entangled_state();
    let table: Vec<Vec<f64>> = VertexId::all()
        .into_iter()
        .map(|a| {
            VertexId::all()
                .into_iter()
                .map(|b| pair_correlator(&state, &frame, a, b))
                .collect()
        })
        .collect();
    let v = |l: u8| VertexId::new(l).expect("label in range");
    let same = pair_correlator(&state, &frame, v(1), v(1));
    let pentagram = pair_correlator(&state, &frame, v(1), v(2));
    let pentagon = pair_correlator(&state, &frame, v(1), v(3));
    let best = max_chsh(&state, &frame);
    let (a1, a2, b1, b2) = best.vertices;

    let residuals = json!({
        "same_vs_one": (same - 1.0).abs(),
        "pentagram_vs_minus_third": (pentagram + 1.0 / 3.0).abs(),
        "pentagon_vs_closed_form": (pentagon - (5.0 - 2.0 * 5f64.sqrt()) / 3.0).abs(),
        "max_vs_classical_bound": (best.value - 2.0).abs(),
    });
    let mut verdicts = residual_verdicts(&residuals, tolerance)
        .as_object()
        .cloned()
        .expect("verdict map");
    verdicts.insert(
        "within_classical_bound".into(),
        Value::Bool(best.value <= 2.0 + tolerance),
    );
    verdicts.insert(
        "pentagon_below_third".into(),
        Value::Bool(pentagon.abs() <= 1.0 / 3.0),
    );
    Sections {
        config: json!({ "tolerance": tolerance }),
        results: json!({
            "correlator_same": same,
            "correlator_pentagram": pentagram,
            "correlator_pentagon": pentagon,
            "table": table,
            "max": best.value,
            "max_vertices": [a1.label(), a2.label(), b1.label(), b2.label()],
            "classical_bound": 2.0,
        }),
        residuals,
        verdicts: verdicts.into(),
        exit_code: 0,
    }
}

fn cmd_simulate(args: &SimulateArgs) -> anyhow::Result<Sections> {
    let (model, model_config) = resolve_model(args)?;
    let pairing = args.pairing.scheme();
    let stats =
        run_trials(&model, pairing, args.trials, args.seed).context("simulation failed to run")?;
    let predictions = Predictions::for_model(&model, pairing);
    let evaluation = evaluate(&stats, &predictions, args.tolerance).context("evaluation failed")?;

    let config = json!({
        "model": args.model.name(),
        "model_detail": model_config,
        "pairing": args.pairing.name(),
        "trials": args.trials,
        "seed": args.seed,
        "tolerance_sigma": args.tolerance,
        "format": args.output.format.name(),
    });
    let results = json!({
        "stats": serde_json::to_value(&stats)?,
        "predictions": serde_json::to_value(&predictions)?,
    });
    let residuals = json!({
        "checks": serde_json::to_value(&evaluation.checks)?,
    });
    let verdicts = json!({
        "all_pass": evaluation.all_pass,
        "klyachko": serde_json::to_value(&evaluation.klyachko_verdict)?,
        "pentagon": serde_json::to_value(&evaluation.pentagon_verdict)?,
    });
    Ok(Sections {
        config,
        results,
        residuals,
        verdicts,
        exit_code: if evaluation.all_pass { 0 } else { 1 },
    })
}

fn resolve_model(args: &SimulateArgs) -> anyhow::Result<(ModelSpec, Value)> {
    match args.model {
        ModelArg::Quantum => Ok((ModelSpec::Quantum, json!({ "state": "entangled" }))),
        ModelArg::Lhv => {
            let (mixture, detail) = resolve_mixture(&args.mixture)?;
            Ok((ModelSpec::Lhv(mixture), detail))
        }
        ModelArg::Biased => {
            let (bias, detail) = resolve_bias(&args.bias)?;
            Ok((ModelSpec::Biased(Box::new(bias)), detail))
        }
    }
}

fn resolve_mixture(selector: &str) -> anyhow::Result<(MixtureWeights, Value)> {
    let mixtures = solve_marginal_mixtures();
    let (mixture, source) = match selector {
        "m21" => (mixtures.m21, "m21".to_string()),
        "m20" => (mixtures.m20, "m20".to_string()),
        path => {
            let raw = read_weight_file(Path::new(path), CHART_COUNT)
                .with_context(|| format!("mixture file {path}"))?;
            let weights: [f64; CHART_COUNT] = raw.try_into().expect("length checked by the reader");
            let mixture = MixtureWeights::normalized(weights)
                .map_err(|e| anyhow::anyhow!("mixture file {path}: {e}"))?;
            (mixture, path.to_string())
        }
    };
    let detail = json!({
        "mixture": source,
        "weights": mixture.weights().to_vec(),
    });
    Ok((mixture, detail))
}

fn resolve_bias(selector: &str) -> anyhow::Result<(BiasSpec, Value)> {
    let (bias, source) = match selector {
        "half" => (BiasSpec::half_half(), "half".to_string()),
        "quantum-matching" => (BiasSpec::quantum_matching(), "quantum-matching".to_string()),
        path => {
            let raw = read_weight_file(Path::new(path), 5 * CHART_COUNT)
                .with_context(|| format!("bias file {path}"))?;
            let mut rows = Vec::with_capacity(5);
            for context in 0..5 {
                let row: [f64; CHART_COUNT] = raw[context * CHART_COUNT..][..CHART_COUNT]
                    .try_into()
                    .expect("chunk of eleven");
                rows.push(MixtureWeights::normalized(row).map_err(|e| {
                    anyhow::anyhow!("bias file {path}, context {}: {e}", context + 1)
                })?);
            }
            let rows: [MixtureWeights; 5] = rows.try_into().expect("five contexts");
            (BiasSpec::new(rows), path.to_string())
        }
    };
    let weights: Vec<Vec<f64>> = (0..5)
        .map(|ctx| bias.context_weights(ctx).weights().to_vec())
        .collect();
    let detail = json!({
        "bias": source,
        "context_weights": weights,
    });
    Ok((bias, detail))
}

/// Whitespace-separated decimals; `#` starts a comment that runs to the end
/// of the line. The file must hold exactly `expected` values.
fn read_weight_file(path: &Path, expected: usize) -> anyhow::Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut values = Vec::new();
    for line in text.lines() {
        let data = line.split('#').next().unwrap_or("");
        for token in data.split_whitespace() {
            let value: f64 = token
                .parse()
                .with_context(|| format!("bad weight {token:?}"))?;
            values.push(value);
        }
    }
    anyhow::ensure!(
        values.len() == expected,
        "expected {expected} weights, found {}",
        values.len()
    );
    Ok(values)
}

fn emit(report: &Report, format: FormatArg, out: Option<&Path>) -> anyhow::Result<()> {
    let body = match format {
        FormatArg::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            s
        }
        FormatArg::Text => render_text(report),
        FormatArg::Csv => render_csv(report),
    };
    match out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {path:?}"))?,
        None => print!("{body}"),
    }
    Ok(())
}

fn render_text(report: &Report) -> String {
    let mut lines = vec![format!("# {} ({} ms)", report.command, report.runtime_ms)];
    for (section, value) in [
        ("config", &report.config),
        ("results", &report.results),
        ("residuals", &report.residuals),
        ("verdicts", &report.verdicts),
    ] {
        let mut rows = Vec::new();
        flatten(section, value, &mut rows);
        if rows.is_empty() {
            continue;
        }
        lines.push(String::new());
        lines.push(format!("[{section}]"));
        for (key, val) in rows {
            lines.push(format!("{key} = {val}"));
        }
    }
    lines.push(String::new());
    lines.join("\n")
}

fn render_csv(report: &Report) -> String {
    // A simulate run renders its checks as one row per tallied quantity;
    // everything else falls back to flat field,value rows.
    if let Some(checks) = report
        .residuals
        .get("checks")
        .and_then(|c| c.as_array())
        .filter(|_| report.command == "simulate")
    {
        let mut lines =
            vec!["quantity,estimate,std_error,target,abs_error,tolerance,pass".to_string()];
        for check in checks {
            let f = |key: &str| leaf_to_string(check.get(key).unwrap_or(&Value::Null));
            lines.push(format!(
                "{},{},{},{},{},{},{}",
                f("name"),
                f("estimate"),
                f("std_error"),
                f("target"),
                f("abs_error"),
                f("tolerance"),
                f("pass"),
            ));
        }
        lines.push(String::new());
        return lines.join("\n");
    }
    let mut rows = Vec::new();
    for (section, value) in [
        ("config", &report.config),
        ("results", &report.results),
        ("residuals", &report.residuals),
        ("verdicts", &report.verdicts),
    ] {
        flatten(section, value, &mut rows);
    }
    let mut lines = vec!["field,value".to_string()];
    for (key, val) in rows {
        lines.push(format!("{key},{val}"));
    }
    lines.push(String::new());
    lines.join("\n")
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (key, child) in map {
                flatten(&format!("{prefix}.{key}"), child, rows);
            }
        }
        Value::Array(items) => {
            for (index, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{index}]"), child, rows);
            }
        }
        leaf => rows.push((prefix.to_string(), leaf_to_string(leaf))),
    }
}

fn leaf_to_string(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
