use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use rcl::calculus::{apply_r1, apply_r2, apply_r3, apply_r4, build_system_model, render_fotl, render_header, CompositionResult};
use rcl::diag::Diagnostic;
use rcl::discharge::{discharge, DomainBounds, Verdict};
use rcl::monitor::{parse_trace, run};
use rcl::rml::{emit_monitor_config, emit_rml, parse_rml, synthesize};
use rcl::syntax::{parse_document_with_spans, render_latex};
use rcl::typeck::{check_document_spanned, TypedContract};

const OK: u8 = 0;
const FAILED: u8 = 1;
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "contractc", version, about = "Check, compose and monitor assume-guarantee node contracts")]
struct Cli {
    /// TOML file with discharge bounds (real_grid, natural_bound, max_assignments, [overrides]).
    #[arg(long, global = true)]
    bounds: Option<PathBuf>,
    /// Output directory for `synth`; for other subcommands the report is written to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    R1,
    R2,
    R3,
    R4,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and typecheck contract files.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Apply a composition rule, discharge its obligations and print the derived property.
    Compose {
        /// Contract files; contracts from all files are pooled.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Wiring file, one `Node.output -> Node.input` edge per line.
        #[arg(long)]
        wiring: PathBuf,
        #[arg(long, value_enum)]
        rule: RuleArg,
        /// Comma-separated nodes. R1: the chain in order. R2: root, then leaves.
        /// R3: sources, then the sink. R4: n1,n2,n3,n4.
        #[arg(long, value_delimiter = ',', required = true)]
        nodes: Vec<String>,
    },
    /// Write `<node>.rml` and `<node>_config.yaml` for each contract.
    Synth {
        file: PathBuf,
        /// Only this node.
        #[arg(long)]
        node: Option<String>,
    },
    /// Check a JSON-lines trace against an RML specification.
    Monitor { rml: PathBuf, trace: PathBuf },
    /// Print contracts as LaTeX.
    Latex {
        file: PathBuf,
        /// Only this node.
        #[arg(long)]
        node: Option<String>,
    },
}

struct Outcome {
    code: u8,
    text: String,
    json: Json,
}

fn read(p: &Path) -> Result<String, String> {
    fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))
}

fn rendered(file: &Path, diags: &[Diagnostic]) -> Vec<String> {
    diags.iter().map(|d| d.render(&file.display().to_string())).collect()
}

/// Parses and checks one file, returning its contracts or printable diagnostics.
fn load(file: &Path) -> Result<Vec<TypedContract>, Vec<String>> {
    let src = read(file).map_err(|e| vec![e])?;
    let (doc, spans) = parse_document_with_spans(&src).map_err(|d| rendered(file, &d))?;
    check_document_spanned(&doc, Some(&spans)).map_err(|d| rendered(file, &d))
}

fn cmd_check(files: &[PathBuf]) -> Outcome {
    let mut text = String::new();
    let mut reports = Vec::new();
    let mut code = OK;
    for f in files {
        match load(f) {
            Ok(cs) => {
                text.push_str(&format!("{}: ok ({} contracts)\n", f.display(), cs.len()));
                reports.push(json!({"file": f.display().to_string(), "ok": true, "contracts": cs.iter().map(|c| c.node()).collect::<Vec<_>>()}));
            }
            Err(ds) => {
                code = USAGE;
                for d in &ds {
                    text.push_str(d);
                    text.push('\n');
                }
                reports.push(json!({"file": f.display().to_string(), "ok": false, "diagnostics": ds}));
            }
        }
    }
    Outcome { code, text, json: json!({ "files": reports }) }
}

fn apply(rule: RuleArg, model: &rcl::calculus::SystemModel, nodes: &[String]) -> Result<CompositionResult, Vec<Diagnostic>> {
    let n: Vec<&str> = nodes.iter().map(String::as_str).collect();
    let arity = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(vec![Diagnostic::error("C000", Default::default(), msg)]) };
    match rule {
        RuleArg::R1 => apply_r1(model, &n),
        RuleArg::R2 => {
            arity(n.len() >= 2, "R2 needs a root and at least one leaf")?;
            apply_r2(model, n[0], &n[1..])
        }
        RuleArg::R3 => {
            arity(n.len() >= 2, "R3 needs at least one source and a sink")?;
            apply_r3(model, &n[..n.len() - 1], n[n.len() - 1])
        }
        RuleArg::R4 => {
            arity(n.len() == 4, "R4 needs exactly four nodes")?;
            apply_r4(model, n[0], n[1], n[2], n[3])
        }
    }
}

fn cmd_compose(files: &[PathBuf], wiring: &Path, rule: RuleArg, nodes: &[String], bounds: Option<&Path>) -> Outcome {
    let fail = |lines: Vec<String>| Outcome { code: USAGE, text: lines.join("\n") + "\n", json: json!({ "errors": lines }) };
    let mut contracts = Vec::new();
    for f in files {
        match load(f) {
            Ok(cs) => contracts.extend(cs),
            Err(ds) => return fail(ds),
        }
    }
    let wiring_src = match read(wiring) {
        Ok(s) => s,
        Err(e) => return fail(vec![e]),
    };
    let model = match build_system_model(&wiring_src, &contracts) {
        Ok(m) => m,
        Err(ds) => return fail(rendered(wiring, &ds)),
    };
    let result = match apply(rule, &model, nodes) {
        Ok(r) => r,
        Err(ds) => return fail(rendered(wiring, &ds)),
    };
    let user_bounds = match bounds {
        None => None,
        Some(p) => match read(p).and_then(|s| DomainBounds::from_toml(&s, DomainBounds::default()).map_err(|e| format!("{}: {e}", p.display()))) {
            Ok(b) => Some(b),
            Err(e) => return fail(vec![e]),
        },
    };
    let ctx = &model.contracts.values().next().expect("model has contracts").context;

    let mut code = OK;
    let mut text = format!("rule {} over {}\n", result.rule, result.participants.join(", "));
    let mut obligations = Vec::new();
    for (i, ob) in result.obligations.iter().enumerate() {
        let b = user_bounds.clone().unwrap_or_else(|| DomainBounds::derived_for(&[&ob.antecedent, &ob.consequent]));
        let v = discharge(ob, &b, ctx);
        if matches!(v, Verdict::Counterexample(_)) {
            code = FAILED;
        }
        let header = render_header(&ob.quantified_vars);
        let body = render_fotl(ob);
        text.push_str(&format!("obligation {}:\n  {header}\n  {body}\n  {v}\n", i + 1));
        obligations.push(json!({
            "header": header,
            "formula": body,
            "verdict": v.kind(),
            "detail": v.to_string(),
        }));
    }
    let derived = render_fotl(&result.derived);
    text.push_str(&format!("derived:\n  {}\n  {derived}\n", render_header(&result.derived.quantified_vars)));
    for n in &result.notes {
        text.push_str(&format!("note: {n}\n"));
    }
    Outcome {
        code,
        text,
        json: json!({
            "rule": result.rule.to_string(),
            "participants": result.participants,
            "obligations": obligations,
            "derived": derived,
            "notes": result.notes,
        }),
    }
}

fn selected<'a>(cs: &'a [TypedContract], node: Option<&str>) -> Result<Vec<&'a TypedContract>, String> {
    let picked: Vec<&TypedContract> = cs.iter().filter(|c| node.is_none_or(|n| c.node() == n)).collect();
    match node {
        Some(n) if picked.is_empty() => Err(format!("no contract for node `{n}`")),
        _ => Ok(picked),
    }
}

fn cmd_synth(file: &Path, node: Option<&str>, out: &Path) -> Outcome {
    let fail = |lines: Vec<String>| Outcome { code: USAGE, text: lines.join("\n") + "\n", json: json!({ "errors": lines }) };
    let contracts = match load(file) {
        Ok(cs) => cs,
        Err(ds) => return fail(ds),
    };
    let picked = match selected(&contracts, node) {
        Ok(p) => p,
        Err(e) => return fail(vec![e]),
    };
    let src = read(file).unwrap_or_default();
    let spans = parse_document_with_spans(&src).ok().map(|(_, s)| s);
    if let Err(e) = fs::create_dir_all(out) {
        return fail(vec![format!("{}: {e}", out.display())]);
    }
    let mut text = String::new();
    let mut written = Vec::new();
    let mut warnings = Vec::new();
    for (i, tc) in contracts.iter().enumerate() {
        if !picked.iter().any(|p| std::ptr::eq(*p, tc)) {
            continue;
        }
        let cs = spans.as_ref().and_then(|s| s.contracts.get(i));
        let syn = match synthesize(tc, cs) {
            Ok(s) => s,
            Err(ds) => return fail(rendered(file, &ds)),
        };
        for w in rendered(file, &syn.warnings) {
            text.push_str(&w);
            text.push('\n');
            warnings.push(w);
        }
        let node = tc.node();
        let rml_path = out.join(format!("{node}.rml"));
        let yaml_path = out.join(format!("{node}_config.yaml"));
        let yaml = emit_monitor_config(tc, &format!("./{node}_log.txt"));
        for (p, body) in [(&rml_path, emit_rml(&syn.spec)), (&yaml_path, yaml)] {
            if let Err(e) = fs::write(p, body) {
                return fail(vec![format!("{}: {e}", p.display())]);
            }
            text.push_str(&format!("wrote {}\n", p.display()));
            written.push(p.display().to_string());
        }
    }
    Outcome { code: OK, text, json: json!({ "written": written, "warnings": warnings }) }
}

fn cmd_monitor(rml: &Path, trace: &Path) -> Outcome {
    let fail = |lines: Vec<String>| Outcome { code: USAGE, text: lines.join("\n") + "\n", json: json!({ "errors": lines }) };
    let spec = match read(rml).and_then(|s| parse_rml(&s).map_err(|e| format!("{}:{}:{}: error: {}", rml.display(), e.line, e.col, e.message))) {
        Ok(s) => s,
        Err(e) => return fail(vec![e]),
    };
    let tr = match read(trace).and_then(|s| parse_trace(&s).map_err(|e| format!("{}: {e}", trace.display()))) {
        Ok(t) => t,
        Err(e) => return fail(vec![e]),
    };
    let report = match run(&spec, &tr) {
        Ok(r) => r,
        Err(e) => return fail(vec![format!("{}: {e}", rml.display())]),
    };
    let code = if report.violation_index.is_some() { FAILED } else { OK };
    Outcome { code, text: report.table(), json: serde_json::to_value(&report).expect("report serializes") }
}

fn cmd_latex(file: &Path, node: Option<&str>) -> Outcome {
    let fail = |lines: Vec<String>| Outcome { code: USAGE, text: lines.join("\n") + "\n", json: json!({ "errors": lines }) };
    let contracts = match load(file) {
        Ok(cs) => cs,
        Err(ds) => return fail(ds),
    };
    let picked = match selected(&contracts, node) {
        Ok(p) => p,
        Err(e) => return fail(vec![e]),
    };
    let blocks: Vec<String> = picked.iter().map(|c| render_latex(&c.contract)).collect();
    let nodes: Vec<&str> = picked.iter().map(|c| c.node()).collect();
    Outcome { code: OK, text: blocks.join("\n"), json: json!({ "nodes": nodes, "latex": blocks }) }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let bounds = cli.bounds.as_deref();
    let outcome = match &cli.cmd {
        Cmd::Check { files } => cmd_check(files),
        Cmd::Compose { files, wiring, rule, nodes } => cmd_compose(files, wiring, *rule, nodes, bounds),
        Cmd::Synth { file, node } => cmd_synth(file, node.as_deref(), cli.out.as_deref().unwrap_or(Path::new("."))),
        Cmd::Monitor { rml, trace } => cmd_monitor(rml, trace),
        Cmd::Latex { file, node } => cmd_latex(file, node.as_deref()),
    };
    let body = match cli.format {
        Format::Text => outcome.text,
        Format::Json => serde_json::to_string_pretty(&outcome.json).expect("json") + "\n",
    };
    let to_file = match (&cli.cmd, &cli.out) {
        (Cmd::Synth { .. }, _) | (_, None) => None,
        (_, Some(p)) => Some(p),
    };
    match to_file {
        Some(p) => {
            if let Err(e) = fs::write(p, &body) {
                eprintln!("{}: {e}", p.display());
                return ExitCode::from(USAGE);
            }
        }
        None if outcome.code == USAGE => eprint!("{body}"),
        None => print!("{body}"),
    }
    ExitCode::from(outcome.code)
}
