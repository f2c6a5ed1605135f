//! The command-line surface: checking, unfolding, translation, Herbrand
//! extraction, and canonical formatting.
//!
//! Exit codes: 0 for success or a valid verdict, 1 for invalid input with
//! diagnostics, 2 for internal errors. In JSON mode every diagnostic and
//! result is one record on stdout; in text mode results go to stdout and
//! diagnostics to stderr.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::check::{check_derivation, CheckContext, CheckOptions, CheckReport, MvIndMode};
use crate::evaluation::{unfold, verify_unfolded, UnfoldOptions, UNFOLD_FUEL};
use crate::herbrand::{
    extract_herbrand_system, normalize_witnesses, parse_system, print_system,
    verify_herbrand_disjunction,
};
use crate::psk::{parse_document, print_document, Diagnostic, Item, PskDocument};
use crate::rewrite::DEFAULT_FUEL;
use crate::schema::{validate_schema, PSchema};
use crate::sig::Signature;
use crate::subst::Subst;
use crate::translate::{
    eliminate_e_rule, generalize, mvlkie_to_schema, schema_to_mvlkie, to_pra, AxPaBase,
};

pub const FUEL_ENV: &str = "SCHEMAKERN_FUEL";

#[derive(Parser)]
#[command(name = "schemakern", version, about = "proof schema kernel")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Rewrite and unfolding step budget.
    #[arg(long, global = true)]
    fuel: Option<u64>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for randomized internal orders.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a document, validate its schemata, and check its proofs.
    Check(CheckArgs),
    /// Evaluate a schema at a ground passive substitution.
    Unfold(UnfoldArgs),
    /// Run translation passes between schemata and induction proofs.
    Translate(TranslateArgs),
    /// Herbrand systems of strict existential schemata.
    #[command(subcommand)]
    Herbrand(HerbrandCommand),
    /// Rewrite a document into canonical form.
    Fmt(FmtArgs),
}

#[derive(Args)]
struct CheckArgs {
    file: PathBuf,
    /// Checking profile for standalone proofs.
    #[arg(long, value_enum, default_value_t = Profile::Mvlkie)]
    profile: Profile,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Profile {
    Mvlkie,
    Pra,
}

#[derive(Args)]
struct UnfoldArgs {
    file: PathBuf,
    /// Schema to unfold; defaults to the first one.
    #[arg(long)]
    schema: Option<String>,
    /// Ground passive substitution, e.g. "a=3,b=2".
    #[arg(long, default_value = "")]
    subst: String,
    /// Instance value when the end sequent still carries its active
    /// parameter.
    #[arg(long)]
    arg: Option<u64>,
    /// Expand links into computational sub-schemata instead of cutting
    /// them into theory axioms.
    #[arg(long)]
    expand_all: bool,
    /// Write the unfolded proof to this file.
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Args)]
struct TranslateArgs {
    file: PathBuf,
    /// Target formalism.
    #[arg(long, value_enum)]
    to: Target,
    /// Replace E inferences by cuts against the arithmetic base.
    #[arg(long)]
    eliminate_e: bool,
    /// Quantify the passive parameters of the end sequent.
    #[arg(long)]
    generalize: bool,
    /// Schema or proof to translate; defaults to the first eligible item.
    #[arg(long)]
    name: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Target {
    Mvlkie,
    Schema,
    Pra,
}

#[derive(Subcommand)]
enum HerbrandCommand {
    /// Extract the witness rewrite system of a schema.
    Extract {
        file: PathBuf,
        #[arg(long)]
        schema: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Normalize the witness lists of a system at ground parameters.
    Eval {
        file: PathBuf,
        /// Comma-separated parameter values, e.g. "2,3".
        #[arg(long)]
        params: String,
    },
    /// Extract, evaluate, and verify the Herbrand disjunction.
    Verify {
        file: PathBuf,
        #[arg(long)]
        schema: Option<String>,
        #[arg(long)]
        params: String,
    },
}

#[derive(Args)]
struct FmtArgs {
    file: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

struct Out {
    format: Format,
    records: Vec<serde_json::Value>,
}

impl Out {
    fn new(format: Format) -> Out {
        Out { format, records: Vec::new() }
    }

    fn result(&mut self, text: impl Display, record: serde_json::Value) {
        match self.format {
            Format::Text => println!("{}", text),
            Format::Json => self.records.push(record),
        }
    }

    fn diagnostic(&mut self, text: impl Display, record: serde_json::Value) {
        match self.format {
            Format::Text => eprintln!("{}", text),
            Format::Json => self.records.push(record),
        }
    }

    fn flush(self) {
        for r in self.records {
            println!("{}", r);
        }
    }
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    let explicit = cli
        .fuel
        .or_else(|| std::env::var(FUEL_ENV).ok().and_then(|v| v.parse().ok()));
    let fuel = explicit.unwrap_or(DEFAULT_FUEL);
    let unfold_fuel = explicit.unwrap_or(UNFOLD_FUEL);
    let mut out = Out::new(cli.format);
    let code = match &cli.command {
        Command::Check(args) => cmd_check(args, fuel, &mut out),
        Command::Unfold(args) => cmd_unfold(args, fuel, unfold_fuel, cli.seed, &mut out),
        Command::Translate(args) => cmd_translate(args, fuel, &mut out),
        Command::Herbrand(cmd) => cmd_herbrand(cmd, fuel, &mut out),
        Command::Fmt(args) => cmd_fmt(args, &mut out),
    };
    out.flush();
    code
}

fn read_source(path: &Path, out: &mut Out) -> Result<String, i32> {
    std::fs::read_to_string(path).map_err(|e| {
        out.diagnostic(
            format!("error: cannot read {}: {}", path.display(), e),
            json!({"kind": "io-error", "path": path.display().to_string(), "message": e.to_string()}),
        );
        2
    })
}

fn load_document(path: &Path, out: &mut Out) -> Result<PskDocument, i32> {
    let source = read_source(path, out)?;
    let (doc, diags) = parse_document(&source);
    if diags.is_empty() {
        return Ok(doc);
    }
    emit_diagnostics(&source, &diags, out);
    Err(1)
}

fn emit_diagnostics(source: &str, diags: &[Diagnostic], out: &mut Out) {
    for d in diags {
        let (line, col) = d.span.line_col(source);
        out.diagnostic(
            d.render(source),
            json!({
                "kind": "diagnostic",
                "severity": d.severity.to_string(),
                "code": d.code,
                "message": d.message,
                "span": {"start": d.span.start, "end": d.span.end, "line": line, "col": col},
            }),
        );
    }
}

fn check_report_records(name: &str, report: &CheckReport, out: &mut Out) {
    for v in &report.violations {
        let path: Vec<usize> = v.path.clone();
        out.diagnostic(
            format!("{}: {}", name, v),
            json!({
                "kind": "violation",
                "item": name,
                "path": path,
                "code": v.code.to_string(),
                "message": v.message,
            }),
        );
    }
}

fn cmd_check(args: &CheckArgs, fuel: u64, out: &mut Out) -> i32 {
    let doc = match load_document(&args.file, out) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let theory = doc.theory();
    let axioms = doc.axioms();
    let signature = Signature::infer(&theory);
    let mut all_valid = true;
    for item in &doc.items {
        match item {
            Item::Schema(schema) => {
                let report = validate_schema(schema, &theory, &axioms, fuel);
                for issue in &report.issues {
                    out.diagnostic(
                        format!("{}: {}", schema.name, issue),
                        json!({
                            "kind": "schema-issue",
                            "item": schema.name,
                            "component": issue.component,
                            "code": issue.code.to_string(),
                            "message": issue.message,
                        }),
                    );
                }
                for (sym, b, s) in &report.component_reports {
                    check_report_records(&format!("{}.{} base", schema.name, sym), b, out);
                    check_report_records(&format!("{}.{} step", schema.name, sym), s, out);
                }
                let valid = report.is_valid();
                all_valid &= valid;
                let verdict = if valid { "valid" } else { "invalid" };
                out.result(
                    format!(
                        "{}: {}, {} P-schema, {} components",
                        schema.name,
                        verdict,
                        report.classification(),
                        schema.components.len()
                    ),
                    json!({
                        "kind": "schema-verdict",
                        "item": schema.name,
                        "valid": valid,
                        "classification": report.classification(),
                        "components": schema.components.len(),
                    }),
                );
            }
            Item::Proof { name, tree } => {
                let options = CheckOptions {
                    allow_links: true,
                    mvind: match args.profile {
                        Profile::Mvlkie => MvIndMode::MvLkie,
                        Profile::Pra => MvIndMode::Pra,
                    },
                    fuel,
                    ..CheckOptions::default()
                };
                let ctx = CheckContext::new(&theory, &axioms, &signature, options);
                let report = check_derivation(tree, &ctx);
                check_report_records(name, &report, out);
                let valid = report.is_valid();
                all_valid &= valid;
                let verdict = if valid { "valid" } else { "invalid" };
                out.result(
                    format!("{}: {}, {}", name, verdict, report.classification()),
                    json!({
                        "kind": "proof-verdict",
                        "item": name,
                        "valid": valid,
                        "classification": report.classification(),
                        "nodes": report.node_count,
                    }),
                );
            }
            _ => {}
        }
    }
    if all_valid {
        0
    } else {
        1
    }
}

fn parse_subst(text: &str, out: &mut Out) -> Result<Subst, i32> {
    let mut pairs = Vec::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let Some((name, value)) = part.split_once('=') else {
            out.diagnostic(
                format!("error: malformed substitution entry {}", part),
                json!({"kind": "usage-error", "message": format!("malformed substitution entry {}", part)}),
            );
            return Err(1);
        };
        let Ok(v) = value.trim().parse::<u64>() else {
            out.diagnostic(
                format!("error: substitution value {} is not a natural number", value),
                json!({"kind": "usage-error", "message": format!("bad value {}", value)}),
            );
            return Err(1);
        };
        pairs.push((name.trim().to_owned(), v));
    }
    Ok(Subst::ground_numeric(pairs))
}

fn pick_schema<'a>(
    doc: &'a PskDocument,
    name: &Option<String>,
    out: &mut Out,
) -> Result<&'a PSchema, i32> {
    let schema = match name {
        Some(n) => doc.schema(n),
        None => doc.schemata().into_iter().next(),
    };
    schema.ok_or_else(|| {
        out.diagnostic(
            "error: no matching schema in the document",
            json!({"kind": "usage-error", "message": "no matching schema"}),
        );
        1
    })
}

fn cmd_unfold(args: &UnfoldArgs, fuel: u64, unfold_fuel: u64, seed: u64, out: &mut Out) -> i32 {
    let doc = match load_document(&args.file, out) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let theory = doc.theory();
    let axioms = doc.axioms();
    let schema = match pick_schema(&doc, &args.schema, out) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let sigma = match parse_subst(&args.subst, out) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let options = UnfoldOptions {
        fuel: unfold_fuel,
        seed,
        expand_computational: args.expand_all,
        active_arg: args.arg,
    };
    let report = match unfold(schema, &sigma, &theory, &axioms, &options) {
        Ok(r) => r,
        Err(e) => {
            out.diagnostic(
                format!("error: {}", e),
                json!({"kind": "unfold-error", "message": e.to_string()}),
            );
            return 1;
        }
    };
    check_report_records(&schema.name, &report.check, out);
    let sound = verify_unfolded(&report, &theory, &axioms, fuel);
    let verdict = if sound { "valid" } else { "invalid" };
    out.result(
        format!(
            "{}: unfolded in {} steps, proof size {}, {} theory leaves, end sequent {}, verdict {}",
            schema.name,
            report.steps,
            report.proof_size(),
            report.theory_leaves.len(),
            report.tree.end_sequent(),
            verdict
        ),
        json!({
            "kind": "unfold-result",
            "item": schema.name,
            "steps": report.steps,
            "proof_size": report.proof_size(),
            "theory_leaves": report.theory_leaves.len(),
            "end_sequent": report.tree.end_sequent().to_string(),
            "valid": sound,
        }),
    );
    if let Some(path) = &args.emit {
        let mut items = Vec::new();
        if !theory.is_empty() {
            items.push(Item::Theory { name: theory.name.clone(), theory: theory.clone() });
        }
        let mut table = axioms.clone();
        for (label, seq) in &report.theory_leaves {
            table.insert(label.clone(), seq.clone());
        }
        if !table.is_empty() {
            items.push(Item::Axioms(table));
        }
        items.push(Item::Proof {
            name: format!("{}_unfolded", schema.name),
            tree: report.tree.clone(),
        });
        let text = print_document(&PskDocument { items });
        if let Err(e) = std::fs::write(path, text) {
            out.diagnostic(
                format!("error: cannot write {}: {}", path.display(), e),
                json!({"kind": "io-error", "message": e.to_string()}),
            );
            return 2;
        }
    }
    if sound {
        0
    } else {
        1
    }
}

fn output_document(
    items: Vec<Item>,
    path: &Option<PathBuf>,
    out: &mut Out,
) -> i32 {
    let text = print_document(&PskDocument { items });
    match path {
        Some(p) => {
            if let Err(e) = std::fs::write(p, text) {
                out.diagnostic(
                    format!("error: cannot write {}: {}", p.display(), e),
                    json!({"kind": "io-error", "message": e.to_string()}),
                );
                return 2;
            }
            0
        }
        None => {
            print!("{}", text);
            0
        }
    }
}

fn cmd_translate(args: &TranslateArgs, fuel: u64, out: &mut Out) -> i32 {
    let doc = match load_document(&args.file, out) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let theory = doc.theory();
    let axioms = doc.axioms();
    let mut items: Vec<Item> = Vec::new();
    if !theory.is_empty() {
        items.push(Item::Theory { name: theory.name.clone(), theory: theory.clone() });
    }
    match args.to {
        Target::Schema => {
            let proof = match &args.name {
                Some(n) => doc.proof(n).map(|t| (n.as_str(), t)),
                None => doc.proofs().into_iter().next(),
            };
            let Some((name, tree)) = proof else {
                out.diagnostic(
                    "error: no proof to translate",
                    json!({"kind": "usage-error", "message": "no proof to translate"}),
                );
                return 1;
            };
            let schema_name = format!("{}_schema", name);
            match mvlkie_to_schema(tree, &theory, &axioms, &schema_name, fuel) {
                Ok(schema) => {
                    if !axioms.is_empty() {
                        items.push(Item::Axioms(axioms.clone()));
                    }
                    out.result(
                        format!(
                            "{}: built schema {} with {} components",
                            name,
                            schema_name,
                            schema.components.len()
                        ),
                        json!({
                            "kind": "translate-result",
                            "item": name,
                            "to": "schema",
                            "components": schema.components.len(),
                        }),
                    );
                    items.push(Item::Schema(schema));
                    output_document(items, &args.output, out)
                }
                Err(e) => {
                    out.diagnostic(
                        format!("error: {}", e),
                        json!({"kind": "translate-error", "message": e.to_string()}),
                    );
                    1
                }
            }
        }
        Target::Mvlkie | Target::Pra => {
            // A schema input is translated first; a proof input is taken
            // as an induction derivation directly.
            let mut boundary = Vec::new();
            let picked_schema = match &args.name {
                Some(n) => doc.schema(n),
                None => doc.schemata().into_iter().next(),
            };
            let (name, tree) = if let Some(schema) = picked_schema {
                match schema_to_mvlkie(schema, &theory, &axioms, fuel) {
                    Ok(tr) => {
                        boundary = tr.boundary_axioms;
                        (schema.name.clone(), tr.tree)
                    }
                    Err(e) => {
                        out.diagnostic(
                            format!("error: {}", e),
                            json!({"kind": "translate-error", "message": e.to_string()}),
                        );
                        return 1;
                    }
                }
            } else if let Some((n, t)) = match &args.name {
                Some(n) => doc.proof(n).map(|t| (n.clone(), t.clone())),
                None => doc.proofs().into_iter().next().map(|(n, t)| (n.to_owned(), t.clone())),
            } {
                (n, t)
            } else {
                out.diagnostic(
                    "error: nothing to translate in the document",
                    json!({"kind": "usage-error", "message": "nothing to translate"}),
                );
                return 1;
            };
            let mut tree = tree;
            let mut suffix = "mvlkie";
            if args.eliminate_e || args.to == Target::Pra {
                tree = match eliminate_e_rule(&tree, &AxPaBase::new()) {
                    Ok(t) => t,
                    Err(e) => {
                        out.diagnostic(
                            format!("error: {}", e),
                            json!({"kind": "translate-error", "message": e.to_string()}),
                        );
                        return 1;
                    }
                };
            }
            if args.to == Target::Pra {
                suffix = "pra";
                tree = match to_pra(&tree) {
                    Ok(t) => t,
                    Err(e) => {
                        out.diagnostic(
                            format!("error: {}", e),
                            json!({"kind": "translate-error", "message": e.to_string()}),
                        );
                        return 1;
                    }
                };
            }
            if args.generalize {
                tree = match generalize(&tree) {
                    Ok(t) => t,
                    Err(e) => {
                        out.diagnostic(
                            format!("error: {}", e),
                            json!({"kind": "translate-error", "message": e.to_string()}),
                        );
                        return 1;
                    }
                };
            }
            let mut table = axioms.clone();
            for (label, seq) in &boundary {
                table.insert(label.clone(), seq.clone());
            }
            if !table.is_empty() {
                items.push(Item::Axioms(table));
            }
            out.result(
                format!(
                    "{}: translated to {} ({} nodes, {} inductions)",
                    name,
                    suffix,
                    tree.node_count(),
                    tree.count_rule("ind")
                ),
                json!({
                    "kind": "translate-result",
                    "item": name,
                    "to": suffix,
                    "nodes": tree.node_count(),
                    "inductions": tree.count_rule("ind"),
                }),
            );
            items.push(Item::Proof { name: format!("{}_{}", name, suffix), tree });
            output_document(items, &args.output, out)
        }
    }
}

fn parse_params(text: &str, out: &mut Out) -> Result<Vec<u64>, i32> {
    let mut values = Vec::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        match part.trim().parse::<u64>() {
            Ok(v) => values.push(v),
            Err(_) => {
                out.diagnostic(
                    format!("error: parameter {} is not a natural number", part),
                    json!({"kind": "usage-error", "message": format!("bad parameter {}", part)}),
                );
                return Err(1);
            }
        }
    }
    Ok(values)
}

fn cmd_herbrand(cmd: &HerbrandCommand, fuel: u64, out: &mut Out) -> i32 {
    match cmd {
        HerbrandCommand::Extract { file, schema, output } => {
            let doc = match load_document(file, out) {
                Ok(d) => d,
                Err(code) => return code,
            };
            let s = match pick_schema(&doc, schema, out) {
                Ok(s) => s,
                Err(code) => return code,
            };
            match extract_herbrand_system(s, &doc.theory(), &doc.axioms(), fuel) {
                Ok(system) => {
                    out.result(
                        format!(
                            "{}: extracted {} witness rules over {} parameter(s)",
                            s.name,
                            system.w_rules.len(),
                            system.params.len()
                        ),
                        json!({
                            "kind": "herbrand-extract",
                            "item": s.name,
                            "rules": system.w_rules.len(),
                            "params": system.params.len(),
                        }),
                    );
                    let text = print_system(&system);
                    match output {
                        Some(p) => {
                            if let Err(e) = std::fs::write(p, text) {
                                out.diagnostic(
                                    format!("error: cannot write {}: {}", p.display(), e),
                                    json!({"kind": "io-error", "message": e.to_string()}),
                                );
                                return 2;
                            }
                            0
                        }
                        None => {
                            print!("{}", text);
                            0
                        }
                    }
                }
                Err(e) => {
                    out.diagnostic(
                        format!("error: {}", e),
                        json!({"kind": "herbrand-error", "message": e.to_string()}),
                    );
                    1
                }
            }
        }
        HerbrandCommand::Eval { file, params } => {
            let source = match read_source(file, out) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let system = match parse_system(&source) {
                Ok(s) => s,
                Err(e) => {
                    out.diagnostic(
                        format!("error: {}", e),
                        json!({"kind": "diagnostic", "message": e}),
                    );
                    return 1;
                }
            };
            let values = match parse_params(params, out) {
                Ok(v) => v,
                Err(code) => return code,
            };
            match normalize_witnesses(&system, &values, fuel) {
                Ok(table) => {
                    for (i, tuple) in table.iter().enumerate() {
                        let entries: Vec<String> =
                            tuple.iter().map(|t| t.to_string()).collect();
                        out.result(
                            format!("[{}] {}", i, entries.join(", ")),
                            json!({"kind": "witness-list", "index": i, "terms": entries}),
                        );
                    }
                    out.result(
                        format!("{} witness list(s)", table.len()),
                        json!({"kind": "herbrand-eval", "lists": table.len()}),
                    );
                    0
                }
                Err(e) => {
                    out.diagnostic(
                        format!("error: {}", e),
                        json!({"kind": "herbrand-error", "message": e.to_string()}),
                    );
                    1
                }
            }
        }
        HerbrandCommand::Verify { file, schema, params } => {
            let doc = match load_document(file, out) {
                Ok(d) => d,
                Err(code) => return code,
            };
            let theory = doc.theory();
            let s = match pick_schema(&doc, schema, out) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let values = match parse_params(params, out) {
                Ok(v) => v,
                Err(code) => return code,
            };
            let verdict = extract_herbrand_system(s, &theory, &doc.axioms(), fuel)
                .and_then(|system| {
                    let table = normalize_witnesses(&system, &values, fuel)?;
                    let ok =
                        verify_herbrand_disjunction(&system, &values, &table, &theory, fuel)?;
                    Ok((table.len(), ok))
                });
            match verdict {
                Ok((lists, ok)) => {
                    out.result(
                        format!(
                            "{} at ({}): {} witness list(s), disjunction {}",
                            s.name,
                            values.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
                            lists,
                            if ok { "valid" } else { "invalid" }
                        ),
                        json!({
                            "kind": "herbrand-verify",
                            "item": s.name,
                            "params": values,
                            "lists": lists,
                            "valid": ok,
                        }),
                    );
                    if ok {
                        0
                    } else {
                        1
                    }
                }
                Err(e) => {
                    out.diagnostic(
                        format!("error: {}", e),
                        json!({"kind": "herbrand-error", "message": e.to_string()}),
                    );
                    1
                }
            }
        }
    }
}

fn cmd_fmt(args: &FmtArgs, out: &mut Out) -> i32 {
    let doc = match load_document(&args.file, out) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let text = print_document(&doc);
    match &args.output {
        Some(p) => {
            if let Err(e) = std::fs::write(p, text) {
                out.diagnostic(
                    format!("error: cannot write {}: {}", p.display(), e),
                    json!({"kind": "io-error", "message": e.to_string()}),
                );
                return 2;
            }
            0
        }
        None => {
            print!("{}", text);
            0
        }
    }
}
