use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use arftower::concordance::{
    certify, verify_certificate, Certificate, CertifyOptions, NamedDiagram, Outcome,
};
use arftower::diagram::{parse, Diagram};
use arftower::invariants::{arf_from_conway, arf_from_unknotting, conway, ArfValue};
use arftower::table::{bundled, lookup, parse_table};
use arftower::tower::{arf_count, build_order1};

const OK: u8 = 0;
const OBSTRUCTION: u8 = 1;
const INPUT: u8 = 2;
const VERIFY: u8 = 3;

const ORDER_CAP: u32 = 12;

#[derive(Parser)]
#[command(
    name = "arftower",
    version,
    about = "Arf invariants, Whitney towers and certificates for knots"
)]
struct Cli {
    /// Print a JSON envelope instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Arf invariant by the skein, unknotting and tower routes.
    Arf { knot: String },
    /// Conway polynomial.
    Conway { knot: String },
    /// Certify Arf equality by an order-N tower, or report the obstruction.
    Certify {
        k0: String,
        k1: String,
        #[arg(long, default_value_t = 3)]
        order: u32,
        /// Include the half-grope tree.
        #[arg(long)]
        grope: bool,
        /// Write the certificate here instead of standard output.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        /// Allow orders above the default cap.
        #[arg(long)]
        unsafe_order: bool,
    },
    /// Replay and check a certificate file.
    Verify { file: PathBuf },
    /// Invariants for every record of a knot table (the bundled one by default).
    Table {
        file: Option<PathBuf>,
        /// Fail on any disagreement between the Arf routes.
        #[arg(long)]
        check: bool,
    },
}

/// What a command produced: exit code, text lines and envelope parts.
struct Report {
    command: &'static str,
    inputs: Value,
    code: u8,
    lines: Vec<String>,
    results: Vec<Value>,
    errors: Vec<String>,
}

impl Report {
    fn new(command: &'static str, inputs: Value) -> Self {
        Report {
            command,
            inputs,
            code: OK,
            lines: Vec::new(),
            results: Vec::new(),
            errors: Vec::new(),
        }
    }

    fn fail(mut self, code: u8, msg: impl Into<String>) -> Self {
        self.code = self.code.max(code);
        self.errors.push(msg.into());
        self
    }
}

/// A table name, then a file, then a literal PD or Gauss code.
fn resolve(input: &str) -> Result<NamedDiagram, String> {
    if let Some(e) = lookup(input) {
        return Ok(NamedDiagram::new(e.name, e.diagram));
    }
    let path = Path::new(input);
    let (name, text) = if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| format!("{input}: {e}"))?;
        (
            path.file_stem()
                .map_or(input.to_string(), |s| s.to_string_lossy().into_owned()),
            text,
        )
    } else {
        (input.to_string(), input.to_string())
    };
    let d = parse(&text).map_err(|e| format!("{input}: {e}"))?;
    Ok(NamedDiagram::new(name, d))
}

fn resolve_knot(input: &str) -> Result<NamedDiagram, String> {
    let k = resolve(input)?;
    match k.diagram.component_count() {
        1 => Ok(k),
        n => Err(format!("{input}: expected a knot, got {n} components")),
    }
}

struct ArfRow {
    conway: ArfValue,
    unknotting: ArfValue,
    tower: ArfValue,
}

impl ArfRow {
    fn agree(&self) -> bool {
        self.conway.value == self.unknotting.value && self.conway.value == self.tower.value
    }
}

fn arf_row(d: &Diagram) -> Result<ArfRow, String> {
    let conway = arf_from_conway(d).map_err(|e| e.to_string())?;
    let unknotting = arf_from_unknotting(d).map_err(|e| e.to_string())?;
    let seq = d.descending_switches(1).map_err(|e| e.to_string())?;
    let tower = arf_count(&build_order1(&seq)).map_err(|e| e.to_string())?;
    Ok(ArfRow {
        conway,
        unknotting,
        tower,
    })
}

fn cmd_arf(knot: &str) -> Report {
    let r = Report::new("arf", json!({ "knot": knot }));
    let k = match resolve_knot(knot) {
        Ok(k) => k,
        Err(e) => return r.fail(INPUT, e),
    };
    let row = match arf_row(&k.diagram) {
        Ok(row) => row,
        Err(e) => return r.fail(VERIFY, e),
    };
    let mut r = r;
    r.lines.push(format!(
        "arf={} (conway={}, tower={})",
        row.conway.value, row.conway.value, row.tower.value
    ));
    r.results.push(json!({
        "name": k.name,
        "arf": row.conway.value,
        "conway": row.conway.value,
        "unknotting": row.unknotting.value,
        "tower": row.tower.value,
        "agree": row.agree(),
    }));
    if !row.agree() {
        return r.fail(
            VERIFY,
            format!(
                "{}: Arf routes disagree (conway={}, unknotting={}, tower={})",
                k.name, row.conway.value, row.unknotting.value, row.tower.value
            ),
        );
    }
    r
}

fn cmd_conway(knot: &str) -> Report {
    let mut r = Report::new("conway", json!({ "knot": knot }));
    let k = match resolve(knot) {
        Ok(k) => k,
        Err(e) => return r.fail(INPUT, e),
    };
    let p = conway(&k.diagram);
    r.lines.push(p.to_string());
    r.results.push(json!({ "name": k.name, "conway": p }));
    r
}

fn cmd_certify(
    k0: &str,
    k1: &str,
    order: u32,
    grope: bool,
    output: Option<&Path>,
    unsafe_order: bool,
) -> Report {
    let mut r = Report::new(
        "certify",
        json!({ "k0": k0, "k1": k1, "order": order, "grope": grope }),
    );
    if order < 2 {
        return r.fail(INPUT, format!("order {order} is below the minimum 2"));
    }
    if order > ORDER_CAP && !unsafe_order {
        return r.fail(
            INPUT,
            format!("order {order} exceeds the cap {ORDER_CAP}; pass --unsafe-order to override"),
        );
    }
    let (a, b) = match (resolve_knot(k0), resolve_knot(k1)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return r.fail(INPUT, e),
    };
    let opts = CertifyOptions::new(order).with_grope(grope);
    match certify(&a, &b, &opts) {
        Err(e) => r.fail(VERIFY, e.to_string()),
        Ok(Outcome::Obstruction(o)) => {
            r.code = OBSTRUCTION;
            r.lines.push(o.to_string());
            r.results
                .push(json!({ "outcome": "obstruction", "obstruction": o }));
            r
        }
        Ok(Outcome::Certificate(c)) => {
            let check = verify_certificate(&c);
            if !check.passed() {
                let msgs: Vec<String> = check.issues.iter().map(|i| i.to_string()).collect();
                return r.fail(
                    VERIFY,
                    format!("fresh certificate fails verification: {}", msgs.join("; ")),
                );
            }
            let body = serde_json::to_string_pretty(&c).expect("certificate serializes");
            let summary = format!(
                "certificate: {} ~ {} at order {}, {} moves, fingerprint {}",
                c.knots[0].name,
                c.knots[1].name,
                c.order,
                c.moves.len(),
                c.tower_summary.fingerprint
            );
            match output {
                Some(path) => {
                    if let Err(e) = fs::write(path, body + "\n") {
                        return r.fail(INPUT, format!("{}: {e}", path.display()));
                    }
                    r.lines.push(summary);
                    r.results.push(json!({
                        "outcome": "certificate",
                        "file": path.display().to_string(),
                        "order": c.order,
                        "moves": c.moves.len(),
                        "tower_summary": c.tower_summary,
                    }));
                }
                None => {
                    r.lines.push(body);
                    r.results
                        .push(json!({ "outcome": "certificate", "certificate": c }));
                }
            }
            r
        }
    }
}

fn cmd_verify(file: &Path) -> Report {
    let mut r = Report::new("verify", json!({ "file": file.display().to_string() }));
    let text = match fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return r.fail(INPUT, format!("{}: {e}", file.display())),
    };
    let c: Certificate = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => return r.fail(INPUT, format!("{}: not a certificate: {e}", file.display())),
    };
    let report = verify_certificate(&c);
    r.results.push(json!(report));
    if report.passed() {
        r.lines.push(format!(
            "ok: {} ~ {} at order {}, {} moves replayed",
            c.knots[0].name, c.knots[1].name, c.order, report.moves
        ));
        r
    } else {
        for i in &report.issues {
            r.lines.push(format!("{}: {i}", i.kind()));
        }
        let n = report.issues.len();
        r.fail(VERIFY, format!("certificate rejected with {n} issue(s)"))
    }
}

fn cmd_table(file: Option<&Path>, check: bool) -> Report {
    let mut r = Report::new(
        "table",
        json!({ "file": file.map(|f| f.display().to_string()), "check": check }),
    );
    let entries = match file {
        None => bundled(),
        Some(path) => {
            let text = match fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return r.fail(INPUT, format!("{}: {e}", path.display())),
            };
            match parse_table(&text) {
                Ok(e) => e,
                Err(e) => return r.fail(INPUT, format!("{}: {e}", path.display())),
            }
        }
    };
    let rows: Vec<_> = entries
        .par_iter()
        .map(|e| (e, conway(&e.diagram), arf_row(&e.diagram)))
        .collect();
    let mut bad = Vec::new();
    for (e, poly, row) in rows {
        match row {
            Ok(row) => {
                r.lines.push(format!(
                    "{}\t{}\tarf={}\tconway={}\tunknotting={}\ttower={}\t{}",
                    e.name,
                    poly,
                    row.conway.value,
                    row.conway.value,
                    row.unknotting.value,
                    row.tower.value,
                    if row.agree() { "ok" } else { "DISAGREE" }
                ));
                r.results.push(json!({
                    "name": e.name,
                    "line": e.line,
                    "conway": poly,
                    "arf_conway": row.conway.value,
                    "arf_unknotting": row.unknotting.value,
                    "arf_tower": row.tower.value,
                    "agree": row.agree(),
                }));
                if !row.agree() {
                    bad.push(e.name.clone());
                }
            }
            Err(msg) => {
                r.lines.push(format!("{}\t{}\terror: {msg}", e.name, poly));
                r.results
                    .push(json!({ "name": e.name, "line": e.line, "conway": poly, "error": msg }));
                bad.push(e.name.clone());
            }
        }
    }
    if check && !bad.is_empty() {
        return r.fail(
            VERIFY,
            format!("Arf routes disagree on: {}", bad.join(", ")),
        );
    }
    r
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match &cli.command {
        Command::Arf { knot } => cmd_arf(knot),
        Command::Conway { knot } => cmd_conway(knot),
        Command::Certify {
            k0,
            k1,
            order,
            grope,
            output,
            unsafe_order,
        } => cmd_certify(k0, k1, *order, *grope, output.as_deref(), *unsafe_order),
        Command::Verify { file } => cmd_verify(file),
        Command::Table { file, check } => cmd_table(file.as_deref(), *check),
    };
    if cli.json {
        let envelope = json!({
            "command": report.command,
            "inputs": report.inputs,
            "results": report.results,
            "errors": report.errors,
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&envelope).expect("envelope serializes")
        );
    } else {
        for l in &report.lines {
            println!("{l}");
        }
        for e in &report.errors {
            eprintln!("error: {e}");
        }
    }
    ExitCode::from(report.code)
}
