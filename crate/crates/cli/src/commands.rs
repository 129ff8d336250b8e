use std::fmt::Write as _;

use anyhow::{bail, Result};
use psd_blocks::function::{admissible_family, PreserverFunction};
use psd_blocks::verifier::suite::run_theorem_suite;
use psd_blocks::verifier::{refute_scalar_outside_interval, verify_preservation, Verdict};
use psd_blocks::witness::{
    self, albert_embed, albert_embed_auto, provided, rank_one_gram, tensor_blowup, witness_allones, witness_aw,
    witness_br, witness_mat1_input, witness_scaled_identity, WITNESS_PSD_TOL,
};
use serde_json::{json, Value};

use crate::cli::{Command, WitnessArgs, WitnessKind};
use crate::input;

pub const EXIT_OK: u8 = 0;
pub const EXIT_SUITE_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_REFUTED: u8 = 3;

/// Result of one command: the canonical JSON body, a human-readable summary
/// and the exit code.
pub struct Output {
    pub body: Value,
    pub summary: String,
    pub code: u8,
}

pub fn dispatch(command: &Command) -> Result<Output> {
    match command {
        Command::Classify { rule, probe_n } => classify(rule, *probe_n),
        Command::Verify { rule, g, f, common } => {
            let rule = input::rule(rule)?;
            let g = match g {
                Some(g) => input::function("g", g)?,
                None => PreserverFunction::Identity,
            };
            let f = input::function("f", f)?;
            let domain = input::domain(common.domain.as_deref())?;
            let verdict = verify_preservation(&g, &f, &rule, &domain, &common.config())?;
            Ok(verdict_output("verify", verdict))
        }
        Command::Refute { rule, c, common } => {
            let rule = input::rule(rule)?;
            let c = input::real("c", c)?;
            let domain = input::domain(common.domain.as_deref())?;
            let verdict = refute_scalar_outside_interval(&rule, c, &domain, &common.config())?;
            Ok(verdict_output("refute", verdict))
        }
        Command::Suite { common } => {
            let report = run_theorem_suite(&common.config())?;
            let mut summary = String::new();
            for c in &report.criteria {
                writeln!(summary, "{}", c.summary_line())?;
            }
            let failed = report.failures().count();
            write!(summary, "{} of {} criteria passed", report.criteria.len() - failed, report.criteria.len())?;
            let code = if report.passed { EXIT_OK } else { EXIT_SUITE_FAILED };
            Ok(Output { body: serde_json::to_value(&report)?, summary, code })
        }
        Command::Witness(args) => witness(args),
    }
}

fn classify(rule_arg: &str, probe_n: usize) -> Result<Output> {
    let rule = input::rule(rule_arg)?;
    let regime = rule.classify(probe_n)?;
    let descriptor = admissible_family(regime, rule.flags().k);
    let mut body = descriptor.to_json();
    body["rule"] = rule.to_json().unwrap_or(Value::Null);
    body["probe_n"] = json!(probe_n);
    let mut summary = format!("{} (table row {}): {}", regime.tag(), regime.table_row(), descriptor.family);
    if let Some(i) = descriptor.c_interval {
        let [lo, hi] = i.to_strings();
        write!(summary, ", c in [{lo}, {hi}]")?;
    }
    if let Some(c) = descriptor.constraint {
        write!(summary, ", {c}")?;
    }
    Ok(Output { body, summary, code: EXIT_OK })
}

fn verdict_output(command: &str, verdict: Verdict) -> Output {
    let summary = match &verdict.counterexample {
        Some(cx) => {
            let mut s = format!(
                "{command}: refuted at n = {} by {}, output min eigenvalue {:.6e}",
                cx.n, cx.witness.provenance, cx.min_eig
            );
            if let Some(cert) = &cx.certificate {
                let idx: Vec<usize> = cert.indices.iter().map(|i| i + 1).collect();
                let _ = write!(s, "; principal submatrix {idx:?} has min eigenvalue {:.6e}", cert.min_eig);
            }
            s
        }
        None => format!(
            "{command}: no counterexample among {} inputs with n <= {} ({} skipped)",
            verdict.stats.total, verdict.stats.truncated_at, verdict.stats.skipped
        ),
    };
    let code = if verdict.is_refuted() { EXIT_REFUTED } else { EXIT_OK };
    Output { body: serde_json::to_value(&verdict).expect("verdict is serializable"), summary, code }
}

fn witness(a: &WitnessArgs) -> Result<Output> {
    let domain = input::domain(a.domain.as_deref())?;
    let real = |name: &str, v: &Option<String>| -> Result<f64> { input::real(name, input::required(name, v)?) };
    let complex = |name: &str, v: &Option<String>| input::complex(name, input::required(name, v)?);
    let given = || -> Result<witness::Witness> {
        Ok(provided(input::matrix(input::required("matrix", &a.matrix)?)?, &domain)?)
    };
    let built = match a.name {
        WitnessKind::Allones => witness_allones(real("x", &a.x)?, *input::required("n", &a.n)?, &domain)?,
        WitnessKind::ScaledIdentity => witness_scaled_identity(real("x", &a.x)?, *input::required("n", &a.n)?, &domain)?,
        WitnessKind::RankOne => {
            let v = input::complex_list("vector", input::required("vector", &a.vector)?)?;
            let w = rank_one_gram(&v)?;
            witness::check_domain(&w.matrix, &domain)?;
            w
        }
        WitnessKind::Aw => witness_aw(complex("w", &a.w)?, complex("z", &a.z)?, &domain)?,
        WitnessKind::Br => witness_br(real("r", &a.r)?, complex("z", &a.z)?, &domain)?,
        WitnessKind::Mat1 => witness_mat1_input(complex("w", &a.w)?, real("t", &a.t)?, &domain)?,
        WitnessKind::Blowup => tensor_blowup(*input::required("m", &a.m)?, &given()?)?,
        WitnessKind::Albert => match &a.eps {
            Some(e) => albert_embed(&given()?, input::real("eps", e)?, &domain)?,
            None => albert_embed_auto(&given()?, &domain)?,
        },
    };
    if built.dim() == 0 {
        bail!("empty witness");
    }
    let report = built.matrix.is_psd(WITNESS_PSD_TOL)?;
    let summary = format!(
        "{}: {}x{}, eigenvalues in [{:.6e}, {:.6e}], {}",
        built.provenance,
        built.dim(),
        built.dim(),
        report.min_eig,
        report.max_eig,
        if report.is_psd { "PSD" } else { "not PSD" }
    );
    let body = json!({ "witness": built, "psd": report });
    Ok(Output { body, summary, code: EXIT_OK })
}
