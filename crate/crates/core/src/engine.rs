//! Command interpreter: definitions, refinement sessions, queries and script execution.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::env::{format_matrix, format_value, Definition, Environment, EvalError, Evaluator, Value};
use crate::lang::{
    parse_script, pretty_block, Command, Expr, ParseError, Span, Spanned, Stmt, TestRel,
};
use crate::lattice::{Lattice, Tolerances};
use crate::linalg::{self, c, CMat};
use crate::qop::{DensityState, QopError};
use crate::refine::{RefineError, Session, Tactic};
use crate::semantics::{simulate, SemError, SimOptions};

pub const SNAPSHOT_SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("operator `{name}`: {msg}")]
    Operator { name: String, msg: String },
}

/// Engine settings loaded from TOML.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub tolerances: Tolerances,
    pub simulation: SimOptions,
    /// Extra operators by name, each a row-major matrix of `[re, im]` entries.
    pub operators: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Config, ConfigError> {
        let cfg: Config = toml::from_str(text)?;
        for name in cfg.operators.keys() {
            cfg.operator_matrix(name)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn operator_matrix(&self, name: &str) -> Result<CMat, ConfigError> {
        let err = |msg: &str| ConfigError::Operator {
            name: name.to_string(),
            msg: msg.to_string(),
        };
        let rows = self.operators.get(name).ok_or_else(|| err("not defined"))?;
        let n = rows.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(err("dimension must be a power of two"));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(err("matrix must be square"));
        }
        let entries: Vec<_> = rows.iter().flatten().map(|[re, im]| c(*re, *im)).collect();
        Ok(CMat::from_row_slice(n, n, &entries))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error(transparent)]
    Sem(#[from] SemError),
    #[error("{0}")]
    Command(String),
}

impl From<QopError> for EngineError {
    fn from(e: QopError) -> Self {
        EngineError::Eval(e.into())
    }
}

impl From<crate::lattice::LatticeError> for EngineError {
    fn from(e: crate::lattice::LatticeError) -> Self {
        EngineError::Eval(e.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommandOutput {
    pub text: String,
    pub mutated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Stop at the first failing command.
    Batch,
    /// Report failures and keep going.
    Interactive,
}

#[derive(Debug, Clone, Serialize)]
pub struct TranscriptEntry {
    pub command: String,
    pub span: Span,
    pub ok: bool,
    pub output: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ScriptReport {
    pub entries: Vec<TranscriptEntry>,
    pub failures: usize,
    pub paused: bool,
    pub halted: bool,
}

impl ScriptReport {
    pub fn ok(&self) -> bool {
        self.failures == 0
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            if e.ok {
                if !e.output.is_empty() {
                    out.push_str(&e.output);
                    out.push('\n');
                }
            } else {
                out.push_str(&format!(
                    "Error at {}:{}: {}\n",
                    e.span.line, e.span.col, e.output
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Engine {
    pub config: Config,
    pub env: Environment,
    pub session: Option<Session>,
    version: u64,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new(Config::default()).expect("default config is valid")
    }
}

fn test_label(rel: TestRel) -> &'static str {
    match rel {
        TestRel::Eq => "=",
        TestRel::Leq => "⊑",
    }
}

impl Engine {
    pub fn new(config: Config) -> Result<Engine, ConfigError> {
        let mut env = Environment::new();
        for name in config.operators.keys() {
            env.inject(name, Value::op(config.operator_matrix(name)?));
        }
        Ok(Engine {
            config,
            env,
            session: None,
            version: 0,
        })
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::new(self.config.tolerances)
    }

    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator::new(&self.env, self.lattice())
    }

    fn session_mut(&mut self) -> Result<&mut Session, EngineError> {
        self.session
            .as_mut()
            .ok_or(EngineError::Refine(RefineError::NoSession))
    }

    fn goals_text(&self) -> String {
        self.session
            .as_ref()
            .map_or_else(String::new, Session::render_goals)
    }

    fn check_fresh(&self, name: &str) -> Result<(), EngineError> {
        let active = self.session.as_ref().is_some_and(|s| s.name == name);
        if self.env.contains(name) || active {
            return Err(EvalError::Redefined(name.to_string()).into());
        }
        Ok(())
    }

    fn tactic(&mut self, t: Tactic) -> Result<CommandOutput, EngineError> {
        let mut session = self
            .session
            .clone()
            .ok_or(EngineError::Refine(RefineError::NoSession))?;
        session.apply(&self.evaluator(), &t)?;
        self.session = Some(session);
        Ok(CommandOutput {
            text: self.goals_text(),
            mutated: true,
        })
    }

    /// Executes one command. Failed commands leave the engine unchanged.
    pub fn exec(&mut self, cmd: &Command) -> Result<CommandOutput, EngineError> {
        let out = self.exec_inner(cmd)?;
        if out.mutated {
            self.version += 1;
        }
        Ok(out)
    }

    fn exec_inner(&mut self, cmd: &Command) -> Result<CommandOutput, EngineError> {
        let done = |text: String| {
            Ok(CommandOutput {
                text,
                mutated: true,
            })
        };
        let query = |text: String| {
            Ok(CommandOutput {
                text,
                mutated: false,
            })
        };
        match cmd {
            Command::DefExpr(name, e) => {
                self.check_fresh(name)?;
                let value = self.evaluator().eval(e)?;
                self.env.define(
                    name,
                    Definition::Value {
                        value,
                        source: e.clone(),
                    },
                )?;
                done(format!("{name} is defined."))
            }
            Command::DefProg(name, s) => {
                self.check_fresh(name)?;
                self.evaluator().compile(s)?;
                self.env.define(name, Definition::Program(s.clone()))?;
                done(format!("{name} is defined."))
            }
            Command::DefExtract(name, from) => {
                self.check_fresh(name)?;
                let prog = match self.env.get(from) {
                    Some(Definition::Proof(pf)) => pf.extract(),
                    Some(Definition::Program(s)) => s.strip_refined(),
                    Some(other) => {
                        return Err(EngineError::Command(format!(
                            "cannot extract from a {}",
                            other.kind()
                        )))
                    }
                    None => return Err(EvalError::Unknown(from.clone()).into()),
                };
                self.env.define(name, Definition::Program(prog))?;
                done(format!("{name} is defined."))
            }
            Command::DefSim(name, s, input) => {
                self.check_fresh(name)?;
                let (state, warn) = self.run_simulation(s, input)?;
                self.env.define(
                    name,
                    Definition::State {
                        state,
                        program: s.clone(),
                        input: input.clone(),
                    },
                )?;
                done(format!("{name} is defined.{warn}"))
            }
            Command::Refine(name, pre, post) => {
                if let Some(s) = &self.session {
                    return Err(RefineError::SessionActive(s.name.clone()).into());
                }
                self.check_fresh(name)?;
                let s = Session::start(name, &self.evaluator(), pre, post)?;
                self.session = Some(s);
                done(self.goals_text())
            }
            Command::Step(s) => self.tactic(Tactic::Program(s.clone())),
            Command::StepSeq(r) => self.tactic(Tactic::Seq(r.clone())),
            Command::StepIf(r) => self.tactic(Tactic::If(r.clone())),
            Command::StepWhile(g, i) => self.tactic(Tactic::While {
                guard: g.clone(),
                inv: i.clone(),
            }),
            Command::StepPChoice {
                prob,
                mode,
                left,
                right,
            } => self.tactic(Tactic::PChoice {
                prob: prob.clone(),
                mode: *mode,
                left: left.clone(),
                right: right.clone(),
            }),
            Command::StepRepeat(r) => self.tactic(Tactic::Repeat(r.clone())),
            Command::WeakenPre(r) => self.tactic(Tactic::WeakenPre(r.clone())),
            Command::StrengthenPost(t) => self.tactic(Tactic::StrengthenPost(t.clone())),
            Command::Choose(n) => {
                self.session_mut()?.choose(*n)?;
                done(self.goals_text())
            }
            Command::End => {
                let pf = self
                    .session
                    .as_ref()
                    .ok_or(RefineError::NoSession)?
                    .seal()?;
                let name = pf.name.clone();
                self.env.define(&name, Definition::Proof(pf))?;
                self.session = None;
                done(format!("{name} is defined."))
            }
            Command::Pause => query(String::new()),
            Command::ShowDef => {
                let lines: Vec<String> = self
                    .env
                    .iter()
                    .map(|(n, d)| format!("{n} : {}", d.kind()))
                    .collect();
                query(lines.join("\n"))
            }
            Command::Show(name) => query(self.show(name)?),
            Command::Eval(e) => query(format_value(&self.evaluator().eval(e)?)),
            Command::Test(a, rel, b) => {
                let holds = self.test(a, *rel, b)?;
                query(format!("Test {a} {} {b} : {holds}", test_label(*rel)))
            }
        }
    }

    fn show(&self, name: &str) -> Result<String, EngineError> {
        if let Some(s) = self.session.as_ref().filter(|s| s.name == name) {
            return Ok(format!(
                "{name} (in progress)\n{}",
                pretty_block(&s.root.refinement_term())
            ));
        }
        Ok(match self.env.get(name) {
            Some(Definition::Value { value, source }) => {
                format!("{name} := {source}\n{}", format_value(value))
            }
            Some(Definition::Program(s)) => format!("{name} := Prog\n{}", pretty_block(s)),
            Some(Definition::Proof(pf)) => pf.render(),
            Some(Definition::State {
                state,
                program,
                input,
            }) => format!(
                "{name} := [[{program}]]({input}) on {}\n{}",
                state.reg,
                format_matrix(&state.rho)
            ),
            None => {
                let v = self.env.lookup_value(name)?;
                format!("{name} (built-in)\n{}", format_value(&v))
            }
        })
    }

    /// Simulates `s` on the state denoted by `input`; qubits of `s` missing from the input
    /// are prepared in `|0>`.
    fn run_simulation(&self, s: &Stmt, input: &Expr) -> Result<(DensityState, String), EngineError> {
        let ev = self.evaluator();
        let prog = ev.compile(s)?;
        let state = match ev.eval(input)? {
            Value::Space {
                space,
                reg: Some(reg),
            } => {
                if space.is_zero() {
                    return Err(EngineError::Command("input subspace is zero".into()));
                }
                let rho = space.projector().unscale(space.rank() as f64);
                DensityState::new(rho, reg)?
            }
            Value::Op {
                mat,
                reg: Some(reg),
            } => {
                if !linalg::is_hermitian(&mat, 1e-9) || linalg::min_eigenvalue(&mat) < -1e-9 {
                    return Err(EngineError::Command(
                        "input operator is not a density operator".into(),
                    ));
                }
                DensityState::new(mat, reg)?
            }
            other => {
                return Err(EngineError::Command(format!(
                    "simulation input must be labelled, found {}",
                    other.kind()
                )))
            }
        };
        let state = state.pad_zero(&prog.qv());
        let out = simulate(&prog, &state, &self.config.simulation)?;
        let warn = if out.converged() {
            String::new()
        } else {
            format!(
                "\nwarning: loop stopped at the iteration limit with residual {:.3e}",
                out.max_residual()
            )
        };
        Ok((out.state, warn))
    }

    fn test(&self, a: &Expr, rel: TestRel, b: &Expr) -> Result<bool, EngineError> {
        let ev = self.evaluator();
        let lat = self.lattice();
        let va = ev.eval(a)?;
        let vb = ev.eval(b)?;
        if let (Value::Space { .. }, Value::Space { .. }) = (&va, &vb) {
            let joined = ev.eval(&Expr::meet(a.clone(), b.clone()));
            let (sa, ra) = ev.as_space(va)?;
            let (sb, rb) = ev.as_space(vb)?;
            let (sa, sb) = match (ra, rb) {
                (Some(ra), Some(rb)) => {
                    let u = ra.union(&rb);
                    (
                        crate::qop::extend_subspace(&sa, &ra, &u)?,
                        crate::qop::extend_subspace(&sb, &rb, &u)?,
                    )
                }
                (None, None) => (sa, sb),
                _ => {
                    joined?;
                    unreachable!("mixed labelling is rejected by evaluation")
                }
            };
            return Ok(match rel {
                TestRel::Eq => lat.equal(&sa, &sb)?,
                TestRel::Leq => lat.leq(&sa, &sb)?,
            });
        }
        let diff = ev.eval(&Expr::bin(crate::lang::BinOp::Sub, b.clone(), a.clone()))?;
        let (d, _) = ev.as_op(diff)?;
        let tol = self.config.tolerances.incl;
        Ok(match rel {
            TestRel::Eq => linalg::max_abs(&d) <= tol,
            TestRel::Leq => {
                if !linalg::is_hermitian(&d, 1e-9) {
                    return Err(EngineError::Command(
                        "`<=` needs Hermitian operands".into(),
                    ));
                }
                linalg::min_eigenvalue(&d) >= -tol
            }
        })
    }

    /// Parses and runs a script. Parse errors count as failed commands.
    pub fn run_script(&mut self, src: &str, mode: Mode) -> ScriptReport {
        let mut report = ScriptReport::default();
        for item in parse_script(src) {
            let (text, span, result) = match item {
                Ok(Spanned { node, span }) => {
                    if node == Command::Pause {
                        report.paused = true;
                        report.entries.push(TranscriptEntry {
                            command: node.to_string(),
                            span,
                            ok: true,
                            output: String::new(),
                        });
                        break;
                    }
                    let text = src.get(span.start..span.end).unwrap_or("").to_string();
                    (text, span, self.exec(&node))
                }
                Err(e) => (String::new(), e.span, Err(EngineError::Parse(e))),
            };
            match result {
                Ok(out) => report.entries.push(TranscriptEntry {
                    command: text,
                    span,
                    ok: true,
                    output: out.text,
                }),
                Err(e) => {
                    report.failures += 1;
                    report.entries.push(TranscriptEntry {
                        command: text,
                        span,
                        ok: false,
                        output: e.to_string(),
                    });
                    if mode == Mode::Batch {
                        report.halted = true;
                        break;
                    }
                }
            }
        }
        report
    }

    /// Runs every command of `src` atomically: on any parse or execution error the engine is
    /// restored to its prior state.
    pub fn submit(&mut self, src: &str) -> Result<Vec<CommandOutput>, (EngineError, Span)> {
        let mut cmds = Vec::new();
        for item in parse_script(src) {
            match item {
                Ok(c) => cmds.push(c),
                Err(e) => {
                    let span = e.span;
                    return Err((EngineError::Parse(e), span));
                }
            }
        }
        if cmds.is_empty() {
            return Err((
                EngineError::Command("no command given".into()),
                Span::default(),
            ));
        }
        let backup = self.clone();
        let mut outs = Vec::new();
        for c in &cmds {
            match self.exec(&c.node) {
                Ok(o) => outs.push(o),
                Err(e) => {
                    *self = backup;
                    return Err((e, c.span));
                }
            }
        }
        Ok(outs)
    }

    /// JSON view of the engine state for external clients.
    pub fn snapshot(&self) -> serde_json::Value {
        let defs: Vec<_> = self
            .env
            .iter()
            .map(|(n, d)| json!({ "name": n, "kind": d.kind() }))
            .collect();
        let session = self.session.as_ref().map(|s| {
            let cur = s.current_index();
            let goals: Vec<_> = s
                .goals()
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    json!({
                        "id": g.id,
                        "index": i + 1,
                        "pre": g.pre.expr.to_string(),
                        "post": g.post.expr.to_string(),
                        "current": i == cur,
                    })
                })
                .collect();
            json!({
                "name": s.name,
                "ambient": s.ambient.names(),
                "goals": goals,
                "display": s.render_goals(),
                "tree": s.root.to_json(),
            })
        });
        json!({
            "schema": SNAPSHOT_SCHEMA,
            "version": self.version,
            "definitions": defs,
            "session": session,
        })
    }

    /// Text written by the file-watch mode: the goal display (if a refinement is open) and
    /// every diagnostic of the run.
    pub fn watch_output(&self, report: &ScriptReport) -> String {
        let mut out = String::new();
        match &self.session {
            Some(s) => {
                out.push_str(&format!("Refine {}\n", s.name));
                out.push_str(&s.render_goals());
                out.push('\n');
            }
            None => out.push_str("No refinement in progress.\n"),
        }
        if report.paused {
            out.push_str("(paused)\n");
        }
        for e in report.entries.iter().filter(|e| !e.ok) {
            out.push_str(&format!(
                "Error at {}:{}: {}\n",
                e.span.line, e.span.col, e.output
            ));
        }
        out
    }
}

/// Re-runs the script at `input` from a fresh engine and writes the result to `output`.
pub fn process_file(input: &Path, output: &Path, config: &Config) -> std::io::Result<ScriptReport> {
    let src = std::fs::read_to_string(input)?;
    let mut engine = Engine::new(config.clone())
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))?;
    let report = engine.run_script(&src, Mode::Interactive);
    std::fs::write(output, engine.watch_output(&report))?;
    Ok(report)
}
