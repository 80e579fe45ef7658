//! Random tactic sequences on two-qubit root prescriptions.

use qrefine::lang::{parse_command, Expr};
use qrefine::{Definition, Engine, Value};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{pool, rand_subspace};

pub struct FuzzRun {
    pub accepted: usize,
    pub rejected: usize,
    pub closed_by_abort: usize,
    pub reached_end: bool,
    pub valid: bool,
    pub program: String,
}

const PREDICATES: usize = 6;

fn define_space(engine: &mut Engine, name: &str, space: qrefine::Subspace) {
    engine
        .env
        .define(
            name,
            Definition::Value {
                value: Value::Space { space, reg: None },
                source: Expr::Ident(name.to_string()),
            },
        )
        .unwrap();
}

fn pred(r: &mut impl Rng) -> String {
    format!("R{}[q0 q1]", r.gen_range(0..PREDICATES))
}

fn guard(r: &mut impl Rng) -> String {
    let q = ["q0", "q1"].choose(r).unwrap();
    let g = ["P0", "P1", "Pp", "G0", "G1"].choose(r).unwrap();
    format!("{g}[{q}]")
}

fn program(r: &mut impl Rng) -> String {
    let atoms = [
        "skip",
        "X[q0]",
        "H[q1]",
        "CX[q0 q1]",
        "[q0] :=0",
        "[q0 q1] :=0",
        "Z[q1]; S[q0]",
    ];
    match r.gen_range(0..6) {
        0 => format!("assert {}", pred(r)),
        1 => format!("{}; < {}, {} >", atoms.choose(r).unwrap(), pred(r), pred(r)),
        2 => format!("if {} then X[q0] else skip end", guard(r)),
        _ => atoms.choose(r).unwrap().to_string(),
    }
}

fn tactic(r: &mut impl Rng, goals: usize) -> String {
    match r.gen_range(0..9) {
        0 => format!("Step Seq {}.", pred(r)),
        1 => format!("Step If {}.", guard(r)),
        2 => format!("Step While {} Inv {}.", guard(r), pred(r)),
        3 => format!("WeakenPre {}.", pred(r)),
        4 => format!("StrengthenPost {}.", pred(r)),
        5 => {
            let mode = if r.gen_bool(0.5) { "Wpc" } else { "Spc" };
            format!("Step Pcho 0.5 {mode} {}, {}.", pred(r), pred(r))
        }
        6 => format!("Step Repeat {}.", guard(r)),
        7 => format!("Choose {}.", r.gen_range(1..=goals.max(1))),
        _ => format!("Step {}.", program(r)),
    }
}

fn exec(engine: &mut Engine, text: &str) -> bool {
    let cmd = parse_command(text).unwrap_or_else(|e| panic!("{text}: {e}"));
    engine.exec(&cmd.node).is_ok()
}

/// Runs up to `steps` random tactics, closes what remains with `abort`, and checks the
/// extracted program against the root prescription.
pub fn run(r: &mut impl Rng, steps: usize) -> FuzzRun {
    let mut engine = Engine::default();
    for i in 0..PREDICATES {
        let p = pool(r, 4);
        define_space(&mut engine, &format!("R{i}"), rand_subspace(r, 4, &p));
    }
    for i in 0..2 {
        let p = pool(r, 2);
        define_space(&mut engine, &format!("G{i}"), rand_subspace(r, 2, &p));
    }
    let (pre, post) = (pred(r), pred(r));
    assert!(exec(&mut engine, &format!("Refine Root : < {pre}, {post} >.")));
    let mut run = FuzzRun {
        accepted: 0,
        rejected: 0,
        closed_by_abort: 0,
        reached_end: false,
        valid: false,
        program: String::new(),
    };
    for _ in 0..steps {
        let n = engine.session.as_ref().map_or(0, |s| s.goals().len());
        if n == 0 {
            break;
        }
        if exec(&mut engine, &tactic(r, n)) {
            run.accepted += 1;
        } else {
            run.rejected += 1;
        }
    }
    while engine.session.as_ref().is_some_and(|s| !s.goals().is_empty()) {
        assert!(exec(&mut engine, "Step abort."), "abort closes any goal");
        run.closed_by_abort += 1;
    }
    run.reached_end = exec(&mut engine, "End.");
    if !run.reached_end {
        return run;
    }
    let proof = match engine.env.get("Root") {
        Some(Definition::Proof(p)) => p.clone(),
        _ => return run,
    };
    let stmt = proof.extract();
    run.program = stmt.to_string();
    let ev = engine.evaluator();
    let prog = ev.compile(&stmt).unwrap();
    let p = ev.labelled_space(&parse_expr(&pre)).unwrap();
    let q = ev.labelled_space(&parse_expr(&post)).unwrap();
    let sem = qrefine::Semantics::new(engine.lattice());
    run.valid = sem.hoare_valid(&p, &prog, &q).map(|v| v.valid).unwrap_or(false);
    run
}

fn parse_expr(s: &str) -> Expr {
    qrefine::lang::parse_expr(s).unwrap()
}
