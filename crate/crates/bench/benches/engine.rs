use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qrefine::lang::parse_expr;
use qrefine::qop::{gates, ket_bits};
use qrefine::{
    simulate, Config, DensityState, Definition, Engine, Gadget, Lattice, Mode, Register,
    Semantics, SimOptions, Tolerances,
};
use qrefine_bench::{random_subspace, rng, script};

fn lattice_ops(c: &mut Criterion) {
    let lat = Lattice::new(Tolerances::default());
    let mut group = c.benchmark_group("lattice");
    for dim in [4usize, 16, 64] {
        let mut r = rng(dim as u64);
        let a = random_subspace(&mut r, dim, dim / 2);
        let b = random_subspace(&mut r, dim, dim / 2);
        group.bench_with_input(BenchmarkId::new("meet", dim), &dim, |bch, _| {
            bch.iter(|| lat.meet(black_box(&a), black_box(&b)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("join", dim), &dim, |bch, _| {
            bch.iter(|| lat.join(black_box(&a), black_box(&b)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("implies", dim), &dim, |bch, _| {
            bch.iter(|| lat.implies(black_box(&a), black_box(&b)).unwrap())
        });
    }
    group.finish();
}

fn engine_with(script_name: &str, config: Option<&str>) -> Engine {
    let cfg = config.map_or_else(Config::default, |c| Config::load(&script(c)).unwrap());
    let mut engine = Engine::new(cfg).unwrap();
    let src = std::fs::read_to_string(script(script_name)).unwrap();
    assert!(engine.run_script(&src, Mode::Batch).ok());
    engine
}

fn repetition_code(c: &mut Criterion) {
    let src = std::fs::read_to_string(script("repetition.qr")).unwrap();
    c.bench_function("replay/repetition", |b| {
        b.iter(|| Engine::default().run_script(black_box(&src), Mode::Batch))
    });

    let engine = engine_with("repetition.qr", None);
    let ev = engine.evaluator();
    let prog = match engine.env.get("RepProg") {
        Some(Definition::Program(s)) => ev.compile(s).unwrap(),
        _ => unreachable!("script defines RepProg"),
    };
    let post = ev.labelled_space(&parse_expr("Pe0[q1 q2 q3 a]").unwrap()).unwrap();
    let sem = Semantics::new(engine.lattice());
    c.bench_function("wlp/repetition", |b| {
        b.iter(|| sem.wlp_labelled(black_box(&prog), black_box(&post)).unwrap())
    });
}

fn simulation(c: &mut Criterion) {
    let engine = engine_with("rz.qr", Some("rz.toml"));
    let ev = engine.evaluator();
    let prog = match engine.env.get("pCircuit") {
        Some(Definition::Program(s)) => ev.compile(s).unwrap(),
        _ => unreachable!("script defines pCircuit"),
    };
    let reg = Register::new(["q0", "q1", "t", "t'"]).unwrap();
    let input = DensityState::pure(&ket_bits("00").kronecker(&gates::omega_vec()), reg).unwrap();
    let opts = SimOptions::default();
    c.bench_function("simulate/pcircuit", |b| {
        b.iter(|| simulate(black_box(&prog), black_box(&input), &opts).unwrap())
    });

    let gadget = Gadget::add(
        Gadget::mul(Gadget::Coin(0.3), Gadget::Coin(0.3)),
        Gadget::cst(1.0),
    )
    .program("q");
    let zero = DensityState::pure(&ket_bits("0"), Register::new(["q"]).unwrap()).unwrap();
    c.bench_function("simulate/nested-gadget", |b| {
        b.iter(|| simulate(black_box(&gadget), black_box(&zero), &opts).unwrap())
    });
}

criterion_group!(benches, lattice_ops, repetition_code, simulation);
criterion_main!(benches);
