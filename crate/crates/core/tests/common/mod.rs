//! Random generators and the Sasaki identity table shared by property tests and the
//! acceptance run.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qrefine::lattice::{Lattice, Subspace, Tolerances};
use qrefine::linalg::{CMat, CVec};
use qrefine::qop::{gates, LabelledOp, LabelledSpace, Register};
use qrefine::Program;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod fuzz;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn rand_vec(rng: &mut impl Rng, d: usize) -> CVec {
    CVec::from_fn(d, |_, _| rand_complex(rng))
}

pub fn basis_vec(d: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[i] = Complex64::new(1.0, 0.0);
    v
}

pub fn rand_unitary(rng: &mut impl Rng, d: usize) -> CMat {
    let m = DMatrix::from_fn(d, d, |_, _| rand_complex(rng));
    m.qr().q()
}

/// Vectors from which correlated subspaces are drawn, so that meets and joins of
/// independently drawn members are often nontrivial.
pub fn pool(rng: &mut impl Rng, d: usize) -> Vec<CVec> {
    let mut p: Vec<CVec> = (0..d).map(|i| basis_vec(d, i)).collect();
    for _ in 0..d / 2 + 1 {
        p.push(rand_vec(rng, d));
    }
    p
}

/// Random subspace: a span of pool members plus occasional fresh vectors.
pub fn rand_subspace(rng: &mut impl Rng, d: usize, pool: &[CVec]) -> Subspace {
    let k = rng.gen_range(0..=d);
    let mut vs = Vec::with_capacity(k);
    for _ in 0..k {
        if rng.gen_bool(0.25) {
            vs.push(rand_vec(rng, d));
        } else {
            vs.push(pool.choose(rng).unwrap().clone());
        }
    }
    Subspace::from_spanning(&vs, Some(d), &Tolerances::default()).unwrap()
}

pub fn rand_triple(rng: &mut impl Rng, d: usize) -> [Subspace; 3] {
    let p = pool(rng, d);
    let a = rand_subspace(rng, d, &p);
    let b = rand_subspace(rng, d, &p);
    let c = rand_subspace(rng, d, &p);
    [a, b, c]
}

pub const QUBITS: [&str; 3] = ["q0", "q1", "q2"];

/// Random nonempty subregister of `q0 q1 q2` with at most `max` qubits, in random order.
pub fn rand_reg(rng: &mut impl Rng, max: usize) -> Register {
    let mut names = QUBITS.to_vec();
    names.shuffle(rng);
    let k = rng.gen_range(1..=max.min(3));
    Register::new(names[..k].iter().copied()).unwrap()
}

pub fn rand_labelled_space(rng: &mut impl Rng, reg: Register) -> LabelledSpace {
    let d = reg.dim();
    let p = pool(rng, d);
    LabelledSpace::new(rand_subspace(rng, d, &p), reg).unwrap()
}

fn rand_gate(rng: &mut impl Rng) -> Program {
    let reg = rand_reg(rng, 3);
    let mat = match (reg.len(), rng.gen_range(0..3)) {
        (1, 0) => gates::h(),
        (1, 1) => gates::s(),
        (2, 0) => gates::cx(),
        (3, 0) => gates::ccx(),
        (n, _) => rand_unitary(rng, 1 << n),
    };
    Program::Unitary(LabelledOp::new(mat, reg).unwrap())
}

/// Random loop-free, block-free executable program over `q0 q1 q2`.
pub fn rand_program(rng: &mut impl Rng, depth: usize) -> Program {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return match rng.gen_range(0..10) {
            0 => Program::Skip,
            1 if rng.gen_bool(0.3) => Program::Abort,
            1 | 2 => Program::Init(rand_reg(rng, 2)),
            3 | 4 => {
                let reg = rand_reg(rng, 2);
                Program::Assert(rand_labelled_space(rng, reg))
            }
            _ => rand_gate(rng),
        };
    }
    match rng.gen_range(0..3) {
        0 => Program::seq(rand_program(rng, depth - 1), rand_program(rng, depth - 1)),
        1 => Program::PChoice(
            rng.gen_range(0.05..0.95),
            Box::new(rand_program(rng, depth - 1)),
            Box::new(rand_program(rng, depth - 1)),
        ),
        _ => {
            let reg = rand_reg(rng, 2);
            let g = rand_labelled_space(rng, reg);
            Program::if_(g, rand_program(rng, depth - 1), rand_program(rng, depth - 1))
        }
    }
}

pub fn full_register() -> Register {
    Register::new(QUBITS).unwrap()
}

/// Shorthand lattice operations for writing identities.
pub struct Ops {
    pub lat: Lattice,
}

impl Ops {
    pub fn new(tol: Tolerances) -> Self {
        Ops {
            lat: Lattice::new(tol),
        }
    }
    pub fn m(&self, a: &Subspace, b: &Subspace) -> Subspace {
        self.lat.meet(a, b).unwrap()
    }
    pub fn j(&self, a: &Subspace, b: &Subspace) -> Subspace {
        self.lat.join(a, b).unwrap()
    }
    pub fn sc(&self, a: &Subspace, b: &Subspace) -> Subspace {
        self.lat.conjunct(a, b).unwrap()
    }
    pub fn im(&self, a: &Subspace, b: &Subspace) -> Subspace {
        self.lat.implies(a, b).unwrap()
    }
    pub fn eq(&self, a: &Subspace, b: &Subspace) -> bool {
        self.lat.equal(a, b).unwrap()
    }
    pub fn le(&self, a: &Subspace, b: &Subspace) -> bool {
        self.lat.leq(a, b).unwrap()
    }
}

pub enum Claim {
    /// All listed subspaces coincide.
    Equal(Vec<Subspace>),
    /// All listed propositions have the same truth value.
    Iff(Vec<bool>),
    /// The first proposition implies the second.
    Implies(bool, bool),
}

impl Claim {
    pub fn holds(&self, o: &Ops) -> bool {
        match self {
            Claim::Equal(xs) => xs.windows(2).all(|w| o.eq(&w[0], &w[1])),
            Claim::Iff(bs) => bs.windows(2).all(|w| w[0] == w[1]),
            Claim::Implies(a, b) => !a || *b,
        }
    }
}

pub type IdentityFn = fn(&Ops, &Subspace, &Subspace, &Subspace) -> Vec<Claim>;

/// Named families of orthomodular identities for the Sasaki operations.
pub fn sasaki_identities() -> Vec<(&'static str, IdentityFn)> {
    use Claim::*;
    vec![
        ("complement duality", |o, a, b, _| {
            let (ap, bp) = (a.complement(), b.complement());
            vec![
                Equal(vec![o.sc(a, b).complement(), o.im(a, &bp)]),
                Equal(vec![o.im(a, b).complement(), o.sc(a, &bp)]),
                Equal(vec![o.im(&ap, b).complement(), o.sc(&ap, &bp)]),
            ]
        }),
        ("binary distributivity", |o, a, b, c| {
            vec![
                Equal(vec![o.sc(a, &o.j(b, c)), o.j(&o.sc(a, b), &o.sc(a, c))]),
                Equal(vec![o.im(a, &o.m(b, c)), o.m(&o.im(a, b), &o.im(a, c))]),
            ]
        }),
        ("finite distributivity", |o, a, b, c| {
            let bs = [b.clone(), c.clone(), o.sc(b, c), c.complement()];
            let join = o.lat.join_all(a.dim(), &bs).unwrap();
            let meet = o.lat.meet_all(a.dim(), &bs).unwrap();
            let sj = bs.iter().map(|x| o.sc(a, x)).collect::<Vec<_>>();
            let im = bs.iter().map(|x| o.im(a, x)).collect::<Vec<_>>();
            vec![
                Equal(vec![o.sc(a, &join), o.lat.join_all(a.dim(), &sj).unwrap()]),
                Equal(vec![o.im(a, &meet), o.lat.meet_all(a.dim(), &im).unwrap()]),
            ]
        }),
        ("monotonicity", |o, a, b, c| {
            let b1 = o.m(b, c);
            vec![
                Implies(o.le(&b1, b), o.le(&o.sc(a, &b1), &o.sc(a, b))),
                Implies(o.le(&b1, b), o.le(&o.im(a, &b1), &o.im(a, b))),
            ]
        }),
        ("order characterisations", |o, a, b, _| {
            let (ap, bp) = (a.complement(), b.complement());
            let d = a.dim();
            let top = Subspace::full(d);
            let bot = Subspace::zero(d);
            vec![
                Iff(vec![o.le(a, b), o.eq(&o.im(a, b), &top)]),
                Iff(vec![o.le(b, &ap), o.eq(&o.sc(a, b), &bot)]),
                Iff(vec![o.le(&ap, b), o.le(&bp, a), o.eq(&o.im(a, b), b)]),
                Iff(vec![
                    o.eq(&o.j(&ap, &bp), &top),
                    o.eq(&o.m(a, b), &bot),
                    o.eq(&o.im(a, b), &ap),
                ]),
                Iff(vec![o.le(b, a), o.le(&ap, &bp), o.eq(&o.sc(a, b), b)]),
                Iff(vec![
                    o.eq(&o.j(&ap, b), &top),
                    o.eq(&o.m(a, &bp), &bot),
                    o.eq(&o.sc(a, b), a),
                ]),
            ]
        }),
        ("nested implication absorption", |o, a, b, c| {
            let inner = o.im(a, &o.im(&o.im(a, b), c));
            vec![Equal(vec![o.im(b, &inner), inner])]
        }),
        ("conjunction, two variables", |o, a, b, _| {
            let ap = a.complement();
            let bp = b.complement();
            let d = a.dim();
            let ab = o.sc(a, b);
            let ba = o.sc(b, a);
            let abp = o.sc(a, &bp);
            let bap = o.sc(b, &ap);
            let x = o.sc(&ab, &bp);
            vec![
                Equal(vec![
                    Subspace::zero(d),
                    o.sc(a, &ap),
                    o.sc(&ab, &ap),
                    o.sc(a, &o.sc(&ap, b)),
                ]),
                Equal(vec![a.clone(), o.sc(a, a)]),
                Equal(vec![
                    ab.clone(),
                    o.sc(a, &ab),
                    o.sc(a, &ba),
                    o.sc(&ab, a),
                    o.sc(&ab, b),
                    o.sc(&ab, &ab),
                    o.sc(&ab, &ba),
                ]),
                Equal(vec![
                    o.sc(a, &bap),
                    x.clone(),
                    o.sc(&ab, &abp),
                    o.sc(a, &o.sc(b, &abp)),
                    o.sc(&ab, &bap),
                    o.sc(&ab, &o.sc(&bp, a)),
                    o.sc(&x, a),
                    o.sc(&x, b),
                    o.sc(a, &o.sc(b, &o.sc(&ap, &bp))),
                    o.sc(&o.sc(a, &bap), &bp),
                    o.sc(&o.sc(a, &bap), b),
                    o.sc(a, &x),
                    o.sc(a, &o.sc(&ba, &ap)),
                ]),
            ]
        }),
        ("conjunction, three variables", |o, a, b, c| {
            let ab = o.sc(a, b);
            let abc = o.sc(&ab, c);
            let bc = o.sc(b, c);
            let a_bc = o.sc(a, &bc);
            vec![
                Equal(vec![
                    abc.clone(),
                    o.sc(&ab, &o.sc(a, c)),
                    o.sc(&ab, &o.sc(c, a)),
                    o.sc(a, &abc),
                    o.sc(&abc, a),
                    o.sc(&abc, b),
                    o.sc(&abc, c),
                ]),
                Equal(vec![
                    a_bc.clone(),
                    o.sc(&ab, &bc),
                    o.sc(&a_bc, a),
                    o.sc(&a_bc, b),
                    o.sc(a, &o.sc(&o.sc(b, a), c)),
                    o.sc(a, &o.sc(&bc, a)),
                    o.sc(a, &a_bc),
                ]),
            ]
        }),
        ("implication, two variables", |o, a, b, _| {
            let ap = a.complement();
            let bp = b.complement();
            let ab = o.im(a, b);
            vec![
                Equal(vec![o.im(a, &ab), ab.clone()]),
                Equal(vec![o.im(a, &o.im(&ap, b)), Subspace::full(a.dim())]),
                Equal(vec![o.im(a, &o.im(b, &ap)), o.im(a, &bp)]),
                Equal(vec![o.im(a, &o.im(b, a)), o.im(&o.sc(a, b), b)]),
                Equal(vec![o.im(&ab, a), a.clone()]),
                Equal(vec![o.im(&ab, &ap), o.j(&ap, &bp)]),
                Equal(vec![o.im(&ab, b), o.im(&ap, b)]),
                Equal(vec![o.im(&ab, &bp), o.sc(&o.im(&ap, &bp), &bp)]),
            ]
        }),
        ("implication with conjunction", |o, a, b, _| {
            let ap = a.complement();
            let bp = b.complement();
            let d = a.dim();
            let sab = o.sc(a, b);
            let iab = o.im(a, b);
            vec![
                Equal(vec![o.im(a, &sab), o.j(&ap, b)]),
                Equal(vec![o.sc(a, &iab), o.m(a, b)]),
                Equal(vec![o.im(&sab, a), Subspace::full(d)]),
                Equal(vec![o.sc(&iab, a), o.m(a, b)]),
                Equal(vec![o.im(a, &o.sc(&ap, b)), ap.clone()]),
                Equal(vec![o.sc(a, &o.im(&ap, b)), a.clone()]),
                Equal(vec![o.im(&sab, &ap), o.im(a, &bp)]),
                Equal(vec![o.sc(&iab, &ap), ap.clone()]),
                Equal(vec![o.im(a, &o.sc(b, a)), iab.clone()]),
                Equal(vec![o.sc(a, &o.im(b, a)), a.clone()]),
                Equal(vec![o.im(&sab, b), o.im(a, &o.im(b, a))]),
                Equal(vec![o.sc(&iab, b), o.im(&o.im(&ap, &bp), b)]),
                Equal(vec![o.im(a, &o.sc(b, &ap)), ap.clone()]),
                Equal(vec![o.sc(a, &o.im(b, &ap)), o.sc(a, &bp)]),
                Equal(vec![o.im(&sab, &bp), o.im(a, &bp)]),
                Equal(vec![o.sc(&iab, &bp), o.sc(&ap, &bp)]),
            ]
        }),
    ]
}
