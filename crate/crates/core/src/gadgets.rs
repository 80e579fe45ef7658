//! Amplitude-arithmetic gadgets. Each gadget prepares, on one qubit `q`, the state
//! proportional to `h|0> + |1>` for a value `h` built from constants and a coin program.

use num_complex::Complex64;

use crate::linalg::cr;
use crate::qop::{gates, LabelledOp, LabelledSpace, Register};
use crate::semantics::Program;

#[derive(Debug, Clone, PartialEq)]
pub enum Gadget {
    /// `q := 0; q *= U_c`.
    Cst(Complex64),
    /// Coin with bias `p`, i.e. the constant `sqrt(p / (1 - p))`.
    Coin(f64),
    /// Inverse via a final `X`.
    Inv(Box<Gadget>),
    /// Negation via a final `Z`.
    Neg(Box<Gadget>),
    /// Product: repeat both on `q` and a local until the local reads 0 after `CX`.
    Mul(Box<Gadget>, Box<Gadget>),
    /// Sum: nested repeat loops around `B`, then a `U_sqrt2` correction.
    Add(Box<Gadget>, Box<Gadget>),
}

fn reg1(q: &str) -> Register {
    Register::new([q]).expect("single qubit")
}

fn reg2(q: &str, a: &str) -> Register {
    Register::new([q, a]).expect("distinct qubits")
}

fn unitary1(m: crate::linalg::CMat, q: &str) -> Program {
    Program::Unitary(LabelledOp::new(m, reg1(q)).expect("one-qubit gate"))
}

fn unitary2(m: crate::linalg::CMat, q: &str, a: &str) -> Program {
    Program::Unitary(LabelledOp::new(m, reg2(q, a)).expect("two-qubit gate"))
}

fn reads(space: crate::lattice::Subspace, a: &str) -> LabelledSpace {
    LabelledSpace::new(space, reg1(a)).expect("one-qubit predicate")
}

impl Gadget {
    pub fn cst(c: f64) -> Gadget {
        Gadget::Cst(cr(c))
    }

    pub fn inv(g: Gadget) -> Gadget {
        Gadget::Inv(Box::new(g))
    }

    pub fn neg(g: Gadget) -> Gadget {
        Gadget::Neg(Box::new(g))
    }

    pub fn mul(a: Gadget, b: Gadget) -> Gadget {
        Gadget::Mul(Box::new(a), Box::new(b))
    }

    pub fn add(a: Gadget, b: Gadget) -> Gadget {
        Gadget::Add(Box::new(a), Box::new(b))
    }

    /// Program preparing the gadget's state on `q`. Locals are named `q~k` with fresh `k`.
    pub fn program(&self, q: &str) -> Program {
        let mut fresh = 0;
        self.build(q, &mut fresh)
    }

    fn build(&self, q: &str, fresh: &mut usize) -> Program {
        match self {
            Gadget::Cst(c) => Program::seq(Program::Init(reg1(q)), unitary1(gates::uc(*c), q)),
            Gadget::Coin(p) => Gadget::Cst(cr((p / (1.0 - p)).sqrt())).build(q, fresh),
            Gadget::Inv(g) => Program::seq(g.build(q, fresh), unitary1(gates::x(), q)),
            Gadget::Neg(g) => Program::seq(g.build(q, fresh), unitary1(gates::z(), q)),
            Gadget::Mul(g1, g2) => {
                let a = format!("{q}~{}", *fresh);
                *fresh += 1;
                let body = Program::seq_all([
                    g1.build(q, fresh),
                    g2.build(&a, fresh),
                    unitary2(gates::cx(), q, &a),
                ]);
                Program::block(
                    reg1(&a),
                    Program::repeat_until(body, &reads(gates::p0(), &a)),
                )
            }
            Gadget::Add(g1, g2) => {
                let a = format!("{q}~{}", *fresh);
                *fresh += 1;
                let inner = Program::seq_all([
                    g1.build(q, fresh),
                    g2.build(&a, fresh),
                    unitary2(gates::b(), q, &a),
                ]);
                let outer = Program::seq_all([
                    Program::repeat_until(inner, &reads(gates::p1(), &a)),
                    unitary1(gates::x(), &a),
                    unitary1(gates::uc(cr(std::f64::consts::SQRT_2)), &a),
                    unitary2(gates::cx(), q, &a),
                ]);
                Program::block(
                    reg1(&a),
                    Program::repeat_until(outer, &reads(gates::p0(), &a)),
                )
            }
        }
    }
}
