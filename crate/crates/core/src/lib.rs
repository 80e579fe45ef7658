//! Stepwise refinement of quantum while-programs against subspace pre/postconditions.

pub mod engine;
pub mod env;
pub mod gadgets;
pub mod lang;
pub mod lattice;
pub mod linalg;
pub mod qop;
pub mod refine;
pub mod semantics;

pub use engine::{Config, Engine, EngineError, Mode, ScriptReport};
pub use gadgets::Gadget;
pub use env::{Definition, Environment, EvalError, Evaluator, Value};
pub use lang::{Command, Expr, ParseError, Stmt};
pub use lattice::{Lattice, LatticeError, Subspace, Tolerances};
pub use qop::{DensityState, LabelledOp, LabelledSpace, Register};
pub use refine::{Goal, ProofNode, RefineError, SealedProof, Session, Tactic};
pub use semantics::{
    simulate, FixpointTrace, HoareVerdict, Program, SemError, Semantics, SimOptions, SimOutcome,
};
