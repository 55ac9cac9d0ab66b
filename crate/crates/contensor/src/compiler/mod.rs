//! Lowering of kernel programs into finite plans.
//!
//! Every continuous loop is unfurled against the looplets of the levels it
//! consumes and expanded pass by pass (runs, then phases, then sequences,
//! then steppers) until each region is constant in every access. Pinpoint
//! regions bind the index to a scalar; the assignment is then collapsed over
//! the region according to its operator and measure.

mod bounds;
mod lower;
mod simplify;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::ir::{AssignOp, Ex, Names, St, Slots};
use crate::lang::{Diagnostic, Program};
use crate::storage::ContTensor;

pub use bounds::{Fact, Prover};
pub use lower::{infer_upper_bound, output_spec};
pub use simplify::{simplify, simplify_ex};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("invalid program:\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error("no tensor is bound to {0}")]
    MissingTensor(String),
    #[error("no value for parameter {0}")]
    MissingParam(String),
    #[error("layout: {0}")]
    Layout(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("a continuous loop over `{0}` survived lowering")]
    Unlowered(String),
}

#[derive(Debug, Clone, Default)]
pub struct LowerOptions {
    /// Runs the rewrite system while lowering; off only for inspecting raw plans.
    pub no_simplify: bool,
    /// Removes guards and max/min operands the bound prover can discharge.
    pub opt_bounds: bool,
    /// Extra `lhs <= rhs` facts over endpoint expressions that the bound
    /// prover may assume.
    pub assume: Vec<Fact>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutDim {
    Discrete(usize),
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub name: String,
    pub dims: Vec<OutDim>,
    pub op: AssignOp,
}

/// A lowered program.
#[derive(Debug, Clone)]
pub struct Plan {
    pub body: St,
    pub slots: Slots,
    /// Input tensor names; tensor `t` in the plan is `inputs[t]`.
    pub inputs: Vec<String>,
    pub output: OutputSpec,
    /// Rendering of every looplet that was unfurled.
    pub looplets: String,
}

impl Plan {
    pub fn names(&self) -> Names {
        Names {
            slots: self.slots.names.clone(),
            tensors: self.inputs.clone(),
            outputs: vec![self.output.name.clone()],
            accesses: vec![],
        }
    }

    pub fn pretty(&self) -> String {
        self.names().st(&self.body)
    }

    pub fn count_guards(&self) -> usize {
        self.body.count(|s| matches!(s, St::Guard { .. }))
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

pub type Params = HashMap<String, f64>;
pub type Tensors = HashMap<String, ContTensor>;

/// Validates and lowers `program` against concrete tensors.
pub fn lower(program: &Program, tensors: &Tensors, params: &Params, opts: &LowerOptions) -> Result<Plan, CompileError> {
    for name in program.inputs() {
        if !tensors.contains_key(&name) {
            return Err(CompileError::MissingTensor(name));
        }
    }
    let sigs = tensors.iter().map(|(k, t)| (k.clone(), crate::lang::Signature::of(t))).collect();
    let diags = crate::lang::validate(program, &sigs);
    if !diags.is_empty() {
        return Err(CompileError::Invalid(diags));
    }
    let mut plan = lower::lower(program, tensors, params, opts)?;
    if !opts.no_simplify {
        plan.body = simplify(plan.body);
        if opts.opt_bounds {
            let mut prover = Prover::new(opts.assume.clone());
            plan.body = simplify(prover.optimize(plan.body));
        }
    }
    if let Some(v) = first_cont(&plan.body) {
        return Err(CompileError::Unlowered(plan.slots.names[v].clone()));
    }
    Ok(plan)
}

fn first_cont(s: &St) -> Option<usize> {
    let mut found = None;
    s.visit(&mut |s| {
        if let St::ForCont { idx, .. } = s {
            found.get_or_insert(*idx);
        }
    });
    found
}

/// Whether the expression contains a product, which is what the executor
/// counts as a multiply.
pub fn has_mul(e: &Ex) -> bool {
    e.any(&|e| matches!(e, Ex::Call(crate::ir::Op::Mul, _)))
}
