use super::{apply_binary, apply_unary, BinaryOp, EvalError, Expr, UnaryOp};

#[derive(Debug, Clone, PartialEq)]
enum Op {
    Const(f64),
    Load(usize),
    Unary(UnaryOp, Option<usize>),
    Binary(BinaryOp, Option<usize>),
}

/// An [`Expr`] flattened to postfix form with symbols resolved to slot
/// indices. Evaluating a program gives the same bits as [`Expr::eval`] on
/// the matching environment.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    ops: Vec<Op>,
    // printed subexpressions for the ops that can fail
    sources: Vec<String>,
    depth: usize,
}

impl Program {
    pub(super) fn compile(e: &Expr, slots: &[String]) -> Result<Self, EvalError> {
        let mut p = Program {
            ops: Vec::new(),
            sources: Vec::new(),
            depth: 0,
        };
        p.emit(e, slots, 0)?;
        Ok(p)
    }

    fn emit(&mut self, e: &Expr, slots: &[String], height: usize) -> Result<(), EvalError> {
        self.depth = self.depth.max(height + 1);
        match e {
            Expr::Constant(c) => self.ops.push(Op::Const(*c)),
            Expr::Symbol(s) => {
                let i = slots
                    .iter()
                    .position(|name| name == s)
                    .ok_or_else(|| EvalError::Unbound(s.clone()))?;
                self.ops.push(Op::Load(i));
            }
            Expr::Unary(op, a) => {
                self.emit(a, slots, height)?;
                let src = matches!(op, UnaryOp::Log | UnaryOp::Sqrt).then(|| self.source(e));
                self.ops.push(Op::Unary(*op, src));
            }
            Expr::Binary(op, a, b) => {
                self.emit(a, slots, height)?;
                self.emit(b, slots, height + 1)?;
                let src = matches!(op, BinaryOp::Div | BinaryOp::Pow).then(|| self.source(e));
                self.ops.push(Op::Binary(*op, src));
            }
        }
        Ok(())
    }

    fn source(&mut self, e: &Expr) -> usize {
        self.sources.push(e.to_string());
        self.sources.len() - 1
    }

    pub fn eval(&self, slots: &[f64]) -> Result<f64, EvalError> {
        let mut stack: Vec<f64> = Vec::with_capacity(self.depth);
        let domain = |src: Option<usize>, reason| EvalError::Domain {
            expr: src.map(|i| self.sources[i].clone()).unwrap_or_default(),
            reason,
        };
        for op in &self.ops {
            match op {
                Op::Const(c) => stack.push(*c),
                Op::Load(i) => stack.push(slots[*i]),
                Op::Unary(u, src) => {
                    let x = stack.pop().unwrap();
                    stack.push(apply_unary(*u, x).map_err(|r| domain(*src, r))?);
                }
                Op::Binary(b, src) => {
                    let y = stack.pop().unwrap();
                    let x = stack.pop().unwrap();
                    stack.push(apply_binary(*b, x, y).map_err(|r| domain(*src, r))?);
                }
            }
        }
        Ok(stack.pop().unwrap())
    }
}
