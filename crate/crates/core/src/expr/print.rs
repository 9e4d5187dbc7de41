use std::fmt;

use super::{BinaryOp, Expr, UnaryOp};

// Binding strength, mirroring the grammar levels.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const FACTOR: u8 = 3;
const ATOM: u8 = 5;

fn strength(e: &Expr) -> u8 {
    match e {
        Expr::Constant(c) if c.is_sign_negative() => FACTOR,
        Expr::Constant(_) | Expr::Symbol(_) => ATOM,
        Expr::Unary(UnaryOp::Neg, _) => FACTOR,
        Expr::Unary(..) => ATOM,
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => SUM,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => PRODUCT,
        // a power is a factor: it may not appear as a base without parentheses
        Expr::Binary(BinaryOp::Pow, ..) => FACTOR + 1,
    }
}

pub(super) fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    write_at(f, e, 0)
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, needed: u8) -> fmt::Result {
    if strength(e) < needed {
        f.write_str("(")?;
        write_bare(f, e)?;
        return f.write_str(")");
    }
    write_bare(f, e)
}

fn write_bare(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Constant(c) => {
            let a = c.abs();
            if a == 0.0 || (1e-4..1e15).contains(&a) {
                write!(f, "{c}")
            } else {
                write!(f, "{c:?}")
            }
        }
        Expr::Symbol(s) => f.write_str(s),
        Expr::Unary(UnaryOp::Neg, a) => {
            f.write_str("-")?;
            write_at(f, a, FACTOR)
        }
        Expr::Unary(op, a) => {
            write!(f, "{}(", op.name())?;
            write_at(f, a, 0)?;
            f.write_str(")")
        }
        Expr::Binary(op, a, b) => {
            let (left, right, spaced) = match op {
                BinaryOp::Add | BinaryOp::Sub => (SUM, PRODUCT, true),
                BinaryOp::Mul | BinaryOp::Div => (PRODUCT, FACTOR, false),
                BinaryOp::Pow => (ATOM, FACTOR, false),
            };
            write_at(f, a, left)?;
            if spaced {
                write!(f, " {} ", op.symbol())?;
            } else {
                write!(f, "{}", op.symbol())?;
            }
            write_at(f, b, right)
        }
    }
}
