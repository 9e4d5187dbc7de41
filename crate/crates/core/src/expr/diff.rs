use super::{binary, unary, BinaryOp, Expr, UnaryOp};

pub(super) fn diff(e: &Expr, s: &str) -> Expr {
    use BinaryOp::*;
    use UnaryOp::*;

    if !e.depends_on(s) {
        return Expr::Constant(0.0);
    }
    match e {
        Expr::Constant(_) => Expr::Constant(0.0),
        Expr::Symbol(name) => Expr::Constant(if name == s { 1.0 } else { 0.0 }),
        Expr::Unary(op, a) => {
            let a = a.fold();
            let da = diff(&a, s);
            let outer = match op {
                Neg => return unary(Neg, da),
                Sin => unary(Cos, a),
                Cos => unary(Neg, unary(Sin, a)),
                // 1 + tan^2
                Tan => binary(Add, 1.0.into(), binary(Pow, unary(Tan, a), 2.0.into())),
                Exp => unary(Exp, a),
                Log => binary(Div, 1.0.into(), a),
                Sqrt => binary(Div, 1.0.into(), binary(Mul, 2.0.into(), unary(Sqrt, a))),
            };
            binary(Mul, outer, da)
        }
        Expr::Binary(op, a, b) => {
            let (a, b) = (a.fold(), b.fold());
            let (da, db) = (diff(&a, s), diff(&b, s));
            match op {
                Add => binary(Add, da, db),
                Sub => binary(Sub, da, db),
                Mul => binary(Add, binary(Mul, da, b), binary(Mul, a, db)),
                Div => {
                    // (da*b - a*db) / b^2
                    let num = binary(Sub, binary(Mul, da, b.clone()), binary(Mul, a, db));
                    binary(Div, num, binary(Pow, b, 2.0.into()))
                }
                Pow => {
                    if !b.depends_on(s) {
                        // b * a^(b-1) * da
                        let reduced = binary(Sub, b.clone(), 1.0.into());
                        binary(Mul, binary(Mul, b, binary(Pow, a, reduced)), da)
                    } else {
                        // a^b * (db*log(a) + b*da/a)
                        let power = binary(Pow, a.clone(), b.clone());
                        let log_term = binary(Mul, db, unary(Log, a.clone()));
                        let base_term = binary(Div, binary(Mul, b, da), a);
                        binary(Mul, power, binary(Add, log_term, base_term))
                    }
                }
            }
        }
    }
}
