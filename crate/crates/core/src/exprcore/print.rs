use super::expr::{Expr, FuncApp};
use num::rational::BigRational;
use num::{One, Signed};

// Output always reparses to the same tree: negative exponents are written
// as `x^(-2)`, never with `/`, and a leading minus in front of a power is
// parenthesized because unary minus binds tighter than `^` in the grammar.

pub fn to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, &mut s);
    s
}

fn rat_str(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Add(terms) => {
            // constant term last reads better: x - 3 rather than -3 + x
            let mut terms: Vec<&Expr> = terms.iter().collect();
            if terms.len() > 1 && matches!(terms[0], Expr::Num(_)) {
                terms.rotate_left(1);
            }
            for (i, t) in terms.iter().enumerate() {
                let (c, rest) = t.split_coeff();
                if i > 0 {
                    if c.is_negative() {
                        out.push_str(" - ");
                        write_term(&-c, &rest, out);
                    } else {
                        out.push_str(" + ");
                        write_term(&c, &rest, out);
                    }
                } else {
                    write_term(&c, &rest, out);
                }
            }
        }
        other => {
            let (c, rest) = other.split_coeff();
            write_term(&c, &rest, out);
        }
    }
}

// a product `c * rest`, where rest carries no numeric coefficient
fn write_term(c: &BigRational, rest: &Expr, out: &mut String) {
    if rest.is_one() {
        out.push_str(&rat_str(c));
        return;
    }
    let factors: Vec<Expr> = match rest {
        Expr::Mul(fs) => fs.to_vec(),
        other => vec![other.clone()],
    };
    let mut first = true;
    if c.is_one() {
    } else if *c == -BigRational::one() {
        out.push('-');
        if matches!(factors[0], Expr::Pow(_)) {
            out.push('(');
            write_factor(&factors[0], out);
            out.push(')');
            for f in &factors[1..] {
                out.push('*');
                write_factor(f, out);
            }
            return;
        }
    } else {
        out.push_str(&rat_str(c));
        first = false;
    }
    for f in &factors {
        if !first {
            out.push('*');
        }
        first = false;
        write_factor(f, out);
    }
}

fn write_factor(e: &Expr, out: &mut String) {
    match e {
        Expr::Add(_) | Expr::Mul(_) => {
            out.push('(');
            write_expr(e, out);
            out.push(')');
        }
        Expr::Num(r) => {
            if r.is_negative() || !r.is_integer() {
                out.push('(');
                out.push_str(&rat_str(r));
                out.push(')');
            } else {
                out.push_str(&rat_str(r));
            }
        }
        _ => write_atomish(e, out),
    }
}

fn write_atomish(e: &Expr, out: &mut String) {
    match e {
        Expr::Num(r) => out.push_str(&rat_str(r)),
        Expr::Sym(s) => out.push_str(s),
        Expr::Pow(be) => {
            let (b, x) = (&be.0, &be.1);
            match b {
                Expr::Sym(_) | Expr::Call(..) | Expr::Func(_) => write_atomish(b, out),
                Expr::Num(r) if !r.is_negative() && r.is_integer() => write_atomish(b, out),
                _ => {
                    out.push('(');
                    write_expr(b, out);
                    out.push(')');
                }
            }
            out.push('^');
            match x {
                Expr::Sym(_) | Expr::Call(..) | Expr::Func(_) => write_atomish(x, out),
                Expr::Num(r) if !r.is_negative() && r.is_integer() => write_atomish(x, out),
                _ => {
                    out.push('(');
                    write_expr(x, out);
                    out.push(')');
                }
            }
        }
        Expr::Call(b, a) => {
            out.push_str(b.name());
            out.push('(');
            write_expr(a, out);
            out.push(')');
        }
        Expr::Func(fa) => write_func(fa, out),
        Expr::Add(_) | Expr::Mul(_) => {
            out.push('(');
            write_expr(e, out);
            out.push(')');
        }
    }
}

fn write_args(args: &[Expr], out: &mut String) {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(a, out);
    }
}

fn write_func(fa: &FuncApp, out: &mut String) {
    let n = fa.total_order();
    if fa.args.len() == 1 {
        let a = &fa.args[0];
        if n >= 2 {
            if let Expr::Sym(s) = a {
                out.push_str(&format!("Diff({}, {}, {})", fa.name, s, n));
                return;
            }
        }
        out.push_str(&fa.name);
        for _ in 0..n {
            out.push('\'');
        }
        out.push('(');
        write_expr(a, out);
        out.push(')');
        return;
    }
    if n == 0 {
        out.push_str(&fa.name);
        out.push('(');
        write_args(&fa.args, out);
        out.push(')');
        return;
    }
    // several arguments with derivatives: Diff(F(a, b), i, j)
    out.push_str("Diff(");
    out.push_str(&fa.name);
    out.push('(');
    write_args(&fa.args, out);
    out.push(')');
    for o in &fa.orders {
        out.push_str(&format!(", {}", o));
    }
    out.push(')');
}
