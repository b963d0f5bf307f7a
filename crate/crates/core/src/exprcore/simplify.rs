use super::expr::{Builtin, Expr};

/// Rewrites to a fixed point.
///
/// Most rules (flattening, rational folding, like-term collection, power
/// merging, `ln(exp x)`, `e^0`) already live in the smart constructors; on
/// top of those this pass merges exponentials `e^a * e^b -> e^(a+b)` and
/// then repeats the bottom-up rebuild until nothing changes. It is sound but
/// not canonical; zero tests go through `equivalent`.
pub fn simplify(e: &Expr) -> Expr {
    let mut cur = e.clone();
    for _ in 0..64 {
        let next = pass(&cur);
        if next == cur {
            return next;
        }
        cur = next;
    }
    cur
}

fn pass(e: &Expr) -> Expr {
    let rebuilt = e.map_children(pass);
    match &rebuilt {
        Expr::Mul(fs) => merge_exps(fs),
        _ => rebuilt,
    }
}

fn merge_exps(fs: &[Expr]) -> Expr {
    let mut args = Vec::new();
    let mut rest = Vec::new();
    for f in fs {
        match f {
            Expr::Call(Builtin::Exp, a) => args.push((**a).clone()),
            other => rest.push(other.clone()),
        }
    }
    if args.len() < 2 {
        return Expr::mul(fs.to_vec());
    }
    rest.push(Expr::add(args).exp());
    Expr::mul(rest)
}
