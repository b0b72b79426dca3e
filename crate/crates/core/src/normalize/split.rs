use crate::term::{Expr, TypeEnv};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }
}

/// The splitting heuristic. On `P(cast(X -> Z, x), cast(Y -> Z, y))` with
/// `X != Y`, routes one cast through the other source type:
/// `cast(X -> Z, x)` becomes `cast(Y -> Z, cast(X -> Y, x))` when `X -> Y`
/// exists, otherwise the right argument is treated symmetrically. Returns
/// the side that changed and its new argument.
pub fn split_heuristic(node: &Expr, env: &TypeEnv) -> Option<(Side, Expr)> {
    let Expr::App { args, .. } = node else {
        return None;
    };
    let [Expr::Cast { src: x_ty, dst: z_l, body: x }, Expr::Cast { src: y_ty, dst: z_r, body: y }] =
        args.as_slice()
    else {
        return None;
    };
    if x_ty == y_ty || z_l != z_r {
        return None;
    }
    let route = |from: &crate::term::Ty, via: &crate::term::Ty, body: &Expr| {
        Expr::cast(via.clone(), z_l.clone(), Expr::cast(from.clone(), via.clone(), body.clone()))
    };
    if env.coercion_exists(x_ty, y_ty) {
        Some((Side::Left, route(x_ty, y_ty, x)))
    } else if env.coercion_exists(y_ty, x_ty) {
        Some((Side::Right, route(y_ty, x_ty, y)))
    } else {
        None
    }
}
