//! Canonical ASCII printing, the inverse of the parser.

use std::fmt::{self, Write};

use super::expr::{Expr, Op};

/// What the printer needs to know about a node.
pub(crate) enum View<'a, T> {
    Atom(String),
    /// Numeral literals are atoms but need parentheses under negation.
    Numeral(String),
    App(&'a Op, &'a [T]),
    Cast { src: Option<String>, dst: String, body: &'a T },
}

pub(crate) trait Printable: Sized {
    fn view(&self) -> View<'_, Self>;
}

impl Printable for Expr {
    fn view(&self) -> View<'_, Self> {
        match self {
            Expr::Var { name, .. } => View::Atom(name.to_string()),
            Expr::Num { value, ty } => View::Numeral(format!("{value}:{ty}")),
            Expr::App { op, args } => View::App(op, args),
            Expr::Cast { dst, body, .. } => View::Cast { src: None, dst: dst.to_string(), body },
        }
    }
}

// Binding levels, loosest first.
const REL: u8 = 0;
const ADD: u8 = 1;
const MUL: u8 = 2;
const UNARY: u8 = 3;

pub(crate) fn write_node<T: Printable>(node: &T, ctx: u8, out: &mut String) {
    match node.view() {
        View::Atom(s) | View::Numeral(s) => out.push_str(&s),
        View::Cast { src, dst, body } => {
            out.push_str("cast(");
            if let Some(src) = src {
                out.push_str(&src);
                out.push_str(" -> ");
            }
            out.push_str(&dst);
            out.push_str(", ");
            write_node(body, REL, out);
            out.push(')');
        }
        View::App(op, args) => match (op.symbol(), args) {
            (Some(_), [body]) if *op == Op::Neg => {
                let wrap = ctx > UNARY;
                if wrap {
                    out.push('(');
                }
                out.push('-');
                if matches!(body.view(), View::Numeral(_)) {
                    out.push('(');
                    write_node(body, REL, out);
                    out.push(')');
                } else {
                    write_node(body, UNARY, out);
                }
                if wrap {
                    out.push(')');
                }
            }
            (Some(sym), [l, r]) => {
                let (level, lctx, rctx) = match op {
                    Op::Add | Op::Sub => (ADD, ADD, MUL),
                    Op::Mul => (MUL, MUL, UNARY),
                    _ => (REL, ADD, ADD),
                };
                let wrap = ctx > level;
                if wrap {
                    out.push('(');
                }
                write_node(l, lctx, out);
                let _ = write!(out, " {sym} ");
                write_node(r, rctx, out);
                if wrap {
                    out.push(')');
                }
            }
            _ => {
                out.push_str(op.name());
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_node(a, REL, out);
                }
                out.push(')');
            }
        },
    }
}

pub(crate) fn render<T: Printable>(node: &T) -> String {
    let mut out = String::new();
    write_node(node, REL, &mut out);
    out
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}
