//! Printing with minimal parentheses.
//!
//! The printer is a right inverse of the parser: `parse(display_term(t))`
//! returns `t` exactly, and `display_term(parse(s))` normalizes whitespace
//! and redundant parentheses.

use super::{Path, Step, Term};

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    /// Top level, abstraction body, definiens: everything is bare.
    Top,
    /// Left of an application: abstractions need parentheses.
    AppLeft,
    /// Right of an application or body of a printed suffix: only atoms
    /// (and suffixed atoms) are bare.
    Tight,
}

fn go(t: &Term, slot: Slot, hole: Option<&[Step]>, out: &mut String) {
    if hole == Some(&[]) {
        out.push_str("⟦·⟧");
        return;
    }
    let sub_hole = |step: Step| -> Option<&[Step]> {
        match hole {
            Some([first, rest @ ..]) if *first == step => Some(rest),
            _ => None,
        }
    };
    match t {
        Term::Var(x) => out.push_str(x),
        Term::Abs(x, b) => {
            let parens = slot != Slot::Top;
            if parens {
                out.push('(');
            }
            out.push('\\');
            out.push_str(x);
            out.push('.');
            go(b, Slot::Top, sub_hole(Step::AbsBody), out);
            if parens {
                out.push(')');
            }
        }
        Term::App(l, r) => {
            let parens = slot == Slot::Tight;
            if parens {
                out.push('(');
            }
            go(l, Slot::AppLeft, sub_hole(Step::AppLeft), out);
            out.push(' ');
            go(r, Slot::Tight, sub_hole(Step::AppRight), out);
            if parens {
                out.push(')');
            }
        }
        Term::Sub(b, x, d) => {
            // The suffix chain binds tighter than application, so the body
            // is printed in the tight slot and the whole chain is atomic.
            go(b, Slot::Tight, sub_hole(Step::SubBody), out);
            out.push('[');
            out.push_str(x);
            out.push_str("<-");
            go(d, Slot::Top, sub_hole(Step::SubDefiniens), out);
            out.push(']');
        }
    }
}

pub fn display_term(t: &Term) -> String {
    let mut out = String::new();
    go(t, Slot::Top, None, &mut out);
    out
}

/// Renders the context obtained by removing the subterm at `hole` from
/// `root`; the hole prints as `⟦·⟧`.
pub fn display_context(root: &Term, hole: &Path) -> String {
    let mut out = String::new();
    go(root, Slot::Top, Some(hole.steps()), &mut out);
    out
}
