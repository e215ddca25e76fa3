//! α-equivalence and free variables.
//!
//! Terms are compared by a lockstep walk that matches binders positionally,
//! which is the equality used everywhere in the crate. Named surface syntax
//! is kept for readable traces; canonical de-Bruijn-style keys are computed
//! on demand.

use std::collections::BTreeSet;

use super::{Name, Path, Step, Term};

pub fn free_vars(t: &Term) -> BTreeSet<Name> {
    fn go(t: &Term, scope: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match t {
            Term::Var(x) => {
                if !scope.iter().any(|s| s == x) {
                    out.insert(x.clone());
                }
            }
            Term::Abs(x, b) => {
                scope.push(x.clone());
                go(b, scope, out);
                scope.pop();
            }
            Term::App(l, r) => {
                go(l, scope, out);
                go(r, scope, out);
            }
            Term::Sub(b, x, d) => {
                scope.push(x.clone());
                go(b, scope, out);
                scope.pop();
                go(d, scope, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

pub fn occurs_free(t: &Term, name: &str) -> bool {
    match t {
        Term::Var(x) => x == name,
        Term::Abs(x, b) => x != name && occurs_free(b, name),
        Term::App(l, r) => occurs_free(l, name) || occurs_free(r, name),
        Term::Sub(b, x, d) => (x != name && occurs_free(b, name)) || occurs_free(d, name),
    }
}

fn lookup(scope: &[&str], x: &str) -> Option<usize> {
    scope.iter().rev().position(|s| *s == x)
}

/// α-equivalence: equal after canonical renaming of bound variables.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    fn go<'a>(a: &'a Term, b: &'a Term, sa: &mut Vec<&'a str>, sb: &mut Vec<&'a str>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => match (lookup(sa, x), lookup(sb, y)) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            },
            (Term::Abs(x, ba), Term::Abs(y, bb)) => {
                sa.push(x);
                sb.push(y);
                let r = go(ba, bb, sa, sb);
                sa.pop();
                sb.pop();
                r
            }
            (Term::App(la, ra), Term::App(lb, rb)) => {
                go(la, lb, sa, sb) && go(ra, rb, sa, sb)
            }
            (Term::Sub(ba, x, da), Term::Sub(bb, y, db)) => {
                if !go(da, db, sa, sb) {
                    return false;
                }
                sa.push(x);
                sb.push(y);
                let r = go(ba, bb, sa, sb);
                sa.pop();
                sb.pop();
                r
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new(), &mut Vec::new())
}

/// A canonical textual key: α-equivalent terms get equal keys.
pub fn canonical_key(t: &Term) -> String {
    fn go(t: &Term, scope: &mut Vec<String>, out: &mut String) {
        match t {
            Term::Var(x) => match lookup(&scope.iter().map(|s| s.as_str()).collect::<Vec<_>>(), x)
            {
                Some(i) => {
                    out.push('b');
                    out.push_str(&i.to_string());
                }
                None => {
                    out.push('f');
                    out.push_str(x);
                    out.push(';');
                }
            },
            Term::Abs(x, b) => {
                out.push('L');
                scope.push(x.clone());
                go(b, scope, out);
                scope.pop();
            }
            Term::App(l, r) => {
                out.push('A');
                out.push('(');
                go(l, scope, out);
                out.push(',');
                go(r, scope, out);
                out.push(')');
            }
            Term::Sub(b, x, d) => {
                out.push('S');
                out.push('(');
                scope.push(x.clone());
                go(b, scope, out);
                scope.pop();
                out.push(',');
                go(d, scope, out);
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// α-comparison of two contexts given as root terms with hole paths: the
/// subtrees at the holes are skipped, and the holes must face each other.
pub fn alpha_eq_with_holes(a: &Term, ha: &Path, b: &Term, hb: &Path) -> bool {
    fn go<'a>(
        a: &'a Term,
        b: &'a Term,
        ha: Option<&[Step]>,
        hb: Option<&[Step]>,
        sa: &mut Vec<&'a str>,
        sb: &mut Vec<&'a str>,
    ) -> bool {
        match (ha, hb) {
            (Some([]), Some([])) => return true,
            (Some([]), _) | (_, Some([])) => return false,
            _ => {}
        }
        fn pick<'h>(h: Option<&'h [Step]>, step: Step) -> Option<&'h [Step]> {
            match h {
                Some([first, rest @ ..]) if *first == step => Some(rest),
                _ => None,
            }
        }
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => match (lookup(sa, x), lookup(sb, y)) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            },
            (Term::Abs(x, ba), Term::Abs(y, bb)) => {
                sa.push(x);
                sb.push(y);
                let r = go(
                    ba,
                    bb,
                    pick(ha, Step::AbsBody),
                    pick(hb, Step::AbsBody),
                    sa,
                    sb,
                );
                sa.pop();
                sb.pop();
                r
            }
            (Term::App(la, ra), Term::App(lb, rb)) => {
                go(la, lb, pick(ha, Step::AppLeft), pick(hb, Step::AppLeft), sa, sb)
                    && go(ra, rb, pick(ha, Step::AppRight), pick(hb, Step::AppRight), sa, sb)
            }
            (Term::Sub(ba, x, da), Term::Sub(bb, y, db)) => {
                if !go(
                    da,
                    db,
                    pick(ha, Step::SubDefiniens),
                    pick(hb, Step::SubDefiniens),
                    sa,
                    sb,
                ) {
                    return false;
                }
                sa.push(x);
                sb.push(y);
                let r = go(
                    ba,
                    bb,
                    pick(ha, Step::SubBody),
                    pick(hb, Step::SubBody),
                    sa,
                    sb,
                );
                sa.pop();
                sb.pop();
                r
            }
            _ => false,
        }
    }
    go(
        a,
        b,
        Some(ha.steps()),
        Some(hb.steps()),
        &mut Vec::new(),
        &mut Vec::new(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn t(s: &str) -> std::rc::Rc<Term> {
        parse(s).unwrap()
    }

    #[test]
    fn renamed_identity() {
        assert!(alpha_eq(&t("\\x.x"), &t("\\y.y")));
    }

    #[test]
    fn distinct_binders() {
        assert!(!alpha_eq(&t("\\x.\\y.x"), &t("\\x.\\y.y")));
    }

    #[test]
    fn es_binds_body_not_definiens() {
        assert!(alpha_eq(&t("x[x<-z]"), &t("y[y<-z]")));
        assert!(!alpha_eq(&t("x[x<-x]"), &t("y[y<-z]")));
        // the definiens `x` stays free
        assert_eq!(
            free_vars(&t("x[x<-x]")).into_iter().collect::<Vec<_>>(),
            vec!["x".to_string()]
        );
    }

    #[test]
    fn free_names_matter() {
        assert!(!alpha_eq(&t("x"), &t("y")));
        assert!(alpha_eq(&t("x"), &t("x")));
    }

    #[test]
    fn keys_agree_with_alpha_eq() {
        let pairs = [
            ("\\x.x x", "\\a.a a"),
            ("(\\x.x)(\\y.y)", "(\\u.u)(\\v.v)"),
            ("x[x<-\\y.y]", "w[w<-\\q.q]"),
        ];
        for (a, b) in pairs {
            assert_eq!(canonical_key(&t(a)), canonical_key(&t(b)));
            assert!(alpha_eq(&t(a), &t(b)));
        }
        assert_ne!(canonical_key(&t("\\x.\\y.x")), canonical_key(&t("\\x.\\y.y")));
    }
}
