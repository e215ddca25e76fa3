//! Head evaluation on pure terms and linear head evaluation on LSC terms.
//!
//! Linear head evaluation contracts redexes under head contexts only:
//!
//! - `dB`: `S⟦\x.t⟧ u  ->  S⟦t[x<-u]⟧` turns a β-redex into an ES;
//! - `ls`: `H⟦x⟧[x<-t]  ->  H⟦t⟧[x<-t]` replaces only the head occurrence;
//! - `gc`: `t[x<-u]  ->  t` when `x` is not free in `t`.
//!
//! The relation has the diamond property, so the leftmost-outermost
//! strategy used by [`lhe_normalize`] is observationally irrelevant; it is
//! fixed to make step counts reproducible. The module also extends the
//! rules to contexts (holes riding along, plus the plug-parametric `ls`
//! and `gc` variants), which the improvement relations need.

use std::cell::Cell;
use std::rc::Rc;

use crate::syntax::{occurs_free, Name, Path, Step, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleName {
    Db,
    Ls,
    Gc,
}

impl RuleName {
    pub fn tag(self) -> &'static str {
        match self {
            RuleName::Db => "dB",
            RuleName::Ls => "ls",
            RuleName::Gc => "gc",
        }
    }
}

/// A redex occurrence: the rule and the path of the contracted pattern.
/// The site always lies on the spine (under a head context). For `dB` it is
/// the application node, for `ls` and `gc` the ES node; an `ls` redex also
/// records the head occurrence that gets replaced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Redex {
    pub rule: RuleName,
    pub site: Path,
    /// For `ls`: the path of the replaced occurrence (inside the ES body).
    pub occurrence: Option<Path>,
}

thread_local! {
    static FRESH: Cell<u64> = const { Cell::new(0) };
}

/// Fresh-name supply: the base name with a primed counter suffix.
fn fresh_name(base: &str) -> Name {
    let n = FRESH.with(|c| {
        let v = c.get();
        c.set(v + 1);
        v
    });
    let stem: String = base.chars().take_while(|c| *c != '\'').collect();
    format!("{stem}'{n}")
}

/// Capture-avoiding meta-level substitution `t{name := repl}`.
pub fn substitute(t: &Rc<Term>, name: &str, repl: &Rc<Term>) -> Rc<Term> {
    match t.as_ref() {
        Term::Var(x) => {
            if x == name {
                repl.clone()
            } else {
                t.clone()
            }
        }
        Term::Abs(x, b) => {
            if x == name {
                t.clone()
            } else if occurs_free(repl, x) && occurs_free(b, name) {
                let x2 = fresh_name(x);
                let renamed = substitute(b, x, &Rc::new(Term::Var(x2.clone())));
                Rc::new(Term::Abs(x2, substitute(&renamed, name, repl)))
            } else {
                Rc::new(Term::Abs(x.clone(), substitute(b, name, repl)))
            }
        }
        Term::App(l, r) => Rc::new(Term::App(
            substitute(l, name, repl),
            substitute(r, name, repl),
        )),
        Term::Sub(b, x, d) => {
            let d2 = substitute(d, name, repl);
            if x == name {
                Rc::new(Term::Sub(b.clone(), x.clone(), d2))
            } else if occurs_free(repl, x) && occurs_free(b, name) {
                let x2 = fresh_name(x);
                let renamed = substitute(b, x, &Rc::new(Term::Var(x2.clone())));
                Rc::new(Term::Sub(substitute(&renamed, name, repl), x2, d2))
            } else {
                Rc::new(Term::Sub(substitute(b, name, repl), x.clone(), d2))
            }
        }
    }
}

/// One step of head evaluation on a pure term:
/// `\x1...\xk.(\y.t) u r1...rh -> \x1...\xk.t{y:=u} r1...rh`.
/// Returns `None` on head normal forms.
pub fn head_step(t: &Rc<Term>) -> Option<Rc<Term>> {
    match t.as_ref() {
        Term::Abs(x, b) => Some(Rc::new(Term::Abs(x.clone(), head_step(b)?))),
        Term::App(l, r) => match l.as_ref() {
            Term::Abs(x, b) => Some(substitute(b, x, r)),
            _ => Some(Rc::new(Term::App(head_step(l)?, r.clone()))),
        },
        _ => None,
    }
}

/// Iterated [`head_step`]; `None` when the fuel runs out.
pub fn head_normalize(t: &Rc<Term>, fuel: usize) -> Option<Rc<Term>> {
    let mut cur = t.clone();
    for _ in 0..fuel {
        match head_step(&cur) {
            Some(next) => cur = next,
            None => return Some(cur),
        }
    }
    head_step(&cur).is_none().then_some(cur)
}

/// Walks the spine of an ES body looking for the head occurrence of
/// `name`, stopping when a binder shadows it. Returns the relative path.
fn head_occurrence(body: &Term, name: &str) -> Option<Path> {
    let mut steps = Vec::new();
    let mut cur = body;
    loop {
        match cur {
            Term::Var(x) => return (x == name).then(|| Path::from_steps(&steps)),
            Term::Abs(x, b) => {
                if x == name {
                    return None;
                }
                steps.push(Step::AbsBody);
                cur = b;
            }
            Term::App(l, _) => {
                steps.push(Step::AppLeft);
                cur = l;
            }
            Term::Sub(b, x, _) => {
                if x == name {
                    return None;
                }
                steps.push(Step::SubBody);
                cur = b;
            }
        }
    }
}

/// All linear-head-evaluation redexes, outermost first.
pub fn lhe_redexes(t: &Rc<Term>) -> Vec<Redex> {
    lhe_redexes_filtered(t, true)
}

/// As [`lhe_redexes`], optionally excluding `gc` (it is postponable).
pub fn lhe_redexes_filtered(t: &Rc<Term>, with_gc: bool) -> Vec<Redex> {
    let mut out = Vec::new();
    let mut steps = Vec::new();
    let mut cur = t.as_ref();
    loop {
        match cur {
            Term::App(l, _) => {
                let mut inner = l.as_ref();
                while let Term::Sub(b, _, _) = inner {
                    inner = b;
                }
                if matches!(inner, Term::Abs(..)) {
                    out.push(Redex {
                        rule: RuleName::Db,
                        site: Path::from_steps(&steps),
                        occurrence: None,
                    });
                }
                steps.push(Step::AppLeft);
                cur = l;
            }
            Term::Sub(b, x, _) => {
                if let Some(rel) = head_occurrence(b, x) {
                    let mut occ = steps.clone();
                    occ.push(Step::SubBody);
                    occ.extend_from_slice(rel.steps());
                    out.push(Redex {
                        rule: RuleName::Ls,
                        site: Path::from_steps(&steps),
                        occurrence: Some(Path::from_steps(&occ)),
                    });
                } else if with_gc && !occurs_free(b, x) {
                    out.push(Redex {
                        rule: RuleName::Gc,
                        site: Path::from_steps(&steps),
                        occurrence: None,
                    });
                }
                steps.push(Step::SubBody);
                cur = b;
            }
            Term::Abs(_, b) => {
                steps.push(Step::AbsBody);
                cur = b;
            }
            Term::Var(_) => return out,
        }
    }
}

/// Renames binders of `t` that lie on the spine prefix `path` and would
/// capture a free variable of `avoid`. This is the on-the-fly α-renaming
/// both `dB` (over the substitution context) and `ls` (over the head
/// context) may need when they move a term under binders.
fn rename_spine_captures(t: &Rc<Term>, path: &[Step], avoid: &Term) -> Rc<Term> {
    let Some((&first, rest)) = path.split_first() else {
        return t.clone();
    };
    match (t.as_ref(), first) {
        (Term::Abs(x, b), Step::AbsBody) => {
            if occurs_free(avoid, x) {
                let x2 = fresh_name(x);
                let b2 = substitute(b, x, &Rc::new(Term::Var(x2.clone())));
                Rc::new(Term::Abs(x2, rename_spine_captures(&b2, rest, avoid)))
            } else {
                Rc::new(Term::Abs(x.clone(), rename_spine_captures(b, rest, avoid)))
            }
        }
        (Term::Sub(b, x, d), Step::SubBody) => {
            if occurs_free(avoid, x) {
                let x2 = fresh_name(x);
                let b2 = substitute(b, x, &Rc::new(Term::Var(x2.clone())));
                Rc::new(Term::Sub(
                    rename_spine_captures(&b2, rest, avoid),
                    x2,
                    d.clone(),
                ))
            } else {
                Rc::new(Term::Sub(
                    rename_spine_captures(b, rest, avoid),
                    x.clone(),
                    d.clone(),
                ))
            }
        }
        (Term::App(l, r), Step::AppLeft) => Rc::new(Term::App(
            rename_spine_captures(l, rest, avoid),
            r.clone(),
        )),
        _ => t.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvalidRedex(pub String);

/// Contracts one redex. For `ls` only the designated head occurrence is
/// replaced and the ES is kept.
pub fn lhe_step(t: &Rc<Term>, redex: &Redex) -> Result<Rc<Term>, InvalidRedex> {
    let site_term = t
        .at(&redex.site)
        .map_err(|e| InvalidRedex(format!("unresolvable site: {e}")))?;
    let new_site: Rc<Term> = match redex.rule {
        RuleName::Db => {
            let Term::App(l, arg) = site_term else {
                return Err(InvalidRedex("dB site is not an application".into()));
            };
            // Collect the substitution context around the abstraction.
            let mut layers: Vec<(Name, Rc<Term>)> = Vec::new();
            let mut inner = l.clone();
            while let Term::Sub(b, x, d) = inner.as_ref() {
                layers.push((x.clone(), d.clone()));
                inner = b.clone();
            }
            let spine_path: Vec<Step> = std::iter::repeat(Step::SubBody)
                .take(layers.len())
                .collect();
            let l2 = rename_spine_captures(l, &spine_path, arg);
            let mut layers = Vec::new();
            let mut inner = l2;
            while let Term::Sub(b, x, d) = inner.as_ref() {
                layers.push((x.clone(), d.clone()));
                inner = b.clone();
            }
            let Term::Abs(x, body) = inner.as_ref() else {
                return Err(InvalidRedex("dB site has no abstraction under ES".into()));
            };
            let mut out = Rc::new(Term::Sub(body.clone(), x.clone(), arg.clone()));
            for (y, d) in layers.into_iter().rev() {
                out = Rc::new(Term::Sub(out, y, d));
            }
            out
        }
        RuleName::Ls => {
            let Term::Sub(body, x, def) = site_term else {
                return Err(InvalidRedex("ls site is not an ES".into()));
            };
            let Some(occ) = &redex.occurrence else {
                return Err(InvalidRedex("ls redex without occurrence".into()));
            };
            let body_site = redex.site.child(Step::SubBody);
            let Some(rel) = occ.strip_prefix(&body_site) else {
                return Err(InvalidRedex("ls occurrence outside the ES body".into()));
            };
            match head_occurrence(body, x) {
                Some(found) if found.steps() == rel => {}
                _ => return Err(InvalidRedex("ls occurrence is not the head occurrence".into())),
            }
            // When the bound name occurs free in the definiens, the copy
            // placed in the body would be captured by the ES itself; rename
            // the ES binder first.
            let (body, x) = if occurs_free(def, x) {
                let x2 = fresh_name(x);
                (substitute(body, x, &Rc::new(Term::Var(x2.clone()))), x2)
            } else {
                (body.clone(), x.clone())
            };
            let body2 = rename_spine_captures(&body, rel, def);
            let body3 = body2
                .replace_at(&Path::from_steps(rel), def.clone())
                .map_err(|e| InvalidRedex(format!("occurrence path broke: {e}")))?;
            Rc::new(Term::Sub(body3, x, def.clone()))
        }
        RuleName::Gc => {
            let Term::Sub(body, x, _) = site_term else {
                return Err(InvalidRedex("gc site is not an ES".into()));
            };
            if occurs_free(body, x) {
                return Err(InvalidRedex("gc site binds a used variable".into()));
            }
            body.clone()
        }
    };
    t.replace_at(&redex.site, new_site)
        .map_err(|e| InvalidRedex(format!("unresolvable site: {e}")))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormalizeOutcome {
    Normal(Rc<Term>),
    FuelExhausted(Rc<Term>),
}

/// Iterates [`lhe_step`] on the leftmost-outermost redex.
pub fn lhe_normalize(t: &Rc<Term>, fuel: usize) -> NormalizeOutcome {
    lhe_normalize_traced(t, fuel, true).0
}

/// As [`lhe_normalize`], recording each contracted redex; `with_gc`
/// disables garbage-collection steps when false.
pub fn lhe_normalize_traced(
    t: &Rc<Term>,
    fuel: usize,
    with_gc: bool,
) -> (NormalizeOutcome, Vec<(Redex, Rc<Term>)>) {
    let mut cur = t.clone();
    let mut steps = Vec::new();
    for _ in 0..fuel {
        let redexes = lhe_redexes_filtered(&cur, with_gc);
        let Some(redex) = redexes.first() else {
            return (NormalizeOutcome::Normal(cur), steps);
        };
        cur = lhe_step(&cur, redex).expect("enumerated redex fires");
        steps.push((redex.clone(), cur.clone()));
    }
    if lhe_redexes_filtered(&cur, with_gc).is_empty() {
        (NormalizeOutcome::Normal(cur), steps)
    } else {
        (NormalizeOutcome::FuelExhausted(cur), steps)
    }
}

/// Unfolds every ES into a meta-level substitution, innermost out.
pub fn unfold(t: &Rc<Term>) -> Rc<Term> {
    match t.as_ref() {
        Term::Var(_) => t.clone(),
        Term::Abs(x, b) => Rc::new(Term::Abs(x.clone(), unfold(b))),
        Term::App(l, r) => Rc::new(Term::App(unfold(l), unfold(r))),
        Term::Sub(b, x, d) => substitute(&unfold(b), x, &unfold(d)),
    }
}

/// Which binder the head variable of a spine refers to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeadRef {
    /// Index among the spine binders, counted from the outermost.
    Bound(usize),
    Free(Name),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spine {
    pub binders: Vec<Name>,
    pub head: HeadRef,
    pub args: usize,
}

/// The spine of a ⊸-normal term, read through its substitution contexts:
/// binders, head variable and argument count. `None` if the term still has
/// a redex.
pub fn spine(t: &Rc<Term>) -> Option<Spine> {
    if !lhe_redexes(t).is_empty() {
        return None;
    }
    enum ScopeEntry {
        Lam(usize),
        Es,
    }
    let mut binders: Vec<Name> = Vec::new();
    let mut scope: Vec<(Name, ScopeEntry)> = Vec::new();
    let mut cur = t.as_ref();
    let mut args = 0;
    loop {
        match cur {
            Term::Sub(b, x, _) => {
                scope.push((x.clone(), ScopeEntry::Es));
                cur = b;
            }
            Term::Abs(x, b) if args == 0 => {
                scope.push((x.clone(), ScopeEntry::Lam(binders.len())));
                binders.push(x.clone());
                cur = b;
            }
            Term::Abs(..) => return None,
            Term::App(l, _) => {
                args += 1;
                cur = l;
            }
            Term::Var(x) => {
                let head = match scope.iter().rev().find(|(name, _)| name == x) {
                    Some((_, ScopeEntry::Lam(i))) => HeadRef::Bound(*i),
                    // A spine ES binding the head variable would be an ls
                    // redex; unreachable on ⊸-normal terms.
                    Some((_, ScopeEntry::Es)) => return None,
                    None => HeadRef::Free(x.clone()),
                };
                return Some(Spine {
                    binders,
                    head,
                    args,
                });
            }
        }
    }
}

/// A context materialized as the full plugged term plus the hole path: the
/// content at the hole rides along through rewriting.
pub type CtxConfig = (Rc<Term>, Path);

/// One-step reducts of a context under the rules extended to contexts.
/// Ordinary redexes fire with the hole riding along; when the hole sits
/// inside the pattern, the hole-aware clauses apply. The plug-parametric
/// `ls` and `gc` variants read their parameter from the hole content of
/// the materialized configuration.
pub fn ctx_rewrite(rule: RuleName, config: &CtxConfig) -> Vec<CtxConfig> {
    let (root, hole) = config;
    let mut out = Vec::new();
    for redex in lhe_redexes(root) {
        if redex.rule != rule {
            continue;
        }
        match rule {
            RuleName::Db => {
                // The pattern nodes are the application, the S-chain and
                // the abstraction; the hole is a leaf elsewhere, so any
                // hole position transports.
                if let Some(mapped) = transport_path(root, &redex, hole) {
                    let next = lhe_step(root, &redex).expect("enumerated redex fires");
                    out.push((next, mapped));
                }
            }
            RuleName::Ls => {
                let occ = redex.occurrence.as_ref().expect("ls carries occurrence");
                let def_path = redex.site.child(Step::SubDefiniens);
                if occ.is_prefix_of(hole) {
                    // The hole is the head occurrence (or inside it): the
                    // replaced occurrence is opaque, no rule applies.
                    continue;
                }
                if def_path.is_prefix_of(hole) {
                    // Parametric variant: the hole lies in the definiens;
                    // its copy at the head occurrence keeps the hole while
                    // the kept definiens is materialized with the plug.
                    let next = lhe_step(root, &redex).expect("enumerated redex fires");
                    let rel = hole.strip_prefix(&def_path).unwrap();
                    out.push((next, occ.join(rel)));
                } else if let Some(mapped) = transport_path(root, &redex, hole) {
                    let next = lhe_step(root, &redex).expect("enumerated redex fires");
                    out.push((next, mapped));
                }
            }
            RuleName::Gc => {
                let body_path = redex.site.child(Step::SubBody);
                let def_path = redex.site.child(Step::SubDefiniens);
                if def_path.is_prefix_of(hole) {
                    // The hole would be erased; undefined on contexts.
                    continue;
                }
                // The ordinary rule requires the bound name unused in the
                // body; with the hole in the body the check must also hold
                // for the plug (the parametric side condition).
                if body_path.is_prefix_of(hole) {
                    let Term::Sub(_, x, _) = root.at(&redex.site).unwrap() else {
                        unreachable!()
                    };
                    let plug = root.at(hole).unwrap();
                    if occurs_free(plug, x) {
                        continue;
                    }
                    // The enumerated redex already certified the body part
                    // (plug included); fire and transport.
                }
                if let Some(mapped) = transport_path(root, &redex, hole) {
                    let next = lhe_step(root, &redex).expect("enumerated redex fires");
                    out.push((next, mapped));
                }
            }
        }
    }
    out
}

/// Where a position of the source of a redex lands in the reduct. `None`
/// for the pattern nodes consumed by the rule and for positions erased by
/// `gc`. For `ls`, positions inside the definiens have two residuals; this
/// returns the kept-definiens one and [`transport_path_ls_copy`] the copy.
pub fn transport_path(root: &Term, redex: &Redex, p: &Path) -> Option<Path> {
    let site = &redex.site;
    if !site.is_prefix_of(p) {
        return Some(p.clone());
    }
    let rel = p.strip_prefix(site).unwrap();
    match redex.rule {
        RuleName::Db => {
            let Ok(Term::App(l, _)) = root.at(site) else {
                return None;
            };
            let mut m = 0;
            let mut inner = l.as_ref();
            while let Term::Sub(b, _, _) = inner {
                m += 1;
                inner = b;
            }
            // rel within: [] the app node; AppRight ++ r the argument;
            // AppLeft ++ SubBody^j (++ SubDefiniens ++ r) the S-chain;
            // AppLeft ++ SubBody^m the abstraction;
            // AppLeft ++ SubBody^m ++ AbsBody ++ r the body.
            match rel.split_first() {
                None => None,
                Some((Step::AppRight, r)) => {
                    let mut steps = site.steps().to_vec();
                    steps.extend(std::iter::repeat(Step::SubBody).take(m));
                    steps.push(Step::SubDefiniens);
                    steps.extend_from_slice(r);
                    Some(Path::from_steps(&steps))
                }
                Some((Step::AppLeft, r)) => {
                    let j = r.iter().take_while(|s| **s == Step::SubBody).count();
                    let rest = &r[j.min(m)..];
                    if j >= m {
                        // At or under the abstraction node.
                        match rest.split_first() {
                            None => Some(site.join(&vec![Step::SubBody; m])),
                            Some((Step::AbsBody, r2)) => {
                                let mut steps = site.steps().to_vec();
                                steps.extend(std::iter::repeat(Step::SubBody).take(m));
                                steps.push(Step::SubBody);
                                steps.extend_from_slice(r2);
                                Some(Path::from_steps(&steps))
                            }
                            _ => None,
                        }
                    } else {
                        // Within the S-chain.
                        let mut steps = site.steps().to_vec();
                        steps.extend(std::iter::repeat(Step::SubBody).take(j));
                        match rest.split_first() {
                            None => {}
                            Some((Step::SubDefiniens, r2)) => {
                                steps.push(Step::SubDefiniens);
                                steps.extend_from_slice(r2);
                            }
                            _ => return None,
                        }
                        Some(Path::from_steps(&steps))
                    }
                }
                _ => None,
            }
        }
        RuleName::Ls => {
            let occ = redex.occurrence.as_ref()?;
            if occ.is_prefix_of(p) {
                // The occurrence itself is consumed (replaced by the copy).
                return None;
            }
            Some(p.clone())
        }
        RuleName::Gc => match rel.split_first() {
            None => None,
            Some((Step::SubBody, r)) => Some(site.join(r)),
            Some((Step::SubDefiniens, _)) => None,
            _ => unreachable!("gc site is an ES"),
        },
    }
}

/// The second residual of an `ls` step for positions inside the definiens:
/// the copy placed at the head occurrence.
pub fn transport_path_ls_copy(redex: &Redex, p: &Path) -> Option<Path> {
    if redex.rule != RuleName::Ls {
        return None;
    }
    let occ = redex.occurrence.as_ref()?;
    let def_path = redex.site.child(Step::SubDefiniens);
    let rel = p.strip_prefix(&def_path)?;
    Some(occ.join(rel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{alpha_eq, parse};

    fn t(s: &str) -> Rc<Term> {
        parse(s).unwrap()
    }

    #[test]
    fn head_step_examples() {
        let s = head_step(&t("((\\z.\\x.x) w)(\\y.y)")).unwrap();
        assert!(alpha_eq(&s, &t("(\\x.x)(\\y.y)")));
        assert!(head_step(&t("\\y.y")).is_none());
        // Λ -> \y.Λ-shaped reduct
        let lam = t("(\\x.\\y.x x)(\\x.\\y.x x)");
        let s = head_step(&lam).unwrap();
        assert!(alpha_eq(&s, &t("\\y.(\\x.\\y.x x)(\\x.\\y.x x)")));
    }

    #[test]
    fn redex_enumeration() {
        let r = lhe_redexes(&t("(\\x.x x)(\\y.y)"));
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].rule, RuleName::Db);
        assert_eq!(r[0].site, Path::root());

        let r = lhe_redexes(&t("(x x)[x<-\\y.y]"));
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].rule, RuleName::Ls);
        assert_eq!(
            r[0].occurrence.as_ref().unwrap().steps(),
            &[Step::SubBody, Step::AppLeft]
        );

        // Only the inner ES is erasable while the outer definiens still
        // mentions x.
        let r = lhe_redexes(&t("(\\y.y)[y<-x][x<-\\y.y]"));
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].rule, RuleName::Gc);
        assert_eq!(r[0].site.steps(), &[Step::SubBody]);
    }

    #[test]
    fn ls_replaces_only_the_head_occurrence() {
        let before = t("(x x)[x<-\\y.y]");
        let r = lhe_redexes(&before);
        let after = lhe_step(&before, &r[0]).unwrap();
        assert!(alpha_eq(&after, &t("((\\y.y) x)[x<-\\y.y]")));

        let before = t("y[y<-x][x<-\\y.y]");
        let r = lhe_redexes(&before);
        assert_eq!(r[0].rule, RuleName::Ls);
        let after = lhe_step(&before, &r[0]).unwrap();
        assert!(alpha_eq(&after, &t("x[y<-x][x<-\\y.y]")));
    }

    #[test]
    fn db_moves_argument_under_the_substitution_context() {
        let before = t("(\\x.x x)(\\y.y)");
        let r = lhe_redexes(&before);
        let after = lhe_step(&before, &r[0]).unwrap();
        assert!(alpha_eq(&after, &t("(x x)[x<-\\y.y]")));

        // With a substitution context: S⟦\x.t⟧u -> S⟦t[x<-u]⟧.
        let before = t("(\\x.x)[a<-b] w");
        let r = lhe_redexes(&before);
        let after = lhe_step(&before, &r[0]).unwrap();
        assert!(alpha_eq(&after, &t("(x[x<-w])[a<-b]")));
    }

    #[test]
    fn db_renames_capturing_es_binders() {
        // The S-layer binds w, which is free in the argument.
        let before = t("(\\x.x w)[w<-a] w");
        let r = lhe_redexes(&before);
        let after = lhe_step(&before, &r[0]).unwrap();
        // Expected: ((x w')[x<-w])[w'<-a] for a fresh w'.
        let Term::Sub(inner, w2, d) = after.as_ref() else {
            panic!("expected outer ES, got {after}")
        };
        assert_ne!(w2, "w");
        assert!(alpha_eq(d, &t("a")));
        let Term::Sub(body, x, arg) = inner.as_ref() else {
            panic!("expected inner ES, got {inner}")
        };
        assert!(alpha_eq(arg, &t("w")));
        assert_eq!(
            body.as_ref(),
            &Term::App(Term::var(x), Term::var(w2)).clone()
        );
    }

    #[test]
    fn golden_sequence_to_identity() {
        let (out, steps) = lhe_normalize_traced(&t("(\\x.x x)(\\y.y)"), 100, true);
        let rules: Vec<&str> = steps.iter().map(|(r, _)| r.rule.tag()).collect();
        assert_eq!(rules, vec!["dB", "ls", "dB", "ls", "ls", "gc", "gc"]);
        match out {
            NormalizeOutcome::Normal(nf) => assert!(alpha_eq(&nf, &t("\\z.z"))),
            other => panic!("expected normal form, got {other:?}"),
        }
    }

    #[test]
    fn omega_exhausts_fuel() {
        let omega = t("(\\x.x x)(\\x.x x)");
        assert!(matches!(
            lhe_normalize(&omega, 200),
            NormalizeOutcome::FuelExhausted(_)
        ));
    }

    #[test]
    fn unfold_examples() {
        assert!(alpha_eq(
            &unfold(&t("(x x)[x<-\\y.y]")),
            &t("(\\y.y)(\\y.y)")
        ));
        assert!(alpha_eq(&unfold(&t("y[y<-x][x<-\\y.y]")), &t("\\y.y")));
        let pure = t("(\\x.x x)(\\y.y)");
        assert_eq!(unfold(&pure), pure);
    }

    #[test]
    fn spine_reading() {
        let s = spine(&t("\\x.\\y.x u1 u2")).unwrap();
        assert_eq!(s.binders, vec!["x".to_string(), "y".to_string()]);
        assert_eq!(s.head, HeadRef::Bound(0));
        assert_eq!(s.args, 2);

        // ES padding that binds an off-head variable is skipped.
        let s = spine(&t("\\x.(x a)[a<-w]")).unwrap();
        assert_eq!(s.head, HeadRef::Bound(0));
        assert_eq!(s.args, 1);

        assert!(spine(&t("(x x)[x<-\\y.y]")).is_none());
    }

    #[test]
    fn substitution_avoids_capture() {
        // (\y.x){x := y} must not capture the free y.
        let body = t("\\y.x");
        let out = substitute(&body, "x", &t("y"));
        let Term::Abs(y2, inner) = out.as_ref() else {
            panic!()
        };
        assert_ne!(y2, "y");
        assert_eq!(inner.as_ref(), &Term::Var("y".into()));
    }
}
