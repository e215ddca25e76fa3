//! Terms of the linear substitution calculus, occurrence paths, leveled
//! contexts and positions.
//!
//! Pure λ-terms are the fragment without explicit substitutions. A term is
//! immutable once built; during a machine run the current location in the
//! code is a [`Path`] into the fixed root term, and a [`Position`] is the
//! derived (subterm, leveled context) view. The level of a position counts
//! how many argument/definiens boundaries enclose it.

mod alpha;
mod parse;
mod print;

pub use alpha::{alpha_eq, alpha_eq_with_holes, canonical_key, free_vars, occurs_free};
pub use parse::{parse, ParseError};
pub use print::{display_context, display_term};

use std::fmt;
use std::rc::Rc;

pub type Name = String;

/// LSC terms: variables, abstractions, applications and explicit
/// substitutions. `Sub(t, x, u)` renders as `t[x<-u]` and binds `x` in `t`
/// but not in `u`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Name),
    Abs(Name, Rc<Term>),
    App(Rc<Term>, Rc<Term>),
    Sub(Rc<Term>, Name, Rc<Term>),
}

impl Term {
    pub fn var(name: &str) -> Rc<Term> {
        Rc::new(Term::Var(name.to_string()))
    }

    pub fn abs(name: &str, body: Rc<Term>) -> Rc<Term> {
        Rc::new(Term::Abs(name.to_string(), body))
    }

    pub fn app(left: Rc<Term>, right: Rc<Term>) -> Rc<Term> {
        Rc::new(Term::App(left, right))
    }

    pub fn sub(body: Rc<Term>, name: &str, definiens: Rc<Term>) -> Rc<Term> {
        Rc::new(Term::Sub(body, name.to_string(), definiens))
    }

    /// Number of constructors.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Abs(_, b) => 1 + b.size(),
            Term::App(l, r) => 1 + l.size() + r.size(),
            Term::Sub(b, _, d) => 1 + b.size() + d.size(),
        }
    }

    /// True when the term contains no explicit substitution.
    pub fn is_pure(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Abs(_, b) => b.is_pure(),
            Term::App(l, r) => l.is_pure() && r.is_pure(),
            Term::Sub(..) => false,
        }
    }

    /// Child reached by one step, if the step fits this constructor.
    pub fn child(&self, step: Step) -> Option<&Rc<Term>> {
        match (self, step) {
            (Term::Abs(_, b), Step::AbsBody) => Some(b),
            (Term::App(l, _), Step::AppLeft) => Some(l),
            (Term::App(_, r), Step::AppRight) => Some(r),
            (Term::Sub(b, _, _), Step::SubBody) => Some(b),
            (Term::Sub(_, _, d), Step::SubDefiniens) => Some(d),
            _ => None,
        }
    }

    /// Resolves a path to the subterm it denotes.
    pub fn at(&self, path: &Path) -> Result<&Term, PathError> {
        let mut cur = self;
        for (i, &step) in path.steps().iter().enumerate() {
            cur = cur
                .child(step)
                .ok_or(PathError { depth: i, step })?
                .as_ref();
        }
        Ok(cur)
    }

    /// Rebuilds the term with `filler` spliced in at `path`. No renaming
    /// happens: plugging captures free variables of the filler.
    pub fn replace_at(&self, path: &Path, filler: Rc<Term>) -> Result<Rc<Term>, PathError> {
        fn go(t: &Term, steps: &[Step], depth: usize, filler: Rc<Term>) -> Result<Rc<Term>, PathError> {
            let Some((&step, rest)) = steps.split_first() else {
                return Ok(filler);
            };
            let err = PathError { depth, step };
            Ok(match (t, step) {
                (Term::Abs(x, b), Step::AbsBody) => {
                    Rc::new(Term::Abs(x.clone(), go(b, rest, depth + 1, filler)?))
                }
                (Term::App(l, r), Step::AppLeft) => {
                    Rc::new(Term::App(go(l, rest, depth + 1, filler)?, r.clone()))
                }
                (Term::App(l, r), Step::AppRight) => {
                    Rc::new(Term::App(l.clone(), go(r, rest, depth + 1, filler)?))
                }
                (Term::Sub(b, x, d), Step::SubBody) => Rc::new(Term::Sub(
                    go(b, rest, depth + 1, filler)?,
                    x.clone(),
                    d.clone(),
                )),
                (Term::Sub(b, x, d), Step::SubDefiniens) => Rc::new(Term::Sub(
                    b.clone(),
                    x.clone(),
                    go(d, rest, depth + 1, filler)?,
                )),
                _ => return Err(err),
            })
        }
        go(self, path.steps(), 0, filler)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", display_term(self))
    }
}

/// One edge of an occurrence path.
///
/// `AppRight` and `SubDefiniens` are the level-incrementing steps: they
/// cross into an argument or a definiens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    AbsBody,
    AppLeft,
    AppRight,
    SubBody,
    SubDefiniens,
}

impl Step {
    pub fn increments_level(self) -> bool {
        matches!(self, Step::AppRight | Step::SubDefiniens)
    }

    /// Spine steps are the ones a head context may take.
    pub fn is_spine(self) -> bool {
        matches!(self, Step::AbsBody | Step::AppLeft | Step::SubBody)
    }

    pub fn tag(self) -> &'static str {
        match self {
            Step::AbsBody => "abs_body",
            Step::AppLeft => "app_left",
            Step::AppRight => "app_right",
            Step::SubBody => "sub_body",
            Step::SubDefiniens => "sub_def",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathError {
    pub depth: usize,
    pub step: Step,
}

impl fmt::Display for PathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unresolvable step {:?} at depth {}", self.step, self.depth)
    }
}

/// An occurrence in a term, as the list of steps from the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Path(Vec<Step>);

impl Path {
    pub fn root() -> Path {
        Path(Vec::new())
    }

    pub fn from_steps(steps: &[Step]) -> Path {
        Path(steps.to_vec())
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, step: Step) -> Path {
        let mut steps = self.0.clone();
        steps.push(step);
        Path(steps)
    }

    /// Splits off the innermost step.
    pub fn parent(&self) -> Option<(Path, Step)> {
        let (&last, init) = self.0.split_last()?;
        Some((Path(init.to_vec()), last))
    }

    pub fn last(&self) -> Option<Step> {
        self.0.last().copied()
    }

    /// Number of level-incrementing steps, i.e. the level of the context
    /// this path carves out.
    pub fn level(&self) -> usize {
        self.0.iter().filter(|s| s.increments_level()).count()
    }

    /// True when every step is a head-context step.
    pub fn is_spine(&self) -> bool {
        self.0.iter().all(|s| s.is_spine())
    }

    pub fn is_prefix_of(&self, other: &Path) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn strip_prefix(&self, prefix: &Path) -> Option<&[Step]> {
        if prefix.is_prefix_of(self) {
            Some(&self.0[prefix.len()..])
        } else {
            None
        }
    }

    pub fn join(&self, rest: &[Step]) -> Path {
        let mut steps = self.0.clone();
        steps.extend_from_slice(rest);
        Path(steps)
    }
}

/// A position: a path into an immutable root term, with the subterm and
/// leveled-context views derived on demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Position {
    root: Rc<Term>,
    path: Path,
}

impl Position {
    pub fn new(root: Rc<Term>, path: Path) -> Result<Position, PathError> {
        root.at(&path)?;
        Ok(Position { root, path })
    }

    pub fn root(&self) -> &Rc<Term> {
        &self.root
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn subterm(&self) -> &Term {
        self.root.at(&self.path).expect("path validated on construction")
    }

    pub fn level(&self) -> usize {
        self.path.level()
    }

    /// Plugs `filler` into the hole, potentially capturing its free
    /// variables.
    pub fn plug(&self, filler: Rc<Term>) -> Rc<Term> {
        self.root
            .replace_at(&self.path, filler)
            .expect("path validated on construction")
    }

    /// The unique `m`-outer position, for `1 <= m <= level`: the path is cut
    /// just after its `m`-th level-incrementing step counted from the root,
    /// so the result has level `m` and its subterm contains this one.
    pub fn outer(&self, m: usize) -> Option<Position> {
        if m == 0 || m > self.level() {
            return None;
        }
        let mut seen = 0;
        for (i, step) in self.path.steps().iter().enumerate() {
            if step.increments_level() {
                seen += 1;
                if seen == m {
                    return Some(Position {
                        root: self.root.clone(),
                        path: Path::from_steps(&self.path.steps()[..=i]),
                    });
                }
            }
        }
        None
    }
}

/// Resolves a path against a root term.
pub fn resolve(root: Rc<Term>, path: Path) -> Result<Position, PathError> {
    Position::new(root, path)
}

/// A substitution context `S ::= <> | S[x<-t]`, kept as a list of bindings
/// with the innermost one first.
#[derive(Debug, Clone, Default)]
pub struct SubstCtx(pub Vec<(Name, Rc<Term>)>);

impl SubstCtx {
    /// Wraps the bindings around `t`, innermost first.
    pub fn wrap(&self, t: Rc<Term>) -> Rc<Term> {
        let mut out = t;
        for (x, u) in &self.0 {
            out = Rc::new(Term::Sub(out, x.clone(), u.clone()));
        }
        out
    }

    /// Peels every outer explicit substitution off `t`.
    pub fn strip(mut t: &Rc<Term>) -> (&Rc<Term>, SubstCtx) {
        let mut bindings = Vec::new();
        while let Term::Sub(body, x, d) = t.as_ref() {
            bindings.push((x.clone(), d.clone()));
            t = body;
        }
        bindings.reverse();
        (t, SubstCtx(bindings))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega_half() -> Rc<Term> {
        // \x.x x
        Term::abs("x", Term::app(Term::var("x"), Term::var("x")))
    }

    #[test]
    fn resolve_examples() {
        // (\x.x x)(\y.y): occurrence of the second x sits at level 1 inside
        // the left abstraction's argument position.
        let t = Term::app(omega_half(), Term::abs("y", Term::var("y")));
        let p = Path::from_steps(&[Step::AppLeft, Step::AbsBody, Step::AppRight]);
        let pos = resolve(t.clone(), p).unwrap();
        assert_eq!(pos.subterm(), &Term::Var("x".into()));
        assert_eq!(pos.level(), 1);

        let root = resolve(t.clone(), Path::root()).unwrap();
        assert_eq!(root.subterm(), t.as_ref());
        assert_eq!(root.level(), 0);

        // (x x)[x<-\y.y]: the definiens has level 1.
        let es = Term::sub(
            Term::app(Term::var("x"), Term::var("x")),
            "x",
            Term::abs("y", Term::var("y")),
        );
        let pos = resolve(es, Path::from_steps(&[Step::SubDefiniens])).unwrap();
        assert_eq!(pos.level(), 1);
        assert!(alpha_eq(pos.subterm(), &Term::Abs("z".into(), Term::var("z"))));
    }

    #[test]
    fn plug_captures() {
        // plug(\x.<>, x) = \x.x
        let t = Term::abs("x", Term::var("placeholder"));
        let pos = resolve(t, Path::from_steps(&[Step::AbsBody])).unwrap();
        let plugged = pos.plug(Term::var("x"));
        assert_eq!(plugged.as_ref(), Term::abs("x", Term::var("x")).as_ref());
    }

    #[test]
    fn plug_subst_ctx() {
        let s = SubstCtx(vec![("x".into(), Term::var("w"))]);
        let wrapped = s.wrap(Term::var("r"));
        assert_eq!(wrapped.as_ref(), Term::sub(Term::var("r"), "x", Term::var("w")).as_ref());
    }

    #[test]
    fn outer_position_single_box() {
        // Root (\x.x x)(\y.y), occurrence of y inside \y.y has level 1;
        // its 1-outer position is the whole argument.
        let t = Term::app(omega_half(), Term::abs("y", Term::var("y")));
        let occ = Path::from_steps(&[Step::AppRight, Step::AbsBody]);
        let pos = resolve(t, occ).unwrap();
        let outer = pos.outer(1).unwrap();
        assert_eq!(outer.path(), &Path::from_steps(&[Step::AppRight]));
        assert_eq!(outer.level(), 1);
        assert!(alpha_eq(outer.subterm(), &Term::Abs("w".into(), Term::var("w"))));
        assert!(pos.outer(2).is_none());
        assert!(pos.outer(0).is_none());
    }
}
