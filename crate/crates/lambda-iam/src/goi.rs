//! The stack-level view matching the proof-net formulation: exponential
//! signatures, boxes/balancing stacks, and the expansion of the variable
//! and backtracking macro-transitions into micro stack moves.
//!
//! A logged position encodes as a binary tree built from `□` by wrapping
//! one pair per crossed box (consuming the log, innermost entry first) and
//! one `l`/`r` leaf per contraction-tree choice. The contraction tree of a
//! binder is fixed as the right comb over its variable's occurrences in
//! left-to-right order; with that convention the boxes stack is the
//! pointwise encoding of the log and the balancing stack of the tape.
//!
//! The `var` transition corresponds to a dereliction step, `n` auxiliary
//! door steps and the contraction path; `bt2` to the reversed sequence;
//! `var2`/`var3` additionally move the folded signature onto/off the boxes
//! stack (entering the box at its main door). Every other transition is a
//! single stack move.

use std::fmt;
use std::rc::Rc;

use crate::machine::{
    transition_kind, LoggedPosition, State, TapeItem, TransitionKind,
};
use crate::syntax::{Name, Path, Step, Term};

/// Exponential signatures: binary trees with `□`, `l` or `r` leaves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExpSignature {
    Box_,
    Pair(Rc<ExpSignature>, Rc<ExpSignature>),
    Left(Rc<ExpSignature>),
    Right(Rc<ExpSignature>),
}

impl fmt::Display for ExpSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpSignature::Box_ => write!(f, "□"),
            ExpSignature::Pair(a, b) => write!(f, "⟨{a},{b}⟩"),
            ExpSignature::Left(a) => write!(f, "⟨l,{a}⟩"),
            ExpSignature::Right(a) => write!(f, "⟨r,{a}⟩"),
        }
    }
}

/// The balancing stack: markers and signatures, matching the tape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BalItem {
    Marker,
    Sig(ExpSignature),
}

impl fmt::Display for BalItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BalItem::Marker => write!(f, "p"),
            BalItem::Sig(s) => write!(f, "{s}"),
        }
    }
}

/// Head-first stacks.
pub type BoxesStack = Vec<ExpSignature>;
pub type BalancingStack = Vec<BalItem>;

pub fn display_stacks(stacks: &(BoxesStack, BalancingStack)) -> String {
    let b: Vec<String> = stacks.0.iter().map(|s| s.to_string()).collect();
    let s: Vec<String> = stacks.1.iter().map(|i| i.to_string()).collect();
    format!(
        "B = {} | S = {}",
        if b.is_empty() { "e".into() } else { b.join("·") },
        if s.is_empty() { "e".into() } else { s.join("·") }
    )
}

/// All occurrences of the variable bound by the binder at `binder_path`,
/// in left-to-right traversal order of its scope.
fn bound_occurrences(root: &Term, binder_path: &Path, name: &Name) -> Vec<Path> {
    fn walk(t: &Term, name: &str, here: &Path, out: &mut Vec<Path>) {
        match t {
            Term::Var(x) => {
                if x == name {
                    out.push(here.clone());
                }
            }
            Term::Abs(x, b) => {
                if x != name {
                    walk(b, name, &here.child(Step::AbsBody), out);
                }
            }
            Term::App(l, r) => {
                walk(l, name, &here.child(Step::AppLeft), out);
                walk(r, name, &here.child(Step::AppRight), out);
            }
            Term::Sub(b, x, d) => {
                if x != name {
                    walk(b, name, &here.child(Step::SubBody), out);
                }
                walk(d, name, &here.child(Step::SubDefiniens), out);
            }
        }
    }
    let binder = root.at(binder_path).expect("binder path resolves");
    let (scope, first) = match binder {
        Term::Abs(_, b) => (b.as_ref(), Step::AbsBody),
        Term::Sub(b, _, _) => (b.as_ref(), Step::SubBody),
        _ => panic!("binder path does not point at a binder"),
    };
    let mut out = Vec::new();
    walk(scope, name, &binder_path.child(first), &mut out);
    out
}

/// The contraction-tree address of one occurrence among `total`, as the
/// wraps applied leaf-to-root: in the right comb the i-th of k occurrences
/// wraps one `l` (unless it is the last) and then `i` times `r`.
fn comb_wraps(index: usize, total: usize) -> Vec<fn(Rc<ExpSignature>) -> ExpSignature> {
    let mut wraps: Vec<fn(Rc<ExpSignature>) -> ExpSignature> = Vec::new();
    if total <= 1 {
        return wraps;
    }
    if index + 1 < total {
        wraps.push(ExpSignature::Left);
        wraps.extend(std::iter::repeat(ExpSignature::Right as fn(_) -> _).take(index));
    } else {
        wraps.extend(std::iter::repeat(ExpSignature::Right as fn(_) -> _).take(total - 1));
    }
    wraps
}

/// Encodes a logged position: `□` for the dereliction, one pair per box
/// exit on the way from the occurrence to its binder (consuming the log,
/// innermost entry first), then the contraction-tree path.
pub fn encode_logged_position(root: &Term, lp: &LoggedPosition) -> ExpSignature {
    let rel = lp
        .occurrence
        .strip_prefix(&lp.binder)
        .expect("occurrence lies under its binder");
    let mut sig = ExpSignature::Box_;
    let mut entries = lp.log.iter();
    for step in rel.iter().rev() {
        if step.increments_level() {
            let entry = entries.next().expect("log length equals relative level");
            sig = ExpSignature::Pair(
                Rc::new(encode_logged_position(root, entry)),
                Rc::new(sig),
            );
        }
    }
    let occurrences = bound_occurrences(root, &lp.binder, &lp.name);
    let index = occurrences
        .iter()
        .position(|p| p == &lp.occurrence)
        .expect("occurrence is bound by the binder");
    for wrap in comb_wraps(index, occurrences.len()) {
        sig = wrap(Rc::new(sig));
    }
    sig
}

/// The boxes and balancing stacks of a state: the pointwise encoding of
/// its log and tape.
pub fn encode_state(s: &State) -> (BoxesStack, BalancingStack) {
    let boxes = s
        .log
        .iter()
        .map(|lp| encode_logged_position(&s.root, lp))
        .collect();
    let bal = s
        .tape
        .iter()
        .map(|item| match item {
            TapeItem::Marker => BalItem::Marker,
            TapeItem::Position(lp) => BalItem::Sig(encode_logged_position(&s.root, lp)),
        })
        .collect();
    (boxes, bal)
}

/// The micro stack trace of a `var` transition about to fire from `s`:
/// dereliction, one auxiliary-door step per box exit, then the contraction
/// path. The first snapshot is `encode_state(s)` and the last must equal
/// the encoding of the successor state.
pub fn micro_var_expand(s: &State) -> Option<Vec<(BoxesStack, BalancingStack)>> {
    if transition_kind(s) != Some(TransitionKind::Var) {
        return None;
    }
    let Term::Var(name) = s.subterm() else {
        return None;
    };
    let name = name.clone();
    // Reconstruct the binder the var transition will use.
    let steps = s.path.steps();
    let mut binder = None;
    for i in (0..steps.len()).rev() {
        let prefix = Path::from_steps(&steps[..i]);
        match (s.root.at(&prefix).unwrap(), steps[i]) {
            (Term::Abs(x, _), Step::AbsBody) if *x == name => {
                binder = Some(prefix);
                break;
            }
            (Term::Sub(_, x, _), Step::SubBody) if *x == name => return None,
            _ => {}
        }
    }
    let binder = binder?;

    let (mut boxes, mut bal) = encode_state(s);
    let mut trace = vec![(boxes.clone(), bal.clone())];

    // Dereliction.
    bal.insert(0, BalItem::Sig(ExpSignature::Box_));
    trace.push((boxes.clone(), bal.clone()));

    // Auxiliary doors: one per box exit between the occurrence and the
    // binder, consuming the boxes stack head.
    let rel = s.path.strip_prefix(&binder).unwrap();
    for step in rel.iter().rev() {
        if step.increments_level() {
            let entry = boxes.remove(0);
            let BalItem::Sig(top) = bal.remove(0) else {
                return None;
            };
            bal.insert(
                0,
                BalItem::Sig(ExpSignature::Pair(Rc::new(entry), Rc::new(top))),
            );
            trace.push((boxes.clone(), bal.clone()));
        }
    }

    // Contraction tree.
    let occurrences = bound_occurrences(&s.root, &binder, &name);
    let index = occurrences.iter().position(|p| p == &s.path)?;
    for wrap in comb_wraps(index, occurrences.len()) {
        let BalItem::Sig(top) = bal.remove(0) else {
            return None;
        };
        bal.insert(0, BalItem::Sig(wrap(Rc::new(top))));
        trace.push((boxes.clone(), bal.clone()));
    }
    Some(trace)
}

/// How one transition acts on the encoded stacks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StackAction {
    PushMarker,
    PopMarker,
    /// Signature moved from the balancing stack to the boxes stack.
    BalToBoxes,
    /// Signature moved from the boxes stack to the balancing stack.
    BoxesToBal,
    Identity,
    /// `var2`: `n` signatures folded off the boxes stack into one pushed
    /// back on it (dereliction, aux doors, contractions, then the main
    /// door of the definiens box).
    FoldOntoBoxes(usize),
    /// `var3`: the reverse unfolding.
    UnfoldFromBoxes(usize),
}

/// The stack action performed by each non-macro transition.
pub fn stack_action(s: &State, kind: TransitionKind) -> Option<StackAction> {
    Some(match kind {
        TransitionKind::Dot1 | TransitionKind::Dot4 => StackAction::PushMarker,
        TransitionKind::Dot2 | TransitionKind::Dot3 => StackAction::PopMarker,
        TransitionKind::Arg => StackAction::BalToBoxes,
        TransitionKind::Bt1 => StackAction::BoxesToBal,
        TransitionKind::Es | TransitionKind::Es2 => StackAction::Identity,
        TransitionKind::Var2 => {
            let Term::Var(name) = s.subterm() else {
                return None;
            };
            let steps = s.path.steps();
            let mut binder = None;
            for i in (0..steps.len()).rev() {
                let prefix = Path::from_steps(&steps[..i]);
                match (s.root.at(&prefix).unwrap(), steps[i]) {
                    (Term::Sub(_, x, _), Step::SubBody) if x == name => {
                        binder = Some(prefix);
                        break;
                    }
                    (Term::Abs(x, _), Step::AbsBody) if x == name => return None,
                    _ => {}
                }
            }
            StackAction::FoldOntoBoxes(s.path.level() - binder?.level())
        }
        TransitionKind::Var3 => {
            let lp = s.log.head()?;
            StackAction::UnfoldFromBoxes(lp.log.len())
        }
        TransitionKind::Var | TransitionKind::Bt2 => return None,
    })
}

fn apply_action(
    action: &StackAction,
    stacks: &(BoxesStack, BalancingStack),
    folded: Option<ExpSignature>,
) -> Option<(BoxesStack, BalancingStack)> {
    let (mut boxes, mut bal) = stacks.clone();
    match action {
        StackAction::PushMarker => bal.insert(0, BalItem::Marker),
        StackAction::PopMarker => {
            if bal.first() != Some(&BalItem::Marker) {
                return None;
            }
            bal.remove(0);
        }
        StackAction::BalToBoxes => match bal.first() {
            Some(BalItem::Sig(_)) => {
                let BalItem::Sig(sig) = bal.remove(0) else {
                    unreachable!()
                };
                boxes.insert(0, sig);
            }
            _ => return None,
        },
        StackAction::BoxesToBal => {
            if boxes.is_empty() {
                return None;
            }
            bal.insert(0, BalItem::Sig(boxes.remove(0)));
        }
        StackAction::Identity => {}
        StackAction::FoldOntoBoxes(n) => {
            if boxes.len() < *n {
                return None;
            }
            boxes.drain(0..*n);
            boxes.insert(0, folded?);
        }
        // var3 is checked against the folded entry's components directly.
        StackAction::UnfoldFromBoxes(_) => return None,
    }
    Some((boxes, bal))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoherenceFailure {
    pub index: usize,
    pub what: String,
}

/// Checks a whole trace: macro `var`/`bt2` transitions must expand to
/// micro sequences ending exactly at the successor's encoding, and every
/// other transition must act on the stacks as a single move.
pub fn check_run_coherence(trace: &[State]) -> Result<(), CoherenceFailure> {
    for (i, w) in trace.windows(2).enumerate() {
        let (s, next) = (&w[0], &w[1]);
        let fail = |what: String| {
            Err(CoherenceFailure {
                index: i,
                what,
            })
        };
        let Some(kind) = transition_kind(s) else {
            return fail("no transition from a non-final state".into());
        };
        let expected = encode_state(next);
        match kind {
            TransitionKind::Var => {
                let Some(micro) = micro_var_expand(s) else {
                    return fail("var expansion unavailable".into());
                };
                if micro.last() != Some(&expected) {
                    return fail(format!(
                        "var macro/micro mismatch: micro ends {} but successor encodes {}",
                        display_stacks(micro.last().unwrap()),
                        display_stacks(&expected)
                    ));
                }
            }
            TransitionKind::Bt2 => {
                // The reversed micro sequence of the dual var transition.
                let dual = next.flip();
                let Some(micro) = micro_var_expand(&dual) else {
                    return fail("bt2 dual expansion unavailable".into());
                };
                let back = encode_state(s);
                if micro.last() != Some(&back) || micro.first() != Some(&expected) {
                    return fail("bt2 macro/micro mismatch".into());
                }
            }
            other => {
                let Some(action) = stack_action(s, other) else {
                    return fail(format!("no stack action for {other:?}"));
                };
                let folded = match &action {
                    StackAction::FoldOntoBoxes(_) => {
                        // The folded signature is the new head of the log.
                        next.log.head().map(|lp| encode_logged_position(&next.root, lp))
                    }
                    _ => None,
                };
                match &action {
                    StackAction::UnfoldFromBoxes(_) => {
                        // var3 pops the folded entry and restores its
                        // components; check directly against the successor.
                        let before = encode_state(s);
                        let after = expected.clone();
                        let Some(lp) = s.log.head() else {
                            return fail("var3 without log head".into());
                        };
                        let folded_sig = encode_logged_position(&s.root, lp);
                        if before.0.first() != Some(&folded_sig) {
                            return fail("var3 head is not the folded signature".into());
                        }
                        // After: the folded entry's own encodings return to
                        // the boxes stack.
                        let mut rebuilt: BoxesStack = lp
                            .log
                            .iter()
                            .map(|e| encode_logged_position(&s.root, e))
                            .collect();
                        rebuilt.extend(before.0[1..].iter().cloned());
                        if after.0 != rebuilt || after.1 != before.1 {
                            return fail("var3 unfolding mismatch".into());
                        }
                    }
                    _ => {
                        let before = encode_state(s);
                        let Some(applied) = apply_action(&action, &before, folded) else {
                            return fail(format!("stack action {action:?} inapplicable"));
                        };
                        if applied != expected {
                            return fail(format!(
                                "{kind:?} acts as {} but successor encodes {}",
                                display_stacks(&applied),
                                display_stacks(&expected)
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{initial_state, run, Log};
    use crate::syntax::parse;

    fn t(s: &str) -> Rc<Term> {
        parse(s).unwrap()
    }

    #[test]
    fn linear_occurrence_encodes_to_box() {
        // In \x.x the single occurrence at level 0 encodes to □.
        let root = t("(\\x.x)(\\y.y)");
        let lp = LoggedPosition {
            name: "x".into(),
            binder: Path::from_steps(&[Step::AppLeft]),
            occurrence: Path::from_steps(&[Step::AppLeft, Step::AbsBody]),
            log: Log::new(),
        };
        assert_eq!(encode_logged_position(&root, &lp), ExpSignature::Box_);
    }

    #[test]
    fn second_occurrence_wraps_right() {
        // In the backtracking run over (\x.x x)(\y.y), the second
        // occurrence of x carries the y-entry in its log and sits right in
        // the two-occurrence comb: ⟨r,⟨□,□⟩⟩.
        let root = t("(\\x.x x)(\\y.y)");
        let ly = LoggedPosition {
            name: "y".into(),
            binder: Path::from_steps(&[Step::AppRight]),
            occurrence: Path::from_steps(&[Step::AppRight, Step::AbsBody]),
            log: Log::new(),
        };
        let lx2 = LoggedPosition {
            name: "x".into(),
            binder: Path::from_steps(&[Step::AppLeft]),
            occurrence: Path::from_steps(&[Step::AppLeft, Step::AbsBody, Step::AppRight]),
            log: Log::new().push(ly),
        };
        let sig = encode_logged_position(&root, &lx2);
        assert_eq!(
            sig,
            ExpSignature::Right(Rc::new(ExpSignature::Pair(
                Rc::new(ExpSignature::Box_),
                Rc::new(ExpSignature::Box_)
            )))
        );
        // And the first occurrence wraps left.
        let lx1 = LoggedPosition {
            name: "x".into(),
            binder: Path::from_steps(&[Step::AppLeft]),
            occurrence: Path::from_steps(&[Step::AppLeft, Step::AbsBody, Step::AppLeft]),
            log: Log::new(),
        };
        assert_eq!(
            encode_logged_position(&root, &lx1),
            ExpSignature::Left(Rc::new(ExpSignature::Box_))
        );
    }

    #[test]
    fn initial_state_encodes_to_markers() {
        let s = initial_state(t("(\\x.x x)(\\y.y)"), 2);
        let (boxes, bal) = encode_state(&s);
        assert!(boxes.is_empty());
        assert_eq!(bal, vec![BalItem::Marker, BalItem::Marker]);
    }

    #[test]
    fn worked_runs_are_coherent() {
        for (src, k) in [
            ("((\\z.\\x.x) w)(\\y.y)", 1),
            ("(\\x.x x)(\\y.y)", 0),
            ("(x x)[x<-\\y.y]", 0),
            ("(x x)[x<-\\y.y]", 1),
            ("(\\x.x x (\\w.w))(\\y.y y)", 2),
        ] {
            let r = run(t(src), k, 2000);
            assert!(
                check_run_coherence(&r.trace).is_ok(),
                "coherence on {src} at k={k}: {:?}",
                check_run_coherence(&r.trace)
            );
        }
    }

    #[test]
    fn encoding_injective_per_binder_on_small_runs() {
        use std::collections::HashMap;
        // The signature is the token value selecting an occurrence of one
        // variable: distinct logged positions of the same binder must get
        // distinct signatures. (Across binders □ repeats by design: every
        // linear level-0 occurrence encodes to □.)
        for src in ["(\\x.x x)(\\y.y)", "(\\x.x x (\\w.w))(\\y.y y)", "(x x)[x<-\\y.y]"] {
            let code = t(src);
            let mut seen: HashMap<(Path, String), LoggedPosition> = HashMap::new();
            for k in 0..3 {
                let r = run(code.clone(), k, 2000);
                for s in &r.trace {
                    let mut pending: Vec<LoggedPosition> = s.log.iter().cloned().collect();
                    pending.extend(s.tape.iter().filter_map(|i| match i {
                        TapeItem::Position(lp) => Some(lp.clone()),
                        TapeItem::Marker => None,
                    }));
                    while let Some(lp) = pending.pop() {
                        pending.extend(lp.log.iter().cloned());
                        let sig = encode_logged_position(&code, &lp).to_string();
                        let key = (lp.binder.clone(), sig.clone());
                        if let Some(prev) = seen.get(&key) {
                            assert_eq!(prev, &lp, "signature collision on {src}: {sig}");
                        } else {
                            seen.insert(key, lp);
                        }
                    }
                }
            }
        }
    }
}
