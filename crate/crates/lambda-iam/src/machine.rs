//! The token machine: states, the twelve transitions, runs and the
//! depth-indexed semantics.
//!
//! A state is a quintuple (code term, code context, log, tape, direction).
//! The code never changes during a run; the position is a path into the
//! immutable root, the log records one entry per enclosing argument or
//! definiens box, and the tape carries `p` markers and logged positions.
//! Down states query the head variable of the current subterm, up states
//! search the surrounding context for the argument of a found variable.
//!
//! Eight transitions deal with pure terms and four more with explicit
//! substitutions. Every transition is reversible: flipping the direction,
//! stepping and flipping again walks a run backwards.

use std::fmt;
use std::rc::Rc;

use serde::Serialize;

use crate::stack::Stack;
use crate::syntax::{display_context, display_term, Name, Path, Step, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Down,
    Up,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Down => Direction::Up,
            Direction::Up => Direction::Down,
        }
    }

    /// `d` flipped `n` times.
    pub fn flip_n(self, n: usize) -> Direction {
        if n % 2 == 0 {
            self
        } else {
            self.flip()
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Down => "down",
            Direction::Up => "up",
        })
    }
}

/// A position bundled with the log that was current when it was recorded:
/// enough information to backtrack to it. `binder` is the abstraction or
/// explicit substitution that binds the occurrence at `occurrence`, and the
/// log length equals the level of the occurrence relative to the binder.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LoggedPosition {
    pub name: Name,
    pub binder: Path,
    pub occurrence: Path,
    pub log: Log,
}

pub type Log = Stack<LoggedPosition>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TapeItem {
    Marker,
    Position(LoggedPosition),
}

pub type Tape = Stack<TapeItem>;

/// Number of logged positions on a tape, written |T|e: together with the
/// balance invariant it determines the direction of reachable states.
pub fn tape_positions(tape: &Tape) -> usize {
    tape.iter()
        .filter(|item| matches!(item, TapeItem::Position(_)))
        .count()
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct State {
    pub root: Rc<Term>,
    pub path: Path,
    pub log: Log,
    pub tape: Tape,
    pub dir: Direction,
}

impl State {
    pub fn subterm(&self) -> &Term {
        self.root.at(&self.path).expect("state path resolves in code")
    }

    pub fn level(&self) -> usize {
        self.path.level()
    }

    pub fn flip(&self) -> State {
        let mut s = self.clone();
        s.dir = s.dir.flip();
        s
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} | {} | log {:?} | tape {:?} | {}",
            display_term(self.subterm()),
            display_context(&self.root, &self.path),
            self.log,
            self.tape,
            self.dir
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FinalClass {
    /// A down state on an abstraction with an empty tape: the head normal
    /// form has more head abstractions than the depth allows to inspect.
    Failure,
    /// A down state on a free variable with `args` markers on the tape.
    OpenSuccess { name: Name, args: usize },
    /// An up state at the root with tape `p^binder · pos · p^args`.
    BoundSuccess { binder: usize, args: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Next(State),
    Final(FinalClass),
    /// A pattern that reachable states never exhibit: a mismatched logged
    /// position at a backtracking transition, a log shorter than the level,
    /// or a state outside the final-state classification. Signals an
    /// implementation bug, never a user error.
    Violation(String),
}

/// The initial state of code `t` and depth `k`: root position, empty log,
/// `k` markers on the tape, direction down.
pub fn initial_state(t: Rc<Term>, k: usize) -> State {
    let mut tape = Tape::new();
    for _ in 0..k {
        tape = tape.push(TapeItem::Marker);
    }
    State {
        root: t,
        path: Path::root(),
        log: Log::new(),
        tape,
        dir: Direction::Down,
    }
}

/// What binds an occurrence: the nearest enclosing abstraction or ES whose
/// bound name matches, skipping definiens edges (an ES does not bind in its
/// definiens).
enum Binder {
    Lambda(Path),
    EsNode(Path),
    Free,
}

fn binder_of(root: &Term, occ: &Path, name: &str) -> Binder {
    let steps = occ.steps();
    for i in (0..steps.len()).rev() {
        let prefix = Path::from_steps(&steps[..i]);
        let node = root.at(&prefix).expect("prefix of a valid path");
        match (node, steps[i]) {
            (Term::Abs(x, _), Step::AbsBody) if x == name => return Binder::Lambda(prefix),
            (Term::Sub(_, x, _), Step::SubBody) if x == name => return Binder::EsNode(prefix),
            _ => {}
        }
    }
    Binder::Free
}

/// Checks that a logged position is coherent with the code: the binder
/// exists, the occurrence is a matching variable bound by it, and the inner
/// log is as long as the relative level.
pub fn logged_position_coherent(root: &Term, lp: &LoggedPosition) -> bool {
    let Ok(binder) = root.at(&lp.binder) else {
        return false;
    };
    let first = match binder {
        Term::Abs(x, _) if *x == lp.name => Step::AbsBody,
        Term::Sub(_, x, _) if *x == lp.name => Step::SubBody,
        _ => return false,
    };
    let Some(rel) = lp.occurrence.strip_prefix(&lp.binder) else {
        return false;
    };
    if rel.first() != Some(&first) {
        return false;
    }
    if !matches!(root.at(&lp.occurrence), Ok(Term::Var(x)) if *x == lp.name) {
        return false;
    }
    let matching = match binder_of(root, &lp.occurrence, &lp.name) {
        Binder::Lambda(p) | Binder::EsNode(p) => p == lp.binder,
        Binder::Free => false,
    };
    matching && lp.log.len() == lp.occurrence.level() - lp.binder.level()
}

/// One machine transition, or the classification of a final state.
pub fn step(s: &State) -> StepResult {
    match s.dir {
        Direction::Down => step_down(s),
        Direction::Up => step_up(s),
    }
}

fn step_down(s: &State) -> StepResult {
    match s.subterm() {
        // •1: skip the argument, record it with a marker.
        Term::App(..) => StepResult::Next(State {
            path: s.path.child(Step::AppLeft),
            tape: s.tape.push(TapeItem::Marker),
            ..s.clone()
        }),
        // es: search goes through ES bodies untouched.
        Term::Sub(..) => StepResult::Next(State {
            path: s.path.child(Step::SubBody),
            ..s.clone()
        }),
        Term::Abs(..) => match s.tape.pop() {
            None => StepResult::Final(FinalClass::Failure),
            // •2: a marker lets the machine enter one abstraction.
            Some((TapeItem::Marker, tape)) => StepResult::Next(State {
                path: s.path.child(Step::AbsBody),
                tape,
                ..s.clone()
            }),
            // bt2: backtracking ends on the abstraction the logged
            // position is relative to; jump to the recorded occurrence.
            Some((TapeItem::Position(lp), tape)) => {
                if lp.binder != s.path {
                    return StepResult::Violation(format!(
                        "bt2: tape position bound at {:?} does not match abstraction at {:?}",
                        lp.binder, s.path
                    ));
                }
                if !logged_position_coherent(&s.root, &lp) {
                    return StepResult::Violation("bt2: incoherent logged position".into());
                }
                StepResult::Next(State {
                    root: s.root.clone(),
                    path: lp.occurrence.clone(),
                    log: lp.log.concat(&s.log),
                    tape,
                    dir: Direction::Up,
                })
            }
        },
        Term::Var(name) => {
            let name = name.clone();
            match binder_of(&s.root, &s.path, &name) {
                // var: move to the binder and record the occurrence on the
                // tape, packaging the first n log entries.
                Binder::Lambda(binder) => {
                    let n = s.path.level() - binder.level();
                    let Some((taken, log)) = s.log.split(n) else {
                        return StepResult::Violation(format!(
                            "var: log of length {} shorter than level {}",
                            s.log.len(),
                            n
                        ));
                    };
                    let lp = LoggedPosition {
                        name,
                        binder: binder.clone(),
                        occurrence: s.path.clone(),
                        log: Stack::from_top_down(taken),
                    };
                    StepResult::Next(State {
                        root: s.root.clone(),
                        path: binder,
                        log,
                        tape: s.tape.push(TapeItem::Position(lp)),
                        dir: Direction::Up,
                    })
                }
                // var2: the argument is already at hand in the ES; move to
                // the definiens and push the logged position on the log.
                Binder::EsNode(binder) => {
                    let n = s.path.level() - binder.level();
                    let Some((taken, log)) = s.log.split(n) else {
                        return StepResult::Violation(format!(
                            "var2: log of length {} shorter than level {}",
                            s.log.len(),
                            n
                        ));
                    };
                    let lp = LoggedPosition {
                        name,
                        binder: binder.clone(),
                        occurrence: s.path.clone(),
                        log: Stack::from_top_down(taken),
                    };
                    StepResult::Next(State {
                        root: s.root.clone(),
                        path: binder.child(Step::SubDefiniens),
                        log: log.push(lp),
                        tape: s.tape.clone(),
                        dir: Direction::Down,
                    })
                }
                Binder::Free => {
                    if s.tape.iter().all(|i| matches!(i, TapeItem::Marker)) {
                        StepResult::Final(FinalClass::OpenSuccess {
                            name,
                            args: s.tape.len(),
                        })
                    } else {
                        StepResult::Violation(
                            "down state on a free variable with a logged position on the tape"
                                .into(),
                        )
                    }
                }
            }
        }
    }
}

fn step_up(s: &State) -> StepResult {
    let Some((parent, last)) = s.path.parent() else {
        // Up at the root: the answer, if any, is on the tape.
        return classify_root_up(s);
    };
    match last {
        Step::AppLeft => match s.tape.pop() {
            // •3: climb out of the left of an application.
            Some((TapeItem::Marker, tape)) => StepResult::Next(State {
                path: parent,
                tape,
                ..s.clone()
            }),
            // arg: the argument the query was looking for; enter it and
            // move the logged position from the tape to the log.
            Some((TapeItem::Position(lp), tape)) => StepResult::Next(State {
                root: s.root.clone(),
                path: parent.child(Step::AppRight),
                log: s.log.push(lp.clone()),
                tape,
                dir: Direction::Down,
            }),
            None => StepResult::Violation("up state left of an application with empty tape".into()),
        },
        // •4: climb out of an abstraction, recording it with a marker.
        Step::AbsBody => StepResult::Next(State {
            path: parent,
            tape: s.tape.push(TapeItem::Marker),
            ..s.clone()
        }),
        // bt1: no argument at this level; backtrack towards the variable
        // occurrence recorded in the head of the log.
        Step::AppRight => match s.log.pop() {
            Some((lp, log)) => StepResult::Next(State {
                root: s.root.clone(),
                path: parent.child(Step::AppLeft),
                log,
                tape: s.tape.push(TapeItem::Position(lp.clone())),
                dir: Direction::Down,
            }),
            None => StepResult::Violation("up state right of an application with empty log".into()),
        },
        // es2: climb out of an ES body.
        Step::SubBody => StepResult::Next(State {
            path: parent,
            ..s.clone()
        }),
        // var3: the subterm has no arguments left here; resume the search
        // from the variable occurrence the ES was entered from.
        Step::SubDefiniens => match s.log.pop() {
            Some((lp, log)) => {
                if lp.binder != parent {
                    return StepResult::Violation(format!(
                        "var3: log position bound at {:?} does not match ES at {:?}",
                        lp.binder, parent
                    ));
                }
                if !logged_position_coherent(&s.root, &lp) {
                    return StepResult::Violation("var3: incoherent logged position".into());
                }
                StepResult::Next(State {
                    root: s.root.clone(),
                    path: lp.occurrence.clone(),
                    log: lp.log.concat(&log),
                    tape: s.tape.clone(),
                    dir: Direction::Up,
                })
            }
            None => StepResult::Violation("up state in a definiens with empty log".into()),
        },
    }
}

fn classify_root_up(s: &State) -> StepResult {
    if !s.log.is_empty() {
        return StepResult::Violation("up state at the root with non-empty log".into());
    }
    let items: Vec<&TapeItem> = s.tape.iter().collect();
    let positions: Vec<usize> = items
        .iter()
        .enumerate()
        .filter(|(_, i)| matches!(i, TapeItem::Position(_)))
        .map(|(idx, _)| idx)
        .collect();
    if positions.len() != 1 {
        return StepResult::Violation(format!(
            "up state at the root with {} logged positions on the tape",
            positions.len()
        ));
    }
    let at = positions[0];
    StepResult::Final(FinalClass::BoundSuccess {
        binder: at,
        args: items.len() - at - 1,
    })
}

/// The twelve transition names: eight on pure terms, four for explicit
/// substitutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionKind {
    Dot1,
    Dot2,
    Var,
    Bt2,
    Dot3,
    Dot4,
    Arg,
    Bt1,
    Es,
    Var2,
    Es2,
    Var3,
}

/// Which transition `step` would take from `s`, or `None` when `s` is
/// final (or stuck on a violation).
pub fn transition_kind(s: &State) -> Option<TransitionKind> {
    match s.dir {
        Direction::Down => match s.subterm() {
            Term::App(..) => Some(TransitionKind::Dot1),
            Term::Sub(..) => Some(TransitionKind::Es),
            Term::Abs(..) => match s.tape.head() {
                Some(TapeItem::Marker) => Some(TransitionKind::Dot2),
                Some(TapeItem::Position(lp))
                    if lp.binder == s.path && logged_position_coherent(&s.root, lp) =>
                {
                    Some(TransitionKind::Bt2)
                }
                _ => None,
            },
            Term::Var(x) => match binder_of(&s.root, &s.path, x) {
                Binder::Lambda(b) if s.log.len() >= s.path.level() - b.level() => {
                    Some(TransitionKind::Var)
                }
                Binder::EsNode(b) if s.log.len() >= s.path.level() - b.level() => {
                    Some(TransitionKind::Var2)
                }
                _ => None,
            },
        },
        Direction::Up => match s.path.last() {
            None => None,
            Some(Step::AppLeft) => match s.tape.head() {
                Some(TapeItem::Marker) => Some(TransitionKind::Dot3),
                Some(TapeItem::Position(_)) => Some(TransitionKind::Arg),
                None => None,
            },
            Some(Step::AbsBody) => Some(TransitionKind::Dot4),
            Some(Step::AppRight) => s.log.head().map(|_| TransitionKind::Bt1),
            Some(Step::SubBody) => Some(TransitionKind::Es2),
            Some(Step::SubDefiniens) => match (s.path.parent(), s.log.head()) {
                (Some((parent, _)), Some(lp))
                    if lp.binder == parent && logged_position_coherent(&s.root, lp) =>
                {
                    Some(TransitionKind::Var3)
                }
                _ => None,
            },
        },
    }
}

/// The unique predecessor, when one exists: flip the direction, step, flip
/// again.
pub fn step_backward(s: &State) -> Option<State> {
    match step(&s.flip()) {
        StepResult::Next(prev) => Some(prev.flip()),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Final(FinalClass),
    Violation(String),
    FuelExhausted,
}

pub struct Run {
    /// Every visited state, the initial one included.
    pub trace: Vec<State>,
    pub outcome: RunOutcome,
}

impl Run {
    /// Number of transitions taken.
    pub fn length(&self) -> usize {
        self.trace.len() - 1
    }
}

/// Iterates `step` from the initial state of depth `k`, keeping the whole
/// trace.
pub fn run(t: Rc<Term>, k: usize, fuel: usize) -> Run {
    let mut trace = vec![initial_state(t, k)];
    loop {
        if trace.len() > fuel {
            return Run {
                trace,
                outcome: RunOutcome::FuelExhausted,
            };
        }
        match step(trace.last().unwrap()) {
            StepResult::Next(next) => trace.push(next),
            StepResult::Final(class) => {
                return Run {
                    trace,
                    outcome: RunOutcome::Final(class),
                }
            }
            StepResult::Violation(msg) => {
                return Run {
                    trace,
                    outcome: RunOutcome::Violation(msg),
                }
            }
        }
    }
}

/// Streaming variant of [`run`]: keeps only the current state.
pub fn run_outcome(t: Rc<Term>, k: usize, fuel: usize) -> (RunOutcome, usize) {
    let mut state = initial_state(t, k);
    let mut steps = 0;
    loop {
        if steps >= fuel {
            return (RunOutcome::FuelExhausted, steps);
        }
        match step(&state) {
            StepResult::Next(next) => {
                state = next;
                steps += 1;
            }
            StepResult::Final(class) => return (RunOutcome::Final(class), steps),
            StepResult::Violation(msg) => return (RunOutcome::Violation(msg), steps),
        }
    }
}

/// Run length |t|_k, or `None` when the fuel runs out (the finite
/// approximation of a diverging run).
pub fn run_length(t: Rc<Term>, k: usize, fuel: usize) -> Option<usize> {
    match run_outcome(t, k, fuel) {
        (RunOutcome::Final(_), n) => Some(n),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemanticsOutcome {
    /// Bound success ⟨h, j⟩: the head variable is the h-th abstraction of
    /// the head normal form and has j arguments.
    Pair(usize, usize),
    /// Open success ⟨x, h⟩: the head variable is free.
    OpenPair(Name, usize),
    /// Failure ⇓: more head abstractions than the depth allows.
    HasAbs,
    /// The fuel bound was hit: the finite stand-in for ⊥.
    Timeout,
}

impl fmt::Display for SemanticsOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemanticsOutcome::Pair(h, j) => write!(f, "pair {h} {j}"),
            SemanticsOutcome::OpenPair(x, h) => write!(f, "open {x} {h}"),
            SemanticsOutcome::HasAbs => write!(f, "hasabs"),
            SemanticsOutcome::Timeout => write!(f, "bottom (timeout)"),
        }
    }
}

/// The depth-k semantics of `t`, classified from the final state of the
/// run. A `Violation` is surfaced as an error: it can only mean a bug.
pub fn semantics(t: Rc<Term>, k: usize, fuel: usize) -> Result<SemanticsOutcome, String> {
    match run_outcome(t, k, fuel).0 {
        RunOutcome::Final(FinalClass::BoundSuccess { binder, args }) => {
            Ok(SemanticsOutcome::Pair(binder, args))
        }
        RunOutcome::Final(FinalClass::OpenSuccess { name, args }) => {
            Ok(SemanticsOutcome::OpenPair(name, args))
        }
        RunOutcome::Final(FinalClass::Failure) => Ok(SemanticsOutcome::HasAbs),
        RunOutcome::FuelExhausted => Ok(SemanticsOutcome::Timeout),
        RunOutcome::Violation(msg) => Err(msg),
    }
}

#[derive(Serialize)]
struct LoggedPositionRecord {
    var: String,
    binder_path: Vec<&'static str>,
    occ_path: Vec<&'static str>,
    log: Vec<LoggedPositionRecord>,
}

fn lp_record(lp: &LoggedPosition) -> LoggedPositionRecord {
    LoggedPositionRecord {
        var: lp.name.clone(),
        binder_path: lp.binder.steps().iter().map(|s| s.tag()).collect(),
        occ_path: lp.occurrence.steps().iter().map(|s| s.tag()).collect(),
        log: lp.log.iter().map(lp_record).collect(),
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum TapeRecord {
    Marker(&'static str),
    Position(LoggedPositionRecord),
}

#[derive(Serialize)]
struct TraceRecord {
    i: usize,
    dir: String,
    sub: String,
    path: Vec<&'static str>,
    log: Vec<LoggedPositionRecord>,
    tape: Vec<TapeRecord>,
}

/// The JSON-lines record of the `i`-th state of a trace.
pub fn trace_record_json(i: usize, s: &State) -> String {
    let record = TraceRecord {
        i,
        dir: s.dir.to_string(),
        sub: display_term(s.subterm()),
        path: s.path.steps().iter().map(|st| st.tag()).collect(),
        log: s.log.iter().map(lp_record).collect(),
        tape: s
            .tape
            .iter()
            .map(|item| match item {
                TapeItem::Marker => TapeRecord::Marker("p"),
                TapeItem::Position(lp) => TapeRecord::Position(lp_record(lp)),
            })
            .collect(),
    };
    serde_json::to_string(&record).expect("trace records serialize")
}

/// Text rendering of one state, mirroring the five-column run tables.
pub fn trace_row(s: &State) -> String {
    let log: Vec<String> = s.log.iter().map(|lp| display_logged(&s.root, lp)).collect();
    let tape: Vec<String> = s
        .tape
        .iter()
        .map(|item| match item {
            TapeItem::Marker => "p".to_string(),
            TapeItem::Position(lp) => display_logged(&s.root, lp),
        })
        .collect();
    format!(
        "{} | {} | {} | {} | {}",
        display_term(s.subterm()),
        display_context(&s.root, &s.path),
        if log.is_empty() { "e".to_string() } else { log.join("·") },
        if tape.is_empty() { "e".to_string() } else { tape.join("·") },
        s.dir,
    )
}

/// Renders a logged position as `(x, binder-relative context, log)`, the
/// way run tables print them.
pub fn display_logged(root: &Term, lp: &LoggedPosition) -> String {
    let log: Vec<String> = lp.log.iter().map(|inner| display_logged(root, inner)).collect();
    let ctx = match (root.at(&lp.binder), lp.occurrence.strip_prefix(&lp.binder)) {
        (Ok(binder_term), Some(rel)) => display_context(binder_term, &Path::from_steps(rel)),
        _ => "<dangling>".to_string(),
    };
    format!(
        "({}, {}, {})",
        lp.name,
        ctx,
        if log.is_empty() { "e".to_string() } else { log.join("·") }
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn t(s: &str) -> Rc<Term> {
        parse(s).unwrap()
    }

    fn path(steps: &[Step]) -> Path {
        Path::from_steps(steps)
    }

    use Step::{AbsBody as B, AppLeft as L, AppRight as R};

    #[test]
    fn initial_states() {
        let s = initial_state(t("((\\z.\\x.x) w)(\\y.y)"), 1);
        assert_eq!(s.path, Path::root());
        assert!(s.log.is_empty());
        assert_eq!(s.tape.len(), 1);
        assert_eq!(s.dir, Direction::Down);

        let s = initial_state(t("x"), 5);
        assert_eq!(s.tape.len(), 5);
        assert!(s.tape.iter().all(|i| matches!(i, TapeItem::Marker)));
    }

    /// The full backtracking run of (\x.x x)(\y.y) at depth 0: twelve
    /// transitions ending in Failure.
    #[test]
    fn golden_backtracking_trace() {
        let code = t("(\\x.x x)(\\y.y)");
        let run = run(code.clone(), 0, 100);
        assert_eq!(run.length(), 12);
        assert_eq!(run.outcome, RunOutcome::Final(FinalClass::Failure));

        let lx = LoggedPosition {
            name: "x".into(),
            binder: path(&[L]),
            occurrence: path(&[L, B, L]),
            log: Log::new(),
        };
        let ly = LoggedPosition {
            name: "y".into(),
            binder: path(&[R]),
            occurrence: path(&[R, B]),
            log: Log::new(),
        };
        let lx2 = LoggedPosition {
            name: "x".into(),
            binder: path(&[L]),
            occurrence: path(&[L, B, R]),
            log: Log::new().push(ly.clone()),
        };

        let expect: Vec<(Vec<Step>, Vec<LoggedPosition>, Vec<TapeItem>, Direction)> = vec![
            (vec![], vec![], vec![], Direction::Down),
            (vec![L], vec![], vec![TapeItem::Marker], Direction::Down),
            (vec![L, B], vec![], vec![], Direction::Down),
            (vec![L, B, L], vec![], vec![TapeItem::Marker], Direction::Down),
            (
                vec![L],
                vec![],
                vec![TapeItem::Position(lx.clone()), TapeItem::Marker],
                Direction::Up,
            ),
            (vec![R], vec![lx.clone()], vec![TapeItem::Marker], Direction::Down),
            (vec![R, B], vec![lx.clone()], vec![], Direction::Down),
            (
                vec![R],
                vec![lx.clone()],
                vec![TapeItem::Position(ly.clone())],
                Direction::Up,
            ),
            (
                vec![L],
                vec![],
                vec![TapeItem::Position(lx.clone()), TapeItem::Position(ly.clone())],
                Direction::Down,
            ),
            (vec![L, B, L], vec![], vec![TapeItem::Position(ly.clone())], Direction::Up),
            (vec![L, B, R], vec![ly.clone()], vec![], Direction::Down),
            (vec![L], vec![], vec![TapeItem::Position(lx2.clone())], Direction::Up),
            (vec![R], vec![lx2.clone()], vec![], Direction::Down),
        ];
        assert_eq!(run.trace.len(), expect.len());
        for (i, (steps, log, tape, dir)) in expect.iter().enumerate() {
            let s = &run.trace[i];
            assert_eq!(s.path, path(steps), "path at state {i}");
            assert_eq!(
                s.log.iter().cloned().collect::<Vec<_>>(),
                *log,
                "log at state {i}"
            );
            assert_eq!(
                s.tape.iter().cloned().collect::<Vec<_>>(),
                *tape,
                "tape at state {i}"
            );
            assert_eq!(s.dir, *dir, "direction at state {i}");
        }
    }

    /// The depth-1 run of ((\z.\x.x) w)(\y.y): the head variable of the
    /// normal form \y.y is found and reported as ⟨0,0⟩.
    #[test]
    fn golden_depth_one_trace() {
        let code = t("((\\z.\\x.x) w)(\\y.y)");
        let r = run(code.clone(), 1, 100);
        assert_eq!(r.length(), 18);
        assert_eq!(
            r.outcome,
            RunOutcome::Final(FinalClass::BoundSuccess { binder: 0, args: 0 })
        );

        let lx = LoggedPosition {
            name: "x".into(),
            binder: path(&[L, L, B]),
            occurrence: path(&[L, L, B, B]),
            log: Log::new(),
        };
        let ly = LoggedPosition {
            name: "y".into(),
            binder: path(&[R]),
            occurrence: path(&[R, B]),
            log: Log::new(),
        };
        let p = TapeItem::Marker;
        let px = TapeItem::Position(lx.clone());
        let py = TapeItem::Position(ly.clone());

        let expect: Vec<(Vec<Step>, Vec<LoggedPosition>, Vec<TapeItem>, Direction)> = vec![
            (vec![], vec![], vec![p.clone()], Direction::Down),
            (vec![L], vec![], vec![p.clone(); 2], Direction::Down),
            (vec![L, L], vec![], vec![p.clone(); 3], Direction::Down),
            (vec![L, L, B], vec![], vec![p.clone(); 2], Direction::Down),
            (vec![L, L, B, B], vec![], vec![p.clone()], Direction::Down),
            (vec![L, L, B], vec![], vec![px.clone(), p.clone()], Direction::Up),
            (
                vec![L, L],
                vec![],
                vec![p.clone(), px.clone(), p.clone()],
                Direction::Up,
            ),
            (vec![L], vec![], vec![px.clone(), p.clone()], Direction::Up),
            (vec![R], vec![lx.clone()], vec![p.clone()], Direction::Down),
            (vec![R, B], vec![lx.clone()], vec![], Direction::Down),
            (vec![R], vec![lx.clone()], vec![py.clone()], Direction::Up),
            (vec![L], vec![], vec![px.clone(), py.clone()], Direction::Down),
            (
                vec![L, L],
                vec![],
                vec![p.clone(), px.clone(), py.clone()],
                Direction::Down,
            ),
            (vec![L, L, B], vec![], vec![px.clone(), py.clone()], Direction::Down),
            (vec![L, L, B, B], vec![], vec![py.clone()], Direction::Up),
            (vec![L, L, B], vec![], vec![p.clone(), py.clone()], Direction::Up),
            (
                vec![L, L],
                vec![],
                vec![p.clone(), p.clone(), py.clone()],
                Direction::Up,
            ),
            (vec![L], vec![], vec![p.clone(), py.clone()], Direction::Up),
            (vec![], vec![], vec![py.clone()], Direction::Up),
        ];
        assert_eq!(r.trace.len(), expect.len());
        for (i, (steps, log, tape, dir)) in expect.iter().enumerate() {
            let s = &r.trace[i];
            assert_eq!(s.path, path(steps), "path at state {i}");
            assert_eq!(s.log.iter().cloned().collect::<Vec<_>>(), *log, "log at {i}");
            assert_eq!(s.tape.iter().cloned().collect::<Vec<_>>(), *tape, "tape at {i}");
            assert_eq!(s.dir, *dir, "direction at state {i}");
        }
    }

    #[test]
    fn semantics_examples() {
        assert_eq!(
            semantics(t("((\\z.\\x.x) w)(\\y.y)"), 1, 100).unwrap(),
            SemanticsOutcome::Pair(0, 0)
        );
        assert_eq!(
            semantics(t("(\\x.x x)(\\y.y)"), 0, 100).unwrap(),
            SemanticsOutcome::HasAbs
        );
        // Ω diverges at every depth.
        for k in 0..4 {
            assert_eq!(
                semantics(t("(\\x.x x)(\\x.x x)"), k, 2000).unwrap(),
                SemanticsOutcome::Timeout
            );
        }
        // Λ has ever more head abstractions: the machine always stops on ⇓.
        for k in 0..9 {
            assert_eq!(
                semantics(t("(\\x.\\y.x x)(\\x.\\y.x x)"), k, 100_000).unwrap(),
                SemanticsOutcome::HasAbs,
                "Λ at depth {k}"
            );
        }
    }

    #[test]
    fn run_length_examples() {
        assert_eq!(run_length(t("(\\x.x x)(\\y.y)"), 0, 100), Some(12));
        assert_eq!(run_length(t("\\x.x"), 0, 100), Some(0));
        assert_eq!(run_length(t("(\\x.x x)(\\x.x x)"), 0, 500), None);
    }

    #[test]
    fn open_success_counts_markers() {
        assert_eq!(
            semantics(t("x"), 5, 10).unwrap(),
            SemanticsOutcome::OpenPair("x".into(), 5)
        );
        assert_eq!(
            semantics(t("x u1 u2"), 0, 10).unwrap(),
            SemanticsOutcome::OpenPair("x".into(), 2)
        );
    }

    #[test]
    fn backward_roundtrip_along_traces() {
        for (src, k) in [
            ("(\\x.x x)(\\y.y)", 0),
            ("((\\z.\\x.x) w)(\\y.y)", 1),
            ("(x x)[x<-\\y.y]", 0),
            ("(\\x.x x)(\\y.y y)", 2),
        ] {
            let r = run(t(src), k, 300);
            for w in r.trace.windows(2) {
                assert_eq!(step_backward(&w[1]).as_ref(), Some(&w[0]), "term {src}");
            }
            assert_eq!(step_backward(&r.trace[0]), None, "initial state of {src}");
        }
    }

    /// The ES shortcut: on (x x)[x<-\y.y] the logged position for x goes to
    /// the log, not the tape, and the machine moves straight into the
    /// definiens.
    #[test]
    fn var2_pushes_on_the_log() {
        use Step::{SubBody as SB, SubDefiniens as SD};
        let code = t("(x x)[x<-\\y.y]");
        let s0 = initial_state(code.clone(), 0);
        let StepResult::Next(s1) = step(&s0) else { panic!() };
        assert_eq!(s1.path, path(&[SB]));
        let StepResult::Next(s2) = step(&s1) else { panic!() };
        assert_eq!(s2.path, path(&[SB, L]));
        assert_eq!(s2.tape.len(), 1);
        let StepResult::Next(s3) = step(&s2) else { panic!() };
        assert_eq!(s3.path, path(&[SD]), "var2 moves to the definiens");
        assert_eq!(s3.dir, Direction::Down);
        assert_eq!(s3.log.len(), 1, "logged position went to the log");
        assert_eq!(s3.tape.len(), 1, "tape untouched by var2");
        let lp = s3.log.head().unwrap();
        assert_eq!(lp.binder, Path::root());
        assert_eq!(lp.occurrence, path(&[SB, L]));
    }

    #[test]
    fn forged_tape_position_is_a_violation() {
        let code = t("(\\x.x x)(\\y.y)");
        // An abstraction in down mode with a tape position whose binder is
        // a different node.
        let wrong = LoggedPosition {
            name: "y".into(),
            binder: path(&[R]),
            occurrence: path(&[R, B]),
            log: Log::new(),
        };
        let s = State {
            root: code.clone(),
            path: path(&[L]),
            log: Log::new(),
            tape: Tape::new().push(TapeItem::Position(wrong)),
            dir: Direction::Down,
        };
        assert!(matches!(step(&s), StepResult::Violation(_)));
    }
}
