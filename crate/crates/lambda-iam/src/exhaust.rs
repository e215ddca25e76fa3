//! Tape tests, log tests, the surrounding relation, and a bounded decision
//! procedure for exhaustible states, together with the run-level invariant
//! checkers.
//!
//! Every logged position sitting in a reachable state is there for a
//! reason: the machine can backtrack to it. A tape test probes one tape
//! entry by cutting the tape just below it and reversing the direction; a
//! log test probes one log entry from the matching outer position with an
//! empty tape. A state is exhaustible when every test runs back, through a
//! backtracking transition (`bt2`, or `var3` on the ES side), to an
//! exhaustible state surrounding the focus. The coinductive definition is
//! approximated by bounded recursion.

use std::collections::HashMap;

use crate::machine::{
    step, step_backward, tape_positions, Direction, LoggedPosition, State, StepResult, Tape,
    TapeItem,
};
use crate::stack::Stack;
use crate::syntax::Step;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TestKind {
    Tape,
    /// The m-log test, 1-based from the bottom of the log.
    Log(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Test {
    pub kind: TestKind,
    pub focus: LoggedPosition,
    pub start: State,
}

/// All tape and log tests of a state. Initial states have none.
pub fn tests_of(s: &State) -> Vec<Test> {
    let mut out = Vec::new();

    // Tape tests: keep the prefix above the focus and the focus itself,
    // reverse the direction stated by the balance invariant.
    let items: Vec<TapeItem> = s.tape.iter().cloned().collect();
    for (i, item) in items.iter().enumerate() {
        if let TapeItem::Position(focus) = item {
            let kept = &items[..=i];
            let positions = kept
                .iter()
                .filter(|it| matches!(it, TapeItem::Position(_)))
                .count();
            out.push(Test {
                kind: TestKind::Tape,
                focus: focus.clone(),
                start: State {
                    root: s.root.clone(),
                    path: s.path.clone(),
                    log: s.log.clone(),
                    tape: Stack::from_top_down(kept.to_vec()),
                    dir: Direction::Up.flip_n(positions),
                },
            });
        }
    }

    // Log tests: the m-th entry from the bottom is probed from the m-outer
    // position, under the log cut down to that entry, with an empty tape,
    // upwards.
    let n = s.log.len();
    let entries: Vec<LoggedPosition> = s.log.iter().cloned().collect();
    let pos = crate::syntax::Position::new(s.root.clone(), s.path.clone())
        .expect("state path resolves");
    for m in 1..=n {
        let focus = entries[n - m].clone();
        let outer = pos.outer(m).expect("log length equals the level");
        out.push(Test {
            kind: TestKind::Log(m),
            focus,
            start: State {
                root: s.root.clone(),
                path: outer.path().clone(),
                log: Stack::from_top_down(entries[n - m..].to_vec()),
                tape: Tape::new(),
                dir: Direction::Up,
            },
        });
    }
    out
}

/// A state surrounds a logged position when it sits at the recorded
/// occurrence, upwards, with an empty tape and the recorded log on top of
/// its own.
pub fn surrounds(s: &State, focus: &LoggedPosition) -> bool {
    if s.dir != Direction::Up || !s.tape.is_empty() || s.path != focus.occurrence {
        return false;
    }
    if focus.log.len() > s.log.len() {
        return false;
    }
    focus.log.iter().zip(s.log.iter()).all(|(a, b)| a == b)
}

/// Would `step(s)` be a backtracking completion (`bt2` or `var3`), and
/// which logged position would it consume?
fn backtrack_consumes(s: &State) -> Option<LoggedPosition> {
    match s.dir {
        Direction::Down => match (s.subterm(), s.tape.head()) {
            (crate::syntax::Term::Abs(..), Some(TapeItem::Position(lp))) => Some(lp.clone()),
            _ => None,
        },
        Direction::Up => match (s.path.last(), s.log.head()) {
            (Some(Step::SubDefiniens), Some(lp)) => Some(lp.clone()),
            _ => None,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Exhaustible,
    /// A test ran to completion without ever consuming its focus in a
    /// surrounding state.
    CounterExample(Box<Test>),
    /// The fuel or depth bound was hit before a verdict.
    Unknown,
}

/// Memo of states already certified exhaustible; shared across the
/// recursion and across the states of a run, where surrounding states
/// repeat heavily.
#[derive(Default)]
pub struct ExhaustCache {
    certified: HashMap<State, ()>,
}

/// Bounded check that `s` is exhaustible: each test must reach, via a
/// `bt2`/`var3` transition consuming its focus, a state that surrounds the
/// focus and is itself exhaustible (recursively, up to `depth`).
pub fn is_exhaustible(s: &State, depth: usize, fuel: usize) -> Verdict {
    is_exhaustible_cached(s, depth, fuel, &mut ExhaustCache::default())
}

pub fn is_exhaustible_cached(
    s: &State,
    depth: usize,
    fuel: usize,
    cache: &mut ExhaustCache,
) -> Verdict {
    if cache.certified.contains_key(s) {
        return Verdict::Exhaustible;
    }
    let tests = tests_of(s);
    for test in tests {
        let mut cur = test.start.clone();
        let mut completed = false;
        for _ in 0..fuel {
            let consuming = backtrack_consumes(&cur).is_some_and(|lp| lp == test.focus);
            match step(&cur) {
                StepResult::Next(next) => {
                    if consuming {
                        if !surrounds(&next, &test.focus) {
                            return Verdict::CounterExample(Box::new(test));
                        }
                        if depth == 0 {
                            return Verdict::Unknown;
                        }
                        match is_exhaustible_cached(&next, depth - 1, fuel, cache) {
                            Verdict::Exhaustible => {}
                            other => return other,
                        }
                        completed = true;
                        break;
                    }
                    cur = next;
                }
                StepResult::Final(_) | StepResult::Violation(_) => {
                    return Verdict::CounterExample(Box::new(test));
                }
            }
        }
        if !completed {
            return Verdict::Unknown;
        }
    }
    cache.certified.insert(s.clone(), ());
    Verdict::Exhaustible
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantFailure {
    pub index: usize,
    pub what: String,
}

/// Checks, at every state of a trace: code constancy, the balance
/// invariant (log length = level, direction = parity of tape positions,
/// up states carry a position), and the backward-step round-trip. Reports
/// the first failure.
pub fn check_run_invariants(trace: &[State]) -> Result<(), InvariantFailure> {
    let fail = |index: usize, what: &str| {
        Err(InvariantFailure {
            index,
            what: what.to_string(),
        })
    };
    let Some(first) = trace.first() else {
        return Ok(());
    };
    for (i, s) in trace.iter().enumerate() {
        if s.root != first.root {
            return fail(i, "code changed along the run");
        }
        if s.root.at(&s.path).is_err() {
            return fail(i, "position does not resolve in the code");
        }
        if s.log.len() != s.path.level() {
            return fail(i, "log length differs from the position level");
        }
        let expected = Direction::Down.flip_n(tape_positions(&s.tape));
        if s.dir != expected {
            return fail(i, "direction disagrees with the tape position count");
        }
        if s.dir == Direction::Up && tape_positions(&s.tape) == 0 {
            return fail(i, "up state without a logged position on the tape");
        }
    }
    for (i, w) in trace.windows(2).enumerate() {
        if step_backward(&w[1]).as_ref() != Some(&w[0]) {
            return fail(i + 1, "backward step does not return to the predecessor");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{initial_state, run, FinalClass, Log, RunOutcome};
    use crate::syntax::parse;
    use std::rc::Rc;

    fn t(s: &str) -> Rc<crate::syntax::Term> {
        parse(s).unwrap()
    }

    #[test]
    fn initial_states_have_no_tests() {
        let s = initial_state(t("(\\x.x x)(\\y.y)"), 2);
        assert!(tests_of(&s).is_empty());
    }

    #[test]
    fn tape_test_direction_is_reversed() {
        // The state after the var transition in the depth-1 worked run has
        // tape (x,...)·p and no log: one tape test, downwards.
        let r = run(t("((\\z.\\x.x) w)(\\y.y)"), 1, 100);
        let s = &r.trace[5];
        assert_eq!(s.dir, Direction::Up);
        let tests = tests_of(s);
        assert_eq!(tests.len(), 1);
        assert_eq!(tests[0].kind, TestKind::Tape);
        assert_eq!(tests[0].start.dir, Direction::Down);
        assert_eq!(tests[0].start.tape.len(), 1, "the marker below is cut");
    }

    #[test]
    fn log_tests_probe_outer_positions() {
        let r = run(t("(\\x.x x (\\w.w))(\\y.y y)"), 1, 400);
        let deep = r
            .trace
            .iter()
            .find(|s| s.log.len() == 2)
            .expect("some state reaches level 2");
        let tests = tests_of(deep);
        let log_tests: Vec<_> = tests
            .iter()
            .filter(|t| matches!(t.kind, TestKind::Log(_)))
            .collect();
        assert_eq!(log_tests.len(), 2);
        for test in &log_tests {
            let TestKind::Log(m) = test.kind else { unreachable!() };
            assert_eq!(test.start.path.level(), m);
            assert!(test.start.tape.is_empty());
            assert_eq!(test.start.dir, Direction::Up);
            assert_eq!(test.start.log.len(), m);
            assert_eq!(test.start.log.head().unwrap(), &test.focus);
        }
    }

    #[test]
    fn worked_runs_are_exhaustible() {
        for (src, k) in [
            ("((\\z.\\x.x) w)(\\y.y)", 1),
            ("(\\x.x x)(\\y.y)", 0),
            ("(x x)[x<-\\y.y]", 0),
        ] {
            let r = run(t(src), k, 500);
            assert!(matches!(r.outcome, RunOutcome::Final(_)));
            let mut cache = ExhaustCache::default();
            for (i, s) in r.trace.iter().enumerate() {
                assert_eq!(
                    is_exhaustible_cached(s, 3, 500, &mut cache),
                    Verdict::Exhaustible,
                    "state {i} of {src}"
                );
            }
        }
    }

    #[test]
    fn forged_focus_is_a_counterexample() {
        // Take the state right after var in the backtracking run and point
        // the tape focus at the wrong occurrence of x.
        let r = run(t("(\\x.x x)(\\y.y)"), 0, 100);
        let s = &r.trace[4];
        let Some((TapeItem::Position(lp), rest)) = s.tape.pop() else {
            panic!("expected a position on the tape")
        };
        let mut forged = lp.clone();
        forged.occurrence =
            crate::syntax::Path::from_steps(&[Step::AppLeft, Step::AbsBody, Step::AppRight]);
        let mut bad = s.clone();
        bad.tape = rest.push(TapeItem::Position(forged));
        assert!(matches!(
            is_exhaustible(&bad, 3, 200),
            Verdict::CounterExample(_)
        ));
    }

    #[test]
    fn invariants_hold_and_mutations_fail() {
        let r = run(t("(\\x.x x)(\\y.y)"), 0, 100);
        assert_eq!(r.outcome, RunOutcome::Final(FinalClass::Failure));
        assert!(check_run_invariants(&r.trace).is_ok());

        // Truncating one state's log breaks balance exactly there.
        let mut mutated = r.trace.clone();
        let idx = mutated
            .iter()
            .position(|s| !s.log.is_empty())
            .expect("some state has a log entry");
        mutated[idx].log = Log::new();
        let failure = check_run_invariants(&mutated).unwrap_err();
        assert_eq!(failure.index, idx);
        assert!(failure.what.contains("log length"));
    }
}
