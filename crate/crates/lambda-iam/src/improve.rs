//! Step-indexed relations between machine states over a term and over its
//! reduct, and the bisimulation harnesses built on them.
//!
//! A rewriting step `t -> u` induces a correspondence between positions of
//! `t` and positions of `u`: positions outside the contracted pattern
//! transport unchanged, positions inside the surviving pieces follow the
//! pieces, and for `ls` the definiens has a second residual at the head
//! occurrence. A state of code `t` is related to a state of code `u` when
//! their positions correspond (or the redex/reduct sits inside the two
//! subterms under one common context), their tapes match pointwise and
//! their logs match pointwise — except that for `ls` the state over the
//! kept definiens carries one extra bottom entry, the crossing of the ES
//! itself.
//!
//! Related states advance in lockstep up to local stutter: the reduct side
//! never needs more steps. [`check_diagram`] verifies the four defining
//! clauses for one pair, [`monitor_corun`] drives two machines along a
//! whole run, and [`check_soundness`]/[`check_length_decrease`] compare
//! observable outcomes and run lengths.

use std::rc::Rc;

use crate::machine::{
    initial_state, run_length, run_outcome, semantics, step, RunOutcome, SemanticsOutcome, State,
    StepResult, TapeItem,
};
use crate::reduction::{
    lhe_redexes, lhe_step, transport_path, transport_path_ls_copy, Redex, RuleName,
};
use crate::syntax::{alpha_eq, Step, Term};

/// One rewriting step lifted to a relation between machines: the source
/// and target codes plus the contracted redex.
#[derive(Debug, Clone)]
pub struct AmbientStep {
    pub source: Rc<Term>,
    pub target: Rc<Term>,
    pub redex: Redex,
}

impl AmbientStep {
    pub fn new(source: Rc<Term>, redex: Redex) -> Result<AmbientStep, String> {
        let target = lhe_step(&source, &redex).map_err(|e| e.0)?;
        Ok(AmbientStep {
            source,
            target,
            redex,
        })
    }

    /// All one-step reducts of `t`.
    pub fn all_from(t: &Rc<Term>) -> Vec<AmbientStep> {
        lhe_redexes(t)
            .into_iter()
            .map(|r| AmbientStep::new(t.clone(), r).expect("enumerated redex fires"))
            .collect()
    }

    pub fn rule(&self) -> RuleName {
        self.redex.rule
    }
}

/// Does source position `p` correspond to target position `q` under the
/// step? Either through the main transport or, for `ls`, through the copy
/// placed at the head occurrence.
fn path_maps(ambient: &AmbientStep, p: &crate::syntax::Path, q: &crate::syntax::Path) -> bool {
    if transport_path(&ambient.source, &ambient.redex, p).as_ref() == Some(q) {
        return true;
    }
    transport_path_ls_copy(&ambient.redex, p).as_ref() == Some(q)
}

fn entry_related(
    ambient: &AmbientStep,
    a: &crate::machine::LoggedPosition,
    b: &crate::machine::LoggedPosition,
) -> bool {
    path_maps(ambient, &a.binder, &b.binder)
        && path_maps(ambient, &a.occurrence, &b.occurrence)
        && logs_related(ambient, &a.log, &b.log)
}

/// Is `extra` the crossing of the contracted ES itself (the entry pushed
/// when entering the definiens at the head occurrence)?
fn is_redex_crossing(ambient: &AmbientStep, extra: &crate::machine::LoggedPosition) -> bool {
    ambient.rule() == RuleName::Ls
        && extra.binder == ambient.redex.site
        && Some(&extra.occurrence) == ambient.redex.occurrence.as_ref()
        && extra.log.is_empty()
}

/// Pointwise log correspondence; for `ls` the source log may carry one
/// extra bottom entry, the crossing of the contracted ES.
fn logs_related(ambient: &AmbientStep, la: &crate::machine::Log, lb: &crate::machine::Log) -> bool {
    if la.len() == lb.len() {
        return la.iter().zip(lb.iter()).all(|(a, b)| entry_related(ambient, a, b));
    }
    if la.len() == lb.len() + 1 {
        let items: Vec<_> = la.iter().collect();
        let (extra, rest) = items.split_last().expect("non-empty by length");
        return is_redex_crossing(ambient, extra)
            && rest
                .iter()
                .zip(lb.iter())
                .all(|(a, b)| entry_related(ambient, a, b));
    }
    false
}

fn tapes_related(ambient: &AmbientStep, s: &State, q: &State) -> bool {
    s.tape.len() == q.tape.len()
        && s.tape.iter().zip(q.tape.iter()).all(|(a, b)| match (a, b) {
            (TapeItem::Marker, TapeItem::Marker) => true,
            (TapeItem::Position(a), TapeItem::Position(b)) => entry_related(ambient, a, b),
            _ => false,
        })
}

/// Position routes for the two state positions.
fn positions_related(ambient: &AmbientStep, s: &State, q: &State) -> bool {
    let site = &ambient.redex.site;
    // Redex inside the subterm, common head context around it.
    if s.path == q.path && s.path.is_prefix_of(site) {
        return true;
    }
    // ls: the pattern split between subterm and context — the position is
    // on the body spine at or above the consumed occurrence, inside the
    // scope of the contracted ES.
    if ambient.rule() == RuleName::Ls {
        if let Some(occ) = &ambient.redex.occurrence {
            let body = site.child(Step::SubBody);
            if s.path == q.path && body.is_prefix_of(&s.path) && s.path.is_prefix_of(occ) {
                return true;
            }
        }
    }
    // Redex inside the context: positions transport and subterms agree.
    if transport_path(&ambient.source, &ambient.redex, &s.path).as_ref() == Some(&q.path) {
        return alpha_eq(s.subterm(), q.subterm());
    }
    false
}

fn positions_related_copy(ambient: &AmbientStep, s: &State, q: &State) -> bool {
    transport_path_ls_copy(&ambient.redex, &s.path).as_ref() == Some(&q.path)
        && alpha_eq(s.subterm(), q.subterm())
}

/// Membership check for the relation induced by `ambient`: `s` must run
/// over the source code and `q` over the target.
pub fn related(ambient: &AmbientStep, s: &State, q: &State) -> bool {
    if s.root != ambient.source || q.root != ambient.target {
        return false;
    }
    if s.dir != q.dir || !tapes_related(ambient, s, q) {
        return false;
    }
    if positions_related(ambient, s, q) && logs_related(ambient, &s.log, &q.log) {
        return true;
    }
    // The source machine inside the kept definiens, the target machine
    // inside the copy at the head occurrence: one extra log entry.
    positions_related_copy(ambient, s, q) && logs_related(ambient, &s.log, &q.log)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    FinalLeft,
    FinalRight,
}

#[derive(Debug, Clone)]
pub struct DiagramReport {
    pub side: Side,
    /// Steps taken on the source side (after the forced first one for
    /// `Left`).
    pub m: usize,
    /// Steps taken on the target side (after the forced first one for
    /// `Right`).
    pub n: usize,
    pub ok: bool,
    pub witness: Option<(State, State)>,
}

fn orbit(start: &State, bound: usize) -> (Vec<State>, bool) {
    let mut states = vec![start.clone()];
    for _ in 0..bound {
        match step(states.last().unwrap()) {
            StepResult::Next(next) => states.push(next),
            _ => return (states, true),
        }
    }
    (states, false)
}

fn is_final(s: &State) -> bool {
    matches!(step(s), StepResult::Final(_))
}

/// Checks every applicable clause of the improvement definition on a
/// related pair, searching forward along the two (deterministic) runs for
/// the earliest re-synchronization within `bound` steps.
pub fn check_diagram(ambient: &AmbientStep, s: &State, q: &State, bound: usize) -> Vec<DiagramReport> {
    let mut out = Vec::new();
    let s_final = is_final(s);
    let q_final = is_final(q);

    if s_final {
        out.push(DiagramReport {
            side: Side::FinalLeft,
            m: 0,
            n: 0,
            ok: q_final,
            witness: Some((s.clone(), q.clone())),
        });
    }
    if q_final {
        // The source must terminate.
        let (orb, terminated) = orbit(s, bound);
        out.push(DiagramReport {
            side: Side::FinalRight,
            m: orb.len() - 1,
            n: 0,
            ok: terminated,
            witness: terminated.then(|| (orb.last().unwrap().clone(), q.clone())),
        });
    }

    if let StepResult::Next(s1) = step(s) {
        let (s_orbit, _) = orbit(&s1, bound);
        let (q_orbit, _) = orbit(q, bound);
        let mut found = None;
        'leftsearch: for total in 0..=(2 * bound) {
            for m in 0..=total.min(s_orbit.len() - 1) {
                let n = total - m;
                if n > m + 1 || n >= q_orbit.len() {
                    continue;
                }
                if related(ambient, &s_orbit[m], &q_orbit[n]) {
                    found = Some((m, n));
                    break 'leftsearch;
                }
            }
        }
        out.push(match found {
            Some((m, n)) => DiagramReport {
                side: Side::Left,
                m,
                n,
                ok: true,
                witness: Some((s_orbit[m].clone(), q_orbit[n].clone())),
            },
            None => DiagramReport {
                side: Side::Left,
                m: 0,
                n: 0,
                ok: false,
                witness: None,
            },
        });
    }

    if let StepResult::Next(q1) = step(q) {
        let (q_orbit, _) = orbit(&q1, bound);
        let (s_orbit, _) = orbit(s, bound);
        let mut found = None;
        'rightsearch: for total in 0..=(2 * bound) {
            for n in 0..=total.min(q_orbit.len() - 1) {
                let m = total - n;
                if m < n + 1 || m >= s_orbit.len() {
                    continue;
                }
                if related(ambient, &s_orbit[m], &q_orbit[n]) {
                    found = Some((m, n));
                    break 'rightsearch;
                }
            }
        }
        out.push(match found {
            Some((m, n)) => DiagramReport {
                side: Side::Right,
                m,
                n,
                ok: true,
                witness: Some((s_orbit[m].clone(), q_orbit[n].clone())),
            },
            None => DiagramReport {
                side: Side::Right,
                m: 0,
                n: 0,
                ok: false,
                witness: None,
            },
        });
    }
    out
}

#[derive(Debug, Clone)]
pub struct CorunReport {
    /// (m, n) of each closed transition-left diagram along the run.
    pub syncs: Vec<(usize, usize)>,
    /// Both machines reached final states (rather than the fuel bound).
    pub completed: bool,
}

/// Drives the two machines from their depth-k initial states, closing the
/// transition-left diagram at every step of the source machine and
/// asserting relatedness at each synchronization point.
pub fn monitor_corun(
    ambient: &AmbientStep,
    k: usize,
    fuel: usize,
    bound: usize,
) -> Result<CorunReport, String> {
    let mut s = initial_state(ambient.source.clone(), k);
    let mut q = initial_state(ambient.target.clone(), k);
    if !related(ambient, &s, &q) {
        return Err("initial states are not related".to_string());
    }
    let mut syncs = Vec::new();
    let mut budget = fuel;
    loop {
        match step(&s) {
            StepResult::Final(_) => {
                if !is_final(&q) {
                    return Err(format!("source final but target still steps at {q:?}"));
                }
                return Ok(CorunReport {
                    syncs,
                    completed: true,
                });
            }
            StepResult::Violation(msg) => return Err(format!("source violation: {msg}")),
            StepResult::Next(s1) => {
                let (s_orbit, _) = orbit(&s1, bound);
                let (q_orbit, _) = orbit(&q, bound);
                let mut found = None;
                'search: for total in 0..=(2 * bound) {
                    for m in 0..=total.min(s_orbit.len() - 1) {
                        let n = total - m;
                        if n > m + 1 || n >= q_orbit.len() {
                            continue;
                        }
                        if related(ambient, &s_orbit[m], &q_orbit[n]) {
                            found = Some((m, n));
                            break 'search;
                        }
                    }
                }
                let Some((m, n)) = found else {
                    return Err(format!(
                        "transition-left diagram did not close within bound {bound} at {s1:?}"
                    ));
                };
                let spent = 1 + m + n;
                s = s_orbit[m].clone();
                q = q_orbit[n].clone();
                syncs.push((m, n));
                if budget < spent {
                    return Ok(CorunReport {
                        syncs,
                        completed: false,
                    });
                }
                budget -= spent;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SoundnessEntry {
    pub redex: Redex,
    pub source_outcome: SemanticsOutcome,
    pub target_outcome: SemanticsOutcome,
    pub agree: bool,
    /// Both (or one) side hit the fuel bound; agreement is then only
    /// fuel-relative.
    pub timeout_flagged: bool,
    pub source_length: Option<usize>,
    pub target_length: Option<usize>,
    pub length_ok: bool,
}

/// For every one-step reduct `u` of `t`, compares the depth-k semantics
/// and run lengths of the two codes.
pub fn check_soundness(t: &Rc<Term>, k: usize, fuel: usize) -> Result<Vec<SoundnessEntry>, String> {
    let mut out = Vec::new();
    for ambient in AmbientStep::all_from(t) {
        let source_outcome = semantics(t.clone(), k, fuel)?;
        let target_outcome = semantics(ambient.target.clone(), k, fuel)?;
        let timeout_flagged = source_outcome == SemanticsOutcome::Timeout
            || target_outcome == SemanticsOutcome::Timeout;
        let agree = source_outcome == target_outcome
            || (source_outcome == SemanticsOutcome::Timeout
                && target_outcome != SemanticsOutcome::Timeout);
        // A source timeout with a finished target is consistent (the
        // target run is never longer); record it as flagged agreement.
        let source_length = run_length(t.clone(), k, fuel);
        let target_length = run_length(ambient.target.clone(), k, fuel);
        let length_ok = match (source_length, target_length) {
            (Some(a), Some(b)) => a >= b,
            (None, _) => true,
            (Some(_), None) => false,
        };
        out.push(SoundnessEntry {
            redex: ambient.redex.clone(),
            source_outcome,
            target_outcome,
            agree,
            timeout_flagged,
            source_length,
            target_length,
            length_ok,
        });
    }
    Ok(out)
}

/// The least `k0 <= kmax` such that the run on `t` is strictly longer than
/// the run on `u` at every depth in `[k0, kmax]`, both sides terminating
/// within `fuel`. `None` when no such depth exists at these bounds.
pub fn check_length_decrease(
    t: &Rc<Term>,
    u: &Rc<Term>,
    fuel: usize,
    kmax: usize,
) -> Option<usize> {
    let mut strict = vec![false; kmax + 1];
    for (h, slot) in strict.iter_mut().enumerate() {
        if let (Some(a), Some(b)) = (run_length(t.clone(), h, fuel), run_length(u.clone(), h, fuel))
        {
            *slot = a > b;
        }
    }
    let mut k0 = None;
    for h in (0..=kmax).rev() {
        if strict[h] {
            k0 = Some(h);
        } else {
            break;
        }
    }
    k0
}

/// Runs on `t` and on every reduct terminate alike at this fuel.
pub fn termination_equivalent(t: &Rc<Term>, k: usize, fuel: usize) -> Result<bool, String> {
    for ambient in AmbientStep::all_from(t) {
        let a = run_outcome(t.clone(), k, fuel);
        let b = run_outcome(ambient.target.clone(), k, fuel);
        let term_a = matches!(a.0, RunOutcome::Final(_));
        let term_b = matches!(b.0, RunOutcome::Final(_));
        if let RunOutcome::Violation(msg) = a.0 {
            return Err(msg);
        }
        if let RunOutcome::Violation(msg) = b.0 {
            return Err(msg);
        }
        // With bounded fuel only source-timeout/target-final is consistent.
        if term_a && !term_b {
            return Ok(false);
        }
    }
    Ok(true)
}
