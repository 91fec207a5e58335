//! Interactive completion: while focusing does not apply, ask an expert for
//! the belief of an intersection of known sets, add it, and check again.
//!
//! The session is a plain state machine so that the same transitions can be
//! driven by an in-process oracle, a terminal prompt, or an HTTP client, and
//! replayed from the recorded history.

use crate::belief::KnownBeliefs;
use crate::completion::{
    check_focusing, complete_focusing, complete_stepwise, next_question_from, CompletionOptions,
    CompletionResult, ExistenceReport, Verdict,
};
use crate::error::{Error, Result};
use crate::frame::Subset;
use crate::value::Rational;

/// Consecutive rejected answers tolerated by [`elicit`] before giving up.
pub const MAX_REJECTIONS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum Answer {
    Value(Rational),
    Unavailable,
}

/// Source of additional belief values.
pub trait ElicitationOracle {
    fn ask(&mut self, set: Subset, known: &KnownBeliefs) -> Answer;

    /// Called when an answer was rejected; the same set is asked again.
    fn rejected(&mut self, _set: Subset, _value: &Rational, _reason: &Error) {}
}

impl<F> ElicitationOracle for F
where
    F: FnMut(Subset, &KnownBeliefs) -> Answer,
{
    fn ask(&mut self, set: Subset, known: &KnownBeliefs) -> Answer {
        self(set, known)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub set: Subset,
    pub answer: Answer,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionState {
    /// Waiting for the belief of this set.
    Pending(Subset),
    Completed(Box<CompletionResult>),
    /// A failing condition at `at` involves only known sets.
    Impossible {
        at: Subset,
        report: ExistenceReport,
    },
    /// No question can help and no completion was found.
    Exhausted {
        report: ExistenceReport,
    },
}

#[derive(Debug, Clone)]
pub struct ElicitationSession {
    initial: KnownBeliefs,
    known: KnownBeliefs,
    options: CompletionOptions,
    history: Vec<HistoryEntry>,
    report: ExistenceReport,
    state: SessionState,
}

impl ElicitationSession {
    pub fn start(known: KnownBeliefs, options: CompletionOptions) -> Result<Self> {
        let report = check_focusing(&known);
        let mut session = Self {
            initial: known.clone(),
            known,
            options,
            history: Vec::new(),
            state: SessionState::Exhausted {
                report: report.clone(),
            },
            report,
        };
        session.advance()?;
        Ok(session)
    }

    /// Rebuilds a session by applying a recorded history to its initial values.
    pub fn replay(
        initial: KnownBeliefs,
        options: CompletionOptions,
        history: &[HistoryEntry],
    ) -> Result<Self> {
        let mut session = Self::start(initial, options)?;
        for entry in history {
            if session.pending() != Some(entry.set) {
                return Err(Error::Replay(format!(
                    "replayed answer for {} does not match the pending question",
                    session.known.frame().render(entry.set)
                )));
            }
            let outcome = match &entry.answer {
                Answer::Value(v) => session.answer(v.clone()),
                Answer::Unavailable => session.answer_unavailable(),
            };
            if outcome.is_ok() != entry.accepted {
                return Err(Error::Replay("replayed answer changed acceptance".into()));
            }
        }
        Ok(session)
    }

    pub fn initial(&self) -> &KnownBeliefs {
        &self.initial
    }

    pub fn known(&self) -> &KnownBeliefs {
        &self.known
    }

    pub fn options(&self) -> &CompletionOptions {
        &self.options
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    /// Focusing conditions for the current known values.
    pub fn report(&self) -> &ExistenceReport {
        &self.report
    }

    pub fn pending(&self) -> Option<Subset> {
        match self.state {
            SessionState::Pending(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.pending().is_none()
    }

    pub fn result(&self) -> Option<&CompletionResult> {
        match &self.state {
            SessionState::Completed(r) => Some(r),
            _ => None,
        }
    }

    /// Records the belief of the pending set. A value that breaks
    /// monotonicity is rejected, recorded, and the question stays pending.
    pub fn answer(&mut self, value: Rational) -> Result<&SessionState> {
        let set = self.pending().ok_or(Error::NoPendingQuestion)?;
        match self.known.with_value(set, value.clone()) {
            Ok(next) => {
                self.history.push(HistoryEntry {
                    set,
                    answer: Answer::Value(value),
                    accepted: true,
                });
                self.known = next;
                self.advance()?;
                Ok(&self.state)
            }
            Err(e) => {
                self.history.push(HistoryEntry {
                    set,
                    answer: Answer::Value(value),
                    accepted: false,
                });
                Err(e)
            }
        }
    }

    /// The expert cannot answer: finish by stepwise weak focusing.
    pub fn answer_unavailable(&mut self) -> Result<&SessionState> {
        let set = self.pending().ok_or(Error::NoPendingQuestion)?;
        self.history.push(HistoryEntry {
            set,
            answer: Answer::Unavailable,
            accepted: true,
        });
        self.state = match complete_stepwise(&self.known, &self.options) {
            Ok(r) => SessionState::Completed(Box::new(r)),
            Err(Error::Infeasible(report)) => SessionState::Exhausted { report: *report },
            Err(e) => return Err(e),
        };
        Ok(&self.state)
    }

    fn advance(&mut self) -> Result<()> {
        self.report = check_focusing(&self.known);
        self.state = match self.report.verdict {
            Verdict::Consistent => {
                SessionState::Completed(Box::new(complete_focusing(&self.known)?))
            }
            Verdict::ProvablyImpossible => SessionState::Impossible {
                at: self
                    .report
                    .first_impossible()
                    .expect("impossible verdict names a set"),
                report: self.report.clone(),
            },
            Verdict::FocusingInapplicable => match next_question_from(&self.known, &self.report) {
                Some(q) => SessionState::Pending(q),
                None => SessionState::Exhausted {
                    report: self.report.clone(),
                },
            },
        };
        Ok(())
    }
}

/// Runs a session to a terminal state against `oracle`.
pub fn elicit<O: ElicitationOracle + ?Sized>(
    known: KnownBeliefs,
    oracle: &mut O,
    options: CompletionOptions,
) -> Result<ElicitationSession> {
    let mut session = ElicitationSession::start(known, options)?;
    let mut rejections = 0;
    while let Some(set) = session.pending() {
        match oracle.ask(set, session.known()) {
            Answer::Unavailable => {
                session.answer_unavailable()?;
            }
            Answer::Value(v) => match session.answer(v.clone()) {
                Ok(_) => rejections = 0,
                Err(e @ Error::MonotonicityViolation { .. })
                | Err(e @ Error::ValueOutOfRange { .. }) => {
                    oracle.rejected(set, &v, &e);
                    rejections += 1;
                    if rejections >= MAX_REJECTIONS {
                        return Err(e);
                    }
                }
                Err(e) => return Err(e),
            },
        }
    }
    Ok(session)
}
