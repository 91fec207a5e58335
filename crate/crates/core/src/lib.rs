//! Completion of belief functions known only on some subsets of a finite frame.
//!
//! Given values `Bel(A_i) = a_i` on a family of subsets, the crate builds a
//! full belief function by one of several principles:
//!
//! * minimum specificity, solved as an exact linear program over the
//!   intersection closure of the family, with ties resolved by averaging
//!   the vertices of the optimal face;
//! * the direct least-committed solution when the family is closed under
//!   intersection;
//! * focusing, which looks for the least committed belief whose focal
//!   elements are among the sets that were given;
//! * stepwise weak focusing, which admits intersections of known sets one
//!   layer at a time.
//!
//! Existence conditions are checked exactly and reported per set, and an
//! [`elicitation::ElicitationSession`] asks an expert for more values when
//! focusing does not yet apply. All values are exact rationals.

pub mod belief;
pub mod completion;
pub mod elicitation;
pub mod error;
pub mod frame;
pub mod lp;
pub mod value;

pub use belief::{
    less_committed, BeliefTable, Commitment, FamilyMasses, KnownBeliefs, MassAssignment,
};
pub use completion::{
    check_closed, check_focusing, complete_closed, complete_focusing, complete_min_specificity,
    complete_stepwise, detect_impossible, next_question, CompletionOptions, CompletionResult,
    ConditionKind, ConditionRecord, ExistenceReport, Method, Symmetry, Verdict,
};
pub use elicitation::{elicit, Answer, ElicitationOracle, ElicitationSession, SessionState};
pub use error::{Error, Result};
pub use frame::{Frame, SetFamily, Subset};
pub use value::{parse_rational, Rational};
