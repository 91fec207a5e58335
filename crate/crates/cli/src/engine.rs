//! Method selection shared by the CLI and the HTTP service.

use belief_forge_core::{
    complete_closed, complete_focusing, complete_min_specificity, complete_stepwise,
    CompletionOptions, CompletionResult, Error, KnownBeliefs,
};

use crate::document::{MethodName, SpecDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSettings {
    pub method: MethodName,
    pub options: CompletionOptions,
    /// Fall back to stepwise weak focusing when focusing does not apply.
    pub stepwise_fallback: bool,
}

impl RunSettings {
    /// Command-line values win over the spec, which wins over the defaults.
    pub fn resolve(spec: &SpecDocument, method: Option<MethodName>, cap: Option<usize>) -> Self {
        let mut options = CompletionOptions::default();
        if let Some(c) = cap.or(spec.options.cap) {
            options.vertex_cap = c;
        }
        RunSettings {
            method: method.or(spec.method).unwrap_or(MethodName::MinSpec),
            options,
            stepwise_fallback: spec.options.stepwise.unwrap_or(false),
        }
    }
}

pub fn run(known: &KnownBeliefs, settings: &RunSettings) -> Result<CompletionResult, Error> {
    match settings.method {
        MethodName::MinSpec => complete_min_specificity(known, &settings.options),
        MethodName::Closed => complete_closed(known),
        MethodName::Stepwise => complete_stepwise(known, &settings.options),
        MethodName::Focusing => match complete_focusing(known) {
            Err(Error::FocusingInapplicable(_)) if settings.stepwise_fallback => {
                complete_stepwise(known, &settings.options)
            }
            other => other,
        },
    }
}

/// True for errors meaning the input was valid but the requested method
/// produced no belief function.
pub fn is_no_solution(e: &Error) -> bool {
    matches!(
        e,
        Error::Infeasible(_)
            | Error::Impossible { .. }
            | Error::FocusingInapplicable(_)
            | Error::FamilyNotClosed { .. }
    )
}
