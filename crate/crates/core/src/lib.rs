//! Structural code visualization: nested shaded boxes around every control
//! structure, a ratio-preserving overview, conditional-compilation activity,
//! extract-block refactoring and a synchronized document session.

pub mod activity;
pub mod blockparse;
pub mod grammar;
pub mod mask;
pub mod refactor;
pub mod render;
pub mod session;
pub mod source;
pub mod viewmodel;

pub use blockparse::{
    block_at, parse_blocks, BlockId, BlockNode, BlockTree, DiagCode, Directive, DirectiveKind, ParseDiagnostic, RangeError,
};
pub use grammar::{
    check_grammar, classify_block_kind, load_grammar, BlockKind, GrammarDiagnostic, GrammarError, GrammarSet,
    Introducer, Severity, StructureGrammar,
};
pub use mask::{scan_mask, CharClass, CodeMask};
pub use source::{Pos, SourceText};
pub use activity::{conditional_activity, eval_condition, ActivityMap, ExprError};
pub use viewmodel::{
    editor_rects, editor_rects_with_activity, mark_errors, overview_model, shade_for_depth, BlockRect, ErrorMark,
    MismatchError, OverviewError, OverviewModel, OverviewParams, OverviewRect, Palette, PaletteError, Px, Rgb,
};
pub use refactor::{block_dependencies, extract_block, fold_spans, DepSets, FoldSpan, RefactorError, RefactorResult};
pub use render::{render_ansi, render_overview_svg, render_svg};
pub use session::{digest, Edit, Session, SessionError, Snapshot, Subscription};
