//! Hierarchical periodic benchmark signals.

mod dataset;
mod form;
mod manifest;
mod sexpr;
mod variant;

pub use dataset::{evaluation_grid, sample_dataset, training_grid, DomainTag, SampleSet};
pub use form::{
    enumerate_skeletons, eval_elementary, eval_form, eval_trend, poly, saw, square, Combinator, ElementaryForm,
    ElementaryKind, FormExpr, FormSkeleton, TrendForm,
};
pub use manifest::{Manifest, ManifestEntry};
pub use variant::{generate_variant, CoeffRange, Domain, SignalVariant, TrendKind, TANGENT_LIMIT};
