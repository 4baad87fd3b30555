//! Grid-guided rectification of generated graphic-design layouts.
//!
//! A layout is repaired against grid systems mined from a corpus: a
//! discrete snapping pass alternates with gradient descent on overlap and
//! containment costs, once per retrieved exemplar grid, and the candidate
//! with the fewest flaws wins.

pub mod alignment;
pub mod config;
pub mod criteria;
pub mod energy;
pub mod error;
pub mod grid;
pub mod layout;
pub mod metrics;
pub mod optimizer;
pub mod render;
pub mod saliency;

pub use alignment::{extract_alignments, AlignmentKind, AlignmentRelation, AlignmentRelationSet};
pub use config::{FlawWeights, RectifyConfig};
pub use criteria::{parse_criteria, CriteriaSet, Role};
pub use energy::{EnergyBreakdown, EnergyModel, Gradient};
pub use error::{Error, Result};
pub use grid::{construct_grid, layout_similarity, retrieve_exemplars, GridIndex, GridSystem, SnapLineSet};
pub use layout::{parse_layout, parse_layout_checked, BBox, Element, Layout};
pub use metrics::{evaluate, MetricBundle};
pub use optimizer::{rectify, RectifyResult};
pub use saliency::SaliencyMap;
