//! Higher-level analytical functions over histograms: rank views, the
//! rank-sum test, slope extraction, TF-IDF, and the co-occurrence, salience,
//! trendy-terms, and synchronized-topics recipes.

pub mod cooccur;
pub mod mwu;
pub mod rank;
pub mod salience;
pub mod slope;
pub mod sync;
pub mod tfidf;
pub mod trendy;

pub use cooccur::{topic_cooccurrence, CooccurrenceGroup};
pub use mwu::{mann_whitney_u, mann_whitney_u_with, Alternative, PMethod, UTestResult};
pub use rank::{rank_view, RankEntry, RankedTth};
pub use salience::{salience, SalienceComparison, SalienceResult};
pub use slope::{find_max_slope, SlopeResult};
pub use sync::{synchronized_topics, SyncDay};
pub use tfidf::{tf_idf, TfIdfEntry};
pub use trendy::{trendy_terms, TrendyTerm};
