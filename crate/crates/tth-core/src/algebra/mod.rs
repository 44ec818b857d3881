//! Operator algebra over temporal term histograms.

pub mod distance;
pub mod functions;
pub mod ops;
pub mod predicate;

pub use distance::{distance, DistanceMetric, DistanceRegistry, KL_EPSILON};
pub use functions::{apply, apply_arg, FnValue, FunctionRegistry, HistogramFn};
pub use ops::{
    coarsen, coarsen_to_ranges, collapse, extract_axis, group, index_op, merge, project,
    query_index, select, sort_by_axis, top, Attr, AttrValue, Axis, Bindings, Marginal1d,
    MarginalKey, MarginalRow, PartitionedTth, SetOp, SortAxis,
};
pub use predicate::{Atom, CmpOp, Predicate};

#[cfg(test)]
mod tests;
