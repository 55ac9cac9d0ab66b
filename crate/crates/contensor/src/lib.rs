//! Continuous tensors: tensors indexed by real numbers whose values are
//! piecewise constant, together with a compiler that lowers continuous loops
//! over them into finite plans.

pub mod compiler;
pub mod exec;
pub mod interval;
pub mod io;
pub mod kernels;
pub mod ir;
pub mod lang;
pub mod limit;
pub mod looplet;
pub mod oracle;
pub mod storage;
pub mod value;

pub use interval::{AffineMap, Interval, Kind};
pub use limit::Limit;
pub use storage::ContTensor;
pub use value::Value;
