//! Shared inputs for the criterion benches.

use tracelab::{GridFunction, GridSpec};

pub fn gaussian(n: usize, size: usize) -> GridFunction {
    let spec = GridSpec::new(n, size, 16.0).expect("valid grid");
    GridFunction::from_fn(spec, |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).expect("finite")
}
