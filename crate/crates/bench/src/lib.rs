//! Fixtures shared by the benchmarks.

use iwasawa_core::kernel_verify::precision_for_degree;
use iwasawa_core::{build_model, Model, RootSystem, SeriesAlgebra};

/// Matrix model and series engine for `label` at `p`, good through `degree`.
pub fn engine(label: &str, p: u64, degree: u32) -> (RootSystem, Model, SeriesAlgebra) {
    let rs = RootSystem::from_label(label).expect("valid label");
    let model = build_model(&rs, p, precision_for_degree(p, degree)).expect("model builds");
    let alg = SeriesAlgebra::new(&model, degree).expect("engine builds");
    (rs, model, alg)
}
