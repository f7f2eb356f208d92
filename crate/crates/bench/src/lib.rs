//! Shared fixtures for the pipeline benchmarks.

use railsync_core::{build_model, build_sync_pairs, BigMMode, GenSpec, Instance, MipModel};

/// Generates an instance of the given size and builds its model.
pub fn instance_and_model(trains: usize, stations: usize) -> (Instance, MipModel) {
    let spec = GenSpec {
        trains,
        stations,
        ..GenSpec::default()
    };
    let doc = railsync_core::generate(&spec).expect("spec is valid");
    let inst = doc.load().expect("generated documents load");
    let pairs =
        build_sync_pairs(&inst.network, &inst.params, &inst.initial).expect("pairs build");
    let model = build_model(
        &inst.network,
        &inst.params,
        &pairs,
        &inst.initial,
        BigMMode::Auto,
    )
    .expect("model builds");
    (inst, model)
}
