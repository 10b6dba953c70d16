//! Per-node parameter counts for the two shipped network variants.
//!
//! `cargo run --example param_audit [CLASSES]`

use learnet::graph::{build_learnet, build_learnet_reduced, param_count, ParamReport};

pub fn run(classes: usize) -> learnet::Result<(ParamReport, ParamReport)> {
    let full = param_count(&build_learnet(classes)?)?;
    let reduced = param_count(&build_learnet_reduced(classes)?)?;
    println!(
        "{:<10} {:>10} {:>8} {:>10}",
        "node", "weights", "biases", "reduced"
    );
    for node in full.per_node.iter().filter(|n| n.weights + n.biases > 0) {
        let other = reduced
            .per_node
            .iter()
            .find(|m| m.node == node.node)
            .map_or(0, |m| m.weights + m.biases);
        println!(
            "{:<10} {:>10} {:>8} {:>10}",
            node.node, node.weights, node.biases, other
        );
    }
    println!("backbone {:>10} {:>10}", full.backbone, reduced.backbone);
    println!("total    {:>10} {:>10}", full.total, reduced.total);
    Ok((full, reduced))
}

fn main() -> learnet::Result<()> {
    let classes = std::env::args()
        .nth(1)
        .map_or(Ok(3), |s| s.parse())
        .expect("CLASSES must be an integer");
    run(classes).map(|_| ())
}
