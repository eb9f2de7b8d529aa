use aakit::aa::{fit, AAConfig};
use aakit::synth;
use std::time::Instant;

fn main() {
    let inst = synth::polytope(200, 15, 4, 0.0, 7).unwrap();
    let t = Instant::now();
    let cfg = AAConfig::new(4, 3);
    let model = fit(&inst.data, None, &cfg).unwrap();
    println!(
        "fit: {:.1} ms, outers = {}, final = {:.3e}, converged = {}",
        t.elapsed().as_secs_f64() * 1e3,
        (model.objective_trace.len() - 1) / 2,
        model.final_objective(),
        model.converged
    );
    println!("trace = {:?}", &model.objective_trace);
}
