//! Write a log-scale SVG of loss and deviation for one refinement run.

use ccr::generative::{perturb_dictionary, sample_batch, GenerativeParams};
use ccr::linalg::random_orthonormal;
use ccr::optimizer::{run_multi_sample, Mode, RefinementConfig};
use ccr::plot::{emit_svg, PlotOptions, Series};
use ccr::Seed;

fn main() -> ccr::Result<()> {
    let p = GenerativeParams::new(10, 10, 5, 0.5, 1.0)?;
    let dstar = random_orthonormal(10, 10, Seed(1))?;
    let dinit = perturb_dictionary(&dstar, 0.027, Seed(2))?;
    let samples = sample_batch(&dstar, &p, 1000, Seed(3))?;
    let cfg = RefinementConfig::new(0.1, 0.027, 200, 5, Mode::Multi)?;
    let traj = run_multi_sample(&dstar, &dinit, &samples, &cfg)?;

    let pick = |f: fn(&ccr::optimizer::StepRecord) -> f64| traj.records.iter().map(|r| (r.iter as f64, f(r))).collect();
    let series = [Series::new("loss", pick(|r| r.loss)), Series::new("dev_all", pick(|r| r.dev_all))];
    let opts = PlotOptions { title: "multi-sample refinement".into(), x_label: "iteration".into(), y_label: "value".into(), log_y: true };
    let path = std::env::temp_dir().join("ccr_trajectory.svg");
    emit_svg(&series, &opts, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}
