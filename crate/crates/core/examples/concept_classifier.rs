//! Concept-bottleneck classifier on the synthetic benchmark: frozen bank
//! against a refined bank, then one explained prediction.

use ccr::classifier::{evaluate, explain_sample, fit, TrainConfig};
use ccr::synthetic::{classification_benchmark, BenchmarkSpec};
use ccr::Seed;

fn main() -> ccr::Result<()> {
    let b = classification_benchmark(&BenchmarkSpec::default(), Seed(7))?;
    let frozen = TrainConfig { eta_l: 20.0, seed: Seed(1), ..TrainConfig::default() };
    let refined = TrainConfig { eta_d: 0.05, ..frozen.clone() };
    for (name, cfg) in [("frozen", &frozen), ("refined", &refined)] {
        let f = fit(&b.bank, &b.train, cfg)?;
        let m = evaluate(&f.bank, &f.head, &b.test, cfg.lambda)?;
        println!("{name:>8}  accuracy {:.4}  ael {:.2}  aced {:.4}", m.accuracy, m.ael, m.aced);
        if cfg.eta_d > 0.0 {
            let e = explain_sample(&f.bank, &f.head, &b.test.sample(0), cfg.lambda, 3)?;
            println!("sample 0 -> class {} (label {})", e.predicted, b.test.labels[0]);
            for r in e.rows {
                println!("  {:<10} score {:.3} weight {:+.3}", r.concept, r.score, r.weight);
            }
        }
    }
    Ok(())
}
