//! Spreading a tightly clustered concept bank apart.

use ccr::classifier::concept_dispersion;
use ccr::linalg::Dictionary;
use ccr::synthetic::clustered_bank;
use ccr::Seed;

fn mean_coherence(d: &Dictionary) -> f64 {
    let g = d.matrix().tr_mul(d.matrix());
    let n = g.nrows();
    (g.abs().sum() - n as f64) / (n * (n - 1)) as f64
}

fn main() -> ccr::Result<()> {
    let bank = clustered_bank(32, 20, 25f64.to_radians(), Seed(2))?;
    for r in [1.0, 1.5, 2.0, 4.0] {
        println!("r={r:.1}  mean |off-diagonal| {:.4}", mean_coherence(&concept_dispersion(&bank, r)?));
    }
    Ok(())
}
