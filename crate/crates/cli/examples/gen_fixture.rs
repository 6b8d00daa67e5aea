//! Regenerates `fixtures/attack_stream.jsonl` deterministically.
//!
//! The fixture is a 1000-record adversarial stream with a known structure
//! so tests can compute expected statistics from first principles:
//!
//! - target losses are distinct: the rank-r record (rank 1 = highest) has
//!   `target_loss = (1001 - r) / 10`;
//! - surrogate losses are the target plus bounded uniform noise, clamped
//!   to stay non-negative;
//! - `fooled` is true for exactly the top 5 ranks, false for ranks 6-10,
//!   and true for exactly 295 of the remaining 990 records, so the base
//!   fool rate is exactly 300/1000 = 0.3 while the top-10 fool rate is
//!   exactly 5/10 = 0.5;
//! - arrival order is a fixed shuffle of the rank order.
//!
//! Run with: cargo run -p seclab-cli --example gen_fixture

use std::fs;
use std::path::Path;

use rand::prelude::*;
use serde_json::json;

fn main() {
    let n = 1000usize;
    let mut rng = StdRng::seed_from_u64(0x5EC1AB);

    // Which of the 990 below-top-10 ranks (11..=1000) are fooled.
    let extra_fooled: Vec<usize> = rand::seq::index::sample(&mut rng, 990, 295)
        .into_iter()
        .map(|offset| offset + 11)
        .collect();

    let mut records: Vec<String> = (1..=n)
        .map(|rank| {
            let target = (1001 - rank) as f64 / 10.0;
            let noise = (rng.gen::<f64>() - 0.5) * 10.0;
            let surrogate = (target + noise).max(0.0);
            let fooled = rank <= 5 || extra_fooled.contains(&rank);
            json!({
                "id": format!("adv-{rank:04}"),
                "surrogate_loss": surrogate,
                "target_loss": target,
                "fooled": fooled,
            })
            .to_string()
        })
        .collect();
    records.shuffle(&mut rng);

    let body = records.join("\n") + "\n";
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/attack_stream.jsonl");
    fs::create_dir_all(path.parent().unwrap()).expect("fixtures dir");
    fs::write(&path, body).expect("write fixture");

    let fooled_total = 5 + extra_fooled.len();
    println!(
        "wrote {} records to {} ({} fooled, base rate {})",
        n,
        path.display(),
        fooled_total,
        fooled_total as f64 / n as f64
    );
}
