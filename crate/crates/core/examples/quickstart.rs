use crowdelo::elo::{
    apply_match_sequence, binarize, rankings, BinarizeMode, EloConfig, MatchRecord,
};
use crowdelo::sim::{run_ensemble, SimParams};

fn main() -> crowdelo::Result<()> {
    let matches = [
        MatchRecord::new("p1", "p2", 1.0),
        MatchRecord::new("p1", "p2", 1.0),
        MatchRecord::new("p2", "p1", 0.5),
    ];
    let table = apply_match_sequence(&matches, &EloConfig::chess())?;
    let ranks = rankings(&table);
    let labels = binarize(&table, BinarizeMode::Median)?;
    for (item, rating) in table.iter() {
        println!(
            "{item}: {rating:.4} rank {} {}",
            ranks[item],
            labels[item].as_str()
        );
    }

    let params = SimParams {
        n_items: 128,
        n_raters: 50,
        threshold_diversity: 1.0,
        ..SimParams::default()
    }
    .with_task_ratio(3.0);
    let summary = run_ensemble(&params, 10)?;
    println!(
        "f1 comparison - majority = {:.3} ± {:.3}",
        summary.delta_f1.mean, summary.delta_f1.sem
    );
    Ok(())
}
