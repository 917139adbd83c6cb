//! Crowd ratings: drop per-pair outliers with the median absolute deviation
//! rule, average the rest, and compare Krippendorff's α before and after.
//!
//!     cargo run --example annotation_agreement

use std::path::Path;

use dialeval::annotation::{
    aggregate, interval_alpha, load_annotations, mad_filter, Dimension, DEFAULT_MAD_THRESHOLD,
};

fn main() -> dialeval::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let records = load_annotations(data.join("annotations.tsv"))?;

    // One rating group by hand.
    let group = [4.0, 4.0, 5.0, 1.0];
    let f = mad_filter(&group, DEFAULT_MAD_THRESHOLD)?;
    println!("group {group:?} -> kept {:?}, removed {:?}", f.kept, f.removed);

    // Three raters, four units, one rater missing a unit.
    let units = vec![vec![1.0, 1.0, 2.0], vec![3.0, 3.0], vec![5.0, 4.0, 5.0], vec![2.0, 2.0, 2.0]];
    let a = interval_alpha(&units)?;
    println!("toy alpha {:.4} ({})", a.alpha, a.interpretation.as_str());

    let agg = aggregate(&records, DEFAULT_MAD_THRESHOLD)?;
    for d in &agg.agreement {
        let show = |s: &Option<dialeval::annotation::AgreementStat>| {
            s.as_ref().map_or("n/a".to_string(), |s| format!("{:.3} {}", s.alpha, s.interpretation.as_str()))
        };
        println!(
            "{:<16} before {:<18} after {:<18} removed {}/{}",
            d.dimension.as_str(),
            show(&d.before),
            show(&d.after),
            d.removed,
            d.total
        );
    }
    let n = agg.labels.iter().filter(|l| l.dimension == Dimension::Appropriateness).count();
    println!("{n} appropriateness labels");
    Ok(())
}
