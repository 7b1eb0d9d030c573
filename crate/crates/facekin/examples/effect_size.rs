//! Standardized mean difference from group summary statistics, with
//! magnitude classification (small < 0.5 <= medium < 0.8 <= large).
//!
//! ```bash
//! cargo run -p facekin --example effect_size
//! ```

use facekin::statistics::{classify_smd, smd, smd_from_summary};

fn main() {
    // from raw per-subject values
    let controls = [1.9, 2.4, 1.6, 2.8, 2.1, 1.7, 2.5, 2.2, 1.8, 2.9, 2.0, 2.3];
    let patients = [1.2, 1.6, 1.1, 1.5, 1.3, 0.9, 1.4, 1.2];
    let d = smd(&controls, &patients).unwrap();
    println!(
        "raw groups (n={} vs n={}): SMD = {:.2} ({})",
        controls.len(),
        patients.len(),
        d,
        classify_smd(d)
    );

    // from published-style summary statistics (mean, sd, n per group)
    println!("\nfrom summary statistics:");
    for (label, m1, s1, n1, m2, s2, n2) in [
        ("vertical opening range", 1.7, 0.9, 12, 1.1, 0.3, 8),
        ("max opening velocity  ", 19.2, 6.2, 12, 14.1, 4.7, 8),
        ("area concordance      ", 0.8, 0.2, 12, 0.5, 0.3, 8),
        ("identical groups      ", 2.0, 0.5, 10, 2.0, 0.5, 10),
    ] {
        let d = smd_from_summary(m1, s1, n1, m2, s2, n2).unwrap();
        println!(
            "  {label}  HC {m1}±{s1} (n={n1}) vs PD {m2}±{s2} (n={n2})  ->  SMD = {d:.2} ({})",
            classify_smd(d)
        );
    }

    println!("\nthe same computation is available on the command line:");
    println!("  facekin smd --mu1 1.7 --sd1 0.9 --n1 12 --mu2 1.1 --sd2 0.3 --n2 8");
}
