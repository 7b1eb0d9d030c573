//! The 13 per-repetition features of a synthetic mouth movement, compared
//! against their closed-form expected values.
//!
//! ```bash
//! cargo run -p facekin --example extract_features
//! ```

use facekin::kinematics::{extract_features, rest_factors, FeatureOptions, MouthLandmarks};
use facekin::model::{Task, FEATURE_NAMES};
use facekin::segmentation::rest_window;
use facekin::synth::{gen_trajectory, MotionArchetype};

fn main() {
    let archetype = MotionArchetype {
        tb_amplitude: 0.5,
        wm_amplitude: 0.3,
        rate: 1.0, // Hz
        asymmetry: 0.8,
        jitter_sd: 0.0,
        seed: 0,
    };

    // one 2 s repetition plus the subject's REST recording
    let (repetition, truth) = gen_trajectory(&archetype, Task::Bbp, 2.0, 30.0, None).unwrap();
    let (rest, _) = gen_trajectory(&archetype, Task::Rest, 20.0, 30.0, None).unwrap();

    // normalization factors from the middle 5 s of REST
    let window = rest_window(&rest, 5.0).unwrap();
    let factors = rest_factors(&window, &MouthLandmarks::default()).unwrap();
    println!(
        "rest means: TB {:.2} px, WM {:.2} px, Area {:.1} px²",
        factors.mean_tb, factors.mean_wm, factors.mean_area
    );

    let features = extract_features(&repetition, &factors, &FeatureOptions::default()).unwrap();

    let expected = [
        Some(truth.delta_tb),
        Some(truth.max_vel_tb),
        Some(truth.min_vel_tb),
        Some(truth.max_acc_tb),
        Some(truth.min_acc_tb),
        Some(truth.delta_wm),
        Some(truth.max_vel_wm),
        Some(truth.min_vel_wm),
        Some(truth.max_acc_wm),
        Some(truth.min_acc_wm),
        Some(truth.mean_area),
        Some(truth.delta_area),
        truth.ccc_area,
    ];

    println!(
        "\n{:<12} {:>12} {:>12} {:>8}",
        "feature", "extracted", "analytic", "error"
    );
    for ((name, got), want) in FEATURE_NAMES.iter().zip(features.as_array()).zip(expected) {
        match want {
            Some(w) if w.abs() > 1e-12 => println!(
                "{name:<12} {got:>12.4} {w:>12.4} {:>7.2}%",
                100.0 * (got - w).abs() / w.abs()
            ),
            Some(w) => println!("{name:<12} {got:>12.4} {w:>12.4}"),
            None => println!("{name:<12} {got:>12.4} {:>12}", "n/a"),
        }
    }
    println!("\n(normalized units: ranges are dimensionless, velocities 1/s, accelerations 1/s²)");
}
