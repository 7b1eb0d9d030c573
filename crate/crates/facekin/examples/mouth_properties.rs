//! The five per-frame mouth properties (TB, WM, left/right/total area) in
//! pixel space and in world space.
//!
//! ```bash
//! cargo run -p facekin --example mouth_properties
//! ```

use facekin::kinematics::{mouth_properties, MouthLandmarks};
use facekin::model::{landmarks, Dimensionality, LandmarkFrame, LANDMARK_COUNT};

fn frame_2d(top: [f64; 2], bottom: [f64; 2], left: [f64; 2], right: [f64; 2]) -> LandmarkFrame {
    let mut pixels = vec![[0.0, 0.0]; LANDMARK_COUNT];
    pixels[landmarks::LIP_TOP] = top;
    pixels[landmarks::LIP_BOTTOM] = bottom;
    pixels[landmarks::MOUTH_LEFT] = left;
    pixels[landmarks::MOUTH_RIGHT] = right;
    LandmarkFrame::from_pixels(0.0, &pixels)
}

fn main() {
    let lm = MouthLandmarks::default();
    println!(
        "mouth landmarks (iBUG 300-W outer lip): top={} bottom={} left={} right={}\n",
        lm.lip_top, lm.lip_bottom, lm.mouth_left, lm.mouth_right
    );

    // symmetric open mouth in pixel space
    let open = frame_2d(
        [320.0, 250.0],
        [320.0, 270.0],
        [300.0, 260.0],
        [340.0, 260.0],
    );
    let p = mouth_properties(&open, Dimensionality::D2, &lm).unwrap();
    println!("open mouth (pixels):");
    println!("  TB = {:.1} px, WM = {:.1} px", p.tb, p.wm);
    println!(
        "  AreaLeft = {:.1} px², AreaRight = {:.1} px², Area = {:.1} px²",
        p.area_left, p.area_right, p.area
    );

    // one-sided smile: image-right commissure pulled wider
    let smile = frame_2d(
        [320.0, 252.0],
        [320.0, 268.0],
        [302.0, 260.0],
        [352.0, 260.0],
    );
    let p = mouth_properties(&smile, Dimensionality::D2, &lm).unwrap();
    println!("\nasymmetric smile (pixels):");
    println!("  TB = {:.1} px, WM = {:.1} px", p.tb, p.wm);
    println!(
        "  AreaLeft = {:.1} px², AreaRight = {:.1} px² (left/right ratio {:.2})",
        p.area_left,
        p.area_right,
        p.area_left / p.area_right
    );

    // the same measurements on world-space landmarks (meters)
    let mut world = frame_2d([0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]);
    world.points[landmarks::LIP_TOP] = [0.0, 0.010, 0.40];
    world.points[landmarks::LIP_BOTTOM] = [0.0, -0.010, 0.40];
    world.points[landmarks::MOUTH_LEFT] = [-0.020, 0.0, 0.40];
    world.points[landmarks::MOUTH_RIGHT] = [0.020, 0.0, 0.40];
    let p = mouth_properties(&world, Dimensionality::D3, &lm).unwrap();
    println!("\nopen mouth (world coordinates):");
    println!(
        "  TB = {:.3} m, WM = {:.3} m, Area = {:.2e} m²",
        p.tb, p.wm, p.area
    );
}
