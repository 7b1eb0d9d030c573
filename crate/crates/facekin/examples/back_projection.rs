//! Pinhole geometry: pixels + depth to world coordinates and back, plus the
//! gap policy that bridges missing depth readings.
//!
//! ```bash
//! cargo run -p facekin --example back_projection
//! ```

use facekin::model::{CameraIntrinsics, Dimensionality, Group, LandmarkFrame, Task, Trajectory};
use facekin::reconstruction::{back_project, project, reconstruct_trajectory, GapPolicy};

fn main() {
    let k = CameraIntrinsics {
        fx: 600.0,
        fy: 600.0,
        cx: 320.0,
        cy: 240.0,
        width: 640,
        height: 480,
    };

    println!("intrinsics: fx={} fy={} c=({}, {})", k.fx, k.fy, k.cx, k.cy);
    for (u, v, z) in [
        (320.0, 240.0, 0.40),
        (400.0, 300.0, 0.50),
        (920.0, 240.0, 1.00),
    ] {
        let w = back_project(u, v, z, &k).unwrap();
        let (u2, v2) = project(&w, &k).unwrap();
        println!(
            "pixel ({u:>5.1}, {v:>5.1}) at z={z:.2} m -> world ({:+.4}, {:+.4}, {:.2}) m -> \
             pixel ({u2:.1}, {v2:.1})",
            w.x, w.y, w.z
        );
    }

    // A 12-frame trajectory where one landmark loses its depth reading for
    // two frames; the default policy bridges the gap by linear interpolation.
    let frames: Vec<LandmarkFrame> = (0..12)
        .map(|i| {
            let pixels: Vec<[f64; 2]> = (0..68).map(|j| [200.0 + j as f64, 220.0]).collect();
            let mut frame = LandmarkFrame::from_pixels(i as f64 / 30.0, &pixels);
            let mut depth = vec![0.40 + 0.002 * i as f64; 68];
            if (5..7).contains(&i) {
                depth[30] = 0.0; // no reading for the nose tip
            }
            frame.depth = Some(depth);
            frame
        })
        .collect();
    let t2d = Trajectory {
        subject_id: "demo".into(),
        group: Group::Hc,
        task: Task::Bbp,
        dimensionality: Dimensionality::D2,
        frames,
        nominal_fps: 30.0,
    };

    let t3d = reconstruct_trajectory(&t2d, &k, &GapPolicy::default()).unwrap();
    println!(
        "\nreconstructed {} frames; landmark 30 depth across the gap:",
        t3d.frames.len()
    );
    for i in 3..9 {
        let p = t3d.frames[i].points[30];
        println!(
            "  frame {i}: z = {:.4} m{}",
            p[2],
            if (5..7).contains(&i) {
                "  (interpolated)"
            } else {
                ""
            }
        );
    }
}
