//! The interchange formats: write and re-read a landmark stream, repetition
//! annotations and camera intrinsics, then cut the recording into
//! repetitions.
//!
//! ```bash
//! cargo run -p facekin --example landmark_files
//! ```

use facekin::io;
use facekin::model::{Group, Task};
use facekin::segmentation::split_repetitions;
use facekin::synth::{gen_trajectory, MotionArchetype};
use std::io::Cursor;

fn main() {
    let archetype = MotionArchetype {
        seed: 7,
        ..Default::default()
    };
    let (trajectory, _) = gen_trajectory(&archetype, Task::Bbp, 5.0, 30.0, None).unwrap();

    // landmark stream: one JSON record per frame
    let mut stream = Vec::new();
    io::write_landmark_stream(&trajectory, &mut stream).unwrap();
    let text = String::from_utf8(stream.clone()).unwrap();
    let first_line = text.lines().next().unwrap();
    println!(
        "landmark stream: {} lines, first record (truncated):",
        text.lines().count()
    );
    println!("  {}...\n", &first_line[..90.min(first_line.len())]);

    let meta = io::StreamMeta {
        subject_id: "demo-01".into(),
        group: Group::Hc,
        task: Task::Bbp,
        nominal_fps: 30.0,
    };
    let parsed = io::parse_landmark_stream(Cursor::new(stream), &meta).unwrap();
    println!(
        "parsed back: {} frames spanning {:.2} s for subject {}\n",
        parsed.frames.len(),
        parsed.duration(),
        parsed.subject_id
    );

    // annotations mark two repetitions inside the recording
    let ann_text = concat!(
        r#"{"task":"BBP","repetition_index":1,"start":0.5,"end":2.0}"#,
        "\n",
        r#"{"task":"BBP","repetition_index":2,"start":2.6,"end":4.4}"#,
        "\n"
    );
    let annotations = io::parse_annotations(Cursor::new(ann_text)).unwrap();
    let reps = split_repetitions(&parsed, &annotations).unwrap();
    for rep in &reps {
        println!(
            "repetition {}: {} frames, [{:.2}, {:.2}] s",
            rep.index,
            rep.trajectory.frames.len(),
            rep.trajectory.frames.first().unwrap().timestamp,
            rep.trajectory.frames.last().unwrap().timestamp,
        );
    }

    // intrinsics file
    let k_text = r#"{"fx":600.0,"fy":600.0,"cx":320.0,"cy":240.0,"width":640,"height":480}"#;
    let k = io::parse_intrinsics(Cursor::new(k_text)).unwrap();
    println!(
        "\nintrinsics: {}x{} sensor, f = ({}, {}) px",
        k.width, k.height, k.fx, k.fy
    );

    // malformed input produces a structured error, not a crash
    let bad = r#"{"t":0.0,"pts":[[1.0,2.0]]}"#;
    let err = io::parse_landmark_stream(Cursor::new(bad), &meta).unwrap_err();
    println!("\nmalformed stream rejected: {err}");
}
