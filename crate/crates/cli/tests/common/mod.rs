#![allow(dead_code)]

//! Helpers for driving the compiled binary. The PFM reader/writer here is an
//! independent re-implementation so file-format tests do not share code with
//! the binary under test.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gradshop"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn gradshop")
}

pub fn assert_exit(out: &Output, code: i32, what: &str) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "{what}: stdout={} stderr={}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

pub fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join("gradshop_cli_tests")
        .join(format!("{name}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Minimal grayscale PFM writer (little-endian, bottom-up rows).
pub fn write_pfm(path: &Path, rows: usize, cols: usize, values: &[f32]) {
    assert_eq!(values.len(), rows * cols);
    let mut bytes = format!("Pf\n{cols} {rows}\n-1.0\n").into_bytes();
    for r in (0..rows).rev() {
        for c in 0..cols {
            bytes.extend_from_slice(&values[r * cols + c].to_le_bytes());
        }
    }
    std::fs::write(path, bytes).unwrap();
}

/// Minimal PFM reader returning (rows, cols, channels, top-down values).
pub fn read_pfm(path: &Path) -> (usize, usize, usize, Vec<f32>) {
    let bytes = std::fs::read(path).unwrap();
    let mut pos = 0usize;
    let line = |pos: &mut usize| -> String {
        let start = *pos;
        while bytes[*pos] != b'\n' {
            *pos += 1;
        }
        let s = String::from_utf8(bytes[start..*pos].to_vec()).unwrap();
        *pos += 1;
        s
    };
    let magic = line(&mut pos);
    let channels = match magic.as_str() {
        "Pf" => 1,
        "PF" => 3,
        other => panic!("bad magic {other:?}"),
    };
    let dims = line(&mut pos);
    let mut it = dims.split_whitespace();
    let cols: usize = it.next().unwrap().parse().unwrap();
    let rows: usize = it.next().unwrap().parse().unwrap();
    let scale: f32 = line(&mut pos).parse().unwrap();
    assert!(scale < 0.0, "expected little-endian PFM");
    let mut bottom_up = Vec::with_capacity(rows * cols * channels);
    for chunk in bytes[pos..].chunks_exact(4) {
        bottom_up.push(f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]));
    }
    assert_eq!(bottom_up.len(), rows * cols * channels);
    let row_len = cols * channels;
    let mut values = vec![0.0f32; rows * cols * channels];
    for r in 0..rows {
        values[r * row_len..(r + 1) * row_len]
            .copy_from_slice(&bottom_up[(rows - 1 - r) * row_len..(rows - r) * row_len]);
    }
    (rows, cols, channels, values)
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}
