//! Golden-file regression over the reference experiment profiles. The
//! files under tests/golden/ were written by the `regenerate` test after
//! the first validated run; any drift past GOLDEN_PROFILE_TOL in a later
//! build is a regression, not noise.
//!
//! To refresh after an intentional physics change:
//!     cargo test -p magnon-core --test golden -- --ignored regenerate

use magnon_core::experiments::{figure_run, FigureId};
use magnon_core::export::{read_profile_csv, write_profile_csv};
use magnon_core::tolerances::GOLDEN_PROFILE_TOL;
use std::path::PathBuf;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

const EXPECTED_STEMS: [&str; 10] = [
    "fig1a_t15",
    "fig1a_t45",
    "fig1b_t15",
    "fig1b_t60",
    "fig2a",
    "fig2b",
    "fig2c",
    "fig3a",
    "fig3b",
    "fig3c",
];

#[test]
fn profiles_match_goldens() {
    let dir = golden_dir();
    let mut seen = Vec::new();
    for id in FigureId::ALL {
        let run = figure_run(id).unwrap();
        for capture in &run.captures {
            let path = dir.join(format!("{}.csv", capture.file_stem));
            let golden = read_profile_csv(&path)
                .unwrap_or_else(|e| panic!("missing or unreadable golden {path:?}: {e}"));
            assert_eq!(
                golden.n_sites(),
                capture.profile.n_sites(),
                "{}: site count changed",
                capture.file_stem
            );
            for m in 1..=golden.n_sites() {
                let (want, got) = (golden.probability(m), capture.profile.probability(m));
                assert!(
                    (want - got).abs() <= GOLDEN_PROFILE_TOL,
                    "{} site {m}: golden {want:e}, got {got:e}",
                    capture.file_stem
                );
            }
            seen.push(capture.file_stem.clone());
        }
    }
    let mut expected: Vec<String> = EXPECTED_STEMS.iter().map(|s| s.to_string()).collect();
    expected.sort();
    seen.sort();
    assert_eq!(seen, expected, "capture set drifted from the frozen panels");
}

#[test]
#[ignore = "rewrites the golden files; run deliberately"]
fn regenerate() {
    let dir = golden_dir();
    std::fs::create_dir_all(&dir).unwrap();
    for id in FigureId::ALL {
        let run = figure_run(id).unwrap();
        for capture in &run.captures {
            let path = dir.join(format!("{}.csv", capture.file_stem));
            write_profile_csv(&capture.profile, &path).unwrap();
            println!("wrote {path:?}");
        }
    }
}
