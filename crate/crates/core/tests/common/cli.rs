use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub exit: i32,
}

/// Every golden run; stdout is frozen in `tests/golden/<name>.out`.
pub const CASES: &[Case] = &[
    Case {
        name: "dice_update",
        args: &["update", "tests/golden/dice_update.json"],
        exit: 0,
    },
    Case {
        name: "dice_update_table",
        args: &["--format", "table", "update", "tests/golden/dice_update.json"],
        exit: 0,
    },
    Case {
        name: "infeasible",
        args: &["update", "tests/golden/infeasible.json"],
        exit: 2,
    },
    Case {
        name: "maxent",
        args: &["maxent", "tests/golden/maxent.json"],
        exit: 0,
    },
    Case {
        name: "bayes_both",
        args: &["bayes", "--method", "both", "tests/golden/bayes.json"],
        exit: 0,
    },
    Case {
        name: "bayes_mre_table",
        args: &[
            "--format",
            "table",
            "bayes",
            "--method",
            "mre",
            "tests/golden/bayes.json",
        ],
        exit: 0,
    },
    Case {
        name: "mle_geometric",
        args: &["mle", "tests/golden/mle_geometric.json"],
        exit: 0,
    },
    Case {
        name: "mle_categorical",
        args: &["mle", "tests/golden/mle_categorical.json"],
        exit: 0,
    },
    Case {
        name: "converge",
        args: &["converge", "tests/golden/converge.json"],
        exit: 0,
    },
    Case {
        name: "converge_table",
        args: &["--format", "table", "converge", "tests/golden/converge.json"],
        exit: 0,
    },
    Case {
        name: "info_entropy",
        args: &["info", "entropy", "tests/golden/die_posterior.json"],
        exit: 0,
    },
    Case {
        name: "info_kl",
        args: &[
            "info",
            "kl",
            "tests/golden/die_posterior.json",
            "tests/golden/die_fair.json",
        ],
        exit: 0,
    },
    Case {
        name: "info_tv",
        args: &[
            "info",
            "tv",
            "tests/golden/die_posterior.json",
            "tests/golden/die_fair.json",
        ],
        exit: 0,
    },
    Case {
        name: "info_gain",
        args: &["info", "gain", "0.25", "0.5"],
        exit: 0,
    },
    Case {
        name: "unknown_field",
        args: &["update", "tests/golden/unknown_field.json"],
        exit: 1,
    },
    Case {
        name: "malformed",
        args: &["update", "tests/golden/malformed.json"],
        exit: 1,
    },
];

pub fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

pub fn mre(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mre"))
        .args(args)
        .current_dir(crate_dir())
        .output()
        .expect("binary runs")
}

pub fn golden_path(name: &str) -> PathBuf {
    crate_dir().join("tests/golden").join(format!("{name}.out"))
}

/// Runs a case and compares stdout with its golden file. Set
/// `MRE_BLESS=1` to rewrite the goldens instead.
pub fn check_case(case: &Case) -> Result<Vec<u8>, String> {
    let out = mre(case.args);
    let code = out.status.code().unwrap_or(-1);
    if code != case.exit {
        return Err(format!(
            "{}: exit {code}, expected {}; stderr: {}",
            case.name,
            case.exit,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let path = golden_path(case.name);
    if std::env::var_os("MRE_BLESS").is_some() {
        std::fs::write(&path, &out.stdout).map_err(|e| e.to_string())?;
    }
    let golden = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if golden != out.stdout {
        return Err(format!("{}: stdout differs from {}", case.name, path.display()));
    }
    Ok(out.stdout)
}

/// Two consecutive runs, byte for byte, plus the golden comparison.
pub fn check_deterministic(case: &Case) -> Result<(), String> {
    let first = check_case(case)?;
    let second = mre(case.args);
    if first != second.stdout {
        return Err(format!("{}: output changed between runs", case.name));
    }
    Ok(())
}

/// Writes the dice posterior through `--output`, re-reads it, and returns
/// the largest weight difference against the in-memory solve.
pub fn round_trip_error() -> f64 {
    use mre::{solve_mre, ConstraintSet, Distribution, DistributionDoc, OutcomeSpace, SolverOptions};

    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let file = dir.join(format!("round_trip_{}.json", std::process::id()));
    let out = mre(&[
        "update",
        "tests/golden/dice_update.json",
        "--output",
        file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&file).unwrap();
    let _ = std::fs::remove_file(&file);

    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let doc: DistributionDoc = serde_json::from_value(value["posterior"].clone()).unwrap();
    let reread = Distribution::try_from(doc).unwrap();

    let space = OutcomeSpace::integers(1, 6).unwrap();
    let prior = Distribution::new(space.clone(), vec![1.0; 6]).unwrap();
    let c = ConstraintSet::new(space)
        .with_moment((1..=6).map(f64::from).collect(), 4.5)
        .unwrap();
    let sol = solve_mre(&prior, &c, &SolverOptions::default()).unwrap();
    reread
        .weights()
        .iter()
        .zip(sol.posterior.weights())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}
