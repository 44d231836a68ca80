//! End-to-end tests of the `adaptscan` binary: golden outputs, exit codes and
//! seeded determinism. Set `UPDATE_GOLDEN=1` to rewrite the golden files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const MODELS: [&str; 9] = [
    "example1",
    "bathtub",
    "viral",
    "nfbn",
    "protein",
    "enzyme",
    "enzyme_rewritten",
    "ifflp",
    "ifflp_rewritten",
];

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adaptscan")).args(args).current_dir(root()).output().expect("spawn adaptscan")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn model_path(name: &str) -> String {
    format!("models/{name}.com")
}

/// `(golden file stem, arguments, expected exit code)`.
fn golden_cases() -> Vec<(String, Vec<String>, i32)> {
    let mut cases = Vec::new();
    for model in MODELS {
        for mode in ["equilibrium", "dynamic"] {
            let code = if model == "enzyme" && mode == "equilibrium" { 2 } else { 0 };
            for (cmd, format) in [("order", "dot"), ("order", "csv"), ("markov", "dot"), ("markov", "csv")] {
                cases.push((
                    format!("{cmd}_{model}_{mode}_{format}"),
                    [cmd, &model_path(model), "--mode", mode, "--format", format].map(String::from).to_vec(),
                    code,
                ));
            }
        }
    }
    let simple: &[(&str, &[&str])] = &[
        ("adapt_bathtub", &["adapt", "models/bathtub.com", "--input", "I_K"]),
        ("adapt_viral", &["adapt", "models/viral.com", "--input", "I_sigma"]),
        ("adapt_nfbn", &["adapt", "models/nfbn.com", "--input", "I"]),
        ("adapt_protein", &["adapt", "models/protein.com", "--input", "I"]),
        ("adapt_ifflp", &["adapt", "models/ifflp.com", "--input", "I"]),
        ("adapt_enzyme_rewritten", &["adapt", "models/enzyme_rewritten.com", "--input", "k_1"]),
        ("dsep_protein_I_r", &["dsep", "models/protein.com", "--a", "I", "--b", "v_r"]),
        ("dsep_protein_I_s_given_e", &["dsep", "models/protein.com", "--a", "I", "--b", "s", "--given", "e"]),
        ("dsep_bathtub_I_D_given_P", &["dsep", "models/bathtub.com", "--a", "I", "--b", "D", "--given", "P"]),
        ("detect_bathtub_f_O", &["detect", "models/bathtub.com", "--target", "f_O"]),
        ("detect_viral_f_E", &["detect", "models/viral.com", "--target", "f_E"]),
        ("detect_nfbn_f_C", &["detect", "models/nfbn.com", "--target", "f_C"]),
        ("detect_protein_f_e", &["detect", "models/protein.com", "--target", "f_e"]),
        ("step_bathtub", &["step", "models/bathtub.com", "--input", "I_K", "--pre", "1.2", "--post", "0.8"]),
        (
            "intervene_protein_k_me",
            &["intervene", "models/protein.com", "--param", "k_me", "--pre", "1.1", "--post", "1.0", "--dt", "0.01"],
        ),
        ("simulate_bathtub", &["simulate", "models/bathtub.com", "--t-max", "2", "--every", "0.5", "--schedule", "1:I_K=0.8"]),
        ("sample_bathtub", &["sample", "models/bathtub.com", "--n", "8", "--seed", "7", "--vary", "U_I=uniform(4,6)"]),
    ];
    for (name, args) in simple {
        cases.push((name.to_string(), args.iter().map(|s| s.to_string()).collect(), 0));
    }
    cases
}

#[test]
fn golden_outputs() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    if update {
        fs::create_dir_all(&dir).unwrap();
    }
    let mut mismatches = Vec::new();
    for (name, args, code) in golden_cases() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = run(&args);
        assert_eq!(o.status.code(), Some(code), "{name}: {}", stderr(&o));
        let path = dir.join(format!("{name}.txt"));
        let got = stdout(&o);
        if update {
            fs::write(&path, &got).unwrap();
        } else {
            let want = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            if got != want {
                mismatches.push(name);
            }
        }
    }
    assert!(mismatches.is_empty(), "outputs differ from goldens: {mismatches:?}");
}

#[test]
fn documented_examples() {
    let o = run(&["order", "models/bathtub.com", "--mode", "equilibrium"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("subgraph cluster_").count(), 4);

    let o = run(&["adapt", "models/protein.com", "--input", "I"]);
    let adapting: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .filter(|l| l.ends_with(",true"))
        .map(|l| l.split(',').next().unwrap().to_string())
        .collect();
    assert_eq!(adapting, ["s", "r", "m"]);

    assert_eq!(stdout(&run(&["dsep", "models/protein.com", "--a", "I", "--b", "v_r"])), "separated\n");
    assert_eq!(stdout(&run(&["dsep", "models/protein.com", "--a", "I", "--b", "e"])), "connected\n");
}

#[test]
fn exit_codes() {
    let o = run(&["order", "models/enzyme.com", "--mode", "equilibrium"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("models/enzyme.com") && err.contains("no perfect matching"), "{err}");
    assert!(err.contains("f_CE"), "{err}");

    assert_eq!(run(&["order"]).status.code(), Some(1));
    assert_eq!(run(&["order", "bathtub", "--mode", "sideways"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["sample", "bathtub", "--vary", "U_I"]).status.code(), Some(1));
    assert_eq!(run(&["order", "models/missing.com"]).status.code(), Some(2));
    assert_eq!(run(&["adapt", "bathtub", "--input", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["dsep", "bathtub", "--a", "I", "--b", "I"]).status.code(), Some(2));

    let o = run(&["step", "bathtub", "--input", "I_K", "--pre", "1.2", "--post", "0.8", "--t-max", "1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("no equilibrium"));
}

#[test]
fn bundled_model_names_resolve() {
    let by_name = run(&["order", "viral", "--format", "csv"]);
    let by_path = run(&["order", "models/viral.com", "--format", "csv"]);
    assert_eq!(by_name.status.code(), Some(0));
    assert_eq!(by_name.stdout, by_path.stdout);
}

#[test]
fn seed_determines_sample() {
    let args = |seed: &'static str| ["sample", "protein", "--n", "12", "--seed", seed, "--dt", "0.02"];
    let a = run(&args("11"));
    let b = run(&args("11"));
    let c = run(&args("12"));
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert!(stdout(&a).starts_with("# seed=11\ns,r,m,e,F_s,F_r,F_m,F_e\n"));

    let out = std::env::temp_dir().join(format!("adaptscan-sample-{}.csv", std::process::id()));
    let mut with_out: Vec<String> = args("11").map(String::from).to_vec();
    with_out.extend(["--out".to_string(), out.display().to_string()]);
    let o = run(&with_out.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(fs::read(&out).unwrap(), a.stdout);
    fs::remove_file(out).unwrap();
}

fn temp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("adaptscan-{}-{name}", std::process::id()))
}

fn sample_to(path: &Path, extra: &[&str]) {
    let p = path.display().to_string();
    let mut args = vec!["sample", "bathtub", "--n", "60", "--vary", "U_I=uniform(4,6)", "--vary", "U_5=uniform(0.7,0.9)", "--vary", "U_3=uniform(1.0,1.4)"];
    args.extend_from_slice(extra);
    args.extend(["--out", &p]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn data_side_detection() {
    let (base, shifted) = (temp("base.csv"), temp("shifted.csv"));
    sample_to(&base, &["--seed", "1"]);
    // A soft intervention on f_O: a smaller drain constant U_5.
    sample_to(&shifted, &["--seed", "2", "--vary", "U_5=uniform(0.4,0.5)"]);
    let (b, s) = (base.display().to_string(), shifted.display().to_string());
    let o = run(&["detect", "bathtub", "--target", "f_O", "--baseline", &b, "--intervened", &s]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let row: Vec<String> = stdout(&o).lines().nth(1).unwrap().split(',').map(String::from).collect();
    assert_eq!(row[..4], ["f_O", "v_O", "true", "false"]);
    assert_eq!(row[5], "adaptation_detected");

    let o = run(&["detect", "bathtub", "--target", "f_O", "--baseline", &b, "--intervened", &b]);
    assert!(stdout(&o).ends_with(",inconclusive\n"), "{}", stdout(&o));

    // I and D are d-separated given P at equilibrium.
    let o = run(&["indep-table", &b, "--columns", "I,P,D", "--model", "bathtub"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("i,j,given,rho,p,independent,separated\n"));
    let row = text.lines().find(|l| l.starts_with("I,D,P,")).unwrap();
    assert!(row.ends_with(",true,true"), "{row}");

    assert_eq!(run(&["detect", "bathtub", "--target", "f_O", "--baseline", &b]).status.code(), Some(1));
    fs::remove_file(base).unwrap();
    fs::remove_file(shifted).unwrap();
}

#[test]
fn lcd_on_a_chain_dataset() {
    let path = temp("chain.csv");
    // C -> x -> y with deterministic pseudo-random noise.
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut csv = String::from("C,x,y\n");
    for _ in 0..400 {
        let c = next();
        let x = c + next();
        let y = x + next();
        csv.push_str(&format!("{c},{x},{y}\n"));
    }
    fs::write(&path, csv).unwrap();
    let o = run(&["lcd", &path.display().to_string(), "--context", "C"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).map(|l| &l[..5]).collect();
    assert_eq!(rows, ["C,x,y"]);
    fs::remove_file(path).unwrap();
}
