use std::fs;
use std::process::Command;

use nusc_lab::table::strip_provenance;
use nusc_lab::{run_experiment, run_to_dir, ExperimentConfig, LabError};

fn parse(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).unwrap()
}

const SMALL: [&str; 5] = [
    "experiment = \"loss_vs_p\"\nseed = 4\norders = [2]\nloss_method = \"monte_carlo\"\nsamples = 50\n",
    "experiment = \"deviation_vs_samples\"\nseed = 4\norders = [2]\nweights = [0.5]\nsample_counts = [5, 20]\nbatches = 3\n",
    "experiment = \"bernstein_trials\"\nseed = 4\nsamples = [2, 4]\ntrials = 5\nsteps = 4\n",
    "experiment = \"shots_tvd\"\nseed = 4\nrepetitions = 3\nshots = 101\ntimes = [0.05, 0.1]\n",
    "experiment = \"itebd_convergence\"\nseed = 4\nmodes = [\"k1\", \"averaged_k2\"]\ndtau_list = [0.1]\nmax_iterations = 20\nbond_dim = 4\n",
];

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for text in SMALL {
        let c = parse(text);
        let pa = run_to_dir(&c, a.path()).unwrap();
        let pb = run_to_dir(&c, b.path()).unwrap();
        assert_eq!(pa.len(), pb.len());
        for (x, y) in pa.iter().zip(&pb) {
            let (x, y) = (fs::read(x).unwrap(), fs::read(y).unwrap());
            assert!(!x.is_empty());
            assert_eq!(x, y, "{}", c.id());
        }
    }
}

#[test]
fn seed_changes_sampled_rows_only_through_the_config() {
    let mut c = parse(SMALL[3]);
    let first = run_experiment(&c).unwrap().table("").body().unwrap();
    c.set_seed(5);
    let second = run_experiment(&c).unwrap().table("").body().unwrap();
    assert_ne!(first, second);
}

#[test]
fn thread_count_does_not_change_rows() {
    let c = parse(SMALL[2]);
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let parallel = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let x = serial.install(|| run_experiment(&c).unwrap().table("").body().unwrap());
    let y = parallel.install(|| run_experiment(&c).unwrap().table("").body().unwrap());
    assert_eq!(x, y);
}

#[test]
fn loss_vs_p_minimum_is_near_the_two_term_optimum() {
    let c = parse("experiment = \"loss_vs_p\"\nseed = 1\norders = [2]\n");
    let out = run_experiment(&c).unwrap();
    let scan = out.table("");
    let (p, loss) = (scan.f64s("p"), scan.f64s("loss"));
    assert_eq!(p.len(), 21);
    let best = (0..p.len()).min_by(|&i, &j| loss[i].total_cmp(&loss[j])).unwrap();
    assert!((p[best] - 0.56).abs() <= 0.05, "grid minimum at {}", p[best]);
    let p_min = out.table("minima").f64s("p_min")[0];
    assert!((p_min - 0.56).abs() <= 0.05, "{p_min}");
}

#[test]
fn loss_vs_steps_mixture_is_an_order_of_magnitude_better() {
    let c = parse("experiment = \"loss_vs_steps\"\nseed = 1\nsteps = [10, 100, 1000]\n");
    let ratios = run_experiment(&c).unwrap().table("").f64s("ratio");
    assert!(ratios.iter().all(|&r| r <= 0.1), "{ratios:?}");
}

#[test]
fn shots_at_zero_time_have_zero_exact_distance() {
    let c = parse("experiment = \"shots_tvd\"\nseed = 1\nmode = \"exact\"\ntimes = [0.0]\n");
    let out = run_experiment(&c).unwrap();
    let s = out.table("summary");
    for col in ["tvd_exact_ab", "tvd_exact_ba", "tvd_exact_averaged"] {
        assert!(s.f64s(col)[0] < 1e-14);
    }
}

#[test]
fn invalid_configs_name_the_field() {
    let cases = [
        ("experiment = \"loss_vs_p\"\nseed = 1\npoints = 1\n", "points"),
        ("experiment = \"loss_vs_p\"\nseed = 1\n[model]\nname = \"xy_chain\"\nn = 4\n", "h"),
        ("experiment = \"loss_vs_p\"\nseed = 1\n[model]\nname = \"powerlaw_heisenberg\"\nn = 4\nalpha = 0\n", "model"),
        ("experiment = \"symmetry_size_scan\"\nseed = 1\nsizes = [9]\n", "sizes"),
        ("experiment = \"shots_tvd\"\nseed = 1\nshots = 0\n", "shots"),
        ("experiment = \"itebd_convergence\"\nseed = 1\n[model]\nname = \"xy_chain\"\nn = 4\nh = 1\n", "model"),
    ];
    for (text, field) in cases {
        match run_experiment(&parse(text)) {
            Err(e @ LabError::Config { .. }) => assert!(e.to_string().contains(field), "{e}"),
            other => panic!("{text}: {other:?}"),
        }
    }
}

#[test]
fn numerical_failures_map_to_exit_code_three() {
    let e: LabError = nusc_core::Error::NoConvergence {
        routine: "test",
        iterations: 1,
        residual: 1.0,
    }
    .into();
    assert_eq!(e.exit_code(), 3);
    let e: LabError = nusc_core::Error::UnknownModel("x".into()).into();
    assert_eq!(e.exit_code(), 2);
}

fn nusc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_nusc")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

#[test]
fn cli_runs_a_config_and_overrides_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, SMALL[3]).unwrap();
    let out = dir.path().join("out");
    let o = nusc(&[
        "shots_tvd",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "9",
        "--threads",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("shots_tvd.csv")).unwrap();
    assert!(text.contains("# seed = 9\n"));
    let body = strip_provenance(&text);
    assert!(body.starts_with("t,channel,mode,shots,repetition,seed,tvd\n"));
    assert_eq!(body.lines().count(), 1 + 2 * 3 * 3);
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(nusc(&["loss_vs_p", "--out", out]).status.code(), Some(2));
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "experiment = \"loss_vs_p\"\nseed = 1\nbogus = 1\n").unwrap();
    let o = nusc(&["loss_vs_p", "--config", cfg.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
    fs::write(&cfg, SMALL[0]).unwrap();
    let o = nusc(&["shots_tvd", "--config", cfg.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(nusc(&["no_such_experiment"]).status.code(), Some(2));
    assert_eq!(nusc(&["loss_vs_p", "--seed", "1", "--out", out]).status.code(), Some(0));
}
