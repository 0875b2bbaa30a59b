use std::fs;
use std::io::Cursor;
use std::path::Path;

use haydys::cli::{self, EXIT_DATA, EXIT_OK, EXIT_USAGE};
use haydys::hmf1::{FieldData, Hmf1, Hmf1Error};
use haydys_core::bps::{self, Configuration};
use haydys_core::{rng, Grid};
use serde_json::Value;

fn run(args: &[&str]) -> Result<cli::Outcome, cli::CliError> {
    cli::run(std::iter::once("haydys").chain(args.iter().copied()))
}

fn code(args: &[&str]) -> i32 {
    match run(args) {
        Ok(o) => o.code,
        Err(e) => e.exit_code(),
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn hmf1_round_trips_bit_for_bit() {
    let g = Grid::with_radius(9, 1.0).unwrap();
    let mut r = rng::seeded(1);
    let c = Configuration::random(&g, &mut r);
    let file = Hmf1::from_configuration(&c);
    let mut bytes = Vec::new();
    file.write_to(&mut bytes).unwrap();
    assert_eq!(&bytes[..4], b"HMF1");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 9);
    assert_eq!(f64::from_le_bytes(bytes[8..16].try_into().unwrap()), 0.25);
    assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 4);
    let header = 4 + 4 + 8 + 4;
    let per_field = |name: &str, rank: usize| 2 + name.len() + 1 + 729 * 3 * 8 * if rank == 1 { 3 } else { 1 };
    assert_eq!(bytes.len(), header + per_field("nabla", 1) + per_field("phi", 0) + per_field("a", 1) + per_field("psi", 0));
    // first payload value: x-fastest site 0, component dx¹, first coefficient
    let off = header + 2 + 5 + 1;
    assert_eq!(f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()), c.nabla.data[0][0].0[0]);
    let back = Hmf1::read_from(Cursor::new(&bytes)).unwrap();
    assert_eq!(back, file);
    assert_eq!(back.to_configuration().unwrap(), c);
}

#[test]
fn hmf1_rejects_corruption() {
    let g = Grid::with_radius(9, 1.0).unwrap();
    let mut bytes = Vec::new();
    Hmf1::from_configuration(&bps::bps_seed(&g)).write_to(&mut bytes).unwrap();
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(Hmf1::read_from(Cursor::new(&bad)), Err(Hmf1Error::BadMagic(_))));
    assert!(matches!(Hmf1::read_from(Cursor::new(&bytes[..bytes.len() - 3])), Err(Hmf1Error::Io(_))));
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(matches!(Hmf1::read_from(Cursor::new(&extra)), Err(Hmf1Error::Trailing(1))));
    let mut rank = bytes.clone();
    rank[20 + 2 + 5] = 7;
    assert!(matches!(Hmf1::read_from(Cursor::new(&rank)), Err(Hmf1Error::BadRank { rank: 7, .. })));
    let mut even = bytes.clone();
    even[4] = 10;
    assert!(matches!(Hmf1::read_from(Cursor::new(&even)), Err(Hmf1Error::Grid(_))));
    let mut f = Hmf1::new(&g);
    f.push("nabla", FieldData::Rank0(haydys_core::Field0::zeros(&g)));
    assert!(matches!(f.to_configuration(), Err(Hmf1Error::WrongRank { .. })));
}

#[test]
fn seed_round_trips_through_residual() {
    let dir = tempfile::tempdir().unwrap();
    let seed = dir.path().join("seed.hmf1");
    let report = dir.path().join("r.json");
    assert_eq!(code(&["seed", "--n", "9", "--radius", "1", "--out", p(&seed)]), EXIT_OK);
    let out = run(&["residual", "--in", p(&seed), "--report", p(&report)]).unwrap();
    assert_eq!(out.code, EXIT_OK);
    let json: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json, out.report);
    assert_eq!(json["meta"]["grid"]["n"], 9);
    assert_eq!(json["meta"]["grid"]["radius"], 1.0);
    assert_eq!(json["meta"]["rng_seed"], 0);
    assert!(json["meta"]["version"].is_string());
    assert!(json["meta"]["wall_time_s"].is_number());
    assert_eq!(json["result"]["real"], true);
    assert_eq!(json["result"]["kappa_norms"][1], 0.0);
    for cmd in ["energy", "dimred"] {
        assert_eq!(code(&[cmd, "--in", p(&seed)]), EXIT_OK, "{cmd}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&["no-such-command"]), EXIT_USAGE);
    assert_eq!(code(&["seed", "--n", "10", "--out", p(&dir.path().join("x"))]), EXIT_USAGE);
    assert_eq!(code(&["seed", "--radius", "-1", "--out", p(&dir.path().join("x"))]), EXIT_USAGE);
    assert_eq!(code(&["tangent", "--in", "x", "--dir", "w", "--out", "y"]), EXIT_USAGE);
    assert_eq!(code(&["linear-model", "--trials", "0"]), EXIT_USAGE);
    assert_eq!(code(&["residual", "--in", p(&dir.path().join("missing.hmf1"))]), EXIT_DATA);
    let junk = dir.path().join("junk.hmf1");
    fs::write(&junk, b"HMF2 not a field file").unwrap();
    assert_eq!(code(&["energy", "--in", p(&junk)]), EXIT_DATA);
    assert_eq!(cli::main_with(["haydys", "--help"]), EXIT_OK);
    assert_eq!(cli::main_with(["haydys", "seed"]), EXIT_USAGE);
}

#[test]
fn linear_model_reports_every_identity() {
    let out = run(&["linear-model", "--group", "su3", "--trials", "50"]).unwrap();
    assert_eq!(out.code, EXIT_OK);
    let r = &out.report["result"];
    assert_eq!(r["group"], "su(3)");
    assert_eq!(r["all_passed"], true);
    assert!(r["checks"].as_array().unwrap().len() >= 20);
    let refuted: Vec<&str> = r["refuted"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(refuted.contains(&"I2 J2 K2 = diag(1,-1)"));
}

#[test]
fn quick_verification_passes_and_is_reproducible() {
    let a = run(&["verify-all", "--quick", "--fixed-clock", "--trials", "100"]).unwrap();
    assert_eq!(a.code, EXIT_OK, "{}", a.report["result"]["checks"]);
    let b = run(&["verify-all", "--quick", "--fixed-clock", "--trials", "100"]).unwrap();
    assert_eq!(serde_json::to_string(&a.report).unwrap(), serde_json::to_string(&b.report).unwrap());
    assert_eq!(a.report["meta"]["grid"]["n"], 33);
    assert_eq!(a.report["meta"]["wall_time_s"], 0.0);
}

#[test]
fn threads_do_not_change_a_solve() {
    let dir = tempfile::tempdir().unwrap();
    let seed = dir.path().join("seed.hmf1");
    assert_eq!(code(&["seed", "--n", "17", "--radius", "4", "--out", p(&seed)]), EXIT_OK);
    let solve = |threads: &str| {
        let out = dir.path().join(format!("hay{threads}.hmf1"));
        let o = run(&[
            "solve", "--seed", p(&seed), "--dir", "z", "--t", "0.05", "--threads", threads, "--fixed-clock", "--out", p(&out),
        ])
        .unwrap();
        (o, fs::read(&out).unwrap())
    };
    let (a, fa) = solve("1");
    let (b, fb) = solve("2");
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a.report["result"]["converged"], true);
    assert_eq!(a.report["result"], b.report["result"]);
    assert_eq!(fa, fb);
    let c = Hmf1::load(&dir.path().join("hay1.hmf1")).unwrap().to_configuration().unwrap();
    assert!(!c.is_real());
}
