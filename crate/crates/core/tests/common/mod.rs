#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

/// Haar-ish orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    gaussian(rng, n, n).qr().q()
}

/// `Q diag(values) Qᵀ`.
pub fn with_spectrum(q: &DMatrix<f64>, values: &[f64]) -> DMatrix<f64> {
    let m = q * DMatrix::from_diagonal(&DVector::from_column_slice(values)) * q.transpose();
    (&m + m.transpose()) * 0.5
}

pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = gaussian(rng, n, n);
    let m = &a * a.transpose() + DMatrix::identity(n, n) * 0.1;
    (&m + m.transpose()) * 0.5
}

/// Symmetric square root.
pub fn sqrtm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let e = m.clone().symmetric_eigen();
    with_spectrum(&e.eigenvectors, &e.eigenvalues.map(f64::sqrt).as_slice().to_vec())
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

// CLI helpers.

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

pub fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rdx-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

pub fn rdx(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdx"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("rdx runs")
}

/// One golden invocation: output file name, arguments, extra file written by the command.
pub struct GoldenCase {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub side_file: Option<&'static str>,
}

pub const GOLDEN_CASES: &[GoldenCase] = &[
    GoldenCase { name: "gen.json", args: &["gen", "--nx", "2", "--ny", "3", "--nz", "2", "--seed", "7"], side_file: None },
    GoldenCase {
        name: "gen_white.json",
        args: &["gen", "--nx", "2", "--ny", "2", "--nz", "2", "--seed", "3", "--var-n1", "0.4", "--var-n2", "0.9"],
        side_file: None,
    },
    GoldenCase { name: "bounds.json", args: &["bounds", "--model", "model.json", "--distortion", "distortion.json"], side_file: None },
    GoldenCase { name: "exact.json", args: &["exact", "--model", "model.json", "--t", "0.5", "--unit", "bits"], side_file: None },
    GoldenCase { name: "channel.json", args: &["channel", "--model", "model.json", "--distortion", "distortion.json"], side_file: None },
    GoldenCase { name: "mse.json", args: &["mse", "--model", "model.json", "--mse-d", "5.0"], side_file: None },
    GoldenCase { name: "raterate.json", args: &["raterate", "--model", "white.json", "--ri", "0.3"], side_file: None },
    GoldenCase {
        name: "simulate.json",
        args: &["simulate", "--model", "model.json", "--t", "0.5", "--samples", "100000", "--seed", "11"],
        side_file: None,
    },
    GoldenCase {
        name: "sweep.json",
        args: &["sweep", "--model", "model.json", "--points", "8", "--csv", "sweep.csv"],
        side_file: Some("sweep.csv"),
    },
];

/// Inputs shared by the golden cases, written into `dir`.
pub fn write_golden_inputs(dir: &Path) {
    let model = rdx(dir, &["gen", "--nx", "2", "--ny", "3", "--nz", "2", "--seed", "7", "--out", "model.json"]);
    assert!(model.status.success());
    let white = rdx(
        dir,
        &["gen", "--nx", "2", "--ny", "2", "--nz", "2", "--seed", "3", "--var-n1", "0.4", "--var-n2", "0.9", "--out", "white.json"],
    );
    assert!(white.status.success());
    // A target that is not below Sigma_x|z in the Loewner order.
    let text = std::fs::read_to_string(dir.join("model.json")).unwrap();
    let m = rdx_gauss::cli::ModelFile::parse(&text).unwrap().to_model().unwrap();
    let stats = rdx_gauss::model::derive_stats(&m).unwrap();
    let s1 = stats.informative_cov();
    let e = s1.clone().symmetric_eigen();
    let mut g = vec![0.4; 2];
    g[e.eigenvalues.imax()] = 1.6;
    let d = stats.sigma_x_given_yz.matrix() + with_spectrum(&e.eigenvectors, &g.iter().zip(e.eigenvalues.iter()).map(|(a, b)| a * b).collect::<Vec<_>>());
    let file = rdx_gauss::cli::DistortionFile::new(&d);
    std::fs::write(dir.join("distortion.json"), file.to_json()).unwrap();
}

/// Run every golden case; returns mismatching file names. With
/// `UPDATE_GOLDEN=1` the golden files are rewritten instead.
pub fn check_golden() -> Vec<String> {
    let dir = scratch_dir("golden");
    write_golden_inputs(&dir);
    let update = std::env::var("UPDATE_GOLDEN").is_ok_and(|v| v == "1");
    let golden = golden_dir();
    std::fs::create_dir_all(&golden).unwrap();
    let mut bad = Vec::new();
    for case in GOLDEN_CASES {
        let out = rdx(&dir, case.args);
        if !out.status.success() {
            bad.push(format!("{} (exit {:?}: {})", case.name, out.status.code(), String::from_utf8_lossy(&out.stderr)));
            continue;
        }
        let mut produced = vec![(case.name.to_string(), out.stdout)];
        if let Some(side) = case.side_file {
            produced.push((side.to_string(), std::fs::read(dir.join(side)).unwrap()));
        }
        for (name, bytes) in produced {
            let path = golden.join(&name);
            if update {
                std::fs::write(&path, &bytes).unwrap();
            } else if std::fs::read(&path).ok().as_deref() != Some(bytes.as_slice()) {
                bad.push(name);
            }
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    bad
}
