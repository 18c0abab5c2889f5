//! Subcommands of the `lls` binary.
//!
//! Output CSVs print every float with Rust's `{:?}` formatting, the shortest
//! decimal string that parses back to the same binary64. Reruns of the same
//! config therefore produce byte-identical tables.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use lls_core::checks::{identity_battery, Operators};
use lls_core::config::{parse_run_config, RunConfig};
use lls_core::diagnostics::{convergence_study, uniform_in_h_study, uniqueness_check};
use lls_core::integrator::{simulate, Trajectory};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"LLSSNAP\0";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lls_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0} of {1} identities failed")]
    IdentityFailure(usize, usize),
}

impl CliError {
    /// 1 for bad input, 2 when a run aborts, 3 when `check` finds a broken identity.
    pub fn exit_code(&self) -> i32 {
        use lls_core::Error as E;
        match self {
            CliError::Core(E::DegenerateProjection { .. } | E::NonFinite { .. }) => 2,
            CliError::Core(_) => 1,
            CliError::Io { .. } => 2,
            CliError::IdentityFailure(..) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StudyKind {
    #[value(name = "uniform_h")]
    UniformH,
    Convergence,
    Uniqueness,
}

impl StudyKind {
    fn name(self) -> &'static str {
        match self {
            StudyKind::UniformH => "uniform_h",
            StudyKind::Convergence => "convergence",
            StudyKind::Uniqueness => "uniqueness",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Config file text together with its parsed form.
pub fn read_config(path: &Path) -> Result<(String, RunConfig)> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let cfg = parse_run_config(&text)?;
    Ok((text, cfg))
}

/// Collects written files so the manifest can list their digests.
struct OutDir {
    dir: PathBuf,
    files: Vec<Value>,
}

impl OutDir {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))?;
        self.files.push(json!({
            "name": name,
            "bytes": bytes.len(),
            "sha256": hex::encode(Sha256::digest(bytes)),
        }));
        Ok(())
    }

    fn finish(self, command: &str, config_text: &str, seed: u64, started: Instant, extra: Value) -> Result<()> {
        let unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let manifest = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": seed,
            "finished_unix": unix,
            "wall_clock_seconds": started.elapsed().as_secs_f64(),
            "config": config_text,
            "files": self.files,
            "results": extra,
        });
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        fs::write(&path, text + "\n").map_err(io_err(&path))
    }
}

pub fn snapshots_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,x,mx,my,mz\n");
    for (t, m) in traj.times.iter().zip(&traj.states) {
        for k in 0..traj.grid.n() {
            let [a, b, c] = m[k];
            writeln!(s, "{t:?},{:?},{a:?},{b:?},{c:?}", traj.grid.x(k)).unwrap();
        }
    }
    s
}

pub fn diagnostics_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,energy,sphere_dev,cross_lap_sq,lap_sq,m_h_increment\n");
    for r in &traj.records {
        writeln!(
            s,
            "{:?},{:?},{:?},{:?},{:?},{:?}",
            r.t, r.energy, r.sphere_dev, r.cross_lap_sq, r.lap_sq, r.m_h_increment
        )
        .unwrap();
    }
    s
}

/// Packed snapshots: magic, version (u32), n (u64), h, origin, count (u64),
/// then per slice `t` followed by `mx my mz` for every node, all little-endian.
pub fn snapshots_binary(traj: &Trajectory) -> Vec<u8> {
    let n = traj.grid.n();
    let mut out = Vec::with_capacity(44 + traj.states.len() * (1 + 3 * n) * 8);
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&traj.grid.h().to_le_bytes());
    out.extend_from_slice(&traj.grid.origin().to_le_bytes());
    out.extend_from_slice(&(traj.states.len() as u64).to_le_bytes());
    for (t, m) in traj.times.iter().zip(&traj.states) {
        out.extend_from_slice(&t.to_le_bytes());
        for k in 0..n {
            for c in m[k] {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
    }
    out
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

pub fn cmd_simulate(config: &Path, out: &Path, binary: bool) -> Result<Trajectory> {
    let started = Instant::now();
    let (text, cfg) = read_config(config)?;
    let traj = simulate(&cfg.sim)?;
    warn_all(&traj.warnings);
    let mut dir = OutDir::create(out)?;
    dir.write("snapshots.csv", snapshots_csv(&traj).as_bytes())?;
    dir.write("diagnostics.csv", diagnostics_csv(&traj).as_bytes())?;
    if binary {
        dir.write("snapshots.bin", &snapshots_binary(&traj))?;
    }
    let extra = json!({ "steps": cfg.sim.step_count(), "slices": traj.states.len(), "warnings": traj.warnings });
    dir.finish("simulate", &text, cfg.sim.seed, started, extra)?;
    Ok(traj)
}

/// Run the identity battery and print one line per identity.
pub fn run_check(cfg: &RunConfig, ops: &Operators, trials: usize, out: &mut impl Write) -> Result<()> {
    let results = identity_battery(&cfg.sim, ops, trials)?;
    let mut failed = 0;
    for r in &results {
        let tag = if r.passed() { "PASS" } else { "FAIL" };
        failed += usize::from(!r.passed());
        writeln!(out, "{tag} {:<55} max residual {:.3e} (tol {:.0e})", r.name, r.max_residual, r.tolerance)
            .map_err(io_err(Path::new("<stdout>")))?;
    }
    if failed > 0 {
        return Err(CliError::IdentityFailure(failed, results.len()));
    }
    Ok(())
}

pub fn cmd_check(config: &Path, trials: usize) -> Result<()> {
    let (_, cfg) = read_config(config)?;
    run_check(&cfg, &Operators::default(), trials, &mut std::io::stdout().lock())
}

pub fn cmd_study(config: &Path, kind: StudyKind, out: &Path) -> Result<()> {
    let started = Instant::now();
    let (text, cfg) = read_config(config)?;
    let st = &cfg.study;
    let mut dir = OutDir::create(out)?;
    let extra = match kind {
        StudyKind::UniformH => {
            let study = uniform_in_h_study(&cfg.sim, &st.h_list, st.paths)?;
            warn_all(&study.warnings);
            let mut s = String::from("h,paths,aborted,sup_energy_mean,sup_energy_se,cross_lap_mean,cross_lap_se\n");
            for r in &study.rows {
                writeln!(
                    s,
                    "{:?},{},{},{:?},{:?},{:?},{:?}",
                    r.h, r.paths, r.aborted, r.sup_energy_mean, r.sup_energy_se, r.cross_lap_mean, r.cross_lap_se
                )
                .unwrap();
            }
            dir.write("uniform_h.csv", s.as_bytes())?;
            json!({ "warnings": study.warnings })
        }
        StudyKind::Convergence => {
            let study = convergence_study(&cfg.sim, &st.h_list)?;
            let mut s = String::from("h_coarse,h_fine,sup_l2w,l2_h1w\n");
            for r in &study.rows {
                writeln!(s, "{:?},{:?},{:?},{:?}", r.h_coarse, r.h_fine, r.sup_l2w, r.l2_h1w).unwrap();
            }
            dir.write("convergence.csv", s.as_bytes())?;
            json!({ "weight": study.weight })
        }
        StudyKind::Uniqueness => {
            let rep = uniqueness_check(&cfg.sim, st.perturbation, st.second_seed)?;
            let mut s = String::from("t,distance\n");
            for (t, d) in rep.times.iter().zip(&rep.distances) {
                writeln!(s, "{t:?},{d:?}").unwrap();
            }
            dir.write("uniqueness.csv", s.as_bytes())?;
            json!({ "perturbation": rep.perturbation, "growth_rate": rep.growth_rate })
        }
    };
    dir.finish(&format!("study {}", kind.name()), &text, cfg.sim.seed, started, extra)
}
