//! `pod-dg` command line: `fom`, `pod`, `rom` and `compare`.
//!
//! Exit codes: 0 success, 2 invalid configuration or flags, 3 solver
//! failure, 4 rank exceeds the numerical rank, 5 malformed snapshot file,
//! 6 mismatched meshes or time grids.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::discretization::Mesh1D;
use crate::error::{Error, Result};
use crate::fom::run_fom;
use crate::io::{self, SnapshotFile};
use crate::metrics::{check_grids, error_series};
use crate::pod::build_basis;
use crate::rom::{build_offline, project_initial, run_rom, Closure, ClosureModel, RomOperators};

#[derive(Debug, Parser)]
#[command(name = "pod-dg", version, about = "POD-DG reduced models for 1D viscous Burgers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full-order model and store its snapshots.
    Fom(FomArgs),
    /// Build a POD basis from a snapshot file.
    Pod(PodArgs),
    /// Run the reduced model on a stored basis.
    Rom(RomArgs),
    /// Error series between two snapshot files.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct FomArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub energy: PathBuf,
}

#[derive(Debug, Args)]
pub struct PodArgs {
    #[arg(long)]
    pub snapshots: PathBuf,
    #[arg(long)]
    pub rank: usize,
    #[arg(long)]
    pub basis_out: PathBuf,
    #[arg(long)]
    pub spectrum: PathBuf,
    /// Run config supplying the domain; `[0, 1]` when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RomArgs {
    #[arg(long)]
    pub basis: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "plain")]
    pub model: String,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    /// Coefficient trajectory CSV.
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
    /// Reconstructed fields at the config's sample times.
    #[arg(long)]
    pub fields: Option<PathBuf>,
    /// Comma-separated `c1` values; needs `--fom` for the reference.
    #[arg(long, value_delimiter = ',')]
    pub sweep_c1: Option<Vec<f64>>,
    /// Full-order snapshots used as the sweep reference.
    #[arg(long)]
    pub fom: Option<PathBuf>,
    /// Sweep table CSV (`c1,final_l2`).
    #[arg(long)]
    pub sweep_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub fom: PathBuf,
    #[arg(long)]
    pub rom: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Run config supplying the domain; `[0, 1]` when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig { .. } | Error::InvalidMesh(_) | Error::Io(_) => 2,
        Error::SingularPivot { .. } | Error::Singular { .. } | Error::NoConvergence { .. } | Error::Dimension(_) => 3,
        Error::RankExceeded { .. } | Error::ZeroSpectrum => 4,
        Error::Format { .. } | Error::Checksum { .. } => 5,
        Error::GridMismatch { .. } | Error::MeshMismatch(_) => 6,
    }
}

/// Parse `args` (program name first) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn dispatch(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Fom(a) => cmd_fom(a),
        Command::Pod(a) => cmd_pod(a),
        Command::Rom(a) => cmd_rom(a),
        Command::Compare(a) => cmd_compare(a),
    }
}

fn domain_mesh(config: Option<&Path>, n_elems: u32) -> Result<Mesh1D> {
    match config {
        Some(p) => {
            let cfg = RunConfig::load(p)?;
            if cfg.n_elems != n_elems as usize {
                return Err(Error::MeshMismatch(format!(
                    "config has {} elements, file has {n_elems}",
                    cfg.n_elems
                )));
            }
            cfg.mesh()
        }
        None => Mesh1D::unit(n_elems as usize),
    }
}

pub fn cmd_fom(a: &FomArgs) -> Result<()> {
    let cfg = RunConfig::load(&a.config)?;
    let out = run_fom(&cfg.fom_config()?)?;
    SnapshotFile::from_snapshots(&out.snapshots).write(&a.out)?;
    io::write_energy_csv(&a.energy, &out.energy)?;
    eprintln!(
        "fom: {} snapshots, final energy {:.6e}",
        out.snapshots.len(),
        out.energy.last().map_or(0.0, |r| r.energy)
    );
    Ok(())
}

pub fn cmd_pod(a: &PodArgs) -> Result<()> {
    if a.rank == 0 {
        return Err(Error::config("rank", "must be at least 1"));
    }
    let file = SnapshotFile::read(&a.snapshots)?;
    let mesh = domain_mesh(a.config.as_deref(), file.n_elems)?;
    let snaps = file.to_snapshots(mesh)?;
    let basis = build_basis(&snaps, a.rank)?;
    SnapshotFile::from_basis(&basis).write(&a.basis_out)?;
    io::write_spectrum_csv(&a.spectrum, basis.eigenvalues())?;
    let frac = basis.cumulative_energy()[a.rank - 1];
    eprintln!("pod: rank {} captures {:.4}% of the fluctuation energy", a.rank, 100.0 * frac);
    Ok(())
}

fn closure_from_flags(model: ClosureModel, c1: Option<f64>, c2: Option<f64>) -> Result<Closure> {
    match model {
        ClosureModel::Plain => {
            if c1.is_some() || c2.is_some() {
                eprintln!("warning: model plain ignores --c1/--c2");
            }
            Ok(Closure::plain())
        }
        ClosureModel::C => {
            if c2.is_some() {
                eprintln!("warning: model c ignores --c2");
            }
            Closure::convective(c1.ok_or_else(|| Error::config("c1", "model c needs --c1"))?)
        }
        ClosureModel::Cd => Closure::convective_diffusive(
            c1.ok_or_else(|| Error::config("c1", "model cd needs --c1"))?,
            c2.ok_or_else(|| Error::config("c2", "model cd needs --c2"))?,
        ),
    }
}

pub fn cmd_rom(a: &RomArgs) -> Result<()> {
    let model: ClosureModel = a.model.parse()?;
    let cfg = RunConfig::load(&a.config)?;
    let file = SnapshotFile::read(&a.basis)?;
    if file.n_elems as usize != cfg.n_elems || file.degree as usize != cfg.degree {
        return Err(Error::config(
            "n_elems",
            format!(
                "config has {} elements of degree {}, basis has {} of degree {}",
                cfg.n_elems, cfg.degree, file.n_elems, file.degree
            ),
        ));
    }
    let mesh = cfg.mesh()?;
    let basis = file.to_basis(mesh)?;
    let ops = build_offline(&basis, cfg.nu)?;
    let u0 = cfg.ic.to_initial_condition().project(mesh, cfg.degree)?;
    let a0 = project_initial(&u0, &basis)?;
    let stride = cfg.stride()?;

    if let Some(list) = &a.sweep_c1 {
        if model == ClosureModel::Plain {
            return Err(Error::config("model", "--sweep-c1 needs model c or cd"));
        }
        let fom = a
            .fom
            .as_ref()
            .ok_or_else(|| Error::config("fom", "--sweep-c1 needs --fom for the reference solution"))?;
        return sweep(&ops, &basis, &a0, &cfg, model, list, a.c2, fom, a.sweep_out.as_deref());
    }

    let closure = closure_from_flags(model, a.c1, a.c2)?;
    let traj = run_rom(&ops, &a0, cfg.dt, cfg.t_end, closure)?;
    if let Some(p) = &a.coeffs {
        io::write_coeffs_csv(p, &traj)?;
    }
    if let Some(p) = &a.fields {
        let (times, fields) = traj.reconstruct(&basis, stride);
        SnapshotFile::from_fields(&fields, &times)?.write(p)?;
    }
    eprintln!("rom: model {model}, {} steps, rank {}", traj.len() - 1, ops.r);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    ops: &RomOperators,
    basis: &crate::pod::PodBasis,
    a0: &[f64],
    cfg: &RunConfig,
    model: ClosureModel,
    list: &[f64],
    c2: Option<f64>,
    fom: &Path,
    out: Option<&Path>,
) -> Result<()> {
    let reference = SnapshotFile::read(fom)?;
    let fields = reference.fields(cfg.mesh()?)?;
    let last = fields.last().expect("snapshot files are non-empty");
    let t_last = *reference.times.last().expect("one time per record");
    check_grids(&[t_last], &[cfg.t_end])?;
    let mut rows = Vec::with_capacity(list.len());
    println!("{:>12}  {:>12}", "c1", "final_l2");
    for &c1 in list {
        let closure = closure_from_flags(model, Some(c1), c2)?;
        let traj = run_rom(ops, a0, cfg.dt, cfg.t_end, closure)?;
        let err = crate::metrics::l2_error(&basis.reconstruct(traj.last()), last)?;
        println!("{c1:>12.4e}  {err:>12.4e}");
        rows.push((c1, err));
    }
    if let Some(p) = out {
        io::write_sweep_csv(p, &rows)?;
    }
    Ok(())
}

pub fn cmd_compare(a: &CompareArgs) -> Result<()> {
    let fom = SnapshotFile::read(&a.fom)?;
    let rom = SnapshotFile::read(&a.rom)?;
    if fom.n_elems != rom.n_elems || fom.degree != rom.degree {
        return Err(Error::MeshMismatch(format!(
            "fom has {} elements of degree {}, rom has {} of degree {}",
            fom.n_elems, fom.degree, rom.n_elems, rom.degree
        )));
    }
    check_grids(&fom.times, &rom.times)?;
    let mesh = domain_mesh(a.config.as_deref(), fom.n_elems)?;
    let series = error_series(&fom.fields(mesh)?, &rom.fields(mesh)?, &fom.times, &rom.times)?;
    io::write_error_csv(&a.out, &series)?;
    if let Some(i) = series.len().checked_sub(1) {
        println!(
            "t = {}: l2 = {:.3e}, l1 = {:.3e}",
            series.times[i], series.l2[i], series.l1[i]
        );
    }
    Ok(())
}
