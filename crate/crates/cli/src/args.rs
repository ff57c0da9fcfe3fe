use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qot::linalg::jz_operator;
use qot::metrics::ObservableSet;
use qot::sdp::SolverSettings;
use qot::states::{load_observables, load_state, random_density_hs, DensityMatrix, SeedSpec};

use crate::Failure;

#[derive(Parser, Debug)]
#[command(
    name = "qot",
    version,
    about = "Quantum Wasserstein distances, SWAP fidelities and their inequalities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one quantity for a pair of states.
    Distance(DistanceArgs),
    /// Self-distance of a single state.
    Selfdist(SelfdistArgs),
    /// CSV of F and F_S(PPT) over random Hilbert-Schmidt pairs.
    Scatter(ScatterArgs),
    /// CSV of F and F_S(PPT) between rho and its rotation by H over a theta grid.
    Dynamics(DynamicsArgs),
    /// Run the inequality suite and write one CSV record per check and sample.
    Verify(VerifyArgs),
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Dimension of each system.
    #[arg(long)]
    pub d: Option<usize>,
    /// Sample count.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Observables: `su`, `z`, `jz` or `file:PATH` (default `su`; `z` for dynamics).
    #[arg(long)]
    pub obs: Option<String>,
    /// Solver tolerance (primal and dual; the gap gets ten times this).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

impl Common {
    pub fn settings(&self) -> Result<SolverSettings, Failure> {
        let mut s = SolverSettings::default();
        if let Some(t) = self.tol {
            s = s.with_tolerance(t);
        }
        if let Some(m) = self.max_iter {
            s.max_iter = m;
        }
        s.validate().map_err(|e| Failure::Input(e.to_string()))?;
        Ok(s)
    }

    pub fn dim_or(&self, default: usize) -> Result<usize, Failure> {
        let d = self.d.unwrap_or(default);
        if d < 2 {
            return Err(Failure::Input(format!("--d must be at least 2, got {d}")));
        }
        Ok(d)
    }

    pub fn samples_or(&self, default: usize) -> Result<usize, Failure> {
        let n = self.n.unwrap_or(default);
        if n == 0 {
            return Err(Failure::Input("--n must be at least 1".into()));
        }
        Ok(n)
    }

    /// `su` gives the generalised Gell-Mann matrices; `z` gives `sigma_z` at
    /// `d = 2` and `J_z` otherwise; `jz` is `J_z` at every `d`; `file:PATH`
    /// reads a JSON array.
    pub fn observables(&self, d: usize, default: &str) -> Result<ObservableSet, Failure> {
        let set = match self.obs.as_deref().unwrap_or(default) {
            "su" => ObservableSet::su(d),
            "z" => ObservableSet::z(d),
            "jz" => ObservableSet::new(vec![jz_operator(d)])?,
            spec => match spec.strip_prefix("file:") {
                Some(path) => ObservableSet::new(load_observables(path)?)?,
                None => return Err(Failure::Input(format!("unknown observable spec {spec:?}"))),
            },
        };
        if set.dim() != d {
            return Err(Failure::Input(format!(
                "observables act on dimension {}, states on {d}",
                set.dim()
            )));
        }
        Ok(set)
    }
}

/// Reads `path` when given, otherwise draws a Hilbert-Schmidt state.
pub fn state_or_random(
    path: &Option<PathBuf>,
    d: Option<usize>,
    seed: SeedSpec,
) -> Result<DensityMatrix, Failure> {
    match path {
        Some(p) => Ok(load_state(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?),
        None => {
            let d = d.ok_or_else(|| {
                Failure::Input("give a state file or --d for a random state".into())
            })?;
            if d < 2 {
                return Err(Failure::Input(format!("--d must be at least 2, got {d}")));
            }
            Ok(random_density_hs(d, seed))
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Fidelity,
    Superfidelity,
    Bures,
    Delta,
    Euclid,
    DptAll,
    DptPpt,
    GmpcAll,
    GmpcPpt,
    ModifiedAll,
    ModifiedPpt,
    SwapFidelityAll,
    SwapFidelityPpt,
    SwapDistanceAll,
    SwapDistancePpt,
    Bsf2,
    Decomp,
    DecompUpper,
    PSwapFidelity,
    PSwapFidelitySym,
    BsfP,
}

#[derive(Args, Debug)]
pub struct DistanceArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// State file for rho; random (stream 0 of --seed) when absent.
    #[arg(long)]
    pub rho: Option<PathBuf>,
    /// State file for sigma; random (stream 1 of --seed) when absent.
    #[arg(long)]
    pub sigma: Option<PathBuf>,
    /// Number of copies for `p-swap-fidelity*` and `bsf-p`.
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cone {
    All,
    Ppt,
}

#[derive(Args, Debug)]
pub struct SelfdistArgs {
    #[arg(long)]
    pub rho: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ppt")]
    pub cone: Cone,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ScatterArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct DynamicsArgs {
    /// State file for rho; random (stream 0 of --seed) when absent.
    #[arg(long)]
    pub rho: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta_start: f64,
    #[arg(long, default_value_t = 0.01)]
    pub theta_step: f64,
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    pub theta_stop: f64,
    /// Step of the finite-difference second derivatives in the footer row.
    #[arg(long, default_value_t = 0.05)]
    pub fd_step: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
}
