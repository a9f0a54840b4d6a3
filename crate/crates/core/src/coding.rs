//! Random-subspace entanglement-generation experiments: Haar-random
//! encodings of `R` inside a coding subspace `S' ⊆ A'^n`, sent through
//! `N^{⊗n}`, measured for decoupling and decoded with the Uhlmann decoder.

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::decoder::build_decoder;
use crate::decoupling::{hs_distance_sq, oneshot_bound, DecouplingInstance, Estimate};
use crate::error::{Error, Result};
use crate::linalg::{kron, max_abs, real, CMatrix, CVector};
use crate::random::{haar_unitary_matrix, SeededSource};
use crate::tensor::{DensityOperator, StateVector, TensorSpace};
use crate::typicality::{closest_type, flatten_code, TypicalDecomposition};

pub use crate::optimize::{maximize_coherent_information, multicopy_lower_bound, CoherentInfoMax, MulticopyBound};

/// How the coding subspace `S' ⊆ A'^n` is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubspaceMode {
    /// `S' = A'^n`; the input state is ignored.
    FullInput,
    /// The type class of `φ^{⊗n}` closest to the spectrum of `φ`.
    #[default]
    TypeClass,
    /// The flattened subspace from the typicality construction.
    Flattened,
}

impl SubspaceMode {
    pub fn name(self) -> &'static str {
        match self {
            SubspaceMode::FullInput => "full-input",
            SubspaceMode::TypeClass => "type-class",
            SubspaceMode::Flattened => "flattened",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CodeExperimentConfig {
    pub channel: Channel,
    /// Input state `φ^{A'}`.
    pub phi: DensityOperator,
    pub n: usize,
    pub r_dim: usize,
    pub trials: usize,
    pub delta: f64,
    pub seed: u64,
    pub mode: SubspaceMode,
}

impl CodeExperimentConfig {
    /// `Q = log₂|R| / n`.
    pub fn rate(&self) -> f64 {
        (self.r_dim as f64).log2() / self.n as f64
    }
}

/// Coding subspace and the decoupling instance it induces.
#[derive(Clone, Debug)]
pub struct CodingSubspace {
    pub mode: SubspaceMode,
    /// Orthonormal basis of `S'` in `A'^n` coordinates.
    pub input_basis: CMatrix,
    /// `Ψ^{SE^n}` with the code on the first `|R|` basis vectors of `S`.
    pub instance: DecouplingInstance,
    /// Dilation of `N^{⊗n}` with rows over `B^n ⊗ E^n`.
    pub dilation: CMatrix,
    pub b_dim: usize,
    pub e_dim: usize,
    pub chosen_type: Option<Vec<usize>>,
    /// Measured flattening error in flattened mode.
    pub epsilon: Option<f64>,
}

impl CodingSubspace {
    pub fn s_dim(&self) -> usize {
        self.input_basis.ncols()
    }

    pub fn oneshot_bound(&self) -> f64 {
        oneshot_bound(&self.instance)
    }
}

fn kron_power(m: &CMatrix, n: usize) -> CMatrix {
    (1..n).fold(m.clone(), |acc, _| kron(&acc, m))
}

/// Selects `S'` for `cfg.mode` and builds `Ψ^{SE^n} = Tr_{B^n} (I ⊗ V^{⊗n}) Φ^{SS'}`.
pub fn prepare_code(cfg: &CodeExperimentConfig) -> Result<CodingSubspace> {
    let ch = &cfg.channel;
    if cfg.n == 0 {
        return Err(Error::InvalidParameter("block length must be at least 1".into()));
    }
    if cfg.phi.dim() != ch.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.in_dim(),
            got: cfg.phi.dim(),
        });
    }
    let power = ch.tensor_power(cfg.n)?;
    let (b_dim, e_dim, a_dim) = (power.out_dim(), power.kraus_count(), power.in_dim());
    crate::check_budget(a_dim as u128 * b_dim as u128 * e_dim as u128 * a_dim as u128)?;

    let (input_basis, chosen_type, epsilon) = match cfg.mode {
        SubspaceMode::FullInput => (CMatrix::identity(a_dim, a_dim), None, None),
        SubspaceMode::TypeClass => {
            let dec = TypicalDecomposition::new(&cfg.phi, cfg.n, cfg.delta)?;
            let (t, _) = closest_type(&dec)?;
            (dec.type_basis(&t), Some(t.counts), None)
        }
        SubspaceMode::Flattened => {
            let phi_abe = crate::channel::purified_output(&cfg.phi, ch)?;
            let code = flatten_code(&phi_abe, cfg.n, cfg.delta)?;
            // reference coordinate k carries eigenvector k of φ
            let (_, vecs) = cfg.phi.eigen();
            let basis = kron_power(&vecs, cfg.n) * code.s_basis.conjugate();
            (basis, Some(code.chosen_type.counts.clone()), Some(code.epsilon))
        }
    };
    let s_dim = input_basis.ncols();
    if cfg.r_dim == 0 || cfg.r_dim > s_dim {
        return Err(Error::CodeTooLarge { r_dim: cfg.r_dim, s_dim });
    }

    let dilation = power.dilation_matrix();
    let m = &dilation * &input_basis * real(1.0 / (s_dim as f64).sqrt());
    let be = b_dim * e_dim;
    let amps = CVector::from_fn(s_dim * be, |i, _| m[(i % be, i / be)]);
    let space = TensorSpace::new([("S", s_dim), ("B", b_dim), ("E", e_dim)])?;
    let psi_se = StateVector::normalized_from(space, amps)?.reduced(&["S", "E"])?;
    let instance = DecouplingInstance::with_leading_code(psi_se, cfg.r_dim)?;

    Ok(CodingSubspace {
        mode: cfg.mode,
        input_basis,
        instance,
        dilation,
        b_dim,
        e_dim,
        chosen_type,
        epsilon,
    })
}

/// One Haar-random encoding, its decoupling distance and decoder fidelity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeExperimentRecord {
    pub trial: usize,
    /// `‖ψ_U^{RE^n} − π ⊗ ψ_U^{E^n}‖₁`.
    pub decoupling_distance: f64,
    /// `‖ψ_U^{RE^n} − π ⊗ ψ_U^{E^n}‖₂²`.
    pub hs_distance_sq: f64,
    /// `√(|R| |E^n| Tr[(Ψ^{SE^n})²])`, the same for every trial.
    pub oneshot_bound: f64,
    /// Uhlmann overlap achieved by the constructed decoder.
    pub achieved_fidelity: f64,
    /// Entanglement fidelity of the decoding channel.
    pub channel_fidelity: f64,
    pub infidelity: f64,
    /// `achieved_fidelity − (1 − decoupling_distance)`.
    pub fidelity_slack: f64,
    pub bound_holds: bool,
    /// `max |Υ^R − π|` for the encoding.
    pub encoding_defect: f64,
    /// `|‖ψ_U‖² − 1|`.
    pub trace_deviation: f64,
    /// Not part of any deterministic output.
    #[serde(skip)]
    pub wall_time_s: f64,
}

/// Tolerance of the per-trial check `F ≥ 1 − ‖ψ^{RE} − π⊗ψ^E‖₁`.
pub const FIDELITY_BOUND_TOL: f64 = 1e-8;

fn timer() -> impl Fn() -> f64 {
    #[cfg(not(target_arch = "wasm32"))]
    {
        let start = std::time::Instant::now();
        move || start.elapsed().as_secs_f64()
    }
    #[cfg(target_arch = "wasm32")]
    {
        || 0.0
    }
}

/// Encoding `Υ^{RA'^n} = (I ⊗ Uᵀ)Φ^{RR'}` embedded through `S'`, as an
/// `|R| × |A'^n|` coefficient matrix.
pub fn encoding_matrix(code: &CodingSubspace, u: &CMatrix) -> CMatrix {
    let r = code.instance.r_dim();
    let rows = u.rows(0, r).into_owned();
    rows * code.input_basis.transpose() * real(1.0 / (r as f64).sqrt())
}

/// Runs one trial with a given unitary on `S`.
pub fn run_trial(code: &CodingSubspace, trial: usize, u: &CMatrix) -> Result<CodeExperimentRecord> {
    let elapsed = timer();
    let r = code.instance.r_dim();
    let upsilon = encoding_matrix(code, u);
    let encoding_defect = max_abs(&(&upsilon * upsilon.adjoint() - CMatrix::identity(r, r) * real(1.0 / r as f64)));

    let out = &upsilon * code.dilation.transpose();
    let be = out.ncols();
    let amps = CVector::from_fn(r * be, |i, _| out[(i / be, i % be)]);
    let space = TensorSpace::new([("R", r), ("B", code.b_dim), ("E", code.e_dim)])?;
    let psi = StateVector::new_subnormalized(space, amps)?;
    let trace_deviation = (psi.norm_sq() - 1.0).abs();
    let psi = psi.normalized()?;

    let dec = build_decoder(&psi)?;
    let hs = hs_distance_sq(&psi.reduced(&["R", "E"])?, "R")?;
    let slack = dec.achieved_fidelity - (1.0 - dec.decoupling_tdist);
    Ok(CodeExperimentRecord {
        trial,
        decoupling_distance: dec.decoupling_tdist,
        hs_distance_sq: hs,
        oneshot_bound: code.oneshot_bound(),
        achieved_fidelity: dec.achieved_fidelity,
        channel_fidelity: dec.channel_fidelity,
        infidelity: 1.0 - dec.achieved_fidelity,
        fidelity_slack: slack,
        bound_holds: slack >= -FIDELITY_BOUND_TOL,
        encoding_defect,
        trace_deviation,
        wall_time_s: elapsed(),
    })
}

/// Records plus aggregate statistics.
#[derive(Clone, Debug)]
pub struct CodeExperiment {
    pub code: CodingSubspace,
    pub rate: f64,
    pub records: Vec<CodeExperimentRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeSummary {
    pub s_dim: usize,
    pub rate: f64,
    pub oneshot_bound: f64,
    pub decoupling_distance: Estimate,
    pub achieved_fidelity: Estimate,
    pub all_bounds_hold: bool,
}

impl CodeExperiment {
    pub fn summary(&self) -> CodeSummary {
        let dist: Vec<f64> = self.records.iter().map(|r| r.decoupling_distance).collect();
        let fid: Vec<f64> = self.records.iter().map(|r| r.achieved_fidelity).collect();
        CodeSummary {
            s_dim: self.code.s_dim(),
            rate: self.rate,
            oneshot_bound: self.code.oneshot_bound(),
            decoupling_distance: Estimate::from_values(&dist),
            achieved_fidelity: Estimate::from_values(&fid),
            all_bounds_hold: self.records.iter().all(|r| r.bound_holds),
        }
    }
}

/// Runs `cfg.trials` independent trials; trial `i` draws its unitary from
/// substream `i` of the master seed. Records are in trial order.
pub fn run_code_experiment(cfg: &CodeExperimentConfig) -> Result<CodeExperiment> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let code = prepare_code(cfg)?;
    let src = SeededSource::new(cfg.seed);
    let one = |i: usize| -> Result<CodeExperimentRecord> {
        let mut rng = src.substream(i as u64).rng();
        let u = haar_unitary_matrix(code.s_dim(), &mut rng);
        run_trial(&code, i, &u)
    };
    #[cfg(feature = "parallel")]
    let records: Result<Vec<_>> = {
        use rayon::prelude::*;
        (0..cfg.trials).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let records: Result<Vec<_>> = (0..cfg.trials).map(one).collect();
    Ok(CodeExperiment {
        rate: cfg.rate(),
        records: records?,
        code,
    })
}
