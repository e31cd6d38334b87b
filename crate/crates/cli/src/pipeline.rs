//! One lattice size, one thermal state, one kick, several averages.

use std::time::Instant;

use frameavg::{
    build_hamiltonian, local_kick, perturb, thermal_state, translation_operator, AveragingKind, ComplexMatrix64,
    Density64, EnergyFrame, EnergyKick, FrameMap, HamiltonianSpec, LatticeSpec, PerturbationSpec, Thermal64,
    Unitary64, WorkReport,
};
use log::debug;

use crate::record::ExperimentRecord;

/// Everything shared by the averages at one lattice size.
pub struct Prepared {
    pub lattice: LatticeSpec,
    pub model: HamiltonianSpec,
    pub kick: PerturbationSpec<f64>,
    pub state: Thermal64,
    pub translation: Unitary64,
    pub unitary: Unitary64,
    pub frame: EnergyFrame<f64>,
    pub kicked: EnergyKick<f64>,
    pub s_rho: f64,
    pub s_rho_prime: f64,
    pub work: WorkReport<f64>,
    pub elapsed_s: f64,
}

impl Prepared {
    pub fn new(
        lattice: LatticeSpec,
        model: HamiltonianSpec,
        beta: f64,
        kick: PerturbationSpec<f64>,
    ) -> frameavg::Result<Self> {
        let start = Instant::now();
        let n = lattice.sites();
        let h = build_hamiltonian(&lattice, &model)?;
        let state = thermal_state(&h, beta)?;
        drop(h);
        debug!("N={n}: thermal state ready after {:.2}s", start.elapsed().as_secs_f64());
        let translation = translation_operator(&lattice);
        let unitary = local_kick(&lattice, &kick)?;
        let frame = EnergyFrame::new(&state);
        let kicked = frame.kick(&unitary)?;
        debug!("N={n}: kick in the energy basis after {:.2}s", start.elapsed().as_secs_f64());
        let work = WorkReport {
            work: kicked.work(),
            beta_work: beta * kicked.work(),
            relative_entropy_check: kicked.relative_entropy(),
        };
        Ok(Self {
            lattice,
            model,
            kick,
            s_rho: state.entropy(),
            s_rho_prime: kicked.entropy(),
            state,
            translation,
            unitary,
            frame,
            kicked,
            work,
            elapsed_s: start.elapsed().as_secs_f64(),
        })
    }

    pub fn sites(&self) -> usize {
        self.lattice.sites()
    }

    pub fn beta(&self) -> f64 {
        self.state.beta()
    }

    /// `rho' = U rho U^dag` in the site basis.
    pub fn rho_prime(&self) -> frameavg::Result<Density64> {
        perturb(&self.state, &self.unitary)
    }

    /// `exp(beta H / 2) U exp(-beta H / 2)` in the site basis.
    pub fn u_beta(&self) -> ComplexMatrix64 {
        ComplexMatrix64::new(self.frame.from_energy_basis(self.kicked.u_beta())).expect("square")
    }

    /// The map of `kind` acting on site-basis matrices.
    pub fn frame_map(&self, kind: AveragingKind<f64>) -> frameavg::Result<FrameMap<f64>> {
        FrameMap::of_kind(kind, &self.translation, self.sites(), || self.state.shared_decomp())
    }

    /// All quantities of one averaging kind.
    pub fn evaluate(&self, kind: AveragingKind<f64>) -> frameavg::Result<Point> {
        let start = Instant::now();
        let n = self.sites();
        let a = self.kicked.average(kind, n)?;
        debug!("N={n} {kind}: averaged after {:.2}s", start.elapsed().as_secs_f64());
        let record = ExperimentRecord {
            model: self.model.tag().to_string(),
            n,
            beta: self.beta(),
            kick_site: self.kick.site,
            kick_strength: self.kick.strength,
            avg_kind: kind.tag().to_string(),
            avg_param: kind.param(),
            s_rho: self.s_rho,
            s_rho_prime: self.s_rho_prime,
            s_m_rho_prime: a.entropy,
            rel_ent_prime: self.work.relative_entropy_check,
            rel_ent_avg: a.relative_entropy,
            bs_rel_ent_avg: a.bs_relative_entropy,
            beta_w: self.work.beta_work,
            me_deviation: a.deviation_op,
            entropy_density: self.s_rho / n as f64,
            wall_time_s: self.elapsed_s + start.elapsed().as_secs_f64(),
        };
        Ok(Point {
            record,
            work: self.work.work,
            eta_term: a.eta_term,
            me_frobenius: a.deviation_frobenius,
            me_normalization: a.normalization,
        })
    }
}

/// A record plus diagnostics that do not go into the CSV.
#[derive(Debug, Clone)]
pub struct Point {
    pub record: ExperimentRecord,
    pub work: f64,
    /// `tr[rho eta(M E)]`
    pub eta_term: f64,
    pub me_frobenius: f64,
    /// `tr(rho M E)`
    pub me_normalization: f64,
}

/// Row-wise checks every emitted record must pass.
#[derive(Debug, Clone, PartialEq)]
pub struct RowCheck {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
}

impl RowCheck {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

pub fn row_checks(p: &Point) -> Vec<RowCheck> {
    let r = &p.record;
    vec![
        RowCheck { name: "unitary_invariance", residual: (r.s_rho_prime - r.s_rho).abs(), tolerance: 1e-9 },
        RowCheck { name: "work_relative_entropy", residual: (r.beta_w - r.rel_ent_prime).abs(), tolerance: 1e-9 },
        RowCheck { name: "relative_entropy_nonnegative", residual: (-r.rel_ent_avg).max(0.0), tolerance: 1e-10 },
        RowCheck {
            name: "entropy_identity",
            residual: (r.rel_ent_avg - (-r.s_m_rho_prime + r.s_rho_prime + r.rel_ent_prime)).abs(),
            tolerance: 1e-9,
        },
        RowCheck { name: "me_normalization", residual: (p.me_normalization - 1.0).abs(), tolerance: 1e-9 },
    ]
}
