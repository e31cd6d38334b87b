//! Commutators of the kick with Heisenberg-evolved single-site probes.

use std::io::Write;

use frameavg::lattice::pauli;
use frameavg::operator::{commutator, operator_norm};
use frameavg::{embed_site_operator, SiteOperator};
use log::info;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::pipeline::Prepared;
use crate::record::format_sig;

/// Off-site commutators that must vanish when nothing propagates.
pub const LOCALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub site: usize,
    pub distance: usize,
    /// `||[U, A_j(t)]||_op`
    pub kick_commutator: f64,
    /// `||[u_beta, A_j(t)]||_op`
    pub conjugated_commutator: f64,
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub n: usize,
    pub time: f64,
    pub probe: String,
    pub rows: Vec<ProbeRow>,
    /// Sites where an exactly vanishing commutator was expected but not found.
    pub violations: Vec<usize>,
}

impl ProbeReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["N", "time", "probe", "site", "distance", "comm_U", "comm_u_beta"])?;
        for r in &self.rows {
            w.write_record([
                self.n.to_string(),
                format_sig(self.time),
                self.probe.clone(),
                r.site.to_string(),
                r.distance.to_string(),
                format_sig(r.kick_commutator),
                format_sig(r.conjugated_commutator),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn locality_probe(cfg: &ExperimentConfig, time: f64, probe: &str) -> Result<ProbeReport, CliError> {
    if cfg.sizes.len() != 1 {
        return Err(CliError::Config(format!("probe: exactly one lattice size is required, got {:?}", cfg.sizes)));
    }
    if !time.is_finite() {
        return Err(CliError::Config(format!("probe: time must be finite, got {time}")));
    }
    let local = pauli::by_label::<f64>(probe)
        .ok_or_else(|| CliError::Config(format!("probe: unknown probe operator `{probe}` (use X, Y or Z)")))?;
    let n = cfg.sizes[0];
    let p = Prepared::new(cfg.lattice(n)?, cfg.model, cfg.beta, cfg.perturbation())?;
    let u = p.unitary.to_dense();
    let u_beta = p.u_beta();
    let decomp = p.state.hamiltonian_decomp();
    let free = matches!(cfg.model.model, frameavg::Model::FreeSpins { .. });
    let mut rows = Vec::with_capacity(n);
    let mut violations = Vec::new();
    for site in 0..n {
        let a = embed_site_operator(&p.lattice, &SiteOperator::new(site, local.clone()))?;
        let a_t = decomp.heisenberg(a.as_mat(), time);
        let kick_commutator = operator_norm(commutator(u.as_mat(), a_t.as_mat()).as_ref());
        let conjugated_commutator = operator_norm(commutator(u_beta.as_mat(), a_t.as_mat()).as_ref());
        let distance = p.lattice.cyclic_distance(site, cfg.kick.site);
        info!("site {site} (distance {distance}): |[U, A(t)]| = {kick_commutator:.3e}, |[u_beta, A(t)]| = {conjugated_commutator:.3e}");
        if site != cfg.kick.site && (time == 0.0 || free) && kick_commutator > LOCALITY_TOL {
            violations.push(site);
        }
        rows.push(ProbeRow { site, distance, kick_commutator, conjugated_commutator });
    }
    Ok(ProbeReport { n, time, probe: probe.to_ascii_uppercase(), rows, violations })
}
