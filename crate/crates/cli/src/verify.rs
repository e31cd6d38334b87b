//! Finite-size exact identity suite.

use std::fmt;
use std::io::Write;

use frameavg::operator::{commutator, max_abs_diff, spectral_values};
use frameavg::{random_density_matrix, von_neumann_entropy};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::pipeline::Prepared;

/// Random states per averaging kind for the channel checks.
pub const RANDOM_STATES: u64 = 5;

/// Identity names and their default tolerances.
pub const TOLERANCES: [(&str, f64); 14] = [
    ("translation_invariance", 1e-10),
    ("unitary_invariance", 1e-9),
    ("work_relative_entropy", 1e-9),
    ("work_passivity", 1e-12),
    ("entropy_identity", 1e-9),
    ("relative_entropy_nonnegative", 1e-10),
    ("hiai_petz_chain", 1e-9),
    ("bs_eta_identity", 1e-8),
    ("me_normalization", 1e-9),
    ("gracefulness", 1e-10),
    ("trace_preservation", 1e-12),
    ("positivity", 1e-10),
    ("entropy_monotonicity", 1e-10),
    ("site_basis_agreement", 1e-9),
];

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

impl fmt::Display for IdentityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<44} residual {:>10.3e}  tol {:>8.1e}  {}",
            self.name,
            self.residual,
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub n: usize,
    pub checks: Vec<IdentityCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["identity", "N", "residual", "tolerance", "verdict"])?;
        for c in &self.checks {
            w.write_record([
                c.name.clone(),
                self.n.to_string(),
                crate::record::format_sig(c.residual),
                crate::record::format_sig(c.tolerance),
                if c.passed() { "pass".into() } else { "fail".into() },
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn tolerance_table(cfg: &ExperimentConfig) -> Result<Vec<(&'static str, f64)>, CliError> {
    for name in cfg.tolerance_overrides.keys() {
        if !TOLERANCES.iter().any(|(k, _)| k == name) {
            let known: Vec<&str> = TOLERANCES.iter().map(|(k, _)| *k).collect();
            return Err(CliError::Config(format!(
                "tolerance_overrides: unknown identity `{name}` (known: {})",
                known.join(", ")
            )));
        }
    }
    Ok(TOLERANCES
        .iter()
        .map(|&(k, v)| (k, cfg.tolerance_overrides.get(k).copied().unwrap_or(v)))
        .collect())
}

/// Runs every identity at the smallest configured size.
pub fn verify_identities(cfg: &ExperimentConfig) -> Result<VerifyReport, CliError> {
    let table = tolerance_table(cfg)?;
    let tol = |name: &str| table.iter().find(|(k, _)| *k == name).map(|(_, v)| *v).expect("known identity");
    let n = cfg.sizes[0];
    let p = Prepared::new(cfg.lattice(n)?, cfg.model, cfg.beta, cfg.perturbation())?;
    let mut checks = Vec::new();
    let mut push = |name: String, base: &str, residual: f64| {
        checks.push(IdentityCheck { name, residual, tolerance: tol(base) });
    };

    let rho = p.state.rho();
    let shifted = p.translation.conjugate(rho.as_mat());
    push("translation_invariance".into(), "translation_invariance", max_abs_diff(shifted.as_ref(), rho.as_mat()));
    drop(shifted);
    push("unitary_invariance".into(), "unitary_invariance", (p.s_rho_prime - p.s_rho).abs());
    push("work_relative_entropy".into(), "work_relative_entropy", p.work.residual());
    push("work_passivity".into(), "work_passivity", (-p.work.work).max(0.0));

    let h = p.state.hamiltonian();
    let rho_prime = p.rho_prime()?;
    for &kind in &cfg.averaging {
        let label = |base: &str| format!("{base}[{kind}]");
        let point = p.evaluate(kind)?;
        let r = &point.record;
        push(
            label("entropy_identity"),
            "entropy_identity",
            (r.rel_ent_avg - (-r.s_m_rho_prime + r.s_rho_prime + r.rel_ent_prime)).abs(),
        );
        push(label("relative_entropy_nonnegative"), "relative_entropy_nonnegative", (-r.rel_ent_avg).max(0.0));
        push(label("hiai_petz_chain"), "hiai_petz_chain", (r.rel_ent_avg - r.bs_rel_ent_avg).max(0.0));
        push(label("bs_eta_identity"), "bs_eta_identity", (r.bs_rel_ent_avg + point.eta_term).abs());
        push(label("me_normalization"), "me_normalization", (point.me_normalization - 1.0).abs());

        let map = p.frame_map(kind)?;
        let site_entropy = von_neumann_entropy(&map.apply(&rho_prime)?)?.nats;
        push(label("site_basis_agreement"), "site_basis_agreement", (site_entropy - r.s_m_rho_prime).abs());
        let (mut graceful, mut trace, mut positivity, mut monotone) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for i in 0..RANDOM_STATES {
            let sigma = random_density_matrix::<f64>(p.lattice.dim(), cfg.seed.wrapping_add(i));
            let out = map.apply(&sigma)?;
            let lhs = map.apply_mat(commutator(h.as_mat(), sigma.as_mat()).as_ref())?;
            let rhs = commutator(h.as_mat(), out.as_mat());
            graceful = graceful.max(max_abs_diff(lhs.as_ref(), rhs.as_ref()));
            trace = trace.max((out.trace() - 1.0).abs());
            let min = spectral_values(out.as_operator())?[0];
            positivity = positivity.max((-min).max(0.0));
            let gain = von_neumann_entropy(&out)?.nats - von_neumann_entropy(&sigma)?.nats;
            monotone = monotone.max((-gain).max(0.0));
        }
        push(label("gracefulness"), "gracefulness", graceful);
        push(label("trace_preservation"), "trace_preservation", trace);
        push(label("positivity"), "positivity", positivity);
        push(label("entropy_monotonicity"), "entropy_monotonicity", monotone);
    }
    Ok(VerifyReport { n, checks })
}
