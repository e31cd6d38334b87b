//! Sweep rows and their CSV form.

use std::cmp::Ordering;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::CliError;

pub const HEADER: [&str; 17] = [
    "model",
    "N",
    "beta",
    "kick_site",
    "kick_strength",
    "avg_kind",
    "avg_param",
    "S_rho",
    "S_rho_prime",
    "S_M_rho_prime",
    "rel_ent_prime",
    "rel_ent_avg",
    "bs_rel_ent_avg",
    "beta_W",
    "ME_deviation",
    "entropy_density",
    "wall_time_s",
];

/// One sweep point. Infinite relative entropies are stored as `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub model: String,
    pub n: usize,
    pub beta: f64,
    pub kick_site: usize,
    pub kick_strength: f64,
    pub avg_kind: String,
    /// `R` or `tau`; none for the uniform average.
    pub avg_param: Option<f64>,
    pub s_rho: f64,
    pub s_rho_prime: f64,
    pub s_m_rho_prime: f64,
    pub rel_ent_prime: f64,
    pub rel_ent_avg: f64,
    pub bs_rel_ent_avg: f64,
    pub beta_w: f64,
    pub me_deviation: f64,
    pub entropy_density: f64,
    pub wall_time_s: f64,
}

fn kind_rank(kind: &str) -> u8 {
    match kind {
        "uniform-spatial" => 0,
        "weighted-spatial" => 1,
        "temporal" => 2,
        _ => 3,
    }
}

impl ExperimentRecord {
    /// Entropy gained by the average, `S(M rho') - S(rho')`.
    pub fn gain(&self) -> f64 {
        self.s_m_rho_prime - self.s_rho_prime
    }

    /// Ordering by `(N, kind, parameter)`.
    pub fn key_cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then(kind_rank(&self.avg_kind).cmp(&kind_rank(&other.avg_kind)))
            .then(self.avg_kind.cmp(&other.avg_kind))
            .then(
                self.avg_param
                    .unwrap_or(f64::NEG_INFINITY)
                    .total_cmp(&other.avg_param.unwrap_or(f64::NEG_INFINITY)),
            )
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.model.clone(),
            self.n.to_string(),
            format_sig(self.beta),
            self.kick_site.to_string(),
            format_sig(self.kick_strength),
            self.avg_kind.clone(),
            self.avg_param.map(format_sig).unwrap_or_default(),
            format_sig(self.s_rho),
            format_sig(self.s_rho_prime),
            format_sig(self.s_m_rho_prime),
            format_sig(self.rel_ent_prime),
            format_sig(self.rel_ent_avg),
            format_sig(self.bs_rel_ent_avg),
            format_sig(self.beta_w),
            format_sig(self.me_deviation),
            format_sig(self.entropy_density),
            format_sig(self.wall_time_s),
        ]
    }
}

/// Decimal text with 12 significant digits, `%g` style; `+inf` is `inf`.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn parse_float(s: &str) -> Result<f64, String> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| format!("not a number: {s:?}")),
    }
}

/// Writes the header and one line per record.
pub fn write_records<W: Write>(out: W, records: &[ExperimentRecord]) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[ExperimentRecord], path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    let file = File::create(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    write_records(file, records).map_err(|source| CliError::Csv { path: path.to_path_buf(), source })
}

/// Parses a file written by [`write_records`].
pub fn read_records<R: Read>(input: R) -> Result<Vec<ExperimentRecord>, String> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(input);
    let header = rdr.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(format!("unexpected header: {header:?}"));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| e.to_string())?;
        if row.len() != HEADER.len() {
            return Err(format!("expected {} fields, found {}", HEADER.len(), row.len()));
        }
        let f = |i: usize| parse_float(&row[i]);
        let u = |i: usize| row[i].parse::<usize>().map_err(|e| format!("{}: {e}", HEADER[i]));
        out.push(ExperimentRecord {
            model: row[0].to_string(),
            n: u(1)?,
            beta: f(2)?,
            kick_site: u(3)?,
            kick_strength: f(4)?,
            avg_kind: row[5].to_string(),
            avg_param: if row[6].is_empty() { None } else { Some(f(6)?) },
            s_rho: f(7)?,
            s_rho_prime: f(8)?,
            s_m_rho_prime: f(9)?,
            rel_ent_prime: f(10)?,
            rel_ent_avg: f(11)?,
            bs_rel_ent_avg: f(12)?,
            beta_w: f(13)?,
            me_deviation: f(14)?,
            entropy_density: f(15)?,
            wall_time_s: f(16)?,
        });
    }
    Ok(out)
}
