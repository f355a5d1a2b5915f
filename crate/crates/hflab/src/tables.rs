//! CSV outputs: SCF traces, per-run survey rows and radial tail profiles.

use hflab_core::radial::{diagonal_q_profile, RadialOrbitalSet};
use hflab_core::scf::ScfTrace;
use hflab_core::survey::SurveyReport;

use crate::report::format_f64;

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV is UTF-8")
}

fn eps_headers(prefix: &[&str], n: usize) -> Vec<String> {
    prefix.iter().map(|s| s.to_string()).chain((1..=n).map(|i| format!("eps_{i}"))).collect()
}

/// `iter, E, E_bivariate, commutator_norm, eps_1..eps_N`.
pub fn trace_csv(trace: &ScfTrace, n_orbitals: usize) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(eps_headers(&["iter", "E", "E_bivariate", "commutator_norm"], n_orbitals)).expect("in-memory CSV");
    for (k, rec) in trace.records.iter().enumerate() {
        let mut row = vec![k.to_string(), format_f64(rec.energy), format_f64(rec.bivariate), format_f64(rec.commutator)];
        row.extend(rec.orbital_energies.iter().map(|&e| format_f64(e)));
        w.write_record(row).expect("in-memory CSV");
    }
    finish(w)
}

/// `seed, start, outcome, E, eps_1..eps_N, residual, cluster_id`; empty
/// cells for runs without a certified critical point.
pub fn survey_csv(report: &SurveyReport, seed: u64, n_orbitals: usize) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = eps_headers(&["seed", "start", "outcome", "E"], n_orbitals);
    header.push("residual".into());
    header.push("cluster_id".into());
    w.write_record(header).expect("in-memory CSV");
    for run in &report.runs {
        let mut row = vec![seed.to_string(), run.start.to_string(), run.status.as_str().to_string()];
        row.push(run.energy.map(format_f64).unwrap_or_default());
        match &run.orbital_energies {
            Some(e) => row.extend(e.iter().map(|&x| format_f64(x))),
            None => row.extend(std::iter::repeat_n(String::new(), n_orbitals)),
        }
        row.push(run.residual.map(format_f64).unwrap_or_default());
        row.push(run.cluster.map(|c| c.to_string()).unwrap_or_default());
        w.write_record(row).expect("in-memory CSV");
    }
    finish(w)
}

/// `r, u_1..u_N, Q_11..Q_NN` at every grid node.
pub fn tail_csv(orbs: &RadialOrbitalSet) -> String {
    let n = orbs.n_orbitals();
    let q = diagonal_q_profile(orbs);
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = std::iter::once("r".to_string())
        .chain((1..=n).map(|i| format!("u_{i}")))
        .chain((1..=n).map(|i| format!("Q_{i}{i}")))
        .collect();
    w.write_record(header).expect("in-memory CSV");
    for (a, &r) in orbs.grid.r().iter().enumerate() {
        let mut row = vec![format_f64(r)];
        row.extend((0..n).map(|i| format_f64(orbs.u[(a, i)])));
        row.extend((0..n).map(|i| format_f64(q[(a, i)])));
        w.write_record(row).expect("in-memory CSV");
    }
    finish(w)
}
