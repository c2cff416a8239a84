use crate::analysis::{CalibrationReport, DistanceReport, RegularizerReport, TaylorCheckReport};
use crate::evaluation::csv_field;

pub fn calibration_csv(r: &CalibrationReport) -> String {
    let mut out = String::from("bin,count,accuracy,confidence,ece\n");
    for b in &r.bins {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_field(&b.label),
            b.count,
            b.accuracy,
            b.confidence,
            b.ece
        ));
    }
    out.push_str(&format!("all,{},,,{}\n", r.count, r.ece));
    out
}

pub fn distance_csv(r: Option<&DistanceReport>) -> String {
    let mut out = String::from("metric,count,value\n");
    match r {
        Some(r) => {
            out.push_str(&format!("d_head,{},{}\n", r.e_thresh, r.d_head));
            out.push_str(&format!("d_rel,{},{}\n", r.e_thresh, r.d_rel));
        }
        None => out.push_str("nothing_to_analyze,0,\n"),
    }
    out
}

/// One row per (instance, tau).
pub fn taylor_csv(reports: &[TaylorCheckReport]) -> String {
    let mut out = String::from(
        "instance,tau,loss,residual,ratio,l0,derivative,derivative_loglik,derivative_fd,delta_h_norm,delta_r_norm\n",
    );
    for (i, r) in reports.iter().enumerate() {
        for j in 0..r.taus.len() {
            out.push_str(&format!(
                "{i},{},{},{},{},{},{},{},{},{},{}\n",
                r.taus[j],
                r.losses[j],
                r.residuals[j],
                r.ratios[j],
                r.l0,
                r.derivative,
                r.derivative_loglik,
                r.derivative_fd,
                r.delta_h_norm,
                r.delta_r_norm
            ));
        }
    }
    out
}

/// Plain-text pass/fail summary of the expansion checks.
pub fn taylor_summary(reports: &[TaylorCheckReport], reg: &RegularizerReport) -> String {
    let n = reports.len();
    let deriv_ok = reports.iter().filter(|r| r.derivative_ok).count();
    let defined: Vec<f64> = reports
        .iter()
        .filter_map(|r| r.ratios.first().copied())
        .filter(|v| v.is_finite())
        .collect();
    let mean_ratio = if defined.is_empty() {
        f64::NAN
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    let ratio_ok = (3.0..=5.0).contains(&mean_ratio);
    let verdict = |b: bool| if b { "PASS" } else { "FAIL" };
    let mut out = String::new();
    out.push_str(&format!("instances = {n}\n"));
    out.push_str(&format!(
        "derivative vs finite difference: {} ({deriv_ok}/{n} within 1e-4)\n",
        verdict(deriv_ok == n)
    ));
    out.push_str(&format!(
        "mean residual ratio at first tau: {} ({mean_ratio})\n",
        verdict(ratio_ok)
    ));
    out.push_str(&format!("tau_hat = {}\n", reg.tau));
    out.push_str(&format!("r1 = {}\nr2 = {}\n", reg.r1, reg.r2));
    if reg.empty_warning {
        out.push_str("warning: no low-degree triples, regularizers set to zero\n");
    }
    out
}
